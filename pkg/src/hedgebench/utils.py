import dataclasses
import hashlib
import json
import logging
from multiprocessing.pool import ThreadPool
import os
from typing import Callable, Iterable, List, Mapping

from .exceptions import ConfigurationError


def str2bool(val):  # pragma: no cover
    if val in ["True", "true", "t", "T", "1", "yes", "y"]:
        return True
    else:
        return False


def n_threads(requested: int = None) -> int:
    """
    Size of worker pools.

    Parameters
    ----------
    requested : int, optional
        Requested pool size. If not given, the value of the environment
        variable ``HEDGEBENCH_THREADS`` is used (default 1). If both are set,
        the environment variable acts as upper bound.
    """
    value = os.environ.get("HEDGEBENCH_THREADS")
    cap = None
    if value is not None:
        try:
            cap = int(value)
        except ValueError:
            raise ConfigurationError(
                f"HEDGEBENCH_THREADS must be an integer, got '{value}'"
            )
    if requested is None:
        requested = cap if cap is not None else 1
    elif cap is not None:
        requested = min(requested, cap)
    return max(1, requested)


def ordered_map(func: Callable, items: Iterable, threads: int = 1) -> List:
    """
    Applies `func` to all items, optionally on a thread pool.

    The results are always returned in input order, independent of the order
    in which the workers finish.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logging.debug(f"ordered_map: using thread pool with {threads} threads")
    with ThreadPool(threads) as pool:
        return pool.map(func, items)


def fingerprint(obj) -> str:
    """
    Short stable hash of a (dataclass or mapping) configuration object.
    """
    if dataclasses.is_dataclass(obj):
        obj = dataclasses.asdict(obj)
    text = json.dumps(obj, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def reject_unknown_keys(data: Mapping, allowed: Iterable, where: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigurationError(f"Unknown key(s) in {where}: {unknown}")
