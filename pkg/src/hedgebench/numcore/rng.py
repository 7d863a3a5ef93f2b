"""
Deterministic counter-based random streams.

Every stream is a Philox bit generator keyed by the pair (seed, stream_id).
Philox is a counter-based generator whose output is fully specified by its
key and counter, so a stream gives the same sequence on every platform, and
different stream ids give independent sequences. Streams can be consumed
in parallel without locks.

Variates are derived from the raw 64-bit words only, never from numpy's
distribution methods (whose algorithms may change between versions):

- uniform: ``u = ((raw >> 11) + 0.5) * 2**-53``, which lies strictly in (0, 1)
- standard normal: inverse-CDF transform ``z = ndtri(u)``

These transforms are fixed, so golden values in tests stay stable.
"""

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


class RngStream:
    """
    Random stream identified by (seed, stream_id).

    Parameters
    ----------
    seed : int
        64-bit master seed.
    stream_id : int, optional (default: 0)
        64-bit stream identifier.
    counter : int, optional (default: 0)
        Number of 64-bit words already consumed. A stream created with
        ``counter=c`` continues exactly where a fresh stream would be after
        ``c`` draws.
    """

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = (self.stream_id << 64) | self.seed
        self._bitgen = np.random.Philox(key=key)
        self.counter = 0
        if counter:
            self._raw(int(counter))

    def _raw(self, n: int) -> np.ndarray:
        out = self._bitgen.random_raw(n)
        self.counter += n
        return np.asarray(out, dtype=np.uint64)

    def spawn(self, stream_id: int) -> "RngStream":
        """New stream with the same seed and a different id."""
        return RngStream(self.seed, stream_id)

    def generator(self) -> np.random.Generator:
        """
        Numpy generator seeded from this stream, for index sampling
        (replay batches, dataset shuffling) where only reproducibility for a
        fixed numpy version is needed.
        """
        seed = int(self._raw(1)[0])
        return np.random.default_rng(seed)

    def __repr__(self):
        return (
            f"RngStream(seed={self.seed}, stream_id={self.stream_id},"
            f" counter={self.counter})"
        )


def uniform(stream: RngStream, n: int) -> np.ndarray:
    """
    `n` uniform variates in the open interval (0, 1).
    """
    if n <= 0:
        return np.empty(0)
    raw = stream._raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def gaussian(stream: RngStream, n: int) -> np.ndarray:
    """
    `n` standard normal variates via the inverse-CDF transform.
    """
    if n <= 0:
        return np.empty(0)
    return ndtri(uniform(stream, n))
