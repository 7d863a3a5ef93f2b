import json
import logging
import numpy as np
from pathlib import Path
import struct
from typing import Iterator, Union
import xarray as xr

from ..exceptions import CheckpointError, ConfigurationError
from .params import GjrGarchParams


MAGIC = b"HBPS"
VERSION = 1


class PricePath:
    """
    A single simulated price path.

    Attributes
    ----------
    prices : np.ndarray
        Prices S_0, ..., S_T (length T + 1).
    log_returns : np.ndarray
        Log-returns Y_1, ..., Y_T.
    cond_variances : np.ndarray
        Conditional variances sigma^2_1, ..., sigma^2_T.
    """

    def __init__(
        self,
        prices: np.ndarray,
        log_returns: np.ndarray = None,
        cond_variances: np.ndarray = None,
    ):
        self.prices = np.asarray(prices, dtype=np.float64)
        if log_returns is None:
            log_returns = np.diff(np.log(self.prices))
        self.log_returns = np.asarray(log_returns, dtype=np.float64)
        if cond_variances is None:
            cond_variances = np.full(len(self.log_returns), np.nan)
        self.cond_variances = np.asarray(cond_variances, dtype=np.float64)
        if len(self.prices) != len(self.log_returns) + 1:
            raise ConfigurationError(
                "PricePath: prices must be one element longer than returns"
            )

    @classmethod
    def constant(cls, s0: float, T: int) -> "PricePath":
        return cls(np.full(T + 1, float(s0)), np.zeros(T), np.zeros(T))

    @property
    def s0(self) -> float:
        return float(self.prices[0])

    @property
    def horizon(self) -> int:
        return len(self.log_returns)


class PathSet:
    """
    Immutable batch of simulated price paths.

    The paths are stored as 2D arrays (paths x time) so that episodes can be
    run for all paths at once.

    Parameters
    ----------
    prices : np.ndarray
        Array of shape (n, T + 1).
    log_returns : np.ndarray
        Array of shape (n, T).
    cond_variances : np.ndarray
        Array of shape (n, T).
    params : GjrGarchParams
        Parameters of the generating model.
    seed : int
        Master seed of the simulation.
    delta_t : float, optional (default: 1/12)
        Years per time step.
    stream_offset : int, optional (default: 0)
        Path ``i`` was generated with stream id ``stream_offset + i``.
    """

    def __init__(
        self,
        prices: np.ndarray,
        log_returns: np.ndarray,
        cond_variances: np.ndarray,
        params: GjrGarchParams,
        seed: int,
        delta_t: float = 1 / 12,
        stream_offset: int = 0,
    ):
        prices = np.array(prices, dtype=np.float64, ndmin=2)
        log_returns = np.array(log_returns, dtype=np.float64, ndmin=2)
        cond_variances = np.array(cond_variances, dtype=np.float64, ndmin=2)
        n, T1 = prices.shape
        if n == 0 or T1 < 2:
            raise ConfigurationError("PathSet: need at least one path and one step")
        if log_returns.shape != (n, T1 - 1) or cond_variances.shape != (n, T1 - 1):
            raise ConfigurationError("PathSet: inconsistent array shapes")
        if not np.all(prices[:, 0] == prices[0, 0]):
            raise ConfigurationError("PathSet: all paths must share s0")
        for arr in (prices, log_returns, cond_variances):
            arr.setflags(write=False)
        self.prices = prices
        self.log_returns = log_returns
        self.cond_variances = cond_variances
        self.params = params
        self.seed = int(seed)
        self.delta_t = float(delta_t)
        self.stream_offset = int(stream_offset)

    def __len__(self) -> int:
        return self.prices.shape[0]

    def __getitem__(self, i: int) -> PricePath:
        return PricePath(self.prices[i], self.log_returns[i], self.cond_variances[i])

    def __iter__(self) -> Iterator[PricePath]:
        for i in range(len(self)):
            yield self[i]

    @property
    def paths(self):
        return list(self)

    @property
    def horizon(self) -> int:
        return self.log_returns.shape[1]

    @property
    def s0(self) -> float:
        return float(self.prices[0, 0])

    def subset(self, indices) -> "PathSet":
        """PathSet restricted to the given path indices."""
        indices = np.asarray(indices)
        return PathSet(
            self.prices[indices],
            self.log_returns[indices],
            self.cond_variances[indices],
            self.params,
            self.seed,
            delta_t=self.delta_t,
            stream_offset=self.stream_offset,
        )

    def summary(self) -> dict:
        """
        Sample moments of the simulated log-returns.
        """
        y = self.log_returns.ravel()
        var = float(np.var(y, ddof=1)) if y.size > 1 else 0.0
        return {
            "n_paths": len(self),
            "horizon": self.horizon,
            "mean_log_return": float(np.mean(y)),
            "var_log_return": var,
            "annualized_vol": float(np.sqrt(var / self.delta_t)),
            "mean_terminal_price": float(np.mean(self.prices[:, -1])),
        }

    def metadata(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "seed": self.seed,
            "stream_offset": self.stream_offset,
            "s0": self.s0,
            "delta_t": self.delta_t,
            "n_paths": len(self),
            "horizon": self.horizon,
        }

    def to_dataset(self) -> xr.Dataset:
        """
        The path set as xarray Dataset with dimensions (path, time).
        """
        n, T = self.log_returns.shape
        ds = xr.Dataset(
            {
                "price": (["path", "time"], np.asarray(self.prices)),
                "log_return": (
                    ["path", "step"],
                    np.asarray(self.log_returns),
                ),
                "cond_variance": (
                    ["path", "step"],
                    np.asarray(self.cond_variances),
                ),
            },
            coords={
                "path": np.arange(n) + self.stream_offset,
                "time": np.arange(T + 1),
                "step": np.arange(1, T + 1),
            },
        )
        ds.price.attrs["long_name"] = "underlying price S_t"
        ds.log_return.attrs["long_name"] = "log-return Y_t"
        ds.cond_variance.attrs["long_name"] = "conditional variance sigma^2_t"
        meta = self.metadata()
        ds.attrs.update({k: v for k, v in meta.items() if k != "params"})
        ds.attrs.update({f"garch_{k}": v for k, v in meta["params"].items()})
        return ds

    def write_netcdf(self, fname: Union[Path, str]):
        fname = Path(fname)
        fname.parent.mkdir(exist_ok=True, parents=True)
        ds = self.to_dataset()
        ds.to_netcdf(
            fname,
            encoding={v: {"zlib": True, "complevel": 4} for v in ds.data_vars},
        )
        logging.info(f"write_netcdf: wrote {len(self)} paths to {fname}")

    def save(self, fname: Union[Path, str]):
        """
        Writes the binary path file and its JSON sidecar.

        The binary file starts with the magic bytes ``HBPS`` and a version
        byte, followed by little-endian uint32 ``n`` and ``T`` and the
        little-endian float64 arrays prices, log-returns and conditional
        variances (row-major). The sidecar has the same name with suffix
        ``.json``.
        """
        fname = Path(fname)
        fname.parent.mkdir(exist_ok=True, parents=True)
        n, T = self.log_returns.shape
        with open(fname, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<B", VERSION))
            f.write(struct.pack("<II", n, T))
            for arr in (self.prices, self.log_returns, self.cond_variances):
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        with open(fname.with_suffix(".json"), "w") as f:
            json.dump(self.metadata(), f, indent=2)
        logging.info(f"PathSet.save: wrote {n} paths to {fname}")

    @classmethod
    def load(cls, fname: Union[Path, str]) -> "PathSet":
        fname = Path(fname)
        sidecar = fname.with_suffix(".json")
        if not fname.exists() or not sidecar.exists():
            raise CheckpointError(f"Path set or sidecar missing: {fname}")
        with open(fname, "rb") as f:
            header = f.read(len(MAGIC) + 1 + 8)
            if header[: len(MAGIC)] != MAGIC:
                raise CheckpointError(f"{fname} is not a path set file")
            (version,) = struct.unpack("<B", header[len(MAGIC) : len(MAGIC) + 1])
            if version != VERSION:
                raise CheckpointError(f"Unsupported path set version {version}")
            n, T = struct.unpack("<II", header[len(MAGIC) + 1 :])
            data = np.frombuffer(f.read(), dtype="<f8")
        expected = n * (T + 1) + 2 * n * T
        if data.size != expected:
            raise CheckpointError(
                f"{fname} is truncated: expected {expected} values,"
                f" found {data.size}"
            )
        prices = data[: n * (T + 1)].reshape(n, T + 1)
        rest = data[n * (T + 1) :]
        log_returns = rest[: n * T].reshape(n, T)
        cond_variances = rest[n * T :].reshape(n, T)
        with open(sidecar, "r") as f:
            meta = json.load(f)
        return cls(
            prices.astype(np.float64),
            log_returns.astype(np.float64),
            cond_variances.astype(np.float64),
            GjrGarchParams.from_dict(meta["params"]),
            meta["seed"],
            delta_t=meta["delta_t"],
            stream_offset=meta.get("stream_offset", 0),
        )
