import logging
import numpy as np
import pandas as pd
from pathlib import Path
from typing import Union

from ..exceptions import ConfigurationError


def read_returns(fname: Union[Path, str]) -> pd.Series:
    """
    Reads a log-return series from a CSV file.

    The file must have a header with either a ``price`` column (prices are
    converted to log-returns) or a ``return`` column (used as is). A ``date``
    column, if present, becomes the index.

    Parameters
    ----------
    fname : Path or str
        CSV file.

    Returns
    -------
    returns : pd.Series
        Log-returns in file order, without missing values.
    """
    fname = Path(fname)
    with open(fname, "r") as f:
        df = pd.read_csv(f)
    df.columns = [c.strip().lower() for c in df.columns]
    if "date" in df.columns:
        df.index = pd.to_datetime(df.pop("date"))
    if "return" in df.columns:
        returns = df["return"].astype(float)
    elif "price" in df.columns:
        prices = df["price"].astype(float)
        if (prices <= 0).any():
            raise ConfigurationError(f"{fname}: prices must be positive")
        returns = np.log(prices).diff().iloc[1:]
    else:
        raise ConfigurationError(
            f"{fname}: expected a 'price' or 'return' column, found"
            f" {list(df.columns)}"
        )
    returns = returns.dropna()
    returns.name = "log_return"
    logging.info(f"read_returns: read {len(returns)} returns from {fname}")
    return returns
