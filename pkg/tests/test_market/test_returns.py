import numpy as np
import pytest

from hedgebench.exceptions import ConfigurationError
from hedgebench.market import read_returns


def test_prices_become_log_returns(test_output_path):
    fname = test_output_path / "prices.csv"
    fname.write_text("Date,Price\n2020-01-31,100\n2020-02-29,110\n2020-03-31,99\n")
    returns = read_returns(fname)
    assert returns.name == "log_return"
    assert len(returns) == 2
    np.testing.assert_allclose(returns.values, np.log([1.1, 0.9]))
    assert str(returns.index[0].date()) == "2020-02-29"


def test_returns_column(test_output_path):
    fname = test_output_path / "returns.csv"
    fname.write_text("return\n0.01\n\n-0.02\n0.005\n")
    returns = read_returns(fname)
    np.testing.assert_allclose(returns.values, [0.01, -0.02, 0.005])


def test_bad_files(test_output_path):
    fname = test_output_path / "bad.csv"
    fname.write_text("close\n100\n101\n")
    with pytest.raises(ConfigurationError):
        read_returns(fname)
    fname.write_text("price\n100\n0\n")
    with pytest.raises(ConfigurationError):
        read_returns(fname)
