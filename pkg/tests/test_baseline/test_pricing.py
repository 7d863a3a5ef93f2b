import numpy as np
import pytest

from hedgebench.baseline import (
    BsInputs,
    bs_call_price,
    delta_hedge_position,
    std_normal_cdf,
)
from hedgebench.exceptions import ConfigurationError, ContractError


def test_normal_cdf():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(0.1) == pytest.approx(0.539828, abs=1e-6)
    assert std_normal_cdf(-0.1) + std_normal_cdf(0.1) == pytest.approx(1.0, 1e-15)
    tails = std_normal_cdf(np.array([-40.0, 40.0]))
    assert np.all((tails >= 0) & (tails <= 1))


def test_at_the_money_delta():
    # d1 = 0.5 * 0.2 = 0.1 with a one year life
    x = delta_hedge_position(100.0, 100.0, 0.2, t=0, horizon=12, delta_t=1 / 12)
    assert x == pytest.approx(0.539828, abs=1e-6)


def test_delta_shrinks_towards_payoff_indicator():
    T = range(12)
    deep_itm = [delta_hedge_position(130.0, 100, 0.15, t, 12, 1 / 12) for t in T]
    deep_otm = [delta_hedge_position(70.0, 100, 0.15, t, 12, 1 / 12) for t in T]
    assert np.all(np.diff(deep_itm) > 0)
    assert np.all(np.diff(deep_otm) < 0)
    assert deep_itm[-1] > 0.99
    assert deep_otm[-1] < 0.01


def test_delta_on_arrays():
    s = np.array([90.0, 100.0, 110.0])
    x = delta_hedge_position(s, 100.0, 0.2, 5, 12, 1 / 12)
    assert x.shape == (3,)
    assert np.all(np.diff(x) > 0)


def test_delta_contracts():
    with pytest.raises(ContractError):
        delta_hedge_position(100.0, 100.0, 0.2, 12, 12, 1 / 12)
    with pytest.raises(ConfigurationError):
        delta_hedge_position(100.0, 100.0, 0.0, 0, 12, 1 / 12)


def test_call_price():
    price = bs_call_price(BsInputs(100.0, 100.0, 0.1337, 1.0))
    assert price == pytest.approx(5.33, abs=0.01)
    assert bs_call_price(BsInputs(110.0, 100.0, 0.2, 0.0)) == 10.0
    assert bs_call_price(BsInputs(90.0, 100.0, 0.2, 0.0)) == 0.0


def test_call_price_put_call_parity():
    inputs = BsInputs(105.0, 100.0, 0.25, 0.5, r_f_ann=0.03)
    call = bs_call_price(inputs)
    d1 = (np.log(1.05) + (0.03 + 0.5 * 0.25**2) * 0.5) / (0.25 * np.sqrt(0.5))
    d2 = d1 - 0.25 * np.sqrt(0.5)
    put = 100 * np.exp(-0.015) * std_normal_cdf(-d2) - 105 * std_normal_cdf(-d1)
    assert call - put == pytest.approx(105 - 100 * np.exp(-0.015), abs=1e-10)


@pytest.mark.slow
def test_call_price_against_monte_carlo():
    sigma = 0.1337
    z = np.random.default_rng(0).standard_normal(10**7)
    s_T = 100 * np.exp(-0.5 * sigma**2 + sigma * z)
    discounted = np.maximum(s_T - 100, 0)
    stderr = discounted.std() / np.sqrt(z.size)
    price = bs_call_price(BsInputs(100.0, 100.0, sigma, 1.0))
    assert abs(discounted.mean() - price) < 3 * stderr


def test_invalid_inputs():
    with pytest.raises(ConfigurationError):
        BsInputs(0.0, 100.0, 0.2, 1.0)
    with pytest.raises(ConfigurationError):
        BsInputs(100.0, 100.0, -0.2, 1.0)
    with pytest.raises(ConfigurationError):
        BsInputs(100.0, 100.0, 0.2, -1.0)
