from .params import GjrGarchParams, stationary_variance, annualized_volatility
from .paths import PricePath, PathSet
from .garch import (
    initial_variance,
    simulate_from_innovations,
    simulate_paths,
    conditional_variances,
    negative_log_likelihood,
    calibrate_mle,
)
from .returns import read_returns
