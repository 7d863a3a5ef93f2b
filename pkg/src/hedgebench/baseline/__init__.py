from .pricing import BsInputs, std_normal_cdf, bs_call_price, delta_hedge_position
from .delta_hedge import DeltaHedgePolicy, run_delta_hedge
