"""Rate-distortion-cost regions for cascade source coding with a vending machine."""
from ._accel import BACKEND
from .broadcast import (BroadcastRegionPoint, CRTestChannel, SumRateResult, bsc_action, bsc_example,
                        eval_broadcast_lossless, eval_bsc_closed_form, eval_cr_point,
                        eval_schannel_closed_form, eval_switching, greedy_gain,
                        lossless_cr_channel, optimize_broadcast_lossless, optimize_cr,
                        region_weighted_value, schannel_action, schannel_example,
                        weighted_sumrate)
from .cascade import (BoundaryTrace, CascadeTestChannel, RegionPoint, eval_cascade_lossless,
                      eval_cascade_point, lossless_test_channel, lower_convex_envelope,
                      optimal_decode, optimize_cascade, optimize_cascade_lossless,
                      trace_cascade_boundary)
from .errors import (ConfigurationError, Infeasible, OracleBudgetExceeded, RowCapExceeded,
                     UsageError)
from .model import FORBIDDEN, Budget, BroadcastModel, CascadeModel, SwitchingModel, hamming, validate
from .prob import (Alphabet, ConditionalChannel, JointDistribution, compose, conditional_entropy,
                   conditional_mutual_information, entropy, is_markov_chain, marginalize)
from .search import SearchConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Alphabet", "BoundaryTrace", "BroadcastModel", "BroadcastRegionPoint", "Budget",
    "CRTestChannel", "CascadeModel", "CascadeTestChannel", "ConditionalChannel",
    "ConfigurationError", "FORBIDDEN", "Infeasible", "JointDistribution", "OracleBudgetExceeded",
    "RegionPoint", "RowCapExceeded", "SearchConfig", "SumRateResult", "SwitchingModel",
    "UsageError", "bsc_action",
    "bsc_example", "compose", "conditional_entropy", "conditional_mutual_information", "entropy",
    "eval_broadcast_lossless", "eval_bsc_closed_form", "eval_cascade_lossless",
    "eval_cascade_point", "eval_cr_point", "eval_schannel_closed_form", "eval_switching",
    "greedy_gain", "hamming", "is_markov_chain", "lossless_cr_channel", "lossless_test_channel",
    "lower_convex_envelope", "marginalize", "optimal_decode", "optimize_broadcast_lossless",
    "optimize_cascade", "optimize_cascade_lossless", "optimize_cr", "region_weighted_value",
    "schannel_action", "schannel_example", "trace_cascade_boundary", "validate",
    "weighted_sumrate",
]
