"""FDD massive-MIMO rate balancing: Monte Carlo simulator and closed-form bounds."""

__version__ = "0.1.0"

from .channel import (
    BF,
    DP,
    PARTIAL_ZF,
    SCHEMES,
    ZF,
    ChannelRealization,
    SystemConfig,
    draw_downlink,
    draw_uplink,
    trial_stream,
)
from .quantizer import (
    QuantizedCsi,
    budget_for_distortion,
    codebook_quantize,
    distortion_for_budget,
    synthesize_pair,
)
from .precoding import DegenerateChannelError, PrecoderOutput, build_dp, build_linear
from .rates import (
    RateSample,
    dp_rate,
    feedback_budget_from_uplink,
    linear_rate,
    uplink_mmse_rate,
)
from .bounds import (
    ScalingParams,
    balancing_ratio,
    bf_beats_zf,
    delta_dp,
    gamma,
    partial_zf_derivative_sign,
    rate_floor_fast_nt,
    rate_floor_log_nt,
    uplink_asymptotic_sinr,
)
from .experiments import (
    ExperimentSpec,
    RateSummary,
    run_experiment,
    run_fig1,
    run_fig2,
    run_fig3,
    run_point,
)
