"""Closed-form asymptotic rates for the antenna-scaling regime.

The scaling regime keeps K = c_u log2(N) users and either lets the transmit
array grow faster than log2(N) (the "fast" floor, identical for all schemes)
or pins N_t = c_t log2(N) (the "log" floor with beta = 0 for BF, beta = 1 for
ZF and DP, plus the DP-only excess delta).  All expressions are evaluated in
double precision with log1p/expm1 formulations where arguments can be tiny.
"""

import math
from dataclasses import dataclass

from .channel import BF, DP, ZF

_LN2 = math.log(2.0)
_LOG2E = 1.0 / _LN2


@dataclass(frozen=True)
class ScalingParams:
    """Antenna-scaling coefficients: users/antennas per log2(N), feedback fraction.

    c_t may be omitted when only the fast-growth floor is needed.
    """

    c_u: float
    c_f: float
    coherence_block: int
    snr: float
    scheme: str = BF
    c_t: float | None = None

    def __post_init__(self):
        if not self.c_u > 0:
            raise ValueError("c_u must be positive")
        if self.c_f < 0:
            raise ValueError("c_f must be nonnegative")
        if self.coherence_block < 1 or not self.snr > 0:
            raise ValueError("coherence_block and snr must be positive")
        if self.scheme not in (BF, ZF, DP):
            raise ValueError("scheme must be one of bf, zf, dp")
        if self.c_t is not None and not self.c_t > 0:
            raise ValueError("c_t must be positive when given")
        if self.scheme in (ZF, DP) and self.c_t is not None and self.c_t < self.c_u:
            raise ValueError(f"{self.scheme} scaling requires c_t >= c_u")

    @property
    def cf_t(self) -> float:
        return self.c_f * self.coherence_block


def _one_minus_exp2(x: float) -> float:
    """1 - 2**(-x) without cancellation for small x."""
    return -math.expm1(-x * _LN2)


def balancing_ratio(coherence_block: int, n_tx: int) -> float:
    """Downlink bits bought per feedback bit in the interference-limited regime."""
    if coherence_block < 1 or n_tx < 1:
        raise ValueError("coherence_block and n_tx must be positive")
    return float(coherence_block) / float(n_tx)


def rate_floor_fast_nt(params: ScalingParams) -> float:
    """Per-user rate floor when n_tx outgrows log2(N); scheme independent."""
    rho = params.snr
    arg = rho / (1.0 + rho) * params.cf_t / (params.c_u * _LOG2E)
    return math.log1p(arg) * _LOG2E


def gamma(snr: float, c_f: float, coherence_block: int, c_t: float) -> float:
    """Effective SNR of the DP scaling integral; lies in [0, snr)."""
    x = c_f * coherence_block / c_t
    xi2 = math.exp(-x * _LN2)
    return snr * _one_minus_exp2(x) / (1.0 + snr * xi2)


def delta_dp(params: ScalingParams) -> float:
    """Excess of the DP floor over the ZF floor; 0 at gamma = 0 by continuity."""
    if params.c_t is None:
        raise ValueError("delta_dp needs c_t")
    g = gamma(params.snr, params.c_f, params.coherence_block, params.c_t)
    if g == 0.0:
        return 0.0
    ratio = params.c_t / params.c_u
    return -(1.0 + ratio * g) * math.log1p(-g / (1.0 + ratio * g)) * _LOG2E / g - _LOG2E


def rate_floor_log_nt(params: ScalingParams) -> float:
    """Per-user rate floor with n_tx = c_t log2(N); adds delta_dp for DP."""
    if params.c_t is None:
        raise ValueError("rate_floor_log_nt needs c_t")
    rho = params.snr
    beta = 0.0 if params.scheme == BF else 1.0
    x = params.cf_t / params.c_t
    xi2 = math.exp(-x * _LN2)
    num = rho * (params.c_t / params.c_u - beta) * _one_minus_exp2(x)
    den = 1.0 + rho * (1.0 - beta) + rho * beta * xi2
    floor = math.log1p(num / den) * _LOG2E
    if params.scheme == DP:
        floor += delta_dp(params)
    return floor


def bf_beats_zf(params: ScalingParams) -> bool:
    """Whether the BF floor exceeds the ZF floor at these scaling coefficients."""
    if params.c_t is None:
        raise ValueError("bf_beats_zf needs c_t")
    rho = params.snr
    rhs = _one_minus_exp2(params.cf_t / params.c_t) * rho / (1.0 + rho)
    return params.c_u / params.c_t > rhs


def partial_zf_derivative_sign(snr: float, xi2_limit: float, zeta: float) -> int:
    """Sign of the rate derivative in the nulled fraction beta.

    Positive means full ZF is optimal, negative means BF; the sign does not
    depend on beta, so interior nulling fractions are never optimal.
    """
    if not 0.0 <= xi2_limit <= 1.0:
        raise ValueError("xi2_limit must lie in [0, 1]")
    value = snr * (1.0 - xi2_limit) - zeta * (1.0 + snr)
    return int(math.copysign(1.0, value)) if value != 0.0 else 0


def uplink_asymptotic_sinr(snr: float, n_users: int, n_rx: int) -> float:
    """Finite-N surrogate of the MMSE SINR limit: rho * (N - K)."""
    return snr * float(n_rx - n_users)
