"""Experiment harness: sweeps, trial execution, aggregation.

Each trial derives its own counter-based stream from
(master seed, spec salt, point index, scheme index, trial index, attempt), so
results are bit-identical for a fixed seed no matter how many worker threads
run, and redraws of degenerate trials stay deterministic.  Aggregation is an
ordered fold over trial indices.

The feedback budget of a trial is either the configured fixed bit count or,
under the uplink-fraction policy, B_i = c_f * R_U,i * T computed from that
trial's own simulated uplink MMSE rate (per user).  The alternative
``uplink_budget="average"`` uses the per-user rate averaged over 100 warm-up
uplink realizations instead of the instantaneous one.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bounds import ScalingParams, rate_floor_fast_nt, rate_floor_log_nt
from .channel import BF, DP, PARTIAL_ZF, SCHEMES, ZF, SystemConfig, draw_uplink, trial_stream
from .precoding import DegenerateChannelError, build_dp, build_linear
from .quantizer import distortion_for_budget, synthesize_pair
from .rates import dp_rate, feedback_budget_from_uplink, linear_rate, uplink_mmse_rate

REDRAW_CAP = 10
WARMUP_REALIZATIONS = 100
_WARMUP_TAG = 1_000_000

FIG1_BITS_GRID = tuple(range(0, 201, 4))
FIG_ANTENNA_GRID = (4, 8, 16, 32, 64, 128, 256)
DEFAULT_TRIALS = 2000


class ExperimentError(RuntimeError):
    """Unrecoverable experiment failure (e.g. redraw cap exceeded)."""


class PointSkipped(Exception):
    """A sweep point violates the config invariants for this scheme."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a base config, a swept axis and the schemes to run.

    sweep_kind "feedback_bits" sweeps the bit budget, "antennas" sweeps the
    receive-array size N (with K and n_tx derived by the policies below), and
    "points" runs explicitly listed config overrides.
    """

    name: str
    base: SystemConfig
    sweep_kind: str
    sweep_values: tuple
    schemes: tuple[str, ...]
    trials: int
    antenna_policy: str = "fixed"  # all | log | fixed
    user_policy: str = "fixed"  # log | fixed
    feedback_policy: str = "fixed_bits"  # fixed_bits | uplink_fraction
    c_u: float | None = None
    c_t: float | None = None
    uplink_budget: str = "instantaneous"  # instantaneous | average
    bound_kind: str = "none"  # none | per_user | sum
    policy_label: str = ""
    stream_salt: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sweep_kind not in ("feedback_bits", "antennas", "points"):
            raise ValueError(f"unknown sweep_kind {self.sweep_kind!r}")
        if self.antenna_policy not in ("all", "log", "fixed"):
            raise ValueError(f"unknown antenna_policy {self.antenna_policy!r}")
        if self.user_policy not in ("log", "fixed"):
            raise ValueError(f"unknown user_policy {self.user_policy!r}")
        if self.feedback_policy not in ("fixed_bits", "uplink_fraction"):
            raise ValueError(f"unknown feedback_policy {self.feedback_policy!r}")
        if self.uplink_budget not in ("instantaneous", "average"):
            raise ValueError(f"unknown uplink_budget {self.uplink_budget!r}")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ValueError(f"unknown schemes {unknown}")
        if self.antenna_policy == "log" and self.c_t is None:
            raise ValueError("antenna_policy 'log' needs c_t")
        if self.user_policy == "log" and self.c_u is None:
            raise ValueError("user_policy 'log' needs c_u")


@dataclass
class RateSummary:
    """Aggregated result of one (sweep point, scheme) cell."""

    point: float
    scheme: str
    mean_user_rate: float
    sum_rate: float
    stderr: float
    trials_used: int
    trials_redrawn: int
    bound_overlay: float | None
    config: SystemConfig
    policy_label: str
    seed: int


@dataclass
class SkippedPoint:
    point: float
    scheme: str
    policy_label: str
    reason: str


def resolve_worker_count() -> int:
    """Worker cap from FDD_MIMO_THREADS; 0 or unset means auto."""
    raw = os.environ.get("FDD_MIMO_THREADS", "").strip()
    if raw in ("", "0"):
        return os.cpu_count() or 1
    n = int(raw)
    if n < 1:
        raise ValueError("FDD_MIMO_THREADS must be a nonnegative integer")
    return n


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def resolve_case(spec: ExperimentSpec, point_index: int, scheme: str) -> SystemConfig:
    """Resolve a (sweep point, scheme) pair to a full config.

    Raises PointSkipped when a derived config violates an invariant (e.g.
    K > n_tx under ZF/DP); such points are reported, never silently altered.
    """
    value = spec.sweep_values[point_index]
    base = spec.base
    zf_order = base.zf_order if scheme == PARTIAL_ZF else None
    try:
        if spec.sweep_kind == "feedback_bits":
            return replace(
                base,
                scheme=scheme,
                zf_order=zf_order,
                feedback_bits_per_block=float(value),
                feedback_fraction=None,
            )
        if spec.sweep_kind == "antennas":
            n = int(value)
            lg = math.log2(n)
            k = _round_half_up(spec.c_u * lg) if spec.user_policy == "log" else base.n_users
            if spec.antenna_policy == "all":
                n_tx = n
            elif spec.antenna_policy == "log":
                n_tx = min(_round_half_up(spec.c_t * lg), n)
            else:
                n_tx = base.n_tx
            return replace(
                base, n_rx=n, n_tx=n_tx, n_users=max(1, k), scheme=scheme, zf_order=zf_order
            )
        overrides = dict(value)
        overrides.setdefault("scheme", scheme)
        overrides.setdefault("zf_order", zf_order)
        return replace(base, **overrides)
    except ValueError as exc:
        raise PointSkipped(str(exc)) from exc


def overlay_floor(spec: ExperimentSpec, scheme: str, config: SystemConfig) -> float | None:
    """Closed-form floor for this cell, or None when no asymptote applies."""
    if spec.bound_kind == "none" or spec.feedback_policy != "uplink_fraction":
        return None
    if spec.antenna_policy not in ("all", "log") or spec.c_u is None:
        return None
    try:
        params = ScalingParams(
            c_u=spec.c_u,
            c_f=config.feedback_fraction,
            coherence_block=config.coherence_block,
            snr=config.snr,
            scheme=scheme,
            c_t=spec.c_t,
        )
    except ValueError:
        return None
    floor = rate_floor_fast_nt(params) if spec.antenna_policy == "all" else rate_floor_log_nt(params)
    if spec.bound_kind == "sum":
        floor *= config.n_users
    return floor


def _warmup_budget(spec: ExperimentSpec, point_index: int, config: SystemConfig) -> np.ndarray:
    """Per-user bit budget from the uplink rate averaged over warm-up draws."""
    rng = trial_stream(config.seed, spec.stream_salt, point_index, _WARMUP_TAG)
    acc = np.zeros(config.n_users)
    for _ in range(WARMUP_REALIZATIONS):
        up = draw_uplink(config, rng)
        acc += uplink_mmse_rate(up.uplink, config.snr).per_user_rate
    return feedback_budget_from_uplink(
        acc / WARMUP_REALIZATIONS, config.feedback_fraction, config.coherence_block
    )


def _trial_rates(
    config: SystemConfig,
    scheme: str,
    rng: np.random.Generator,
    fixed_budget: np.ndarray | None,
) -> np.ndarray:
    """One Monte Carlo trial; returns per-user rates in bits/symbol."""
    if fixed_budget is not None:
        bits = fixed_budget
    elif config.feedback_bits_per_block is not None:
        bits = np.full(config.n_users, config.feedback_bits_per_block)
    else:
        up = draw_uplink(config, rng)
        uplink = uplink_mmse_rate(up.uplink, config.snr)
        bits = feedback_budget_from_uplink(
            uplink.per_user_rate, config.feedback_fraction, config.coherence_block
        )
    xi2 = distortion_for_budget(bits, config.n_tx)
    realization, csi = synthesize_pair(config, xi2, rng)
    if scheme == DP:
        precoder = build_dp(csi, rng)
        return dp_rate(precoder, xi2, config.snr, config.n_users).per_user_rate
    order = {BF: 0, ZF: config.n_users - 1, PARTIAL_ZF: config.zf_order}[scheme]
    precoder = build_linear(csi, order, rng)
    return linear_rate(realization.downlink, precoder, config.snr).per_user_rate


def run_point(spec: ExperimentSpec, point_index: int, scheme: str) -> RateSummary:
    """Run all trials of one (sweep point, scheme) cell and aggregate.

    Deterministic for fixed (spec, point, scheme, master seed) regardless of
    worker count or execution order.
    """
    config = resolve_case(spec, point_index, scheme)
    scheme_index = SCHEMES.index(scheme)
    seed = config.seed
    fixed_budget = None
    if (
        spec.feedback_policy == "uplink_fraction"
        and config.feedback_fraction is not None
        and spec.uplink_budget == "average"
    ):
        fixed_budget = _warmup_budget(spec, point_index, config)

    def one_trial(index: int) -> tuple[np.ndarray, int]:
        for attempt in range(REDRAW_CAP + 1):
            rng = trial_stream(seed, spec.stream_salt, point_index, scheme_index, index, attempt)
            try:
                return _trial_rates(config, scheme, rng, fixed_budget), attempt
            except DegenerateChannelError:
                continue
        raise ExperimentError(
            f"{spec.name}: trial {index} at point {spec.sweep_values[point_index]!r} "
            f"({scheme}) exceeded {REDRAW_CAP} redraws"
        )

    def run_chunk(chunk: range) -> list[tuple[np.ndarray, int]]:
        return [one_trial(t) for t in chunk]

    workers = min(resolve_worker_count(), spec.trials)
    if workers <= 1:
        outcomes = run_chunk(range(spec.trials))
    else:
        step = max(1, spec.trials // (workers * 8))
        chunks = [range(lo, min(lo + step, spec.trials)) for lo in range(0, spec.trials, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = [item for part in pool.map(run_chunk, chunks) for item in part]

    rates = np.stack([r for r, _ in outcomes])
    redrawn = int(sum(a for _, a in outcomes))
    per_trial_mean = rates.mean(axis=1)
    mean_user = float(per_trial_mean.mean())
    stderr = (
        float(per_trial_mean.std(ddof=1) / math.sqrt(spec.trials)) if spec.trials > 1 else 0.0
    )
    point_value = spec.sweep_values[point_index]
    return RateSummary(
        point=float(point_index if spec.sweep_kind == "points" else point_value),
        scheme=scheme,
        mean_user_rate=mean_user,
        sum_rate=float(rates.sum(axis=1).mean()),
        stderr=stderr,
        trials_used=spec.trials,
        trials_redrawn=redrawn,
        bound_overlay=overlay_floor(spec, scheme, config),
        config=config,
        policy_label=spec.policy_label,
        seed=seed,
    )


def run_experiment(spec: ExperimentSpec) -> tuple[list[RateSummary], list[SkippedPoint]]:
    """Run every (point, scheme) cell of a sweep; invalid cells are skipped."""
    rows: list[RateSummary] = []
    skipped: list[SkippedPoint] = []
    for point_index, value in enumerate(spec.sweep_values):
        for scheme in spec.schemes:
            try:
                rows.append(run_point(spec, point_index, scheme))
            except PointSkipped as exc:
                coordinate = float(point_index if spec.sweep_kind == "points" else value)
                skipped.append(SkippedPoint(coordinate, scheme, spec.policy_label, str(exc)))
    return rows, skipped


def _fig1_spec(trials, seed, snr_db, bits_grid, coherence_block=180) -> ExperimentSpec:
    base = SystemConfig(
        n_rx=8,
        n_tx=8,
        n_users=8,
        snr=10.0 ** (snr_db / 10.0),
        coherence_block=coherence_block,
        feedback_bits_per_block=0.0,
        seed=seed,
    )
    return ExperimentSpec(
        name="fig1",
        base=base,
        sweep_kind="feedback_bits",
        sweep_values=tuple(bits_grid),
        schemes=(BF, ZF, DP),
        trials=trials,
    )


def run_fig1(trials=DEFAULT_TRIALS, seed=1, snr_db=30.0, bits_grid=None):
    """Average user rate vs feedback bits per block for BF/ZF/DP at K = n_tx = 8."""
    spec = _fig1_spec(trials, seed, snr_db, bits_grid or FIG1_BITS_GRID)
    rows, skipped = run_experiment(spec)
    return rows, skipped, [spec]


def _antenna_specs(
    name, trials, seed, snr_db, n_grid, schemes, c_u, cf_t, coherence_block, bound_kind,
    uplink_budget,
) -> list[ExperimentSpec]:
    base = SystemConfig(
        n_rx=max(n_grid),
        n_tx=1,
        n_users=1,
        snr=10.0 ** (snr_db / 10.0),
        coherence_block=coherence_block,
        feedback_fraction=cf_t / coherence_block,
        seed=seed,
    )
    policies = [("all", None), ("log_ct4", 4.0), ("log_ct8", 8.0)]
    specs = []
    for salt, (label, c_t) in enumerate(policies):
        specs.append(
            ExperimentSpec(
                name=name,
                base=base,
                sweep_kind="antennas",
                sweep_values=tuple(n_grid),
                schemes=schemes,
                trials=trials,
                antenna_policy="all" if c_t is None else "log",
                user_policy="log",
                feedback_policy="uplink_fraction",
                c_u=c_u,
                c_t=c_t,
                uplink_budget=uplink_budget,
                bound_kind=bound_kind,
                policy_label=label,
                stream_salt=salt,
            )
        )
    return specs


def run_fig2(
    trials=DEFAULT_TRIALS,
    seed=1,
    snr_db=30.0,
    n_grid=None,
    c_u=4.0,
    cf_t=10.0,
    coherence_block=180,
    uplink_budget="instantaneous",
):
    """BF spectral efficiency per user vs antennas for three transmit-array policies."""
    specs = _antenna_specs(
        "fig2", trials, seed, snr_db, n_grid or FIG_ANTENNA_GRID, (BF,), c_u, cf_t,
        coherence_block, "per_user", uplink_budget,
    )
    rows, skipped = [], []
    for spec in specs:
        r, s = run_experiment(spec)
        rows.extend(r)
        skipped.extend(s)
    return rows, skipped, specs


def run_fig3(
    trials=DEFAULT_TRIALS,
    seed=1,
    snr_db=30.0,
    n_grid=None,
    c_u=4.0,
    cf_t=10.0,
    coherence_block=180,
    uplink_budget="instantaneous",
):
    """Sum rate vs antennas for BF/ZF/DP under the three transmit-array policies."""
    specs = _antenna_specs(
        "fig3", trials, seed, snr_db, n_grid or FIG_ANTENNA_GRID, (BF, ZF, DP), c_u, cf_t,
        coherence_block, "sum", uplink_budget,
    )
    rows, skipped = [], []
    for spec in specs:
        r, s = run_experiment(spec)
        rows.extend(r)
        skipped.extend(s)
    return rows, skipped, specs
