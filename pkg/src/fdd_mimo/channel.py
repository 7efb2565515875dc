"""Block-fading Rayleigh channel model and reproducible RNG streams.

Every channel element is i.i.d. circularly-symmetric complex Gaussian with
zero mean and unit power, drawn from a counter-based Philox generator so that
each Monte Carlo trial owns an independent stream derived from
(master seed, branch indices).  Gaussians come from
``numpy.random.Generator.standard_normal`` (ziggurat); this choice is fixed so
seeded runs stay stable.
"""

from dataclasses import dataclass, field

import numpy as np

BF = "bf"
PARTIAL_ZF = "partial_zf"
ZF = "zf"
DP = "dp"
SCHEMES = (BF, PARTIAL_ZF, ZF, DP)


def trial_stream(seed: int, *branch: int) -> np.random.Generator:
    """Independent generator for one branch of a seeded experiment.

    ``branch`` is a tuple of nonnegative integers (e.g. point index, scheme
    index, trial index, redraw attempt).  The same (seed, branch) always
    yields the same stream, regardless of how many workers run in parallel.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(b) for b in branch))
    return np.random.Generator(np.random.Philox(ss))


def complex_gaussian(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Draw CN(0, var) entries; real and imaginary parts carry var/2 each."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters for one simulated cell.

    n_rx: total base-station antennas (all used for uplink reception)
    n_tx: downlink transmit antennas, n_tx <= n_rx
    n_users: single-antenna mobiles
    snr: linear SNR (the CLI accepts dB and converts)
    coherence_block: symbols per fading block; feedback is sent once per block
    feedback_bits_per_block / feedback_fraction: exactly one of the two must
        be set; it marks whether an experiment sweeps a fixed bit budget or
        devotes a fraction of the simulated uplink rate to feedback
    scheme: one of "bf", "partial_zf", "zf", "dp"
    zf_order: users nulled per beam; defaults to 0 for bf and n_users-1 for
        zf/dp, required explicitly for partial_zf
    seed: master seed for all derived streams
    """

    n_rx: int
    n_tx: int
    n_users: int
    snr: float
    coherence_block: int = 180
    feedback_bits_per_block: float | None = None
    feedback_fraction: float | None = None
    scheme: str = BF
    zf_order: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_rx < 1 or self.n_tx < 1 or self.n_users < 1:
            raise ValueError("n_rx, n_tx and n_users must be positive")
        if self.n_tx > self.n_rx:
            raise ValueError(f"n_tx={self.n_tx} exceeds n_rx={self.n_rx}")
        if not self.snr > 0:
            raise ValueError("snr must be positive (linear scale)")
        if self.coherence_block < 1:
            raise ValueError("coherence_block must be a positive integer")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if (self.feedback_bits_per_block is None) == (self.feedback_fraction is None):
            raise ValueError(
                "exactly one of feedback_bits_per_block / feedback_fraction must be set"
            )
        if self.feedback_bits_per_block is not None and self.feedback_bits_per_block < 0:
            raise ValueError("feedback_bits_per_block must be nonnegative")
        if self.feedback_fraction is not None and not 0.0 <= self.feedback_fraction <= 1.0:
            raise ValueError("feedback_fraction must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

        if self.zf_order is None:
            default = {BF: 0, ZF: self.n_users - 1, DP: self.n_users - 1}.get(self.scheme)
            if default is None:
                raise ValueError("partial_zf requires an explicit zf_order")
            object.__setattr__(self, "zf_order", default)

        if self.scheme in (ZF, DP):
            if self.zf_order != self.n_users - 1:
                raise ValueError(f"{self.scheme} requires zf_order = n_users - 1")
            if self.n_tx < self.n_users:
                raise ValueError(f"{self.scheme} requires n_tx >= n_users")
        elif self.scheme == PARTIAL_ZF:
            if not 0 <= self.zf_order <= self.n_users - 1:
                raise ValueError("partial_zf requires 0 <= zf_order <= n_users - 1")
            if self.n_tx <= self.zf_order:
                raise ValueError("partial_zf requires n_tx > zf_order")
        elif self.zf_order != 0:
            raise ValueError("bf requires zf_order = 0")


@dataclass
class ChannelRealization:
    """One block-fading draw: downlink is n_users x n_tx, uplink n_rx x n_users."""

    downlink: np.ndarray | None = field(default=None)
    uplink: np.ndarray | None = field(default=None)


def draw_downlink(config: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw the downlink matrix with i.i.d. CN(0, 1) entries."""
    h = complex_gaussian(rng, (config.n_users, config.n_tx))
    return ChannelRealization(downlink=h)


def draw_uplink(config: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw the uplink matrix (n_rx x n_users) with i.i.d. CN(0, 1) entries."""
    hu = complex_gaussian(rng, (config.n_rx, config.n_users))
    return ChannelRealization(uplink=hu)
