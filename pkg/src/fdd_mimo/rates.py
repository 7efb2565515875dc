"""Per-realization rate lower bounds for the downlink schemes and the uplink.

Linear schemes are evaluated against the true channel rows, so the
quantization penalty is realized physically through the mismatch between the
true and quantized channels.  The DP scheme evaluates its achievable-rate
bound at the realized triangular diagonal, with the quantization error folded
into an equivalent noise power K + rho*K*xi2.  All rates are in bits per
symbol (spectral efficiency).
"""

from dataclasses import dataclass

import numpy as np

from .precoding import PrecoderOutput


@dataclass
class RateSample:
    """Per-user rates plus (signal, interference, noise) powers for diagnostics."""

    per_user_rate: np.ndarray
    sum_rate: float
    sinr_terms: np.ndarray  # K x 3 columns: signal, interference, noise


def _pack(signal: np.ndarray, interference: np.ndarray, noise: np.ndarray) -> RateSample:
    rates = np.log2(1.0 + signal / (interference + noise))
    return RateSample(
        per_user_rate=rates,
        sum_rate=float(np.sum(rates)),
        sinr_terms=np.column_stack([signal, interference, noise]),
    )


def linear_rate(channel: np.ndarray, precoder: PrecoderOutput, snr: float) -> RateSample:
    """Rate bound for linear precoding with unit-variance symbols.

    R_i = log2(1 + rho |h_i u_i^H|^2 / (rho sum_{k != i} |h_i u_k^H|^2 + 1))
    using the true channel rows h_i.
    """
    if precoder.kind != "linear":
        raise ValueError("linear_rate needs a linear precoder")
    gains = channel @ precoder.linear_matrix.conj().T  # [i, k] = h_i u_k^H
    power = np.abs(gains) ** 2
    signal = snr * np.diag(power).copy()
    interference = snr * (power.sum(axis=1) - np.diag(power))
    noise = np.ones(channel.shape[0])
    return _pack(signal, interference, noise)


def dp_rate(precoder: PrecoderOutput, xi2, snr: float, n_users: int) -> RateSample:
    """Dirty-paper rate bound at the realized triangular diagonal.

    Encoded slot j carries rate log2(1 + rho l_jj^2 / (K + rho K xi2_u)) for
    the user u permuted into slot j; rates are mapped back to the original
    user order, so averaging over trials realizes the random-permutation
    homogenization.
    """
    if precoder.kind != "dp":
        raise ValueError("dp_rate needs a dp precoder")
    perm = precoder.user_order
    k = n_users
    if perm.shape[0] != k:
        raise ValueError("n_users inconsistent with the precoder")
    xi2 = np.broadcast_to(np.asarray(xi2, dtype=float), (k,))
    diag2 = np.abs(np.diag(precoder.dp_lower)) ** 2
    signal_slots = snr * diag2 / k
    noise_slots = 1.0 + snr * xi2[perm]

    signal = np.empty(k)
    noise = np.empty(k)
    signal[perm] = signal_slots
    noise[perm] = noise_slots
    return _pack(signal, np.zeros(k), noise)


def uplink_mmse_rate(uplink: np.ndarray, snr: float) -> RateSample:
    """Per-user rate of the linear MMSE receiver on the uplink.

    SINR_i = rho h_i^H (rho H_{-i} H_{-i}^H + I)^{-1} h_i, where H_{-i} drops
    column i.  Computed from a single factorization of A = rho H H^H + I via
    the exact rank-one identity SINR_i = rho q_i / (1 - rho q_i) with
    q_i = h_i^H A^{-1} h_i; this is algebraically identical to inverting per
    user and keeps large sweeps tractable.
    """
    n, k = uplink.shape
    if snr == 0.0:
        zero = np.zeros(k)
        return _pack(zero, zero, np.ones(k))
    a = snr * (uplink @ uplink.conj().T) + np.eye(n)
    x = np.linalg.solve(a, uplink)
    q = np.real(np.sum(uplink.conj() * x, axis=0))
    sinr = snr * q / np.maximum(1.0 - snr * q, np.finfo(float).tiny)
    return _pack(sinr, np.zeros(k), np.ones(k))


def feedback_budget_from_uplink(uplink_rate, feedback_fraction: float, coherence_block: int):
    """Bits per block bought with a fraction of the uplink rate: B = c_f * R_U * T."""
    if not 0.0 <= feedback_fraction <= 1.0:
        raise ValueError("feedback_fraction must lie in [0, 1]")
    rate = np.asarray(uplink_rate, dtype=float)
    budget = feedback_fraction * rate * float(coherence_block)
    return float(budget) if np.isscalar(uplink_rate) else budget
