"""Rate-distortion model of CSI feedback.

The production path is statistical: a feedback budget of B bits per block
maps to a per-element distortion xi2 = 2**(-B / n_tx), and channel /
quantized-channel pairs are synthesized backwards so that H = Hhat + E holds
exactly with Hhat ~ CN(0, 1 - xi2) and E ~ CN(0, xi2) independent.  A small
random-codebook quantizer exists only as a test oracle; enumerating codebooks
at realistic budgets (80+ bits) is infeasible.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SystemConfig, complex_gaussian

_MAX_ORACLE_BITS = 16


@dataclass
class QuantizedCsi:
    """Quantized rows Hhat, error rows E and per-user distortion xi2.

    The reconstruction identity H = quantized_rows + error_rows holds exactly;
    E[|hhat|^2] = 1 - xi2 and E[|eps|^2] = xi2 per element.
    """

    quantized_rows: np.ndarray
    error_rows: np.ndarray
    distortion: np.ndarray


def distortion_for_budget(bits_per_block, n_tx: int):
    """Distortion xi2 = 2**(-bits / n_tx) achieved by an optimal quantizer.

    Accepts a scalar or an array of per-user budgets.  bits = 0 gives xi2 = 1
    (no transmitter knowledge).  Budgets above ~52 * n_tx bits make xi2
    underflow to exactly 0.0; that is documented behaviour, not an error.
    """
    bits = np.asarray(bits_per_block, dtype=float)
    if np.any(bits < 0):
        raise ValueError("bits_per_block must be nonnegative")
    xi2 = np.exp2(-bits / float(n_tx))
    return float(xi2) if np.isscalar(bits_per_block) else xi2


def budget_for_distortion(xi2: float, n_tx: int, coherence_block: int) -> float:
    """Feedback rate F (bits/symbol) required for a target distortion.

    F = (n_tx / T) * log2(1 / xi2), the exact inverse of
    distortion_for_budget up to rounding; xi2 = 1 needs no feedback.
    """
    if not 0.0 < xi2 <= 1.0:
        raise ValueError("distortion must lie in (0, 1]")
    if xi2 == 1.0:
        return 0.0
    return float(n_tx) / float(coherence_block) * float(np.log2(1.0 / xi2))


def synthesize_pair(
    config: SystemConfig, xi2, rng: np.random.Generator
) -> tuple[ChannelRealization, QuantizedCsi]:
    """Draw a (true channel, quantized CSI) pair with the target distortion.

    Backward-channel construction: hhat ~ CN(0, 1 - xi2_i) and
    eps ~ CN(0, xi2_i) are drawn independently and summed, so the marginal of
    H is CN(0, 1).  ``xi2`` may be a scalar or a length-n_users vector.
    """
    k, n_tx = config.n_users, config.n_tx
    xi2 = np.broadcast_to(np.asarray(xi2, dtype=float), (k,)).copy()
    if np.any((xi2 < 0) | (xi2 > 1)):
        raise ValueError("distortion values must lie in [0, 1]")
    hhat = complex_gaussian(rng, (k, n_tx)) * np.sqrt(1.0 - xi2)[:, None]
    err = complex_gaussian(rng, (k, n_tx)) * np.sqrt(xi2)[:, None]
    h = hhat + err
    return ChannelRealization(downlink=h), QuantizedCsi(hhat, err, xi2)


def codebook_quantize(
    h_row: np.ndarray, bits: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Small-scale random-codebook quantizer, used as a validation oracle.

    Draws 2**bits codewords from CN(0, (1 - xi2) I) with
    xi2 = 2**(-bits / len(h_row)) and returns the minimum-Euclidean-distance
    codeword and the residual.  bits = 0 falls back to the zero codeword.
    Random coding meets the distortion target only asymptotically, so callers
    should assert an upper band rather than equality.
    """
    h = np.asarray(h_row, dtype=complex).ravel()
    if bits < 0:
        raise ValueError("bits must be nonnegative")
    if bits > _MAX_ORACLE_BITS:
        raise ValueError(f"bits={bits} too large to enumerate (max {_MAX_ORACLE_BITS})")
    if bits == 0:
        return np.zeros_like(h), h.copy()
    xi2 = distortion_for_budget(bits, h.size)
    codebook = complex_gaussian(rng, (2**bits, h.size), var=1.0 - xi2)
    d2 = np.sum(np.abs(h[None, :] - codebook) ** 2, axis=1)
    best = codebook[int(np.argmin(d2))]
    return best.copy(), h - best
