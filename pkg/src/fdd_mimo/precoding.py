"""Transmit precoders built from quantized CSI.

Linear beams: row i of the precoding matrix is the quantized row hhat_i,
projected onto the orthogonal complement of the L nulled users' quantized
rows and scaled to norm 1/sqrt(K), so the sum power constraint holds with
unit-variance symbols.  L = 0 is matched-filter beamforming, L = K - 1 full
zero forcing.  The nulled set of user i is users i+1 .. i+L (mod K): a
deterministic, symmetric policy under which every user is nulled by exactly
L beams.

Dirty-paper precoding: a uniform random user permutation followed by the LQ
decomposition Hhat_perm = L Q with L lower triangular (real nonnegative
diagonal) and Q having orthonormal rows; the transmit rule is x = Q^H s with
E[|s_i|^2] = 1/K.  The LQ is computed as the conjugate-transposed QR of
Hhat_perm^H so the decomposition is unique and fixtures stay stable.

Quantized rows that are exactly zero (a zero feedback budget makes the whole
quantized matrix zero) carry no transmitter information; linear beams for
such rows are drawn isotropically from the trial stream, which reproduces the
interference statistics of CSI-free transmission.  For DP a zero row simply
yields a zero diagonal entry, i.e. zero rate.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import complex_gaussian
from .quantizer import QuantizedCsi

# relative threshold below which a projected row counts as numerically zero
_DEGENERATE_RTOL = 1e-10


class DegenerateChannelError(RuntimeError):
    """A projected quantized row vanished; the trial must be redrawn."""


@dataclass
class PrecoderOutput:
    """Either a linear precoding matrix or a DP (lower-triangular, unitary) pair."""

    kind: str  # "linear" | "dp"
    linear_matrix: np.ndarray | None = None
    dp_lower: np.ndarray | None = None
    dp_unitary: np.ndarray | None = None
    user_order: np.ndarray | None = None
    interference_sets: tuple[tuple[int, ...], ...] | None = field(default=None)


def nulled_users(user: int, zf_order: int, n_users: int) -> tuple[int, ...]:
    """Users whose interference beam ``user`` is forced orthogonal to."""
    return tuple((user + 1 + j) % n_users for j in range(zf_order))


def project_out(row: np.ndarray, nulled_rows: np.ndarray) -> np.ndarray:
    """Project a row onto the orthogonal complement of the given rows."""
    if nulled_rows.shape[0] == 0:
        return row.copy()
    basis, _ = np.linalg.qr(nulled_rows.conj().T)  # n_tx x L orthonormal columns
    col = row.conj()
    col = col - basis @ (basis.conj().T @ col)
    return col.conj()


def build_linear(
    csi: QuantizedCsi, zf_order: int, rng: np.random.Generator | None = None
) -> PrecoderOutput:
    """Build the K x n_tx linear precoding matrix from quantized CSI.

    ``rng`` is only consumed when a quantized row is exactly zero (no
    feedback), in which case an isotropic direction is substituted before the
    nulling projections.  Raises DegenerateChannelError when a projected row
    is numerically zero, which callers treat as a trial redraw.
    """
    hhat = csi.quantized_rows
    k, n_tx = hhat.shape
    if not 0 <= zf_order <= k - 1:
        raise ValueError("zf_order must lie in [0, n_users - 1]")
    if n_tx <= zf_order:
        raise ValueError("nulling zf_order users needs n_tx > zf_order")

    rows = hhat
    zero = np.linalg.norm(hhat, axis=1) == 0.0
    if np.any(zero):
        if rng is None:
            raise DegenerateChannelError(
                "zero quantized rows need an rng to draw isotropic beams"
            )
        rows = hhat.copy()
        for i in np.flatnonzero(zero):
            rows[i] = complex_gaussian(rng, (n_tx,))

    sets = tuple(nulled_users(i, zf_order, k) for i in range(k))
    u = np.empty((k, n_tx), dtype=complex)
    if zf_order == 0:
        norms = np.linalg.norm(rows, axis=1)
        u = rows / (np.sqrt(k) * norms[:, None])
    elif zf_order == k - 1:
        # full ZF: pseudo-inverse columns point along the per-user projections,
        # with column norm 1 / |hhat_i P_i| -- huge norms flag degeneracy
        cols = np.linalg.pinv(rows)  # n_tx x K
        norms = np.linalg.norm(cols, axis=0)
        scale = np.linalg.norm(rows, axis=1)
        if np.any(norms * scale * _DEGENERATE_RTOL >= 1.0):
            raise DegenerateChannelError("rank-deficient quantized channel under full ZF")
        u = (cols / (np.sqrt(k) * norms[None, :])).conj().T
    else:
        for i in range(k):
            proj = project_out(rows[i], rows[list(sets[i])])
            norm = np.linalg.norm(proj)
            if norm <= _DEGENERATE_RTOL * np.linalg.norm(rows[i]):
                raise DegenerateChannelError(f"projected row {i} is numerically zero")
            u[i] = proj / (np.sqrt(k) * norm)
    return PrecoderOutput(
        kind="linear",
        linear_matrix=u,
        user_order=np.arange(k),
        interference_sets=sets,
    )


def build_dp(
    csi: QuantizedCsi,
    rng: np.random.Generator,
    permutation: np.ndarray | None = None,
) -> PrecoderOutput:
    """LQ-decompose the permuted quantized channel for dirty-paper encoding.

    Draws a uniform random permutation (or uses the supplied one), then
    factors Hhat_perm = L Q.  The diagonal of L is made real nonnegative by a
    phase convention on Q, so the factorization is unique.
    """
    hhat = csi.quantized_rows
    k, n_tx = hhat.shape
    if n_tx < k:
        raise ValueError("dirty-paper precoding needs n_tx >= n_users")
    perm = rng.permutation(k) if permutation is None else np.asarray(permutation)
    hp = hhat[perm]

    q_cols, r = np.linalg.qr(hp.conj().T)  # n_tx x K, K x K upper triangular
    diag = np.diag(r)
    phase = np.where(np.abs(diag) > 0, diag / np.where(np.abs(diag) > 0, np.abs(diag), 1.0), 1.0)
    r = phase.conj()[:, None] * r
    q_cols = q_cols * phase[None, :]

    lower = r.conj().T
    q_rows = q_cols.conj().T
    return PrecoderOutput(
        kind="dp",
        dp_lower=lower,
        dp_unitary=q_rows,
        user_order=perm,
    )
