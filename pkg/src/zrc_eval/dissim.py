"""Frame-level dissimilarities and the DTW-averaged token dissimilarity.

Two frame dissimilarities are supported: "angular" (arccos of the normalized
dot product, rescaled to [0, 1]) for arbitrary real embeddings, and "kl"
(symmetrized KL divergence, base-2 logs) for posterior-probability frames.
Token dissimilarity realigns two frame sequences with dynamic time warping
and averages the frame dissimilarities along the optimal path.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DimMismatch, EmptySequence, NegativeEntry, ZrcWarning

DISSIM_KINDS = ("angular", "kl")
DTW_NORMS = ("path", "maxlen")

KL_EPSILON = 1e-10


def _check_kind(kind: str) -> None:
    if kind not in DISSIM_KINDS:
        raise ValueError(f"unknown dissimilarity {kind!r}, expected one of {DISSIM_KINDS}")


def angular(u, v) -> float:
    """arccos(clamp(<u,v> / (|u||v|), -1, 1)) / pi, in [0, 1].

    A zero vector scores 0.5 against anything (maximal uncertainty) and
    emits a warning; sparse learned codes legitimately emit zeros.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimMismatch(f"vector dims differ: {u.shape} vs {v.shape}")
    nu = np.sqrt(u @ u)
    nv = np.sqrt(v @ v)
    if nu == 0.0 or nv == 0.0:
        warnings.warn("zero vector in angular dissimilarity, scored 0.5", ZrcWarning)
        return 0.5
    cos = np.clip((u @ v) / (nu * nv), -1.0, 1.0)
    return float(np.arccos(cos) / np.pi)


def _smooth(p: np.ndarray) -> np.ndarray:
    if np.any(p < 0):
        raise NegativeEntry("probability vector has a negative entry")
    p = p + KL_EPSILON
    return p / p.sum()


def symmetric_kl(p, q) -> float:
    """(KL(p||q) + KL(q||p)) / 2 in bits, after epsilon smoothing.

    Entries must be non-negative; both vectors are renormalized to sum 1
    after adding the smoothing constant, so exact zeros are legal.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimMismatch(f"vector dims differ: {p.shape} vs {q.shape}")
    p = _smooth(p)
    q = _smooth(q)
    log_ratio = np.log2(p) - np.log2(q)
    return float(0.5 * (p @ log_ratio - q @ log_ratio))


def _angular_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    norms_a = np.sqrt(np.einsum("ij,ij->i", a, a))
    norms_b = np.sqrt(np.einsum("ij,ij->i", b, b))
    zero_a = norms_a == 0.0
    zero_b = norms_b == 0.0
    if zero_a.any() or zero_b.any():
        warnings.warn("zero vector in angular dissimilarity, scored 0.5", ZrcWarning)
    # Zero rows stay zero after division, giving cos 0 -> exactly 0.5.
    safe_a = np.where(zero_a, 1.0, norms_a)
    safe_b = np.where(zero_b, 1.0, norms_b)
    cos = (a / safe_a[:, None]) @ (b / safe_b[:, None]).T
    np.clip(cos, -1.0, 1.0, out=cos)
    return np.arccos(cos) / np.pi


def _kl_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.any(a < 0) or np.any(b < 0):
        raise NegativeEntry("probability vector has a negative entry")
    a = a + KL_EPSILON
    a = a / a.sum(axis=1, keepdims=True)
    b = b + KL_EPSILON
    b = b / b.sum(axis=1, keepdims=True)
    la, lb = np.log2(a), np.log2(b)
    # KL(a_i||b_j) = sum_k a_ik (la_ik - lb_jk); symmetrize the two directions.
    kl_ab = np.einsum("ik,ik->i", a, la)[:, None] - a @ lb.T
    kl_ba = np.einsum("jk,jk->j", b, lb)[None, :] - (b @ la.T).T
    return 0.5 * (kl_ab + kl_ba)


def frame_cost_matrix(a, b, kind: str = "angular") -> np.ndarray:
    """Pairwise frame dissimilarities between two (n, d) and (m, d) arrays."""
    _check_kind(kind)
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySequence("DTW needs non-empty sequences")
    if a.shape[1] != b.shape[1]:
        raise DimMismatch(f"frame dims differ: {a.shape[1]} vs {b.shape[1]}")
    if kind == "angular":
        return _angular_cost_matrix(a, b)
    return _kl_cost_matrix(a, b)


def _dtw_table(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated-cost and path-length tables for the standard step set.

    Steps are (1,1), (1,0), (0,1) with both endpoints anchored. Ties between
    predecessors are broken diagonal > vertical > horizontal, which argmin
    over that stacking order gives for free. Rows and columns are swept
    anti-diagonally so the inner update is vectorized.
    """
    n, m = cost.shape
    acc = np.full((n, m), np.inf)
    plen = np.zeros((n, m), dtype=np.int64)
    acc[0, 0] = cost[0, 0]
    plen[0, 0] = 1
    big = np.inf
    for k in range(1, n + m - 1):
        i_lo = max(0, k - m + 1)
        i_hi = min(k, n - 1)
        i = np.arange(i_lo, i_hi + 1)
        j = k - i
        diag = np.where((i > 0) & (j > 0), acc[np.maximum(i - 1, 0), np.maximum(j - 1, 0)], big)
        vert = np.where(i > 0, acc[np.maximum(i - 1, 0), j], big)
        horiz = np.where(j > 0, acc[i, np.maximum(j - 1, 0)], big)
        stacked = np.stack([diag, vert, horiz])
        choice = np.argmin(stacked, axis=0)
        best = stacked[choice, np.arange(len(i))]
        pred_len = np.stack([
            np.where((i > 0) & (j > 0), plen[np.maximum(i - 1, 0), np.maximum(j - 1, 0)], 0),
            np.where(i > 0, plen[np.maximum(i - 1, 0), j], 0),
            np.where(j > 0, plen[i, np.maximum(j - 1, 0)], 0),
        ])[choice, np.arange(len(i))]
        acc[i, j] = cost[i, j] + best
        plen[i, j] = pred_len + 1
    return acc, plen


def dtw_from_costs(cost: np.ndarray, norm: str = "path") -> float:
    """DTW average given a precomputed frame cost matrix.

    The optimal path minimizes the summed cost; the sum is then divided by
    the path length ("path") or by max(n, m) ("maxlen").
    """
    if norm not in DTW_NORMS:
        raise ValueError(f"unknown DTW normalization {norm!r}, expected one of {DTW_NORMS}")
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n == 0 or m == 0:
        raise EmptySequence("DTW needs non-empty sequences")
    if n == 1 and m == 1:
        return float(cost[0, 0])
    acc, plen = _dtw_table(cost)
    total = float(acc[n - 1, m - 1])
    if norm == "maxlen":
        return total / max(n, m)
    return total / int(plen[n - 1, m - 1])


def dtw_dissim(a, b, kind: str = "angular", norm: str = "path") -> float:
    """Token dissimilarity: minimal-cost monotone alignment, averaged.

    `a` and `b` are (n, d) frame arrays. The frame dissimilarity along the
    minimizing warping path is summed and divided by the path length (the
    literal reading of averaging along the realignment path; `norm="maxlen"`
    divides by the longer sequence length instead).
    """
    return dtw_from_costs(frame_cost_matrix(a, b, kind), norm=norm)
