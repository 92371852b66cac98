"""Exhaustive Otsu threshold search over a 256-bin histogram.

Both the single- and two-level searches maximize the between-class variance.
With the total mean fixed, that is equivalent to maximizing

    sum over classes of  S_c^2 / W_c

where W_c is the class pixel count and S_c the class sum of bin indices
weighted by counts.  A vectorized float pass finds the near-maximal
candidates and an exact rational comparison on integer (W, S) pairs then
resolves the winner, so ties break by the documented rule (smallest cut
indices, lexicographically) independent of floating-point rounding.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

N_BINS = 256

# relative slack for the float prefilter; exact arithmetic decides inside it
_CANDIDATE_RTOL = 1e-9


def histogram_bins(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """256-bin counts of ``values`` over [lo, hi]; the final bin is closed."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if hi <= lo:
        raise ValueError("histogram range must satisfy lo < hi")
    idx = np.floor((v - lo) / (hi - lo) * N_BINS).astype(np.int64)
    np.clip(idx, 0, N_BINS - 1, out=idx)
    return np.bincount(idx, minlength=N_BINS).astype(np.int64)


def _class_stat(w: int, s: int) -> Fraction:
    return Fraction(s * s, w) if w else Fraction(0)


def _exact_objective(counts: np.ndarray, cuts: tuple[int, ...]) -> Fraction:
    """Exact sum of S^2/W over the classes induced by ``cuts``.

    ``cuts`` holds the last bin index of every class but the final one.
    """
    idx_weighted = counts * np.arange(N_BINS, dtype=np.int64)
    total = Fraction(0)
    start = 0
    for cut in (*cuts, N_BINS - 1):
        w = int(counts[start:cut + 1].sum())
        s = int(idx_weighted[start:cut + 1].sum())
        total += _class_stat(w, s)
        start = cut + 1
    return total


def best_single_cut(counts: np.ndarray) -> int:
    """Cut k splitting bins into [0..k] and [k+1..255], k in [0, 254].

    Returns the smallest k among the exact maximizers.
    """
    counts = np.asarray(counts, dtype=np.int64)
    w = np.cumsum(counts)
    s = np.cumsum(counts * np.arange(N_BINS, dtype=np.int64))
    n, s_tot = w[-1], s[-1]
    if n == 0:
        raise ValueError("empty histogram")

    w0 = w[:-1].astype(np.float64)
    s0 = s[:-1].astype(np.float64)
    w1 = n - w0
    s1 = s_tot - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = np.where(w0 > 0, s0 * s0 / w0, 0.0) + np.where(w1 > 0, s1 * s1 / w1, 0.0)

    peak = obj.max()
    candidates = np.flatnonzero(obj >= peak - _CANDIDATE_RTOL * abs(peak))
    best_k, best_val = -1, None
    for k in candidates:
        val = _exact_objective(counts, (int(k),))
        if best_val is None or val > best_val:
            best_k, best_val = int(k), val
    return best_k


def best_double_cut(counts: np.ndarray) -> tuple[int, int]:
    """Cut pair (k1, k2), 0 <= k1 < k2 <= 254, maximizing the objective.

    Classes are [0..k1], [k1+1..k2], [k2+1..255]; ties resolve to the
    lexicographically smallest pair.
    """
    counts = np.asarray(counts, dtype=np.int64)
    w = np.cumsum(counts)
    s = np.cumsum(counts * np.arange(N_BINS, dtype=np.int64))
    n, s_tot = w[-1], s[-1]
    if n == 0:
        raise ValueError("empty histogram")

    wc = w[:-1].astype(np.float64)  # cumulative through bin k, k in [0, 254]
    sc = s[:-1].astype(np.float64)

    def term(wx, sx):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(wx > 0, sx * sx / np.where(wx > 0, wx, 1), 0.0)

    # broadcast k1 down rows, k2 across columns
    w0, s0 = wc[:, None], sc[:, None]
    w1, s1 = wc[None, :] - w0, sc[None, :] - s0
    w2, s2 = n - wc[None, :], s_tot - sc[None, :]
    obj = term(w0, s0) + term(w1, s1) + term(w2, s2)
    k1g, k2g = np.meshgrid(np.arange(N_BINS - 1), np.arange(N_BINS - 1), indexing="ij")
    obj[k1g >= k2g] = -np.inf

    peak = obj.max()
    rows, cols = np.nonzero(obj >= peak - _CANDIDATE_RTOL * abs(peak))
    best_pair, best_val = None, None
    for k1, k2 in sorted(zip(rows.tolist(), cols.tolist())):
        val = _exact_objective(counts, (k1, k2))
        if best_val is None or val > best_val:
            best_pair, best_val = (k1, k2), val
    assert best_pair is not None
    return best_pair
