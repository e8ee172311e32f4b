"""Hyperplane-arrangement activation patterns.

An arrangement is a 0/1 mask over samples recording which rows of an
effective matrix a linear unit activates: ``mask = 1[x_eff @ w >= 0]``. Only
patterns realizable with a strict margin (open cells of the arrangement of
row hyperplanes) are enumerated; measure-zero boundary patterns are excluded
by a feasibility margin. Ties from exactly-zero rows are assigned active.
"""

import math

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError
from .linalg import as_matrix, compact_svd

ENUMERATION_MAX_ROWS = 20
ENUMERATION_MAX_RANK = 4
MARGIN_SCALE = 1e-8
ZERO_ROW_RTOL = 1e-12


class Arrangement:
    """A single activation pattern with a realizing witness direction."""

    def __init__(self, mask, witness):
        self.mask = np.asarray(mask, dtype=bool)
        self.witness = np.asarray(witness, dtype=np.float64)

    def validates(self, x_eff, tol=1e-9):
        """True when the witness sign pattern matches the mask within tol."""
        z = as_matrix(x_eff) @ self.witness
        return bool(np.all(z[self.mask] >= -tol) and np.all(z[~self.mask] <= tol))


class ArrangementSet:
    """A deduplicated collection of arrangements for one effective matrix."""

    def __init__(self, arrangements, exhaustive, source_dims):
        self.arrangements = list(arrangements)
        self.exhaustive = bool(exhaustive)
        self.source_dims = tuple(source_dims)

    def __len__(self):
        return len(self.arrangements)

    def masks(self):
        """All masks as a (P, n) boolean array."""
        n = self.source_dims[0]
        if not self.arrangements:
            return np.zeros((0, n), dtype=bool)
        return np.array([a.mask for a in self.arrangements], dtype=bool)


def arrangement_bound(n, r):
    """Loose pattern-count bound ``2 r (e (n-1) / r)^r``."""
    if n < 2 or r < 1 or r > n:
        raise ValueError(f"invalid dimensions n={n}, r={r}")
    return 2.0 * r * (math.e * (n - 1) / r) ** r


def tight_arrangement_bound(n, r):
    """Tight combinatorial bound ``2 * sum_k C(n-1, k)`` for k < r."""
    if n < 2 or r < 1 or r > n:
        raise ValueError(f"invalid dimensions n={n}, r={r}")
    return 2 * sum(math.comb(n - 1, k) for k in range(r))


def _mask_sort_key(mask):
    # big-endian: row 0 is the most significant bit
    return tuple(int(b) for b in mask)


def _max_margin_lp(rows, signs, box=1.0):
    """Maximize t s.t. signs_i * (rows_i @ w) >= t, |w|_inf <= box.

    Returns (t_star, w_star) or (None, None) when infeasible/failed. The LP
    is always feasible (w=0, t=0), so failures are solver-level only.
    """
    m, r = rows.shape
    a_ub = np.hstack([-(signs[:, None] * rows), np.ones((m, 1))])
    b_ub = np.zeros(m)
    c = np.zeros(r + 1)
    c[-1] = -1.0
    t_max = box * math.sqrt(r) * float(np.max(np.linalg.norm(rows, axis=1))) + 1.0
    bounds = [(-box, box)] * r + [(0.0, t_max)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return None, None
    return float(res.x[-1]), res.x[:-1].copy()


def enumerate_arrangements(x_eff):
    """Enumerate every margin-realizable activation pattern of ``x_eff``.

    Works in row-space coordinates of rank r and inserts one row hyperplane
    at a time, keeping each candidate cell only if a max-margin feasibility
    LP certifies ``sign_i * (x_i @ w) >= eps`` on all rows processed so far
    with ``eps = 1e-8 * ||x_eff||_F``. Rows that are numerically zero are
    always-active and excluded from the feasibility constraints.

    Guarded to n <= 20 rows and effective rank <= 4.
    """
    x_eff = as_matrix(x_eff, "x_eff")
    n = x_eff.shape[0]
    if n > ENUMERATION_MAX_ROWS:
        raise CapacityError(f"enumeration limited to {ENUMERATION_MAX_ROWS} rows, got {n}")
    svd = compact_svd(x_eff)
    r = svd.rank
    if r > ENUMERATION_MAX_RANK:
        raise CapacityError(
            f"enumeration limited to effective rank {ENUMERATION_MAX_RANK}, got {r}"
        )
    if r == 0:
        # zero matrix: the single all-active pattern, witnessed by w = 0
        arr = Arrangement(np.ones(n, dtype=bool), np.zeros(x_eff.shape[1]))
        return ArrangementSet([arr], exhaustive=True, source_dims=(n, 0))

    rows = svd.u * svd.sigma  # row-space coordinates, n x r
    row_norms = np.linalg.norm(rows, axis=1)
    nonzero = row_norms > ZERO_ROW_RTOL * row_norms.max()
    active_rows = rows[nonzero]
    eps = MARGIN_SCALE * float(np.linalg.norm(x_eff))

    # cells: (signs over processed active rows, witness in R^r, margin)
    cells = [(np.zeros(0), np.zeros(r), math.inf)]
    for t in range(active_rows.shape[0]):
        row_t = active_rows[t]
        nxt = []
        for signs, w, margin in cells:
            for sgn in (1.0, -1.0):
                new_signs = np.append(signs, sgn)
                direct = sgn * float(row_t @ w)
                if min(margin, direct) >= eps:
                    nxt.append((new_signs, w, min(margin, direct)))
                    continue
                t_star, w_star = _max_margin_lp(active_rows[: t + 1], new_signs)
                if t_star is not None and t_star >= eps:
                    nxt.append((new_signs, w_star, t_star))
        cells = nxt

    arrangements = []
    for signs, w, _ in cells:
        mask = np.ones(n, dtype=bool)
        mask[nonzero] = signs > 0
        arrangements.append(Arrangement(mask, svd.v @ w))
    arrangements.sort(key=lambda a: _mask_sort_key(a.mask))
    return ArrangementSet(arrangements, exhaustive=True, source_dims=(n, r))


def sample_arrangements(x_eff, count, seed):
    """Sample activation patterns from Gaussian directions.

    Draws ``count`` standard normal directions from a Philox counter-based
    generator (identical streams across platforms for a fixed seed), records
    the pattern ``1[x_eff @ g >= 0]`` of each, and deduplicates by mask
    keeping the first witnessing draw. The achieved (deduplicated) count is
    ``len(result)``.
    """
    x_eff = as_matrix(x_eff, "x_eff")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    n, dim = x_eff.shape
    rng = np.random.Generator(np.random.Philox(key=int(seed) % 2**64))
    g = rng.standard_normal((count, dim))
    masks = (g @ x_eff.T) >= 0.0  # count x n
    uniq, first = np.unique(masks, axis=0, return_index=True)
    arrangements = [Arrangement(uniq[i], g[first[i]]) for i in range(uniq.shape[0])]
    arrangements.sort(key=lambda a: _mask_sort_key(a.mask))
    rank = compact_svd(x_eff).rank
    return ArrangementSet(arrangements, exhaustive=False, source_dims=(n, rank))
