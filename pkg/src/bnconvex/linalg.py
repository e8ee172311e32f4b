"""Dense linear algebra used by every other module.

Matrices are plain float64 numpy arrays in row-major (C) order. ``as_matrix``
is the validating constructor: it rejects non-finite entries and ragged or
empty input, which is all the invariant checking the rest of the package
relies on.
"""

import numpy as np

from .errors import DegenerateDataError, DimensionError, NumericalError

DEFAULT_RANK_TOLERANCE = 1e-10


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a 2-d float64 C-order array."""
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={out.ndim}")
    if out.shape[0] == 0 or out.shape[1] == 0:
        raise DimensionError(f"{name} must be non-empty, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise DimensionError(f"{name} contains non-finite entries")
    return out


def as_vector(v, name="vector"):
    """Validate and return ``v`` as a 1-d float64 array."""
    out = np.asarray(v, dtype=np.float64).reshape(-1)
    if out.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(out)):
        raise DimensionError(f"{name} contains non-finite entries")
    return out


def center(a):
    """Subtract the column means: returns ``(I - 11^T/n) @ a``.

    Idempotent to rounding; each output column has mean ~0.
    """
    a = as_matrix(a)
    return a - a.mean(axis=0, keepdims=True)


class CompactSvd:
    """Compact SVD ``a = u @ diag(sigma) @ v.T`` keeping only rank-r factors.

    ``u`` is n x r, ``sigma`` the r positive singular values in descending
    order, ``v`` is d x r. Column signs are fixed so the largest-magnitude
    entry of each left singular vector is positive, which makes the factors
    deterministic for golden tests.
    """

    def __init__(self, u, sigma, v, rank):
        self.u = u
        self.sigma = sigma
        self.v = v
        self.rank = rank

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def compact_svd(a, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """Compact SVD of ``a`` with rank cut at ``rank_tolerance * sigma_max``."""
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(
            f"SVD did not converge on a {a.shape} matrix "
            f"(residual scale {np.abs(a).max():.3e}): {exc}") from exc
    if s.size and s[0] > 0.0:
        rank = int(np.sum(s > rank_tolerance * s[0]))
    else:
        rank = 0
    u = u[:, :rank].copy()
    s = s[:rank].copy()
    v = vt[:rank].T.copy()
    for k in range(rank):
        i = int(np.argmax(np.abs(u[:, k])))
        if u[i, k] < 0.0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return CompactSvd(u, s, v, rank)


def pseudo_inverse(a, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """Moore-Penrose pseudoinverse via the compact SVD."""
    a = as_matrix(a)
    svd = compact_svd(a, rank_tolerance)
    if svd.rank == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    return (svd.v / svd.sigma) @ svd.u.T


class WhitenedBasis:
    """Orthonormal ``u_prime = [U, 1/sqrt(n)]`` built from centered data.

    The appended constant column is orthogonal to U because centered data has
    columns orthogonal to the all-ones vector, so ``u_prime.T @ u_prime`` is
    the identity of size ``source_rank + 1``.
    """

    def __init__(self, u_prime, source_rank):
        self.u_prime = u_prime
        self.source_rank = source_rank


def whitened_basis(x, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """Center ``x``, take its compact SVD, and append the constant column.

    Returns ``(WhitenedBasis, CompactSvd)`` where the SVD factors the centered
    data. Raises ``DegenerateDataError`` when the centered matrix is
    numerically zero (e.g. constant columns only).
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    if n < 2:
        raise DimensionError("whitened_basis needs at least 2 rows")
    svd = compact_svd(center(x), rank_tolerance)
    if svd.rank == 0:
        raise DegenerateDataError("centered data is numerically zero")
    ones_col = np.full((n, 1), 1.0 / np.sqrt(n))
    u_prime = np.hstack([svd.u, ones_col])
    return WhitenedBasis(u_prime, svd.rank), svd
