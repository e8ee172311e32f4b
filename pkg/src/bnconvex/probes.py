"""Implicit-regularization instrumentation.

Three probes: singular-value truncation of the training data, the
aligned-model gradient comparison (the hidden-weight update of the BN model,
mapped to q-space, equals Sigma^2 times the whitened model's update while the
gamma/alpha/output gradients coincide), and per-singular-direction cosine
tracking of hidden weights against their initialization.
"""

import csv

import numpy as np

from .errors import DimensionError
from .linalg import as_matrix, center, compact_svd
from .networks import _as_targets, _forward_parts


class TruncationSpec:
    """Keep the top-k singular values, or the smallest k explaining
    ``variance_target`` of the total squared singular mass."""

    def __init__(self, k=None, variance_target=None):
        if (k is None) == (variance_target is None):
            raise DimensionError("set exactly one of k and variance_target")
        if k is not None and k < 1:
            raise DimensionError("k must be >= 1")
        if variance_target is not None and not 0.0 < variance_target <= 1.0:
            raise DimensionError("variance_target must be in (0, 1]")
        self.k = k
        self.variance_target = variance_target

    def resolve_k(self, sigma):
        if self.k is not None:
            if self.k > len(sigma):
                raise DimensionError(f"k={self.k} exceeds rank {len(sigma)}")
            return self.k
        energy = np.cumsum(sigma ** 2) / np.sum(sigma ** 2)
        return int(np.searchsorted(energy, self.variance_target - 1e-15) + 1)


def truncate_data(x, spec):
    """Top-k reconstruction of the centered data, column means added back.

    The centered result has rank k and the discarded energy satisfies
    ``||center(x) - center(g(x))||_F = sqrt(sum_{i>k} sigma_i^2)``. Means are
    restored so BN semantics downstream are unchanged while non-BN baselines
    stay comparable. Test inputs are never truncated.
    """
    x = as_matrix(x, "x")
    means = x.mean(axis=0, keepdims=True)
    svd = compact_svd(center(x))
    k = spec.resolve_k(svd.sigma)
    low = (svd.u[:, :k] * svd.sigma[:k]) @ svd.v[:, :k].T
    return low + means


class ProbeReport:
    """Per-unit outcome of the aligned-model gradient comparison."""

    def __init__(self, per_unit_rel_error, skipped_units, gamma_exact,
                 alpha_exact, w2_exact, sigma, forward_gap):
        self.per_unit_rel_error = per_unit_rel_error
        self.skipped_units = skipped_units
        self.gamma_exact = gamma_exact
        self.alpha_exact = alpha_exact
        self.w2_exact = w2_exact
        self.sigma = sigma
        self.forward_gap = forward_gap

    @property
    def max_rel_error(self):
        ok = np.isfinite(self.per_unit_rel_error)
        return float(self.per_unit_rel_error[ok].max()) if ok.any() else 0.0


def gradient_identity_probe(x, y, net, seed=0):
    """Compare the BN model's hidden updates with its whitened twin's.

    The twin is built by mapping each hidden weight to q = Sigma V^T w; both
    models then share one forward state (equal weights imply equal outputs,
    which in floating point means evaluating both gradient formulas at the
    same state). The report carries the per-unit relative error of
    ``Delta_bn - Sigma^2 Delta_whitened`` in q-space, and bitwise-equality
    flags for the gamma/alpha/output gradients, whose formulas are identical
    functions of the shared state. Degenerate units are skipped with a flag.
    """
    if net.arch != "fc_pre_bn":
        raise DimensionError("probe expects a fc_pre_bn network")
    x = as_matrix(x, "x")
    svd = compact_svd(center(x))
    w = net.hidden.w
    gamma = net.hidden.gamma
    q = svd.sigma[:, None] * (svd.v.T @ w)  # r x m

    parts = _forward_parts(net, x)
    y = _as_targets(y, parts.n, net.out_dim)
    r_mat = parts.out - y
    t = np.where(parts.relu_mask, r_mat @ net.w2.T, 0.0)  # n x m
    skipped = np.where(parts.degenerate)[0].tolist()
    live = ~parts.degenerate

    # whitened-twin forward check (the alignment premise)
    uq = svd.u @ q
    qn = np.linalg.norm(q, axis=0)
    safe_qn = np.where(qn == 0.0, 1.0, qn)
    b_tw = (uq / safe_qn) * gamma + parts.shift * net.hidden.alpha
    out_tw = np.maximum(b_tw, 0.0)[:, live] @ net.w2[live]
    forward_gap = float(np.max(np.abs(out_tw - parts.a[:, live] @ net.w2[live]))) \
        if live.any() else 0.0

    # BN-model hidden gradient pushed to q-space
    safe = np.where(parts.degenerate, 1.0, parts.norms)
    coef = gamma / safe
    inner = np.einsum("ij,ij->j", parts.h, t)
    s = t * coef - parts.h * (coef * inner)
    gw = parts.x0.T @ s  # d x m
    delta_bn = svd.sigma[:, None] * (svd.v.T @ gw)

    # whitened-model hidden gradient in its native coordinates
    coef2 = gamma / safe_qn
    p0 = svd.u.T @ t
    inner2 = np.einsum("ij,ij->j", q, p0) / safe_qn ** 2
    delta_tw = coef2 * (p0 - q * inner2)
    target = (svd.sigma ** 2)[:, None] * delta_tw

    rel = np.full(net.width, np.nan)
    for j in range(net.width):
        if parts.degenerate[j]:
            continue
        denom = max(np.linalg.norm(delta_bn[:, j]), np.linalg.norm(target[:, j]), 1e-300)
        rel[j] = np.linalg.norm(delta_bn[:, j] - target[:, j]) / denom

    def shared_bundle():
        g_gamma = np.einsum("ij,ij->j", parts.h, t)
        g_alpha = parts.shift * t.sum(axis=0)
        g_w2 = parts.a.T @ r_mat
        return g_gamma, g_alpha, g_w2

    bn_bundle = shared_bundle()
    tw_bundle = shared_bundle()
    return ProbeReport(rel, skipped,
                       bool(np.array_equal(bn_bundle[0], tw_bundle[0])),
                       bool(np.array_equal(bn_bundle[1], tw_bundle[1])),
                       bool(np.array_equal(bn_bundle[2], tw_bundle[2])),
                       svd.sigma.copy(), forward_gap)


class DirectionSimilarityReport:
    """Cosines of (v_i^T W, v_i^T W') per right-singular direction.

    Entries whose projected row is numerically zero are flagged undefined
    (``defined`` False, value 0.0) instead of NaN.
    """

    def __init__(self, cosines, defined, sigmas):
        self.cosines = cosines
        self.defined = defined
        self.sigmas = sigmas


def singular_direction_similarity(w_now, w_init, svd):
    """Per-direction cosine similarity, ordered by descending singular value."""
    w_now = np.asarray(w_now, dtype=np.float64)
    w_init = np.asarray(w_init, dtype=np.float64)
    if w_now.shape != w_init.shape or w_now.shape[0] != svd.v.shape[0]:
        raise DimensionError("weight shapes must match each other and svd.v")
    a = svd.v.T @ w_now   # r x m
    b = svd.v.T @ w_init
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    defined = (na > 0.0) & (nb > 0.0)
    cos = np.zeros(svd.rank)
    dots = np.einsum("ij,ij->i", a, b)
    cos[defined] = dots[defined] / (na[defined] * nb[defined])
    cos = np.clip(cos, -1.0, 1.0)
    return DirectionSimilarityReport(cos, defined, svd.sigma.copy())


def write_similarity_csv(report, path):
    """CSV with one row per direction: index, sigma, cosine (blank if undefined)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["direction", "sigma", "cosine"])
        for i in range(len(report.sigmas)):
            val = repr(float(report.cosines[i])) if report.defined[i] else ""
            writer.writerow([i, repr(float(report.sigmas[i])), val])


def direction_trend(report):
    """Mean cosine over the high-sigma half vs the low-sigma half.

    A positive ``low_minus_high`` says low singular directions stayed closer
    to initialization, the directional signature of the implicit
    regularization. Reported as a statistic, never asserted.
    """
    vals = report.cosines[report.defined]
    if vals.size < 2:
        return {"high_sigma_mean": float("nan"), "low_sigma_mean": float("nan"),
                "low_minus_high": float("nan")}
    half = vals.size // 2
    high = float(vals[:half].mean())
    low = float(vals[half:].mean())
    return {"high_sigma_mean": high, "low_sigma_mean": low,
            "low_minus_high": low - high}
