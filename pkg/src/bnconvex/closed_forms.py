"""Closed-form optimal networks for the high-dimensional/overparameterized regimes.

All solvers return a `ClosedFormResult` whose primal objective is the
balanced value ``loss + beta * sum_j ||w2_j|| sqrt(gamma_j^2 + alpha_j^2)``
(the optimum of the quadratically-regularized problem) and whose dual
objective is ``-0.5 ||v* - y||^2 + 0.5 ||y||^2`` at the analytic dual point;
the two agree to machine precision, which is the strong-duality certificate.
Active units always satisfy gamma^2 + alpha^2 = 1.
"""

import numpy as np

from .errors import DimensionError
from .linalg import as_matrix, as_vector, compact_svd, pseudo_inverse
from .networks import BnLayerParams, BnNetwork, scaled_objective

FULL_ROW_RANK_RTOL = 1e-8


class ClosedFormResult:
    def __init__(self, network, primal_objective, dual_objective, v_star, regime_case):
        self.network = network
        self.primal_objective = primal_objective
        self.dual_objective = dual_objective
        self.v_star = v_star
        self.regime_case = regime_case

    @property
    def duality_gap(self):
        return abs(self.primal_objective - self.dual_objective)


def _require_full_row_rank(x, who):
    x = as_matrix(x, "x")
    n, d = x.shape
    if n > d:
        raise DimensionError(
            f"{who} needs n <= d (got n={n}, d={d}); use the convex program instead")
    if compact_svd(x, FULL_ROW_RANK_RTOL).rank < n:
        raise DimensionError(
            f"{who} needs a full row-rank data matrix; use the convex program instead")
    return x


def _bn_params_for(z):
    """(gamma, alpha) normalizing z: gamma^2 + alpha^2 = 1 by construction."""
    nz = np.linalg.norm(z)
    n = z.shape[0]
    gamma = np.linalg.norm(z - z.mean()) / nz
    alpha = z.sum() / (np.sqrt(n) * nz)
    return gamma, alpha


def dual_optimal_scalar(y, beta):
    """Analytic dual optimum: each side of y is shrunk onto the beta-ball.

    The positive part (y)_+ is scaled to norm beta when it exceeds beta and
    kept whole otherwise; same for the negative part, subtracted. Satisfies
    ``max(||(v)_+||, ||(-v)_+||) <= beta``.
    """
    y = as_vector(y, "y")
    zp = np.maximum(y, 0.0)
    zm = np.maximum(-y, 0.0)
    np_, nm = np.linalg.norm(zp), np.linalg.norm(zm)
    term_p = beta * zp / np_ if beta <= np_ and np_ > 0 else zp
    term_m = beta * zm / nm if beta <= nm and nm > 0 else zm
    return term_p - term_m


def _regime(beta, np_, nm):
    pos = beta <= np_ and np_ > 0
    neg = beta <= nm and nm > 0
    if pos and neg:
        return "both_active"
    if pos:
        return "positive_only"
    if neg:
        return "negative_only"
    return "inactive"


def closed_form_scalar(x, y, beta):
    """Two-unit optimum for the scalar model on full row-rank data (n <= d).

    One candidate unit fits each sign of the labels: hidden weights
    ``X^+ ReLU(+-y)``, output weight ``+-(||ReLU(+-y)|| - beta)_+``, BN
    parameters normalizing the fitted part. A side whose threshold is not met
    is absent; at an exact tie the unit is kept with zero output weight.
    """
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    x = _require_full_row_rank(x, "closed_form_scalar")
    y = as_vector(y, "y")
    if y.shape[0] != x.shape[0]:
        raise DimensionError("y length must match rows of x")
    zp = np.maximum(y, 0.0)
    zm = np.maximum(-y, 0.0)
    np_, nm = float(np.linalg.norm(zp)), float(np.linalg.norm(zm))
    pinv = pseudo_inverse(x)

    ws, gs, als, w2s = [], [], [], []
    for z, nz, sign in ((zm, nm, -1.0), (zp, np_, +1.0)):
        if nz > 0 and nz >= beta:
            g, a = _bn_params_for(z)
            ws.append(pinv @ z)
            gs.append(g)
            als.append(a)
            w2s.append(sign * (nz - beta))
    net = _assemble(ws, gs, als, w2s, x.shape[1], 1, "fc_pre_bn")

    v_star = dual_optimal_scalar(y, beta)
    dual = -0.5 * float(np.sum((v_star - y) ** 2)) + 0.5 * float(y @ y)
    primal = scaled_objective(net, x, y, beta)
    return ClosedFormResult(net, primal, dual, v_star, _regime(beta, np_, nm))


def _assemble(ws, gs, als, w2s, fan_in, out_dim, arch):
    if ws:
        hidden = BnLayerParams(np.column_stack(ws), np.array(gs), np.array(als))
        w2 = np.vstack([np.atleast_1d(w) for w in w2s])
    else:
        hidden = BnLayerParams(np.zeros((fan_in, 0)), np.zeros(0), np.zeros(0))
        w2 = np.zeros((0, out_dim))
    return BnNetwork(hidden, w2, arch)


def _check_one_hot(y_mat):
    if not np.all((y_mat == 0.0) | (y_mat == 1.0)):
        raise DimensionError("label matrix must be 0/1 valued")
    if np.any(y_mat.sum(axis=1) > 1.0):
        raise DimensionError("label matrix columns must be disjoint indicators")


def closed_form_vector_onehot(x, y_onehot, beta):
    """Per-class optimum for one-hot labels: one unit per active class.

    Class j is active when ``||y_j|| >= beta``; its unit has hidden weights
    ``X^+ y_j`` and writes ``(||y_j|| - beta)_+`` into its own output column.
    """
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    x = _require_full_row_rank(x, "closed_form_vector_onehot")
    y_mat = as_matrix(y_onehot, "y_onehot")
    if y_mat.shape[0] != x.shape[0]:
        raise DimensionError("label rows must match rows of x")
    _check_one_hot(y_mat)
    c = y_mat.shape[1]
    pinv = pseudo_inverse(x)

    ws, gs, als, w2s = [], [], [], []
    v_star = np.zeros_like(y_mat)
    active = 0
    for j in range(c):
        yj = y_mat[:, j]
        nj = float(np.linalg.norm(yj))
        if nj == 0.0:
            continue
        if beta <= nj:
            v_star[:, j] = beta * yj / nj
            g, a = _bn_params_for(yj)
            row = np.zeros(c)
            row[j] = nj - beta
            ws.append(pinv @ yj)
            gs.append(g)
            als.append(a)
            w2s.append(row)
            active += 1
        else:
            v_star[:, j] = yj
    net = _assemble(ws, gs, als, w2s, x.shape[1], c, "fc_pre_bn")
    dual = -0.5 * float(np.sum((v_star - y_mat) ** 2)) + 0.5 * float(np.sum(y_mat ** 2))
    primal = scaled_objective(net, x, y_mat, beta)
    return ClosedFormResult(net, primal, dual, v_star, f"active_{active}_of_{c}")


def onehot_objective_value(y_mat, beta):
    """Reference optimum for one-hot labels, evaluated directly:

    ``-0.5 beta^2 |E| + 0.5 sum_{j not in E} ||y_j||^2 + beta sum_{j in E} ||y_j||``
    with E the classes whose column norm is at least beta.
    """
    norms = np.linalg.norm(np.asarray(y_mat, dtype=float), axis=0)
    e = norms >= beta
    return (-0.5 * beta ** 2 * int(e.sum())
            + 0.5 * float(np.sum(norms[~e] ** 2))
            + beta * float(np.sum(norms[e])))


def closed_form_deep_last_two(a_pre, y_or_mat, beta, vector_mode=False):
    """Optimal last-two-layer weights of a deep stack with surjective A^(L-2).

    Identical formulas to the two-layer solvers with the data replaced by the
    penultimate activations; requires rank(a_pre) = n.
    """
    a_pre = as_matrix(a_pre, "a_pre")
    n = a_pre.shape[0]
    if compact_svd(a_pre, FULL_ROW_RANK_RTOL).rank < n:
        raise DimensionError(
            "penultimate activations must have rank n (range = R^n); widen the "
            "network or use the convex program")
    if vector_mode:
        return closed_form_vector_onehot(a_pre, y_or_mat, beta)
    return closed_form_scalar(a_pre, y_or_mat, beta)


def closed_form_postbn(x, y, beta):
    """Single-unit optimum for the BN-after-ReLU model on full row-rank data.

    The unit's hidden weights fit ``y - min_i y_i`` (nonnegative, so the ReLU
    is inactive as a constraint), BN rescales it back to ``y/||y||``, and the
    output weight is ``(||y|| - beta)_+``. For constant labels the fitted part
    degenerates to gamma = 0 and the prediction lives on the constant
    direction. Zero labels yield an empty network.
    """
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    x = _require_full_row_rank(x, "closed_form_postbn")
    y = as_vector(y, "y")
    n = x.shape[0]
    if y.shape[0] != n:
        raise DimensionError("y length must match rows of x")
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        net = _assemble([], [], [], [], x.shape[1], 1, "fc_post_bn")
        return ClosedFormResult(net, 0.0, 0.0, np.zeros(n), "inactive")
    pinv = pseudo_inverse(x)
    w = pinv @ (y - y.min())
    gamma = float(np.linalg.norm(y - y.mean()) / ny)
    alpha = float(y.sum() / (np.sqrt(n) * ny))
    w2 = max(ny - beta, 0.0)
    net = _assemble([w], [gamma], [alpha], [w2], x.shape[1], 1, "fc_post_bn")
    v_star = beta * y / ny if beta <= ny else y.copy()
    dual = -0.5 * float(np.sum((v_star - y) ** 2)) + 0.5 * ny ** 2
    primal = scaled_objective(net, x, y, beta)
    regime = "active" if beta <= ny else "inactive"
    return ClosedFormResult(net, primal, dual, v_star, regime)
