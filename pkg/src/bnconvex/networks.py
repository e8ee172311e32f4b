"""Non-convex reference models: two-layer batch-normalized ReLU networks.

Four architectures share one parameter container:

* ``fc_pre_bn``   -- f(X) = sum_j ReLU(BN(X w_j)) w2_j^T, the standard model.
* ``fc_post_bn``  -- BN applied to ReLU(X w_j) instead, no outer ReLU.
* ``cnn``         -- per-patch convolution with a single BN over all patches.
* ``whitened``    -- data is an orthonormal U; hidden weights live in q-space
                    and the normalizer is the parameter norm ||q_j||.

BN of a pre-activation vector z over s rows is ``gamma * c/||c|| + alpha/sqrt(s)``
with c the centered z. A unit whose centered direction has zero norm is
*degenerate*: `gradients` refuses it, `forward` zeroes its contribution and
flags it, except that a unit with gamma == 0 is evaluated via the continuity
limit ``alpha/sqrt(s)`` (its normalized term vanishes identically).
"""

import json

import numpy as np

from .errors import DegenerateDirectionError, DimensionError, DivergenceError
from .linalg import as_matrix, center

ARCHS = ("fc_pre_bn", "fc_post_bn", "cnn", "whitened")
DEGENERATE_RTOL = 1e-12

# loss seam: squared loss is the only implemented option
LOSSES = ("squared",)


class BnLayerParams:
    """Hidden weights plus the per-unit BN scale/shift parameters."""

    def __init__(self, w, gamma, alpha):
        self.w = np.asarray(w, dtype=np.float64)
        self.gamma = np.asarray(gamma, dtype=np.float64).reshape(-1)
        self.alpha = np.asarray(alpha, dtype=np.float64).reshape(-1)
        m = self.w.shape[1] if self.w.ndim == 2 else -1
        if self.w.ndim != 2 or self.gamma.shape != (m,) or self.alpha.shape != (m,):
            raise DimensionError("inconsistent BN layer shapes")
        for arr in (self.w, self.gamma, self.alpha):
            if arr.size and not np.all(np.isfinite(arr)):
                raise DimensionError("non-finite BN layer parameters")

    def copy(self):
        return BnLayerParams(self.w.copy(), self.gamma.copy(), self.alpha.copy())


class BnNetwork:
    """Two-layer model: hidden BN layer plus linear output weights (m x C)."""

    def __init__(self, hidden, w2, arch):
        if arch not in ARCHS:
            raise DimensionError(f"unknown arch {arch!r}, expected one of {ARCHS}")
        self.hidden = hidden
        self.w2 = np.asarray(w2, dtype=np.float64)
        if self.w2.ndim == 1:
            self.w2 = self.w2[:, None]
        if self.w2.shape[0] != hidden.w.shape[1]:
            raise DimensionError("output weight rows must match hidden width")
        if self.w2.size and not np.all(np.isfinite(self.w2)):
            raise DimensionError("non-finite output weights")
        self.arch = arch

    @property
    def width(self):
        return self.hidden.w.shape[1]

    @property
    def out_dim(self):
        return self.w2.shape[1]

    def copy(self):
        return BnNetwork(self.hidden.copy(), self.w2.copy(), self.arch)


class DeepBnNetwork:
    """L-layer stack: L-1 BN-ReLU hidden layers and a linear output layer."""

    def __init__(self, layers, w_out):
        self.layers = list(layers)
        self.w_out = np.asarray(w_out, dtype=np.float64)
        prev = None
        for layer in self.layers:
            if prev is not None and layer.w.shape[0] != prev:
                raise DimensionError("layer dimensions do not chain")
            prev = layer.w.shape[1]
        if prev is not None and self.w_out.shape[0] != prev:
            raise DimensionError("output dimensions do not chain")


class TrainConfig:
    """Gradient-descent settings.

    ``batch_size=None`` means full batch. ``bn_momentum=None`` resolves to 1.0
    for full-batch training (running stats equal the batch stats) and 0.1 for
    mini-batches, the usual exponential-moving-average weight on the new batch.
    ``momentum`` is optional heavy-ball momentum (0.9 for baseline parity runs).
    """

    def __init__(self, beta, lr, epochs, batch_size=None, seed=0, bn_momentum=None,
                 momentum=0.0, regularize_hidden=False, loss="squared"):
        if beta < 0:
            raise DimensionError("beta must be >= 0")
        if lr < 0:
            raise DimensionError("lr must be >= 0")
        if epochs < 0:
            raise DimensionError("epochs must be >= 0")
        if bn_momentum is not None and not 0.0 < bn_momentum <= 1.0:
            raise DimensionError("bn_momentum must be in (0, 1]")
        if loss not in LOSSES:
            raise DimensionError(f"unsupported loss {loss!r}; implemented: {LOSSES}")
        self.beta = float(beta)
        self.lr = float(lr)
        self.epochs = int(epochs)
        self.batch_size = None if batch_size in (None, 0) else int(batch_size)
        self.seed = int(seed)
        self.bn_momentum = bn_momentum
        self.momentum = float(momentum)
        self.regularize_hidden = bool(regularize_hidden)
        self.loss = loss


class TrainLog:
    """Per-epoch objective/loss records plus the final state and BN stats."""

    def __init__(self, objective, train_loss, test_loss, network,
                 running_mean, running_std, n_train, reinit_events):
        self.objective = np.asarray(objective, dtype=np.float64)
        self.train_loss = np.asarray(train_loss, dtype=np.float64)
        self.test_loss = None if test_loss is None else np.asarray(test_loss)
        self.network = network
        self.running_mean = running_mean
        self.running_std = running_std
        self.n_train = n_train
        self.reinit_events = list(reinit_events)


class Gradients:
    """Parameter-shaped gradient bundle (hidden w, gamma, alpha, w2)."""

    def __init__(self, w, gamma, alpha, w2):
        self.w = w
        self.gamma = gamma
        self.alpha = alpha
        self.w2 = w2


def bn_apply(a, w_col, gamma, alpha):
    """BN of one pre-activation ``a @ w_col`` over the full batch.

    Returns ``gamma * c/||c|| + alpha/sqrt(n)`` with c the centered
    pre-activation; raises when the centered norm is zero.
    """
    a = as_matrix(a, "a")
    w_col = np.asarray(w_col, dtype=np.float64).reshape(-1)
    z = a @ w_col
    c = z - z.mean()
    nrm = float(np.linalg.norm(c))
    if nrm <= DEGENERATE_RTOL * np.linalg.norm(a) * max(np.linalg.norm(w_col), 1e-300):
        raise DegenerateDirectionError("centered pre-activation has zero norm")
    n = a.shape[0]
    return gamma * c / nrm + alpha / np.sqrt(n)


def bn_apply_cnn(patches, z, gamma, alpha):
    """Per-patch BN with statistics pooled over all K patches.

    Centering uses the global mean over all n*K pre-activations and the
    normalizer is the Euclidean norm of the centered stack; the shift is
    ``alpha/sqrt(nK)``. Returns one vector per patch.
    """
    stacked, n, k = _stack_patches(patches)
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    zz = stacked @ z
    c = zz - zz.mean()
    nrm = float(np.linalg.norm(c))
    if nrm <= DEGENERATE_RTOL * np.linalg.norm(stacked) * max(np.linalg.norm(z), 1e-300):
        raise DegenerateDirectionError("centered pre-activation has zero norm")
    out = gamma * c / nrm + alpha / np.sqrt(n * k)
    return [out[i * n:(i + 1) * n].copy() for i in range(k)]


def _stack_patches(patches):
    if not isinstance(patches, (list, tuple)) or len(patches) == 0:
        raise DimensionError("cnn input must be a non-empty list of patch matrices")
    mats = [as_matrix(p, "patch") for p in patches]
    n, h = mats[0].shape
    for p in mats:
        if p.shape != (n, h):
            raise DimensionError("all patches must share the same shape")
    return np.vstack(mats), n, len(mats)


class _ForwardParts:
    """Everything the forward pass computes, reused by gradients/training."""

    __slots__ = ("arch", "x0", "xs", "h", "b", "a", "a_out", "out", "relu_mask",
                 "input_mask", "norms", "degenerate", "shift", "n", "k",
                 "stack_n", "mu")

    def __init__(self, **kw):
        for key in self.__slots__:
            setattr(self, key, kw.get(key))


def _forward_parts(net, x):
    w = net.hidden.w
    gamma = net.hidden.gamma
    alpha = net.hidden.alpha
    k = 1
    input_mask = None
    if net.arch == "cnn":
        xs, n, k = _stack_patches(x)
        if w.shape[0] != xs.shape[1]:
            raise DimensionError("filter size does not match patch width")
        x0 = center(xs)
        z = x0 @ w
        norms = np.linalg.norm(z, axis=0)
        scale = np.linalg.norm(x0) * np.maximum(np.linalg.norm(w, axis=0), 1e-300)
        deg = norms <= DEGENERATE_RTOL * scale
        mu = xs.mean(axis=0) @ w
    elif net.arch == "whitened":
        xs = as_matrix(x, "u")
        n = xs.shape[0]
        if w.shape[0] != xs.shape[1]:
            raise DimensionError("q dimension does not match basis width")
        x0 = xs
        z = x0 @ w
        norms = np.linalg.norm(w, axis=0)
        deg = norms == 0.0
        mu = xs.mean(axis=0) @ w
    elif net.arch == "fc_post_bn":
        xs = as_matrix(x, "x")
        n = xs.shape[0]
        if w.shape[0] != xs.shape[1]:
            raise DimensionError("weight rows do not match feature count")
        x0 = xs
        pre = xs @ w
        input_mask = pre > 0.0
        u = np.maximum(pre, 0.0)
        mu = u.mean(axis=0)
        z = u - mu
        norms = np.linalg.norm(z, axis=0)
        deg = norms <= DEGENERATE_RTOL * np.maximum(np.linalg.norm(u, axis=0), 1e-300)
    else:  # fc_pre_bn
        xs = as_matrix(x, "x")
        n = xs.shape[0]
        if w.shape[0] != xs.shape[1]:
            raise DimensionError("weight rows do not match feature count")
        x0 = center(xs)
        z = x0 @ w
        norms = np.linalg.norm(z, axis=0)
        scale = np.linalg.norm(x0) * np.maximum(np.linalg.norm(w, axis=0), 1e-300)
        deg = norms <= DEGENERATE_RTOL * scale
        mu = xs.mean(axis=0) @ w

    stack_n = z.shape[0]
    shift = 1.0 / np.sqrt(stack_n)
    safe = np.where(deg, 1.0, norms)
    h = z / safe
    if np.any(deg):
        h[:, deg] = 0.0
    b = h * gamma + shift * alpha
    # a degenerate unit with nonzero gamma has no defined output: drop it
    dropped = deg & (gamma != 0.0)
    if net.arch == "fc_post_bn":
        a = b.copy()
        relu_mask = None
    else:
        relu_mask = b > 0.0
        a = np.maximum(b, 0.0)
    if np.any(dropped):
        a[:, dropped] = 0.0
        if relu_mask is not None:
            relu_mask[:, dropped] = False
    a_out = a.reshape(k, n, -1).sum(axis=0) if net.arch == "cnn" else a
    out = a_out @ net.w2
    return _ForwardParts(arch=net.arch, x0=x0, xs=xs, h=h, b=b, a=a, a_out=a_out,
                         out=out, relu_mask=relu_mask, input_mask=input_mask,
                         norms=norms, degenerate=deg, shift=shift, n=n, k=k,
                         stack_n=stack_n, mu=mu)


def forward(net, x):
    """Model output, shape (n, C). Degenerate units contribute zero unless
    their gamma is exactly 0 (continuity limit alpha/sqrt(n))."""
    return _forward_parts(net, x).out


def _as_targets(y, n, c):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape != (n, c):
        raise DimensionError(f"targets must have shape {(n, c)}, got {y.shape}")
    return y


def squared_loss(out, y):
    with np.errstate(over="ignore", invalid="ignore"):
        return 0.5 * float(np.sum((out - y) ** 2))


def objective(net, x, y, beta, regularize_hidden=False):
    """Squared loss plus weight decay on gamma, alpha and the output weights.

    ``regularize_hidden=True`` adds the hidden-weight term for parity with
    fully weight-decayed baselines; the default leaves hidden weights free
    (BN makes their scale irrelevant).
    """
    parts = _forward_parts(net, x)
    y = _as_targets(y, parts.n, net.out_dim)
    with np.errstate(over="ignore", invalid="ignore"):
        reg = np.sum(net.hidden.gamma ** 2) + np.sum(net.hidden.alpha ** 2)
        reg += np.sum(net.w2 ** 2)
        if regularize_hidden:
            reg += np.sum(net.hidden.w ** 2)
    return squared_loss(parts.out, y) + 0.5 * beta * reg


def scaled_objective(net, x, y, beta):
    """Squared loss plus the balanced penalty beta * sum_j ||w2_j|| * sqrt(g^2+a^2).

    This is the value the quadratic objective attains after balancing the
    per-unit scale freedom, and the form in which closed-form optima are
    reported.
    """
    parts = _forward_parts(net, x)
    y = _as_targets(y, parts.n, net.out_dim)
    unit_scale = np.sqrt(net.hidden.gamma ** 2 + net.hidden.alpha ** 2)
    reg = float(np.sum(np.linalg.norm(net.w2, axis=1) * unit_scale))
    return squared_loss(parts.out, y) + beta * reg


def _gradients_from_parts(net, parts, y, beta, regularize_hidden):
    if np.any(parts.degenerate):
        raise DegenerateDirectionError(
            f"degenerate hidden units at indices {np.where(parts.degenerate)[0].tolist()}"
        )
    y = _as_targets(y, parts.n, net.out_dim)
    r = parts.out - y
    t_out = r @ net.w2.T  # n x m
    gamma = net.hidden.gamma
    safe = np.where(parts.norms == 0.0, 1.0, parts.norms)
    coef = gamma / safe

    if parts.arch == "fc_post_bn":
        t = t_out
        g_w2 = parts.a.T @ r
        g_gamma = np.einsum("ij,ij->j", parts.h, t)
        g_alpha = parts.shift * t.sum(axis=0)
        inner = np.einsum("ij,ij->j", parts.h, t)
        s = (t - t.mean(axis=0, keepdims=True)) - parts.h * inner
        g_w = parts.xs.T @ (parts.input_mask * (s * coef))
    else:
        if parts.arch == "cnn":
            t_stack = np.tile(t_out, (parts.k, 1))
            t = np.where(parts.relu_mask, t_stack, 0.0)
        else:
            t = np.where(parts.relu_mask, t_out, 0.0)
        g_w2 = parts.a_out.T @ r
        g_gamma = np.einsum("ij,ij->j", parts.h, t)
        g_alpha = parts.shift * t.sum(axis=0)
        if parts.arch == "whitened":
            p0 = parts.x0.T @ t  # r_u x m
            q = net.hidden.w
            inner = np.einsum("ij,ij->j", q, p0) / safe ** 2
            g_w = coef * (p0 - q * inner)
        else:
            inner = np.einsum("ij,ij->j", parts.h, t)
            s = t * coef - parts.h * (coef * inner)
            g_w = parts.x0.T @ s

    g_gamma = g_gamma + beta * gamma
    g_alpha = g_alpha + beta * net.hidden.alpha
    g_w2 = g_w2 + beta * net.w2
    if regularize_hidden:
        g_w = g_w + beta * net.hidden.w
    return Gradients(g_w, g_gamma, g_alpha, g_w2)


def gradients(net, x, y, beta, regularize_hidden=False):
    """Exact analytic gradients of `objective`; ReLU subgradient at 0 is 0.

    Raises ``DegenerateDirectionError`` when any hidden unit has a zero
    centered direction; training must re-initialize such a unit.
    """
    parts = _forward_parts(net, x)
    return _gradients_from_parts(net, parts, y, beta, regularize_hidden)


def init_network(arch, fan_in, width, out_dim, rng):
    """Uniform(+-1/sqrt(fan_in)) hidden weights, gamma=1, alpha=0."""
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    w = rng.uniform(-bound, bound, size=(fan_in, width))
    gamma = np.ones(width)
    alpha = np.zeros(width)
    w2 = rng.uniform(-1.0 / np.sqrt(max(width, 1)), 1.0 / np.sqrt(max(width, 1)),
                     size=(width, out_dim))
    return BnNetwork(BnLayerParams(w, gamma, alpha), w2, arch)


def make_rng(seed):
    """Counter-based Philox generator: identical streams across platforms."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def _reinit_units(net, idx, rng, fan_in):
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    for j in idx:
        net.hidden.w[:, j] = rng.uniform(-bound, bound, size=fan_in)
        net.hidden.gamma[j] = 1.0
        net.hidden.alpha[j] = 0.0


def _bn_batch_stats(net, parts):
    # mean of raw pre-activations and population std of the centered ones
    std = parts.norms / np.sqrt(parts.stack_n)
    return parts.mu.copy(), std


def train_gd(net, x, y, config, x_test=None, y_test=None):
    """(Mini-batch) gradient descent on `objective`; deterministic per seed.

    Full batch is the contract (``batch_size=None``); mini-batches use the
    batch's own rows for the BN statistics. Degenerate units are
    re-initialized from the PRNG and logged rather than raising. Running BN
    mean/std are tracked with ``bn_momentum`` (1.0 for full batch) for
    inference. Raises ``DivergenceError`` on a NaN objective, carrying the
    last finite state.
    """
    net = net.copy()
    rng = make_rng(config.seed)
    fan_in = net.hidden.w.shape[0]
    is_cnn = net.arch == "cnn"
    n = _stack_patches(x)[1] if is_cnn else as_matrix(x).shape[0]
    full_batch = config.batch_size is None or config.batch_size >= n
    bn_mom = config.bn_momentum if config.bn_momentum is not None else (1.0 if full_batch else 0.1)

    run_mean = None
    run_std = None
    obj_hist, loss_hist, test_hist = [], [], []
    reinits = []
    vel = None
    last_finite = (net.copy(), None)

    def batch_view(idx):
        if is_cnn:
            return [p[idx] for p in x]
        return x[idx]

    y_arr = _as_targets(y, n, net.out_dim)

    for epoch in range(config.epochs):
        if full_batch:
            batches = [np.arange(n)]
        else:
            perm = rng.permutation(n)
            bs = config.batch_size
            batches = [perm[i:i + bs] for i in range(0, n, bs)]
        for idx in batches:
            xb = batch_view(idx)
            yb = y_arr[idx]
            # overflow here is the divergence condition caught after the epoch
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(5):
                    parts = _forward_parts(net, xb)
                    bad = np.where(parts.degenerate)[0]
                    if bad.size == 0:
                        break
                    _reinit_units(net, bad, rng, fan_in)
                    reinits.append({"epoch": epoch, "units": bad.tolist()})
                grads = _gradients_from_parts(net, parts, yb, config.beta,
                                              config.regularize_hidden)
            mean_b, std_b = _bn_batch_stats(net, parts)
            if run_mean is None:
                run_mean, run_std = mean_b, std_b
            else:
                run_mean = (1 - bn_mom) * run_mean + bn_mom * mean_b
                run_std = (1 - bn_mom) * run_std + bn_mom * std_b
            step = (grads.w, grads.gamma, grads.alpha, grads.w2)
            if config.momentum > 0.0:
                if vel is None:
                    vel = [np.zeros_like(s) for s in step]
                vel = [config.momentum * v + s for v, s in zip(vel, step)]
                step = vel
            net.hidden.w -= config.lr * step[0]
            net.hidden.gamma -= config.lr * step[1]
            net.hidden.alpha -= config.lr * step[2]
            net.w2 -= config.lr * step[3]

        with np.errstate(over="ignore", invalid="ignore"):
            obj = _safe_objective(net, x, y_arr, config)
        if not np.isfinite(obj):
            log = TrainLog(obj_hist, loss_hist, test_hist or None, last_finite[0],
                           run_mean, run_std, n, reinits)
            raise DivergenceError(f"objective became non-finite at epoch {epoch}",
                                  last_state=log)
        last_finite = (net.copy(), obj)
        obj_hist.append(obj)
        loss_hist.append(_safe_loss(net, x, y_arr))
        if x_test is not None and y_test is not None:
            out_t = forward(net, x_test)
            test_hist.append(squared_loss(out_t, _as_targets(y_test, out_t.shape[0],
                                                             net.out_dim)))

    # fold the final parameters' full-batch statistics into the running
    # average so full-batch training (momentum 1) is exactly self-consistent
    # at inference time
    parts = _forward_parts(net, x)
    mean_f, std_f = _bn_batch_stats(net, parts)
    if run_mean is None:
        run_mean, run_std = mean_f, std_f
    else:
        run_mean = (1 - bn_mom) * run_mean + bn_mom * mean_f
        run_std = (1 - bn_mom) * run_std + bn_mom * std_f
    return TrainLog(obj_hist, loss_hist, test_hist or None, net,
                    run_mean, run_std, n, reinits)


def _safe_objective(net, x, y, config):
    try:
        return objective(net, x, y, config.beta, config.regularize_hidden)
    except DimensionError:
        return np.nan


def _safe_loss(net, x, y):
    return squared_loss(forward(net, x), y)


def rescale_units(net, eta):
    """Scale unit j by eta_j: gamma, alpha multiplied, output row divided.

    Leaves the forward map unchanged; with the balancing eta from
    `balanced_etas` the quadratic regularizer attains
    ``sum_j ||w2_j|| sqrt(gamma_j^2 + alpha_j^2)``.
    """
    eta = np.asarray(eta, dtype=np.float64).reshape(-1)
    if eta.shape != (net.width,):
        raise DimensionError("eta must have one entry per hidden unit")
    if np.any(eta <= 0):
        raise ValueError("eta entries must be positive")
    hidden = BnLayerParams(net.hidden.w.copy(), net.hidden.gamma * eta,
                           net.hidden.alpha * eta)
    return BnNetwork(hidden, net.w2 / eta[:, None], net.arch)


def balanced_etas(net):
    """eta_j = (||w2_j|| / sqrt(gamma_j^2 + alpha_j^2))^(1/2), 1 when undefined."""
    w2n = np.linalg.norm(net.w2, axis=1)
    ga = np.sqrt(net.hidden.gamma ** 2 + net.hidden.alpha ** 2)
    eta = np.ones(net.width)
    ok = (w2n > 0) & (ga > 0)
    eta[ok] = np.sqrt(w2n[ok] / ga[ok])
    return eta


def deep_forward_activations(net, x, upto):
    """Activations A^(upto) of a deep stack; A^(0) is the input itself."""
    if upto < 0 or upto > len(net.layers) - 1:
        raise DimensionError(f"upto must be in [0, {len(net.layers) - 1}]")
    a = as_matrix(x, "x")
    for layer in net.layers[:upto]:
        tmp = BnNetwork(layer, np.zeros((layer.w.shape[1], 1)), "fc_pre_bn")
        parts = _forward_parts(tmp, a)
        a = parts.a
    return a


def predict_with_stats(net, x_new, running_mean, running_std, n_train):
    """Inference forward using stored training BN statistics.

    Each unit removes the training mean and divides by
    ``sqrt(s_train) * std`` (the training normalizer), then applies the
    trained scale/shift; test inputs are used as-is. On the training data
    with full-batch stats this reproduces the training forward.
    """
    w = net.hidden.w
    gamma, alpha = net.hidden.gamma, net.hidden.alpha
    if net.arch == "cnn":
        stacked, n_new, k = _stack_patches(x_new)
        z = stacked @ w
        s_train = n_train * k
    else:
        x_new = as_matrix(x_new, "x_new")
        n_new, k = x_new.shape[0], 1
        if net.arch == "fc_post_bn":
            z = np.maximum(x_new @ w, 0.0)
        else:
            z = x_new @ w
        s_train = n_train
    denom = np.sqrt(s_train) * running_std
    safe = np.where(denom == 0.0, 1.0, denom)
    normalized = (z - running_mean) / safe
    normalized[:, denom == 0.0] = 0.0
    b = normalized * gamma + alpha / np.sqrt(s_train)
    a = b if net.arch == "fc_post_bn" else np.maximum(b, 0.0)
    if net.arch == "cnn":
        a = a.reshape(k, n_new, -1).sum(axis=0)
    return a @ net.w2


def _mat_to_dict(m):
    m = np.asarray(m, dtype=np.float64)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": m.reshape(-1).tolist()}


def _mat_from_dict(d):
    return np.asarray(d["data"], dtype=np.float64).reshape(d["rows"], d["cols"])


def network_to_dict(net):
    """JSON-ready dict: arch tag, shapes, row-major weight arrays."""
    return {
        "schema": "bnconvex-network-v1",
        "arch": net.arch,
        "hidden": {
            "w": _mat_to_dict(net.hidden.w),
            "gamma": net.hidden.gamma.tolist(),
            "alpha": net.hidden.alpha.tolist(),
        },
        "w2": _mat_to_dict(net.w2),
    }


def network_from_dict(d):
    if d.get("schema") != "bnconvex-network-v1":
        raise DimensionError(f"unknown network schema {d.get('schema')!r}")
    hidden = BnLayerParams(_mat_from_dict(d["hidden"]["w"]),
                           np.asarray(d["hidden"]["gamma"]),
                           np.asarray(d["hidden"]["alpha"]))
    return BnNetwork(hidden, _mat_from_dict(d["w2"]), d["arch"])


def save_network(net, path):
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=1)


def load_network(path):
    with open(path) as fh:
        return network_from_dict(json.load(fh))
