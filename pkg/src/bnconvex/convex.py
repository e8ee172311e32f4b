"""Exact convex reformulations of the BN-ReLU training problems.

Each program minimizes, over per-arrangement variable pairs (s_i, s_i'),

    0.5 * || sum_i F_i (s_i - s_i') - y ||^2  +  beta * sum_i (||s_i|| + ||s_i'||)

subject to cone constraints K_i s_i >= 0 and K_i s_i' >= 0, where the design
and cone blocks depend on the variant:

* fc_scalar: F_i = D_i U',            K_i = (2 D_i - I) U'
* cnn:       F_i = sum_k D_ik U'_Mk,  K_i = (2 D_i - I) U'_M  (stacked rows)
* post_bn:   F_i = U'_i,              K_i = [(2 D_i - I) X V_i S_i^-1 | 0]

Blocks are padded to a common width so everything is a dense (P, ., .)
tensor; the per-block true dimensions live in ``dims`` and padded
coordinates stay exactly zero under the solver.

The solver replaces the cone constraints with a squared-hinge penalty
``rho * ||max(0, -K s)||^2`` (a linear-hinge flag exists for parity with the
classic penalty form), minimized by FISTA with backtracking and a group
soft-threshold prox, with continuation over an increasing rho schedule.
"""

import csv
import json

import numpy as np
from scipy.optimize import nnls

from .errors import (DegenerateDataError, DimensionError, DivergenceError,
                     InfeasibleSolutionError)
from .linalg import as_matrix, as_vector, center, compact_svd, whitened_basis
from .networks import BnLayerParams, BnNetwork, _stack_patches

VARIANTS = ("fc_scalar", "cnn", "post_bn")


class ConvexProgram:
    def __init__(self, variant, design, cones, dims, y, beta, meta):
        self.variant = variant
        self.design = design          # (P, n, dmax)
        self.cones = cones            # (P, m_rows, dmax)
        self.dims = dims              # true block widths, shape (P,)
        self.y = y
        self.beta = beta
        self.meta = meta

    @property
    def n_blocks(self):
        return self.design.shape[0]

    @property
    def block_dim(self):
        return self.design.shape[2]


class ConvexSolution:
    """Optimal block pairs plus the achieved objective and feasibility."""

    def __init__(self, s, s_prime, objective, max_violation, trace):
        self.s = s                    # (P, dmax)
        self.s_prime = s_prime
        self.objective = objective
        self.max_violation = max_violation
        self.trace = trace            # list of dict rows

    def blocks(self, prog):
        """Per-block vectors trimmed to their true dimensions."""
        s = [self.s[i, :prog.dims[i]].copy() for i in range(prog.n_blocks)]
        sp = [self.s_prime[i, :prog.dims[i]].copy() for i in range(prog.n_blocks)]
        return s, sp


class DualCertificate:
    def __init__(self, v, dual_objective, max_constraint_excess, exhaustive):
        self.v = v
        self.dual_objective = dual_objective
        self.max_constraint_excess = max_constraint_excess
        # when False the certificate only checks sampled arrangements and the
        # implied lower bound applies to the subsampled program, not the full one
        self.exhaustive = exhaustive


class SolverConfig:
    """Penalty-continuation settings for `solve_penalty`."""

    def __init__(self, rho_schedule=None, max_iters=4000, tolerance=1e-6,
                 inner_tol=1e-12, backtrack=0.5, max_extra_stages=10,
                 hinge="squared"):
        if hinge not in ("squared", "linear"):
            raise DimensionError("hinge must be 'squared' or 'linear'")
        self.rho_schedule = rho_schedule
        self.max_iters = int(max_iters)
        self.tolerance = float(tolerance)
        self.inner_tol = float(inner_tol)
        self.backtrack = float(backtrack)
        self.max_extra_stages = int(max_extra_stages)
        self.hinge = hinge


def _rederive_masks(u_eff, arr):
    """Masks re-derived from witnesses in the program's effective space."""
    masks, seen = [], set()
    for a in arr.arrangements:
        if a.witness.shape[0] != u_eff.shape[1]:
            raise DimensionError(
                f"witness dimension {a.witness.shape[0]} does not match the "
                f"program space dimension {u_eff.shape[1]}; compute the "
                f"arrangements on the program's effective matrix")
        mask = (u_eff @ a.witness) >= 0.0
        key = mask.tobytes()
        if key not in seen:
            seen.add(key)
            masks.append(mask)
    return masks


def _pack_blocks(design_list, cone_list):
    dmax = max(b.shape[1] for b in design_list)
    p = len(design_list)
    n = design_list[0].shape[0]
    mrows = cone_list[0].shape[0]
    design = np.zeros((p, n, dmax))
    cones = np.zeros((p, mrows, dmax))
    dims = np.zeros(p, dtype=int)
    for i, (f, k) in enumerate(zip(design_list, cone_list)):
        d = f.shape[1]
        design[i, :, :d] = f
        cones[i, :, :d] = k
        dims[i] = d
    return design, cones, dims


def build_fc_program(x, y, beta, arr):
    """Fully-connected scalar program on the whitened basis U' of x."""
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    if y.shape[0] != x.shape[0]:
        raise DimensionError("y length must match rows of x")
    wb, svd = whitened_basis(x)
    up = wb.u_prime
    masks = _rederive_masks(up, arr)
    design = [m[:, None] * up for m in masks]
    cones = [(2.0 * m - 1.0)[:, None] * up for m in masks]
    d, k, dims = _pack_blocks(design, cones)
    meta = {"u_prime": up, "svd": svd, "masks": masks, "n": x.shape[0],
            "exhaustive": arr.exhaustive}
    return ConvexProgram("fc_scalar", d, k, dims, y, float(beta), meta)


def build_cnn_program(patches, y, beta, arr):
    """Convolutional program on the whitened basis of the stacked patches."""
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    stacked, n, kk = _stack_patches(patches)
    y = as_vector(y, "y")
    if y.shape[0] != n:
        raise DimensionError("y length must match patch rows")
    wb, svd = whitened_basis(stacked)
    up = wb.u_prime  # nK x (r_c + 1)
    masks = _rederive_masks(up, arr)
    rc1 = up.shape[1]
    design = [(m[:, None] * up).reshape(kk, n, rc1).sum(axis=0) for m in masks]
    cones = [(2.0 * m - 1.0)[:, None] * up for m in masks]
    d, k, dims = _pack_blocks(design, cones)
    meta = {"u_prime": up, "svd": svd, "masks": masks, "n": n, "k": kk,
            "exhaustive": arr.exhaustive}
    return ConvexProgram("cnn", d, k, dims, y, float(beta), meta)


def build_postbn_program(x, y, beta, arr):
    """BN-after-ReLU program: one whitened basis per arrangement.

    For each mask, the centered D_i X gets its own compact SVD (rank r_i);
    the block variable has r_i + 1 entries and the cone constraint acts on
    the leading r_i coordinates only, i.e. on everything except the final
    coordinate that multiplies the constant column. (The one-based statement
    of this constraint is ambiguous about whether ``r_i - 1`` or ``r_i``
    leading entries are meant; constraining all non-constant coordinates is
    the consistent choice and is what the proof construction uses.)

    Caveat: tying each block's hidden weight to the row space of the centered
    masked data discards the null-space freedom the non-convex model has for
    realizing an activation pattern, so this program is a restriction: its
    optimum can exceed the non-convex optimum on some instances while
    matching it on most (the single-unit closed form remains the reference
    for full row-rank data).
    """
    if beta <= 0:
        raise DimensionError("beta must be > 0")
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    n = x.shape[0]
    if y.shape[0] != n:
        raise DimensionError("y length must match rows of x")
    masks = _rederive_masks(x, arr)
    ones_col = np.full((n, 1), 1.0 / np.sqrt(n))
    design, cones, block_svds, kept = [], [], [], []
    for m in masks:
        dx = np.where(m[:, None], x, 0.0)
        svd_i = compact_svd(center(dx))
        if svd_i.rank == 0:
            continue
        up_i = np.hstack([svd_i.u, ones_col])
        cone_lead = (2.0 * m - 1.0)[:, None] * (x @ (svd_i.v / svd_i.sigma))
        cone = np.hstack([cone_lead, np.zeros((n, 1))])
        design.append(up_i)
        cones.append(cone)
        block_svds.append(svd_i)
        kept.append(m)
    if not design:
        raise DegenerateDataError("no arrangement block has positive rank")
    d, k, dims = _pack_blocks(design, cones)
    meta = {"masks": kept, "block_svds": block_svds, "n": n,
            "exhaustive": arr.exhaustive}
    return ConvexProgram("post_bn", d, k, dims, y, float(beta), meta)


def _fit_residual(prog, s, sp):
    return np.einsum("pnd,pd->n", prog.design, s - sp) - prog.y


def _violations(prog, s, sp):
    neg_s = np.maximum(-np.einsum("pmd,pd->pm", prog.cones, s), 0.0)
    neg_sp = np.maximum(-np.einsum("pmd,pd->pm", prog.cones, sp), 0.0)
    return neg_s, neg_sp


def _true_objective(prog, s, sp):
    res = _fit_residual(prog, s, sp)
    groups = np.linalg.norm(s, axis=1).sum() + np.linalg.norm(sp, axis=1).sum()
    return 0.5 * float(res @ res) + prog.beta * float(groups)


def _max_violation(prog, s, sp):
    neg_s, neg_sp = _violations(prog, s, sp)
    worst = 0.0
    if neg_s.size:
        worst = max(float(neg_s.max()), float(neg_sp.max()))
    return max(0.0, worst)


def _smooth_value(prog, s, sp, rho, hinge):
    res = _fit_residual(prog, s, sp)
    neg_s, neg_sp = _violations(prog, s, sp)
    if hinge == "squared":
        pen = rho * (float(np.sum(neg_s ** 2)) + float(np.sum(neg_sp ** 2)))
    else:
        pen = rho * (float(np.sum(neg_s)) + float(np.sum(neg_sp)))
    return 0.5 * float(res @ res) + pen


def _smooth_value_grad(prog, s, sp, rho, hinge):
    res = _fit_residual(prog, s, sp)
    neg_s, neg_sp = _violations(prog, s, sp)
    fit_grad = np.einsum("pnd,n->pd", prog.design, res)
    if hinge == "squared":
        pen = rho * (float(np.sum(neg_s ** 2)) + float(np.sum(neg_sp ** 2)))
        g_s = fit_grad - 2.0 * rho * np.einsum("pmd,pm->pd", prog.cones, neg_s)
        g_sp = -fit_grad - 2.0 * rho * np.einsum("pmd,pm->pd", prog.cones, neg_sp)
    else:
        pen = rho * (float(np.sum(neg_s)) + float(np.sum(neg_sp)))
        g_s = fit_grad - rho * np.einsum("pmd,pm->pd", prog.cones, (neg_s > 0).astype(float))
        g_sp = -fit_grad - rho * np.einsum("pmd,pm->pd", prog.cones, (neg_sp > 0).astype(float))
    return 0.5 * float(res @ res) + pen, g_s, g_sp


def _group_prox(v, thresh):
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    scale = np.maximum(0.0, 1.0 - thresh / np.maximum(norms, 1e-300))
    return v * scale


def solve_penalty(prog, cfg=None):
    """Penalty-continuation FISTA for the convex program.

    Runs one FISTA pass per rho in the schedule (default
    ``{1, 10, 100, 1000} * ||y||^2 / n``), then keeps multiplying rho by 10
    until the cone violation drops below ``cfg.tolerance`` or the extra-stage
    budget runs out (a feasibility warning is recorded in the trace). The
    reported objective is the true one: fit plus group-lasso terms, no
    penalty.
    """
    cfg = cfg or SolverConfig()
    p, _, dmax = prog.design.shape
    scale = max(float(prog.y @ prog.y) / max(prog.y.shape[0], 1), 1e-12)
    schedule = cfg.rho_schedule
    if schedule is None:
        schedule = [scale, 10.0 * scale, 100.0 * scale, 1000.0 * scale]
    schedule = list(schedule)

    s = np.zeros((p, dmax))
    sp = np.zeros((p, dmax))
    trace = []
    stage = 0
    extra = 0
    rho_idx = 0
    lip = 1.0
    prev_stage_obj = None
    while True:
        rho = schedule[rho_idx] if rho_idx < len(schedule) else schedule[-1] * 10.0 ** extra
        s, sp, rows, lip = _fista_stage(prog, s, sp, rho, cfg, stage, lip0=lip)
        trace.extend(rows)
        obj = _true_objective(prog, s, sp)
        if not np.isfinite(obj):
            raise DivergenceError("penalty solve produced non-finite objective",
                                  last_state=trace)
        viol = _max_violation(prog, s, sp)
        # a stage that improves neither the objective nor the feasibility
        # made no progress: record it (the objective alone may legitimately
        # rise across stages as the penalty tightens feasibility)
        if prev_stage_obj is not None \
                and obj >= prev_stage_obj - 1e-12 * (1 + abs(prev_stage_obj)) \
                and viol >= prev_stage_viol - 1e-15:
            trace.append({"stage": stage, "rho": rho, "iter": -1,
                          "objective": obj, "violation": viol,
                          "warning": "stagnation"})
        prev_stage_obj, prev_stage_viol = obj, viol
        stage += 1
        if rho_idx < len(schedule) - 1:
            rho_idx += 1
            continue
        rho_idx = len(schedule)
        if viol <= cfg.tolerance:
            break
        extra += 1
        if extra > cfg.max_extra_stages:
            trace.append({"stage": stage, "rho": rho, "iter": -1,
                          "objective": obj, "violation": viol,
                          "warning": "feasibility"})
            break
    return ConvexSolution(s, sp, _true_objective(prog, s, sp),
                          _max_violation(prog, s, sp), trace)


def _penalized(prog, s, sp, rho, hinge):
    groups = np.linalg.norm(s, axis=1).sum() + np.linalg.norm(sp, axis=1).sum()
    return _smooth_value(prog, s, sp, rho, hinge) + prog.beta * float(groups)


def _fista_stage(prog, s0, sp0, rho, cfg, stage, lip0=1.0):
    """One FISTA pass at fixed rho with backtracking and function restarts.

    Restarts compare the *penalized* objective (smooth part + group lasso): a
    plain proximal step from the last accepted point cannot increase it, so a
    restarted iteration always makes progress.
    """
    s = s0.copy()
    sp = sp0.copy()
    ys, ysp = s.copy(), sp.copy()
    t = 1.0
    lip = lip0
    rows = []
    f_prev = _penalized(prog, s, sp, rho, cfg.hinge)
    stall = 0
    restarted = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        gval, gs, gsp = _smooth_value_grad(prog, ys, ysp, rho, cfg.hinge)
        while True:
            cand_s = _group_prox(ys - gs / lip, prog.beta / lip)
            cand_sp = _group_prox(ysp - gsp / lip, prog.beta / lip)
            cval = _smooth_value(prog, cand_s, cand_sp, rho, cfg.hinge)
            ds, dsp = cand_s - ys, cand_sp - ysp
            quad = gval + float(np.sum(gs * ds)) + float(np.sum(gsp * dsp)) \
                + 0.5 * lip * (float(np.sum(ds ** 2)) + float(np.sum(dsp ** 2)))
            if cval <= quad + 1e-12 * (1.0 + abs(quad)) or lip > 1e32:
                break
            lip /= cfg.backtrack  # raise lip: shrink the step
        f_cand = cval + prog.beta * float(np.linalg.norm(cand_s, axis=1).sum()
                                          + np.linalg.norm(cand_sp, axis=1).sum())
        if not np.isfinite(f_cand):
            raise DivergenceError("FISTA produced non-finite objective", last_state=rows)
        if f_cand > f_prev + 1e-12 * (1.0 + abs(f_prev)) and not restarted:
            # momentum overshoot: retry as a plain prox step from (s, sp)
            t = 1.0
            ys, ysp = s.copy(), sp.copy()
            restarted = True
            continue
        restarted = False
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        ys = cand_s + ((t - 1.0) / t_next) * (cand_s - s)
        ysp = cand_sp + ((t - 1.0) / t_next) * (cand_sp - sp)
        s, sp, t = cand_s, cand_sp, t_next
        rows.append({"stage": stage, "rho": rho, "iter": it,
                     "objective": _true_objective(prog, s, sp),
                     "violation": _max_violation(prog, s, sp)})
        if abs(f_prev - f_cand) <= cfg.inner_tol * (1.0 + abs(f_cand)):
            stall += 1
            if stall >= 5:
                f_prev = f_cand
                break
        else:
            stall = 0
        f_prev = f_cand
        lip = max(lip * 0.9, 1e-12)  # let the step grow back
    return s, sp, rows, lip


def convex_objective(prog, sol):
    """(fit + group-lasso objective, max cone violation) of a solution."""
    return (_true_objective(prog, sol.s, sol.s_prime),
            _max_violation(prog, sol.s, sol.s_prime))


def residual_dual_vector(prog, sol):
    """The natural dual candidate v = y - y_hat at a primal solution."""
    return -_fit_residual(prog, sol.s, sol.s_prime)


def recover_network(prog, sol, svd=None, violation_tolerance=1e-6,
                    active_rtol=1e-8):
    """Map nonzero blocks to hidden units of the matching non-convex model.

    Block s_i with norm t contributes a unit with hidden weights
    ``V S^-1 s_{1:r}``, BN scale ``||s_{1:r}||/sqrt(t)``, shift
    ``s_{r+1}/sqrt(t)`` and output weight ``+sqrt(t)`` (``-sqrt(t)`` for the
    primed block). Blocks below ``active_rtol`` of the largest block norm are
    treated as solver dust and skipped. Refuses solutions whose cone
    violation exceeds the tolerance, since the objective identity only holds
    on the feasible set.
    """
    viol = _max_violation(prog, sol.s, sol.s_prime)
    if viol > violation_tolerance:
        raise InfeasibleSolutionError(
            f"solution violates cone constraints by {viol:.3e} "
            f"(tolerance {violation_tolerance:.3e}); not recovering")
    if svd is None:
        svd = prog.meta.get("svd")
    s_list, sp_list = sol.blocks(prog)
    biggest = max([np.linalg.norm(v) for v in s_list + sp_list], default=0.0)
    floor = active_rtol * biggest
    ws, gammas, alphas, w2s = [], [], [], []

    def add_unit(vec, sign, block_svd):
        t = float(np.linalg.norm(vec))
        if t <= floor or t <= 0.0:
            return
        lead, last = vec[:-1], vec[-1]
        w = block_svd.v @ (lead / block_svd.sigma)
        ws.append(w)
        gammas.append(np.linalg.norm(lead) / np.sqrt(t))
        alphas.append(last / np.sqrt(t))
        w2s.append(sign * np.sqrt(t))

    if prog.variant == "post_bn":
        for i, (si, spi) in enumerate(zip(s_list, sp_list)):
            bsvd = prog.meta["block_svds"][i]
            add_unit(si, +1.0, bsvd)
            add_unit(spi, -1.0, bsvd)
        arch = "fc_post_bn"
        fan_in = prog.meta["block_svds"][0].v.shape[0]
    else:
        for si, spi in zip(s_list, sp_list):
            add_unit(si, +1.0, svd)
            add_unit(spi, -1.0, svd)
        arch = "fc_pre_bn" if prog.variant == "fc_scalar" else "cnn"
        fan_in = svd.v.shape[0]

    if ws:
        w = np.column_stack(ws)
        hidden = BnLayerParams(w, np.array(gammas), np.array(alphas))
        w2 = np.array(w2s)[:, None]
    else:
        hidden = BnLayerParams(np.zeros((fan_in, 0)), np.zeros(0), np.zeros(0))
        w2 = np.zeros((0, 1))
    return BnNetwork(hidden, w2, arch)


def _builder_for(variant):
    return {"fc_scalar": build_fc_program, "cnn": build_cnn_program,
            "post_bn": build_postbn_program}[variant]


def dual_certificate(v, x, y, beta, arr, variant="fc_scalar"):
    """Evaluate the dual objective and per-arrangement constraint excess.

    For every arrangement and both signs the constrained norm
    ``min_{rho >= 0} || +-v^T F_i + rho^T K_i ||`` is computed exactly with a
    non-negative least-squares solve; the certificate's excess is the largest
    amount by which any such norm exceeds beta (0 when v is feasible). The
    dual objective is ``-0.5 ||v - y||^2 + 0.5 ||y||^2``; it lower-bounds the
    primal optimum when the excess is 0 and the arrangement set is exhaustive.
    """
    prog = _builder_for(variant)(x, y, beta, arr)
    v = as_vector(v, "v")
    if v.shape[0] != prog.y.shape[0]:
        raise DimensionError("v length must match y")
    excess = 0.0
    for i in range(prog.n_blocks):
        d = prog.dims[i]
        f = prog.design[i, :, :d]
        k = prog.cones[i, :, :d]
        a = f.T @ v
        for side in (a, -a):
            _, rnorm = nnls(k.T, -side)
            excess = max(excess, rnorm - beta)
    dual_obj = -0.5 * float(np.sum((v - prog.y) ** 2)) + 0.5 * float(prog.y @ prog.y)
    return DualCertificate(v, dual_obj, max(0.0, excess), arr.exhaustive)


def feasibility_scaled(v, beta, excess):
    """Shrink v so the (positively homogeneous) constraint norms fit under beta."""
    if excess <= 0.0:
        return np.asarray(v, dtype=np.float64)
    return np.asarray(v, dtype=np.float64) * (beta / (beta + excess))


def vector_dual_constraint_estimate(v_mat, x, count=2000, seed=0):
    """Sampled lower bound of ``max_{||s||=1} || V^T ReLU(U' s) ||``.

    Spot check for vector-output dual certificates; the constrained
    nuclear-norm primal itself is out of scope.
    """
    v_mat = as_matrix(v_mat, "v_mat")
    wb, _ = whitened_basis(x)
    rng = np.random.Generator(np.random.Philox(key=int(seed) % 2**64))
    dirs = rng.standard_normal((count, wb.u_prime.shape[1]))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    acts = np.maximum(wb.u_prime @ dirs.T, 0.0)  # n x count
    vals = np.linalg.norm(v_mat.T @ acts, axis=0)
    return float(vals.max())


def program_to_dict(prog):
    def pack(t):
        return {"shape": list(t.shape), "data": t.reshape(-1).tolist()}
    return {"schema": "bnconvex-program-v1", "variant": prog.variant,
            "beta": prog.beta, "dims": prog.dims.tolist(),
            "design": pack(prog.design), "cones": pack(prog.cones),
            "y": prog.y.tolist()}


def solution_to_dict(sol):
    def pack(t):
        return {"shape": list(t.shape), "data": t.reshape(-1).tolist()}
    return {"schema": "bnconvex-solution-v1", "s": pack(sol.s),
            "s_prime": pack(sol.s_prime), "objective": sol.objective,
            "max_violation": sol.max_violation}


def save_program(prog, path):
    with open(path, "w") as fh:
        json.dump(program_to_dict(prog), fh)


def save_solution(sol, path):
    with open(path, "w") as fh:
        json.dump(solution_to_dict(sol), fh)


def write_trace_csv(trace, path):
    """Solver trace as CSV: iteration, objective, violation, rho."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "rho", "iter", "objective", "violation", "warning"])
        for row in trace:
            writer.writerow([row.get("stage"), repr(float(row.get("rho", 0.0))),
                             row.get("iter"),
                             repr(float(row.get("objective", float("nan")))),
                             repr(float(row.get("violation", float("nan")))),
                             row.get("warning", "")])
