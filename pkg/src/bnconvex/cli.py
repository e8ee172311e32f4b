"""Command-line harness: data ingestion, experiment orchestration, reports.

Subcommands: ``fit-gd``, ``fit-convex``, ``closed-form``, ``probe``,
``truncate-study``. Every run writes a manifest (JSON), numeric artifacts as
CSV/JSON, and matplotlib figures rendered from the CSVs (suppress with
``--no-figures``). For a fixed config and seed the CSV artifacts are
byte-identical across runs; wall-clock time lives only in the manifest.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .arrangements import enumerate_arrangements, sample_arrangements
from .closed_forms import (closed_form_postbn, closed_form_scalar,
                           closed_form_vector_onehot)
from .convex import (SolverConfig, build_cnn_program, build_fc_program,
                     build_postbn_program, convex_objective, dual_certificate,
                     feasibility_scaled, recover_network, residual_dual_vector,
                     solve_penalty, write_trace_csv)
from .errors import CapacityError, DimensionError, NumericalError
from .figures import (render_curves_figure, render_similarity_figure,
                      render_trace_figure)
from .linalg import CompactSvd, center, compact_svd, whitened_basis
from .networks import (TrainConfig, init_network, make_rng,
                       network_to_dict, predict_with_stats, scaled_objective,
                       squared_loss, train_gd)
from .probes import (TruncationSpec, direction_trend, gradient_identity_probe,
                     singular_direction_similarity, truncate_data)

ENV_OUT_DIR = "BNCONVEX_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Bad configuration, flags, or input files."""


class CsvParseError(ConfigError):
    """Malformed CSV input; message carries the row/column location."""


class Dataset:
    def __init__(self, x, y, feature_names, label_names, one_hot,
                 train_idx=None, test_idx=None):
        self.x = x
        self.y = y
        self.feature_names = feature_names
        self.label_names = label_names
        self.one_hot = one_hot
        n = x.shape[0]
        self.train_idx = np.arange(n) if train_idx is None else train_idx
        self.test_idx = np.arange(0) if test_idx is None else test_idx

    @property
    def x_train(self):
        return self.x[self.train_idx]

    @property
    def y_train(self):
        return self.y[self.train_idx]

    @property
    def x_test(self):
        return self.x[self.test_idx] if self.test_idx.size else None

    @property
    def y_test(self):
        return self.y[self.test_idx] if self.test_idx.size else None


def load_csv(path, label_columns, one_hot=False):
    """Load a rectangular numeric CSV with a header row.

    ``label_columns`` are moved into Y (one-hot encodes a single integer
    column when requested); everything else becomes X. Parse failures raise
    ``CsvParseError`` with the offending row/column.
    """
    if not os.path.exists(path):
        raise ConfigError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    for j, name in enumerate(header):
        try:
            float(name)
        except ValueError:
            continue
        raise CsvParseError(f"{path}: missing header row (column {j} is numeric)")
    if isinstance(label_columns, str):
        label_columns = [label_columns]
    unknown = [c for c in label_columns if c not in header]
    if unknown:
        raise CsvParseError(f"{path}: unknown label column(s) {unknown}; "
                            f"header is {header}")
    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise CsvParseError(f"{path}: row {i} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                data[i - 2, j] = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"{path}: non-numeric cell at row {i}, column {header[j]!r}: {cell!r}")
    if data.shape[0] == 0:
        raise CsvParseError(f"{path}: no data rows")
    label_idx = [header.index(c) for c in label_columns]
    feat_idx = [j for j in range(width) if j not in label_idx]
    if not feat_idx:
        raise CsvParseError(f"{path}: no feature columns left")
    x = np.ascontiguousarray(data[:, feat_idx])
    y = np.ascontiguousarray(data[:, label_idx])
    label_names = list(label_columns)
    if one_hot:
        if y.shape[1] != 1:
            raise ConfigError("one-hot encoding expects a single label column")
        raw = y[:, 0]
        if np.any(np.abs(raw - np.round(raw)) > 1e-9):
            raise CsvParseError(f"{path}: one-hot label column must be integral")
        classes = np.unique(np.round(raw).astype(int))
        y = (np.round(raw).astype(int)[:, None] == classes[None, :]).astype(float)
        label_names = [f"{label_columns[0]}={c}" for c in classes]
    return Dataset(x, y, [header[j] for j in feat_idx], label_names, one_hot)


def make_split(n, test_fraction, seed):
    """Seeded train/test index split; test_fraction 0 keeps everything."""
    if not 0.0 <= test_fraction < 1.0:
        raise ConfigError("test fraction must be in [0, 1)")
    if test_fraction == 0.0:
        return np.arange(n), np.arange(0)
    rng = make_rng(seed)
    perm = rng.permutation(n)
    n_test = max(1, int(round(test_fraction * n)))
    if n_test >= n:
        raise ConfigError("test fraction leaves no training rows")
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _fmt(x):
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else (_fmt(v) if isinstance(v, float) else v)
                             for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)


class ExperimentConfig:
    """Resolved experiment settings for `run_experiment`.

    Mode-specific fields are validated by the mode runner; unknown modes are
    rejected here.
    """

    MODES = ("fit-gd", "fit-convex", "closed-form", "probe", "truncate-study")

    def __init__(self, mode, out_dir, seed=0, figures=True, **fields):
        if mode not in self.MODES:
            raise ConfigError(f"unknown mode {mode!r}; expected one of {self.MODES}")
        self.mode = mode
        self.out_dir = out_dir
        self.seed = int(seed)
        self.figures = bool(figures)
        self.fields = fields

    def get(self, key, default=None):
        return self.fields.get(key, default)

    def to_dict(self):
        out = {"mode": self.mode, "seed": self.seed, "figures": self.figures}
        out.update({k: v for k, v in sorted(self.fields.items())})
        return out


def _train_config(cfg):
    return TrainConfig(beta=cfg.get("beta", 1e-3), lr=cfg.get("lr", 1e-2),
                       epochs=cfg.get("epochs", 100),
                       batch_size=cfg.get("batch_size"), seed=cfg.seed,
                       bn_momentum=cfg.get("bn_momentum"),
                       momentum=cfg.get("momentum", 0.0),
                       regularize_hidden=cfg.get("regularize_hidden", False))


def _extract_patches(x, patch_size, patch_stride):
    d = x.shape[1]
    if patch_size < 1 or patch_size > d:
        raise ConfigError(f"patch size must be in [1, {d}]")
    stride = patch_stride or patch_size
    starts = range(0, d - patch_size + 1, stride)
    patches = [np.ascontiguousarray(x[:, s:s + patch_size]) for s in starts]
    if not patches:
        raise ConfigError("no patches produced; lower the patch size or stride")
    return patches


def _scalar_targets(data, which="train"):
    y = data.y_train if which == "train" else data.y_test
    if y is None or y.shape[1] != 1:
        raise ConfigError("this mode needs a single (scalar) label column")
    return y[:, 0]


def _curve_rows(log):
    rows = []
    for e in range(len(log.objective)):
        row = [e, float(log.objective[e]), float(log.train_loss[e])]
        if log.test_loss is not None:
            row.append(float(log.test_loss[e]))
        rows.append(row)
    return rows


def _run_fit_gd(cfg, data, out):
    arch = cfg.get("arch", "fc_pre_bn")
    width = int(cfg.get("width", 16))
    tc = _train_config(cfg)
    x_train = data.x_train
    if arch == "cnn":
        x_train = _extract_patches(x_train, int(cfg.get("patch_size", 3)),
                                   cfg.get("patch_stride"))
        fan_in = x_train[0].shape[1]
    else:
        fan_in = x_train.shape[1]
    net = init_network(arch, fan_in, width, data.y.shape[1], make_rng(cfg.seed))
    x_test = data.x_test
    if arch == "cnn" and x_test is not None:
        x_test = _extract_patches(x_test, int(cfg.get("patch_size", 3)),
                                  cfg.get("patch_stride"))
    log = train_gd(net, x_train, data.y_train, tc, x_test, data.y_test)
    header = ["epoch", "objective", "train_loss"] + (
        ["test_loss"] if log.test_loss is not None else [])
    write_csv(os.path.join(out, "curves.csv"), header, _curve_rows(log))
    with open(os.path.join(out, "model.json"), "w") as fh:
        json.dump(network_to_dict(log.network), fh, sort_keys=True)
    summary = {
        "final_objective": float(log.objective[-1]) if len(log.objective) else None,
        "final_train_loss": float(log.train_loss[-1]) if len(log.train_loss) else None,
        "reinit_events": log.reinit_events,
    }
    if data.x_test is not None:
        pred = predict_with_stats(log.network, x_test, log.running_mean,
                                  log.running_std, log.n_train)
        summary["test_loss_inference"] = squared_loss(pred, data.y_test)
    if cfg.figures:
        render_curves_figure(os.path.join(out, "curves.csv"),
                             os.path.join(out, "curves.png"))
    return summary


def _build_arrangements(cfg, effective):
    strategy = cfg.get("arrangements", "sample")
    if strategy == "exact":
        return enumerate_arrangements(effective)
    if strategy == "sample":
        return sample_arrangements(effective, int(cfg.get("sample_count", 500)), cfg.seed)
    raise ConfigError(f"unknown arrangement strategy {strategy!r}")


def _run_fit_convex(cfg, data, out):
    variant = cfg.get("variant", "fc")
    beta = float(cfg.get("beta", 1e-3))
    y = _scalar_targets(data)
    x = data.x_train
    if variant == "fc":
        wb, _ = whitened_basis(x)
        arr = _build_arrangements(cfg, wb.u_prime)
        prog = build_fc_program(x, y, beta, arr)
        cert_args = (x, y, beta, arr, "fc_scalar")
    elif variant == "cnn":
        patches = _extract_patches(x, int(cfg.get("patch_size", 3)),
                                   cfg.get("patch_stride"))
        wb, _ = whitened_basis(np.vstack(patches))
        arr = _build_arrangements(cfg, wb.u_prime)
        prog = build_cnn_program(patches, y, beta, arr)
        cert_args = (patches, y, beta, arr, "cnn")
    elif variant == "post-bn":
        arr = _build_arrangements(cfg, x)
        prog = build_postbn_program(x, y, beta, arr)
        cert_args = (x, y, beta, arr, "post_bn")
    else:
        raise ConfigError(f"unknown convex variant {variant!r}")

    solver = SolverConfig(max_iters=int(cfg.get("max_iters", 4000)),
                          tolerance=float(cfg.get("tolerance", 1e-6)),
                          hinge=cfg.get("hinge", "squared"))
    sol = solve_penalty(prog, solver)
    write_trace_csv(sol.trace, os.path.join(out, "trace.csv"))
    obj, viol = convex_objective(prog, sol)

    summary = {"convex_objective": obj, "max_violation": viol,
               "arrangements": len(arr), "exhaustive": arr.exhaustive,
               "beta": beta, "variant": variant}
    try:
        net = recover_network(prog, sol,
                              violation_tolerance=max(10 * viol, solver.tolerance))
        rec_obj = scaled_objective(
            net, x if variant != "cnn" else _extract_patches(
                x, int(cfg.get("patch_size", 3)), cfg.get("patch_stride")),
            y, beta)
        summary["recovered_objective"] = rec_obj
        summary["recovery_gap"] = abs(rec_obj - obj) / (1.0 + abs(obj))
        summary["m_star"] = net.width
        with open(os.path.join(out, "model.json"), "w") as fh:
            json.dump(network_to_dict(net), fh, sort_keys=True)
    except NumericalError as exc:
        summary["recovery_error"] = str(exc)

    v_hat = residual_dual_vector(prog, sol)
    cert = dual_certificate(v_hat, *cert_args)
    if cert.max_constraint_excess > 0:
        v_hat = feasibility_scaled(v_hat, beta, cert.max_constraint_excess)
        cert = dual_certificate(v_hat, *cert_args)
    summary["dual_objective"] = cert.dual_objective
    summary["dual_excess"] = cert.max_constraint_excess
    summary["duality_gap_relative"] = (obj - cert.dual_objective) / (
        1.0 + abs(cert.dual_objective))
    summary["dual_is_lower_bound"] = bool(cert.exhaustive
                                          and cert.max_constraint_excess == 0.0)
    if cfg.figures:
        render_trace_figure(os.path.join(out, "trace.csv"),
                            os.path.join(out, "trace.png"))
    return summary


def _run_closed_form(cfg, data, out):
    variant = cfg.get("variant", "scalar")
    beta = float(cfg.get("beta", 1e-3))
    x = data.x_train
    t0 = time.perf_counter()
    if variant == "scalar":
        res = closed_form_scalar(x, _scalar_targets(data), beta)
    elif variant == "vector":
        if data.y.shape[1] < 2 and not data.one_hot:
            raise ConfigError("vector closed form expects one-hot labels "
                              "(use --one-hot)")
        res = closed_form_vector_onehot(x, data.y_train, beta)
    elif variant == "post-bn":
        res = closed_form_postbn(x, _scalar_targets(data), beta)
    else:
        raise ConfigError(f"unknown closed-form variant {variant!r}")
    elapsed_ms = 1000.0 * (time.perf_counter() - t0)
    with open(os.path.join(out, "model.json"), "w") as fh:
        json.dump(network_to_dict(res.network), fh, sort_keys=True)
    return {"primal_objective": res.primal_objective,
            "dual_objective": res.dual_objective,
            "duality_gap": res.duality_gap,
            "duality_gap_relative": res.duality_gap / (1.0 + abs(res.dual_objective)),
            "regime": res.regime_case,
            "active_units": res.network.width,
            "closed_form_ms": elapsed_ms,
            "beta": beta, "variant": variant}


def _run_probe(cfg, data, out):
    width = int(cfg.get("width", 8))
    x = data.x_train
    y = data.y_train
    net = init_network("fc_pre_bn", x.shape[1], width, y.shape[1], make_rng(cfg.seed))
    report = gradient_identity_probe(x, y, net, seed=cfg.seed)
    rows = [[j, None if not np.isfinite(report.per_unit_rel_error[j])
             else float(report.per_unit_rel_error[j]),
             int(j in report.skipped_units)] for j in range(width)]
    write_csv(os.path.join(out, "probe.csv"),
              ["unit", "rel_error", "skipped"], rows)

    # track singular-direction drift of the two aligned models under GD
    tc = _train_config(cfg)
    svd = compact_svd(center(x))
    log_bn = train_gd(net, x, y, tc)
    sim_bn = singular_direction_similarity(log_bn.network.hidden.w, net.hidden.w, svd)

    q0 = svd.sigma[:, None] * (svd.v.T @ net.hidden.w)
    tw = init_network("whitened", svd.rank, width, y.shape[1], make_rng(cfg.seed))
    tw.hidden.w = q0.copy()
    tw.hidden.gamma = net.hidden.gamma.copy()
    tw.hidden.alpha = net.hidden.alpha.copy()
    tw.w2 = net.w2.copy()
    log_tw = train_gd(tw, svd.u, y, tc)
    eye_svd = CompactSvd(svd.u.copy(), svd.sigma.copy(), np.eye(svd.rank), svd.rank)
    sim_tw = singular_direction_similarity(log_tw.network.hidden.w, q0, eye_svd)

    rows = []
    for i in range(svd.rank):
        rows.append([i, float(svd.sigma[i]),
                     float(sim_bn.cosines[i]) if sim_bn.defined[i] else None,
                     float(sim_tw.cosines[i]) if sim_tw.defined[i] else None])
    write_csv(os.path.join(out, "similarity.csv"),
              ["direction", "sigma", "cosine_bn", "cosine_whitened"], rows)
    if cfg.figures:
        render_similarity_figure(os.path.join(out, "similarity.csv"),
                                 os.path.join(out, "similarity.png"))
    return {"max_rel_error": report.max_rel_error,
            "gamma_exact": report.gamma_exact,
            "alpha_exact": report.alpha_exact,
            "w2_exact": report.w2_exact,
            "forward_gap": report.forward_gap,
            "skipped_units": report.skipped_units,
            "trend_bn": direction_trend(sim_bn),
            "trend_whitened": direction_trend(sim_tw)}


def _run_truncate_study(cfg, data, out):
    spec = TruncationSpec(k=cfg.get("k"), variance_target=cfg.get("variance_target"))
    x = data.x_train
    svd = compact_svd(center(x))
    k = spec.resolve_k(svd.sigma)
    tail_energy = float(np.sqrt(np.sum(svd.sigma[k:] ** 2)))
    x_trunc = truncate_data(x, spec)

    width = int(cfg.get("width", 16))
    tc = _train_config(cfg)
    net0 = init_network("fc_pre_bn", x.shape[1], width, data.y.shape[1],
                        make_rng(cfg.seed))
    log_base = train_gd(net0, x, data.y_train, tc)
    log_trunc = train_gd(net0, x_trunc, data.y_train, tc)

    rows = []
    for e in range(len(log_base.objective)):
        rows.append([e, float(log_trunc.objective[e]), float(log_base.objective[e])])
    write_csv(os.path.join(out, "curves.csv"),
              ["epoch", "objective_truncated", "objective_baseline"], rows)
    summary = {"k": int(k), "rank": int(svd.rank), "tail_energy": tail_energy,
               "final_objective_truncated": float(log_trunc.objective[-1]),
               "final_objective_baseline": float(log_base.objective[-1])}
    if data.x_test is not None:
        # inference rule: test inputs are not truncated
        for name, log in (("truncated", log_trunc), ("baseline", log_base)):
            pred = predict_with_stats(log.network, data.x_test, log.running_mean,
                                      log.running_std, log.n_train)
            summary[f"test_loss_{name}"] = squared_loss(pred, data.y_test)
    if cfg.figures:
        render_curves_figure(os.path.join(out, "curves.csv"),
                             os.path.join(out, "curves.png"))
    return summary


_RUNNERS = {
    "fit-gd": _run_fit_gd,
    "fit-convex": _run_fit_convex,
    "closed-form": _run_closed_form,
    "probe": _run_probe,
    "truncate-study": _run_truncate_study,
}


def run_experiment(cfg, data):
    """Execute one experiment, writing all artifacts into ``cfg.out_dir``.

    Emits ``manifest.json`` (config, seed, versions, wall-clock) plus the
    mode's CSV/JSON artifacts and figures; returns the summary dict, which is
    also written to ``summary.json``.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    t0 = time.perf_counter()
    summary = _RUNNERS[cfg.mode](cfg, data, cfg.out_dir)
    runtime = time.perf_counter() - t0
    _write_json(os.path.join(cfg.out_dir, "summary.json"), summary)
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "versions": {"bnconvex": __version__,
                     "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "runtime_seconds": runtime,
    }
    _write_json(os.path.join(cfg.out_dir, "manifest.json"), manifest)
    return summary


def _add_common(p):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--labels", required=True, nargs="+",
                   help="label column name(s)")
    p.add_argument("--one-hot", action="store_true",
                   help="one-hot encode a single integer label column")
    p.add_argument("--beta", type=float, default=1e-3, help="weight decay")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help=f"output directory (default ${ENV_OUT_DIR} or ./bnconvex-runs)")
    p.add_argument("--config", default=None,
                   help="JSON file whose fields override the flags")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--test-fraction", type=float, default=0.0)


def _add_train_flags(p):
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--bn-momentum", type=float, default=None)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--regularize-hidden", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bnconvex",
        description="Train BN-ReLU networks the non-convex way, the convex way, "
                    "or in closed form, and probe the implicit regularization of GD.")
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("fit-gd", help="gradient-descent training")
    _add_common(p)
    _add_train_flags(p)
    p.add_argument("--arch", default="fc_pre_bn",
                   choices=["fc_pre_bn", "fc_post_bn", "cnn"])
    p.add_argument("--patch-size", type=int, default=3)
    p.add_argument("--patch-stride", type=int, default=None)

    p = sub.add_parser("fit-convex", help="solve the convex reformulation")
    _add_common(p)
    p.add_argument("--variant", default="fc", choices=["fc", "cnn", "post-bn"])
    p.add_argument("--arrangements", default="sample", choices=["exact", "sample"])
    p.add_argument("--sample-count", type=int, default=500)
    p.add_argument("--max-iters", type=int, default=4000)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--hinge", default="squared", choices=["squared", "linear"])
    p.add_argument("--patch-size", type=int, default=3)
    p.add_argument("--patch-stride", type=int, default=None)

    p = sub.add_parser("closed-form", help="closed-form optimum")
    _add_common(p)
    p.add_argument("--variant", default="scalar",
                   choices=["scalar", "vector", "post-bn"])

    p = sub.add_parser("probe", help="gradient-identity and direction-drift probe")
    _add_common(p)
    _add_train_flags(p)

    p = sub.add_parser("truncate-study", help="train on truncated vs raw data")
    _add_common(p)
    _add_train_flags(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--variance-target", type=float, default=None)
    return parser


def config_from_args(args):
    """Build an ExperimentConfig from parsed flags plus the optional JSON file.

    Fields from ``--config`` override the command-line flags.
    """
    fields = {k: v for k, v in vars(args).items()
              if k not in ("mode", "out", "config", "no_figures", "seed")}
    overrides = {}
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        with open(args.config) as fh:
            try:
                overrides = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad JSON in {args.config}: {exc}")
        if not isinstance(overrides, dict):
            raise ConfigError("config file must hold a JSON object")
    fields.update({k.replace("-", "_"): v for k, v in overrides.items()
                   if k not in ("mode", "out", "seed", "figures")})
    seed = overrides.get("seed", args.seed)
    out_dir = overrides.get("out") or args.out or os.environ.get(ENV_OUT_DIR) \
        or "bnconvex-runs"
    figures = overrides.get("figures", not args.no_figures)
    return ExperimentConfig(args.mode, out_dir, seed=seed, figures=figures, **fields)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        data = load_csv(cfg.get("data"), cfg.get("labels"),
                        one_hot=cfg.get("one_hot", False))
        test_fraction = cfg.get("test_fraction", 0.0) or 0.0
        if test_fraction:
            data.train_idx, data.test_idx = make_split(
                data.x.shape[0], test_fraction, cfg.seed)
        run_experiment(cfg, data)
    except (ConfigError, DimensionError, CapacityError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError, FloatingPointError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
