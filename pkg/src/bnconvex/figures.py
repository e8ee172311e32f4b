"""Figure rendering for the CLI report path.

Every figure is drawn from an already-written CSV so the plots never
introduce state of their own; PNGs land next to the delimited files.
"""

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in body:
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                cols[name].append(None)
    return header, cols


def render_curves_figure(csv_path, png_path, x_col=None, logy=True):
    """Line plot of every numeric column against the first (or named) column."""
    header, cols = _read_csv(csv_path)
    x_name = x_col or header[0]
    x = cols[x_name]
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in header:
        if name == x_name:
            continue
        series = cols[name]
        pts = [(xi, yi) for xi, yi in zip(x, series) if xi is not None and yi is not None]
        if not pts:
            continue
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
    if logy:
        vals = [v for name in header if name != x_name for v in cols[name] if v is not None]
        if vals and min(vals) > 0:
            ax.set_yscale("log")
    ax.set_xlabel(x_name)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def render_trace_figure(csv_path, png_path):
    """Solver trace: objective and cone violation over iterations."""
    _, cols = _read_csv(csv_path)
    obj = [v for v in cols.get("objective", []) if v is not None]
    viol = [v for v in cols.get("violation", []) if v is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(obj, color="tab:blue", label="objective")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective", color="tab:blue")
    ax2 = ax.twinx()
    pos = [max(v, 1e-18) for v in viol]
    ax2.plot(pos, color="tab:red", alpha=0.7, label="violation")
    ax2.set_yscale("log")
    ax2.set_ylabel("violation", color="tab:red")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def render_similarity_figure(csv_path, png_path):
    """Per-direction cosine similarity against direction index."""
    _, cols = _read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [n for n in cols if n.startswith("cosine")]
    for name in names:
        series = cols[name]
        idx = [i for i, v in enumerate(series) if v is not None]
        ax.plot(idx, [series[i] for i in idx], marker="o", ms=3, label=name)
    ax.set_xlabel("singular direction (descending sigma)")
    ax.set_ylabel("cosine vs init")
    ax.set_ylim(-1.05, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
