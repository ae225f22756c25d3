"""Figure rendering for CLI reports.

matplotlib is imported lazily and forced onto the Agg backend so the core
numerics never pull in a display stack.
"""


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def sweep_figure(xs, series, xlabel, title, path, logx=False):
    """Line plot of one or more result columns against a swept parameter.

    `series` maps column name -> list of values (None marks a failed row,
    drawn as a gap).  Integer gridlines are drawn so quantization is visible.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    finite = []
    for name, ys in series.items():
        pts = [(x, y) for x, y in zip(xs, ys) if y is not None]
        if not pts:
            continue
        px, py = zip(*pts)
        ax.plot(px, py, marker="o", label=name)
        finite.extend(py)
    if finite:
        lo, hi = int(round(min(finite))), int(round(max(finite)))
        for n in range(lo - 1, hi + 2):
            ax.axhline(n, color="0.85", lw=0.8, zorder=0)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("invariant")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def report_figure(names, values, residuals, title, path):
    """Bar chart of verification results with residual annotations."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(names)), 4))
    xs = range(len(names))
    ax.bar(xs, values, color="tab:blue")
    for x, v, r in zip(xs, values, residuals):
        ax.annotate(f"res {r:.1e}", (x, v), textcoords="offset points",
                    xytext=(0, 6), ha="center", fontsize=8)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.axhline(0, color="k", lw=0.8)
    for n in range(int(min(values + [0])) - 1, int(max(values + [0])) + 2):
        ax.axhline(n, color="0.85", lw=0.8, zorder=0)
    ax.set_ylabel("value")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
