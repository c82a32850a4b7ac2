"""Figure rendering for benchmark reports.

Renders the per-method MSE and timing curves of a benchmark run to an image
file next to the CSV output.  matplotlib is imported lazily with the Agg
backend so headless runs and library users that never plot pay nothing.
"""
from __future__ import annotations

from .bench import summarize

__all__ = ["render_benchmark_figure"]

_METHOD_COLORS = {
    "mc": "tab:blue",
    "cvlow": "tab:orange",
    "cvup": "tab:red",
    "cvnn": "tab:green",
    "shcv": "tab:purple",
    "qmc": "tab:brown",
    "rqmc": "tab:pink",
}


def render_benchmark_figure(rows, path, title: str = "") -> None:
    """Plot MSE and mean wall time against the direction count, log-log.

    ``rows`` are BenchmarkRow records (or anything :func:`summarize`
    accepts); the figure is written to ``path``.
    """
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    cells = summarize(rows)
    methods = sorted({c["method"] for c in cells})

    fig, (ax_mse, ax_time) = plt.subplots(1, 2, figsize=(9.6, 4.0))
    for method in methods:
        pts = sorted((c["n"], c["mse"], c["mean_time_ms"]) for c in cells if c["method"] == method)
        ns = [p[0] for p in pts]
        color = _METHOD_COLORS.get(method)
        ax_mse.loglog(ns, [p[1] for p in pts], "o-", label=method, color=color)
        ax_time.loglog(ns, [max(p[2], 1e-6) for p in pts], "o-", label=method, color=color)
    ax_mse.set_xlabel("number of directions n")
    ax_mse.set_ylabel("MSE")
    ax_mse.grid(True, which="both", alpha=0.3)
    ax_time.set_xlabel("number of directions n")
    ax_time.set_ylabel("mean wall time (ms)")
    ax_time.grid(True, which="both", alpha=0.3)
    ax_mse.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
