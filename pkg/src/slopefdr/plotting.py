"""SVG summary charts for simulation reports."""
from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_report(report, q: float, path) -> None:
    """FDR and power against n, one series per (method, delta, sparsity)."""
    series = defaultdict(list)
    for row in report.rows:
        sparsity = f"alpha={row.alpha:g}" if row.alpha is not None else f"k={row.k}"
        series[(row.method, row.delta, sparsity)].append(row)

    plt.rcParams["svg.hashsalt"] = "slopefdr"
    fig, (ax_fdr, ax_pow) = plt.subplots(1, 2, figsize=(11, 4.5))
    for (method, delta, sparsity), rows in sorted(series.items(), key=lambda kv: str(kv[0])):
        rows.sort(key=lambda r: r.n)
        label = f"{method}, delta={delta:g}, {sparsity}"
        ns = [r.n for r in rows]
        ax_fdr.errorbar(ns, [r.fdr for r in rows], yerr=[r.fdr_se for r in rows],
                        marker="o", capsize=3, label=label)
        with_power = [r for r in rows if r.power is not None]
        if with_power:
            ax_pow.errorbar([r.n for r in with_power], [r.power for r in with_power],
                            yerr=[r.power_se for r in with_power], marker="o", capsize=3,
                            label=label)
    ax_fdr.axhline(q, color="grey", linestyle="--", label=f"q = {q:g}")
    ax_fdr.set(xlabel="n", ylabel="FDR", title="False discovery rate")
    ax_pow.set(xlabel="n", ylabel="power", title="Power", ylim=(0, 1.05))
    ax_fdr.legend(fontsize="small")
    if ax_pow.has_data():
        ax_pow.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
