"""PNG renderings of logical error curves (optional add-on to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_curves(curves: dict, path, title: str = "", fits: dict | None = None, p_thr: float | None = None):
    """Log-log p_L against p, one series per label.

    ``curves`` maps a label to rows with ``p``, ``p_L``, ``ci_low`` and
    ``ci_high`` attributes (zero-failure rows are drawn as upper bounds).
    ``fits`` maps the same labels to :class:`FitResult` objects.
    """
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for label, rows in curves.items():
        rows = sorted(rows, key=lambda r: r.p)
        p = np.array([r.p for r in rows])
        y = np.array([r.p_L for r in rows])
        lo = np.array([r.ci_low for r in rows])
        hi = np.array([r.ci_high for r in rows])
        hit = y > 0
        line = ax.errorbar(p[hit], y[hit], yerr=[y[hit] - lo[hit], hi[hit] - y[hit]], marker="o", ms=4,
                           capsize=2, label=str(label), linestyle="none")
        if (~hit).any():
            ax.plot(p[~hit], hi[~hit], marker="v", linestyle="none", color=line[0].get_color())
        if fits and label in fits and hit.sum() >= 2:
            grid = np.geomspace(p[hit].min(), p[hit].max(), 50)
            ax.plot(grid, fits[label].predict(grid), color=line[0].get_color(), lw=1)
    if p_thr is not None:
        ax.axvline(p_thr, color="grey", ls="--", lw=1)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical error rate p_L")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
