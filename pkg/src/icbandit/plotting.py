"""Static pseudo-regret plots with shaded confidence bands."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import SummaryRow

LOG_FLOOR = 1e-3  # semilog plots floor values here so zeros stay drawable


def plot_summary(rows: list[SummaryRow], out_path, style: str = "semilog", title: str | None = None) -> Path:
    """One curve per policy, mean plus shaded 95% band, written as vector graphics.

    style 'semilog' log-scales the regret axis (values floored at LOG_FLOOR);
    'linear' leaves both axes linear. The output format follows the file
    suffix (.svg or .pdf recommended).
    """
    if not rows:
        raise ValueError("nothing to plot: empty summary")
    if style not in ("semilog", "linear"):
        raise ValueError("style must be 'semilog' or 'linear'")
    series: dict[str, list[SummaryRow]] = {}
    for row in rows:
        series.setdefault(row.policy, []).append(row)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for policy, policy_rows in sorted(series.items()):
        policy_rows.sort(key=lambda r: r.t)
        t = [r.t for r in policy_rows]
        mean = [r.mean_cum_pseudo_regret for r in policy_rows]
        low = [m - r.ci95_half_width for m, r in zip(mean, policy_rows)]
        high = [m + r.ci95_half_width for m, r in zip(mean, policy_rows)]
        if style == "semilog":
            mean = [max(v, LOG_FLOOR) for v in mean]
            low = [max(v, LOG_FLOOR) for v in low]
            high = [max(v, LOG_FLOOR) for v in high]
        ax.plot(t, mean, label=policy)
        ax.fill_between(t, low, high, alpha=0.2)
    if style == "semilog":
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative pseudo-regret")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
