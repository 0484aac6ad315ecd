"""Figure rendering for the rate report.

Renders the monotonicity picture behind the size bounds to PNG files next
to the delimited output: the rate I(m, alpha) rising in m, the shrink
factor J(s) falling to its limit, and the exact tuple fractions sitting
under their analytic bounds.
"""

from __future__ import annotations

import math
import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .rates import rate_J, rate_J_limit

FIGURE_DPI = 150


def _group_rows(rows: Sequence[dict]) -> dict[str, list[dict]]:
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["alpha"], []).append(row)
    for alpha_rows in grouped.values():
        alpha_rows.sort(key=lambda r: r["m"])
    return grouped


def render_rate_curves(rows: Sequence[dict], path: str) -> str:
    """I(m, alpha) against m, one line per alpha."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for alpha, alpha_rows in sorted(_group_rows(rows).items()):
        ax.plot(
            [r["m"] for r in alpha_rows],
            [r["I"] for r in alpha_rows],
            marker="o",
            markersize=3,
            label=f"alpha = {alpha}",
        )
    ax.set_xlabel("m")
    ax.set_ylabel("I(m, alpha)")
    ax.set_title("Large-deviation rate (increasing in m)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def render_shrink_curve(path: str, s_max: int = 64) -> str:
    """J(s) against s with the s -> infinity limit as an asymptote."""
    ss = list(range(2, s_max + 1))
    values = [rate_J(s).value for s in ss]
    limit = rate_J_limit().value
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ss, values, marker="o", markersize=3, label="J(s)")
    ax.axhline(limit, linestyle="--", color="gray", label=f"limit = {limit:.4f}")
    ax.set_xlabel("s")
    ax.set_ylabel("J(s)")
    ax.set_ylim(limit - 0.01, 1.0)
    ax.set_title("Per-coordinate shrink factor (decreasing, below 1)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def render_count_certification(rows: Sequence[dict], path: str) -> str:
    """Exact fractions against exp(-I n) and the Hoeffding comparator."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for alpha, alpha_rows in sorted(_group_rows(rows).items()):
        ms = [r["m"] for r in alpha_rows]
        n = alpha_rows[0]["n"]
        ax.plot(ms, [r["fraction"] for r in alpha_rows], marker="o", markersize=3,
                label=f"exact fraction, alpha = {alpha}")
        ax.plot(ms, [math.exp(-r["I"] * n) for r in alpha_rows], linestyle="--",
                label=f"exp(-I n), alpha = {alpha}")
        ax.plot(ms, [r["hoeffding_bound"] for r in alpha_rows], linestyle=":",
                label=f"Hoeffding, alpha = {alpha}")
    ax.set_xlabel("m")
    ax.set_ylabel("fraction / bound")
    ax.set_yscale("log")
    ax.set_title("Exact counts under their analytic bounds")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def render_rate_report(rows: Sequence[dict], directory: str) -> list[str]:
    """All report figures into a directory; returns the file paths."""
    os.makedirs(directory, exist_ok=True)
    return [
        render_rate_curves(rows, os.path.join(directory, "rate_curves.png")),
        render_shrink_curve(os.path.join(directory, "shrink_factor.png")),
        render_count_certification(rows, os.path.join(directory, "count_certification.png")),
    ]
