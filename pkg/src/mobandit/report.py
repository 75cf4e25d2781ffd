"""Figure rendering for experiment results.

Kept separate from the experiment runner so batch runs stay import-light;
the command-line layer pulls this module in only when a figure was asked
for.  Uses the non-interactive Agg backend and writes files, never windows.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import RegretCurve

__all__ = ["render_regret_curves"]

_POLICY_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def render_regret_curves(
    curves: Sequence[RegretCurve],
    path: str | Path,
    *,
    title: str | None = None,
) -> Path:
    """Plot cumulative-regret trajectories for each policy into one PNG.

    Per-repetition curves are drawn as thin translucent lines and the
    repetition mean as a thick labeled line, one color per policy.  Returns
    the written path.
    """
    if len(curves) == 0:
        raise ValueError("at least one regret curve is required")
    target = Path(path)
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    try:
        for i, curve in enumerate(curves):
            color = _POLICY_COLORS[i % len(_POLICY_COLORS)]
            episodes = np.arange(1, curve.horizon + 1)
            for row in curve.per_repetition:
                ax.plot(episodes, row, color=color, alpha=0.2, linewidth=0.7)
            ax.plot(
                episodes,
                curve.mean_curve(),
                color=color,
                linewidth=2.2,
                label=curve.policy,
            )
        ax.set_xlabel("episode")
        ax.set_ylabel("cumulative regret")
        ax.grid(alpha=0.3)
        ax.legend(loc="upper left")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        try:
            fig.savefig(target, dpi=150)
        except OSError as exc:
            raise OSError(f"cannot write figure {target}: {exc}") from exc
    finally:
        plt.close(fig)
    return target
