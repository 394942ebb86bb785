"""Static gap charts for certification sweeps."""

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from diamondnet.models import ADDITIVE_GAP_BOUND, MULTIPLICATIVE_RATIO_BOUND  # noqa: E402

logger = logging.getLogger(__name__)


class GapChartGenerator:
    """Draws worst-case gaps over the (g, h) grid of a sweep table."""

    def __init__(self, table: pd.DataFrame):
        self.table = table

    def plot_gap_maps(
        self,
        output_file: Path,
        title: Optional[str] = None,
        figsize: tuple[float, float] = (11.0, 4.5),
    ) -> Optional[Path]:
        """
        Plot the additive gap and multiplicative ratio, each maximized over N.

        Args:
            output_file: SVG path to write
            title: Optional figure title
            figsize: Figure size in inches

        Returns:
            The written path, or None for an empty table
        """
        if self.table.empty:
            logger.warning("Empty sweep table, skipping chart")
            return None

        logger.info(f"Plotting gap maps to {output_file}")
        fig, axes = plt.subplots(1, 2, figsize=figsize, constrained_layout=True)
        panels = [
            ("additive_gap", "Additive gap (bits)", ADDITIVE_GAP_BOUND),
            ("mult_ratio", "Multiplicative ratio", MULTIPLICATIVE_RATIO_BOUND),
        ]
        for ax, (column, label, bound) in zip(axes, panels):
            log_g, log_h, worst = self._worst_over_n(column)
            mesh = ax.pcolormesh(log_g, log_h, worst, shading="nearest", cmap="viridis")
            cbar = fig.colorbar(mesh, ax=ax)
            cbar.set_label(label)
            cbar.ax.axhline(bound, color="red", linewidth=1.0)
            ax.set_xlabel("log10 g")
            ax.set_ylabel("log10 h")
            ax.set_title(f"{label}, max over N (certified bound {bound:.4f})")

        fig.suptitle(title or f"Gap certificates over {self.table['n'].nunique()} relay counts")
        output_file.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(output_file, format="svg")
        plt.close(fig)

        logger.info(f"Saved chart to {output_file}")
        return output_file

    def _worst_over_n(self, column: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pivot = self.table.groupby(["h", "g"])[column].max().unstack("g")
        log_g = np.log10(pivot.columns.to_numpy(dtype=float))
        log_h = np.log10(pivot.index.to_numpy(dtype=float))
        return log_g, log_h, pivot.to_numpy(dtype=float)
