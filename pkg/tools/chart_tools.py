"""
Chart tools for the experiment commands.
Renders static SVG charts with byte-stable output for fixed input.
"""

from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from utils.logging_utils import APP_NAME, get_logger  # noqa: E402

logger = get_logger(__name__)

# Fixed ids and text-as-text keep the SVG identical across runs
SVG_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": APP_NAME,
    "font.family": "DejaVu Sans",
}


class ChartTools:
    """Utility class for rendering experiment charts."""

    def __init__(self, figsize=(6.4, 4.0)):
        """
        Initialize the chart tools.

        Args:
            figsize: Figure size in inches
        """
        self.figsize = figsize

    def _save(self, fig, path: str) -> str:
        fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Saved {path}")
        return path

    def figure1_scatter(self, table: pd.DataFrame, util_annotation: str, eng_annotation: str, path: str) -> str:
        """
        Scatter the per-period points of APP and PEAR with the percent gaps.

        Args:
            table: Rows (policy, eng, util)
            util_annotation: Utility gap label
            eng_annotation: Engagement gap label
            path: Output SVG path

        Returns:
            Path written
        """
        labels = {"app": "Engagement optimal policy", "pear": "Utility-aware heuristic"}
        with plt.rc_context(SVG_RC):
            fig, ax = plt.subplots(figsize=self.figsize)
            for marker, row in zip(("o", "s"), table.itertuples(index=False)):
                ax.scatter([row.eng], [row.util], marker=marker, s=60, label=labels.get(row.policy, row.policy))

            app = table[table["policy"] == "app"].iloc[0]
            pear = table[table["policy"] == "pear"].iloc[0]
            ax.annotate(
                util_annotation,
                xy=(pear["eng"], pear["util"]),
                xytext=(pear["eng"], (pear["util"] + app["util"]) / 2.0),
                arrowprops={"arrowstyle": "->"},
                ha="center",
            )
            ax.annotate(
                eng_annotation,
                xy=(app["eng"], app["util"]),
                xytext=(app["eng"], app["util"] - 0.1 * (pear["util"] - app["util"])),
                ha="center",
                va="top",
            )
            ax.set_xlabel("Per-period engagement")
            ax.set_ylabel("Per-period utility")
            ax.legend(loc="best")
            return self._save(fig, path)

    def grouped_bars(
        self,
        categories,
        first: np.ndarray,
        second: np.ndarray,
        labels,
        xlabel: str,
        ylabel: str,
        path: str,
        title: Optional[str] = None
    ) -> str:
        """
        Two bars per category.

        Args:
            categories: Category tick labels
            first: Heights of the first series
            second: Heights of the second series
            labels: Legend labels of the two series
            xlabel: X axis label
            ylabel: Y axis label
            path: Output SVG path
            title: Optional title

        Returns:
            Path written
        """
        with plt.rc_context(SVG_RC):
            fig, ax = plt.subplots(figsize=self.figsize)
            x = np.arange(len(categories))
            width = 0.35
            ax.bar(x - width / 2, first, width, label=labels[0])
            ax.bar(x + width / 2, second, width, label=labels[1])
            ax.axhline(0.0, color="black", linewidth=0.8)
            ax.set_xticks(x)
            ax.set_xticklabels([str(category) for category in categories])
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            ax.legend()
            return self._save(fig, path)

    def table1_bars(self, table: pd.DataFrame, path: str) -> str:
        return self.grouped_bars(
            table["delta"].tolist(),
            table["d_eng_pct"].to_numpy(),
            table["d_util_pct"].to_numpy(),
            ("Engagement change (%)", "Utility change (%)"),
            "Discount factor",
            "PEAR vs APP (%)",
            path,
        )

    def figure34_bars(self, table: pd.DataFrame, path: str, title: Optional[str] = None) -> str:
        """Bars of (ratio - 1) per xi for one delta and exploration length."""
        return self.grouped_bars(
            table["xi"].tolist(),
            table["eng_ratio"].to_numpy() - 1.0,
            table["util_ratio"].to_numpy() - 1.0,
            ("Engagement", "Utility"),
            "GPD shape xi",
            "DICE / APP - 1",
            path,
            title=title,
        )
