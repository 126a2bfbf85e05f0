"""Deterministic rendering of figure recipes with matplotlib."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .recipe import FigureRecipe, RecipeError, read_csv

__all__ = ["render"]


def render(recipe: FigureRecipe, show_legend: bool = True):
    """Draw all curves of a recipe and write the output image.

    Dashed curves reuse the color of the most recent solid curve, so a
    reference run drawn dashed sits on top of its production twin in the
    same color. Returns the matplotlib figure (mainly for tests).
    """
    recipe.validate()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    last_color = None
    for curve in recipe.curves:
        data, names = read_csv(curve.csv_path)
        if "time_fs" not in names:
            raise RecipeError(f"{curve.csv_path}: missing time_fs column")
        x = data["time_fs"]
        y = data[curve.column]
        if curve.style == "dashed" and last_color is not None:
            ax.plot(x, y, linestyle="--", color=last_color, label=curve.label)
        else:
            (line,) = ax.plot(x, y, linestyle="-" if curve.style == "solid" else "--",
                              label=curve.label)
            last_color = line.get_color()
    ax.set_xlabel(recipe.xlabel)
    if recipe.ylabel:
        ax.set_ylabel(recipe.ylabel)
    if recipe.title:
        ax.set_title(recipe.title)
    if show_legend:
        ax.legend(frameon=False)
    fig.tight_layout()
    _save_deterministic(fig, recipe.output)
    return fig


def _save_deterministic(fig, output: Path) -> None:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    suffix = output.suffix.lower()
    if suffix == ".pdf":
        # a fixed (absent) creation date keeps re-renders byte-identical
        fig.savefig(output, format="pdf", metadata={"CreationDate": None})
    elif suffix == ".svg":
        with matplotlib.rc_context({"svg.hashsalt": "figrender"}):
            fig.savefig(output, format="svg", metadata={"Date": None})
    else:
        raise RecipeError(
            f"output {output.name!r}: vector formats only (.pdf or .svg)"
        )
