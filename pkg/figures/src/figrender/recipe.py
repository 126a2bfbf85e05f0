"""Figure recipes: flat key=value files describing overlay plots.

A recipe names an output image, axis labels, and a list of curves, each
pulling one named column out of a trajectory CSV (first column time_fs,
one column per observable, header row). Dashed curves are overlays:
they reuse the color of the preceding solid curve, which is how
brute-force reference runs are drawn over the production curves.

Schema (same line syntax as the simulator's run configs)::

    output = fig2a.pdf
    xlabel = time (fs)
    ylabel = cavity population per molecule
    title  = optional title
    curve1.csv    = ../out/htc_n3.csv
    curve1.column = cavity_population_per_molecule
    curve1.style  = solid
    curve1.label  = N = 3
    curve2.csv    = ../out/htc_n3.oracle.csv
    curve2.column = cavity_population_per_molecule
    curve2.style  = dashed
    curve2.label  = N = 3 (product space)

Curve groups are numbered from 1 without gaps. Relative paths resolve
against the recipe file's directory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["RecipeError", "Curve", "FigureRecipe", "parse_flat_text", "load_recipe", "read_csv"]

_STYLES = ("solid", "dashed")
_TOP_KEYS = {"output", "xlabel", "ylabel", "title"}
_CURVE_KEYS = {"csv", "column", "style", "label"}


class RecipeError(ValueError):
    """Malformed recipe file or missing data."""


def parse_flat_text(text: str, source: str = "<recipe>") -> dict:
    """Parse `key = value` lines; '#' comments and blank lines ignored."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RecipeError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise RecipeError(f"{source}:{lineno}: empty key")
        if key in values:
            raise RecipeError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


@dataclass(frozen=True)
class Curve:
    csv_path: Path
    column: str
    style: str
    label: str


@dataclass(frozen=True)
class FigureRecipe:
    output: Path
    curves: tuple
    xlabel: str = "time (fs)"
    ylabel: str = ""
    title: str = ""
    source: str = "<recipe>"

    def validate(self) -> None:
        """Check that every referenced CSV exists and holds its column."""
        for curve in self.curves:
            _, names = read_csv(curve.csv_path)
            if curve.column not in names:
                raise RecipeError(
                    f"{self.source}: column {curve.column!r} not in {curve.csv_path} "
                    f"(available: {', '.join(names)})"
                )


def load_recipe(path) -> FigureRecipe:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RecipeError(f"cannot read recipe {path}: {exc}") from exc
    values = parse_flat_text(text, source=str(path))

    groups: dict = {}
    top: dict = {}
    for key, value in values.items():
        if "." in key:
            head, _, tail = key.partition(".")
            if not head.startswith("curve") or tail not in _CURVE_KEYS:
                raise RecipeError(f"{path}: unknown key {key!r}")
            try:
                index = int(head[len("curve"):])
            except ValueError:
                raise RecipeError(f"{path}: unknown key {key!r}") from None
            groups.setdefault(index, {})[tail] = value
        elif key in _TOP_KEYS:
            top[key] = value
        else:
            raise RecipeError(f"{path}: unknown key {key!r}")

    if "output" not in top:
        raise RecipeError(f"{path}: missing required key 'output'")
    if not groups:
        raise RecipeError(f"{path}: no curves defined")
    expected = list(range(1, len(groups) + 1))
    if sorted(groups) != expected:
        raise RecipeError(
            f"{path}: curve groups must be numbered 1..{len(groups)} without gaps, "
            f"got {sorted(groups)}"
        )

    base = path.parent
    curves = []
    for index in expected:
        group = groups[index]
        missing = {"csv", "column"} - set(group)
        if missing:
            raise RecipeError(f"{path}: curve{index} lacks {', '.join(sorted(missing))}")
        style = group.get("style", "solid")
        if style not in _STYLES:
            raise RecipeError(
                f"{path}: curve{index}.style must be one of {_STYLES}, got {style!r}"
            )
        curves.append(
            Curve(
                csv_path=(base / group["csv"]).resolve(),
                column=group["column"],
                style=style,
                label=group.get("label", group["column"]),
            )
        )
    return FigureRecipe(
        output=(base / top["output"]).resolve(),
        curves=tuple(curves),
        xlabel=top.get("xlabel", "time (fs)"),
        ylabel=top.get("ylabel", ""),
        title=top.get("title", ""),
        source=str(path),
    )


def read_csv(path) -> tuple:
    """Load a trajectory CSV: (column -> float array, ordered column names)."""
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise RecipeError(f"{path}: empty CSV") from None
            rows = [[float(cell) for cell in row] for row in reader if row]
    except OSError as exc:
        raise RecipeError(f"cannot read CSV {path}: {exc}") from exc
    except ValueError as exc:
        raise RecipeError(f"{path}: non-numeric cell ({exc})") from exc
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise RecipeError(f"{path}: ragged CSV")
    return {name: data[:, k] for k, name in enumerate(header)}, header
