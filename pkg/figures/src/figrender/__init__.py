"""Overlay plots of trajectory CSVs, driven by flat key=value recipes."""

from .recipe import Curve, FigureRecipe, RecipeError, load_recipe, read_csv
from .render import render

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "FigureRecipe",
    "RecipeError",
    "load_recipe",
    "read_csv",
    "render",
]
