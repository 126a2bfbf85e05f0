"""Command line front end: `figures <recipe-file> [more recipes...]`."""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt

from .recipe import RecipeError, load_recipe
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="render overlay plots from trajectory CSVs per recipe file",
    )
    parser.add_argument("recipes", nargs="+", help="flat key=value recipe files")
    args = parser.parse_args(argv)
    status = 0
    for path in args.recipes:
        try:
            recipe = load_recipe(path)
            fig = render(recipe)
            plt.close(fig)
            print(f"wrote {recipe.output}")
        except RecipeError as exc:
            print(f"recipe error: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
