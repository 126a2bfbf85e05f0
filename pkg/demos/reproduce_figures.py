"""Full pipeline: run the shipped scenarios, then render the figure set.

Runs the CLI on the configs in demos/configs (writing CSVs to out/), then
invokes the companion `figures` package on the recipes in
figures/recipes. The brute-force twins make this expensive — budget
roughly half an hour on one core. Pass --skip-runs to re-render from
existing CSVs only.

Usage:  python demos/reproduce_figures.py [--skip-runs]
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "out"
CONFIGS = [
    "htc_n2.cfg",
    "htc_n3.cfg",
    "three_level_n5_oracle.cfg",
    "three_level_n17.cfg",
]
RECIPES = [
    "fig2a_cavity.recipe",
    "fig2b_exciton.recipe",
    "fig3a_levels_n5.recipe",
    "fig3b_levels_n17.recipe",
    "fig4a_dipole_n5.recipe",
    "fig4b_dipole_n17.recipe",
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--skip-runs", action="store_true",
                        help="only render figures from existing CSVs")
    args = parser.parse_args()

    if not args.skip_runs:
        OUT.mkdir(exist_ok=True)
        for name in CONFIGS:
            config = ROOT / "demos" / "configs" / name
            print(f"== running {name}")
            code = subprocess.call(
                [sys.executable, "-m", "bosonmap", "run", str(config), "--out", str(OUT)]
            )
            if code != 0:
                print(f"run failed with exit code {code}", file=sys.stderr)
                return code

    recipe_paths = [str(ROOT / "figures" / "recipes" / r) for r in RECIPES]
    print("== rendering figures")
    return subprocess.call([sys.executable, "-m", "figrender.cli", *recipe_paths])


if __name__ == "__main__":
    sys.exit(main())
