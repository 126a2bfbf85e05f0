import numpy as np
import pytest

import matplotlib.pyplot as plt

from figrender.cli import main
from figrender.recipe import RecipeError, load_recipe
from figrender.render import render

from test_recipe import write_csv


@pytest.fixture
def overlay_setup(tmp_path):
    """Production + reference CSV pair, like an oracle-comparison run."""
    t = np.linspace(0, 50, 101)
    solid = np.exp(-t / 20) * np.cos(0.4 * t) ** 2
    write_csv(tmp_path / "run.csv", {"time_fs": t, "pop": solid})
    write_csv(tmp_path / "run.oracle.csv", {"time_fs": t, "pop": solid + 1e-7})
    recipe_path = tmp_path / "fig.recipe"
    recipe_path.write_text(
        "output = fig.pdf\n"
        "ylabel = population\n"
        "title = overlay\n"
        "curve1.csv = run.csv\n"
        "curve1.column = pop\n"
        "curve1.style = solid\n"
        "curve1.label = mapped\n"
        "curve2.csv = run.oracle.csv\n"
        "curve2.column = pop\n"
        "curve2.style = dashed\n"
        "curve2.label = brute force\n"
    )
    return recipe_path


def test_render_writes_vector_file(overlay_setup, tmp_path):
    recipe = load_recipe(overlay_setup)
    fig = render(recipe)
    plt.close(fig)
    out = tmp_path / "fig.pdf"
    assert out.exists() and out.stat().st_size > 0
    assert out.read_bytes()[:5] == b"%PDF-"


def test_dashed_overlay_shares_color(overlay_setup):
    fig = render(load_recipe(overlay_setup))
    lines = fig.axes[0].get_lines()
    assert len(lines) == 2
    assert lines[0].get_linestyle() == "-"
    assert lines[1].get_linestyle() == "--"
    assert lines[0].get_color() == lines[1].get_color()
    plt.close(fig)


def test_rerender_is_idempotent_and_reads_only(overlay_setup, tmp_path):
    csv_before = (tmp_path / "run.csv").read_bytes()
    fig = render(load_recipe(overlay_setup))
    plt.close(fig)
    first = (tmp_path / "fig.pdf").read_bytes()
    fig = render(load_recipe(overlay_setup))
    plt.close(fig)
    second = (tmp_path / "fig.pdf").read_bytes()
    assert first == second
    assert (tmp_path / "run.csv").read_bytes() == csv_before


def test_single_curve_plot(tmp_path):
    t = np.linspace(0, 5, 11)
    write_csv(tmp_path / "one.csv", {"time_fs": t, "x": t**2})
    p = tmp_path / "one.recipe"
    p.write_text("output = one.svg\ncurve1.csv = one.csv\ncurve1.column = x\n")
    fig = render(load_recipe(p))
    plt.close(fig)
    assert (tmp_path / "one.svg").exists()


def test_svg_rerender_idempotent(tmp_path):
    t = np.linspace(0, 5, 11)
    write_csv(tmp_path / "one.csv", {"time_fs": t, "x": t**2})
    p = tmp_path / "one.recipe"
    p.write_text("output = one.svg\ncurve1.csv = one.csv\ncurve1.column = x\n")
    fig = render(load_recipe(p))
    plt.close(fig)
    first = (tmp_path / "one.svg").read_bytes()
    fig = render(load_recipe(p))
    plt.close(fig)
    assert (tmp_path / "one.svg").read_bytes() == first


def test_unsupported_format_rejected(tmp_path):
    t = np.linspace(0, 5, 11)
    write_csv(tmp_path / "one.csv", {"time_fs": t, "x": t})
    p = tmp_path / "one.recipe"
    p.write_text("output = one.png\ncurve1.csv = one.csv\ncurve1.column = x\n")
    with pytest.raises(RecipeError, match="vector"):
        render(load_recipe(p))


def test_cli_runs_and_reports_errors(overlay_setup, tmp_path, capsys):
    assert main([str(overlay_setup)]) == 0
    assert "wrote" in capsys.readouterr().out
    bad = tmp_path / "bad.recipe"
    bad.write_text("output = x.pdf\ncurve1.csv = missing.csv\ncurve1.column = pop\n")
    assert main([str(bad)]) == 1
    assert "recipe error" in capsys.readouterr().err
