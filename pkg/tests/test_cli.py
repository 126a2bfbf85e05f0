import os
from pathlib import Path

import numpy as np
import pytest

from bosonmap.cli import main
from bosonmap.config import load_run_config, manifest_text, parse_flat_text
from bosonmap.errors import ConfigError


TC_SMALL = """
# quick two-emitter run
model = tc
n_emitters = 2
t_max_fs = 20
samples = 21
rtol = 1e-9
atol = 1e-11
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_flat_text_basics():
    values = parse_flat_text("a = 1\n# comment\n\nb = x y  # trailing\n")
    assert values == {"a": "1", "b": "x y"}
    with pytest.raises(ConfigError, match="expected"):
        parse_flat_text("nonsense line")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_flat_text("a = 1\na = 2")


def test_load_run_config_resolves_defaults(tmp_path):
    cfg = load_run_config(write_config(tmp_path, TC_SMALL))
    assert cfg.spec.kind == "tc"
    assert cfg.spec.cavity_dim == 3
    assert cfg.method == "dopri5"
    assert cfg.output == "run"


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown keys"):
        load_run_config(write_config(tmp_path, TC_SMALL + "bogus = 3\n"))
    with pytest.raises(ConfigError, match="missing required"):
        load_run_config(write_config(tmp_path, "n_emitters = 2\n"))


def test_run_writes_csv_and_manifest(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 0
    csv_path = out / "run.csv"
    text = csv_path.read_text().splitlines()
    header = text[0].split(",")
    assert header[0] == "time_fs"
    assert "cavity_population" in header and "excited_population" in header
    assert "trace_error" in header and "leakage" in header
    assert len(text) == 1 + 21
    manifest = (out / "run.manifest.txt").read_text()
    assert "model = tc" in manifest
    assert "# hbar_ev_fs = 0.6582119569" in manifest


def test_run_is_byte_deterministic(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg_path), "--out", str(out1)]) == 0
    assert main(["run", str(cfg_path), "--out", str(out2)]) == 0
    assert (out1 / "run.csv").read_bytes() == (out2 / "run.csv").read_bytes()


def test_manifest_is_rerunnable(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 0
    rerun_cfg = out / "run.manifest.txt"
    cfg = load_run_config(rerun_cfg)
    assert cfg.spec == load_run_config(cfg_path).spec
    out2 = tmp_path / "out2"
    assert main(["run", str(rerun_cfg), "--out", str(out2)]) == 0
    # the manifest pins output = run, so the rerun reproduces run.csv exactly
    a = (out / "run.csv").read_bytes()
    b = (out2 / "run.csv").read_bytes()
    assert a == b


def test_run_with_oracle_writes_deviation_report(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out), "--oracle"]) == 0
    assert (out / "run.oracle.csv").exists()
    report = (out / "run.deviation.txt").read_text()
    assert "max_deviation" in report
    value = float(report.strip().splitlines()[-1].split("=")[1])
    assert value < 1e-7


def test_malformed_config_exits_1_without_partial_output(tmp_path, capsys):
    cfg_path = write_config(tmp_path, TC_SMALL + "mystery = 7\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 1
    assert not out.exists() or not list(out.iterdir())
    assert "config error" in capsys.readouterr().err


def test_guard_violation_exits_3(tmp_path, capsys):
    big = "model = htc\nn_emitters = 4\nt_max_fs = 10\nsamples = 3\n"
    cfg_path = write_config(tmp_path, big)
    out = tmp_path / "out"
    code = main(["run", str(cfg_path), "--out", str(out), "--oracle"])
    assert code == 3
    assert "guard" in capsys.readouterr().err


def test_dims_reports_paper_numbers(tmp_path, capsys):
    cfg_path = write_config(tmp_path, "model = htc\nn_emitters = 5\n")
    assert main(["dims", str(cfg_path)]) == 0
    text = capsys.readouterr().out
    assert "12012" in text
    assert "600000" in text

    cfg3 = write_config(tmp_path, "model = three_level\nn_emitters = 17\n", "three.cfg")
    assert main(["dims", str(cfg3)]) == 0
    text = capsys.readouterr().out
    assert "36.98" in text or "36.99" in text


def test_dims_single_emitter_counts_equal(tmp_path, capsys):
    cfg_path = write_config(tmp_path, "model = tc\nn_emitters = 1\n")
    assert main(["dims", str(cfg_path)]) == 0
    lines = capsys.readouterr().out
    sym = int(lines.split("entries, symmetric:")[1].splitlines()[0])
    full = int(lines.split("entries, full     :")[1].splitlines()[0])
    assert sym == full


def test_sweep_writes_one_file_per_value(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out = tmp_path / "sweep"
    assert main(["sweep", str(cfg_path), "--vary", "g=0.05,0.1", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.glob("*.csv"))
    assert files == ["run__g=0.05.csv", "run__g=0.1.csv"]
    # the two runs genuinely differ
    a = (out / "run__g=0.05.csv").read_bytes()
    b = (out / "run__g=0.1.csv").read_bytes()
    assert a != b


def test_sweep_parallel_jobs(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    out = tmp_path / "sweepj"
    code = main(["sweep", str(cfg_path), "--vary", "n_emitters=1,2", "--jobs", "2",
                 "--out", str(out)])
    assert code == 0
    assert len(list(out.glob("*.csv"))) == 2


def test_sweep_rejects_bad_vary(tmp_path):
    cfg_path = write_config(tmp_path, TC_SMALL)
    assert main(["sweep", str(cfg_path), "--vary", "g"]) == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["run"])  # missing config argument
    assert err.value.code == 1
