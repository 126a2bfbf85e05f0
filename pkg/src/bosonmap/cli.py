"""Batch front end: run configured simulations, report dimensions, sweep.

Subcommands
-----------
run <config> [--out DIR] [--oracle] [--strict]
    Build the model, evolve it, write `<output>.csv` plus a rerunnable
    manifest; with --oracle also run the brute-force twin (within its
    size guards), write `<output>.oracle.csv` and a max-deviation report.
dims <config>
    Print axis dimensions and density-matrix entry counts (symmetric
    sector vs full product space vs symmetrized Liouville space) without
    simulating anything.
sweep <config> --vary key=v1,v2,... [--jobs K]
    Re-run the config once per value, each run writing its own files.

Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 size
guard violation.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig, load_run_config, manifest_text
from .errors import ConfigError, GuardError, NumericalError
from .lindblad import HBAR_EV_FS, Trajectory
from .models import (
    build_full_model,
    build_model,
    dimension_report,
    run_full_model,
    run_model,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_GUARD = 3

_DIAG_COLUMNS = ("trace_error", "herm_error", "leakage", "emitter_number")


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the config error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fmt_float(x) -> str:
    return repr(float(x))


def trajectory_csv(traj: Trajectory) -> str:
    """Render a trajectory as CSV: time_fs, observables, diagnostics columns."""
    columns = ["time_fs"] + list(traj.observables)
    series = [traj.times_fs] + [traj.observables[k] for k in traj.observables]
    for key in _DIAG_COLUMNS:
        value = traj.diagnostics.get(key)
        if isinstance(value, np.ndarray):
            columns.append(key)
            series.append(value)
    lines = [",".join(columns)]
    for i in range(len(traj.times_fs)):
        lines.append(",".join(_fmt_float(col[i]) for col in series))
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _scalar_diagnostics(traj: Trajectory, prefix: str = "") -> dict:
    out = {}
    for key, value in traj.diagnostics.items():
        if not isinstance(value, np.ndarray):
            out[prefix + key] = value
    return out


def _execute(cfg: RunConfig, out_dir: Path) -> int:
    """Run one resolved configuration end to end and write its files."""
    model = build_model(cfg.spec)
    # size guards of the brute-force twin fire before any heavy work
    full_model = build_full_model(cfg.spec) if cfg.oracle else None
    wall0 = time.perf_counter()
    traj = run_model(
        model,
        energy_shift=cfg.energy_shift,
        use_sectors=cfg.use_sectors,
        **cfg.evolve_kwargs(),
    )
    extras = {
        "hbar_ev_fs": HBAR_EV_FS,
        **model.info,
        "wall_time_s": round(time.perf_counter() - wall0, 3),
        **_scalar_diagnostics(traj),
    }

    oracle_traj = None
    deviations = {}
    if full_model is not None:
        wall1 = time.perf_counter()
        oracle_traj = run_full_model(
            full_model,
            energy_shift=cfg.energy_shift,
            use_sectors=cfg.use_sectors,
            **cfg.evolve_kwargs(),
        )
        extras["oracle_wall_time_s"] = round(time.perf_counter() - wall1, 3)
        extras["oracle_full_dim"] = full_model.info["composite_dim"]
        for name in traj.observables:
            deviations[name] = float(
                np.abs(traj.observables[name] - oracle_traj.observables[name]).max()
            )
        extras["oracle_max_deviation"] = max(deviations.values())

    if cfg.strict and model.leakage_threshold is not None:
        peak = traj.diagnostics.get("max_leakage", 0.0)
        if peak > model.leakage_threshold:
            raise NumericalError(
                f"strict mode: cavity-truncation leakage {peak:.3e} exceeds "
                f"{model.leakage_threshold:g}"
            )

    csv_path = out_dir / f"{cfg.output}.csv"
    _write_atomic(csv_path, trajectory_csv(traj))
    print(f"wrote {csv_path} ({len(traj.times_fs)} rows)")
    manifest_path = out_dir / f"{cfg.output}.manifest.txt"
    _write_atomic(manifest_path, manifest_text(cfg, extras))
    print(f"wrote {manifest_path}")

    if oracle_traj is not None:
        oracle_path = out_dir / f"{cfg.output}.oracle.csv"
        _write_atomic(oracle_path, trajectory_csv(oracle_traj))
        print(f"wrote {oracle_path}")
        report = ["# max |second-quantized - full-space| per observable"]
        for name, dev in deviations.items():
            report.append(f"{name} = {_fmt_float(dev)}")
        report.append(f"max_deviation = {_fmt_float(max(deviations.values()))}")
        dev_path = out_dir / f"{cfg.output}.deviation.txt"
        _write_atomic(dev_path, "\n".join(report) + "\n")
        print(f"wrote {dev_path}")
        print(f"oracle max deviation: {max(deviations.values()):.3e}")
    return EXIT_OK


def cmd_run(args) -> int:
    overrides = {}
    if args.oracle:
        overrides["oracle"] = "true"
    if args.strict:
        overrides["strict"] = "true"
    cfg = load_run_config(args.config, overrides)
    return _execute(cfg, Path(args.out) if args.out else Path.cwd())


def cmd_dims(args) -> int:
    cfg = load_run_config(args.config)
    rep = dimension_report(cfg.spec)
    print(f"model = {cfg.spec.kind}, d = {rep['d_levels']}, N = {rep['n_emitters']}, "
          f"N_c = {rep['cavity_dim']}")
    print(f"symmetric-sector axis (emitter)  : {rep['symmetric_emitter_dim']}")
    print(f"symmetric-sector axis (total)    : {rep['symmetric_axis']}")
    print(f"full product axis (total)        : {rep['full_axis']}")
    print(f"density-matrix entries, symmetric: {rep['symmetric_entries']}")
    print(f"density-matrix entries, full     : {rep['full_entries']}")
    print(f"density-matrix entries, Liouville: {rep['liouville_entries']}")
    print(f"full / symmetric ratio           : {rep['full_over_symmetric']:.6g}")
    print(f"Liouville / symmetric ratio      : {rep['liouville_over_symmetric']:.6g}")
    return EXIT_OK


def _sweep_worker(config_path: str, key: str, value: str, out: str | None,
                  oracle: bool, strict: bool):
    overrides = {key: value}
    if oracle:
        overrides["oracle"] = "true"
    if strict:
        overrides["strict"] = "true"
    try:
        cfg = load_run_config(config_path, overrides)
        cfg.output = f"{cfg.output}__{key}={value}"
        code = _execute(cfg, Path(out) if out else Path.cwd())
        return value, code, ""
    except Exception as exc:  # propagate the class name across the process boundary
        return value, _exit_code_for(exc), f"{type(exc).__name__}: {exc}"


def cmd_sweep(args) -> int:
    key, _, values = args.vary.partition("=")
    key = key.strip()
    values = [v.strip() for v in values.split(",") if v.strip()]
    if not key or not values:
        raise ConfigError("--vary expects key=v1,v2,...")
    # validate the base config and the key up front
    load_run_config(args.config, {key: values[0]})

    worst = EXIT_OK
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_sweep_worker, args.config, key, v, args.out,
                            args.oracle, args.strict)
                for v in values
            ]
            for future in futures:
                value, code, message = future.result()
                if message:
                    print(f"{key}={value}: {message}", file=sys.stderr)
                worst = max(worst, code)
    else:
        for v in values:
            value, code, message = _sweep_worker(args.config, key, v, args.out,
                                                 args.oracle, args.strict)
            if message:
                print(f"{key}={value}: {message}", file=sys.stderr)
            worst = max(worst, code)
    return worst


def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, GuardError):
        return EXIT_GUARD
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bosonmap", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured simulation")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (default: current)")
    p_run.add_argument("--oracle", action="store_true",
                       help="also run the brute-force twin and report deviations")
    p_run.add_argument("--strict", action="store_true",
                       help="promote leakage warnings to errors")
    p_run.set_defaults(func=cmd_run)

    p_dims = sub.add_parser("dims", help="print dimension/entry-count report")
    p_dims.add_argument("config")
    p_dims.set_defaults(func=cmd_dims)

    p_sweep = sub.add_parser("sweep", help="run a one-key parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--vary", required=True, help="key=v1,v2,...")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", help="output directory (default: current)")
    p_sweep.add_argument("--oracle", action="store_true")
    p_sweep.add_argument("--strict", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
