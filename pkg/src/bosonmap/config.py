"""Flat key=value run configuration files.

One `key = value` pair per line, `#` starts a comment, blank lines are
ignored. The same schema serves run configs, manifests (manifests add
diagnostic comments, so a manifest is itself a rerunnable config), and
the figure recipes of the companion plotting package.

Keys
----
Model selection and physics (forwarded to ModelSpec):
    model, n_emitters, omega_0, omega_c, omega_e, omega_v, lambda_v, g,
    dipole_d, gamma_cavity, gamma_down, n_levels, n_vib_ground,
    n_vib_excited, cavity_dim, max_excitation, t_max_fs, samples
Run control:
    method (dopri5 | adams), order, rtol, atol, positivity_samples,
    use_sectors, energy_shift, oracle, strict, output
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .models import ModelSpec

__all__ = ["RunConfig", "parse_flat_file", "parse_flat_text", "load_run_config", "manifest_text"]

_SPEC_KEYS = {
    "model": str,
    "n_emitters": int,
    "omega_0": float,
    "omega_c": float,
    "omega_e": float,
    "omega_v": float,
    "lambda_v": float,
    "g": float,
    "dipole_d": float,
    "gamma_cavity": float,
    "gamma_down": float,
    "n_levels": int,
    "n_vib_ground": int,
    "n_vib_excited": int,
    "cavity_dim": int,
    "max_excitation": int,
    "t_max_fs": float,
    "samples": int,
}

_RUN_KEYS = {
    "method": str,
    "order": int,
    "rtol": float,
    "atol": float,
    "positivity_samples": int,
    "use_sectors": bool,
    "energy_shift": float,
    "oracle": bool,
    "strict": bool,
    "output": str,
}


@dataclass
class RunConfig:
    """Fully resolved run description: physics + integration + output."""

    spec: ModelSpec
    method: str = "dopri5"
    order: int = 12
    rtol: float = 1e-8
    atol: float = 1e-10
    positivity_samples: int = 10
    use_sectors: bool = True
    energy_shift: float = 0.0
    oracle: bool = False
    strict: bool = False
    output: str = "run"
    overridden: dict = field(default_factory=dict)

    def evolve_kwargs(self) -> dict:
        return {
            "method": self.method,
            "order": self.order,
            "rtol": self.rtol,
            "atol": self.atol,
            "positivity_samples": self.positivity_samples,
        }


def parse_flat_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key=value text into an ordered string->string dict."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def parse_flat_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_flat_text(text, source=str(path))


def _convert(key: str, value: str, typ, source: str):
    try:
        if typ is bool:
            low = value.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        return typ(value)
    except ValueError as exc:
        raise ConfigError(f"{source}: key {key!r}: {exc}") from exc


def load_run_config(path, overrides: dict | None = None) -> RunConfig:
    """Read, type-check, and resolve a run configuration file.

    ``overrides`` (e.g. from CLI flags or a sweep) are applied on top of
    the file's values before resolution.
    """
    path = Path(path)
    raw = parse_flat_file(path)
    if overrides:
        raw.update({k: str(v) for k, v in overrides.items()})
    source = str(path)

    unknown = set(raw) - set(_SPEC_KEYS) - set(_RUN_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(sorted(unknown))}")
    if "model" not in raw:
        raise ConfigError(f"{source}: missing required key 'model'")
    if "n_emitters" not in raw:
        raise ConfigError(f"{source}: missing required key 'n_emitters'")

    spec_overrides = {}
    for key, typ in _SPEC_KEYS.items():
        if key in raw and key not in ("model", "n_emitters"):
            spec_overrides[key] = _convert(key, raw[key], typ, source)
    kind = raw["model"].lower()
    n_emitters = _convert("n_emitters", raw["n_emitters"], int, source)
    spec = ModelSpec.create(kind, n_emitters, **spec_overrides)

    run_kwargs = {}
    for key, typ in _RUN_KEYS.items():
        if key in raw:
            run_kwargs[key] = _convert(key, raw[key], typ, source)
    if "output" not in run_kwargs:
        run_kwargs["output"] = path.stem
    method = run_kwargs.get("method", "dopri5")
    if method not in ("dopri5", "adams"):
        raise ConfigError(f"{source}: method must be dopri5 or adams, got {method!r}")
    return RunConfig(spec=spec, overridden=dict(spec_overrides), **run_kwargs)


def manifest_text(config: RunConfig, extras: dict) -> str:
    """Render a rerunnable manifest: resolved config + commented diagnostics."""
    lines = ["# resolved run manifest; rerunnable as a config file"]
    spec = config.spec.as_dict()
    lines.append(f"model = {spec.pop('kind')}")
    for key in _SPEC_KEYS:
        if key == "model":
            continue
        value = spec.get(key)
        if value is None:
            continue
        lines.append(f"{key} = {_fmt(value)}")
    for key in _RUN_KEYS:
        lines.append(f"{key} = {_fmt(getattr(config, key))}")
    lines.append("")
    for key, value in extras.items():
        lines.append(f"# {key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
