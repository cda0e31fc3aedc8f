"""INI experiment configuration.

Sections (all optional except ``[experiment]``)::

    [experiment]  name, seed, out, jobs, snapshots
    [system]      builtin = 4shro | wzy | grassmannian, plus its parameters
                  or fspec = path, with a, b, lam lists
    [grid]        half_width, points
    [solver]      dt, T, eps_parabolic, stride, dealias, c_stab
    [data]        amplitude, width, wavenumbers, exact
    [gauge]       L, m, L_sweep
    [sweep]       eps, nu, delta
    [linear]      presets, a, b, L, r, T, dt, points, half_width, strength

Lists are comma separated. Expressions like ``2^-3`` are accepted in lists.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

EXPERIMENTS = ("mollifier-rates", "cauchy-rates", "parabolic-limit", "continuous-dependence",
               "linear-gauge", "validate", "solve")
OUT_ENV = "DISPERSIVE_LAB_OUT"


class ConfigError(ValueError):
    pass


def _number(tok: str) -> float:
    tok = tok.strip()
    if "^" in tok:
        base, exp = tok.split("^", 1)
        return float(base) ** float(exp)
    return float(tok)


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [_number(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _bool(text) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


def _monotone(name, values):
    if not values:
        raise ConfigError(f"sweep list {name} is empty")
    inc = all(b > a for a, b in zip(values, values[1:]))
    dec = all(b < a for a, b in zip(values, values[1:]))
    if not (inc or dec):
        raise ConfigError(f"sweep list {name} must be strictly sorted")


DEFAULTS = {
    "grid": {"half_width": 16.0, "points": 512},
    "solver": {"dt": 1e-4, "T": 0.25, "eps_parabolic": 0.0, "stride": 25, "dealias": True, "c_stab": 5.0},
    "data": {"amplitude": 0.1, "width": 4.0, "wavenumbers": None, "exact": True},
    "gauge": {"L": 10.0, "m": 4, "L_sweep": [2.0, 10.0, 50.0]},
    "sweep": {"eps": [2.0**-k for k in range(2, 6)], "nu": [2.0**-k for k in range(2, 7)],
              "delta": [1e-2, 1e-3, 1e-4]},
    "linear": {"presets": ["zero", "real-beta1", "decaying-im-gamma1", "violating-im-beta1"],
               "a": 1.0, "b": 0.0, "L": 4.0, "r": 4.0, "T": 0.25, "dt": 1e-4, "points": 256,
               "half_width": 16.0, "strength": 0.5, "snapshots": 16},
}


@dataclass
class ExperimentConfig:
    name: str
    system: dict = field(default_factory=lambda: {"builtin": "4shro"})
    grid: dict = field(default_factory=lambda: dict(DEFAULTS["grid"]))
    solver: dict = field(default_factory=lambda: dict(DEFAULTS["solver"]))
    data: dict = field(default_factory=lambda: dict(DEFAULTS["data"]))
    gauge: dict = field(default_factory=lambda: dict(DEFAULTS["gauge"]))
    sweep: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULTS["sweep"].items()})
    linear: dict = field(default_factory=lambda: dict(DEFAULTS["linear"]))
    out: str = "results"
    seed: int = 0
    jobs: int = 1
    snapshots: bool = False
    source: str | None = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        for key, vals in self.sweep.items():
            _monotone(key, vals)
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        fspec = self.system.get("fspec")
        if fspec and not Path(fspec).is_file():
            raise ConfigError(f"nonlinearity file {fspec} does not exist")

    def to_dict(self):
        return {"name": self.name, "system": self.system, "grid": self.grid, "solver": self.solver,
                "data": self.data, "gauge": self.gauge, "sweep": self.sweep, "linear": self.linear,
                "seed": self.seed, "snapshots": self.snapshots}


_TYPES = {
    "grid": {"half_width": float, "points": int},
    "solver": {"dt": float, "T": float, "eps_parabolic": float, "stride": int, "dealias": _bool,
               "c_stab": float},
    "data": {"amplitude": float, "width": float, "wavenumbers": _floats, "exact": _bool},
    "gauge": {"L": float, "m": int, "L_sweep": _floats},
    "sweep": {"eps": _floats, "nu": _floats, "delta": _floats},
    "linear": {"presets": lambda s: [p.strip() for p in s.split(",") if p.strip()], "a": float, "b": float,
               "L": float, "r": float, "T": float, "dt": float, "points": int, "half_width": float,
               "strength": float, "snapshots": int},
}


def _system_value(key, text):
    if key in ("builtin", "fspec", "name"):
        return text.strip()
    if key in ("mu", "a", "b", "lam"):
        return _floats(text)
    if key in ("n", "k0", "n0"):
        return int(text)
    return _number(text)


def parse_config(text: str, base_dir=None, source=None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if not cp.has_section("experiment") or "name" not in cp["experiment"]:
        raise ConfigError("missing [experiment] name")
    ex = cp["experiment"]
    kw = {"name": ex["name"].strip(), "source": source}
    try:
        if "seed" in ex:
            kw["seed"] = int(ex["seed"])
        if "jobs" in ex:
            kw["jobs"] = int(ex["jobs"])
        if "out" in ex:
            kw["out"] = ex["out"].strip()
        if "snapshots" in ex:
            kw["snapshots"] = _bool(ex["snapshots"])
        sections = {}
        for sec, types in _TYPES.items():
            vals = {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS[sec].items()}
            if cp.has_section(sec):
                for key, raw in cp[sec].items():
                    if key not in types:
                        raise ConfigError(f"unknown key {key!r} in [{sec}]")
                    vals[key] = types[key](raw)
            sections[sec] = vals
        system = {"builtin": "4shro"}
        if cp.has_section("system"):
            system = {k: _system_value(k, v) for k, v in cp["system"].items()}
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if "fspec" in system and base_dir is not None and not Path(system["fspec"]).is_absolute():
        system["fspec"] = str(Path(base_dir) / system["fspec"])
    if "builtin" not in system and "fspec" not in system:
        raise ConfigError("[system] needs builtin or fspec")
    return ExperimentConfig(system=system, **sections, **kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent, source=str(path))


def output_dir(cfg: ExperimentConfig, override=None) -> Path:
    """--out beats the environment override, which beats the config value."""
    if override:
        return Path(override)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(cfg.out)
