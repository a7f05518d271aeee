"""Flat ``section.key = value`` experiment files.

One experiment per file; ``#`` starts a comment; keys may appear once.
Lengths accept a ``pi`` multiple (``40pi``, ``40*pi``, ``pi``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .dynamics import IntegratorConfig, LifespanParams
from .equations import EquationSpec
from .initial_data import FAMILIES
from .spectral import EXPONENT_CAP, GridSpec

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "serialize_config"]


class ConfigError(ValueError):
    """Validation failure; the message carries ``source:line:`` when known."""


_PI = re.compile(r"^\s*([+-]?[0-9.eE+-]*)\s*\*?\s*pi\s*$")


def _float(text: str) -> float:
    m = _PI.match(text)
    if m:
        head = m.group(1)
        return (float(head) if head not in ("", "+", "-") else float(head + "1")) * math.pi
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {text!r}")
    return v


def _int(text: str) -> int:
    return int(text, 0)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple:
    return tuple(_float(p) for p in text.split(",") if p.strip())


def _word(text: str) -> str:
    if not re.fullmatch(r"[A-Za-z0-9_./-]+", text):
        raise ValueError(f"expected a bare word, got {text!r}")
    return text


# key -> (parser, default); None default means required
SCHEMA = {
    "equation.kind": (_word, None),
    "equation.mu": (_int, None),
    "equation.alpha": (_float, None),
    "equation.beta": (_float, None),
    "equation.gamma": (_float, None),
    "grid.n": (_int, None),
    "grid.length": (_float, None),
    "initial.family": (_word, None),
    "integrator.dt": (_float, None),
    "integrator.t_end": (_float, 1.0),
    "integrator.dealias": (_bool, True),
    "integrator.sample_every": (_int, 100),
    "diagnostics.sigmas": (_floats, ()),
    "diagnostics.hs": (_floats, ()),
    "diagnostics.noise_floor": (_float, -1.0),
    "continuation.sigma0": (_float, None),
    "continuation.T": (_float, None),
    "continuation.c0": (_float, 0.1),
    "continuation.a": (_float, 3.0),
    "continuation.C": (_float, -1.0),
    "continuation.exponent": (_float, -1.0),
    "continuation.samples_per_window": (_int, 20),
    "output.dir": (_word, "runs/out"),
    "run.seed": (_int, 0),
}
INITIAL_PARAMS = {"c", "x0", "A", "w", "k", "sigma0", "k_max", "seed"}
_INT_PARAMS = {"k_max", "seed"}


@dataclass
class ExperimentConfig:
    values: dict
    initial: dict = field(default_factory=dict)
    source: str = "<config>"

    def get(self, key: str):
        if key in self.values:
            return self.values[key]
        default = SCHEMA[key][1]
        if default is None:
            raise ConfigError(f"{self.source}: missing required key {key!r}")
        return default

    def has(self, key: str) -> bool:
        return key in self.values

    def equation(self) -> EquationSpec:
        kind = self.get("equation.kind")
        try:
            if kind == "mkdv":
                return EquationSpec.mkdv(self.values.get("equation.mu", -1))
            if kind == "tnls":
                return EquationSpec.tnls(self.values.get("equation.alpha", 1.0),
                                         self.values.get("equation.beta", 1.0),
                                         self.values.get("equation.gamma", 1.0))
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from None
        raise ConfigError(f"{self.source}: equation.kind must be mkdv or tnls, got {kind!r}")

    def grid(self) -> GridSpec:
        try:
            return GridSpec(self.get("grid.n"), self.get("grid.length"))
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from None

    def integrator(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(self.get("integrator.dt"), self.get("integrator.dealias"))
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from None

    def lifespan(self) -> LifespanParams:
        try:
            return LifespanParams(self.get("continuation.c0"), self.get("continuation.a"))
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from None

    @property
    def seed(self) -> int:
        return self.get("run.seed")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values, initial, where = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        loc = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{loc}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (p.strip() for p in line.partition("="))
        if not key or not val:
            raise ConfigError(f"{loc}: empty key or value")
        if key in where:
            raise ConfigError(f"{loc}: duplicate key {key!r} (first set on line {where[key]})")
        where[key] = lineno
        if key.startswith("initial.") and key != "initial.family":
            name = key.split(".", 1)[1]
            if name not in INITIAL_PARAMS:
                raise ConfigError(f"{loc}: unknown initial-data parameter {name!r}")
            try:
                initial[name] = _int(val) if name in _INT_PARAMS else _float(val)
            except ValueError as exc:
                raise ConfigError(f"{loc}: bad value for {key}: {exc}") from None
            continue
        if key not in SCHEMA:
            raise ConfigError(f"{loc}: unknown key {key!r}")
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"{loc}: bad value for {key}: {exc}") from None
    cfg = ExperimentConfig(values, initial, source)
    _validate(cfg, where)
    return cfg


def _validate(cfg: ExperimentConfig, where: dict) -> None:
    def at(key):
        return f"{cfg.source}:{where[key]}" if key in where else cfg.source

    for key in ("equation.kind", "grid.n", "grid.length", "initial.family", "integrator.dt"):
        if key not in cfg.values:
            raise ConfigError(f"{cfg.source}: missing required key {key!r}")
    eq = cfg.equation()
    kind = cfg.values["equation.kind"]
    stray = [k for k in ("equation.alpha", "equation.beta", "equation.gamma") if k in cfg.values]
    if kind == "mkdv" and stray:
        raise ConfigError(f"{at(stray[0])}: {stray[0]} is a tNLS parameter")
    if kind == "tnls" and "equation.mu" in cfg.values:
        raise ConfigError(f"{at('equation.mu')}: equation.mu is an mKdV parameter")
    grid = cfg.grid()
    fam = cfg.values["initial.family"]
    if fam not in FAMILIES:
        raise ConfigError(f"{at('initial.family')}: unknown family {fam!r}; "
                          f"known: {', '.join(sorted(FAMILIES))}")
    allowed = set(FAMILIES[fam][1])
    for name in cfg.initial:
        if name not in allowed:
            raise ConfigError(f"{at('initial.' + name)}: family {fam!r} takes no parameter {name!r}")
    if fam == "plane_wave" and eq.is_mkdv:
        raise ConfigError(f"{at('initial.family')}: plane_wave data needs equation.kind = tnls")
    for s in cfg.get("diagnostics.sigmas"):
        if s < 0 or s * grid.xi_max > EXPONENT_CAP:
            raise ConfigError(f"{at('diagnostics.sigmas')}: sigma={s} outside the trust radius "
                              f"of the grid (need 0 <= sigma <= {EXPONENT_CAP / grid.xi_max:.4g})")
    if cfg.get("integrator.dt") <= 0:
        raise ConfigError(f"{at('integrator.dt')}: dt must be positive")
    if cfg.get("integrator.t_end") < 0:
        raise ConfigError(f"{at('integrator.t_end')}: t_end must be >= 0")
    if cfg.get("integrator.sample_every") < 1:
        raise ConfigError(f"{at('integrator.sample_every')}: sample_every must be >= 1")


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text; ``parse(serialize(c))`` reproduces ``c``'s values."""
    lines = []
    for key in SCHEMA:
        if key in cfg.values:
            lines.append(f"{key} = {_fmt(cfg.values[key])}")
            if key == "initial.family":
                for name in sorted(cfg.initial):
                    lines.append(f"initial.{name} = {_fmt(cfg.initial[name])}")
    return "\n".join(lines) + "\n"
