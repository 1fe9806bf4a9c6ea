"""Run configuration: TOML file with one level of tables, plus overrides.

Example::

    command = "trajectory"
    seed = 0

    [scenario]
    kind = "harmonic"      # harmonic | plane | step | packet
    alpha = 1.0
    n = 1

    [initial]
    x0 = [1.2, 1.35, "1.45+0.1j"]

    [time]
    t0 = 0.0
    t1 = 6.283185307179586
    samples = 401

For the oscillator, initial conditions and exported positions use the
dimensionless coordinate X = alpha x.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import tomli
import tomli_w

from .trajectory import IntegratorConfig
from .wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    ParameterError,
    PhysicalConstants,
    PlaneWave,
    PotentialStep,
    Scenario,
)

COMMANDS = ("trajectory", "contour", "ensemble", "check")
FORMATS = ("csv", "records")
CHECK_SUITES = ("hj", "conservation", "circle", "continuity", "real_part")


class ConfigParseError(ValueError):
    """Malformed configuration text or structure (exit status 2)."""


class ConfigValidationError(ValueError):
    """Well-formed configuration with invalid values (exit status 3)."""


@dataclass(frozen=True)
class ContourSpec:
    re_min: float = -2 * math.pi
    re_max: float = -1e-9
    im_min: float = -1.5
    im_max: float = 1.5
    points_re: int = 241
    points_im: int = 121
    levels: tuple[float, ...] = ()
    t: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: Scenario = field(default_factory=HarmonicOscillator)
    initial: tuple[complex, ...] = (1.0 + 0j,)
    t0: float = 0.0
    t1: float = 2 * math.pi
    samples: int = 201
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    contour: ContourSpec = field(default_factory=ContourSpec)
    ensemble_n: int = 100_000
    checks: tuple[str, ...] = CHECK_SUITES

    def time_grid(self):
        import numpy as np

        return np.linspace(self.t0, self.t1, self.samples)


_SCENARIO_KEYS = {
    "harmonic": {"alpha", "n"},
    "plane": {"k", "amplitude"},
    "step": {"E", "V0", "reflection", "r"},
    "packet": {"sigma", "kbar"},
}
_SECTIONS = {
    "scenario",
    "initial",
    "time",
    "integrator",
    "output",
    "contour",
    "ensemble",
    "check",
}
_TOP = {"command", "seed"}


def _complex(v):
    if isinstance(v, bool):
        raise ConfigParseError(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            raise ConfigParseError(f"cannot parse complex value {v!r}") from None
    if isinstance(v, list) and len(v) == 2:
        return complex(_float(v[0]), _float(v[1]))
    raise ConfigParseError(f"cannot parse complex value {v!r}")


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigParseError(f"expected a number, got {v!r}")
    return float(v)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigParseError(f"expected an integer, got {v!r}")
    return v


def build_scenario(spec: dict) -> Scenario:
    spec = dict(spec)
    kind = spec.pop("kind", "harmonic")
    if kind not in _SCENARIO_KEYS:
        raise ConfigParseError(f"unknown scenario kind {kind!r}")
    consts = PhysicalConstants(_float(spec.pop("hbar", 1.0)), _float(spec.pop("mass", 1.0)))
    unknown = set(spec) - _SCENARIO_KEYS[kind]
    if unknown:
        raise ConfigParseError(f"unknown keys for {kind} scenario: {sorted(unknown)}")
    if kind == "harmonic":
        return HarmonicOscillator(_float(spec.get("alpha", 1.0)), _int(spec.get("n", 0)), constants=consts)
    if kind == "plane":
        return PlaneWave(_float(spec.get("k", 1.0)), _complex(spec.get("amplitude", 1.0)), constants=consts)
    if kind == "step":
        refl = spec.get("reflection")
        if "r" in spec:
            if refl is not None:
                raise ConfigParseError("give either r (= R^2) or reflection, not both")
            r = _float(spec["r"])
            if r < 0:
                raise ParameterError("reflection probability must be nonnegative")
            refl = math.sqrt(r)
        return PotentialStep(
            _float(spec.get("E", 0.5)),
            _float(spec.get("V0", 0.25)),
            None if refl is None else _float(refl),
            constants=consts,
        )
    return GaussianPacket(_float(spec.get("sigma", 1.0)), _float(spec.get("kbar", 1.0)), constants=consts)


def scenario_to_dict(s: Scenario) -> dict:
    d = {"kind": s.label, "hbar": s.hbar, "mass": s.mass}
    for f in dataclasses.fields(s):
        if f.name == "constants":
            continue
        v = getattr(s, f.name)
        if v is None:
            continue
        if isinstance(v, complex):
            v = [v.real, v.imag]
        d[f.name] = v
    return d


def _known(section, d, allowed):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigParseError(f"unknown keys in [{section}]: {sorted(unknown)}")


def from_dict(raw: dict, command: str | None = None) -> RunConfig:
    """Build a RunConfig from parsed TOML; structural errors raise ConfigParseError."""
    unknown = set(raw) - _SECTIONS - _TOP
    if unknown:
        raise ConfigParseError(f"unknown top-level keys: {sorted(unknown)}")
    for sec in _SECTIONS & set(raw):
        if not isinstance(raw[sec], dict):
            raise ConfigParseError(f"[{sec}] must be a table")
    cmd = command or raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigParseError(f"command must be one of {COMMANDS}, got {cmd!r}")
    kw = {"command": cmd}
    try:
        if "seed" in raw:
            kw["seed"] = _int(raw["seed"])
        if "scenario" in raw:
            kw["scenario"] = build_scenario(raw["scenario"])
        if "initial" in raw:
            _known("initial", raw["initial"], {"x0"})
            x0 = raw["initial"].get("x0", [1.0])
            if not isinstance(x0, list):
                x0 = [x0]
            kw["initial"] = tuple(_complex(v) for v in x0)
        if "time" in raw:
            tm = raw["time"]
            _known("time", tm, {"t0", "t1", "samples"})
            if "t0" in tm:
                kw["t0"] = _float(tm["t0"])
            if "t1" in tm:
                kw["t1"] = _float(tm["t1"])
            if "samples" in tm:
                kw["samples"] = _int(tm["samples"])
        if "integrator" in raw:
            names = {f.name for f in dataclasses.fields(IntegratorConfig)}
            _known("integrator", raw["integrator"], names)
            vals = {
                k: (_int(v) if k in ("max_samples", "max_steps") else _float(v)) for k, v in raw["integrator"].items()
            }
            kw["integrator"] = IntegratorConfig(**vals)
        if "output" in raw:
            _known("output", raw["output"], {"path", "format"})
            if "path" in raw["output"]:
                kw["output"] = str(raw["output"]["path"])
            if "format" in raw["output"]:
                kw["format"] = raw["output"]["format"]
        if "contour" in raw:
            names = {f.name for f in dataclasses.fields(ContourSpec)}
            _known("contour", raw["contour"], names)
            vals = {}
            for k, v in raw["contour"].items():
                if k == "levels":
                    vals[k] = tuple(_float(x) for x in (v if isinstance(v, list) else [v]))
                elif k.startswith("points"):
                    vals[k] = _int(v)
                else:
                    vals[k] = _float(v)
            kw["contour"] = ContourSpec(**vals)
        if "ensemble" in raw:
            _known("ensemble", raw["ensemble"], {"n"})
            if "n" in raw["ensemble"]:
                kw["ensemble_n"] = _int(raw["ensemble"]["n"])
        if "check" in raw:
            _known("check", raw["check"], {"suites"})
            suites = raw["check"].get("suites", list(CHECK_SUITES))
            if not isinstance(suites, list):
                raise ConfigParseError("[check] suites must be a list")
            kw["checks"] = tuple(str(x) for x in suites)
    except (ParameterError, ValueError) as exc:
        if isinstance(exc, ConfigParseError):
            raise
        raise ConfigValidationError(str(exc)) from exc
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.format not in FORMATS:
        raise ConfigValidationError(f"format must be one of {FORMATS}")
    if cfg.samples < 2:
        raise ConfigValidationError("time grid needs at least two samples")
    if cfg.command in ("trajectory", "ensemble") and not cfg.t1 > cfg.t0:
        raise ConfigValidationError("time grid needs t1 > t0")
    if cfg.command == "trajectory" and not cfg.initial:
        raise ConfigValidationError("no initial conditions")
    if cfg.command == "trajectory" and cfg.samples > cfg.integrator.max_samples:
        raise ConfigValidationError("samples exceeds integrator max_samples")
    if cfg.command == "ensemble":
        if not cfg.scenario.normalizable:
            raise ConfigValidationError(f"ensemble needs a normalizable scenario, got {cfg.scenario.label}")
        if cfg.ensemble_n < 2:
            raise ConfigValidationError("ensemble size must be at least 2")
    if cfg.command == "contour":
        c = cfg.contour
        if not (c.re_max > c.re_min and c.im_max > c.im_min and c.points_re >= 2 and c.points_im >= 2):
            raise ConfigValidationError("contour grid is empty")
        if cfg.scenario.label == "packet":
            raise ConfigValidationError("the packet's trajectories are not level sets of a time-independent function")
        if cfg.scenario.label == "step" and c.re_max >= 0:
            raise ConfigValidationError("step contours are defined for Re(x) < 0 only")
    bad = set(cfg.checks) - set(CHECK_SUITES)
    if bad:
        raise ConfigValidationError(f"unknown check suites {sorted(bad)}")


def parse_text(text: str, command: str | None = None) -> RunConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigParseError(f"invalid TOML: {exc}") from exc
    return from_dict(raw, command)


def to_dict(cfg: RunConfig) -> dict:
    d = {
        "command": cfg.command,
        "seed": cfg.seed,
        "scenario": scenario_to_dict(cfg.scenario),
        "initial": {"x0": [[z.real, z.imag] for z in cfg.initial]},
        "time": {"t0": cfg.t0, "t1": cfg.t1, "samples": cfg.samples},
        "integrator": dataclasses.asdict(cfg.integrator),
        "output": {"format": cfg.format},
        "contour": {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(cfg.contour).items()},
        "ensemble": {"n": cfg.ensemble_n},
        "check": {"suites": list(cfg.checks)},
    }
    if cfg.output is not None:
        d["output"]["path"] = cfg.output
    return d


def dumps(cfg: RunConfig) -> str:
    """Config echo; ``parse_text(dumps(cfg)) == cfg``."""
    return tomli_w.dumps(to_dict(cfg))


def apply_overrides(raw: dict, assignments) -> dict:
    """Apply ``section.key=value`` overrides (values parsed as TOML literals)."""
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    for item in assignments:
        if "=" not in item:
            raise ConfigParseError(f"override must look like section.key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            parsed = tomli.loads(f"v = {val.strip()}")["v"]
        except tomli.TOMLDecodeError:
            parsed = val.strip()
        parts = key.strip().split(".")
        if len(parts) == 1:
            raw[parts[0]] = parsed
        elif len(parts) == 2:
            raw.setdefault(parts[0], {})[parts[1]] = parsed
        else:
            raise ConfigParseError(f"override key nests too deep: {key!r}")
    return raw
