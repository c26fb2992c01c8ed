"""JSON run configuration.

A configuration file is one JSON object.  Only ``preset`` is required::

    {
      "preset": "cart32",            # sine1d, cart32, cart59, sphere-pole, ...
      "nsteps": 302,                 # or "periods": 1.0 (default: one period)
      "grid": {"n": 32},             # constructor overrides of the preset
      "variant": "gauge",            # gauge | standard | sphere (default: preset's)
      "fct": false,                  # default: on for standard, off otherwise
      "corrective_passes": 1,
      "ep": 1e-10,                   # default: 1e-10 (f64) / 1e-6 (f32)
      "precision": "f64",            # f32 | f64
      "upwind_only": false,          # donor-cell reference run
      "iout": 10,                    # output interval in steps, 0 = final row only
      "decomposition": [2, 2, 1],
      "workers": 4,
      "output": "out/cart32",
      "dump_fields": false,
      "reference": {"err0": 0.21, "linf": 3.1, "tol": 1e-9}
    }

Unknown keys are rejected by name.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

from .decomposition import decompose
from .grid import Grid3
from .kernels import VARIANTS
from .stepper import PRECISIONS, MpdataOptions
from .testcases import PRESET_NAMES, preset_boundaries, preset_shape


class ConfigError(ValueError):
    """Invalid run configuration."""


# constructor arguments each preset family accepts under "grid"
GRID_KEYS = {
    "sine1d": ("n", "courant"),
    "cart": ("n", "radius", "orbit", "steps", "amplitude", "background"),
    "sphere": ("nlon", "nlat", "nlev", "courant"),
}


def _family(preset):
    if preset.startswith("cart"):
        return "cart"
    if preset.startswith("sphere"):
        return "sphere"
    return preset


@dataclass(frozen=True)
class Reference:
    err0: float
    linf: float
    tol: float

    def failures(self, norms) -> list[str]:
        """Names of the norms differing from the reference by more than ``tol``."""
        bad = []
        for name in ("err0", "linf"):
            got, ref = getattr(norms, name), getattr(self, name)
            if not abs(got - ref) <= self.tol:     # NaN fails too
                bad.append(name)
        return bad


@dataclass(frozen=True)
class RunConfig:
    preset: str
    nsteps: int | None = None
    periods: float | None = None
    grid: dict = field(default_factory=dict)
    variant: str | None = None
    fct: bool | None = None
    corrective_passes: int = 1
    ep: float | None = None
    precision: str = "f64"
    upwind_only: bool = False
    iout: int = 0
    decomposition: tuple = (1, 1, 1)
    workers: int = 1
    output: str = "output"
    dump_fields: bool = False
    reference: Reference | None = None

    def options(self, default_variant="gauge") -> MpdataOptions:
        return MpdataOptions(variant=self.variant or default_variant, fct=self.fct,
                             corrective_passes=self.corrective_passes, ep=self.ep,
                             precision=self.precision, upwind_only=self.upwind_only)

    def steps_for(self, steps_per_period: int) -> int:
        if self.nsteps is not None:
            return self.nsteps
        periods = 1.0 if self.periods is None else self.periods
        return max(1, int(round(periods * steps_per_period)))

    def with_overrides(self, **kw) -> "RunConfig":
        """Copy with the non-``None`` entries of ``kw`` replaced, re-validated."""
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        validate(cfg)
        return cfg


_KEYS = tuple(f.name for f in fields(RunConfig))


def _int(name, v, lo=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise ConfigError(f"{name} must be >= {lo}, got {v}")
    return v


def _bool(name, v):
    if not isinstance(v, bool):
        raise ConfigError(f"{name} must be true or false, got {v!r}")
    return v


def _number(name, v, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{name} must be positive, got {v}")
    return float(v)


def from_dict(raw: dict) -> RunConfig:
    """Build and validate a :class:`RunConfig` from parsed JSON."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    for key in raw:
        if key not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
    if "preset" not in raw:
        raise ConfigError("missing required key 'preset'")
    kw = dict(raw)
    if kw.get("reference") is not None:
        ref = kw["reference"]
        if not isinstance(ref, dict):
            raise ConfigError("reference must be an object with err0, linf and tol")
        for key in ref:
            if key not in ("err0", "linf", "tol"):
                raise ConfigError(f"unknown reference key {key!r}")
        missing = [k for k in ("err0", "linf", "tol") if k not in ref]
        if missing:
            raise ConfigError(f"reference is missing {', '.join(missing)}")
        kw["reference"] = Reference(_number("reference.err0", ref["err0"]),
                                    _number("reference.linf", ref["linf"]),
                                    _number("reference.tol", ref["tol"], positive=True))
    if "decomposition" in kw:
        d = kw["decomposition"]
        if not isinstance(d, (list, tuple)) or len(d) != 3:
            raise ConfigError(f"decomposition must be three integers, got {d!r}")
        kw["decomposition"] = tuple(_int("decomposition", v, 1) for v in d)
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.preset not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {cfg.preset!r}; choose from {', '.join(PRESET_NAMES)}")
    if cfg.nsteps is not None and cfg.periods is not None:
        raise ConfigError("give either nsteps or periods, not both")
    if cfg.nsteps is not None:
        _int("nsteps", cfg.nsteps, 1)
    if cfg.periods is not None:
        _number("periods", cfg.periods, positive=True)
    _int("iout", cfg.iout, 0)
    _int("workers", cfg.workers, 1)
    _int("corrective_passes", cfg.corrective_passes, 1)
    for name in ("upwind_only", "dump_fields"):
        _bool(name, getattr(cfg, name))
    if cfg.fct is not None:
        _bool("fct", cfg.fct)
    if cfg.ep is not None:
        _number("ep", cfg.ep, positive=True)
    if cfg.variant is not None and cfg.variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {', '.join(VARIANTS)}, got {cfg.variant!r}")
    if cfg.precision not in PRECISIONS:
        raise ConfigError(f"precision must be one of {', '.join(PRECISIONS)}, "
                          f"got {cfg.precision!r}")
    if not isinstance(cfg.output, str) or not cfg.output:
        raise ConfigError("output must be a non-empty path")
    if not isinstance(cfg.grid, dict):
        raise ConfigError("grid must be an object of preset overrides")
    allowed = GRID_KEYS[_family(cfg.preset)]
    for key, v in cfg.grid.items():
        if key not in allowed:
            raise ConfigError(f"unknown grid key {key!r} for preset {cfg.preset} "
                              f"(allowed: {', '.join(allowed)})")
        _number(f"grid.{key}", v)
    try:
        cfg.options(_default_variant(cfg.preset))
        shape = preset_shape(cfg.preset, **cfg.grid)
        # surfaces the divisibility and pole-split checks without building the preset
        decompose(Grid3(*shape, halo=2), *cfg.decomposition,
                  boundaries=preset_boundaries(cfg.preset))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _default_variant(preset):
    return "sphere" if preset.startswith("sphere") else "gauge"


def parse_config(path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(raw)
