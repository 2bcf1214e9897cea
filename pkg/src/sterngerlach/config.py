"""Flat ``key = value`` run configuration.

Lines starting with ``#`` are comments.  Unknown keys are rejected, and every
value is checked against the physical types before a run starts.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

from .coherence import JitterSpec
from .core import ApparatusGeometry, GaussianPacket, PhysParams, SpinWeights
from .errors import ConfigError
from .regime import ParameterPoint, ScanSettings, Thresholds
from .spectral import GridSpec, auto_grid

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class RunConfig:
    # physics
    mass: float = 1.0
    lam: float = 1.0
    epsilon: float = 0.5
    # packet
    x0: float = 0.0
    p0: float = 5.0
    sigma: float = 1.0
    # spin
    a: complex = _SQRT_HALF
    b: complex = _SQRT_HALF
    # apparatus; t_final defaults to the transit time l / v
    magnet_length: float = 10.0
    velocity: float = 5.0
    delta_p: float | None = None
    t_final: float | None = None
    # grid and stepping; None means automatic
    x_min: float | None = None
    x_max: float | None = None
    n: int | None = None
    dt: float | None = None
    snapshot_stride: int = 10
    # ensemble
    jitter_delta: float = 0.01
    jitter_target: str = "time"
    n_samples: int = 10000
    n_times: int = 41
    seed: int = 0
    # validation
    tol_l2: float = 1e-6
    tol_moments: float = 1e-6
    tol_overlap: float = 1e-6
    max_refinements: int = 4
    # scan
    b_hi: float = 10.0
    b_lo: float = 0.1
    s_min: float = 2.0
    s_floor: float = 0.25
    v_max: float = 0.05
    scan_samples: int = 2000
    workers: int = 1
    sweep: str = ""
    # output
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.format!r}")
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride: must be >= 1")
        if self.n_times < 1:
            raise ConfigError("n_times: must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt: must be > 0")
        if self.t_final is not None and self.t_final < 0:
            raise ConfigError("t_final: must be >= 0")
        grid_keys = (self.x_min, self.x_max, self.n)
        if any(v is not None for v in grid_keys) and any(v is None for v in grid_keys):
            raise ConfigError("x_min, x_max, n: give all three grid keys or none")
        # build every domain object once so invariant violations surface here
        for name, build in (("mass/lam/epsilon", self.params), ("x0/p0/sigma", self.packet),
                            ("a/b", self.spins), ("magnet_length/velocity/delta_p", self.geometry),
                            ("jitter_delta/jitter_target", self.jitter)):
            try:
                build()
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from None
        if self.x_min is not None:
            try:
                self.grid()
            except ValueError as exc:
                raise ConfigError(f"x_min/x_max/n: {exc}") from None

    # -- domain objects ------------------------------------------------------

    def params(self) -> PhysParams:
        return PhysParams(self.mass, self.lam, self.epsilon)

    def packet(self) -> GaussianPacket:
        return GaussianPacket(self.x0, self.p0, self.sigma)

    def spins(self) -> SpinWeights:
        return SpinWeights(self.a, self.b)

    def geometry(self) -> ApparatusGeometry:
        return ApparatusGeometry.for_packet(self.magnet_length, self.velocity, self.packet(),
                                            self.delta_p)

    def jitter(self) -> JitterSpec:
        return JitterSpec(self.jitter_delta, self.jitter_target)

    def thresholds(self) -> Thresholds:
        return Thresholds(self.b_hi, self.b_lo, self.s_min, self.s_floor, self.v_max)

    def scan_settings(self) -> ScanSettings:
        return ScanSettings(self.thresholds(), self.jitter(), self.scan_samples, self.seed)

    def point(self) -> ParameterPoint:
        return ParameterPoint(self.epsilon, self.sigma, self.mass, self.lam, self.magnet_length,
                              self.velocity, self.p0, self.x0, self.delta_p)

    @property
    def final_time(self) -> float:
        return self.geometry().transit_time if self.t_final is None else self.t_final

    @property
    def time_step(self) -> float:
        if self.dt is not None:
            return self.dt
        return min(0.01, 0.01 * self.mass * self.sigma ** 2)

    def grid(self) -> GridSpec:
        if self.x_min is None:
            return auto_grid(self.packet(), self.params(), self.final_time)
        return GridSpec(self.x_min, self.x_max, self.n)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # -- text form -----------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_format_value(v)}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _format_value(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        return repr(v).strip("()")
    return repr(v) if isinstance(v, float) else str(v)


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key].replace(" | None", "")
    raw = raw.strip()
    if "None" in _FIELD_TYPES[key] and raw.lower() in ("", "none", "auto"):
        return None
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "complex":
            return complex(raw.replace(" ", ""))
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None


def parse_pairs(pairs: Iterable[tuple[str, str]]) -> dict:
    out = {}
    for key, raw in pairs:
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _convert(key, raw)
    return out


def parse_text(text: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        pairs.append((key, value))
    return pairs


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = item.split("=", 1)
    return key, value


def load_config(path: str | Path | None = None, overrides: Mapping[str, str] | Iterable[str] = ()) -> RunConfig:
    """Read ``path`` (if any), then apply ``key=value`` overrides on top."""
    values = {}
    if path is not None:
        values.update(parse_pairs(parse_text(Path(path).read_text(encoding="utf-8"))))
    if isinstance(overrides, Mapping):
        items = list(overrides.items())
    else:
        items = [parse_override(s) for s in overrides]
    values.update(parse_pairs(items))
    return RunConfig(**values)
