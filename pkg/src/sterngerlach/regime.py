"""Classify apparatus settings as measuring, transition or non-resolving."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .core import ApparatusGeometry, Branch, GaussianPacket, PhysParams, SpinWeights, bohm_number
from .coherence import JitterSpec, scrambling_ensemble
from .observables import ehrenfest_formula, fluctuation_formula

MEASURING = "measuring"
TRANSITION = "transition"
NON_RESOLVING = "non-resolving"
LABELS = (MEASURING, TRANSITION, NON_RESOLVING)


@dataclass(frozen=True)
class Thresholds:
    """Classifier cut-offs.  These are policy choices, not physical constants."""

    b_hi: float = 10.0
    b_lo: float = 0.1
    s_min: float = 2.0
    s_floor: float = 0.25
    v_max: float = 0.05


@dataclass(frozen=True)
class ParameterPoint:
    epsilon: float = 0.5
    sigma: float = 1.0
    mass: float = 1.0
    lam: float = 1.0
    magnet_length: float = 10.0
    velocity: float = 5.0
    p0: float = 0.0
    x0: float = 0.0
    delta_p: float | None = None

    def packet(self) -> GaussianPacket:
        return GaussianPacket(self.x0, self.p0, self.sigma)

    def params(self) -> PhysParams:
        return PhysParams(self.mass, self.lam, self.epsilon)

    def geometry(self) -> ApparatusGeometry:
        return ApparatusGeometry.for_packet(self.magnet_length, self.velocity, self.packet(),
                                            self.delta_p)


@dataclass(frozen=True)
class RegimeReport:
    point: ParameterPoint
    bohm_number: float = math.nan
    exit_time: float = math.nan
    separation_ratio: float = math.nan
    visibility: float = math.nan
    label: str = ""
    error: str = ""


@dataclass(frozen=True)
class ScanSettings:
    thresholds: Thresholds = field(default_factory=Thresholds)
    jitter: JitterSpec = field(default_factory=JitterSpec)
    n_samples: int = 2000
    seed: int = 0


def classify(B: float, S: float, V: float, thresholds: Thresholds = Thresholds()) -> str:
    th = thresholds
    if B >= th.b_hi and S >= th.s_min and V <= th.v_max:
        return MEASURING
    if B <= th.b_lo or S < th.s_floor:
        return NON_RESOLVING
    return TRANSITION


def separation_ratio(packet: GaussianPacket, params: PhysParams, t: float) -> float:
    """|<x>_up - <x>_down| / (2 sqrt(Var x)) at time t."""
    xu, _ = ehrenfest_formula(packet, params, Branch.UP, t)
    xd, _ = ehrenfest_formula(packet, params, Branch.DOWN, t)
    var_x, _ = fluctuation_formula(packet, params, t)
    return abs(xu - xd) / (2.0 * math.sqrt(var_x))


def evaluate_point(point: ParameterPoint, settings: ScanSettings = ScanSettings()) -> RegimeReport:
    packet, params, geom = point.packet(), point.params(), point.geometry()
    t_exit = geom.transit_time
    B = bohm_number(params, geom)
    S = separation_ratio(packet, params, t_exit)
    ens = scrambling_ensemble(packet, params, SpinWeights.equal(), t_exit, settings.jitter,
                              settings.n_samples, settings.seed)
    label = classify(B, S, ens.visibility, settings.thresholds)
    return RegimeReport(point, B, t_exit, S, ens.visibility, label)


def _safe_evaluate(point: ParameterPoint, settings: ScanSettings) -> RegimeReport:
    try:
        return evaluate_point(point, settings)
    except (ValueError, ArithmeticError) as exc:
        return RegimeReport(point, error=f"{type(exc).__name__}: {exc}")


def scan(points: Sequence[ParameterPoint], settings: ScanSettings = ScanSettings(),
         workers: int = 1) -> list[RegimeReport]:
    """Evaluate every point; output order is input order.

    Failing points yield a report with ``error`` set and NaN fields.
    """
    if not points:
        raise ValueError("scan needs at least one parameter point")
    if workers <= 1:
        return [_safe_evaluate(p, settings) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: _safe_evaluate(p, settings), points))


def report_row(rep: RegimeReport, thresholds: Thresholds) -> dict:
    row = {k: v for k, v in asdict(rep.point).items()}
    row.update(
        bohm_number=rep.bohm_number,
        exit_time=rep.exit_time,
        separation_ratio=rep.separation_ratio,
        visibility=rep.visibility,
        label=rep.label,
        error=rep.error,
    )
    row.update(asdict(thresholds))
    return row
