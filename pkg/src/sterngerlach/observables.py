"""Means, variances and relative fluctuations per spin branch."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import evolve_branch_analytic
from .core import BRANCHES, Branch, GaussianPacket, PhysParams
from .errors import EmptyBranch, UndefinedAtZeroMean
from .spectral import SpinorGridState

EMPTY_BRANCH_NORM = 1e-12
ZERO_MEAN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Per-branch moments sampled at ``times``.

    Moment arrays have shape (len(times), 2) with column 0 = up, 1 = down.
    A branch that carries no weight has NaN moments and zero norm.
    """

    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    norm: np.ndarray
    source: str

    def column(self, branch: Branch) -> int:
        return 0 if Branch(branch) is Branch.UP else 1

    @property
    def rel_fluct(self) -> np.ndarray:
        """Var(x) / <x>^2, NaN where |<x>| is below ZERO_MEAN_TOL."""
        mx = self.mean_x
        with np.errstate(divide="ignore", invalid="ignore"):
            r = self.var_x / mx ** 2
        return np.where(np.abs(mx) < ZERO_MEAN_TOL, np.nan, r)

    def index_of(self, t: float) -> int:
        idx = np.flatnonzero(np.abs(self.times - t) <= 1e-12 * max(1.0, abs(t)))
        if idx.size == 0:
            raise KeyError(f"time {t} not in series")
        return int(idx[0])


def moments_from_grid(state: SpinorGridState, branch: Branch) -> tuple[float, float, float, float]:
    """(<x>, <p>, Var x, Var p) of one branch, normalized by the branch norm.

    Position moments by quadrature on the grid; momentum moments by
    quadrature of |FFT psi|^2 on the dual grid.
    """
    psi = state.amplitudes(branch)
    grid = state.grid
    rho = np.abs(psi) ** 2
    nrm = rho.sum() * grid.dx
    if nrm < EMPTY_BRANCH_NORM:
        raise EmptyBranch(f"{Branch(branch).value} branch norm {nrm:.3g} is below threshold")
    x = grid.x
    rho = rho / rho.sum()
    mx = float(np.dot(rho, x))
    vx = float(np.dot(rho, (x - mx) ** 2))

    p = grid.p
    rho_p = np.abs(np.fft.fft(psi)) ** 2
    rho_p = rho_p / rho_p.sum()
    mp = float(np.dot(rho_p, p))
    vp = float(np.dot(rho_p, (p - mp) ** 2))
    return mx, mp, vx, vp


def series_from_states(states: Sequence[SpinorGridState]) -> ObservableSeries:
    n = len(states)
    out = {k: np.full((n, 2), np.nan) for k in ("mean_x", "mean_p", "var_x", "var_p")}
    norm = np.zeros((n, 2))
    for i, st in enumerate(states):
        for j, br in enumerate(BRANCHES):
            norm[i, j] = st.branch_norm(br)
            try:
                mx, mp, vx, vp = moments_from_grid(st, br)
            except EmptyBranch:
                continue
            out["mean_x"][i, j], out["mean_p"][i, j] = mx, mp
            out["var_x"][i, j], out["var_p"][i, j] = vx, vp
    times = np.array([st.t for st in states])
    return ObservableSeries(times, norm=norm, source="spectral", **out)


def series_from_analytic(packet: GaussianPacket, params: PhysParams, times,
                         weights=(1.0, 1.0)) -> ObservableSeries:
    """Moments of the closed-form branches; ``weights`` are |a|^2, |b|^2."""
    times = np.asarray(times, dtype=float)
    n = len(times)
    cols = {k: np.full((n, 2), np.nan) for k in ("mean_x", "mean_p", "var_x", "var_p")}
    norm = np.zeros((n, 2))
    for i, t in enumerate(times):
        for j, br in enumerate(BRANCHES):
            if weights[j] < EMPTY_BRANCH_NORM:
                continue
            b = evolve_branch_analytic(packet, br, params, t)
            cols["mean_x"][i, j], cols["mean_p"][i, j] = b.mean_x(), b.mean_p()
            cols["var_x"][i, j], cols["var_p"][i, j] = b.var_x(), b.var_p()
            norm[i, j] = weights[j] * b.norm()
    return ObservableSeries(times, norm=norm, source="analytic", **cols)


def ehrenfest_formula(packet: GaussianPacket, params: PhysParams, branch: Branch,
                      t: float) -> tuple[float, float]:
    """Classical trajectory: up is pushed towards -x, down towards +x."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    s = Branch(branch).sign
    m, eps = params.mass, params.epsilon
    mean_x = packet.x0 + packet.p0 * t / m - s * eps * t * t / (2 * m)
    mean_p = packet.p0 - s * eps * t
    return mean_x, mean_p


def fluctuation_formula(packet: GaussianPacket, params: PhysParams, t: float) -> tuple[float, float]:
    """Free-packet spreading: Var x grows, Var p = 1/(2 sigma^2) stays put."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    s, m = packet.sigma, params.mass
    var_x = s * s / 2 + t * t / (2 * m * m * s * s)
    var_p = 1.0 / (2 * s * s)
    return var_x, var_p


def second_moment_form_var_p(packet: GaussianPacket) -> float:
    """The momentum fluctuation as printed, p0^2 + 1/(2 sigma^2).

    This is <p^2> at t = 0 rather than the variance; kept only so that
    validation output can show the disagreement.
    """
    return packet.p0 ** 2 + 1.0 / (2 * packet.sigma ** 2)


def relative_fluctuation(series: ObservableSeries, t: float, branch: Branch = Branch.UP) -> float:
    i = series.index_of(t)
    j = series.column(branch)
    mx = series.mean_x[i, j]
    if not abs(mx) >= ZERO_MEAN_TOL:
        raise UndefinedAtZeroMean(f"<x> = {mx!r} at t={t}; relative fluctuation undefined")
    return float(series.var_x[i, j] / mx ** 2)


def relative_fluctuation_exact(packet: GaussianPacket, params: PhysParams, t: float,
                               branch: Branch = Branch.UP) -> float:
    mx, _ = ehrenfest_formula(packet, params, branch, t)
    if not abs(mx) >= ZERO_MEAN_TOL:
        raise UndefinedAtZeroMean(f"<x> = {mx!r} at t={t}; relative fluctuation undefined")
    vx, _ = fluctuation_formula(packet, params, t)
    return vx / mx ** 2


def relative_fluctuation_asymptote(packet: GaussianPacket, params: PhysParams, t: float) -> float:
    """Large-t form 2 / (sigma^2 eps^2 t^2) for x0 = p0 = 0."""
    return 2.0 / (packet.sigma * params.epsilon * t) ** 2


def ehrenfest_residual(series: ObservableSeries, packet: GaussianPacket,
                       params: PhysParams) -> float:
    """Largest |measured - classical| over all samples, branches, and x and p."""
    if len(series.times) == 0:
        raise ValueError("empty series")
    worst = 0.0
    for i, t in enumerate(series.times):
        for j, br in enumerate(BRANCHES):
            if math.isnan(series.mean_x[i, j]):
                continue
            fx, fp = ehrenfest_formula(packet, params, br, t)
            worst = max(worst, abs(series.mean_x[i, j] - fx), abs(series.mean_p[i, j] - fp))
    return worst
