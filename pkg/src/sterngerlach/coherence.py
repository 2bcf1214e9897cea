"""Spin coherence of the entangled state and its loss.

Tracing out position from a psi_up |up> + b psi_down |down> leaves the spin
density matrix

    [[|a|^2,            a conj(b) conj(O)],
     [conj(a) b O,      |b|^2           ]]

with O(t) = integral conj(psi_up) psi_down dx.  The mixed (diagonal) form is
indistinguishable from the pure state in every position measurement, so the
coherence is tracked through O, <sigma_x> and the off-diagonal weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import EvolvedGaussianBranch, branch_overlap_analytic, same_setup, gaussian_overlap
from .core import GaussianPacket, PhysParams, SpinWeights
from .spectral import BranchWave, SpinorGridState, check_same_grid

JITTER_TARGETS = ("time", "velocity", "epsilon")
TRUNCATE_SIGMAS = 4.0


def overlap(up, down) -> complex:
    """O = integral conj(up) down dx for two branches.

    Accepts two :class:`EvolvedGaussianBranch` (closed form) or two
    :class:`BranchWave` (trapezoidal quadrature of the normalized branches).
    """
    if isinstance(up, EvolvedGaussianBranch) and isinstance(down, EvolvedGaussianBranch):
        same_setup(up, down)
        return gaussian_overlap(up, down)
    if isinstance(up, BranchWave) and isinstance(down, BranchWave):
        check_same_grid(up.grid, down.grid)
        return complex(np.sum(np.conj(up.normalized()) * down.normalized()) * up.grid.dx)
    raise TypeError("overlap needs two analytic branches or two grid branches")


def overlap_grid(state: SpinorGridState) -> complex:
    return overlap(state.branch_wave("up"), state.branch_wave("down"))


def sigma_x_expectation(spins: SpinWeights, O: complex) -> float:
    if abs(O) > 1 + 1e-12:
        raise ValueError(f"|O| = {abs(O)!r} exceeds 1")
    return 2.0 * (spins.a.conjugate() * spins.b * O).real


def sigma_x_grid(state: SpinorGridState) -> float:
    """<psi| sigma_x (x) 1 |psi> evaluated directly on the grid."""
    return float(2.0 * np.sum(np.conj(state.up) * state.down).real * state.grid.dx)


def reduced_spin_density(state: SpinorGridState) -> np.ndarray:
    dx = state.grid.dx
    u, d = state.up, state.down
    rho = np.empty((2, 2), dtype=complex)
    rho[0, 0] = np.sum(np.abs(u) ** 2) * dx
    rho[1, 1] = np.sum(np.abs(d) ** 2) * dx
    rho[0, 1] = np.sum(u * np.conj(d)) * dx
    rho[1, 0] = np.conj(rho[0, 1])
    return rho


def full_vs_mixed_distinguishability(state: SpinorGridState, spins: SpinWeights | None = None) -> float:
    """Trace distance between the reduced spin states of the pure and mixed forms.

    Equals the off-diagonal weight |a| |b| |O(t)|; 0.5 is maximal coherence
    and 0 means the mixed form reproduces every spin statistic.  ``spins`` is
    accepted for symmetry with the analytic path; the amplitudes already
    carry a and b.
    """
    return float(abs(reduced_spin_density(state)[0, 1]))


def pure_position_marginal(state: SpinorGridState) -> np.ndarray:
    """Diagonal rho(x, x) of the full pure state, spin traced out."""
    psi = np.stack([state.up, state.down], axis=1)  # (n, 2) spinor per node
    rho_spin = psi[:, :, None] * np.conj(psi[:, None, :])
    return np.trace(rho_spin, axis1=1, axis2=2).real


def mixed_position_marginal(state: SpinorGridState, spins: SpinWeights) -> np.ndarray:
    """Diagonal of |a|^2 |psi_up><psi_up| + |b|^2 |psi_down><psi_down|."""
    out = np.zeros(state.grid.n)
    for amp, arr in ((spins.a, state.up), (spins.b, state.down)):
        if abs(amp) == 0:
            continue
        psi = arr / amp
        out += abs(amp) ** 2 * np.abs(psi) ** 2
    return out


def combined_std(packet: GaussianPacket, params: PhysParams, t: float) -> float:
    """sqrt(Var_x_up + Var_x_down); the two branch variances are equal."""
    s, m = packet.sigma, params.mass
    return math.sqrt(2.0 * (s * s / 2 + t * t / (2 * m * m * s * s)))


# -- vectorized closed-form overlap ------------------------------------------

def overlap_vec(packet: GaussianPacket, mass: float, lam, eps, t) -> np.ndarray:
    """Closed-form O(t) broadcast over arrays of lam, eps and t."""
    lam, eps, t = np.broadcast_arrays(np.asarray(lam, float), np.asarray(eps, float),
                                      np.asarray(t, float))
    s, x0, p0 = packet.sigma, packet.x0, packet.p0
    w = s * s + 1j * t / mass
    A = 1.0 / (2.0 * w)
    shift = eps * t * t / (2 * mass)
    log_pref = (0.5 * math.log(s / math.sqrt(math.pi)) - 0.5 * np.log(w)
                + 1j * p0 * x0 - 0.5 * (p0 * s) ** 2)
    cubic = -eps * eps * t ** 3 / (6 * mass)

    def quad(sign):
        mu = x0 - sign * shift + 1j * p0 * s * s
        B = mu / w - 1j * sign * eps * t
        C = -mu * mu / (2 * w) + log_pref + 1j * (-sign * lam * t + cubic)
        return B, C

    Bu, Cu = quad(1)
    Bd, Cd = quad(-1)
    a = np.conj(A) + A
    b = np.conj(Bu) + Bd
    return np.sqrt(np.pi / a) * np.exp(b * b / (4 * a) + np.conj(Cu) + Cd)


# -- phase scrambling ---------------------------------------------------------

@dataclass(frozen=True)
class JitterSpec:
    """Fractional Gaussian jitter of width ``delta`` on one shot parameter.

    ``target`` is "time" (transit time), "velocity" (so t = t_nominal / (1 + delta z))
    or "epsilon" (field gradient at fixed t).  Draws are truncated at
    +/- 4 delta and must keep the jittered quantity positive.
    """

    delta: float = 0.01
    target: str = "time"

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"jitter width must be finite and >= 0, got {self.delta!r}")
        if self.target not in JITTER_TARGETS:
            raise ValueError(f"jitter target must be one of {JITTER_TARGETS}, got {self.target!r}")


@dataclass(frozen=True)
class EnsembleResult:
    mean_overlap: complex
    visibility: float
    std_error: float
    max_modulus: float
    n_samples: int
    seed: int


def _truncated_normal(rng: np.random.Generator, n: int, lower: float) -> np.ndarray:
    """Standard normals restricted to [max(lower, -4), 4] by resampling."""
    lo = max(lower, -TRUNCATE_SIGMAS)
    z = rng.standard_normal(n)
    bad = (z < lo) | (z > TRUNCATE_SIGMAS)
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = (z < lo) | (z > TRUNCATE_SIGMAS)
    return z


def jitter_samples(jitter: JitterSpec, n_samples: int, seed: int) -> np.ndarray:
    """Fractional deviations delta * z_k, identical z_k for a given seed.

    Sharing z across delta values makes visibility comparisons between jitter
    widths use common random numbers.
    """
    rng = np.random.default_rng(seed)
    if jitter.delta == 0:
        return np.zeros(n_samples)
    # 1 + delta z must stay > 0
    z = _truncated_normal(rng, n_samples, lower=-1.0 / jitter.delta + 1e-12)
    return jitter.delta * z


def scrambling_ensemble(packet: GaussianPacket, params: PhysParams, spins: SpinWeights,
                        t_nominal: float, jitter: JitterSpec, n_samples: int,
                        seed: int) -> EnsembleResult:
    """Average the closed-form overlap over shot-to-shot jitter.

    ``spins`` does not enter |O|; it is kept so callers can pair the result
    with the sigma_x amplitude 2 |a||b|.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples!r}")
    if t_nominal < 0:
        raise ValueError(f"t_nominal must be >= 0, got {t_nominal!r}")
    frac = jitter_samples(jitter, n_samples, seed)
    t = np.full(n_samples, float(t_nominal))
    eps = np.full(n_samples, params.epsilon)
    if jitter.target == "time":
        t = t * (1.0 + frac)
    elif jitter.target == "velocity":
        t = t / (1.0 + frac)
    else:
        eps = eps * (1.0 + frac)
    if not frac.any():
        # degenerate ensemble: reproduce the single-shot value bit for bit
        O = np.full(n_samples, branch_overlap_analytic(packet, params, float(t_nominal)))
        mean = complex(O[0])
    else:
        O = overlap_vec(packet, params.mass, params.lam, eps, t)
        mean = complex(O.mean())
    se = math.sqrt(float(np.mean(np.abs(O - mean) ** 2)) / (n_samples - 1))
    return EnsembleResult(mean, abs(mean), se, float(np.abs(O).max()), n_samples, seed)


# -- series -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoherenceSeries:
    times: np.ndarray
    overlap: np.ndarray
    sigma_x: np.ndarray
    distinguishability: np.ndarray
    ensemble_visibility: np.ndarray
    n_samples: int
    seed: int

    @property
    def overlap_mod(self) -> np.ndarray:
        return np.abs(self.overlap)

    @property
    def overlap_phase(self) -> np.ndarray:
        return np.angle(self.overlap)


def coherence_from_states(states: Sequence[SpinorGridState], spins: SpinWeights,
                          packet: GaussianPacket, params: PhysParams, jitter: JitterSpec,
                          n_samples: int, seed: int) -> CoherenceSeries:
    """Grid overlap and sigma_x per snapshot, ensemble visibility in closed form.

    If a branch is empty the overlap is undefined on the grid; the analytic
    overlap is used instead (sigma_x and distinguishability are 0 anyway).
    """
    times, O, sx, dist, vis = [], [], [], [], []
    for st in states:
        times.append(st.t)
        if spins.a == 0 or spins.b == 0:
            O.append(branch_overlap_analytic(packet, params, st.t))
        else:
            O.append(overlap_grid(st))
        sx.append(sigma_x_grid(st))
        dist.append(full_vs_mixed_distinguishability(st, spins))
        vis.append(scrambling_ensemble(packet, params, spins, st.t, jitter, n_samples, seed).visibility)
    return CoherenceSeries(np.array(times), np.array(O), np.array(sx), np.array(dist),
                           np.array(vis), n_samples, seed)


def coherence_analytic(packet: GaussianPacket, params: PhysParams, spins: SpinWeights,
                       times, jitter: JitterSpec, n_samples: int, seed: int) -> CoherenceSeries:
    times = np.asarray(times, dtype=float)
    O = overlap_vec(packet, params.mass, params.lam, params.epsilon, times)
    sx = np.array([sigma_x_expectation(spins, o) for o in O])
    dist = abs(spins.a) * abs(spins.b) * np.abs(O)
    vis = np.array([scrambling_ensemble(packet, params, spins, t, jitter, n_samples, seed).visibility
                    for t in times])
    return CoherenceSeries(times, O, sx, dist, vis, n_samples, seed)
