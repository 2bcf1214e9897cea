"""Physical parameters, initial states and the Bohm number.

Natural units throughout: hbar = 1.  The Hamiltonian is

    H = p^2 / 2m + lam * sigma_z + epsilon * x * sigma_z

so each sigma_z branch sees a linear potential s * (lam + epsilon * x),
with s = +1 for spin up and s = -1 for spin down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import GridTooCoarse, GridTooNarrow

if TYPE_CHECKING:
    from .spectral import GridSpec, SpinorGridState

HBAR = 1.0

# Probability mass allowed outside a grid before it counts as truncated.
MASS_OUTSIDE_TOL = 1e-12
# Minimum number of grid points per initial width sigma.
POINTS_PER_SIGMA = 8


class Branch(str, Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        """+1 for up, -1 for down: the sign of the potential the branch feels."""
        return 1 if self is Branch.UP else -1


BRANCHES = (Branch.UP, Branch.DOWN)


@dataclass(frozen=True)
class PhysParams:
    mass: float = 1.0
    lam: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be finite and > 0, got {self.mass!r}")
        if not math.isfinite(self.lam):
            raise ValueError(f"lam must be finite, got {self.lam!r}")
        if not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be finite, got {self.epsilon!r}")

    @property
    def hbar(self) -> float:
        return HBAR


@dataclass(frozen=True)
class GaussianPacket:
    """psi(x, 0) = (sigma sqrt(pi))^(-1/2) exp(i p0 x - (x - x0)^2 / (2 sigma^2)).

    With this convention Var(x) = sigma^2 / 2 and Var(p) = 1 / (2 sigma^2).
    """

    x0: float = 0.0
    p0: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")
        if not (math.isfinite(self.x0) and math.isfinite(self.p0)):
            raise ValueError("x0 and p0 must be finite")

    @property
    def position_std(self) -> float:
        return self.sigma / math.sqrt(2.0)

    @property
    def momentum_std(self) -> float:
        return 1.0 / (math.sqrt(2.0) * self.sigma)

    def wavefunction(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = self.sigma
        norm = 1.0 / math.sqrt(s * math.sqrt(math.pi))
        return norm * np.exp(1j * self.p0 * x - (x - self.x0) ** 2 / (2.0 * s * s))


@dataclass(frozen=True)
class SpinWeights:
    a: complex = 1.0
    b: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        total = abs(self.a) ** 2 + abs(self.b) ** 2
        if not abs(total - 1.0) <= 1e-12:
            raise ValueError(f"|a|^2 + |b|^2 must be 1 within 1e-12, got {total!r}")

    @classmethod
    def equal(cls) -> "SpinWeights":
        r = math.sqrt(0.5)
        return cls(r, r)

    def amplitude(self, branch: Branch) -> complex:
        return self.a if Branch(branch) is Branch.UP else self.b


@dataclass(frozen=True)
class ApparatusGeometry:
    """Magnet of length ``magnet_length`` crossed at speed ``velocity``.

    ``delta_p`` is the momentum spread entering the Bohm number.  Use
    :meth:`for_packet` to take it as the initial momentum standard deviation.
    """

    magnet_length: float
    velocity: float
    delta_p: float

    def __post_init__(self):
        for name in ("magnet_length", "velocity", "delta_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def for_packet(cls, magnet_length: float, velocity: float, packet: GaussianPacket,
                   delta_p: float | None = None) -> "ApparatusGeometry":
        dp = packet.momentum_std if delta_p is None else delta_p
        return cls(magnet_length, velocity, dp)

    @property
    def transit_time(self) -> float:
        return self.magnet_length / self.velocity


def bohm_number(params: PhysParams, geom: ApparatusGeometry) -> float:
    """B = |epsilon| * dt / dp with dt = l / v.

    The sign of epsilon only decides which branch is deflected which way,
    so the magnitude is used.
    """
    return abs(params.epsilon) * geom.transit_time / geom.delta_p


def gaussian_mass_outside(mean: float, std: float, lo: float, hi: float) -> float:
    """Probability of a normal(mean, std) variable falling outside [lo, hi]."""
    from scipy.special import ndtr

    return float(ndtr((lo - mean) / std) + ndtr((mean - hi) / std))


def check_grid_for_packet(packet: GaussianPacket, grid: "GridSpec") -> None:
    s = packet.sigma
    if s / grid.dx < POINTS_PER_SIGMA:
        raise GridTooCoarse(
            f"sigma={s} is resolved by {s / grid.dx:.2f} points; need >= {POINTS_PER_SIGMA}")
    # momentum content of the packet must sit well inside the Nyquist band
    p_needed = abs(packet.p0) + 10.0 * packet.momentum_std
    if p_needed > grid.p_max:
        raise GridTooCoarse(
            f"momentum content up to {p_needed:.3g} exceeds grid Nyquist {grid.p_max:.3g}")
    if packet.x0 - 8 * s < grid.x_min or packet.x0 + 8 * s > grid.x_max:
        raise GridTooNarrow(
            f"grid [{grid.x_min}, {grid.x_max}] does not cover x0 +/- 8 sigma")
    outside = gaussian_mass_outside(packet.x0, packet.position_std, grid.x_min, grid.x_max)
    if outside > MASS_OUTSIDE_TOL:
        raise GridTooNarrow(f"initial mass outside grid {outside:.3g} > {MASS_OUTSIDE_TOL}")


def make_initial_state(packet: GaussianPacket, spins: SpinWeights,
                       grid: "GridSpec") -> "SpinorGridState":
    """Sample a * psi(x,0) |up> + b * psi(x,0) |down> on ``grid`` at t = 0."""
    from .spectral import SpinorGridState

    check_grid_for_packet(packet, grid)
    psi = packet.wavefunction(grid.x)
    return SpinorGridState(grid, spins.a * psi, spins.b * psi, 0.0)
