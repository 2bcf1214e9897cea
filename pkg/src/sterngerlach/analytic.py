"""Closed-form evolution of a Gaussian packet in a branch potential s (lam + eps x).

With f = s * eps, a free solution phi(x, t) maps to a solution under the
linear potential through

    psi(x, t) = exp(-i s lam t) exp(-i f t x - i f^2 t^3 / 6m) phi(x + f t^2 / 2m, t).

The free Gaussian stays Gaussian with complex width w(t) = sigma^2 + i t / m.
Each evolved branch is therefore exp(g(x)) with g quadratic,

    g(x) = -A x^2 + B x + C,

and all moments, norms and overlaps follow from Gaussian integrals over
(A, B, C).  The result agrees term by term with the closed form printed for
this model; the prefactors exp(i p0 x0) exp(-p0^2 sigma^2 / 2) come from
completing the square around the complex center x0 + i p0 sigma^2.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .core import MASS_OUTSIDE_TOL, Branch, GaussianPacket, PhysParams, gaussian_mass_outside
from .errors import GridMismatch, GridTooNarrow


@dataclass(frozen=True)
class EvolvedGaussianBranch:
    branch: Branch
    packet: GaussianPacket
    params: PhysParams
    t: float

    @property
    def sign(self) -> int:
        return Branch(self.branch).sign

    @property
    def width(self) -> complex:
        """Complex width parameter sigma^2 + i t / m."""
        return complex(self.packet.sigma ** 2, self.t / self.params.mass)

    @property
    def center(self) -> complex:
        """Complex center: classical position shift plus i p0 sigma^2."""
        p, m, t = self.packet, self.params.mass, self.t
        shift = self.sign * self.params.epsilon * t * t / (2 * m)
        return complex(p.x0 - shift, p.p0 * p.sigma ** 2)

    @property
    def cubic_phase(self) -> float:
        eps, m, t = self.params.epsilon, self.params.mass, self.t
        return -eps * eps * t ** 3 / (6 * m)

    @property
    def log_prefactor(self) -> complex:
        """log of sqrt(sigma / sqrt(pi)) w^(-1/2) exp(i p0 x0 - p0^2 sigma^2 / 2)."""
        p = self.packet
        s = p.sigma
        return (0.5 * math.log(s / math.sqrt(math.pi)) - 0.5 * cmath.log(self.width)
                + 1j * p.p0 * p.x0 - 0.5 * (p.p0 * s) ** 2)

    def quadratic(self) -> tuple[complex, complex, complex]:
        """(A, B, C) with psi(x) = exp(-A x^2 + B x + C)."""
        w, mu = self.width, self.center
        kick = self.sign * self.params.epsilon * self.t
        A = 1.0 / (2.0 * w)
        B = mu / w - 1j * kick
        const_phase = -self.sign * self.params.lam * self.t + self.cubic_phase
        C = -mu * mu / (2.0 * w) + self.log_prefactor + 1j * const_phase
        return A, B, C

    def __call__(self, x) -> np.ndarray:
        A, B, C = self.quadratic()
        x = np.asarray(x, dtype=float)
        return np.exp(-A * x * x + B * x + C)

    # closed-form moments of exp(g), g = -A x^2 + B x + C

    def norm(self) -> float:
        A, B, C = self.quadratic()
        ra = A.real
        return math.sqrt(math.pi / (2 * ra)) * math.exp(B.real ** 2 / (2 * ra) + 2 * C.real)

    def mean_x(self) -> float:
        A, B, _ = self.quadratic()
        return B.real / (2 * A.real)

    def var_x(self) -> float:
        A, _, _ = self.quadratic()
        return 1.0 / (4 * A.real)

    def mean_p(self) -> float:
        # <p> = <Im g'(x)>, and Im g' is linear in x
        A, B, _ = self.quadratic()
        return (-2 * A * self.mean_x() + B).imag

    def var_p(self) -> float:
        A, _, _ = self.quadratic()
        return 1.0 / (1.0 / A).real


def evolve_branch_analytic(packet: GaussianPacket, branch: Branch, params: PhysParams,
                           t: float) -> EvolvedGaussianBranch:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    return EvolvedGaussianBranch(Branch(branch), packet, params, float(t))


def sample_on_grid(branch: EvolvedGaussianBranch, grid) -> np.ndarray:
    outside = gaussian_mass_outside(branch.mean_x(), math.sqrt(branch.var_x()),
                                    grid.x_min, grid.x_max)
    if outside > MASS_OUTSIDE_TOL:
        raise GridTooNarrow(
            f"{outside:.3g} of the {branch.branch.value} branch lies outside "
            f"[{grid.x_min}, {grid.x_max}]")
    return branch(grid.x)


def gaussian_overlap(f: EvolvedGaussianBranch, g: EvolvedGaussianBranch) -> complex:
    """<f|g> = integral conj(f) g dx for two quadratic-exponent Gaussians."""
    Af, Bf, Cf = f.quadratic()
    Ag, Bg, Cg = g.quadratic()
    a = Af.conjugate() + Ag
    b = Bf.conjugate() + Bg
    return cmath.sqrt(math.pi / a) * cmath.exp(b * b / (4 * a) + Cf.conjugate() + Cg)


def branch_overlap_analytic(packet: GaussianPacket, params: PhysParams, t: float) -> complex:
    """O(t) = integral conj(psi_up) psi_down dx."""
    up = evolve_branch_analytic(packet, Branch.UP, params, t)
    down = evolve_branch_analytic(packet, Branch.DOWN, params, t)
    return gaussian_overlap(up, down)


def overlap_modulus(packet: GaussianPacket, params: PhysParams, t: float) -> float:
    """|O(t)| from the covariance of the free Gaussian.

    The branches are the same Gaussian state displaced by dx = eps t^2 / m in
    position and dp = 2 eps t in momentum, so
    |O| = exp(-(Var_p dx^2 - 2 Cov dx dp + Var_x dp^2) / 2)
        = exp(-sigma^2 eps^2 t^2 - eps^2 t^4 / (4 m^2 sigma^2)).
    """
    s, m, eps = packet.sigma, params.mass, params.epsilon
    return math.exp(-(s * eps * t) ** 2 - (eps * t * t) ** 2 / (4 * m * m * s * s))


def same_setup(f: EvolvedGaussianBranch, g: EvolvedGaussianBranch) -> None:
    if f.packet != g.packet or f.params != g.params or f.t != g.t:
        raise GridMismatch("analytic branches come from different packets, params or times")


# 8th-order central stencil for d^2/dx^2
_D2_8 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


def schrodinger_residual(packet: GaussianPacket, branch: Branch, params: PhysParams, t: float,
                         x, dx: float = 0.01, h: float = 1e-3) -> float:
    """L2 norm over ``x`` of (i d/dt - H) psi for the closed-form branch.

    Time derivative by 4th-order central differences with step ``h``;
    second space derivative by an 8th-order stencil of spacing ``dx``.
    Requires t >= 2h.
    """
    if t < 2 * h:
        raise ValueError(f"t must be >= {2 * h} for the central time stencil")
    x = np.asarray(x, dtype=float)

    def psi(tt, xx):
        return evolve_branch_analytic(packet, branch, params, tt)(xx)

    dpsi_dt = (-psi(t + 2 * h, x) + 8 * psi(t + h, x) - 8 * psi(t - h, x) + psi(t - 2 * h, x)) / (12 * h)
    here = evolve_branch_analytic(packet, branch, params, t)
    d2 = sum(c * here(x + (k - 4) * dx) for k, c in enumerate(_D2_8)) / dx ** 2
    s = Branch(branch).sign
    h_psi = -d2 / (2 * params.mass) + s * (params.lam + params.epsilon * x) * here(x)
    res = 1j * dpsi_dt - h_psi
    return float(np.sqrt(trapezoid(np.abs(res) ** 2, x)))
