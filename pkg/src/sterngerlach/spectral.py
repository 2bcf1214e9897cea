"""Split-operator (Strang) propagation of the two spin branches on a periodic grid.

The Hamiltonian is diagonal in sigma_z, so each branch evolves on its own
under p^2/2m + s (lam + epsilon x).  One step is

    exp(-i V dt/2) . exp(-i T dt) . exp(-i V dt/2)

with T applied in momentum space via FFT.  Every factor is an exact
phase multiplication on the grid, so the norm is conserved to round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Branch, GaussianPacket, PhysParams
from .errors import BoundaryMassError, GridMismatch

# Number of points at each edge watched by the boundary-mass monitor.
EDGE_POINTS = 5
EDGE_MASS_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        n = int(self.n)
        if n < 64 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 64, got {self.n!r}")
        object.__setattr__(self, "n", n)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        # periodic grid: x_max is the image of x_min and is not stored
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        """Momentum nodes in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def p_max(self) -> float:
        return math.pi / self.dx


@dataclass(frozen=True, eq=False)
class SpinorGridState:
    """Spinor a psi_up |up> + b psi_down |down> sampled on ``grid`` at time ``t``.

    ``up`` and ``down`` carry the spin amplitudes, so the total norm is
    sum(|up|^2 + |down|^2) dx.
    """

    grid: GridSpec
    up: np.ndarray
    down: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("up", "down"):
            arr = np.asarray(getattr(self, name), dtype=np.complex128)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({self.grid.n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def amplitudes(self, branch: Branch) -> np.ndarray:
        return self.up if Branch(branch) is Branch.UP else self.down

    def branch_norm(self, branch: Branch) -> float:
        return float(np.sum(np.abs(self.amplitudes(branch)) ** 2) * self.grid.dx)

    @property
    def norm(self) -> float:
        return self.branch_norm(Branch.UP) + self.branch_norm(Branch.DOWN)

    def edge_mass(self) -> float:
        """Fraction of total probability within EDGE_POINTS of either edge."""
        rho = np.abs(self.up) ** 2 + np.abs(self.down) ** 2
        total = rho.sum()
        if total == 0.0:
            return 0.0
        edge = rho[:EDGE_POINTS].sum() + rho[-EDGE_POINTS:].sum()
        return float(edge / total)

    def check_boundary(self) -> None:
        m = self.edge_mass()
        if m >= EDGE_MASS_TOL:
            raise BoundaryMassError(
                f"edge mass {m:.3g} >= {EDGE_MASS_TOL} at t={self.t}; enlarge the grid")

    def branch_wave(self, branch: Branch) -> "BranchWave":
        return BranchWave(self.grid, self.amplitudes(branch), self.t)


@dataclass(frozen=True, eq=False)
class BranchWave:
    """One branch's (unnormalized) amplitudes on a grid."""

    grid: GridSpec
    psi: np.ndarray
    t: float

    def normalized(self) -> np.ndarray:
        nrm = math.sqrt(float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx))
        return self.psi / nrm


def _potential(params: PhysParams, x: np.ndarray) -> np.ndarray:
    """Stacked (2, n) branch potentials: +(lam + eps x) for up, minus that for down."""
    v = params.lam + params.epsilon * x
    return np.stack([v, -v])


@dataclass
class _Propagator:
    """Cached phase factors for a fixed (grid, params, dt)."""

    grid: GridSpec
    params: PhysParams
    dt: float
    half_kick: np.ndarray = field(init=False)
    full_kick: np.ndarray = field(init=False)
    drift: np.ndarray = field(init=False)

    def __post_init__(self):
        v = _potential(self.params, self.grid.x)
        self.half_kick = np.exp(-0.5j * self.dt * v)
        self.full_kick = self.half_kick * self.half_kick
        kin = self.grid.p ** 2 / (2.0 * self.params.mass)
        self.drift = np.exp(-1j * self.dt * kin)

    def run(self, psi: np.ndarray, nsteps: int, kinetic: bool = True) -> np.ndarray:
        """Apply ``nsteps`` Strang steps to the stacked (2, n) array.

        Adjacent half kicks are fused into full kicks.  The boundary monitor
        runs after every step.
        """
        if nsteps == 0:
            return psi
        psi = psi * self.half_kick
        for k in range(nsteps):
            if kinetic:
                psi = np.fft.ifft(np.fft.fft(psi, axis=1) * self.drift, axis=1)
            if k < nsteps - 1:
                psi = psi * self.full_kick
            else:
                psi = psi * self.half_kick
            _check_edges(psi)
        return psi


def _check_edges(psi: np.ndarray) -> None:
    rho = np.abs(psi) ** 2
    total = rho.sum()
    edge = rho[:, :EDGE_POINTS].sum() + rho[:, -EDGE_POINTS:].sum()
    if total > 0 and edge >= EDGE_MASS_TOL * total:
        raise BoundaryMassError(
            f"edge mass {edge / total:.3g} >= {EDGE_MASS_TOL}; enlarge the grid")


def step(state: SpinorGridState, params: PhysParams, dt: float,
         kinetic: bool = True) -> SpinorGridState:
    """Advance ``state`` by one Strang step of size ``dt``.

    ``kinetic=False`` drops the momentum-space factor; only useful for tests.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    prop = _Propagator(state.grid, params, dt)
    psi = prop.run(np.stack([state.up, state.down]), 1, kinetic=kinetic)
    return SpinorGridState(state.grid, psi[0], psi[1], state.t + dt)


def evolve(state: SpinorGridState, params: PhysParams, t_final: float, dt: float,
           stride: int = 1) -> list[SpinorGridState]:
    """Propagate to ``t_final`` and return snapshots every ``stride`` steps.

    The first snapshot is the input state and the last is at ``t_final``.
    ``dt`` must divide the interval to one part in 1e9.
    """
    span = t_final - state.t
    if span < 0:
        raise ValueError(f"t_final={t_final} is before the state time {state.t}")
    if span == 0:
        return [state]
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride!r}")
    nsteps = round(span / dt)
    if nsteps < 1 or abs(nsteps * dt - span) > 1e-9 * span:
        raise ValueError(f"dt={dt} does not divide the interval {span}")
    dt = span / nsteps
    prop = _Propagator(state.grid, params, dt)

    snaps = [state]
    psi = np.stack([state.up, state.down])
    done = 0
    while done < nsteps:
        k = min(stride, nsteps - done)
        psi = prop.run(psi, k)
        done += k
        t = t_final if done == nsteps else state.t + done * dt
        snaps.append(SpinorGridState(state.grid, psi[0], psi[1], t))
    return snaps


def _next_pow2(n: float) -> int:
    return 1 << max(6, math.ceil(math.log2(max(n, 1.0))))


def auto_grid(packet: GaussianPacket, params: PhysParams, t_final: float,
              points_per_sigma: int = 16) -> GridSpec:
    """Grid that holds both classical branch trajectories on [0, t_final].

    Margin is 10 evolved position widths (at least 10 sigma) on each side; the spacing resolves
    sigma and keeps momenta up to |p0| + |eps| t_final + 10 / (sqrt(2) sigma)
    below Nyquist with 50% headroom.
    """
    if t_final < 0:
        raise ValueError(f"t_final must be >= 0, got {t_final!r}")
    m, eps = params.mass, params.epsilon
    x0, p0, s = packet.x0, packet.p0, packet.sigma

    times = [0.0, t_final]
    if eps != 0:
        # vertex of each parabola x0 + p0 t/m -/+ eps t^2 / 2m
        for tv in (p0 / eps, -p0 / eps):
            if 0 < tv < t_final:
                times.append(tv)
    xs = []
    for t in times:
        for sgn in (1, -1):
            xs.append(x0 + p0 * t / m - sgn * eps * t * t / (2 * m))
    width = math.sqrt(s * s / 2 + t_final ** 2 / (2 * m * m * s * s))
    # the initial-state check wants x0 +/- 8 sigma inside the grid
    margin = max(10 * width, 10 * s)
    lo = min(xs) - margin
    hi = max(xs) + margin

    p_cover = abs(p0) + abs(eps) * t_final + 10.0 / (math.sqrt(2.0) * s)
    dx = min(s / points_per_sigma, math.pi / (1.5 * p_cover))
    n = _next_pow2((hi - lo) / dx)
    return GridSpec(lo, hi, n)


def check_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise GridMismatch(f"grids differ: {a} vs {b}")


# -- snapshot dump -----------------------------------------------------------

SNAPSHOT_COLUMNS = ("x", "re_up", "im_up", "re_down", "im_down")


def write_snapshot(path, state: SpinorGridState, params: PhysParams) -> None:
    """Text dump: ``#``-prefixed header lines, then one row per grid node."""
    g = state.grid
    header = [
        "# sterngerlach snapshot v1",
        f"# x_min={g.x_min!r} x_max={g.x_max!r} n={g.n}",
        f"# mass={params.mass!r} lam={params.lam!r} epsilon={params.epsilon!r}",
        f"# t={state.t!r}",
        "# " + ",".join(SNAPSHOT_COLUMNS),
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(header) + "\n")
        for x, u, d in zip(g.x.tolist(), state.up.tolist(), state.down.tolist()):
            fh.write(f"{x!r},{u.real!r},{u.imag!r},{d.real!r},{d.imag!r}\n")


def read_snapshot(path) -> tuple[SpinorGridState, PhysParams]:
    meta: dict[str, str] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    grid = GridSpec(float(meta["x_min"]), float(meta["x_max"]), int(meta["n"]))
    params = PhysParams(float(meta["mass"]), float(meta["lam"]), float(meta["epsilon"]))
    up = data[:, 1] + 1j * data[:, 2]
    down = data[:, 3] + 1j * data[:, 4]
    return SpinorGridState(grid, up, down, float(meta["t"])), params
