import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sterngerlach.core import (ApparatusGeometry, Branch, GaussianPacket, PhysParams, SpinWeights,
                               bohm_number, make_initial_state)
from sterngerlach.errors import GridTooCoarse, GridTooNarrow
from sterngerlach.spectral import GridSpec


def test_phys_params_invariants():
    assert PhysParams(2.0, -1.0, 0.0).hbar == 1.0
    with pytest.raises(ValueError):
        PhysParams(mass=0.0)
    with pytest.raises(ValueError):
        PhysParams(epsilon=math.inf)


def test_spin_weights_normalization():
    SpinWeights(0.6, 0.8j)
    with pytest.raises(ValueError):
        SpinWeights(0.7071, 0.7071)


def test_geometry_transit_time():
    g = ApparatusGeometry(3.0, 1.5, 0.2)
    assert g.transit_time == 2.0
    with pytest.raises(ValueError):
        ApparatusGeometry(1.0, 1.0, 0.0)


def test_pure_up_state():
    grid = GridSpec(-16, 16, 1024)
    s = make_initial_state(GaussianPacket(0, 0, 1), SpinWeights(1, 0), grid)
    assert s.norm == pytest.approx(1.0, abs=1e-10)
    assert s.branch_norm(Branch.DOWN) == 0.0


def test_equal_superposition_branch_norms():
    grid = GridSpec(-16, 16, 1024)
    s = make_initial_state(GaussianPacket(0, 0, 1), SpinWeights.equal(), grid)
    assert s.branch_norm(Branch.UP) == pytest.approx(0.5, abs=1e-12)
    assert s.branch_norm(Branch.DOWN) == pytest.approx(0.5, abs=1e-12)


def test_initial_mean_momentum_by_spectral_derivative():
    # oracle: <p> = Re sum conj(psi) (-i dpsi/dx) dx with the derivative taken in Fourier space
    grid = GridSpec(-20, 20, 2048)
    s = make_initial_state(GaussianPacket(0, 5, 1), SpinWeights(1, 0), grid)
    psi = s.up
    dpsi = np.fft.ifft(1j * grid.p * np.fft.fft(psi))
    mean_p = float(np.real(np.sum(np.conj(psi) * (-1j) * dpsi)) * grid.dx)
    assert mean_p == pytest.approx(5.0, abs=1e-8)


def test_initial_state_grid_errors():
    pk = GaussianPacket(0, 0, 1)
    with pytest.raises(GridTooCoarse):
        make_initial_state(pk, SpinWeights(1, 0), GridSpec(-20, 20, 64))
    with pytest.raises(GridTooNarrow):
        make_initial_state(pk, SpinWeights(1, 0), GridSpec(-5, 5, 1024))


@pytest.mark.parametrize("eps,l,v,sigma,expected", [
    (0.0, 1.0, 1.0, 1.0, 0.0),
    (1.0, 1.0, 0.1, 1.0, 10 * math.sqrt(2)),
    (0.5, 2.0, 1.0, 2.0, 2 * math.sqrt(2)),
])
def test_bohm_number_examples(eps, l, v, sigma, expected):
    pk = GaussianPacket(0, 0, sigma)
    geom = ApparatusGeometry.for_packet(l, v, pk)
    assert bohm_number(PhysParams(1.0, 0.0, eps), geom) == pytest.approx(expected, rel=1e-14)


@given(eps=st.floats(0.01, 10), l=st.floats(0.1, 10), v=st.floats(0.1, 10), sigma=st.floats(0.1, 5))
def test_bohm_number_linear(eps, l, v, sigma):
    pk = GaussianPacket(0, 0, sigma)
    B = bohm_number(PhysParams(epsilon=eps), ApparatusGeometry.for_packet(l, v, pk))
    B2 = bohm_number(PhysParams(epsilon=2 * eps), ApparatusGeometry.for_packet(l, v, pk))
    Bl = bohm_number(PhysParams(epsilon=eps), ApparatusGeometry.for_packet(2 * l, v, pk))
    assert B2 == pytest.approx(2 * B, rel=1e-13)
    assert Bl == pytest.approx(2 * B, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(x0=st.floats(-5, 5), p0=st.floats(-4, 4), sigma=st.floats(0.5, 2.0))
def test_initial_state_norm_and_variance(x0, p0, sigma):
    grid = GridSpec(x0 - 12 * sigma, x0 + 12 * sigma, 1024)
    s = make_initial_state(GaussianPacket(x0, p0, sigma), SpinWeights(0.6, 0.8), grid)
    assert s.norm == pytest.approx(1.0, abs=1e-10)
    rho = np.abs(s.up) ** 2 + np.abs(s.down) ** 2
    rho /= rho.sum()
    mean = np.dot(rho, grid.x)
    var = np.dot(rho, (grid.x - mean) ** 2)
    assert var == pytest.approx(sigma ** 2 / 2, rel=1e-3)
