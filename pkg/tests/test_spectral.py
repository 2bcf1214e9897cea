import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sterngerlach.analytic import evolve_branch_analytic
from sterngerlach.core import Branch, GaussianPacket, PhysParams, SpinWeights, make_initial_state
from sterngerlach.errors import BoundaryMassError
from sterngerlach.observables import moments_from_grid
from sterngerlach.spectral import (GridSpec, SpinorGridState, auto_grid, evolve, read_snapshot, step,
                                   write_snapshot)

from conftest import REF_GRID, REF_PACKET, REF_PARAMS, l2


def test_grid_spec_invariants():
    g = GridSpec(-1.0, 1.0, 64)
    assert g.dx == pytest.approx(2 / 64)
    assert g.p_max == pytest.approx(math.pi / g.dx)
    for bad in (100, 32):
        with pytest.raises(ValueError):
            GridSpec(0, 1, bad)
    with pytest.raises(ValueError):
        GridSpec(1, 0, 64)


def test_free_particle_steps():
    pk = GaussianPacket(-2.0, 1.0, 1.0)
    params = PhysParams(1.0, 0.0, 0.0)
    grid = GridSpec(-25, 25, 1024)
    s = make_initial_state(pk, SpinWeights(1, 0), grid)
    for _ in range(100):
        s = step(s, params, 0.01)
    assert s.t == pytest.approx(1.0)
    exact = evolve_branch_analytic(pk, Branch.UP, params, 1.0)(grid.x)
    assert l2(s.up, exact, grid.dx) < 1e-9


def test_potential_only_factor_is_a_phase():
    pk = GaussianPacket(0, 0, 1)
    grid = GridSpec(-16, 16, 512)
    s = make_initial_state(pk, SpinWeights.equal(), grid)
    dt = 0.3
    out = step(s, PhysParams(1.0, 1.0, 0.0), dt, kinetic=False)
    np.testing.assert_allclose(out.up, s.up * np.exp(-1j * dt), atol=1e-15)
    np.testing.assert_allclose(out.down, s.down * np.exp(1j * dt), atol=1e-15)


def test_norm_conserved_per_step():
    s = make_initial_state(REF_PACKET, SpinWeights.equal(), REF_GRID)
    for _ in range(20):
        s = step(s, REF_PARAMS, 0.01)
        assert s.norm == pytest.approx(1.0, abs=1e-13)


def _error_at(dt):
    s = make_initial_state(REF_PACKET, SpinWeights(1, 0), REF_GRID)
    final = evolve(s, REF_PARAMS, 2.0, dt, stride=10 ** 6)[-1]
    exact = evolve_branch_analytic(REF_PACKET, Branch.UP, REF_PARAMS, 2.0)(REF_GRID.x)
    return l2(final.up, exact, REF_GRID.dx)


def test_second_order_convergence():
    errs = [_error_at(dt) for dt in (0.02, 0.01, 0.005)]
    for coarse, fine in zip(errs, errs[1:]):
        assert coarse / fine == pytest.approx(4.0, rel=0.2)


def test_evolve_identity_and_divisibility():
    s = make_initial_state(REF_PACKET, SpinWeights.equal(), REF_GRID)
    assert evolve(s, REF_PARAMS, 0.0, 0.01) == [s]
    with pytest.raises(ValueError):
        evolve(s, REF_PARAMS, 1.0, 0.3)


def test_evolve_snapshots_and_norm(ref_run):
    times = [st.t for st in ref_run]
    assert times[0] == 0.0 and times[-1] == 2.0
    assert len(ref_run) == 21
    assert abs(ref_run[-1].norm - 1.0) < 1e-9


def test_evolve_reference_means(ref_run):
    final = ref_run[-1]
    assert moments_from_grid(final, Branch.UP)[0] == pytest.approx(9.0, abs=1e-4)
    assert moments_from_grid(final, Branch.DOWN)[0] == pytest.approx(11.0, abs=1e-4)


def test_branch_independence():
    grid = GridSpec(-30, 30, 1024)
    pk = GaussianPacket(0.0, 1.0, 1.0)
    a, b = 0.6, 0.8j
    joint = evolve(make_initial_state(pk, SpinWeights(a, b), grid), REF_PARAMS, 1.0, 0.01)[-1]
    up = evolve(make_initial_state(pk, SpinWeights(1, 0), grid), REF_PARAMS, 1.0, 0.01)[-1]
    down = evolve(make_initial_state(pk, SpinWeights(0, 1), grid), REF_PARAMS, 1.0, 0.01)[-1]
    np.testing.assert_allclose(joint.up, a * up.up, atol=1e-14)
    np.testing.assert_allclose(joint.down, b * down.down, atol=1e-14)


def test_boundary_mass_monitor():
    grid = GridSpec(-10, 10, 256)
    s = make_initial_state(GaussianPacket(0.0, 4.0, 1.0), SpinWeights(1, 0), grid)
    with pytest.raises(BoundaryMassError):
        evolve(s, PhysParams(1.0, 0.0, 0.0), 5.0, 0.01)


def test_auto_grid_examples():
    g0 = auto_grid(GaussianPacket(0, 0, 1), PhysParams(1, 0, 0.5), 0.0)
    assert g0.x_min <= -10 / math.sqrt(2) and g0.x_max >= 10 / math.sqrt(2)
    pk = GaussianPacket(0, 5, 1)
    g = auto_grid(pk, PhysParams(1, 0, 0.5), 2.0)
    margin = 10 * math.sqrt(0.5 + 2.0)
    assert g.x_min <= -margin and g.x_max >= 11 + margin
    assert g.p_max >= 5 + 0.5 * 2 + 10 / math.sqrt(2)


@settings(max_examples=20, deadline=None)
@given(x0=st.floats(-5, 5), p0=st.floats(-3, 3), sigma=st.floats(0.5, 2), m=st.floats(0.5, 2),
       eps=st.floats(-1, 1), t_final=st.floats(0.1, 3))
def test_auto_grid_never_hits_boundary(x0, p0, sigma, m, eps, t_final):
    pk = GaussianPacket(x0, p0, sigma)
    params = PhysParams(m, 0.3, eps)
    grid = auto_grid(pk, params, t_final)
    s = make_initial_state(pk, SpinWeights.equal(), grid)
    nsteps = math.ceil(t_final / 0.02)
    snaps = evolve(s, params, t_final, t_final / nsteps, stride=5)
    for st_ in snaps:
        st_.check_boundary()


def test_snapshot_round_trip(tmp_path, ref_run):
    path = tmp_path / "snap.txt"
    write_snapshot(path, ref_run[5], REF_PARAMS)
    state, params = read_snapshot(path)
    assert params == REF_PARAMS
    assert state.grid == REF_GRID and state.t == ref_run[5].t
    np.testing.assert_array_equal(state.up, ref_run[5].up)
    np.testing.assert_array_equal(state.down, ref_run[5].down)
    header = path.read_text().splitlines()[:5]
    assert header[-1] == "# x,re_up,im_up,re_down,im_down"


def test_state_arrays_read_only(ref_run):
    with pytest.raises(ValueError):
        ref_run[0].up[0] = 0
    with pytest.raises(ValueError):
        SpinorGridState(REF_GRID, np.zeros(10), np.zeros(10))
