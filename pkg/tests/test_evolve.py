import math

import numpy as np
import pytest

import oseenlab as ol
from oseenlab.analytic import (
    oseen_streamfunction_radial,
    oseen_velocity_xy,
    oseen_vorticity_xy,
)
from oseenlab.elliptic import ModalWorkspace


def oseen_prescribed_data(grid, alpha):
    """Exact vortex trace data on both rings of the annulus."""

    def omega_wall(t, theta):
        return oseen_vorticity_xy(alpha, t, grid.r_wall * np.cos(theta),
                                  grid.r_wall * np.sin(theta))

    def omega_outer(t, theta):
        return oseen_vorticity_xy(alpha, t, grid.r_outer * np.cos(theta),
                                  grid.r_outer * np.sin(theta))

    def psi_wall(t, theta):
        return np.zeros_like(theta)

    def psi_outer(t, theta):
        value = float(oseen_streamfunction_radial(alpha, t, grid.r_outer,
                                                  grid.r_wall))
        return np.full_like(theta, value)

    return ol.PrescribedData(omega_wall, omega_outer, psi_wall, psi_outer)


def oseen_state(grid, alpha, t0, workspace):
    omega = ol.sample_scalar(grid, lambda x, y: oseen_vorticity_xy(alpha, t0, x, y))
    data = oseen_prescribed_data(grid, alpha)
    psi = ol.ScalarField(grid, workspace.solve_dirichlet_values(
        omega.values, data.psi_wall(t0, grid.theta), data.psi_outer(t0, grid.theta)))
    return ol.State(t0, omega, psi, ol.velocity_from_streamfunction(psi), -alpha)


def run_manufactured_oseen(n, dt, t0=1.0, t1=2.0):
    grid = ol.build_grid(1.0, math.log(64.0), n, n)
    ws = ModalWorkspace(grid)
    policy = ol.StepPolicy(dt=dt, advection=True, wall_mode="prescribed",
                           prescribed=oseen_prescribed_data(grid, 1.0))
    state = oseen_state(grid, 1.0, t0, ws)
    final, _ = ol.evolve_to(state, t1, policy, workspace=ws)
    exact = ol.sample_scalar(grid, lambda x, y: oseen_vorticity_xy(1.0, t1, x, y))
    return ol.lp_norm(ol.subtract(final.omega, exact), 2.0) / ol.lp_norm(exact, 2.0)


# --------------------------------------------------------------------- #
# init_state
# --------------------------------------------------------------------- #

def test_init_state_pure_swirl_matches_harmonic(medium_grid):
    state = ol.init_state(1.0, None, medium_grid)
    h = ol.harmonic_velocity(medium_grid)
    assert np.max(np.abs(state.velocity.u1 - h.u1)) < 1e-8
    assert np.max(np.abs(state.velocity.u2 - h.u2)) < 1e-8
    assert np.all(state.omega.values == 0.0)
    assert state.gamma_infinity == -1.0


def test_init_state_zero_is_zero(medium_grid):
    state = ol.init_state(0.0, None, medium_grid)
    assert np.all(state.velocity.u1 == 0.0)
    assert np.all(state.velocity.u2 == 0.0)
    assert np.all(state.psi.values == 0.0)


def test_init_state_blob_pair_finite_energy_zero_outer_circulation(
        medium_grid, two_blobs):
    state = ol.init_state(0.0, two_blobs, medium_grid)
    energy = ol.lp_norm(state.velocity, 2.0)
    assert math.isfinite(energy) and energy > 0.0
    circ = ol.circulation(state.velocity, float(medium_grid.s[-1]))
    assert abs(circ) < 1e-6


# --------------------------------------------------------------------- #
# step basics
# --------------------------------------------------------------------- #

def test_zero_state_is_fixed_point(small_grid):
    state = ol.init_state(0.0, None, small_grid)
    for advection in (False, True):
        policy = ol.StepPolicy(dt=1e-3, advection=advection)
        nxt = ol.step(state, policy)
        assert np.all(nxt.omega.values == 0.0)
        assert np.all(nxt.velocity.u1 == 0.0)
        assert nxt.t == pytest.approx(1e-3)


def test_manufactured_oseen_small_grid():
    err = run_manufactured_oseen(64, 2e-3, t0=1.0, t1=1.5)
    assert err < 5e-3


def test_stokes_step_is_linear(small_grid, two_blobs):
    ws = ModalWorkspace(small_grid)
    policy = ol.StepPolicy(dt=2e-3, advection=False)
    blobs_b = ol.BlobSpec((ol.Blob((0.0, 5.0), 1.2, 0.8),
                           ol.Blob((0.0, -5.0), 1.2, -0.8)))
    sa = ol.init_state(0.5, two_blobs, small_grid, ws)
    sb = ol.init_state(-0.2, blobs_b, small_grid, ws)
    both = ol.BlobSpec(two_blobs.blobs + blobs_b.blobs)
    sc = ol.init_state(0.3, both, small_grid, ws)

    na = ol.step(sa, policy, ws)
    nb = ol.step(sb, policy, ws)
    nc = ol.step(sc, policy, ws)
    gap = np.max(np.abs(nc.omega.values - na.omega.values - nb.omega.values))
    assert gap < 1e-12 * max(1.0, np.max(np.abs(nc.omega.values)))

    doubled = ol.step(ol.State(sa.t, ol.ScalarField(small_grid, 2.0 * sa.omega.values),
                               ol.ScalarField(small_grid, 2.0 * sa.psi.values),
                               ol.VectorField(small_grid, 2.0 * sa.velocity.u1,
                                              2.0 * sa.velocity.u2),
                               2.0 * sa.gamma_infinity), policy, ws)
    gap = np.max(np.abs(doubled.omega.values - 2.0 * na.omega.values))
    assert gap < 1e-12 * max(1.0, np.max(np.abs(doubled.omega.values)))


def test_stokes_energy_never_increases(small_grid, two_blobs):
    ws = ModalWorkspace(small_grid)
    state = ol.init_state(0.0, two_blobs, small_grid, ws)
    policy = ol.StepPolicy(dt=2e-3, advection=False, startup_until=0.05)
    energies = []

    def track(t, omega, psi, u1, u2):
        energies.append(float((small_grid.quad_weights * (u1 * u1 + u2 * u2)).sum()))

    ol.evolve_to(state, 1.0, policy, on_step=track, workspace=ws)
    en = np.array(energies)
    assert np.all(en[1:] <= en[:-1] * (1.0 + 1e-10))


def test_cfl_violation_raises(small_grid, two_blobs):
    state = ol.init_state(1.0, two_blobs, small_grid)
    policy = ol.StepPolicy(dt=5.0, advection=True)
    with pytest.raises(ol.CflError):
        ol.step(state, policy)
    assert ol.courant_number(state, 5.0) > policy.cfl_limit
    assert ol.courant_number(state, 1e-3) < 0.1


def test_policy_validation():
    with pytest.raises(ValueError):
        ol.StepPolicy(dt=0.0)
    with pytest.raises(ValueError):
        ol.StepPolicy(dt=1e-3, wall_mode="slippery")
    with pytest.raises(ValueError):
        ol.StepPolicy(dt=1e-3, wall_mode="prescribed")


# --------------------------------------------------------------------- #
# evolve_to
# --------------------------------------------------------------------- #

def test_probe_at_end_matches_final(small_grid, two_blobs):
    state = ol.init_state(0.0, two_blobs, small_grid)
    policy = ol.StepPolicy(dt=1e-2, advection=False)
    final, snaps = ol.evolve_to(state, 0.1, policy, probes=[0.1])
    assert len(snaps) == 1
    assert snaps[0].t == final.t
    assert np.array_equal(snaps[0].omega.values, final.omega.values)

    final2, snaps2 = ol.evolve_to(state, 0.1, policy)
    assert snaps2 == []
    assert np.array_equal(final2.omega.values, final.omega.values)


def test_evolution_has_discrete_semigroup_property(small_grid, two_blobs):
    ws = ModalWorkspace(small_grid)
    state = ol.init_state(0.05, two_blobs, small_grid, ws)
    policy = ol.StepPolicy(dt=1e-2, advection=True)
    direct, _ = ol.evolve_to(state, 0.4, policy, workspace=ws)
    half, _ = ol.evolve_to(state, 0.2, policy, workspace=ws)
    stitched, _ = ol.evolve_to(half, 0.4, policy, workspace=ws)
    gap = np.max(np.abs(stitched.omega.values - direct.omega.values))
    assert gap <= 1e-12 * max(1.0, np.max(np.abs(direct.omega.values)))


def test_probe_validation(small_grid):
    state = ol.init_state(0.0, None, small_grid)
    policy = ol.StepPolicy(dt=1e-2, advection=False)
    with pytest.raises(ValueError):
        ol.evolve_to(state, 0.1, policy, probes=[0.5])
    with pytest.raises(ValueError):
        ol.evolve_to(state, 0.0, policy)


def test_gamma_infinity_is_conserved(small_grid, two_blobs):
    state = ol.init_state(0.3, two_blobs, small_grid)
    policy = ol.StepPolicy(dt=5e-3, advection=True, startup_until=0.02)
    final, _ = ol.evolve_to(state, 0.2, policy)
    assert final.gamma_infinity == state.gamma_infinity


def test_wall_slip_is_small_after_startup(medium_grid):
    state = ol.init_state(1.0, None, medium_grid)
    policy = ol.StepPolicy(dt=2e-3, advection=False, startup_until=0.1)
    final, _ = ol.evolve_to(state, 1.0, policy)
    g = medium_grid
    slip = np.abs(-final.velocity.u1[0] * g.sin_theta
                  + final.velocity.u2[0] * g.cos_theta).max()
    speed = np.abs(final.velocity.magnitude()).max()
    assert slip < 1e-2 * speed


def test_startup_window_uses_smaller_steps(small_grid):
    policy = ol.StepPolicy(dt=1e-2, advection=False, startup_until=0.05)
    assert policy.dt_at(0.0, small_grid) == pytest.approx(0.25 * small_grid.ds**2)
    assert policy.dt_at(0.06, small_grid) == 1e-2
    explicit = ol.StepPolicy(dt=1e-2, advection=False, startup_until=0.05,
                             startup_dt=1e-3)
    assert explicit.dt_at(0.0, small_grid) == 1e-3
