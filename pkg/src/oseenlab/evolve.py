"""Time integration of the annulus flow in vorticity form.

One step advances d_t w + (u . grad) w = Lap w (advection optional; with it
off the map is the linear no-slip Stokes evolution) by an IMEX scheme:
Crank-Nicolson diffusion through the per-mode Helmholtz solves, and a
two-stage explicit Runge-Kutta (Heun) treatment of advection written in
conservative form, (1/r^2) [d_s (U_s w) + d_th (U_th w)] with the
contravariant fluxes U_s = -d_th psi, U_th = d_s psi, which are discretely
divergence free because the difference operators commute.

Wall closures:

* noslip: the wall vorticity row obeys Thom's formula
  w_wall = 2 psi_1 / (r_wall^2 ds^2) (the log-polar Laplacian has no
  first-derivative term, so the classical formula applies verbatim). The
  closure is coupled implicitly: per azimuthal mode the new wall value
  solves a scalar linear equation built from precomputed response
  functionals, which keeps the step stable for dt well beyond the squared
  near-wall spacing where a lagged wall value blows up. The outer ring
  carries w = 0.
* prescribed: both vorticity rings and both streamfunction rings come from
  user callables of (t, theta), which turns the stepper into a general
  annulus solver driven by exact trace data.

States are immutable once returned; a single trajectory steps sequentially
while independent trajectories may run concurrently.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analytic import BlobSpec, blob_vorticity
from .elliptic import ModalWorkspace, velocity_from_streamfunction
from .fields import ScalarField, VectorField, d_ds, d_dtheta
from .geometry import Grid


class SolverError(RuntimeError):
    """Time integration failed (blow-up, invalid data)."""


class CflError(SolverError):
    """Advective Courant number exceeded the policy limit."""

    def __init__(self, courant: float, limit: float):
        super().__init__(
            f"advective Courant number {courant:.3g} exceeds limit {limit:.3g}"
        )
        self.courant = courant
        self.limit = limit


@dataclass(frozen=True)
class PrescribedData:
    """Time-dependent ring data, each callable mapping (t, theta) -> values."""

    omega_wall: Callable
    omega_outer: Callable
    psi_wall: Callable
    psi_outer: Callable


@dataclass(frozen=True)
class StepPolicy:
    """Time-step controls for one trajectory.

    startup_dt (defaulting to ds^2 / 4 when a startup window is set) bounds
    the step while t < startup_until, which resolves the wall vorticity
    sheet created by tangential initial data meeting the no-slip condition.
    """

    dt: float
    advection: bool = True
    wall_mode: str = "noslip"
    prescribed: Optional[PrescribedData] = None
    startup_until: float = 0.0
    startup_dt: Optional[float] = None
    cfl_limit: float = 0.9

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.wall_mode not in ("noslip", "prescribed"):
            raise ValueError(f"unknown wall mode {self.wall_mode!r}")
        if self.wall_mode == "prescribed" and self.prescribed is None:
            raise ValueError("prescribed wall mode requires PrescribedData")

    def dt_at(self, t: float, grid: Grid) -> float:
        if t < self.startup_until - 1e-14:
            fallback = 0.25 * grid.ds**2
            return min(self.dt, self.startup_dt or fallback)
        return self.dt


@dataclass(frozen=True)
class State:
    """Full flow state at one instant; derived fields are kept consistent."""

    t: float
    omega: ScalarField
    psi: ScalarField
    velocity: VectorField
    gamma_infinity: float

    @property
    def grid(self) -> Grid:
        return self.omega.grid


def init_state(alpha: float, blobs: Optional[BlobSpec], grid: Grid,
               workspace: Optional[ModalWorkspace] = None) -> State:
    """Initial data: blob vorticity plus alpha times the harmonic swirl.

    The harmonic part contributes no vorticity, only circulation: with the
    counterclockwise line-integral convention its ring circulation is -1,
    so the far-field circulation is blob mass minus alpha. The blob part is
    built with zero wall circulation, which keeps it square integrable.
    """
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    if blobs is not None and blobs.count:
        omega = blob_vorticity(blobs, grid)
        gamma = blobs.total_mass - alpha
    else:
        omega = ScalarField(grid, np.zeros((grid.n_s, grid.n_theta)))
        gamma = -alpha
    psi = ScalarField(grid, ws.solve_streamfunction_values(omega.values, gamma))
    return State(0.0, omega, psi, velocity_from_streamfunction(psi), gamma)


class _Stepper:
    """Mutable working arrays for one trajectory; not shared across threads."""

    def __init__(self, grid: Grid, policy: StepPolicy, gamma: float,
                 workspace: Optional[ModalWorkspace] = None):
        self.grid = grid
        self.policy = policy
        self.gamma = gamma
        self.ws = workspace if workspace is not None else ModalWorkspace(grid)
        self.inv_r2 = (1.0 / (grid.r * grid.r))[:, None]
        self.r2col = (grid.r * grid.r)[:, None]
        self.k2 = (np.arange(grid.n_theta // 2 + 1) ** 2)[None, :]
        self.thom_coef = 2.0 / (grid.r_wall**2 * grid.ds**2)
        self.inv_ds2 = 1.0 / grid.ds**2

    # -- streamfunction -------------------------------------------------- #

    def solve_psi(self, omega: np.ndarray, t_new: float) -> np.ndarray:
        if self.policy.wall_mode == "noslip":
            return self.ws.solve_streamfunction_values(omega, self.gamma)
        data = self.policy.prescribed
        wall = np.asarray(data.psi_wall(t_new, self.grid.theta), dtype=float)
        outer = np.asarray(data.psi_outer(t_new, self.grid.theta), dtype=float)
        return self.ws.solve_dirichlet_values(omega, wall, outer)

    # -- advection ------------------------------------------------------- #

    def fluxes(self, psi: np.ndarray):
        u_s = -d_dtheta(self.grid, psi)
        u_t = d_ds(self.grid, psi)
        return u_s, u_t

    def advection_tendency(self, omega: np.ndarray, psi: np.ndarray) -> np.ndarray:
        u_s, u_t = self.fluxes(psi)
        div = d_ds(self.grid, u_s * omega) + d_dtheta(self.grid, u_t * omega)
        return -self.inv_r2 * div

    def courant(self, psi: np.ndarray, dt: float) -> float:
        u_s, u_t = self.fluxes(psi)
        rate = self.inv_r2 * (np.abs(u_s) / self.grid.ds
                              + np.abs(u_t) / self.grid.dtheta)
        return float(dt * rate.max())

    # -- Crank-Nicolson stage --------------------------------------------- #

    def _diffusion_rhs(self, omega_hat: np.ndarray, tendency, dt: float) -> np.ndarray:
        """r^2-scaled right side (I + dt/2 Lap) w_old + dt * tendency."""
        lap_s = (omega_hat[:-2] - 2.0 * omega_hat[1:-1] + omega_hat[2:]) * self.inv_ds2
        rhs = np.empty_like(omega_hat)
        rhs[1:-1] = (self.r2col[1:-1] * omega_hat[1:-1]
                     + 0.5 * dt * (lap_s - self.k2 * omega_hat[1:-1]))
        if tendency is not None:
            rhs[1:-1] += dt * self.r2col[1:-1] * np.fft.rfft(tendency, axis=1)[1:-1]
        return rhs

    def cn_stage(self, omega_hat: np.ndarray, tendency, dt: float,
                 t_new: float) -> np.ndarray:
        rhs = self._diffusion_rhs(omega_hat, tendency, dt)
        ws = self.ws
        if self.policy.wall_mode == "noslip":
            zeros = np.zeros(ws.n_modes, dtype=complex)
            # base step with a homogeneous wall row, then the implicit
            # Thom closure: wall_hat solves w = c * psi_1(base + w * resp)
            w_hat = ws.helmholtz_all_modes(dt, rhs, zeros, zeros)
            resp, psi1_resp = ws.wall_response(dt)
            psi1_base = ws.poisson_psi1_hat(w_hat, self.gamma)
            c = self.thom_coef
            wall_hat = c * psi1_base / (1.0 - c * psi1_resp)
            w_hat[0, :] = wall_hat
            w_hat[1:-1, :] += resp * wall_hat[None, :]
        else:
            data = self.policy.prescribed
            theta = self.grid.theta
            wall_hat = np.fft.rfft(np.asarray(data.omega_wall(t_new, theta), dtype=float))
            outer_hat = np.fft.rfft(np.asarray(data.omega_outer(t_new, theta), dtype=float))
            w_hat = ws.helmholtz_all_modes(dt, rhs, wall_hat, outer_hat)
        return np.fft.irfft(w_hat, n=self.grid.n_theta, axis=1)

    # -- one IMEX step ----------------------------------------------------- #

    def advance(self, t: float, dt: float, omega: np.ndarray, psi: np.ndarray):
        policy = self.policy
        t_new = t + dt
        omega_hat = np.fft.rfft(omega, axis=1)

        if policy.advection:
            courant = self.courant(psi, dt)
            if courant > policy.cfl_limit:
                raise CflError(courant, policy.cfl_limit)
            n1 = self.advection_tendency(omega, psi)
            omega_star = self.cn_stage(omega_hat, n1, dt, t_new)
            psi_star = self.solve_psi(omega_star, t_new)
            n2 = self.advection_tendency(omega_star, psi_star)
            omega_new = self.cn_stage(omega_hat, 0.5 * (n1 + n2), dt, t_new)
        else:
            omega_new = self.cn_stage(omega_hat, None, dt, t_new)

        if not np.isfinite(omega_new).all():
            raise SolverError(f"non-finite vorticity at t = {t_new}")
        psi_new = self.solve_psi(omega_new, t_new)
        return omega_new, psi_new


def _materialize(grid: Grid, t: float, omega: np.ndarray, psi: np.ndarray,
                 gamma: float) -> State:
    psi_field = ScalarField(grid, psi.copy())
    return State(t, ScalarField(grid, omega.copy()), psi_field,
                 velocity_from_streamfunction(psi_field), gamma)


def step(state: State, policy: StepPolicy,
         workspace: Optional[ModalWorkspace] = None) -> State:
    """Advance a state by one step of policy.dt; returns a new State."""
    stepper = _Stepper(state.grid, policy, state.gamma_infinity, workspace)
    omega, psi = stepper.advance(state.t, policy.dt, state.omega.values,
                                 state.psi.values)
    return _materialize(state.grid, state.t + policy.dt, omega, psi,
                        state.gamma_infinity)


def courant_number(state: State, dt: float) -> float:
    """Advective Courant number the stepper would see for this state and dt."""
    stepper = _Stepper(state.grid, StepPolicy(dt=dt), state.gamma_infinity)
    return stepper.courant(state.psi.values, dt)


def evolve_to(state: State, t_end: float, policy: StepPolicy,
              probes=(), on_step=None,
              workspace: Optional[ModalWorkspace] = None):
    """March a state to t_end, landing exactly on each probe time.

    The final step before each landing point is shrunk rather than
    interpolated. Returns (final state, list of probe snapshots). The
    optional on_step(t, omega, psi, u1, u2) callback sees the raw nodal
    arrays after every step.
    """
    if t_end <= state.t:
        raise ValueError(f"t_end={t_end} must exceed state time {state.t}")
    probes = sorted(float(p) for p in probes)
    if probes and not (state.t < probes[0] and probes[-1] <= t_end + 1e-12):
        raise ValueError("probe times must lie inside (state.t, t_end]")

    grid = state.grid
    stepper = _Stepper(grid, policy, state.gamma_infinity, workspace)
    landings = sorted(set(probes) | {t_end}
                      | ({policy.startup_until}
                         if state.t < policy.startup_until < t_end else set()))

    t = state.t
    omega = state.omega.values.copy()
    psi = state.psi.values.copy()
    snapshots = []
    for target in landings:
        while t < target - 1e-12 * max(1.0, target):
            dt_nominal = policy.dt_at(t, grid)
            remaining = target - t
            dt_step = remaining if remaining < dt_nominal * (1.0 + 1e-9) else dt_nominal
            omega, psi = stepper.advance(t, dt_step, omega, psi)
            t += dt_step
            if on_step is not None:
                vel = velocity_from_streamfunction(ScalarField(grid, psi))
                on_step(t, omega, psi, vel.u1, vel.u2)
        t = target
        if probes and any(abs(target - p) < 1e-12 * max(1.0, target) for p in probes):
            snapshots.append(_materialize(grid, t, omega, psi,
                                          state.gamma_infinity))
    final = _materialize(grid, t, omega, psi, state.gamma_infinity)
    return final, snapshots
