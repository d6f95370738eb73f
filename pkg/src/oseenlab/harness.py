"""Experiment driver: configured runs, decay measurements, and persistence.

Quantities follow one convention: a decay row stores the raw norm
|| . ||_{L^p} at a probe time together with the weighted value
t^{1/2 - 1/p} * raw, and a truncation bound for the part of the reference
vortex that lives beyond the grid's outer radius (|Theta| <= |alpha| /
(2 pi r) there, integrated in closed form and carried with the same
t^{1/2 - 1/p} weight so the two columns are directly comparable). Identical
configs produce byte-identical CSV output.

Within a study the individual evolutions are independent and could run
concurrently; result assembly is sequential and ordered by config.
"""

import math
import os
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import (
    Blob,
    BlobSpec,
    blob_vorticity,
    heat_spread,
    oseen_velocity_xy,
)
from .elliptic import ModalWorkspace, solve_streamfunction, velocity_from_streamfunction
from .evolve import State, StepPolicy, evolve_to, init_state
from .fields import (
    VectorField,
    gradient_frobenius,
    lp_norm,
    sample_scalar,
    subtract,
    weak_l2_quasinorm,
)
from .geometry import Grid, build_grid

CSV_HEADER = "label,t,p,raw_norm,weighted_value,truncation_bound"

_MODES = ("nonlinear", "linear", "linear_H", "alpha_study", "rescaling", "estimates")


class ConfigError(ValueError):
    """Invalid experiment configuration or config file."""


class SnapshotFormatError(ValueError):
    """Snapshot payload is not a valid OSN1 record."""


def _default_blobs() -> BlobSpec:
    return BlobSpec((Blob((6.0, 0.0), 1.0, 1.0), Blob((-6.0, 0.0), 1.0, -1.0)))


@dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible experiment; every run is a pure function of this."""

    mode: str = "nonlinear"
    r_wall: float = 1.0
    s_max: float = math.log(64.0)
    n_s: int = 192
    n_theta: int = 128
    dt: float = 1e-3
    t_final: float = 50.0
    alpha: float = 0.1
    blobs: BlobSpec = field(default_factory=_default_blobs)
    normalize_u0: Optional[float] = 1.0
    probes: tuple = (1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0)
    p_list: tuple = (4.0,)
    startup_until: float = 0.1
    startup_dt: Optional[float] = None
    t0: float = 5.0
    alphas: tuple = (0.1, 0.05, 0.025)
    rescale_lambda: float = 2.0
    rescale_time: float = 1.0
    estimate_pairs: tuple = ((2.0, 4.0), (1.5, 3.0), (2.0, math.inf))
    gradient_pairs: tuple = ((1.5, 2.0), (2.0, 2.0))
    divform_pairs: tuple = ((2.0, 4.0),)
    tail_window_start: float = 10.0
    seed: int = 0
    random_blob_pairs: int = 0
    csv_out: Optional[str] = None
    snapshot_dir: Optional[str] = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        for p in self.p_list:
            if not (2.0 < p < math.inf):
                raise ConfigError(f"exponents must lie in (2, inf), got {p}")
        for t in self.probes:
            if not (0.0 < t <= self.t_final + 1e-12):
                raise ConfigError(f"probe {t} outside (0, t_final]")
        if list(self.probes) != sorted(self.probes):
            raise ConfigError("probes must be sorted increasing")
        if self.dt <= 0.0 or self.t_final <= 0.0:
            raise ConfigError("dt and t_final must be positive")

    def grid(self) -> Grid:
        return build_grid(self.r_wall, self.s_max, self.n_s, self.n_theta)

    def policy(self, advection: bool, prescribed=None) -> StepPolicy:
        return StepPolicy(
            dt=self.dt,
            advection=advection,
            wall_mode="prescribed" if prescribed is not None else "noslip",
            prescribed=prescribed,
            startup_until=self.startup_until,
            startup_dt=self.startup_dt,
        )


# --------------------------------------------------------------------- #
# initial data
# --------------------------------------------------------------------- #

def config_blobs(cfg: ExperimentConfig) -> BlobSpec:
    """The configured blob set, with optional seeded random placement."""
    if cfg.blobs.count or cfg.random_blob_pairs <= 0:
        return cfg.blobs
    rng = np.random.default_rng(cfg.seed)
    blobs = []
    for _ in range(cfg.random_blob_pairs):
        rho = rng.uniform(5.0, 9.0)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        width = rng.uniform(0.8, 1.2)
        mass = rng.uniform(0.5, 1.5)
        blobs.append(Blob((rho * math.cos(phi), rho * math.sin(phi)), width, mass))
        blobs.append(Blob((-rho * math.cos(phi), -rho * math.sin(phi)), width, -mass))
    return BlobSpec(tuple(blobs))


def normalized_blobs(cfg: ExperimentConfig, grid: Grid,
                     workspace: Optional[ModalWorkspace] = None) -> BlobSpec:
    """Blob masses rescaled so the induced velocity has the target L2 norm."""
    blobs = config_blobs(cfg)
    if cfg.normalize_u0 is None or not blobs.count:
        return blobs
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    probe = init_state(0.0, blobs, grid, ws)
    norm = lp_norm(probe.velocity, 2.0)
    if norm == 0.0:
        raise ConfigError("cannot normalize a zero blob velocity field")
    return blobs.scaled(cfg.normalize_u0 / norm)


# --------------------------------------------------------------------- #
# decay series
# --------------------------------------------------------------------- #

@dataclass(frozen=True)
class DecayRow:
    label: str
    t: float
    p: float
    raw_norm: float
    weighted_value: float
    truncation_bound: float


@dataclass
class DecaySeries:
    """Time-indexed measured decay quantities, multiple labels allowed."""

    rows: list = field(default_factory=list)

    def add(self, label, t, p, raw, weighted, trunc):
        self.rows.append(DecayRow(label, float(t), float(p), float(raw),
                                  float(weighted), float(trunc)))

    def labels(self):
        return sorted({r.label for r in self.rows})

    def values(self, label: str, p: float):
        """Probe times and weighted values for one (label, p) curve."""
        pts = sorted((r.t, r.weighted_value) for r in self.rows
                     if r.label == label and r.p == p)
        return [t for t, _ in pts], [v for _, v in pts]

    def check(self):
        seen = {}
        for r in self.rows:
            if r.weighted_value < 0.0:
                raise ValueError("weighted values must be nonnegative")
            key = (r.label, r.p)
            if key in seen and r.t <= seen[key]:
                raise ValueError(f"times not strictly increasing for {key}")
            seen[key] = r.t

    def to_csv_text(self) -> str:
        self.check()
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                r.label,
                _fmt(r.t), _fmt(r.p), _fmt(r.raw_norm),
                _fmt(r.weighted_value), _fmt(r.truncation_bound),
            ]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv_text())


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_csv_text(text: str) -> DecaySeries:
    """Parse a results CSV, reporting schema violations with line numbers."""
    lines = text.split("\n")
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"line 1: expected header {CSV_HEADER!r}")
    series = DecaySeries()
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"line {idx}: expected 6 fields, got {len(parts)}")
        try:
            series.add(parts[0], *(float(v) for v in parts[1:]))
        except ValueError as exc:
            raise ValueError(f"line {idx}: {exc}") from None
    return series


def read_csv(path: str) -> DecaySeries:
    with open(path, "r") as fh:
        return read_csv_text(fh.read())


def oseen_truncation_bound(alpha: float, p: float, r_outer: float, t: float) -> float:
    """Weighted bound on || alpha Theta ||_{L^p} beyond the outer radius."""
    if alpha == 0.0:
        return 0.0
    if math.isinf(p):
        tail = abs(alpha) / (2.0 * math.pi * r_outer)
        return math.sqrt(t) * tail
    tail = abs(alpha) * ((2.0 * math.pi) ** (1.0 - p)
                         * r_outer ** (2.0 - p) / (p - 2.0)) ** (1.0 / p)
    return t ** (0.5 - 1.0 / p) * tail


# --------------------------------------------------------------------- #
# rate fits
# --------------------------------------------------------------------- #

@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    window: tuple
    count: int


def fit_rate(series: DecaySeries, window, label: Optional[str] = None,
             p: Optional[float] = None) -> RateFit:
    """Least-squares slope of log(weighted value) against log(t)."""
    labels = series.labels()
    if label is None:
        if len(labels) != 1:
            raise ValueError(f"series has labels {labels}; pick one")
        label = labels[0]
    ps = sorted({r.p for r in series.rows if r.label == label})
    if p is None:
        if len(ps) != 1:
            raise ValueError(f"label {label!r} has exponents {ps}; pick one")
        p = ps[0]
    t_min, t_max = window
    ts, vals = series.values(label, p)
    sel = [(t, v) for t, v in zip(ts, vals) if t_min <= t <= t_max]
    if len(sel) < 4:
        raise ValueError(f"window {window} contains {len(sel)} probes; need >= 4")
    if any(v <= 0.0 for _, v in sel):
        raise ValueError("rate fits require strictly positive values")
    x = np.log([t for t, _ in sel])
    y = np.log([v for _, v in sel])
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2)))
    return RateFit(float(coef[0]), float(coef[1]), resid, (t_min, t_max), len(sel))


# --------------------------------------------------------------------- #
# measurement helpers
# --------------------------------------------------------------------- #

def _oseen_on_grid(grid: Grid, alpha: float, t: float) -> VectorField:
    x, y = grid.cartesian()
    u1, u2 = oseen_velocity_xy(alpha, t, x, y)
    return VectorField(grid, u1, u2)


def _measure_decay(snapshots, cfg: ExperimentConfig, grid: Grid,
                   diff_label: str, total_label: Optional[str]) -> DecaySeries:
    series = DecaySeries()
    for snap in snapshots:
        theta_ref = _oseen_on_grid(grid, cfg.alpha, snap.t)
        diff = subtract(snap.velocity, theta_ref)
        for p in cfg.p_list:
            weight = snap.t ** (0.5 - 1.0 / p)
            bound = oseen_truncation_bound(cfg.alpha, p, grid.r_outer, snap.t)
            raw = lp_norm(diff, p)
            series.add(diff_label, snap.t, p, raw, weight * raw, bound)
            if total_label is not None:
                raw_u = lp_norm(snap.velocity, p)
                series.add(total_label, snap.t, p, raw_u, weight * raw_u, bound)
    series.rows.sort(key=lambda r: (r.label, r.p, r.t))
    return series


def _finish(series: DecaySeries, cfg: ExperimentConfig, snapshots=None):
    series.check()
    if cfg.csv_out:
        series.write_csv(cfg.csv_out)
    if cfg.snapshot_dir and snapshots:
        os.makedirs(cfg.snapshot_dir, exist_ok=True)
        for snap in snapshots:
            write_snapshot(os.path.join(cfg.snapshot_dir,
                                        f"snapshot_t{snap.t:012.6f}.osn"), snap)
    return series


# --------------------------------------------------------------------- #
# runs
# --------------------------------------------------------------------- #

def run_nonlinear_decay(cfg: ExperimentConfig,
                        workspace: Optional[ModalWorkspace] = None,
                        on_step=None) -> DecaySeries:
    """Full nonlinear evolution of blob data plus alpha times the harmonic
    swirl, measured against alpha times the Lamb-Oseen vortex."""
    if cfg.mode != "nonlinear":
        raise ConfigError(f"run_nonlinear_decay requires mode nonlinear, got {cfg.mode}")
    grid = cfg.grid()
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    blobs = normalized_blobs(cfg, grid, ws)
    state = init_state(cfg.alpha, blobs, grid, ws)
    _, snaps = evolve_to(state, cfg.t_final, cfg.policy(advection=True),
                         probes=cfg.probes, on_step=on_step, workspace=ws)
    series = _measure_decay(snaps, cfg, grid, "u_minus_oseen", "u_total")
    return _finish(series, cfg, snaps)


def run_linear_oseen(cfg: ExperimentConfig,
                     workspace: Optional[ModalWorkspace] = None) -> DecaySeries:
    """Advection-off evolution of the harmonic swirl against the vortex."""
    if cfg.mode != "linear_H":
        raise ConfigError(f"run_linear_oseen requires mode linear_H, got {cfg.mode}")
    grid = cfg.grid()
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    state = init_state(cfg.alpha, None, grid, ws)
    _, snaps = evolve_to(state, cfg.t_final, cfg.policy(advection=False),
                         probes=cfg.probes, workspace=ws)
    series = _measure_decay(snaps, cfg, grid, "stokes_H_minus_oseen", None)
    return _finish(series, cfg, snaps)


def run_linear(cfg: ExperimentConfig,
               workspace: Optional[ModalWorkspace] = None) -> DecaySeries:
    """Advection-off evolution of blob data; measures the plain norms."""
    if cfg.mode != "linear":
        raise ConfigError(f"run_linear requires mode linear, got {cfg.mode}")
    grid = cfg.grid()
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    blobs = normalized_blobs(cfg, grid, ws)
    state = init_state(0.0, blobs, grid, ws)
    _, snaps = evolve_to(state, cfg.t_final, cfg.policy(advection=False),
                         probes=cfg.probes, workspace=ws)
    series = DecaySeries()
    for snap in snaps:
        for p in cfg.p_list:
            raw = lp_norm(snap.velocity, p)
            series.add("stokes_u", snap.t, p, raw,
                       snap.t ** (0.5 - 1.0 / p) * raw, 0.0)
    series.rows.sort(key=lambda r: (r.label, r.p, r.t))
    return _finish(series, cfg, snaps)


# --------------------------------------------------------------------- #
# semigroup estimate verification
# --------------------------------------------------------------------- #

@dataclass
class EstimateReport:
    """Empirical decay constants of the advection-off evolution.

    Each entry is the supremum over probe times of the correspondingly
    weighted ratio; all are homogeneous of degree zero in the initial data.
    """

    lp_decay: dict
    weak_l2_stability: float
    gradient_decay: dict
    divform_decay: dict
    tail_nonincreasing: dict
    heat_check_rel_error: float

    def check(self):
        values = ([self.weak_l2_stability, self.heat_check_rel_error]
                  + list(self.lp_decay.values())
                  + list(self.gradient_decay.values())
                  + list(self.divform_decay.values()))
        if not all(math.isfinite(v) and v >= 0.0 for v in values):
            raise ValueError("estimate report entries must be finite and nonnegative")

    def to_text(self) -> str:
        lines = []
        for (q, p), v in sorted(self.lp_decay.items()):
            lines.append(f"lp_decay,q={_fmt(q)},p={_fmt(p)},sup={_fmt(v)},"
                         f"tail_nonincreasing={int(self.tail_nonincreasing[(q, p)])}")
        lines.append(f"weak_l2_stability,sup={_fmt(self.weak_l2_stability)}")
        for (q, p), v in sorted(self.gradient_decay.items()):
            lines.append(f"gradient_decay,q={_fmt(q)},p={_fmt(p)},sup={_fmt(v)}")
        for (q, p), v in sorted(self.divform_decay.items()):
            lines.append(f"divform_decay,q={_fmt(q)},p={_fmt(p)},sup={_fmt(v)}")
        lines.append(f"heat_check_rel_error,{_fmt(self.heat_check_rel_error)}")
        return "\n".join(lines) + "\n"


def _divform_initial(grid: Grid, ws: ModalWorkspace):
    """Initial velocity as the projected row-divergence of a smooth matrix.

    F has the off-diagonal bump structure F12 = phi, F21 = -phi for a
    Gaussian phi, so curl(div F) = -Lap phi in closed form; the velocity is
    recovered from that vorticity through the zero-circulation solve. The
    Frobenius norm of F is sqrt(2) |phi|.
    """
    cx, cy, width = 4.0, 0.0, 1.0

    def phi(x, y):
        return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width**2))

    def neg_lap_phi(x, y):
        d2 = (x - cx) ** 2 + (y - cy) ** 2
        return -phi(x, y) * (d2 / width**4 - 2.0 / width**2)

    omega0 = sample_scalar(grid, neg_lap_phi)
    psi = solve_streamfunction(omega0, 0.0, ws)
    v0 = velocity_from_streamfunction(psi)
    f_frob = sample_scalar(grid, lambda x, y: math.sqrt(2.0) * phi(x, y))
    return v0, omega0, f_frob


def _tail_flag(ts, vals, t_start: float) -> bool:
    tail = [v for t, v in zip(ts, vals) if t >= t_start]
    return all(tail[i + 1] <= tail[i] * (1.0 + 1e-9) for i in range(len(tail) - 1))


def verify_semigroup_estimates(cfg: ExperimentConfig,
                               workspace: Optional[ModalWorkspace] = None) -> EstimateReport:
    """Measure the decay constants of the discrete advection-off evolution.

    Three runs: blob data for the L^p and gradient constants, the harmonic
    swirl for weak-L2 stability, and divergence-form data for the matrix
    estimate. A small-time probe of the blob run is compared against the
    exact free-heat evolution of its vorticity (blobs far from the wall
    barely feel it early on).
    """
    if cfg.mode != "estimates":
        raise ConfigError(f"verify_semigroup_estimates requires mode estimates,"
                          f" got {cfg.mode}")
    grid = cfg.grid()
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    policy = cfg.policy(advection=False)

    blobs = normalized_blobs(cfg, grid, ws)
    state0 = init_state(0.0, blobs, grid, ws)
    _, snaps = evolve_to(state0, cfg.t_final, policy, probes=cfg.probes,
                         workspace=ws)

    lp_decay = {}
    tails = {}
    for q, p in cfg.estimate_pairs:
        v0_q = lp_norm(state0.velocity, q)
        ts = [s.t for s in snaps]
        vals = [s.t ** (1.0 / q - 1.0 / p) * lp_norm(s.velocity, p) / v0_q
                if v0_q > 0.0 else 0.0 for s in snaps]
        lp_decay[(q, p)] = max(vals)
        tails[(q, p)] = _tail_flag(ts, vals, cfg.tail_window_start)

    gradient_decay = {}
    for q, p in cfg.gradient_pairs:
        v0_q = lp_norm(state0.velocity, q)
        vals = [s.t ** (0.5 - 1.0 / p + 1.0 / q)
                * lp_norm(gradient_frobenius(s.velocity), p) / v0_q
                if v0_q > 0.0 else 0.0 for s in snaps]
        gradient_decay[(q, p)] = max(vals)

    # small-time check against the exact whole-plane heat evolution
    t_small = snaps[0].t
    heat_omega = blob_vorticity(heat_spread(blobs, t_small), grid)
    heat_u = velocity_from_streamfunction(
        solve_streamfunction(heat_omega, 0.0, ws))
    sim_l4 = lp_norm(snaps[0].velocity, 4.0)
    free_l4 = lp_norm(heat_u, 4.0)
    heat_err = abs(sim_l4 - free_l4) / free_l4 if free_l4 > 0.0 else 0.0

    # weak-L2 stability measured on the harmonic swirl
    state_h = init_state(1.0, None, grid, ws)
    _, snaps_h = evolve_to(state_h, cfg.t_final, policy, probes=cfg.probes,
                           workspace=ws)
    h_quasi = weak_l2_quasinorm(state_h.velocity)
    weak_l2_stability = max(weak_l2_quasinorm(s.velocity) / h_quasi
                            for s in snaps_h)

    # divergence-form data
    v0, omega0, f_frob = _divform_initial(grid, ws)
    state_f = State(0.0, omega0, solve_streamfunction(omega0, 0.0, ws), v0, 0.0)
    _, snaps_f = evolve_to(state_f, cfg.t_final, policy, probes=cfg.probes,
                           workspace=ws)
    divform_decay = {}
    for q, p in cfg.divform_pairs:
        f_q = lp_norm(f_frob, q)
        vals = [s.t ** (0.5 - 1.0 / p + 1.0 / q) * lp_norm(s.velocity, p) / f_q
                for s in snaps_f]
        divform_decay[(q, p)] = max(vals)

    report = EstimateReport(lp_decay, weak_l2_stability, gradient_decay,
                            divform_decay, tails, heat_err)
    report.check()
    return report


# --------------------------------------------------------------------- #
# studies
# --------------------------------------------------------------------- #

def alpha_scaling_study(cfg: ExperimentConfig, alphas=None,
                        workspace: Optional[ModalWorkspace] = None):
    """sup_{probes in [1, t0]} || u_a(t) - u_0(t) - a S(t)H ||_{L2} per a.

    Three evolutions per amplitude a: the nonlinear flow with and without
    the swirl component (the latter shared across amplitudes), and the
    advection-off evolution of the swirl alone. Returns (table, series)
    where table is a list of (alpha, sup) pairs and series carries the full
    z-norm decay rows (p = 2, unit weight).
    """
    if cfg.mode != "alpha_study":
        raise ConfigError(f"alpha_scaling_study requires mode alpha_study,"
                          f" got {cfg.mode}")
    alphas = tuple(alphas) if alphas is not None else cfg.alphas
    grid = cfg.grid()
    ws = workspace if workspace is not None else ModalWorkspace(grid)
    probes = tuple(t for t in cfg.probes if t <= cfg.t0 + 1e-12)
    if not probes:
        raise ConfigError("no probes at or below t0")
    blobs = normalized_blobs(cfg, grid, ws)

    pol_nl = cfg.policy(advection=True)
    pol_lin = cfg.policy(advection=False)
    _, snaps_base = evolve_to(init_state(0.0, blobs, grid, ws), cfg.t0,
                              pol_nl, probes=probes, workspace=ws)
    _, snaps_h = evolve_to(init_state(1.0, None, grid, ws), cfg.t0,
                           pol_lin, probes=probes, workspace=ws)

    table = []
    series = DecaySeries()
    for alpha in alphas:
        _, snaps_u = evolve_to(init_state(alpha, blobs, grid, ws), cfg.t0,
                               pol_nl, probes=probes, workspace=ws)
        sup = 0.0
        for su, sb, sh in zip(snaps_u, snaps_base, snaps_h):
            z = VectorField(grid,
                            su.velocity.u1 - sb.velocity.u1 - alpha * sh.velocity.u1,
                            su.velocity.u2 - sb.velocity.u2 - alpha * sh.velocity.u2)
            norm = lp_norm(z, 2.0)
            series.add(f"z_alpha_{alpha:g}", su.t, 2.0, norm, norm, 0.0)
            if su.t >= 1.0 - 1e-12:
                sup = max(sup, norm)
        table.append((alpha, sup))
    series.rows.sort(key=lambda r: (r.label, r.p, r.t))
    _finish(series, cfg)
    return table, series


def weak_l2_checkpoint(cfg: ExperimentConfig, times=None, snapshots=None,
                       workspace: Optional[ModalWorkspace] = None):
    """Weak-L2 quasinorm of the nonlinear flow at checkpoint times.

    Returns (rows, monotone_envelope) with rows of (t, quasinorm); the flag
    records whether the values are non-increasing along the checkpoints.
    Accepts precomputed snapshots to avoid re-running the flow.
    """
    times = tuple(times) if times is not None else cfg.probes
    if snapshots is None:
        grid = cfg.grid()
        ws = workspace if workspace is not None else ModalWorkspace(grid)
        blobs = normalized_blobs(cfg, grid, ws)
        state = init_state(cfg.alpha, blobs, grid, ws)
        _, snapshots = evolve_to(state, max(times), cfg.policy(advection=True),
                                 probes=times, workspace=ws)
    rows = [(s.t, weak_l2_quasinorm(s.velocity)) for s in snapshots]
    vals = [v for _, v in rows]
    monotone = all(vals[i + 1] <= vals[i] * (1.0 + 1e-9)
                   for i in range(len(vals) - 1))
    return rows, monotone


@dataclass(frozen=True)
class RescaleReport:
    lam: float
    t: float
    rel_l4_discrepancy: float


def rescaling_check(cfg: ExperimentConfig, lam: Optional[float] = None,
                    workspace: Optional[ModalWorkspace] = None) -> RescaleReport:
    """Discrete scale invariance of the advection-off swirl evolution.

    Evolve the harmonic swirl on the unit-wall grid to time lam^2 t and
    rescale by x -> x / lam (the log-polar nodes map onto the shrunk grid
    exactly, so no interpolation is involved); evolve the swirl on the
    1/lam-wall grid to time t; report the relative L4 gap between the two.
    """
    if cfg.mode != "rescaling":
        raise ConfigError(f"rescaling_check requires mode rescaling, got {cfg.mode}")
    lam = float(lam) if lam is not None else cfg.rescale_lambda
    if lam < 1.0:
        raise ConfigError(f"rescale factor must be >= 1, got {lam}")
    t = cfg.rescale_time
    grid1 = cfg.grid()
    grid_l = build_grid(cfg.r_wall / lam, cfg.s_max, cfg.n_s, cfg.n_theta)
    pol = cfg.policy(advection=False)
    fin1, _ = evolve_to(init_state(1.0, None, grid1), lam * lam * t, pol,
                        workspace=workspace)
    fin_l, _ = evolve_to(init_state(1.0, None, grid_l), t, pol)
    gap = VectorField(grid_l,
                      lam * fin1.velocity.u1 - fin_l.velocity.u1,
                      lam * fin1.velocity.u2 - fin_l.velocity.u2)
    rel = lp_norm(gap, 4.0) / lp_norm(fin_l.velocity, 4.0)
    return RescaleReport(lam, t, rel)


# --------------------------------------------------------------------- #
# snapshot binary format
# --------------------------------------------------------------------- #

_MAGIC = b"OSN1"
_HEADER = struct.Struct("<4sIIdddd")


def write_snapshot(path: str, state: State):
    """Write the OSN1 record: magic, grid shape, extents, time, circulation,
    then the vorticity plane as little-endian f64, radial-major."""
    grid = state.grid
    payload = _HEADER.pack(_MAGIC, grid.n_s, grid.n_theta, grid.r_wall,
                           grid.S_max, state.t, state.gamma_infinity)
    values = np.ascontiguousarray(state.omega.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(values.tobytes())


def read_snapshot(path: str):
    """Read an OSN1 record; returns (header dict, vorticity array).

    Rejects wrong magic bytes and truncated or oversized payloads.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise SnapshotFormatError("snapshot shorter than its header")
    magic, n_s, n_theta, r_wall, s_max, t, gamma = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise SnapshotFormatError(f"bad magic bytes {magic!r}")
    expected = _HEADER.size + 8 * n_s * n_theta
    if len(blob) != expected:
        raise SnapshotFormatError(
            f"payload is {len(blob)} bytes, expected {expected}")
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(n_s, n_theta)
    header = {"n_s": n_s, "n_theta": n_theta, "r_wall": r_wall,
              "S_max": s_max, "t": t, "gamma_infinity": gamma}
    return header, values.copy()


# --------------------------------------------------------------------- #
# config files
# --------------------------------------------------------------------- #

def _parse_blobs(text: str) -> BlobSpec:
    blobs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(v) for v in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"blob {chunk!r} needs cx,cy,width,mass")
        blobs.append(Blob((parts[0], parts[1]), parts[2], parts[3]))
    return BlobSpec(tuple(blobs))


def _parse_pairs(text: str) -> tuple:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        q_str, p_str = chunk.split(":")
        pairs.append((float(q_str), float(p_str)))
    return tuple(pairs)


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


_PARSERS = {
    "mode": str,
    "r_wall": float,
    "s_max": float,
    "n_s": int,
    "n_theta": int,
    "dt": float,
    "t_final": float,
    "alpha": float,
    "blobs": _parse_blobs,
    "normalize_u0": lambda s: None if s.lower() in ("none", "off") else float(s),
    "probes": _parse_floats,
    "p_list": _parse_floats,
    "startup_until": float,
    "startup_dt": lambda s: None if s.lower() in ("none", "auto") else float(s),
    "t0": float,
    "alphas": _parse_floats,
    "rescale_lambda": float,
    "rescale_time": float,
    "estimate_pairs": _parse_pairs,
    "gradient_pairs": _parse_pairs,
    "divform_pairs": _parse_pairs,
    "tail_window_start": float,
    "seed": int,
    "random_blob_pairs": int,
    "csv_out": str,
    "snapshot_dir": str,
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse flat key=value lines; '#' starts a comment; unknown keys fail."""
    values = {}
    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {idx}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"line {idx}: unknown key {key!r}")
        try:
            values[key] = parser(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"line {idx}: bad value for {key}: {exc}") from None
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r") as fh:
        return parse_config_text(fh.read())
