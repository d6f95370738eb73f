"""Viscous vortex decay lab for 2D incompressible flow outside a disk.

A vorticity-streamfunction solver on a log-polar annulus grid, closed-form
Lamb-Oseen and harmonic reference fields, and a measurement harness that
tracks weighted L^p decay of the flow toward the vortex.
"""

from .analytic import (
    Blob,
    BlobSpec,
    OseenParams,
    blob_vorticity,
    harmonic_velocity,
    oseen_time_shift_distance,
    oseen_velocity,
    oseen_vorticity,
)
from .elliptic import ModalWorkspace, solve_streamfunction, velocity_from_streamfunction
from .evolve import (
    CflError,
    PrescribedData,
    SolverError,
    State,
    StepPolicy,
    courant_number,
    evolve_to,
    init_state,
    step,
)
from .fields import (
    ScalarField,
    VectorField,
    axpy,
    circulation,
    curl,
    lp_norm,
    sample_scalar,
    sample_vector,
    subtract,
    weak_l2_quasinorm,
)
from .geometry import Grid, build_grid, cartesian_coords
from .harness import (
    ConfigError,
    DecaySeries,
    EstimateReport,
    ExperimentConfig,
    RateFit,
    SnapshotFormatError,
    alpha_scaling_study,
    fit_rate,
    load_config,
    parse_config_text,
    read_csv,
    read_snapshot,
    rescaling_check,
    run_linear,
    run_linear_oseen,
    run_nonlinear_decay,
    verify_semigroup_estimates,
    weak_l2_checkpoint,
    write_snapshot,
)

__all__ = [
    "Blob",
    "BlobSpec",
    "CflError",
    "ConfigError",
    "DecaySeries",
    "EstimateReport",
    "ExperimentConfig",
    "Grid",
    "ModalWorkspace",
    "OseenParams",
    "PrescribedData",
    "RateFit",
    "ScalarField",
    "SnapshotFormatError",
    "SolverError",
    "State",
    "StepPolicy",
    "VectorField",
    "alpha_scaling_study",
    "axpy",
    "blob_vorticity",
    "build_grid",
    "cartesian_coords",
    "circulation",
    "courant_number",
    "curl",
    "evolve_to",
    "fit_rate",
    "harmonic_velocity",
    "init_state",
    "load_config",
    "lp_norm",
    "oseen_time_shift_distance",
    "oseen_velocity",
    "oseen_vorticity",
    "parse_config_text",
    "read_csv",
    "read_snapshot",
    "rescaling_check",
    "run_linear",
    "run_linear_oseen",
    "run_nonlinear_decay",
    "sample_scalar",
    "sample_vector",
    "solve_streamfunction",
    "step",
    "subtract",
    "velocity_from_streamfunction",
    "verify_semigroup_estimates",
    "weak_l2_checkpoint",
    "weak_l2_quasinorm",
    "write_snapshot",
]
