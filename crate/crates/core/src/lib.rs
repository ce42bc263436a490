//! Curvature-weighted network SIR epidemics.
//!
//! The engine couples a sparse contact graph with a per-edge curvature field:
//! curvature maps to positive edge weights through `w = exp(-kappa)`, the
//! weighted adjacency (raw or row-stochastic) becomes the transmission
//! operator `M`, and everything downstream — the reproduction number
//! `R0 = (beta/gamma) lambda_max(M)`, the mean-curvature suppression
//! threshold, the SIR flow with its Lyapunov monitors, and the endemic
//! equilibrium solver — is driven by that operator.
//!
//! Modules:
//! - [`graph`]: undirected graphs, stochastic block model sampling, edge-list I/O.
//! - [`curvature`]: Forman / synthetic / external curvature fields and weight maps.
//! - [`operator`]: contact matrices, power-iteration spectra, threshold certificates.
//! - [`dynamics`]: RK4 integration of the SIR flow, invariance and Lyapunov monitors.
//! - [`equilibrium`]: monotone fixed-point solver with ordered-convergence certificates.

pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod equilibrium;
pub mod graph;
pub mod operator;

pub use curvature::{
    clamp_unit, exp_weight, forman_curvature, load_curvature, synthetic_field, CurvatureField,
    CurvatureSource, WeightField,
};
pub use dynamics::{
    integrate, linear_lyapunov, omega_excess, omega_monitor, rhs, volterra_lyapunov, ClipEvent,
    EpidemicParams, OmegaReport, SirState, Trajectory,
};
pub use equilibrium::{
    apply_t, cross_check_ode, solve_endemic, CrossCheck, EquilibriumReport, MonotoneCertificate,
    SolveOptions,
};
pub use error::{Error, Result};
pub use graph::{sbm_generate, CommunityPartition, Graph};
pub use operator::{
    basic_reproduction_number, geometric_threshold, spectral_radius, spectral_reduction_check,
    ContactMatrix, MatrixMode, ReductionCheck, SpectralReport, ThresholdReport,
};
