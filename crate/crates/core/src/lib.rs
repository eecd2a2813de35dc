//! Pseudospectral simulation and analysis of the generalized Hartree
//! equation
//!
//! ```text
//! i u_t + Δu + μ (|x|^{−(N−γ)} ∗ |u|^p) |u|^{p−2} u = 0,   x ∈ ℝ^N, 1 < p < 2,
//! ```
//!
//! on periodic boxes: parameter admissibility, Fourier multipliers,
//! conserved quantities and virial identities, Strang splitting, the virial
//! blow-up criterion, pseudo-conformal scattering diagnostics and empirical
//! checks of weighted inequalities.

pub mod criteria;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod grid;
pub mod io;
pub mod observables;
pub mod params;
pub mod special;
pub mod spectral;
pub mod weighted;

pub use num_complex::Complex64;

pub use criteria::{
    blowup_criterion, blowup_f, chirp_b_ranges, chirped_observables, pseudo_conformal_map, scattering_residual,
    scattering_state, BlowupVerdict, ChirpRanges, ChirpedObservables, SignCase,
};
pub use error::{Error, Result};
pub use evolution::{
    blowup_monitor, evolve, hartree_nonlinearity, strang_step, HaltDecision, HaltReason, IntegratorConfig, Stepper,
    TrajectoryResult,
};
pub use grid::{sample, Field, Grid, InitialData};
pub use io::{read_snapshot, read_timeseries, write_snapshot, write_timeseries};
pub use observables::{
    conserved_quantities, min_weighted_modulus, spectral_tail_fraction, virial_quantities, x_norm, ObservableRecord,
    Observer,
};
pub use params::{
    classify, contraction_polynomials, derived_constants, existence_time_estimate, suggest_orders,
    validate_blowup_regime, validate_wellposedness, AdmissibilityReport, ChirpConvention, DerivedConstants,
    ModelParameters, ParamSpec, Regime,
};
pub use spectral::{
    bessel, fourier_multiplier, free_propagate, gradient, riesz_derivative, riesz_potential, stein_derivative,
    MeanPolicy, RieszKernel, ZeroMode,
};
pub use weighted::RatioReport;

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
