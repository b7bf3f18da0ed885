//! Simulation and verification engine for 2D vector ambit fields.
//!
//! An ambit field is a moving-average random field `X(p) = ∫_{R+p} F(p-q) L(dq)`
//! where `L` is a homogeneous Lévy basis on the plane, `F` is a matrix/vector
//! kernel and `R` is a compact "ambit set" translated to the evaluation point.
//! This crate provides:
//!
//! * [`levy`] — Lévy basis triplets, cumulant functions, stable seeds and
//!   samplers, the modular `Φ⁰` functional and regime classification.
//! * [`geometry`] — the ambit-set catalogue (disks, annuli, convex polygons,
//!   set differences) with exact parallel-set areas, boundary discretization
//!   and Minkowski-content estimation.
//! * [`kernel`] — constant and rotated-isotropic kernel families with analytic
//!   divergence and curl.
//! * [`field`] — realization of Lévy bases on grids / as atom lists, field
//!   evaluation, and deterministic counter-based cell sampling.
//! * [`functional`] — flux and circulation functionals on small circles,
//!   their interior/boundary decomposition, limiting line-integral fields and
//!   exact characteristic-function oracles.
//! * [`lab`] — scaling-rate scans, limit-distribution tests and structural
//!   test batteries (incompressibility, isotropy, decomposition audits).
//! * [`report`] — serializable reports and CSV emission shared by the test
//!   batteries and the command-line front end.

pub mod field;
pub mod functional;
pub mod geometry;
pub mod kernel;
pub mod lab;
pub mod levy;
pub mod quad;
pub mod report;
pub mod rng;
pub mod vec2;

/// Errors produced by the engine.
///
/// The variants map onto the process exit codes used by the CLI: invalid or
/// unsupported configurations exit with 2, numerical failures with 3, and a
/// clean run whose statistical verdict fails exits with 1.
#[derive(thiserror::Error, Debug)]
pub enum AmbitError {
    /// The requested configuration is malformed or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The configuration is valid but outside the supported model class.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A quadrature, solver or sampler failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Underlying I/O failure (file dumps, CSV emission).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed JSON configuration or report.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    /// CSV emission failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, AmbitError>;

pub use vec2::Vec2;
