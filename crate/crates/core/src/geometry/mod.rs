//! Geometry of 2-D metrics whose components depend on the first coordinate
//! only. Components are complex-valued so that metrics with imaginary entries
//! on the physical domain can be evaluated as written; real Riemannian and
//! Lorentzian metrics are the special case of vanishing imaginary parts.
//! All square roots use the principal branch.

mod barred;
mod causal;
mod connection;
mod curvature;
mod geodesic;
mod metric;

pub use barred::{barred_pullback_residual, barred_transform, QUADRATURE_REL_TOL};
pub use causal::{causal_character, CausalClass, NULL_THRESHOLD};
pub use connection::{
    analytic_connection_eq5, christoffel_from_metric, levi_civita_audit, write_deviation_csv,
    ActionAngleConnection, ConnectionCoefficients, ConnectionField, CotThetaConnection, LeviCivita,
    LeviCivitaPoint, ZeroConnection, COMPONENT_LABELS,
};
pub use curvature::{
    curvature_samples, scalar_curvature_barred, scalar_curvature_numeric, write_curvature_csv,
    CurvatureSample,
};
pub use geodesic::{geodesic_integrate, geodesic_integrate_with, quadratic_form, GeodesicState};
pub use metric::{
    candidate_h_rational, candidate_sample, dissipative_ode_residual, metric_ode_residual,
    prop2_metric, Chart, Component, MetricComponents, MetricSample, ScalarFn, Signature,
    SINGULAR_I,
};

use crate::dynamics::Trajectory;
use crate::quadrature::QuadratureError;
use num_complex::Complex64;
use thiserror::Error;

pub const DET_THRESHOLD: f64 = 1e-12;
pub const FD_STEP_FIRST: f64 = 1e-6;
pub const FD_STEP_SECOND: f64 = 1e-4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("outside the domain at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
    #[error("degenerate metric at x = {x} (|det| = {det:e})")]
    Degenerate { x: f64, det: f64 },
    #[error("metric is complex-valued at x = {x}; causal character needs a real metric")]
    ComplexSignature { x: f64 },
    #[error("connection is complex-valued at x = {x}; geodesics need a real connection")]
    ComplexConnection { x: f64 },
    #[error("barred transform failed: {0}")]
    Transform(#[from] QuadratureError),
    #[error("geodesic aborted near a connection pole at t = {t}")]
    Singularity { t: f64, partial: Box<Trajectory> },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Principal square root with a signed-zero imaginary part normalized to `+0`,
/// so that negative reals map to the positive imaginary axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    Complex64::new(z.re, z.im + 0.0).sqrt()
}
