//! Qubit dynamics in action–angle variables, possibly complex-valued 2-D
//! metric geometry, and residual-based audits that compare the two.
//!
//! * [`state_maps`]: amplitudes, Bloch vectors, action–angle and spherical coordinates.
//! * [`dynamics`]: exact propagation, Hamilton flow, dissipative/stochastic flow.
//! * [`geometry`]: metrics, Levi-Civita connections, geodesics, curvature, barred charts.
//! * [`audit`]: calibrated checks assembled into a deterministic JSON report.
//!
//! Independent work items (grid points, ensemble members, sweep cells, audit
//! checks) go through [`parallel::map`], which uses rayon when the `parallel`
//! feature is on and runs sequentially otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod dynamics;
pub mod geometry;
pub mod ode;
pub mod parallel;
pub mod quadrature;
pub mod state_maps;

pub use dynamics::{ConventionParams, DissipationParams, FieldParams, Trajectory};
pub use state_maps::{ActionAnglePoint, BlochVector, QubitAmplitudes};
