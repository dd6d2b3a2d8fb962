//! Time evolution of a qubit: exact two-level propagation, the classical
//! Hamilton flow in action–angle variables, its second-order form, and the
//! dissipative / stochastic extension.

mod classical;
mod dissipative;
mod hamiltonian;
mod quantum;
mod trajectory;

pub use classical::{evolve_classical, evolve_classical_with};
pub use dissipative::{
    dissipative_rhs, dissipative_second_order_residuals, evolve_dissipative,
    evolve_dissipative_with, ht_value, ou_noise_step, run_ensemble, DissipativeResidual,
};
pub use hamiltonian::{
    flow_acceleration, h0_value, hamilton_rhs, second_order_acceleration, second_order_line1,
    second_order_line2, second_order_residual, AccelerationSource, SecondOrderResidual,
};
pub use quantum::{bloch_velocity, quantum_propagator_step, quantum_trajectory};
pub use trajectory::Trajectory;

use crate::ode::OdeError;
use crate::state_maps::{ActionAnglePoint, StateError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Accepted states must stay this far from `|I| = 1` when transverse fields act.
pub const SINGULAR_BAND: f64 = 1e-6;
/// Initial conditions closer than this to `|I| = 1` are refused (transverse fields).
pub const START_GUARD: f64 = 1e-3;

/// Coefficients of `H = ax sx + ay sy + az sz` (hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FieldParams {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl FieldParams {
    pub const fn new(ax: f64, ay: f64, az: f64) -> Self {
        Self { ax, ay, az }
    }

    pub fn has_transverse(&self) -> bool {
        self.ax != 0.0 || self.ay != 0.0
    }

    pub fn magnitude(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if [self.ax, self.ay, self.az].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(DynamicsError::InvalidParams(
                "field coefficients must be finite".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub gamma: f64,
    /// Multiplier on the friction term `gamma * dPhi` in the action equation.
    pub friction_factor: f64,
    pub noise_sigma: f64,
    pub noise_tau: f64,
    pub seed: u64,
}

impl Default for DissipationParams {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            friction_factor: 1.0,
            noise_sigma: 0.0,
            noise_tau: 1.0,
            seed: 0,
        }
    }
}

impl DissipationParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = self.gamma >= 0.0
            && self.gamma.is_finite()
            && self.friction_factor.is_finite()
            && self.noise_sigma >= 0.0
            && self.noise_sigma.is_finite()
            && self.noise_tau > 0.0
            && self.noise_tau.is_finite();
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::InvalidParams(format!(
                "need gamma >= 0, noise_sigma >= 0, noise_tau > 0 (got {self:?})"
            )))
        }
    }
}

/// Relation between the quantum clock/phase and the classical flow: the
/// classical trajectory at time `time_factor * t` with angle `sign * (phi1 - phi2)`
/// reproduces the quantum state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionParams {
    pub time_factor: f64,
    pub sign: i8,
}

impl ConventionParams {
    pub fn classical_angle(&self, quantum_phase: f64) -> f64 {
        f64::from(self.sign) * quantum_phase
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(
        "initial action I = {0} lies within the start guard of |I| = 1 with transverse fields"
    )]
    StartTooCloseToPole(f64),
    #[error("vector field singular at I = {action} (within {band:e} of |I| = 1)")]
    SingularPoint { action: f64, band: f64 },
    #[error("integration aborted near a singularity at t = {t}; last good state I = {}, Phi = {}", last.action, last.angle)]
    Singularity {
        t: f64,
        last: ActionAnglePoint,
        partial: Box<Trajectory>,
    },
    #[error("integrator failure: {0}")]
    Integrator(OdeError),
}

impl DynamicsError {
    /// Trajectory computed before an abort, if any.
    pub fn partial_trajectory(&self) -> Option<&Trajectory> {
        match self {
            DynamicsError::Singularity { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Number of output intervals covering `[0, t_final]` with spacing `dt`.
pub(crate) fn output_steps(dt: f64, t_final: f64) -> Result<usize, DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(DynamicsError::InvalidParams(format!(
            "need dt > 0 and t_final >= 0 (got dt = {dt}, t_final = {t_final})"
        )));
    }
    Ok((t_final / dt - 1e-9).ceil().max(0.0) as usize)
}
