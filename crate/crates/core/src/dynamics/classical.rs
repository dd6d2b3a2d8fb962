use super::{hamilton_rhs, output_steps, DynamicsError, FieldParams, Trajectory, START_GUARD};
use crate::ode::{Integrator, OdeError, OutsideDomain};
use crate::state_maps::{ActionAnglePoint, StateError};

pub(crate) fn check_start(p0: &ActionAnglePoint, a: &FieldParams) -> Result<(), DynamicsError> {
    if !p0.action.is_finite() || !p0.angle.is_finite() {
        return Err(StateError::NonFinite.into());
    }
    if p0.action.abs() >= 1.0 {
        return Err(StateError::ActionOutOfRange(p0.action).into());
    }
    if a.has_transverse() && p0.action.abs() > 1.0 - START_GUARD {
        return Err(DynamicsError::StartTooCloseToPole(p0.action));
    }
    Ok(())
}

pub(crate) fn abort(err: OdeError, traj: Trajectory) -> DynamicsError {
    match err {
        OdeError::StepUnderflow { .. } | OdeError::TooManySteps(..) if !traj.is_empty() => {
            let t = match err {
                OdeError::StepUnderflow { t, .. } => t,
                _ => *traj.times.last().expect("non-empty"),
            };
            DynamicsError::Singularity {
                t,
                last: traj.last_point().expect("non-empty"),
                partial: Box::new(traj),
            }
        }
        other => DynamicsError::Integrator(other),
    }
}

/// Integrates Hamilton's equations with default tolerances, sampling every `dt`.
pub fn evolve_classical(
    p0: &ActionAnglePoint,
    a: &FieldParams,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory, DynamicsError> {
    evolve_classical_with(p0, a, dt, t_final, &Integrator::default())
}

pub fn evolve_classical_with(
    p0: &ActionAnglePoint,
    a: &FieldParams,
    dt: f64,
    t_final: f64,
    integrator: &Integrator,
) -> Result<Trajectory, DynamicsError> {
    a.validate()?;
    check_start(p0, a)?;
    let n = output_steps(dt, t_final)?;
    let mut traj = Trajectory::with_velocities(n + 1);
    let result = integrator.sample_grid(
        |_, y: &[f64; 2]| {
            hamilton_rhs(
                &ActionAnglePoint {
                    action: y[0],
                    angle: y[1],
                },
                a,
            )
            .map_err(|_| OutsideDomain)
        },
        [p0.action, p0.angle],
        dt,
        n,
        |_, t, y, f| traj.push(t, *y, *f),
    );
    match result {
        Ok(()) => Ok(traj),
        Err(e) => Err(abort(e, traj)),
    }
}
