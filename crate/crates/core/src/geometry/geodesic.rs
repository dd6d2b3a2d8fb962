use super::connection::ConnectionField;
use super::metric::MetricComponents;
use super::GeometryError;
use crate::dynamics::Trajectory;
use crate::ode::{Integrator, OdeError, OutsideDomain};

/// Imaginary parts above this make a connection unusable for real geodesics.
const REAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
}

impl GeodesicState {
    pub fn new(position: [f64; 2], velocity: [f64; 2]) -> Self {
        Self { position, velocity }
    }
}

/// `f v1^2 + 2 g v1 v2 + h v2^2` with the real parts of the components at `x1`.
pub fn quadratic_form(m: &MetricComponents, x1: f64, v: [f64; 2]) -> f64 {
    let (f, g, h) = (m.f.value(x1).re, m.g.value(x1).re, m.h.value(x1).re);
    f * v[0] * v[0] + 2.0 * g * v[0] * v[1] + h * v[1] * v[1]
}

pub fn geodesic_integrate(
    c: &dyn ConnectionField,
    s0: GeodesicState,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory, GeometryError> {
    geodesic_integrate_with(c, s0, dt, t_final, &Integrator::default())
}

/// Integrates `x'' + Gamma(x)(x', x') = 0`, sampling every `dt`.
pub fn geodesic_integrate_with(
    c: &dyn ConnectionField,
    s0: GeodesicState,
    dt: f64,
    t_final: f64,
    integrator: &Integrator,
) -> Result<Trajectory, GeometryError> {
    if !(dt > 0.0) || !(t_final >= 0.0) || !dt.is_finite() || !t_final.is_finite() {
        return Err(GeometryError::InvalidParams(format!(
            "need dt > 0 and t_final >= 0 (got dt = {dt}, t_final = {t_final})"
        )));
    }
    if s0
        .position
        .iter()
        .chain(&s0.velocity)
        .any(|v| !v.is_finite())
    {
        return Err(GeometryError::InvalidParams(
            "non-finite initial state".into(),
        ));
    }
    let start = c.at(s0.position[0])?;
    if start.max_imag() > REAL_TOLERANCE {
        return Err(GeometryError::ComplexConnection { x: s0.position[0] });
    }

    let n = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory::with_velocities(n + 1);
    let y0 = [
        s0.position[0],
        s0.position[1],
        s0.velocity[0],
        s0.velocity[1],
    ];
    let result = integrator.sample_grid(
        |_, y: &[f64; 4]| {
            let g = c.at(y[0]).map_err(|_| OutsideDomain)?;
            if g.max_imag() > REAL_TOLERANCE {
                return Err(OutsideDomain);
            }
            let [a1, a2] = g.acceleration([y[2], y[3]]);
            Ok([y[2], y[3], a1, a2])
        },
        y0,
        dt,
        n,
        |_, t, y, _| traj.push(t, [y[0], y[1]], [y[2], y[3]]),
    );
    match result {
        Ok(()) => Ok(traj),
        Err(e @ (OdeError::StepUnderflow { .. } | OdeError::TooManySteps(_)))
            if !traj.is_empty() =>
        {
            let t = match e {
                OdeError::StepUnderflow { t, .. } => t,
                _ => traj.times[traj.len() - 1],
            };
            Err(GeometryError::Singularity {
                t,
                partial: Box::new(traj),
            })
        }
        Err(e) => Err(GeometryError::InvalidParams(e.to_string())),
    }
}
