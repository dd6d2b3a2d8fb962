use super::{DynamicsError, FieldParams, Trajectory, SINGULAR_BAND};
use crate::state_maps::{ActionAnglePoint, StateError};

/// `H0 = sqrt(1 - I^2) (2 ax cos Phi + 2 ay sin Phi) + 2 az I`.
pub fn h0_value(p: &ActionAnglePoint, a: &FieldParams) -> Result<f64, DynamicsError> {
    if !(p.action.abs() <= 1.0) {
        return Err(StateError::ActionOutOfRange(p.action).into());
    }
    let s = (1.0 - p.action * p.action).sqrt();
    let (sin, cos) = p.angle.sin_cos();
    Ok(s * (2.0 * a.ax * cos + 2.0 * a.ay * sin) + 2.0 * a.az * p.action)
}

fn check_domain(action: f64, a: &FieldParams) -> Result<(), DynamicsError> {
    if !action.is_finite() || action.abs() >= 1.0 {
        return Err(StateError::ActionOutOfRange(action).into());
    }
    if a.has_transverse() && action.abs() > 1.0 - SINGULAR_BAND {
        return Err(DynamicsError::SingularPoint {
            action,
            band: SINGULAR_BAND,
        });
    }
    Ok(())
}

/// Hamilton's equations `dI = -dH0/dPhi`, `dPhi = dH0/dI`.
pub fn hamilton_rhs(p: &ActionAnglePoint, a: &FieldParams) -> Result<[f64; 2], DynamicsError> {
    check_domain(p.action, a)?;
    let i = p.action;
    let s = (1.0 - i * i).sqrt();
    let (sin, cos) = p.angle.sin_cos();
    let di = 2.0 * s * (a.ax * sin - a.ay * cos);
    let dphi = -(2.0 * i / s) * (a.ay * sin + a.ax * cos) + 2.0 * a.az;
    Ok([di, dphi])
}

/// Acceleration along the flow, by the chain rule applied to [`hamilton_rhs`].
pub fn flow_acceleration(p: &ActionAnglePoint, a: &FieldParams) -> Result<[f64; 2], DynamicsError> {
    let [di, dphi] = hamilton_rhs(p, a)?;
    let i = p.action;
    let s = (1.0 - i * i).sqrt();
    let (sin, cos) = p.angle.sin_cos();
    let di_di = -2.0 * (i / s) * (a.ax * sin - a.ay * cos);
    let di_dphi = 2.0 * s * (a.ax * cos + a.ay * sin);
    let dphi_di = -(2.0 / (s * s * s)) * (a.ay * sin + a.ax * cos);
    let dphi_dphi = -(2.0 * i / s) * (a.ay * cos - a.ax * sin);
    Ok([di_di * di + di_dphi * dphi, dphi_di * di + dphi_dphi * dphi])
}

/// First line of the second-order system: `I'' + I/(1-I^2) I'^2 + (1-I^2)/I Phi' (Phi' - 2 az)`.
pub fn second_order_line1(i: f64, v: [f64; 2], acc_i: f64, az: f64) -> f64 {
    let [di, dphi] = v;
    acc_i + i / (1.0 - i * i) * di * di + (1.0 - i * i) / i * dphi * (dphi - 2.0 * az)
}

/// Second line: `Phi'' + I' Phi' (I^2+1)/(I(I^2-1)) + 2 I' az / (I (1-I^2))`.
pub fn second_order_line2(i: f64, v: [f64; 2], acc_phi: f64, az: f64) -> f64 {
    let [di, dphi] = v;
    acc_phi + di * dphi * (i * i + 1.0) / (i * (i * i - 1.0)) + 2.0 * di * az / (i * (1.0 - i * i))
}

/// Acceleration prescribed by the second-order system at action `i` for an
/// arbitrary velocity `v`.
pub fn second_order_acceleration(i: f64, v: [f64; 2], az: f64) -> [f64; 2] {
    [
        -second_order_line1(i, v, 0.0, az),
        -second_order_line2(i, v, 0.0, az),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccelerationSource {
    /// Fourth-order five-point central differences of the sampled velocities.
    FiniteDifference,
    /// Exact derivative of the first-order vector field along the flow.
    Analytic(FieldParams),
}

/// Per-sample residuals of both second-order lines; `None` marks samples
/// skipped near `I in {-1, 0, 1}` or lacking a full difference stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderResidual {
    pub times: Vec<f64>,
    pub residuals: Vec<Option<[f64; 2]>>,
}

impl SecondOrderResidual {
    pub fn max_abs(&self) -> f64 {
        self.residuals
            .iter()
            .flatten()
            .flat_map(|r| r.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    pub fn evaluated(&self) -> usize {
        self.residuals.iter().filter(|r| r.is_some()).count()
    }

    pub fn skipped(&self) -> usize {
        self.residuals.len() - self.evaluated()
    }
}

/// Evaluates the second-order system along `traj`, skipping samples with
/// `|I| < margin` or `|I| > 1 - margin`.
pub fn second_order_residual(
    traj: &Trajectory,
    a: &FieldParams,
    source: AccelerationSource,
    margin: f64,
) -> Result<SecondOrderResidual, DynamicsError> {
    let vel = traj.velocities.as_ref().ok_or_else(|| {
        DynamicsError::InvalidParams(
            "second-order residual needs a trajectory with velocities".into(),
        )
    })?;
    let n = traj.len();
    let mut residuals = Vec::with_capacity(n);
    for k in 0..n {
        let p = traj.point(k);
        let i = p.action;
        if i.abs() < margin || i.abs() > 1.0 - margin {
            residuals.push(None);
            continue;
        }
        let acc = match source {
            AccelerationSource::Analytic(field) => Some(flow_acceleration(&p, &field)?),
            AccelerationSource::FiniteDifference => {
                if k < 2 || k + 2 >= n {
                    None
                } else {
                    let h = (traj.times[k + 2] - traj.times[k - 2]) / 4.0;
                    let d = |c: usize| {
                        (-vel[k + 2][c] + 8.0 * vel[k + 1][c] - 8.0 * vel[k - 1][c] + vel[k - 2][c])
                            / (12.0 * h)
                    };
                    Some([d(0), d(1)])
                }
            }
        };
        residuals.push(acc.map(|acc| {
            [
                second_order_line1(i, vel[k], acc[0], a.az),
                second_order_line2(i, vel[k], acc[1], a.az),
            ]
        }));
    }
    Ok(SecondOrderResidual {
        times: traj.times.clone(),
        residuals,
    })
}
