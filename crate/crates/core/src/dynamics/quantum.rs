use super::{output_steps, DynamicsError, FieldParams, Trajectory};
use crate::state_maps::{hopf_map, to_action_angle, wrap_angle, BlochVector, QubitAmplitudes};
use num_complex::Complex64;

/// Applies `exp(-i H dt) = cos(|A| dt) 1 - i sin(|A| dt) (n . sigma)`.
pub fn quantum_propagator_step(
    state: &QubitAmplitudes,
    a: &FieldParams,
    dt: f64,
) -> QubitAmplitudes {
    let m = a.magnitude();
    if m == 0.0 {
        return *state;
    }
    let (s, c) = (m * dt).sin_cos();
    let (nx, ny, nz) = (a.ax / m, a.ay / m, a.az / m);
    let mi = Complex64::new(0.0, -s);
    let (a1, a2) = (state.a1, state.a2);
    let off_up = Complex64::new(nx, -ny);
    let off_dn = Complex64::new(nx, ny);
    QubitAmplitudes {
        a1: a1 * c + mi * (a1 * nz + off_up * a2),
        a2: a2 * c + mi * (off_dn * a1 - a2 * nz),
    }
}

/// `d<sigma>/dt = 2 A x <sigma>`.
pub fn bloch_velocity(b: &BlochVector, a: &FieldParams) -> BlochVector {
    BlochVector {
        x: 2.0 * (a.ay * b.z - a.az * b.y),
        y: 2.0 * (a.az * b.x - a.ax * b.z),
        z: 2.0 * (a.ax * b.y - a.ay * b.x),
    }
}

/// Exact evolution sampled every `dt`: each sample applies the propagator for
/// the full elapsed time to the initial state. Positions are the raw quantum
/// `(I, phi1 - phi2)` with the phase unwrapped; velocities follow the Bloch
/// equation.
pub fn quantum_trajectory(
    state0: &QubitAmplitudes,
    a: &FieldParams,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory, DynamicsError> {
    a.validate()?;
    state0.check_normalized()?;
    let n = output_steps(dt, t_final)?;
    let mut traj = Trajectory::with_velocities(n + 1);
    let mut prev_phase: Option<f64> = None;
    for k in 0..=n {
        let t = k as f64 * dt;
        let s = quantum_propagator_step(state0, a, t);
        let p = to_action_angle(&s)?;
        let phase = match prev_phase {
            None => p.angle,
            Some(prev) => prev + wrap_angle(p.angle - prev),
        };
        prev_phase = Some(phase);
        let b = hopf_map(&s)?;
        let db = bloch_velocity(&b, a);
        let rho2 = b.x * b.x + b.y * b.y;
        // phi1 - phi2 = -atan2(y, x)
        let dphase = -(b.x * db.y - b.y * db.x) / rho2;
        traj.push(t, [p.action, phase], [db.z, dphase]);
    }
    Ok(traj)
}
