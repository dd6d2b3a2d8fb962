use super::classical::{abort, check_start};
use super::{
    h0_value, hamilton_rhs, output_steps, second_order_line2, DissipationParams, DynamicsError,
    FieldParams, Trajectory,
};
use crate::ode::{Integrator, OutsideDomain};
use crate::parallel;
use crate::state_maps::ActionAnglePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// First-order dissipative flow: `dPhi = dH0/dI`,
/// `dI = -dH0/dPhi - friction_factor * gamma * dPhi + xi`.
pub fn dissipative_rhs(
    p: &ActionAnglePoint,
    a: &FieldParams,
    d: &DissipationParams,
    xi: f64,
) -> Result<[f64; 2], DynamicsError> {
    let [di, dphi] = hamilton_rhs(p, a)?;
    Ok([di - d.friction_factor * d.gamma * dphi + xi, dphi])
}

/// Exact Ornstein–Uhlenbeck update over `dt`; stationary variance `sigma^2 tau / 2`.
pub fn ou_noise_step<R: Rng + ?Sized>(xi: f64, d: &DissipationParams, dt: f64, rng: &mut R) -> f64 {
    let decay = (-dt / d.noise_tau).exp();
    if d.noise_sigma == 0.0 {
        return xi * decay;
    }
    let spread = d.noise_sigma * (0.5 * d.noise_tau * (1.0 - decay * decay)).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    xi * decay + spread * z
}

/// `Ht = H0 + 2 gamma Phi dPhi - xi Phi`.
pub fn ht_value(
    p: &ActionAnglePoint,
    v: [f64; 2],
    a: &FieldParams,
    d: &DissipationParams,
    xi: f64,
) -> Result<f64, DynamicsError> {
    Ok(h0_value(p, a)? + 2.0 * d.gamma * p.angle * v[1] - xi * p.angle)
}

pub fn evolve_dissipative(
    p0: &ActionAnglePoint,
    a: &FieldParams,
    d: &DissipationParams,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory, DynamicsError> {
    evolve_dissipative_with(p0, a, d, dt, t_final, &Integrator::default())
}

/// Integrates the dissipative flow. The noise starts at `xi = 0`, is advanced
/// by [`ou_noise_step`] once per output interval and held fixed inside it.
/// With `noise_sigma = 0` the noise stays identically zero.
pub fn evolve_dissipative_with(
    p0: &ActionAnglePoint,
    a: &FieldParams,
    d: &DissipationParams,
    dt: f64,
    t_final: f64,
    integrator: &Integrator,
) -> Result<Trajectory, DynamicsError> {
    a.validate()?;
    d.validate()?;
    check_start(p0, a)?;
    let n = output_steps(dt, t_final)?;
    let rhs = |xi: f64| {
        move |_: f64, y: &[f64; 2]| {
            dissipative_rhs(
                &ActionAnglePoint {
                    action: y[0],
                    angle: y[1],
                },
                a,
                d,
                xi,
            )
            .map_err(|_| OutsideDomain)
        }
    };

    let mut traj = Trajectory::with_velocities(n + 1);
    let mut noise = Vec::with_capacity(n + 1);

    if d.noise_sigma == 0.0 {
        let result =
            integrator.sample_grid(rhs(0.0), [p0.action, p0.angle], dt, n, |_, t, y, f| {
                traj.push(t, *y, *f);
                noise.push(0.0);
            });
        traj.noise = Some(noise);
        return match result {
            Ok(()) => Ok(traj),
            Err(e) => Err(abort(e, traj)),
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    let mut xi = 0.0;
    let mut y = [p0.action, p0.angle];
    for k in 0..n {
        let t0 = k as f64 * dt;
        let mut end = None;
        let step = integrator.sample_grid(rhs(xi), y, dt, 1, |j, _, yy, f| {
            if j == 0 {
                // velocity at the left node uses the noise value active on this interval
                traj.push(t0, *yy, *f);
                noise.push(xi);
            } else {
                end = Some(*yy);
            }
        });
        if let Err(e) = step {
            traj.noise = Some(noise);
            return Err(abort(e, traj));
        }
        y = end.expect("one step sampled");
        xi = ou_noise_step(xi, d, dt, &mut rng);
    }
    let t_end = n as f64 * dt;
    let f = dissipative_rhs(
        &ActionAnglePoint {
            action: y[0],
            angle: y[1],
        },
        a,
        d,
        xi,
    )?;
    traj.push(t_end, y, f);
    noise.push(xi);
    traj.noise = Some(noise);
    Ok(traj)
}

/// Independent trajectories, one per seed, run through [`parallel::map`].
pub fn run_ensemble(
    p0: &ActionAnglePoint,
    a: &FieldParams,
    d: &DissipationParams,
    seeds: &[u64],
    dt: f64,
    t_final: f64,
) -> Vec<Result<Trajectory, DynamicsError>> {
    parallel::map(seeds, |&seed| {
        let d = DissipationParams { seed, ..*d };
        evolve_dissipative(p0, a, &d, dt, t_final)
    })
}

/// Residuals of the dissipative second-order system along a noise-free
/// trajectory. `line1_over_i` carries the friction term `2 az dI / I`;
/// `line1_over_i_one_minus_i2` carries `2 az dI / (I (1 - I^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeResidual {
    pub line1_over_i: f64,
    pub line1_over_i_one_minus_i2: f64,
    pub line2: f64,
}

pub fn dissipative_second_order_residuals(
    traj: &Trajectory,
    a: &FieldParams,
    gamma: f64,
    margin: f64,
) -> Result<Vec<Option<DissipativeResidual>>, DynamicsError> {
    let vel = traj.velocities.as_ref().ok_or_else(|| {
        DynamicsError::InvalidParams("residual needs a trajectory with velocities".into())
    })?;
    let n = traj.len();
    Ok((0..n)
        .map(|k| {
            let i = traj.positions[k][0];
            if k < 2 || k + 2 >= n || i.abs() < margin || i.abs() > 1.0 - margin {
                return None;
            }
            let h = (traj.times[k + 2] - traj.times[k - 2]) / 4.0;
            let d = |c: usize| {
                (-vel[k + 2][c] + 8.0 * vel[k + 1][c] - 8.0 * vel[k - 1][c] + vel[k - 2][c])
                    / (12.0 * h)
            };
            let [di, dphi] = vel[k];
            let base =
                d(0) + i / (1.0 - i * i) * di * di + (1.0 - i * i) / i * dphi * (dphi - 2.0 * a.az);
            let mixed = (i * i + 1.0) / (i * (i * i - 1.0)) * di * dphi;
            Some(DissipativeResidual {
                line1_over_i: base - 2.0 * gamma * (mixed + 2.0 * a.az * di / i),
                line1_over_i_one_minus_i2: base
                    - 2.0 * gamma * (mixed + 2.0 * a.az * di / (i * (1.0 - i * i))),
                line2: second_order_line2(i, vel[k], d(1), a.az),
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_classical;
    use approx::assert_abs_diff_eq;

    fn pt(i: f64, phi: f64) -> ActionAnglePoint {
        ActionAnglePoint::new(i, phi).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let a = FieldParams::new(0.7, -0.2, 0.4);
        let p = pt(0.3, 1.1);
        let off = DissipationParams::default();
        assert_eq!(
            dissipative_rhs(&p, &a, &off, 0.0).unwrap(),
            hamilton_rhs(&p, &a).unwrap()
        );

        let mz = FieldParams::new(0.0, 0.0, 1.0);
        let d = DissipationParams {
            gamma: 0.1,
            ..Default::default()
        };
        let v = dissipative_rhs(&pt(-0.6, 3.0), &mz, &d, 0.0).unwrap();
        assert_abs_diff_eq!(v[0], -0.2, epsilon = 1e-15);
        assert_eq!(v[1], 2.0);
    }

    #[test]
    fn helix_closed_form() {
        let mz = FieldParams::new(0.0, 0.0, 1.0);
        let d = DissipationParams {
            gamma: 0.1,
            ..Default::default()
        };
        let tr = evolve_dissipative(&pt(0.0, 0.0), &mz, &d, 1e-3, 2.0).unwrap();
        let end = tr.last_point().unwrap();
        assert_abs_diff_eq!(end.action, -0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(end.angle, 4.0, epsilon = 1e-12);
        for k in 0..tr.len() {
            let p = tr.point(k);
            assert!((p.action + 0.1 * p.angle).abs() < 1e-10);
        }
    }

    #[test]
    fn reduces_to_classical() {
        let a = FieldParams::new(1.0, 0.0, 0.5);
        let p0 = pt(0.3, 1.0);
        let c = evolve_classical(&p0, &a, 1e-2, 5.0).unwrap();
        let d = evolve_dissipative(&p0, &a, &DissipationParams::default(), 1e-2, 5.0).unwrap();
        assert_eq!(c.positions, d.positions);
    }

    #[test]
    fn ou_deterministic_decay_and_seed_reproducibility() {
        let d = DissipationParams {
            noise_sigma: 0.0,
            noise_tau: 2.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_abs_diff_eq!(
            ou_noise_step(1.0, &d, 0.5, &mut rng),
            (-0.25f64).exp(),
            epsilon = 1e-15
        );

        let d = DissipationParams {
            noise_sigma: 0.3,
            seed: 9,
            ..Default::default()
        };
        let path = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xi = 0.0;
            (0..100)
                .map(|_| {
                    xi = ou_noise_step(xi, &d, 0.01, &mut rng);
                    xi
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(path(9), path(9));
        assert_ne!(path(9), path(10));
    }

    #[test]
    fn ht_examples() {
        let mz = FieldParams::new(0.0, 0.0, 1.0);
        let d = DissipationParams {
            gamma: 0.1,
            ..Default::default()
        };
        let p = pt(0.0, 1.0);
        assert_abs_diff_eq!(
            ht_value(&p, [0.0, 2.0], &mz, &d, 0.0).unwrap(),
            0.4,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ht_value(&p, [0.0, 2.0], &mz, &d, 0.5).unwrap(),
            -0.1,
            epsilon = 1e-15
        );
        let a = FieldParams::new(0.3, 0.1, -0.2);
        let q = pt(0.2, 0.9);
        assert_eq!(
            ht_value(&q, [0.1, 0.1], &a, &DissipationParams::default(), 0.0).unwrap(),
            h0_value(&q, &a).unwrap()
        );
    }

    #[test]
    fn noisy_runs_repeat_with_seed() {
        let a = FieldParams::new(0.5, 0.0, 1.0);
        let d = DissipationParams {
            gamma: 0.05,
            noise_sigma: 0.1,
            noise_tau: 0.5,
            seed: 3,
            ..Default::default()
        };
        let p0 = pt(0.2, 0.0);
        let r1 = evolve_dissipative(&p0, &a, &d, 1e-2, 3.0).unwrap();
        let r2 = evolve_dissipative(&p0, &a, &d, 1e-2, 3.0).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.is_consistent());
        assert!(r1.noise.as_ref().unwrap().iter().any(|x| *x != 0.0));
        let ens = run_ensemble(&p0, &a, &d, &[3, 4], 1e-2, 3.0);
        assert_eq!(ens[0].as_ref().unwrap(), &r1);
        assert_ne!(ens[1].as_ref().unwrap(), &r1);
    }
}
