//! Embedded Dormand–Prince 5(4) integrator that lands exactly on a uniform
//! output grid.
//!
//! Steps are chosen adaptively from the embedded error estimate but never
//! overshoot the next output time, so every sample is an integrator node and
//! no interpolation error enters the recorded trajectory.

use thiserror::Error;

/// Absolute / relative local error tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
        }
    }
}

/// Returned by a right-hand side when a stage point falls outside the region
/// where the vector field is defined. The step is rejected and retried with a
/// smaller size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutsideDomain;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OdeError {
    #[error("initial state lies outside the domain of the vector field")]
    InitialOutsideDomain,
    #[error("step size fell below {h_min:e} at t = {t}")]
    StepUnderflow { t: f64, h_min: f64, state: Vec<f64> },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub tol: Tolerances,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(Tolerances::default())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; also the coefficients of the FSAL stage.
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combine<const N: usize>(y: &[f64; N], h: f64, coeffs: &[f64], ks: &[[f64; N]]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks) {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct Step<const N: usize> {
    y: [f64; N],
    f: [f64; N],
    err: f64,
}

impl Integrator {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }

    fn attempt<const N: usize, F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> Result<Step<N>, OutsideDomain>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OutsideDomain>,
    {
        let mut ks = [[0.0; N]; 7];
        ks[0] = *k1;
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s, row) in rows.iter().enumerate() {
            let ys = combine(y, h, row, &ks[..=s]);
            ks[s + 1] = rhs(t + C[s + 1] * h, &ys)?;
        }
        let y_new = combine(y, h, &B, &ks[..6]);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(OutsideDomain);
        }
        ks[6] = rhs(t + h, &y_new)?;

        let mut acc = 0.0;
        for i in 0..N {
            let e: f64 = h * E.iter().zip(&ks).map(|(c, k)| c * k[i]).sum::<f64>();
            let scale = self.tol.abs + self.tol.rel * y[i].abs().max(y_new[i].abs());
            acc += (e / scale).powi(2);
        }
        Ok(Step {
            y: y_new,
            f: ks[6],
            err: (acc / N as f64).sqrt(),
        })
    }

    /// Integrates `y' = rhs(t, y)` from `t = 0` and calls `sample(k, t_k, y, y')`
    /// at every grid time `t_k = k * dt`, `k = 0..=n_steps`.
    pub fn sample_grid<const N: usize, F, S>(
        &self,
        mut rhs: F,
        y0: [f64; N],
        dt: f64,
        n_steps: usize,
        mut sample: S,
    ) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OutsideDomain>,
        S: FnMut(usize, f64, &[f64; N], &[f64; N]),
    {
        let mut t = 0.0;
        let mut y = y0;
        let mut f = rhs(t, &y).map_err(|_| OdeError::InitialOutsideDomain)?;
        sample(0, t, &y, &f);

        let mut h = dt;
        let mut steps = 0usize;
        for k in 1..=n_steps {
            let target = k as f64 * dt;
            loop {
                steps += 1;
                if steps > self.max_steps {
                    return Err(OdeError::TooManySteps(self.max_steps));
                }
                let remaining = target - t;
                let lands = h >= remaining * (1.0 - 1e-9);
                let h_try = if lands { remaining } else { h };
                match self.attempt(&mut rhs, t, &y, &f, h_try) {
                    Ok(step) if step.err <= 1.0 => {
                        t = if lands { target } else { t + h_try };
                        y = step.y;
                        f = step.f;
                        let grow = if step.err == 0.0 {
                            5.0
                        } else {
                            (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        h = (h_try * grow).max(if lands { h } else { 0.0 });
                        if lands {
                            break;
                        }
                    }
                    Ok(step) => {
                        h = h_try * (0.9 * step.err.powf(-0.2)).clamp(0.1, 0.9);
                    }
                    Err(OutsideDomain) => {
                        h = h_try * 0.5;
                    }
                }
                if h < self.h_min {
                    return Err(OdeError::StepUnderflow {
                        t,
                        h_min: self.h_min,
                        state: y.to_vec(),
                    });
                }
            }
            sample(k, t, &y, &f);
        }
        Ok(())
    }
}
