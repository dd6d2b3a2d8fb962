use super::{principal_sqrt, GeometryError, DET_THRESHOLD, FD_STEP_FIRST, FD_STEP_SECOND};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A complex-valued function of the first coordinate, optionally carrying
/// analytic first and second derivatives. Missing derivatives fall back to
/// central differences.
#[derive(Clone)]
pub struct Component {
    value: ScalarFn,
    d1: Option<ScalarFn>,
    d2: Option<ScalarFn>,
}

impl fmt::Debug for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Component")
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .finish()
    }
}

impl Component {
    pub fn new(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            d1: None,
            d2: None,
        }
    }

    pub fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(c: f64) -> Self {
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        Self::real(move |_| c).with_d1(zero).with_d2(zero)
    }

    pub fn with_d1(mut self, d: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.d1 = Some(Arc::new(d));
        self
    }

    pub fn with_d2(mut self, d: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.d2 = Some(Arc::new(d));
        self
    }

    /// Same function with analytic derivatives dropped.
    pub fn numeric_only(&self) -> Self {
        Self {
            value: self.value.clone(),
            d1: None,
            d2: None,
        }
    }

    pub fn has_analytic_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        (self.value)(x)
    }

    pub fn d1(&self, x: f64) -> Complex64 {
        match &self.d1 {
            Some(d) => d(x),
            None => self.d1_numeric(x),
        }
    }

    pub fn d1_numeric(&self, x: f64) -> Complex64 {
        let h = FD_STEP_FIRST;
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    pub fn d2(&self, x: f64) -> Complex64 {
        match &self.d2 {
            Some(d) => d(x),
            None => {
                let h = FD_STEP_SECOND;
                (self.value(x + h) - self.value(x) * 2.0 + self.value(x - h)) / (h * h)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    ActionAngle,
    Spherical,
    Barred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signature {
    Riemannian,
    Lorentzian,
    Complex,
}

/// `ds^2 = f dx1^2 + 2 g dx1 dx2 + h dx2^2` with `f, g, h` functions of `x1`.
#[derive(Debug, Clone)]
pub struct MetricComponents {
    pub chart: Chart,
    pub f: Component,
    pub g: Component,
    pub h: Component,
    pub signature: Signature,
}

impl MetricComponents {
    pub fn new(
        chart: Chart,
        f: Component,
        g: Component,
        h: Component,
        signature: Signature,
    ) -> Self {
        Self {
            chart,
            f,
            g,
            h,
            signature,
        }
    }

    pub fn det(&self, x: f64) -> Complex64 {
        self.f.value(x) * self.h.value(x) - self.g.value(x) * self.g.value(x)
    }

    pub fn check_nondegenerate(&self, x: f64) -> Result<Complex64, GeometryError> {
        let det = self.det(x);
        if !det.re.is_finite() || !det.im.is_finite() {
            return Err(GeometryError::Domain {
                x,
                reason: "metric components are not finite".into(),
            });
        }
        if det.norm() < DET_THRESHOLD {
            return Err(GeometryError::Degenerate { x, det: det.norm() });
        }
        Ok(det)
    }

    /// The same metric with every derivative taken by central differences.
    pub fn numeric_only(&self) -> Self {
        Self {
            chart: self.chart,
            f: self.f.numeric_only(),
            g: self.g.numeric_only(),
            h: self.h.numeric_only(),
            signature: self.signature,
        }
    }

    /// `dI^2 + dPhi^2`.
    pub fn flat_cylinder() -> Self {
        Self::new(
            Chart::ActionAngle,
            Component::constant(1.0),
            Component::constant(0.0),
            Component::constant(1.0),
            Signature::Riemannian,
        )
    }

    /// `dPhi^2 - dI^2`.
    pub fn lorentz_mz() -> Self {
        Self::new(
            Chart::ActionAngle,
            Component::constant(-1.0),
            Component::constant(0.0),
            Component::constant(1.0),
            Signature::Lorentzian,
        )
    }

    /// `sin^2(theta) dtheta^2 + dPhi^2`.
    pub fn spherical_chart() -> Self {
        let f = Component::real(|t: f64| t.sin().powi(2))
            .with_d1(|t| Complex64::new((2.0 * t).sin(), 0.0));
        Self::new(
            Chart::Spherical,
            f,
            Component::constant(0.0),
            Component::constant(1.0),
            Signature::Riemannian,
        )
    }

    /// Unit round sphere `dtheta^2 + sin^2(theta) dPhi^2`.
    pub fn round_sphere() -> Self {
        let h = Component::real(|t: f64| t.sin().powi(2))
            .with_d1(|t| Complex64::new((2.0 * t).sin(), 0.0))
            .with_d2(|t| Complex64::new(2.0 * (2.0 * t).cos(), 0.0));
        Self::new(
            Chart::Spherical,
            Component::constant(1.0),
            Component::constant(0.0),
            h,
            Signature::Riemannian,
        )
    }

    /// `2 dIbar dPhibar + h(Ibar) dPhibar^2`.
    pub fn barred(h: Component) -> Self {
        Self::new(
            Chart::Barred,
            Component::constant(0.0),
            Component::constant(1.0),
            h,
            Signature::Lorentzian,
        )
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Distance below which `I` counts as one of the singular values `-1, 0, 1`.
pub const SINGULAR_I: f64 = 1e-9;

pub(crate) fn check_i(i: f64) -> Result<(), GeometryError> {
    if !i.is_finite() || [-1.0, 0.0, 1.0].iter().any(|s| (i - s).abs() < SINGULAR_I) {
        return Err(GeometryError::Domain {
            x: i,
            reason: "I must avoid {-1, 0, 1}".into(),
        });
    }
    Ok(())
}

fn candidate_f() -> Component {
    let f = |i: f64| -(1.0 + i * i) / (2.0 * i * (1.0 - i * i));
    Component::real(f)
        .with_d1(move |i| c(f(i) * (2.0 * i / (1.0 + i * i) - 1.0 / i + 2.0 * i / (1.0 - i * i))))
}

fn candidate_g() -> Component {
    let g = |i: f64| principal_sqrt(c((1.0 + i * i) / (i * (1.0 - i * i) * (i * i - 1.0))));
    Component::new(g).with_d1(move |i| {
        g(i) * (0.5 * (2.0 * i / (1.0 + i * i) - 1.0 / i + 4.0 * i / (1.0 - i * i)))
    })
}

fn candidate_h() -> Component {
    let h = |i: f64| principal_sqrt(c(i * i - 1.0)) / i;
    Component::new(h).with_d1(move |i| h(i) * (i / (i * i - 1.0) - 1.0 / i))
}

/// The candidate `h(I) = (I^2 - 1)/I`, i.e. the closed form without the square root.
pub fn candidate_h_rational() -> Component {
    Component::real(|i| (i * i - 1.0) / i).with_d1(|i| c(1.0 + 1.0 / (i * i)))
}

/// The action–angle metric with components
/// `f = -(1+I^2)/(2I(1-I^2))`, `g = sqrt((1+I^2)/(I(1-I^2)(I^2-1)))`,
/// `h = sqrt(I^2-1)/I`, principal branches throughout.
pub fn prop2_metric() -> MetricComponents {
    MetricComponents::new(
        Chart::ActionAngle,
        candidate_f(),
        candidate_g(),
        candidate_h(),
        Signature::Complex,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

pub fn candidate_sample(i: f64) -> Result<MetricSample, GeometryError> {
    check_i(i)?;
    let m = prop2_metric();
    Ok(MetricSample {
        f: m.f.value(i),
        g: m.g.value(i),
        h: m.h.value(i),
    })
}

fn nonzero(z: Complex64, x: f64, what: &str) -> Result<Complex64, GeometryError> {
    if z.norm() < DET_THRESHOLD || !z.re.is_finite() || !z.im.is_finite() {
        Err(GeometryError::Domain {
            x,
            reason: format!("{what} vanishes or is not finite"),
        })
    } else {
        Ok(z)
    }
}

/// Left minus right side of the three connection-matching ODEs:
/// `r1 = f'/(2f) + g'/g - I/(1-I^2)`, `r2 = -h'/(2f) - (1-I^2)/I`,
/// `r3 = h'/(2h) - (I^2+1)/(2I(I^2-1))`.
pub fn metric_ode_residual(
    f: &Component,
    g: &Component,
    h: &Component,
    i: f64,
) -> Result<[Complex64; 3], GeometryError> {
    check_i(i)?;
    let fv = nonzero(f.value(i), i, "f")?;
    let gv = nonzero(g.value(i), i, "g")?;
    let hv = nonzero(h.value(i), i, "h")?;
    let r1 = f.d1(i) / (fv * 2.0) + g.d1(i) / gv - i / (1.0 - i * i);
    let r2 = -h.d1(i) / (fv * 2.0) - (1.0 - i * i) / i;
    let r3 = h.d1(i) / (hv * 2.0) - (i * i + 1.0) / (2.0 * i * (i * i - 1.0));
    Ok([r1, r2, r3])
}

/// Extra matching condition from the dissipative connection, evaluated with
/// the `prop2_metric` components: `r4 = g'/f + h'/(2g) + gamma (I^2+1)/(I(I^2-1))`.
pub fn dissipative_ode_residual(gamma: f64, i: f64) -> Result<Complex64, GeometryError> {
    check_i(i)?;
    let m = prop2_metric();
    let fv = nonzero(m.f.value(i), i, "f")?;
    let gv = nonzero(m.g.value(i), i, "g")?;
    Ok(m.g.d1(i) / fv + m.h.d1(i) / (gv * 2.0) + gamma * (i * i + 1.0) / (i * (i * i - 1.0)))
}
