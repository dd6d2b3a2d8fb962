use super::metric::{check_i, MetricComponents};
use super::GeometryError;
use crate::parallel;
use num_complex::Complex64;
use std::io::{self, Write};

/// Labels in storage order: upper index 1 then 2, lower pairs `11, 12, 22`.
pub const COMPONENT_LABELS: [&str; 6] = ["G1_11", "G1_12", "G1_22", "G2_11", "G2_12", "G2_22"];

/// The six independent Levi-Civita-type coefficients `Gamma^mu_{nu delta}` of
/// a symmetric 2-D connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionCoefficients {
    pub upper1: [Complex64; 3],
    pub upper2: [Complex64; 3],
}

fn pair_index(nu: usize, delta: usize) -> usize {
    match (nu.min(delta), nu.max(delta)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (1, 1) => 2,
        _ => panic!("index out of range for a 2-D connection"),
    }
}

impl ConnectionCoefficients {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            upper1: [z; 3],
            upper2: [z; 3],
        }
    }

    pub fn from_real(upper1: [f64; 3], upper2: [f64; 3]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self {
            upper1: upper1.map(c),
            upper2: upper2.map(c),
        }
    }

    /// `Gamma^mu_{nu delta}` with zero-based indices.
    pub fn get(&self, mu: usize, nu: usize, delta: usize) -> Complex64 {
        let p = pair_index(nu, delta);
        match mu {
            0 => self.upper1[p],
            1 => self.upper2[p],
            _ => panic!("index out of range for a 2-D connection"),
        }
    }

    pub fn as_array(&self) -> [Complex64; 6] {
        let [a, b, c] = self.upper1;
        let [d, e, f] = self.upper2;
        [a, b, c, d, e, f]
    }

    pub fn max_imag(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Geodesic acceleration `-Gamma^mu_{nu delta} v^nu v^delta` (real parts).
    pub fn acceleration(&self, v: [f64; 2]) -> [f64; 2] {
        let quad = |g: &[Complex64; 3]| {
            -(g[0].re * v[0] * v[0] + 2.0 * g[1].re * v[0] * v[1] + g[2].re * v[1] * v[1])
        };
        [quad(&self.upper1), quad(&self.upper2)]
    }
}

impl std::ops::Sub for ConnectionCoefficients {
    type Output = ConnectionCoefficients;

    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for k in 0..3 {
            out.upper1[k] -= rhs.upper1[k];
            out.upper2[k] -= rhs.upper2[k];
        }
        out
    }
}

/// A connection whose coefficients depend on the first coordinate only.
pub trait ConnectionField: Send + Sync {
    fn at(&self, x1: f64) -> Result<ConnectionCoefficients, GeometryError>;
}

/// Identically vanishing connection.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroConnection;

impl ConnectionField for ZeroConnection {
    fn at(&self, _x1: f64) -> Result<ConnectionCoefficients, GeometryError> {
        Ok(ConnectionCoefficients::zero())
    }
}

/// Coefficients read off the transverse-field second-order system:
/// `G^I_II = I/(1-I^2)`, `G^I_PhiPhi = (1-I^2)/I`, `G^Phi_IPhi = (I^2+1)/(2I(I^2-1))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ActionAngleConnection;

pub fn analytic_connection_eq5(i: f64) -> Result<ConnectionCoefficients, GeometryError> {
    check_i(i)?;
    Ok(ConnectionCoefficients::from_real(
        [i / (1.0 - i * i), 0.0, (1.0 - i * i) / i],
        [0.0, (i * i + 1.0) / (2.0 * i * (i * i - 1.0)), 0.0],
    ))
}

impl ConnectionField for ActionAngleConnection {
    fn at(&self, x1: f64) -> Result<ConnectionCoefficients, GeometryError> {
        analytic_connection_eq5(x1)
    }
}

/// `G^theta_thetatheta = cot(theta)`, everything else zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct CotThetaConnection;

impl ConnectionField for CotThetaConnection {
    fn at(&self, theta: f64) -> Result<ConnectionCoefficients, GeometryError> {
        let margin = 1e-9;
        if !theta.is_finite() || theta < margin || theta > std::f64::consts::PI - margin {
            return Err(GeometryError::Domain {
                x: theta,
                reason: "theta must lie in (0, pi)".into(),
            });
        }
        Ok(ConnectionCoefficients::from_real(
            [1.0 / theta.tan(), 0.0, 0.0],
            [0.0; 3],
        ))
    }
}

/// Levi-Civita connection of a metric.
#[derive(Debug, Clone)]
pub struct LeviCivita(pub MetricComponents);

impl ConnectionField for LeviCivita {
    fn at(&self, x1: f64) -> Result<ConnectionCoefficients, GeometryError> {
        christoffel_from_metric(&self.0, x1)
    }
}

/// Levi-Civita coefficients for `f dx1^2 + 2 g dx1 dx2 + h dx2^2` depending on `x1`.
pub fn christoffel_from_metric(
    m: &MetricComponents,
    x: f64,
) -> Result<ConnectionCoefficients, GeometryError> {
    let det = m.check_nondegenerate(x)?;
    let (f, g, h) = (m.f.value(x), m.g.value(x), m.h.value(x));
    let (df, dg, dh) = (m.f.d1(x), m.g.d1(x), m.h.d1(x));
    Ok(ConnectionCoefficients {
        upper1: [
            (h * df * 0.5 - g * dg) / det,
            -(g * dh) / (det * 2.0),
            -(h * dh) / (det * 2.0),
        ],
        upper2: [
            (f * dg - g * df * 0.5) / det,
            (f * dh) / (det * 2.0),
            (g * dh) / (det * 2.0),
        ],
    })
}

/// Deviation of a metric's Levi-Civita connection from a target connection at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivitaPoint {
    pub x: f64,
    /// `christoffel_from_metric - target` in [`COMPONENT_LABELS`] order.
    pub deviation: Option<[Complex64; 6]>,
    pub flag: Option<String>,
}

impl LeviCivitaPoint {
    /// `G1_11, G1_22, G2_12`: the components the matching ODEs constrain.
    pub fn constrained(&self) -> Option<[Complex64; 3]> {
        self.deviation.map(|d| [d[0], d[2], d[4]])
    }

    /// `G1_12, G2_11, G2_22`: components the matching ODEs leave free.
    pub fn unconstrained(&self) -> Option<[Complex64; 3]> {
        self.deviation.map(|d| [d[1], d[3], d[5]])
    }

    pub fn max_norm(&self) -> Option<f64> {
        self.deviation
            .map(|d| d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Compares the metric's connection with `target` at every grid point;
/// failures are flagged per point and do not stop the audit.
pub fn levi_civita_audit(
    m: &MetricComponents,
    target: &dyn ConnectionField,
    grid: &[f64],
) -> Vec<LeviCivitaPoint> {
    parallel::map(grid, |&x| {
        match christoffel_from_metric(m, x).and_then(|lc| Ok(lc - target.at(x)?)) {
            Ok(d) => LeviCivitaPoint {
                x,
                deviation: Some(d.as_array()),
                flag: None,
            },
            Err(e) => LeviCivitaPoint {
                x,
                deviation: None,
                flag: Some(e.to_string()),
            },
        }
    })
}

/// Writes `I,component,re,im` rows; flagged points are omitted.
pub fn write_deviation_csv<W: Write>(points: &[LeviCivitaPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "I,component,re,im")?;
    for p in points {
        if let Some(d) = p.deviation {
            for (label, z) in COMPONENT_LABELS.iter().zip(d) {
                writeln!(w, "{:?},{label},{:?},{:?}", p.x, z.re, z.im)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::{prop2_metric, Component};
    use approx::assert_abs_diff_eq;

    #[test]
    fn action_angle_connection_examples() {
        let g = analytic_connection_eq5(0.5).unwrap();
        assert_abs_diff_eq!(g.get(0, 0, 0).re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(0, 1, 1).re, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(1, 0, 1).re, -5.0 / 3.0, epsilon = 1e-15);
        assert_eq!(g.get(1, 1, 0), g.get(1, 0, 1));
        let g = analytic_connection_eq5(-0.5).unwrap();
        assert_abs_diff_eq!(g.get(0, 0, 0).re, -2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(0, 1, 1).re, -1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(1, 0, 1).re, 5.0 / 3.0, epsilon = 1e-15);
        assert!(analytic_connection_eq5(0.0).is_err());
        assert!(analytic_connection_eq5(1.0 - 1e-10).is_err());
    }

    #[test]
    fn christoffel_examples() {
        let g = christoffel_from_metric(&MetricComponents::flat_cylinder(), 0.3).unwrap();
        assert_eq!(g, ConnectionCoefficients::zero());

        let theta = 1.1;
        let g = christoffel_from_metric(&MetricComponents::spherical_chart(), theta).unwrap();
        assert_abs_diff_eq!(g.upper1[0].re, 1.0 / theta.tan(), epsilon = 1e-14);
        for z in g.upper1[1..].iter().chain(&g.upper2) {
            assert_eq!(z.norm(), 0.0);
        }

        // 2 dI dPhi + I^2 dPhi^2 at I = 1, det = -1
        let h = Component::real(|x| x * x).with_d1(|x| Complex64::new(2.0 * x, 0.0));
        let g = christoffel_from_metric(&MetricComponents::barred(h), 1.0).unwrap();
        assert_abs_diff_eq!(g.upper1[2].re, 1.0, epsilon = 1e-15); // G1_22
        assert_abs_diff_eq!(g.upper2[2].re, -1.0, epsilon = 1e-15); // G2_22
        assert_abs_diff_eq!(g.upper1[1].re, 1.0, epsilon = 1e-15); // G1_12
        assert_eq!(g.upper2[1].norm(), 0.0); // G2_12
        assert_eq!(g.upper1[0].norm(), 0.0);
        assert_eq!(g.upper2[0].norm(), 0.0);
    }

    #[test]
    fn degenerate_metric_is_an_error() {
        let m = MetricComponents::new(
            crate::geometry::Chart::ActionAngle,
            Component::constant(1.0),
            Component::constant(1.0),
            Component::constant(1.0),
            crate::geometry::Signature::Riemannian,
        );
        assert!(matches!(
            christoffel_from_metric(&m, 0.2),
            Err(GeometryError::Degenerate { .. })
        ));
    }

    #[test]
    fn audit_descriptive_results() {
        let grid = [-0.5, 0.0, 0.5];
        let flat = levi_civita_audit(&MetricComponents::flat_cylinder(), &ZeroConnection, &grid);
        assert!(flat.iter().all(|p| p.max_norm() == Some(0.0)));

        let sph = levi_civita_audit(
            &MetricComponents::spherical_chart(),
            &CotThetaConnection,
            &[0.4, 1.0, 2.5],
        );
        assert!(sph.iter().all(|p| p.max_norm().unwrap() < 1e-14));

        let p2 = levi_civita_audit(&prop2_metric(), &ActionAngleConnection, &grid);
        assert!(p2[1].flag.is_some());
        assert!(p2[0].max_norm().unwrap() > 1e-3);
        assert!(p2[2]
            .unconstrained()
            .unwrap()
            .iter()
            .any(|z| z.norm() > 1e-3));

        let mut out = Vec::new();
        write_deviation_csv(&p2, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("I,component,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 12);
    }
}
