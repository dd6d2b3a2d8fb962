use super::metric::MetricComponents;
use super::{principal_sqrt, GeometryError};
use crate::quadrature;
use num_complex::Complex64;

pub const QUADRATURE_REL_TOL: f64 = 1e-10;

/// Barred chart relative to anchor `i0`:
/// `Ibar = int sqrt(-det) dI` and the angle shift `int (g - sqrt(-det))/h dI`,
/// so that `Phibar = Phi + shift`.
pub fn barred_transform(
    m: &MetricComponents,
    i0: f64,
    i: f64,
) -> Result<(Complex64, Complex64), GeometryError> {
    let root = |x: f64| principal_sqrt(-m.det(x));
    let ibar = quadrature::integrate(root, i0, i, QUADRATURE_REL_TOL)?;
    let shift = quadrature::integrate(
        |x| {
            let h = m.h.value(x);
            if h.norm() == 0.0 {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                (m.g.value(x) - root(x)) / h
            }
        },
        i0,
        i,
        QUADRATURE_REL_TOL,
    )?;
    Ok((ibar, shift))
}

/// Pulls `2 dIbar dPhibar + h dPhibar^2` back through the barred chart at `x`
/// and returns its `(dI^2, dI dPhi, dPhi^2)` coefficients minus `(f, g, h)`.
pub fn barred_pullback_residual(
    m: &MetricComponents,
    x: f64,
) -> Result<[Complex64; 3], GeometryError> {
    m.check_nondegenerate(x)?;
    let (f, g, h) = (m.f.value(x), m.g.value(x), m.h.value(x));
    if h.norm() == 0.0 {
        return Err(GeometryError::Domain {
            x,
            reason: "h vanishes; barred chart undefined".into(),
        });
    }
    let s = principal_sqrt(-m.det(x));
    let shift = (g - s) / h;
    // dIbar = s dI, dPhibar = dPhi + shift dI; the dPhi^2 coefficient is h itself
    let c_ii = s * shift * 2.0 + h * shift * shift;
    let c_ip = s + h * shift;
    Ok([c_ii - f, c_ip - g, Complex64::new(0.0, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::{prop2_metric, Component};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn barred_input_is_identity() {
        let m = MetricComponents::barred(Component::real(|x| 1.0 + x * x));
        let (ibar, shift) = barred_transform(&m, 0.2, 0.7).unwrap();
        assert!((ibar - c(0.5, 0.0)).norm() < 1e-13);
        assert!(shift.norm() < 1e-13);
    }

    #[test]
    fn flat_cylinder_complex_chart() {
        let (ibar, shift) = barred_transform(&MetricComponents::flat_cylinder(), 0.1, 0.6).unwrap();
        assert!((ibar - c(0.0, 0.5)).norm() < 1e-13);
        assert!((shift - c(0.0, -0.5)).norm() < 1e-13);
        let r = barred_pullback_residual(&MetricComponents::flat_cylinder(), 0.3).unwrap();
        assert!(r.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn lorentzian_chart_is_real() {
        let (ibar, shift) = barred_transform(&MetricComponents::lorentz_mz(), -0.2, 0.4).unwrap();
        assert!((ibar - c(0.6, 0.0)).norm() < 1e-13);
        assert!((shift - c(-0.6, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn vanishing_h_is_an_error() {
        let m = MetricComponents::new(
            crate::geometry::Chart::ActionAngle,
            Component::constant(1.0),
            Component::constant(1.0),
            Component::real(|x| x),
            crate::geometry::Signature::Complex,
        );
        assert!(barred_transform(&m, -0.5, 0.5).is_err());
    }

    #[test]
    fn complex_metric_pullback_identity() {
        let m = prop2_metric();
        for x in [0.2, 0.5, -0.7] {
            let r = barred_pullback_residual(&m, x).unwrap();
            assert!(r.iter().all(|z| z.norm() < 1e-12), "{r:?}");
        }
    }
}
