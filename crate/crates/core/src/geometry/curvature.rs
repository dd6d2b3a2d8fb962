use super::connection::christoffel_from_metric;
use super::metric::{Component, MetricComponents};
use super::{GeometryError, FD_STEP_SECOND};
use num_complex::Complex64;
use std::io::{self, Write};

/// Scalar curvature of `2 dIbar dPhibar + h(Ibar) dPhibar^2`, namely `h''(Ibar)`.
pub fn scalar_curvature_barred(h: &Component, ibar: f64) -> f64 {
    h.d2(ibar).re
}

/// Scalar curvature from the Riemann tensor of the full Levi-Civita
/// connection, with the coordinate derivative of the connection taken by
/// central differences.
pub fn scalar_curvature_numeric(m: &MetricComponents, x: f64) -> Result<Complex64, GeometryError> {
    let det = m.check_nondegenerate(x)?;
    let step = FD_STEP_SECOND;
    let gam = christoffel_from_metric(m, x)?;
    let plus = christoffel_from_metric(m, x + step)?;
    let minus = christoffel_from_metric(m, x - step)?;
    let z = Complex64::new(0.0, 0.0);

    // d_mu Gamma^r_{ns}; only mu = 0 is nonzero
    let dgam = |mu: usize, r: usize, n: usize, s: usize| {
        if mu == 0 {
            (plus.get(r, n, s) - minus.get(r, n, s)) / (2.0 * step)
        } else {
            z
        }
    };
    // R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s} - G^r_{n l} G^l_{m s}
    let riemann = |r: usize, s: usize, mu: usize, nu: usize| {
        let mut v = dgam(mu, r, nu, s) - dgam(nu, r, mu, s);
        for l in 0..2 {
            v += gam.get(r, mu, l) * gam.get(l, nu, s) - gam.get(r, nu, l) * gam.get(l, mu, s);
        }
        v
    };
    let ricci = |s: usize, nu: usize| (0..2).map(|r| riemann(r, s, r, nu)).sum::<Complex64>();

    let (f, g, h) = (m.f.value(x), m.g.value(x), m.h.value(x));
    let inv = [[h / det, -g / det], [-g / det, f / det]];
    let mut scalar = z;
    for (s, row) in inv.iter().enumerate() {
        for (nu, g_inv) in row.iter().enumerate() {
            scalar += g_inv * ricci(s, nu);
        }
    }
    Ok(scalar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub ibar: f64,
    pub formula: f64,
    pub numeric: Complex64,
}

pub fn curvature_samples(
    h: &Component,
    grid: &[f64],
) -> Result<Vec<CurvatureSample>, GeometryError> {
    let m = MetricComponents::barred(h.clone());
    grid.iter()
        .map(|&ibar| {
            Ok(CurvatureSample {
                ibar,
                formula: scalar_curvature_barred(h, ibar),
                numeric: scalar_curvature_numeric(&m, ibar)?,
            })
        })
        .collect()
}

/// Writes `Ibar,R_formula,R_numeric` rows (real part of the numeric value).
pub fn write_curvature_csv<W: Write>(samples: &[CurvatureSample], mut w: W) -> io::Result<()> {
    writeln!(w, "Ibar,R_formula,R_numeric")?;
    for s in samples {
        writeln!(w, "{:?},{:?},{:?}", s.ibar, s.formula, s.numeric.re)?;
    }
    Ok(())
}
