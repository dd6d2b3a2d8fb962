use super::metric::MetricComponents;
use super::GeometryError;
use serde::{Deserialize, Serialize};

pub const NULL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    PositiveNorm,
    Null,
    NegativeNorm,
}

/// Sign class of `q = f v1^2 + 2 g v1 v2 + h v2^2` for a real metric.
pub fn causal_character(
    m: &MetricComponents,
    v: [f64; 2],
    x: f64,
) -> Result<(CausalClass, f64), GeometryError> {
    let (f, g, h) = (m.f.value(x), m.g.value(x), m.h.value(x));
    if [f, g, h].iter().any(|z| z.im != 0.0) {
        return Err(GeometryError::ComplexSignature { x });
    }
    let q = f.re * v[0] * v[0] + 2.0 * g.re * v[0] * v[1] + h.re * v[1] * v[1];
    let class = if q.abs() <= NULL_THRESHOLD {
        CausalClass::Null
    } else if q > 0.0 {
        CausalClass::PositiveNorm
    } else {
        CausalClass::NegativeNorm
    };
    Ok((class, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::prop2_metric;

    #[test]
    fn examples() {
        let l = MetricComponents::lorentz_mz();
        assert_eq!(
            causal_character(&l, [1.0, 1.0], 0.3).unwrap(),
            (CausalClass::Null, 0.0)
        );
        assert_eq!(
            causal_character(&l, [0.0, 2.0], 0.3).unwrap(),
            (CausalClass::PositiveNorm, 4.0)
        );
        assert_eq!(
            causal_character(&l, [1.0, 0.0], 0.3).unwrap().0,
            CausalClass::NegativeNorm
        );
        let e = MetricComponents::flat_cylinder();
        assert_eq!(causal_character(&e, [1.0, 1.0], 0.0).unwrap().1, 2.0);
        assert!(matches!(
            causal_character(&prop2_metric(), [1.0, 0.0], 0.5),
            Err(GeometryError::ComplexSignature { .. })
        ));
    }
}
