use crate::dynamics::ConventionParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

pub type Inputs = BTreeMap<String, Value>;

/// Builds an input record from `(name, value)` pairs.
pub fn inputs<const N: usize>(pairs: [(&str, Value); N]) -> Inputs {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub inputs: Inputs,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    pub notes: String,
}

impl CheckResult {
    /// Pass iff `residual <= tolerance`; a non-finite residual fails.
    pub fn bounded(
        check_id: impl Into<String>,
        inputs: Inputs,
        residual: f64,
        tolerance: f64,
        notes: impl Into<String>,
    ) -> Self {
        let verdict = if residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            check_id: check_id.into(),
            inputs,
            residual: Some(residual),
            tolerance: Some(tolerance),
            verdict,
            notes: notes.into(),
        }
    }

    /// Lower-bound check `value >= threshold`, stored as the shortfall
    /// `max(0, threshold - value)` against tolerance 0.
    pub fn at_least(
        check_id: impl Into<String>,
        mut inputs: Inputs,
        value: f64,
        threshold: f64,
        notes: impl Into<String>,
    ) -> Self {
        inputs.insert("observed".into(), Value::from(value));
        inputs.insert("threshold".into(), Value::from(threshold));
        let shortfall = if value.is_nan() {
            f64::INFINITY
        } else {
            (threshold - value).max(0.0)
        };
        let mut notes = notes.into();
        if !notes.is_empty() {
            notes.push_str("; ");
        }
        notes.push_str("residual is the shortfall max(0, threshold - observed)");
        Self::bounded(check_id, inputs, shortfall, 0.0, notes)
    }

    pub fn informational(
        check_id: impl Into<String>,
        inputs: Inputs,
        residual: Option<f64>,
        notes: impl Into<String>,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            residual,
            tolerance: None,
            verdict: Verdict::Informational,
            notes: notes.into(),
        }
    }

    pub fn failed(
        check_id: impl Into<String>,
        inputs: Inputs,
        tolerance: f64,
        notes: impl Into<String>,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            residual: None,
            tolerance: Some(tolerance),
            verdict: Verdict::Fail,
            notes: notes.into(),
        }
    }

    pub fn group(&self) -> &str {
        self.check_id.split('.').next().unwrap_or(&self.check_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub convention: ConventionParams,
    pub results: Vec<CheckResult>,
    pub seeds: BTreeMap<String, u64>,
    pub versions: BTreeMap<String, String>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    /// Compact JSON with every float written with 17 significant digits.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_json(&mut out)
            .expect("writing to a Vec cannot fail");
        out.push(b'\n');
        out
    }

    pub fn write_json<W: io::Write>(&self, w: W) -> serde_json::Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(w, SignificantDigits);
        self.serialize(&mut ser)
    }
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn verdict_follows_tolerance() {
        let r = CheckResult::bounded("a.b", Inputs::new(), 1e-7, 1e-6, "");
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.group(), "a");
        assert_eq!(
            CheckResult::bounded("a", Inputs::new(), 2.0, 1.0, "").verdict,
            Verdict::Fail
        );
        assert_eq!(
            CheckResult::bounded("a", Inputs::new(), f64::NAN, 1.0, "").verdict,
            Verdict::Fail
        );
    }

    #[test]
    fn lower_bound_as_shortfall() {
        let ok = CheckResult::at_least("x", Inputs::new(), 0.5, 1e-3, "");
        assert_eq!((ok.residual, ok.verdict), (Some(0.0), Verdict::Pass));
        let bad = CheckResult::at_least("x", Inputs::new(), 1e-4, 1e-3, "");
        assert_eq!(bad.verdict, Verdict::Fail);
        assert!((bad.residual.unwrap() - 9e-4).abs() < 1e-15);
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let report = AuditReport {
            convention: ConventionParams {
                time_factor: 1.0,
                sign: -1,
            },
            results: vec![CheckResult::bounded(
                "c",
                inputs([("x", json!(0.1))]),
                1.0 / 3.0,
                1e-6,
                "n",
            )],
            seeds: BTreeMap::from([("audit".to_string(), 7)]),
            versions: BTreeMap::new(),
        };
        let text = String::from_utf8(report.to_json()).unwrap();
        assert!(text.starts_with(
            r#"{"convention":{"time_factor":1.0000000000000000e0,"sign":-1},"results""#
        ));
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains(r#""x":1.0000000000000001e-1"#));
        let back: AuditReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
