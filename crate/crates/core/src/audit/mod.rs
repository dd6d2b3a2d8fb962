//! Residual-based checks of the dynamics and geometry, a convention
//! calibration, and a deterministic report that collects them.

mod calibration;
mod checks;
mod report;

pub use calibration::{
    calibrate_convention, calibrate_convention_with, calibration_result, check_qc_equivalence,
    convention_distance, Calibration, CalibrationRow, CALIBRATION_TOLERANCE, SIGNS, TIME_FACTORS,
};
pub use checks::{
    barred_chart_checks, candidate_levi_civita, check_geodesic_equivalence, check_prop4_prop8,
    check_second_order_residual, conservation_checks, curvature_checks,
    dissipative_residual_checks, dissipative_second_order_check, fit_connection_obstruction,
    fit_dissipative_obstruction, lorentzian_checks, metric_ode_checks, quadratic_fit_residual,
    stochastic_checks, ACTION_ANGLE_GEODESIC_TOLERANCE, CURVATURE_FLOOR, MIN_OBSTRUCTION_SAMPLES,
    OU_STEPS,
};
pub use report::{inputs, AuditReport, CheckResult, Inputs, Verdict};

use crate::dynamics::{ConventionParams, DynamicsError, FieldParams};
use crate::geometry::GeometryError;
use crate::parallel;
use crate::state_maps::{ActionAnglePoint, StateError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AuditError {
    #[error(
        "convention calibration found {matches} matching candidates (need exactly one): {table:?}"
    )]
    Calibration {
        matches: usize,
        table: Vec<CalibrationRow>,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("unknown check group '{0}'")]
    UnknownCheck(String),
    #[error("invalid audit configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Check groups in report order.
pub const CHECK_GROUPS: [&str; 15] = [
    "calibration",
    "qc-equivalence",
    "second-order-residual",
    "geodesic-equivalence",
    "obstruction",
    "levi-civita-audit",
    "metric-ode",
    "barred-chart",
    "curvature",
    "prop7",
    "flat-cylinder",
    "lorentzian",
    "conservation",
    "stochastic",
    "dissipative-second-order",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub seed: u64,
    pub gammas: Vec<f64>,
    pub action_grid: Vec<f64>,
    pub obstruction_samples: usize,
    /// Groups to run; empty runs all of them.
    pub checks: Vec<String>,
}

/// `I in ±[0.1, 0.9]` with step 0.1.
pub fn default_action_grid() -> Vec<f64> {
    let pos: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    pos.iter()
        .rev()
        .map(|x| -x)
        .chain(pos.iter().copied())
        .collect()
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            gammas: vec![0.01, 0.1],
            action_grid: default_action_grid(),
            obstruction_samples: 64,
            checks: Vec::new(),
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<(), AuditError> {
        for c in &self.checks {
            if !CHECK_GROUPS.contains(&c.as_str()) {
                return Err(AuditError::UnknownCheck(c.clone()));
            }
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(AuditError::InvalidConfig(
                "gammas must be finite and >= 0".into(),
            ));
        }
        if self
            .action_grid
            .iter()
            .any(|i| !i.is_finite() || i.abs() >= 1.0)
        {
            return Err(AuditError::InvalidConfig(
                "action grid must lie in (-1, 1)".into(),
            ));
        }
        if self.obstruction_samples < MIN_OBSTRUCTION_SAMPLES {
            return Err(AuditError::InvalidConfig(format!(
                "obstruction_samples must be at least {MIN_OBSTRUCTION_SAMPLES}"
            )));
        }
        Ok(())
    }

    fn selected(&self, group: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| c == group)
    }
}

fn point(i: f64, phi: f64) -> ActionAnglePoint {
    ActionAnglePoint {
        action: i,
        angle: phi,
    }
}

fn run_group(group: &str, cfg: &AuditConfig, cal: &Calibration) -> Vec<CheckResult> {
    let conv = cal.pinned;
    let push_err = |id: &str, r: Result<CheckResult, AuditError>| match r {
        Ok(c) => c,
        Err(e) => {
            CheckResult::informational(id, Inputs::new(), None, format!("check refused: {e}"))
        }
    };
    match group {
        "calibration" => vec![calibration_result(cal)],
        "qc-equivalence" => vec![
            check_qc_equivalence(
                "qc-equivalence.mxy",
                &FieldParams::new(0.3, 0.4, 0.0),
                &point(0.3, 0.8f64.atan2(0.6)),
                &conv,
                10.0,
            ),
            check_qc_equivalence(
                "qc-equivalence.mz",
                &FieldParams::new(0.0, 0.0, 1.0),
                &point(0.3, 0.0),
                &conv,
                10.0,
            ),
        ],
        "second-order-residual" => vec![
            check_second_order_residual(
                "second-order-residual.mx",
                &FieldParams::new(1.0, 0.0, 0.0),
                &point(0.3, 1.0),
                1e-3,
                10.0,
            ),
            check_second_order_residual(
                "second-order-residual.mxy",
                &FieldParams::new(0.6, 0.8, 0.0),
                &point(0.2, 0.4),
                1e-3,
                10.0,
            ),
            check_second_order_residual(
                "second-order-residual.mixed",
                &FieldParams::new(1.0, 0.0, 0.5),
                &point(0.5, 0.7),
                1e-3,
                10.0,
            ),
        ],
        "geodesic-equivalence" => [
            (FieldParams::new(1.0, 0.0, 0.0), point(0.3, 1.0), "mx"),
            (FieldParams::new(0.6, 0.8, 0.0), point(0.2, 0.4), "mxy"),
        ]
        .iter()
        .map(|(a, s0, tag)| {
            let id = format!("geodesic-equivalence.{tag}");
            let mut r = push_err(&id, check_geodesic_equivalence(a, s0, 5.0));
            r.check_id = id;
            r
        })
        .collect(),
        "obstruction" => {
            let p = point(0.5, 0.7);
            let n = cfg.obstruction_samples;
            let mut out: Vec<CheckResult> = [
                FieldParams::new(1.0, 0.0, 0.0),
                FieldParams::new(0.6, 0.8, 0.0),
                FieldParams::new(1.0, 0.0, 0.5),
                FieldParams::new(0.0, 0.0, 1.0),
            ]
            .iter()
            .map(|a| push_err("obstruction", fit_connection_obstruction(a, &p, n)))
            .collect();
            for a in [
                FieldParams::new(1.0, 0.0, 0.5),
                FieldParams::new(1.0, 0.0, 0.0),
            ] {
                let mut r = push_err("obstruction", fit_dissipative_obstruction(&a, 0.1, &p, n));
                if a.az == 0.0 && r.verdict != Verdict::Informational {
                    r = CheckResult::informational(
                        r.check_id,
                        r.inputs,
                        r.residual,
                        "dissipative flow at az = 0 is still velocity-quadratic pointwise; any obstruction comes from metric compatibility (see prop7)",
                    );
                }
                out.push(r);
            }
            out
        }
        "levi-civita-audit" => vec![candidate_levi_civita(&cfg.action_grid)],
        "metric-ode" => metric_ode_checks(&cfg.action_grid),
        "barred-chart" => barred_chart_checks(&cfg.action_grid),
        "curvature" => curvature_checks(),
        "prop7" => dissipative_residual_checks(&cfg.gammas, &cfg.action_grid),
        "flat-cylinder" => {
            let a = FieldParams::new(0.0, 0.0, 1.0);
            let mut cases = vec![(0.0, point(0.3, 0.0), 5.0)];
            for &g in &cfg.gammas {
                if g > 0.0 {
                    cases.push((g, point(0.0, 0.0), (0.9 / (2.0 * g * a.az)).min(2.0)));
                }
            }
            cases
                .iter()
                .flat_map(|(g, s0, t)| match check_prop4_prop8(&a, *g, s0, *t) {
                    Ok(v) => v,
                    Err(e) => vec![CheckResult::failed(
                        "flat-cylinder",
                        Inputs::new(),
                        1e-10,
                        e.to_string(),
                    )],
                })
                .map(|mut r| {
                    if let Some(g) = r.inputs.get("gamma").and_then(|v| v.as_f64()) {
                        if g > 0.0 {
                            r.check_id = format!("{}-gamma{g}", r.check_id);
                        }
                    }
                    r
                })
                .collect()
        }
        "lorentzian" => lorentzian_checks(&cfg.action_grid),
        "conservation" => conservation_checks(),
        "stochastic" => stochastic_checks(cfg.seed),
        "dissipative-second-order" => vec![dissipative_second_order_check()],
        _ => Vec::new(),
    }
}

/// Calibrates the convention, then runs the selected groups concurrently
/// and assembles their results in [`CHECK_GROUPS`] order.
pub fn run_full_audit(cfg: &AuditConfig) -> Result<AuditReport, AuditError> {
    cfg.validate()?;
    let cal = calibrate_convention()?;
    let groups: Vec<&str> = CHECK_GROUPS
        .iter()
        .copied()
        .filter(|g| cfg.selected(g))
        .collect();
    let results = parallel::map(&groups, |g| run_group(g, cfg, &cal))
        .into_iter()
        .flatten()
        .collect();
    Ok(AuditReport {
        convention: ConventionParams { ..cal.pinned },
        results,
        seeds: BTreeMap::from([("audit".to_string(), cfg.seed)]),
        versions: BTreeMap::from([(
            env!("CARGO_PKG_NAME").to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        )]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = default_action_grid();
        assert_eq!(g.len(), 18);
        assert_eq!(g[0], -0.9);
        assert_eq!(g[17], 0.9);
    }

    #[test]
    fn unknown_group_rejected() {
        let cfg = AuditConfig {
            checks: vec!["nope".into()],
            ..Default::default()
        };
        assert_eq!(
            run_full_audit(&cfg),
            Err(AuditError::UnknownCheck("nope".into()))
        );
    }

    #[test]
    fn subset_is_restricted() {
        let cfg = AuditConfig {
            checks: vec!["prop7".into()],
            gammas: vec![0.1],
            ..Default::default()
        };
        let r = run_full_audit(&cfg).unwrap();
        assert!(!r.results.is_empty());
        assert!(r.results.iter().all(|c| c.group() == "prop7"));
        assert!(r.all_passed());
    }
}
