use super::report::{inputs, CheckResult, Inputs};
use super::AuditError;
use crate::dynamics::{
    dissipative_second_order_residuals, evolve_classical, evolve_dissipative, h0_value,
    hamilton_rhs, quantum_propagator_step, second_order_acceleration, second_order_line2,
    second_order_residual, AccelerationSource, DissipationParams, DynamicsError, FieldParams,
    Trajectory,
};
use crate::geometry::{
    barred_pullback_residual, barred_transform, candidate_h_rational, causal_character,
    christoffel_from_metric, curvature_samples, dissipative_ode_residual, geodesic_integrate,
    geodesic_integrate_with, levi_civita_audit, metric_ode_residual, prop2_metric, quadratic_form,
    scalar_curvature_numeric, ActionAngleConnection, CausalClass, Chart, Component, GeodesicState,
    GeometryError, LeviCivita, MetricComponents, Signature,
};
use crate::ode::{Integrator, Tolerances};
use crate::state_maps::{from_action_angle, spherical_from_action, ActionAnglePoint};
use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;

/// Local tolerance for geodesics of the action–angle connection, whose
/// `1/I` pole is crossed by every transverse orbit.
pub const ACTION_ANGLE_GEODESIC_TOLERANCE: f64 = 1e-13;
pub const MIN_OBSTRUCTION_SAMPLES: usize = 50;

fn field_inputs(a: &FieldParams) -> Inputs {
    inputs([
        ("ax", json!(a.ax)),
        ("ay", json!(a.ay)),
        ("az", json!(a.az)),
    ])
}

fn with(mut base: Inputs, extra: Inputs) -> Inputs {
    base.extend(extra);
    base
}

fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.positions
        .iter()
        .zip(&b.positions)
        .map(|(p, q)| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()))
        .fold(
            if a.len() == b.len() {
                0.0
            } else {
                f64::INFINITY
            },
            f64::max,
        )
}

/// Second-order residuals of a Hamilton-flow trajectory, accelerations by
/// fourth-order central differences of the sampled velocities.
pub fn check_second_order_residual(
    id: &str,
    a: &FieldParams,
    p0: &ActionAnglePoint,
    dt: f64,
    t_final: f64,
) -> CheckResult {
    const TOL: f64 = 1e-6;
    const MARGIN: f64 = 0.05;
    let rec = with(
        field_inputs(a),
        inputs([
            ("i0", json!(p0.action)),
            ("phi0", json!(p0.angle)),
            ("dt", json!(dt)),
            ("t_final", json!(t_final)),
            ("margin", json!(MARGIN)),
        ]),
    );
    let run = evolve_classical(p0, a, dt, t_final)
        .and_then(|tr| second_order_residual(&tr, a, AccelerationSource::FiniteDifference, MARGIN));
    match run {
        Ok(r) if r.evaluated() > 0 => CheckResult::bounded(
            id,
            rec,
            r.max_abs(),
            TOL,
            format!(
                "{} samples evaluated, {} skipped within {MARGIN} of I in {{-1, 0, 1}} or at the ends",
                r.evaluated(),
                r.skipped()
            ),
        ),
        Ok(_) => CheckResult::failed(id, rec, TOL, "no samples away from the singular set"),
        Err(e) => CheckResult::failed(id, rec, TOL, e.to_string()),
    }
}

/// Hamilton flow against the geodesic of the action–angle connection with
/// the same initial point and velocity.
pub fn check_geodesic_equivalence(
    a: &FieldParams,
    s0: &ActionAnglePoint,
    t_final: f64,
) -> Result<CheckResult, AuditError> {
    const TOL: f64 = 1e-6;
    const DT: f64 = 1e-3;
    if a.az != 0.0 {
        return Err(AuditError::Precondition(format!(
            "geodesic equivalence needs az = 0 (got az = {})",
            a.az
        )));
    }
    let id = "geodesic-equivalence";
    let rec = with(
        field_inputs(a),
        inputs([
            ("i0", json!(s0.action)),
            ("phi0", json!(s0.angle)),
            ("dt", json!(DT)),
            ("t_final", json!(t_final)),
            ("geodesic_tolerance", json!(ACTION_ANGLE_GEODESIC_TOLERANCE)),
        ]),
    );
    let v0 = hamilton_rhs(s0, a)?;
    let flow = evolve_classical(s0, a, DT, t_final)?;
    let fine = Integrator::new(Tolerances {
        abs: ACTION_ANGLE_GEODESIC_TOLERANCE,
        rel: ACTION_ANGLE_GEODESIC_TOLERANCE,
    });
    let state = GeodesicState::new([s0.action, s0.angle], v0);
    Ok(
        match geodesic_integrate_with(&ActionAngleConnection, state, DT, t_final, &fine) {
            Ok(geo) => CheckResult::bounded(
                id,
                rec,
                sup_distance(&flow, &geo),
                TOL,
                "sup over samples of max(|dI|, |dPhi|); initial velocity from the Hamilton flow",
            ),
            Err(GeometryError::Singularity { t, .. }) => CheckResult::informational(
                id,
                rec,
                None,
                format!("geodesic aborted at a connection pole at t = {t}"),
            ),
            Err(e) => CheckResult::failed(id, rec, TOL, e.to_string()),
        },
    )
}

/// Least-squares fit of `acc(v) ~ -Gamma(v, v)` over `n` unit velocities;
/// returns the maximum absolute fit residual.
pub fn quadratic_fit_residual(
    acc: impl Fn([f64; 2]) -> [f64; 2],
    n: usize,
) -> Result<f64, AuditError> {
    if n < MIN_OBSTRUCTION_SAMPLES {
        return Err(AuditError::Fit(format!(
            "need at least {MIN_OBSTRUCTION_SAMPLES} velocity samples (got {n})"
        )));
    }
    let vs: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            [th.cos(), th.sin()]
        })
        .collect();
    let design = DMatrix::from_fn(n, 3, |r, c| {
        let [v1, v2] = vs[r];
        [v1 * v1, 2.0 * v1 * v2, v2 * v2][c]
    });
    let targets = DMatrix::from_fn(n, 2, |r, c| acc(vs[r])[c]);
    if targets.iter().any(|x| !x.is_finite()) {
        return Err(AuditError::Fit("non-finite acceleration sample".into()));
    }
    let svd = SVD::new(design.clone(), true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return Err(AuditError::Fit("degenerate velocity sampling".into()));
    }
    let coef = svd
        .solve(&targets, 1e-14)
        .map_err(|e| AuditError::Fit(e.to_string()))?;
    let resid = design * coef - targets;
    Ok(resid.amax())
}

fn check_fit_point(p: &ActionAnglePoint) -> Result<(), AuditError> {
    let i = p.action;
    if !(i.abs() > 1e-3 && i.abs() < 1.0 - 1e-3) {
        return Err(AuditError::Precondition(format!(
            "fit point I = {i} is too close to the singular set {{-1, 0, 1}}"
        )));
    }
    Ok(())
}

/// Pointwise geodesic ansatz for the second-order flow at `p`.
pub fn fit_connection_obstruction(
    a: &FieldParams,
    p: &ActionAnglePoint,
    n_samples: usize,
) -> Result<CheckResult, AuditError> {
    check_fit_point(p)?;
    let residual =
        quadratic_fit_residual(|v| second_order_acceleration(p.action, v, a.az), n_samples)?;
    let id = format!("obstruction.{}", field_label(a));
    let rec = with(
        field_inputs(a),
        inputs([
            ("i", json!(p.action)),
            ("phi", json!(p.angle)),
            ("n_samples", json!(n_samples)),
        ]),
    );
    Ok(obstruction_verdict(
        id,
        rec,
        a,
        residual,
        "second-order flow",
    ))
}

/// Same fit for the noise-free dissipative second-order flow, with the
/// action-equation friction term written as `2 gamma (mixed + 2 az dI / I)`.
pub fn fit_dissipative_obstruction(
    a: &FieldParams,
    gamma: f64,
    p: &ActionAnglePoint,
    n_samples: usize,
) -> Result<CheckResult, AuditError> {
    check_fit_point(p)?;
    let i = p.action;
    let acc = |v: [f64; 2]| {
        let [di, dphi] = v;
        let base = second_order_acceleration(i, v, a.az);
        let mixed = (i * i + 1.0) / (i * (i * i - 1.0)) * di * dphi;
        [
            base[0] + 2.0 * gamma * (mixed + 2.0 * a.az * di / i),
            -second_order_line2(i, v, 0.0, a.az),
        ]
    };
    let residual = quadratic_fit_residual(acc, n_samples)?;
    let id = format!("obstruction.dissipative-{}", field_label(a));
    let rec = with(
        field_inputs(a),
        inputs([
            ("gamma", json!(gamma)),
            ("i", json!(p.action)),
            ("phi", json!(p.angle)),
            ("n_samples", json!(n_samples)),
        ]),
    );
    Ok(obstruction_verdict(
        id,
        rec,
        a,
        residual,
        "dissipative second-order flow without noise",
    ))
}

fn field_label(a: &FieldParams) -> &'static str {
    match (a.ax != 0.0, a.ay != 0.0, a.az != 0.0) {
        (false, false, false) => "free",
        (false, false, true) => "mz",
        (true, false, false) => "mx",
        (false, true, false) => "my",
        (true, true, false) => "mxy",
        _ => "mixed",
    }
}

fn obstruction_verdict(
    id: String,
    rec: Inputs,
    a: &FieldParams,
    residual: f64,
    what: &str,
) -> CheckResult {
    if !a.has_transverse() {
        CheckResult::informational(
            id,
            rec,
            Some(residual),
            format!(
                "without transverse fields the flow is dI = 0, dPhi = 2 az; the velocity-linear az terms of the {what} are not quadratic, but the obstruction concerns the mixed case"
            ),
        )
    } else if a.az == 0.0 {
        CheckResult::bounded(
            id,
            rec,
            residual,
            1e-10,
            format!("{what} is exactly velocity-quadratic at az = 0"),
        )
    } else {
        CheckResult::at_least(
            id,
            rec,
            residual,
            1e-3,
            format!("velocity-linear az terms of the {what} are not representable by a connection"),
        )
    }
}

/// Straight-line, helix and spherical-chart identities for an `az`-only field.
pub fn check_prop4_prop8(
    a: &FieldParams,
    gamma: f64,
    s0: &ActionAnglePoint,
    t_final: f64,
) -> Result<Vec<CheckResult>, AuditError> {
    const DT: f64 = 1e-2;
    if a.has_transverse() {
        return Err(AuditError::Precondition(
            "flat-cylinder checks need ax = ay = 0".into(),
        ));
    }
    let d = DissipationParams {
        gamma,
        ..Default::default()
    };
    let tr = evolve_dissipative(s0, a, &d, DT, t_final)?;
    let rec = with(
        field_inputs(a),
        inputs([
            ("gamma", json!(gamma)),
            ("i0", json!(s0.action)),
            ("phi0", json!(s0.angle)),
            ("dt", json!(DT)),
            ("t_final", json!(t_final)),
        ]),
    );
    let tag = if gamma == 0.0 { "line" } else { "helix" };

    let mut line: f64 = 0.0;
    let mut helix: f64 = 0.0;
    for k in 0..tr.len() {
        let t = tr.times[k];
        let [i, phi] = tr.positions[k];
        let rate = 2.0 * a.az;
        line = line
            .max((i - (s0.action - d.friction_factor * gamma * rate * t)).abs())
            .max((phi - (s0.angle + rate * t)).abs());
        helix = helix.max((i + gamma * phi - s0.action - gamma * s0.angle).abs());
    }
    let end = tr.positions[tr.len() - 1];

    let mut sph: f64 = 0.0;
    let vel = tr
        .velocities
        .as_ref()
        .expect("dissipative trajectories carry velocities");
    let theta: Vec<f64> = tr
        .positions
        .iter()
        .map(|p| {
            spherical_from_action(&ActionAnglePoint {
                action: p[0],
                angle: p[1],
            })
            .map(|s| s.0)
            .unwrap_or(f64::NAN)
        })
        .collect();
    let second = |x: &dyn Fn(usize) -> f64, k: usize| {
        (-x(k + 2) + 16.0 * x(k + 1) - 30.0 * x(k) + 16.0 * x(k - 1) - x(k - 2)) / (12.0 * DT * DT)
    };
    for k in 2..tr.len().saturating_sub(2) {
        let th = theta[k];
        let dth = -vel[k][0] / th.sin();
        let r_theta = second(&|j| theta[j], k) + dth * dth / th.tan();
        let r_phi = second(&|j| tr.positions[j][1], k);
        sph = sph.max(r_theta.abs()).max(r_phi.abs());
    }
    if theta.iter().any(|t| t.is_nan()) {
        sph = f64::NAN;
    }

    Ok(vec![
        CheckResult::bounded(
            format!("flat-cylinder.{tag}"),
            rec.clone(),
            line,
            1e-10,
            format!(
                "sup deviation from I = I0 - 2 gamma az t, Phi = Phi0 + 2 az t; end point ({:?}, {:?})",
                end[0], end[1]
            ),
        ),
        CheckResult::bounded(
            format!("flat-cylinder.{tag}-invariant"),
            rec.clone(),
            helix,
            1e-10,
            "sup |I + gamma Phi - I0 - gamma Phi0|",
        ),
        CheckResult::bounded(
            format!("flat-cylinder.{tag}-spherical"),
            rec,
            sph,
            1e-8,
            "theta'' + theta'^2 cot(theta) and Phi'' by five-point differences of theta = acos(I), Phi",
        ),
    ])
}

pub fn candidate_levi_civita(grid: &[f64]) -> CheckResult {
    let pts = levi_civita_audit(&prop2_metric(), &ActionAngleConnection, grid);
    let fold = |sel: &dyn Fn(&crate::geometry::LeviCivitaPoint) -> Option<[Complex64; 3]>| {
        pts.iter()
            .filter_map(sel)
            .flat_map(|d| d.into_iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    };
    let constrained = fold(&|p| p.constrained());
    let free = fold(&|p| p.unconstrained());
    let flagged = pts.iter().filter(|p| p.flag.is_some()).count();
    CheckResult::informational(
        "levi-civita-audit",
        inputs([("grid", json!(grid)), ("sqrt_branch", json!("principal"))]),
        Some(constrained.max(free)),
        format!(
            "Levi-Civita connection of the candidate metric minus the action-angle connection: max |dev| over G1_11, G1_22, G2_12 = {constrained:.6e}; over G1_12, G2_11, G2_22 (never constrained) = {free:.6e}; {flagged} flagged points"
        ),
    )
}

pub fn metric_ode_checks(grid: &[f64]) -> Vec<CheckResult> {
    let m = prop2_metric();
    let rational = candidate_h_rational();
    let mut out = Vec::new();
    for (label, h) in [("sqrt-h", &m.h), ("rational-h", &rational)] {
        let mut worst = [0.0f64; 3];
        let mut flagged = 0;
        for &i in grid {
            match metric_ode_residual(&m.f, &m.g, h, i) {
                Ok(r) => {
                    for c in 0..3 {
                        worst[c] = worst[c].max(r[c].norm());
                    }
                }
                Err(_) => flagged += 1,
            }
        }
        out.push(CheckResult::informational(
            format!("metric-ode.table-{label}"),
            inputs([
                ("grid", json!(grid)),
                ("h", json!(label)),
                ("sqrt_branch", json!("principal")),
            ]),
            Some(worst.iter().copied().fold(0.0, f64::max)),
            format!(
                "max |r1|, |r2|, |r3| over grid = {:.6e}, {:.6e}, {:.6e}; {flagged} flagged points",
                worst[0], worst[1], worst[2]
            ),
        ));
    }
    let at = 0.5;
    let rec =
        |h: &str, r: &str| inputs([("i", json!(at)), ("h", json!(h)), ("residual", json!(r))]);
    match metric_ode_residual(&m.f, &m.g, &m.h, at) {
        Ok(r) => out.push(CheckResult::bounded(
            "metric-ode.anchor-sqrt-h-r3",
            rec("sqrt-h", "r3"),
            (r[2] - Complex64::new(1.0 / 3.0, 0.0)).norm(),
            1e-10,
            format!("r3 = {} expected 1/3", r[2]),
        )),
        Err(e) => out.push(CheckResult::failed(
            "metric-ode.anchor-sqrt-h-r3",
            rec("sqrt-h", "r3"),
            1e-10,
            e.to_string(),
        )),
    }
    match metric_ode_residual(&m.f, &m.g, &rational, at) {
        Ok(r) => {
            out.push(CheckResult::bounded(
                "metric-ode.anchor-rational-h-r2",
                rec("rational-h", "r2"),
                r[1].norm(),
                1e-10,
                format!("r2 = {}", r[1]),
            ));
            out.push(CheckResult::bounded(
                "metric-ode.anchor-rational-h-r3",
                rec("rational-h", "r3"),
                r[2].norm(),
                1e-10,
                format!("r3 = {}", r[2]),
            ));
        }
        Err(e) => out.push(CheckResult::failed(
            "metric-ode.anchor-rational-h",
            rec("rational-h", "r2,r3"),
            1e-10,
            e.to_string(),
        )),
    }
    out
}

pub fn barred_chart_checks(grid: &[f64]) -> Vec<CheckResult> {
    let flat = MetricComponents::flat_cylinder();
    let (i0, i1) = (0.1, 0.6);
    let chart = barred_transform(&flat, i0, i1);
    let mut pull: f64 = 0.0;
    for &x in grid {
        if let Ok(r) = barred_pullback_residual(&flat, x) {
            pull = pull.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    let flat_notes = match chart {
        Ok((ibar, shift)) => format!(
            "flat cylinder: Ibar = {ibar}, Phi shift = {shift} on [{i0}, {i1}] (imaginary chart); 2 dIbar dPhibar + dPhibar^2 has Lorentzian signature over the reals, so the recast holds only over the complexified chart"
        ),
        Err(e) => format!("flat cylinder chart failed: {e}"),
    };
    let complex = prop2_metric();
    let mut pull_c: f64 = 0.0;
    let mut flagged = 0;
    for &x in grid {
        match barred_pullback_residual(&complex, x) {
            Ok(r) => pull_c = pull_c.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            Err(_) => flagged += 1,
        }
    }
    vec![
        CheckResult::informational(
            "barred-chart.flat-cylinder",
            inputs([("i0", json!(i0)), ("i", json!(i1)), ("sqrt_branch", json!("principal"))]),
            Some(pull),
            format!("{flat_notes}; max pullback residual over grid shown as residual"),
        ),
        CheckResult::informational(
            "barred-chart.candidate-metric",
            inputs([("grid", json!(grid)), ("sqrt_branch", json!("principal"))]),
            Some(pull_c),
            format!("max pullback residual of the barred chart for the candidate metric; {flagged} flagged points"),
        ),
    ]
}

fn bar_grid() -> Vec<f64> {
    (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect()
}

/// Denominator floor for relative curvature errors (where `h''` vanishes).
pub const CURVATURE_FLOOR: f64 = 1e-3;

pub fn curvature_checks() -> Vec<CheckResult> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let cases = [
        (
            "square",
            Component::real(|x| x * x)
                .with_d1(move |x| c(2.0 * x))
                .with_d2(move |_| c(2.0)),
        ),
        (
            "sin",
            Component::real(f64::sin)
                .with_d1(move |x| c(x.cos()))
                .with_d2(move |x| c(-x.sin())),
        ),
        (
            "exp",
            Component::real(f64::exp)
                .with_d1(move |x| c(x.exp()))
                .with_d2(move |x| c(x.exp())),
        ),
    ];
    let grid = bar_grid();
    let mut out = Vec::new();
    for (label, h) in cases {
        let rec = inputs([
            ("h", json!(label)),
            ("grid", json!(&grid)),
            ("floor", json!(CURVATURE_FLOOR)),
        ]);
        let id = format!("curvature.{label}");
        match curvature_samples(&h, &grid) {
            Ok(s) => {
                let rel = s
                    .iter()
                    .map(|s| {
                        (s.numeric - c(s.formula)).norm() / s.formula.abs().max(CURVATURE_FLOOR)
                    })
                    .fold(0.0, f64::max);
                out.push(CheckResult::bounded(
                    id,
                    rec,
                    rel,
                    1e-5,
                    "max |R_numeric - h''| / max(|h''|, floor) over Ibar in [-1, 1]",
                ));
            }
            Err(e) => out.push(CheckResult::failed(id, rec, 1e-5, e.to_string())),
        }
    }
    let th = PI / 3.0;
    let rec = inputs([("theta", json!(th))]);
    match scalar_curvature_numeric(&MetricComponents::round_sphere(), th) {
        Ok(r) => out.push(CheckResult::bounded(
            "curvature.round-sphere",
            rec,
            (r - c(2.0)).norm() / 2.0,
            1e-5,
            format!("R = {r}, expected 2"),
        )),
        Err(e) => out.push(CheckResult::failed(
            "curvature.round-sphere",
            rec,
            1e-5,
            e.to_string(),
        )),
    }
    out
}

pub fn dissipative_residual_checks(gammas: &[f64], grid: &[f64]) -> Vec<CheckResult> {
    let mut lin: f64 = 0.0;
    let mut min_abs = f64::INFINITY;
    let mut errors = Vec::new();
    for &i in grid {
        let base = match dissipative_ode_residual(0.0, i) {
            Ok(b) => b,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        for &g in gammas {
            match dissipative_ode_residual(g, i) {
                Ok(r) => {
                    let expect = g * (i * i + 1.0) / (i * (i * i - 1.0));
                    lin = lin.max((r - base - Complex64::new(expect, 0.0)).norm());
                    min_abs = min_abs.min(r.norm());
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    let anchor = dissipative_ode_residual(0.0, 0.5)
        .map(|z| format!("{:.16e}{:+.16e}i", z.re, z.im))
        .unwrap_or_else(|e| e.to_string());
    let rec = inputs([
        ("gammas", json!(gammas)),
        ("grid", json!(grid)),
        ("sqrt_branch", json!("principal")),
    ]);
    if !errors.is_empty() {
        return vec![CheckResult::failed(
            "prop7.linearity",
            rec,
            1e-9,
            errors.join("; "),
        )];
    }
    vec![
        CheckResult::bounded(
            "prop7.linearity",
            rec.clone(),
            lin,
            1e-9,
            format!("max |r4(gamma) - r4(0) - gamma (I^2+1)/(I(I^2-1))|; r4(0) at I = 1/2 is {anchor}"),
        ),
        CheckResult::at_least(
            "prop7.nonvanishing",
            rec,
            min_abs,
            1e-9,
            "min |r4| over grid and gammas; a nonzero residual means the extra matching condition is not met",
        ),
    ]
}

pub fn lorentzian_checks(grid: &[f64]) -> Vec<CheckResult> {
    const TOL: f64 = 1e-12;
    let m = MetricComponents::lorentz_mz();
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for &x in grid {
        match christoffel_from_metric(&m, x) {
            Ok(c) => worst = worst.max(c.as_array().iter().map(|z| z.norm()).fold(0.0, f64::max)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(CheckResult::bounded(
        "lorentzian.connection",
        inputs([("grid", json!(grid))]),
        worst,
        TOL,
        "max |Gamma| of the metric dPhi^2 - dI^2",
    ));

    let (x0, v) = ([0.3, 0.0], [0.2, 1.0]);
    let rec = inputs([
        ("x0", json!(x0)),
        ("v", json!(v)),
        ("dt", json!(1e-2)),
        ("t_final", json!(5.0)),
    ]);
    match geodesic_integrate(&LeviCivita(m.clone()), GeodesicState::new(x0, v), 1e-2, 5.0) {
        Ok(tr) => {
            let d = (0..tr.len())
                .map(|k| {
                    let t = tr.times[k];
                    let p = tr.positions[k];
                    (p[0] - x0[0] - v[0] * t)
                        .abs()
                        .max((p[1] - x0[1] - v[1] * t).abs())
                })
                .fold(0.0, f64::max);
            out.push(CheckResult::bounded(
                "lorentzian.affine",
                rec,
                d,
                TOL,
                "sup deviation from x0 + v t",
            ));
        }
        Err(e) => out.push(CheckResult::failed(
            "lorentzian.affine",
            rec,
            TOL,
            e.to_string(),
        )),
    }

    let az = 1.0;
    let a = FieldParams::new(0.0, 0.0, az);
    let p0 = ActionAnglePoint {
        action: 0.3,
        angle: 0.0,
    };
    let rec = inputs([
        ("az", json!(az)),
        ("i0", json!(0.3)),
        ("phi0", json!(0.0)),
        ("t_final", json!(5.0)),
    ]);
    let tangent = evolve_classical(&p0, &a, 1e-2, 5.0)
        .map_err(|e| e.to_string())
        .and_then(|tr| {
            let mut dev: f64 = 0.0;
            let mut classes = Vec::new();
            for k in 0..tr.len() {
                let (cls, q) = causal_character(&m, tr.velocity(k).unwrap(), tr.positions[k][0])
                    .map_err(|e| e.to_string())?;
                dev = dev.max((q - 4.0 * az * az).abs());
                classes.push(cls);
            }
            Ok((dev, classes.iter().all(|c| *c == CausalClass::PositiveNorm)))
        });
    match tangent {
        Ok((dev, positive)) => out.push(CheckResult::bounded(
            "lorentzian.tangent-norm",
            rec,
            dev,
            TOL,
            format!(
                "sup |q - 4 az^2| along the flow; every tangent is {}, i.e. the curve is not null in this metric",
                if positive { "positive-norm" } else { "of mixed class" }
            ),
        )),
        Err(e) => out.push(CheckResult::failed("lorentzian.tangent-norm", rec, TOL, e)),
    }

    let gamma = 0.1;
    let v = [-2.0 * gamma * az, 2.0 * az];
    if let Ok((cls, q)) = causal_character(&m, v, 0.3) {
        out.push(CheckResult::informational(
            "lorentzian.dissipative-tangent",
            inputs([("az", json!(az)), ("gamma", json!(gamma))]),
            Some(q),
            format!("helix tangent has q = 4 az^2 (1 - gamma^2) = {q:?}, class {cls:?}"),
        ));
    }
    out
}

fn general_real_metric() -> MetricComponents {
    let c = |x: f64| Complex64::new(x, 0.0);
    MetricComponents::new(
        Chart::ActionAngle,
        Component::real(|x| 1.0 + x * x).with_d1(move |x| c(2.0 * x)),
        Component::real(|x| 0.3 * x).with_d1(move |_| c(0.3)),
        Component::real(|x| 2.0 + x.sin()).with_d1(move |x| c(x.cos())),
        Signature::Riemannian,
    )
}

pub fn conservation_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();

    let a = FieldParams::new(0.3, 0.4, 0.5);
    let rec = with(
        field_inputs(&a),
        inputs([("dt", json!(1e-3)), ("steps", json!(10_000))]),
    );
    match from_action_angle(&ActionAnglePoint {
        action: 0.2,
        angle: 0.9,
    }) {
        Ok(mut s) => {
            let mut drift: f64 = 0.0;
            for _ in 0..10_000 {
                s = quantum_propagator_step(&s, &a, 1e-3);
                drift = drift.max((s.norm_sqr().sqrt() - 1.0).abs());
            }
            out.push(CheckResult::bounded(
                "conservation.quantum-norm",
                rec,
                drift,
                1e-12,
                "max | |psi| - 1 | over repeated exact steps",
            ));
        }
        Err(e) => out.push(CheckResult::failed(
            "conservation.quantum-norm",
            rec,
            1e-12,
            e.to_string(),
        )),
    }

    for (label, a, p0) in [
        ("mx", FieldParams::new(1.0, 0.0, 0.0), (0.3, 1.0)),
        ("mxy", FieldParams::new(0.6, 0.8, 0.0), (0.2, 0.4)),
        ("mixed", FieldParams::new(1.0, 0.0, 0.5), (0.5, 0.7)),
    ] {
        let p0 = ActionAnglePoint {
            action: p0.0,
            angle: p0.1,
        };
        let id = format!("conservation.h0-{label}");
        let rec = with(
            field_inputs(&a),
            inputs([
                ("i0", json!(p0.action)),
                ("phi0", json!(p0.angle)),
                ("dt", json!(1e-3)),
                ("t_final", json!(10.0)),
            ]),
        );
        let run = || -> Result<f64, DynamicsError> {
            let tr = evolve_classical(&p0, &a, 1e-3, 10.0)?;
            let h0 = h0_value(&p0, &a)?;
            let mut drift: f64 = 0.0;
            for k in 0..tr.len() {
                drift = drift.max((h0_value(&tr.point(k), &a)? - h0).abs());
            }
            Ok(drift / h0.abs())
        };
        match run() {
            Ok(d) => out.push(CheckResult::bounded(
                id,
                rec,
                d,
                1e-8,
                "max |H0(t) - H0(0)| / |H0(0)|",
            )),
            Err(e) => out.push(CheckResult::failed(id, rec, 1e-8, e.to_string())),
        }
    }

    for (label, m, s0) in [
        (
            "general",
            general_real_metric(),
            GeodesicState::new([0.2, 0.0], [0.7, -0.4]),
        ),
        (
            "round-sphere",
            MetricComponents::round_sphere(),
            GeodesicState::new([1.2, 0.0], [0.3, 0.8]),
        ),
    ] {
        let id = format!("conservation.quadratic-form-{label}");
        let rec = inputs([
            ("x0", json!(s0.position)),
            ("v0", json!(s0.velocity)),
            ("dt", json!(1e-2)),
            ("t_final", json!(5.0)),
        ]);
        match geodesic_integrate(&LeviCivita(m.clone()), s0, 1e-2, 5.0) {
            Ok(tr) => {
                let q0 = quadratic_form(&m, s0.position[0], s0.velocity);
                let d = (0..tr.len())
                    .map(|k| {
                        ((quadratic_form(&m, tr.positions[k][0], tr.velocity(k).unwrap()) - q0)
                            / q0)
                            .abs()
                    })
                    .fold(0.0, f64::max);
                out.push(CheckResult::bounded(
                    id,
                    rec,
                    d,
                    1e-8,
                    "max relative drift of f v1^2 + 2 g v1 v2 + h v2^2",
                ));
            }
            Err(e) => out.push(CheckResult::failed(id, rec, 1e-8, e.to_string())),
        }
    }
    out
}

pub const OU_STEPS: usize = 1_000_000;

pub fn stochastic_checks(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let a = FieldParams::new(1.0, 0.0, 0.5);
    let p0 = ActionAnglePoint {
        action: 0.5,
        angle: 0.7,
    };
    let rec = with(
        field_inputs(&a),
        inputs([
            ("i0", json!(0.5)),
            ("phi0", json!(0.7)),
            ("t_final", json!(5.0)),
        ]),
    );
    let reduction = evolve_dissipative(&p0, &a, &DissipationParams::default(), 1e-2, 5.0)
        .and_then(|d| Ok(sup_distance(&d, &evolve_classical(&p0, &a, 1e-2, 5.0)?)));
    match reduction {
        Ok(d) => out.push(CheckResult::bounded(
            "stochastic.sigma-zero",
            rec,
            d,
            1e-10,
            "gamma = 0, sigma = 0 dissipative run against the Hamilton flow",
        )),
        Err(e) => out.push(CheckResult::failed(
            "stochastic.sigma-zero",
            rec,
            1e-10,
            e.to_string(),
        )),
    }

    let d = DissipationParams {
        noise_sigma: 0.5,
        noise_tau: 1.0,
        seed,
        ..Default::default()
    };
    let dt = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi = 0.0;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..OU_STEPS {
        xi = crate::dynamics::ou_noise_step(xi, &d, dt, &mut rng);
        sum += xi;
        sum2 += xi * xi;
    }
    let n = OU_STEPS as f64;
    let var = sum2 / n - (sum / n).powi(2);
    let target = d.noise_sigma * d.noise_sigma * d.noise_tau / 2.0;
    out.push(CheckResult::bounded(
        "stochastic.ou-variance",
        inputs([
            ("sigma", json!(d.noise_sigma)),
            ("tau", json!(d.noise_tau)),
            ("dt", json!(dt)),
            ("steps", json!(OU_STEPS)),
            ("seed", json!(seed)),
        ]),
        (var - target).abs() / target,
        0.05,
        format!("sample variance {var:.6e} vs sigma^2 tau / 2 = {target:.6e}"),
    ));

    let noisy = DissipationParams {
        gamma: 0.05,
        noise_sigma: 0.3,
        noise_tau: 0.5,
        seed,
        ..Default::default()
    };
    let rec = with(
        field_inputs(&a),
        inputs([
            ("gamma", json!(0.05)),
            ("sigma", json!(0.3)),
            ("tau", json!(0.5)),
            ("seed", json!(seed)),
        ]),
    );
    let runs = (
        evolve_dissipative(&p0, &a, &noisy, 1e-2, 2.0),
        evolve_dissipative(&p0, &a, &noisy, 1e-2, 2.0),
        evolve_dissipative(
            &p0,
            &a,
            &DissipationParams {
                seed: seed ^ 1,
                ..noisy
            },
            1e-2,
            2.0,
        ),
    );
    match runs {
        (Ok(x), Ok(y), other) => {
            let identical = x == y;
            let differs = other.map(|z| z != x).unwrap_or(true);
            out.push(CheckResult::bounded(
                "stochastic.reproducibility",
                rec,
                if identical {
                    0.0
                } else {
                    sup_distance(&x, &y).max(f64::MIN_POSITIVE)
                },
                0.0,
                format!(
                    "same seed gives bit-identical trajectories; a different seed {}",
                    if differs {
                        "gives a different path"
                    } else {
                        "gave the same path"
                    }
                ),
            ));
        }
        (Err(e), _, _) | (_, Err(e), _) => out.push(CheckResult::failed(
            "stochastic.reproducibility",
            rec,
            0.0,
            e.to_string(),
        )),
    }
    out
}

pub fn dissipative_second_order_check() -> CheckResult {
    let a = FieldParams::new(1.0, 0.0, 0.5);
    let gamma = 0.1;
    let p0 = ActionAnglePoint {
        action: 0.5,
        angle: 2.5,
    };
    let rec = with(
        field_inputs(&a),
        inputs([
            ("gamma", json!(gamma)),
            ("i0", json!(0.5)),
            ("phi0", json!(2.5)),
            ("dt", json!(1e-3)),
            ("t_final", json!(5.0)),
        ]),
    );
    let d = DissipationParams {
        gamma,
        ..Default::default()
    };
    let run = evolve_dissipative(&p0, &a, &d, 1e-3, 5.0)
        .and_then(|tr| dissipative_second_order_residuals(&tr, &a, gamma, 0.05));
    match run {
        Ok(rs) => {
            let (mut p, mut alt, mut l2) = (0.0f64, 0.0f64, 0.0f64);
            for r in rs.iter().flatten() {
                p = p.max(r.line1_over_i.abs());
                alt = alt.max(r.line1_over_i_one_minus_i2.abs());
                l2 = l2.max(r.line2.abs());
            }
            CheckResult::informational(
                "dissipative-second-order",
                rec,
                None,
                format!(
                    "noise-free dissipative flow, friction factor 1: max |line 1| with 2 az dI / I = {p:.6e}, with 2 az dI / (I (1 - I^2)) = {alt:.6e}; max |line 2| = {l2:.6e}"
                ),
            )
        }
        Err(e) => CheckResult::informational(
            "dissipative-second-order",
            rec,
            None,
            format!("run failed: {e}"),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::Verdict;

    fn pt(i: f64, phi: f64) -> ActionAnglePoint {
        ActionAnglePoint::new(i, phi).unwrap()
    }

    #[test]
    fn obstruction_examples() {
        let p = pt(0.5, 0.7);
        let r = fit_connection_obstruction(&FieldParams::new(1.0, 0.0, 0.0), &p, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.residual.unwrap() <= 1e-10);
        let r = fit_connection_obstruction(&FieldParams::new(1.0, 0.0, 0.5), &p, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.inputs["observed"].as_f64().unwrap() >= 1e-3);
        let r = fit_connection_obstruction(&FieldParams::new(0.0, 0.0, 1.0), &p, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Informational);
        assert!(fit_connection_obstruction(&FieldParams::new(1.0, 0.0, 0.0), &p, 10).is_err());
        assert!(
            fit_connection_obstruction(&FieldParams::new(1.0, 0.0, 0.0), &pt(0.0, 0.0), 64)
                .is_err()
        );
    }

    #[test]
    fn fit_residual_is_noise_for_any_sample_count() {
        for n in [50, 73, 200] {
            let r = quadratic_fit_residual(|v| second_order_acceleration(-0.4, v, 0.0), n).unwrap();
            assert!(r < 1e-12, "n = {n}: {r:e}");
        }
    }

    #[test]
    fn linear_term_magnitude() {
        // odd terms are orthogonal to the quadratic basis on the circle
        let r = quadratic_fit_residual(|v| [3.0 * v[1], 0.0], 64).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn helix_example() {
        let rs =
            check_prop4_prop8(&FieldParams::new(0.0, 0.0, 1.0), 0.1, &pt(0.0, 0.0), 2.0).unwrap();
        assert!(rs.iter().all(|r| r.verdict == Verdict::Pass), "{rs:#?}");
        assert!(rs[0].notes.contains("(-0.4"), "{}", rs[0].notes);
        let rs =
            check_prop4_prop8(&FieldParams::new(0.0, 0.0, 1.0), 0.0, &pt(0.3, 0.0), 5.0).unwrap();
        assert!(rs.iter().all(|r| r.verdict == Verdict::Pass), "{rs:#?}");
        assert!(
            check_prop4_prop8(&FieldParams::new(1.0, 0.0, 1.0), 0.0, &pt(0.3, 0.0), 1.0).is_err()
        );
    }

    #[test]
    fn geodesic_equivalence_refuses_az() {
        assert!(matches!(
            check_geodesic_equivalence(&FieldParams::new(1.0, 0.0, 0.5), &pt(0.3, 1.0), 5.0),
            Err(AuditError::Precondition(_))
        ));
    }
}
