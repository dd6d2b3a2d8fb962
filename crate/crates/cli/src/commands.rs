use crate::args::{
    AuditArgs, ConnectionName, EvolveArgs, FieldArgs, GeodesicArgs, Mode, SweepArgs, TimeArgs,
};
use crate::output::write_atomic;
use qubit_manifolds::audit::{
    self, AuditConfig, AuditError, Verdict, ACTION_ANGLE_GEODESIC_TOLERANCE,
};
use qubit_manifolds::dynamics::{
    evolve_classical_with, evolve_dissipative_with, hamilton_rhs, quantum_trajectory, DynamicsError,
};
use qubit_manifolds::geometry::{
    geodesic_integrate_with, ActionAngleConnection, ConnectionField, CotThetaConnection,
    GeodesicState, GeometryError, LeviCivita, MetricComponents, ZeroConnection,
};
use qubit_manifolds::ode::{Integrator, Tolerances};
use qubit_manifolds::state_maps::from_action_angle;
use qubit_manifolds::{parallel, ActionAnglePoint, DissipationParams, FieldParams, Trajectory};
use std::fmt::Write as _;
use std::path::Path;

/// Failure of a subcommand: `Usage` maps to exit code 2, `Runtime` to 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn dynamics_failure(e: &DynamicsError) -> Failure {
    match e {
        DynamicsError::State(_)
        | DynamicsError::InvalidParams(_)
        | DynamicsError::StartTooCloseToPole(_) => usage(e),
        _ => Failure::Runtime(e.to_string()),
    }
}

fn field(f: &FieldArgs) -> FieldParams {
    FieldParams::new(f.ax, f.ay, f.az)
}

fn integrator(t: &TimeArgs, default_tol: f64) -> Result<Integrator, Failure> {
    let tol = t.tol.unwrap_or(default_tol);
    if !tol.is_finite() || tol <= 0.0 {
        return Err(usage(format!("--tol must be positive (got {tol})")));
    }
    Ok(Integrator::new(Tolerances { abs: tol, rel: tol }))
}

/// Uses the given seed, or picks one and reports it so the run can be repeated.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed = {s}");
        s
    })
}

fn csv_bytes(tr: &Trajectory, names: [&str; 2]) -> Vec<u8> {
    let mut buf = Vec::new();
    tr.write_csv(&mut buf, names)
        .expect("writing to a Vec cannot fail");
    buf
}

/// Writes the trajectory, or the partial one carried by an abort, and maps the outcome.
fn finish(
    result: Result<Trajectory, (Failure, Option<Trajectory>)>,
    out: &Path,
    names: [&str; 2],
) -> Result<(), Failure> {
    match result {
        Ok(tr) => write_atomic(out, &csv_bytes(&tr, names)).map_err(|e| io_failure(out, e)),
        Err((failure, partial)) => {
            if let Some(tr) = partial {
                write_atomic(out, &csv_bytes(&tr, names)).map_err(|e| io_failure(out, e))?;
                eprintln!(
                    "partial trajectory with {} samples written to {}",
                    tr.len(),
                    out.display()
                );
            }
            Err(failure)
        }
    }
}

fn from_dynamics(e: DynamicsError) -> (Failure, Option<Trajectory>) {
    let failure = dynamics_failure(&e);
    (failure, e.partial_trajectory().cloned())
}

pub fn evolve(args: &EvolveArgs) -> Result<(), Failure> {
    let a = field(&args.field);
    a.validate().map_err(usage)?;
    let p0 = ActionAnglePoint::new(args.i0, args.phi0).map_err(usage)?;
    let integ = integrator(&args.time, Tolerances::default().abs)?;
    let (dt, tf) = (args.time.dt, args.time.t_final);
    let result = match args.mode {
        Mode::Classical => evolve_classical_with(&p0, &a, dt, tf, &integ).map_err(from_dynamics),
        Mode::Dissipative => {
            let d = DissipationParams {
                gamma: args.gamma,
                friction_factor: args.friction_factor,
                noise_sigma: args.noise_sigma,
                noise_tau: args.noise_tau,
                seed: if args.noise_sigma > 0.0 {
                    resolve_seed(args.seed)
                } else {
                    args.seed.unwrap_or(0)
                },
            };
            d.validate().map_err(usage)?;
            evolve_dissipative_with(&p0, &a, &d, dt, tf, &integ).map_err(from_dynamics)
        }
        Mode::Quantum => {
            let conv =
                audit::calibrate_convention().map_err(|e| Failure::Runtime(e.to_string()))?;
            let conv = conv.pinned;
            let q0 = from_action_angle(&ActionAnglePoint {
                action: p0.action,
                angle: conv.classical_angle(p0.angle),
            })
            .map_err(usage)?;
            eprintln!(
                "convention: classical time = {} x quantum time, Phi = {:+} (phi1 - phi2)",
                conv.time_factor, conv.sign
            );
            quantum_trajectory(&q0, &a, dt / conv.time_factor, tf / conv.time_factor)
                .map(|mut tr| {
                    let s = f64::from(conv.sign);
                    for t in &mut tr.times {
                        *t *= conv.time_factor;
                    }
                    for p in &mut tr.positions {
                        p[1] *= s;
                    }
                    if let Some(v) = &mut tr.velocities {
                        for v in v {
                            v[0] /= conv.time_factor;
                            v[1] *= s / conv.time_factor;
                        }
                    }
                    tr
                })
                .map_err(from_dynamics)
        }
    };
    finish(result, &args.out, ["I", "Phi"])
}

pub fn geodesic(args: &GeodesicArgs) -> Result<(), Failure> {
    let spherical = args.connection == ConnectionName::CotTheta;
    let x1 = args.theta0.or(args.i0).unwrap_or(if spherical {
        std::f64::consts::FRAC_PI_2
    } else {
        0.0
    });
    let position = [x1, args.phi0];
    let velocity = if args.from_dynamics {
        if args.v.is_some() {
            return Err(usage("--from-dynamics and --v are mutually exclusive"));
        }
        let a = field(&args.field);
        a.validate().map_err(usage)?;
        if args.connection == ConnectionName::Eq5 && a.az != 0.0 {
            return Err(usage(format!(
                "the eq5 connection describes the flow only for az = 0 (got az = {})",
                a.az
            )));
        }
        let p = ActionAnglePoint::new(position[0], position[1]).map_err(usage)?;
        hamilton_rhs(&p, &a).map_err(|e| dynamics_failure(&e))?
    } else {
        match args.v.as_deref() {
            Some([v1, v2]) => [*v1, *v2],
            _ => {
                return Err(usage(
                    "give the initial velocity with --v V1 V2 or use --from-dynamics",
                ))
            }
        }
    };
    let connection: Box<dyn ConnectionField> = match args.connection {
        ConnectionName::Flat => Box::new(ZeroConnection),
        ConnectionName::Eq5 => Box::new(ActionAngleConnection),
        ConnectionName::CotTheta => Box::new(CotThetaConnection),
        ConnectionName::LorentzMz => Box::new(LeviCivita(MetricComponents::lorentz_mz())),
    };
    let default_tol = if args.connection == ConnectionName::Eq5 {
        ACTION_ANGLE_GEODESIC_TOLERANCE
    } else {
        Tolerances::default().abs
    };
    let integ = integrator(&args.time, default_tol)?;
    let result = geodesic_integrate_with(
        connection.as_ref(),
        GeodesicState::new(position, velocity),
        args.time.dt,
        args.time.t_final,
        &integ,
    )
    .map_err(|e| match e {
        GeometryError::Singularity { partial, .. } => (
            Failure::Runtime("geodesic aborted near a connection pole".into()),
            Some(*partial),
        ),
        GeometryError::InvalidParams(_)
        | GeometryError::Domain { .. }
        | GeometryError::ComplexConnection { .. } => (usage(e), None),
        other => (Failure::Runtime(other.to_string()), None),
    });
    let names = if spherical {
        ["theta", "Phi"]
    } else {
        ["I", "Phi"]
    };
    finish(result, &args.out, names)
}

pub fn audit(args: &AuditArgs) -> Result<(), Failure> {
    let mut cfg = AuditConfig {
        seed: resolve_seed(args.seed),
        checks: args.checks.clone(),
        ..Default::default()
    };
    if !args.gammas.is_empty() {
        cfg.gammas = args.gammas.clone();
    }
    if let Some(n) = args.obstruction_samples {
        cfg.obstruction_samples = n;
    }
    let report = audit::run_full_audit(&cfg).map_err(|e| match e {
        AuditError::UnknownCheck(_) | AuditError::InvalidConfig(_) => {
            usage(format!("{e} (groups: {})", audit::CHECK_GROUPS.join(", ")))
        }
        other => Failure::Runtime(other.to_string()),
    })?;
    write_atomic(&args.out, &report.to_json()).map_err(|e| io_failure(&args.out, e))?;
    let passed = report
        .results
        .iter()
        .filter(|r| r.verdict == Verdict::Pass)
        .count();
    let info = report
        .results
        .iter()
        .filter(|r| r.verdict == Verdict::Informational)
        .count();
    let failed: Vec<&str> = report.failures().map(|r| r.check_id.as_str()).collect();
    eprintln!(
        "{} checks: {passed} passed, {} failed, {info} informational",
        report.results.len(),
        failed.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

struct Cell {
    index: usize,
    gamma: f64,
    sigma: f64,
    az: f64,
    seed: u64,
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let p0 = ActionAnglePoint::new(args.i0, args.phi0).map_err(usage)?;
    let integ = integrator(&args.time, Tolerances::default().abs)?;
    let base_seed = resolve_seed(args.seed);
    let mut cells = Vec::new();
    for &gamma in &args.gammas {
        for &sigma in &args.sigmas {
            for &az in &args.azs {
                let index = cells.len();
                cells.push(Cell {
                    index,
                    gamma,
                    sigma,
                    az,
                    seed: base_seed.wrapping_add(index as u64),
                });
            }
        }
    }
    for c in &cells {
        let a = FieldParams::new(args.ax, args.ay, c.az);
        a.validate().map_err(usage)?;
        DissipationParams {
            gamma: c.gamma,
            friction_factor: args.friction_factor,
            noise_sigma: c.sigma,
            noise_tau: args.noise_tau,
            seed: c.seed,
        }
        .validate()
        .map_err(usage)?;
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|e| io_failure(&args.out_dir, e))?;

    let runs = parallel::map(&cells, |c| {
        let a = FieldParams::new(args.ax, args.ay, c.az);
        let d = DissipationParams {
            gamma: c.gamma,
            friction_factor: args.friction_factor,
            noise_sigma: c.sigma,
            noise_tau: args.noise_tau,
            seed: c.seed,
        };
        evolve_dissipative_with(&p0, &a, &d, args.time.dt, args.time.t_final, &integ)
    });

    let mut index = String::from("cell,gamma,noise_sigma,az,seed,status,samples,file\n");
    let mut aborted = 0;
    for (c, run) in cells.iter().zip(runs) {
        let file = format!("cell_{:04}.csv", c.index);
        let path = args.out_dir.join(&file);
        let (status, tr) = match run {
            Ok(tr) => ("ok", Some(tr)),
            Err(e) => {
                aborted += 1;
                eprintln!("cell {}: {e}", c.index);
                ("aborted", e.partial_trajectory().cloned())
            }
        };
        let samples = tr.as_ref().map_or(0, |t| t.len());
        if let Some(tr) = tr {
            write_atomic(&path, &csv_bytes(&tr, ["I", "Phi"])).map_err(|e| io_failure(&path, e))?;
        }
        writeln!(
            index,
            "{},{:?},{:?},{:?},{},{status},{samples},{file}",
            c.index, c.gamma, c.sigma, c.az, c.seed
        )
        .expect("writing to a String cannot fail");
    }
    let index_path = args.out_dir.join("index.csv");
    write_atomic(&index_path, index.as_bytes()).map_err(|e| io_failure(&index_path, e))?;
    eprintln!(
        "{} cells written to {}",
        cells.len(),
        args.out_dir.display()
    );
    if aborted > 0 {
        Err(Failure::Runtime(format!(
            "{aborted} of {} cells aborted",
            cells.len()
        )))
    } else {
        Ok(())
    }
}
