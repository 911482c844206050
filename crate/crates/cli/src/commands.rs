//! Command dispatch. Each command writes its artifacts and a summary into
//! the output directory, also on failure once the directory exists.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use varcheck_core::conditions::classical_residuals;
use varcheck_core::lavrentiev::{cap_sweep, singular_seed, GapReport, SEED_RATIO};
use varcheck_core::regularity::{
    autonomy_on, coercivity_on, convexity_on, quadratic_coercivity_on, sarychev_torres_on, superlinearity_on,
    tonelli_morrey_on, Certificate, Kind, RegularityError, SampleSet,
};
use varcheck_core::solver::solve_refined;
use varcheck_core::trajectory::{graded_mesh, Endpoint};
use varcheck_core::{dbr_profile, el_profile, ArcLengthChart, ConditionProfile, SolveOptions, Trajectory};

use crate::artifacts::{Artifacts, Summary};
use crate::error::CliError;
use crate::problem_file::ProblemFile;

pub const PROBLEM_ECHO: &str = "problem.ini";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    CheckConditions,
    CheckRegularity,
    ProbeLavrentiev,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::CheckConditions => "check-conditions",
            Command::CheckRegularity => "check-regularity",
            Command::ProbeLavrentiev => "probe-lavrentiev",
        }
    }
}

/// Problem text plus the label recorded in the summary.
#[derive(Debug, Clone)]
pub struct Input {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Flags {
    pub out: PathBuf,
    pub mesh: Option<usize>,
    pub refinements: Option<usize>,
    pub grad_tol: Option<f64>,
    pub seed: Option<u64>,
    pub grid: usize,
    pub cap: Option<f64>,
    pub trajectory: Option<PathBuf>,
}

impl Flags {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Flags {
            out: out.into(),
            mesh: None,
            refinements: None,
            grad_tol: None,
            seed: None,
            grid: 256,
            cap: None,
            trajectory: None,
        }
    }
}

/// What a command produced: its results block and whether every solve it
/// relied on converged.
struct Done {
    results: serde_json::Value,
    converged: bool,
}

pub fn run(cmd: Command, input: &Input, flags: &Flags) -> Result<Summary, CliError> {
    let mut art = Artifacts::create(&flags.out)?;
    let outcome = prepare(input, flags).and_then(|file| {
        art.write(PROBLEM_ECHO, &file.to_ini())?;
        match cmd {
            Command::Solve => solve(&file, &mut art),
            Command::CheckConditions => check_conditions(&file, flags, &mut art),
            Command::CheckRegularity => check_regularity(&file, &mut art),
            Command::ProbeLavrentiev => probe_lavrentiev(&file, flags, &mut art),
        }
    });
    let (exit_code, status, error, results) = match outcome {
        Ok(d) if d.converged => (0, "ok", None, d.results),
        Ok(d) => (3, "not-converged", None, d.results),
        Err(e) => (e.exit_code(), "error", Some(e.to_string()), serde_json::Value::Null),
    };
    art.finish(Summary {
        command: cmd.name().to_string(),
        input: input.label.clone(),
        exit_code,
        status: status.to_string(),
        error,
        results,
        files: Default::default(),
    })
}

fn prepare(input: &Input, flags: &Flags) -> Result<ProblemFile, CliError> {
    let mut file = ProblemFile::parse(&input.label, &input.text)?;
    if let Some(v) = flags.mesh {
        file.solver.mesh = v;
    }
    if let Some(v) = flags.refinements {
        file.solver.refinements = v;
    }
    if let Some(v) = flags.grad_tol {
        file.solver.grad_tol = v;
    }
    if let Some(v) = flags.seed {
        file.domain.sample.rng_seed = v;
    }
    file.solve_options().validate()?;
    Ok(file)
}

fn solve(file: &ProblemFile, art: &mut Artifacts) -> Result<Done, CliError> {
    let rep = solve_refined(&file.problem, &file.solve_options())?;
    art.write(TRAJECTORY_CSV, &rep.trajectory.to_csv())?;
    let last = rep.final_level();
    let norms = rep.trajectory.sobolev_norms();
    art.write_json("solve_report.json", &json!({ "levels": rep.levels, "norms": norms }))?;
    Ok(Done {
        results: json!({
            "objective": last.objective,
            "intervals": last.intervals,
            "grad_norm": last.grad_norm,
            "converged": last.converged,
        }),
        converged: rep.converged(),
    })
}

#[derive(Serialize)]
struct ProfileSummary {
    file: String,
    c_hat: f64,
    deviation: f64,
    slope: f64,
    intercept: f64,
    affine_deviation: f64,
    singular_endpoint: bool,
}

fn profile_summary(file: String, p: &ConditionProfile) -> ProfileSummary {
    ProfileSummary {
        file,
        c_hat: p.c_hat,
        deviation: p.deviation,
        slope: p.slope,
        intercept: p.intercept,
        affine_deviation: p.affine_deviation,
        singular_endpoint: p.singular_endpoint,
    }
}

fn check_conditions(file: &ProblemFile, flags: &Flags, art: &mut Artifacts) -> Result<Done, CliError> {
    let p = &file.problem;
    let (traj, converged) = match &flags.trajectory {
        Some(path) => {
            let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into());
            let text = std::fs::read_to_string(path)?;
            let traj = Trajectory::from_csv(&text).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
            if traj.n() != p.n() || traj.a() != p.a() || traj.b() != p.b() {
                return Err(CliError::Usage(format!("{name}: trajectory does not match the problem's interval or dimension")));
            }
            (traj, true)
        }
        None => {
            let rep = solve_refined(p, &file.solve_options())?;
            art.write(TRAJECTORY_CSV, &rep.trajectory.to_csv())?;
            let c = rep.converged();
            (rep.trajectory, c)
        }
    };
    let chart = ArcLengthChart::with_default_samples(&traj)?;
    let dbr = dbr_profile(p, &traj, &chart, flags.grid)?;
    art.write("dbr_profile.csv", &dbr.to_csv())?;
    let mut el = Vec::with_capacity(p.n());
    for i in 1..=p.n() {
        let prof = el_profile(p, &traj, &chart, i, flags.grid)?;
        let name = format!("el_profile_{i}.csv");
        art.write(&name, &prof.to_csv())?;
        el.push(profile_summary(name, &prof));
    }
    let classical = classical_residuals(p, &traj, flags.grid)?;
    let (dbr_min, dbr_max) = classical
        .dbr_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let el_max_abs = classical
        .el_residual
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let report = json!({
        "grid": flags.grid,
        "admissible": traj.is_admissible(p),
        "length": chart.length(),
        "dbr": profile_summary("dbr_profile.csv".into(), &dbr),
        "el": el,
        "classical": {
            "samples": classical.t.len(),
            "dbr_min": dbr_min,
            "dbr_max": dbr_max,
            "el_max_abs": el_max_abs,
        },
    });
    art.write_json("conditions.json", &report)?;
    Ok(Done {
        results: json!({
            "dbr_deviation": dbr.deviation,
            "dbr_affine_deviation": dbr.affine_deviation,
            "el_deviation": el.iter().map(|e| e.deviation).collect::<Vec<_>>(),
            "el_affine_deviation": el.iter().map(|e| e.affine_deviation).collect::<Vec<_>>(),
        }),
        converged,
    })
}

#[derive(Serialize)]
struct Skipped {
    kind: Kind,
    reason: String,
}

fn check_regularity(file: &ProblemFile, art: &mut Artifacts) -> Result<Done, CliError> {
    let l = file.problem.lagrangian();
    let d = &file.domain;
    let set = SampleSet::generate(&d.sample, l.dim())?;
    type Check<'a> = Box<dyn Fn() -> Result<Certificate, RegularityError> + 'a>;
    let checks: Vec<(Kind, Check)> = vec![
        (Kind::Superlinearity, Box::new(|| superlinearity_on(l, &set, d.b_min))),
        (Kind::QuadraticCoercivity, Box::new(|| quadratic_coercivity_on(l, &set, d.b_min))),
        (Kind::Convexity, Box::new(|| convexity_on(l, &set))),
        (Kind::TonelliMorrey, Box::new(|| tonelli_morrey_on(l, &set))),
        (Kind::Autonomy, Box::new(|| autonomy_on(l, &set))),
        (Kind::SarychevTorres, Box::new(|| sarychev_torres_on(l, &set, d.beta, d.mu))),
    ];
    let mut certificates = Vec::new();
    let mut skipped = Vec::new();
    for (kind, check) in checks {
        match check() {
            Ok(c) => certificates.push(c),
            // a precondition that does not hold for this Lagrangian
            Err(
                e @ (RegularityError::NotAutonomous
                | RegularityError::InvalidParameter(_)
                | RegularityError::NegativeLagrangian { .. }),
            ) => skipped.push(Skipped {
                kind,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let table = coercivity_on(l, &set, &d.radii)?;
    let mut csv = String::from("r,theta,ratio\n");
    for ((r, t), q) in table.radii.iter().zip(&table.theta).zip(&table.ratios) {
        csv.push_str(&format!("{r:.16e},{t:.16e},{q:.16e}\n"));
    }
    art.write("coercivity.csv", &csv)?;
    let verdicts: serde_json::Map<String, serde_json::Value> = certificates
        .iter()
        .map(|c| {
            (
                serde_json::to_value(c.kind).expect("kind").as_str().expect("string").to_string(),
                serde_json::to_value(c.verdict).expect("verdict"),
            )
        })
        .collect();
    art.write_json(
        "certificates.json",
        &json!({
            "sample_count": set.points().len(),
            "pair_count": set.pairs().len(),
            "rng_seed": set.rng_seed(),
            "b_min": d.b_min,
            "beta": d.beta,
            "mu": d.mu,
            "certificates": certificates,
            "skipped": skipped,
            "coercivity": table,
        }),
    )?;
    Ok(Done {
        results: json!({ "verdicts": verdicts, "coercivity": table.verdict }),
        converged: true,
    })
}

#[derive(Serialize)]
struct SeedNorms {
    knots: usize,
    norm2_xdd_sq: f64,
    ess_sup_xdd: f64,
}

fn probe_lavrentiev(file: &ProblemFile, flags: &Flags, art: &mut Artifacts) -> Result<Done, CliError> {
    let p = &file.problem;
    let lav = &file.lavrentiev;
    let opts = SolveOptions {
        penalty_mu: lav.penalty_mu,
        penalty_growth: lav.penalty_growth,
        ..file.solve_options()
    };
    let caps = flags.cap.map_or_else(|| lav.caps.clone(), |c| vec![c]);
    let law = file.seed_law();
    let seed = law.as_ref().map(singular_seed).transpose()?;
    if let Some(s) = &seed {
        if !s.is_admissible(p) {
            return Err(CliError::Usage("seed_power_law does not satisfy the boundary data".into()));
        }
    }
    let reports: Vec<GapReport> = cap_sweep(p, &opts, &caps, seed.as_ref())?;

    // the seed family resolved on finer and finer graded meshes
    let mut seed_series = Vec::new();
    if let Some(law) = &law {
        for knots in [10, 20, 40] {
            let t = law.sample(graded_mesh(law.origin, law.end, knots - 1, SEED_RATIO, Endpoint::Start))?;
            let norms = t.sobolev_norms();
            seed_series.push(SeedNorms {
                knots,
                norm2_xdd_sq: norms.norm2_xdd * norms.norm2_xdd,
                ess_sup_xdd: norms.ess_sup_xdd,
            });
        }
    }
    // ∫ (c p (p-1) t^(p-2))² dt over [0, b-a], finite iff p > 3/2
    let closed_form = law.filter(|l| l.exponent > 1.5).map(|l| {
        let q = l.coeff * l.exponent * (l.exponent - 1.0);
        let e = 2.0 * l.exponent - 3.0;
        q * q * (l.end - l.origin).powf(e) / e
    });

    for r in &reports {
        art.write(&format!("gap_cap_{}.csv", r.cap_m), &r.to_csv())?;
    }
    art.write_json(
        "gap_report.json",
        &json!({
            "caps": caps,
            "reports": reports,
            "seed_series": seed_series,
            "seed_closed_form_norm2_xdd_sq": closed_form,
        }),
    )?;
    let converged = reports.iter().all(|r| {
        r.unconstrained_error.is_none() && r.levels.last().is_some_and(|l| l.converged_unconstrained)
    });
    let gaps: serde_json::Map<String, serde_json::Value> = reports
        .iter()
        .map(|r| (r.cap_m.to_string(), json!(r.gap_estimate)))
        .collect();
    let capped_converged = reports
        .iter()
        .all(|r| r.capped_error.is_none() && r.levels.last().is_some_and(|l| l.converged_capped));
    Ok(Done {
        results: json!({
            "gap_estimate": gaps,
            "lavrentiev_suspect": reports.iter().any(|r| r.lavrentiev_suspect),
            "capped_converged": capped_converged,
        }),
        converged,
    })
}
