//! INI-style problem files.
//!
//! ```text
//! [problem]
//! a = 0
//! b = 1
//! n = 1
//! lagrangian = pow(xdd1,2)
//! x_a = 0
//! x_b = 1
//! xd_a = 0
//! xd_b = 0
//! ```
//!
//! `[solver]`, `[domain]` and `[lavrentiev]` are optional. Vectors are
//! comma-separated. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use varcheck_core::regularity::{GridCounts, Range, SampleDomain};
use varcheck_core::trajectory::{Endpoint, Grading, PowerLaw};
use varcheck_core::{BoundaryData, LagrangianExpr, Problem, SolveOptions};

use crate::error::CliError;

const SECTIONS: [(&str, &[&str]); 4] = [
    ("problem", &["a", "b", "n", "lagrangian", "x_a", "x_b", "xd_a", "xd_b"]),
    ("solver", &["mesh", "refinements", "grad_tol", "max_iters", "quad_order", "grading"]),
    (
        "domain",
        &["t", "x", "xd", "xdd", "counts", "random", "seed", "b_min", "beta", "mu", "radii"],
    ),
    ("lavrentiev", &["caps", "penalty_mu", "penalty_growth", "seed_power_law"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub mesh: usize,
    pub refinements: usize,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub quad_order: usize,
    pub grading: Grading,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverSection {
            mesh: d.initial_mesh,
            refinements: d.refinements,
            grad_tol: d.grad_tol,
            max_iters: d.max_iters,
            quad_order: d.quad_order,
            grading: d.grading,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSection {
    pub sample: SampleDomain,
    pub b_min: f64,
    pub beta: f64,
    pub mu: f64,
    pub radii: Vec<f64>,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            sample: SampleDomain::default(),
            b_min: 1e-6,
            beta: 1.0,
            mu: 0.0,
            radii: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LavrentievSection {
    pub caps: Vec<f64>,
    pub penalty_mu: f64,
    pub penalty_growth: f64,
    /// `coeff, exponent` of a power law `coeff (t - a)^exponent` used as a
    /// singular warm start.
    pub seed_power_law: Option<(f64, f64)>,
}

impl Default for LavrentievSection {
    fn default() -> Self {
        LavrentievSection {
            caps: vec![5.0, 10.0, 20.0],
            penalty_mu: varcheck_core::lavrentiev::DEFAULT_PENALTY_MU,
            penalty_growth: varcheck_core::lavrentiev::DEFAULT_PENALTY_GROWTH,
            seed_power_law: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: Problem,
    pub solver: SolverSection,
    pub domain: DomainSection,
    pub lavrentiev: LavrentievSection,
}

struct Entry {
    value: String,
    line: usize,
}

/// Raw `key = value` entries of one file, with line numbers for errors.
struct Raw {
    file: String,
    sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
    last_line: usize,
}

impl Raw {
    fn error(&self, line: usize, key: &str, message: impl Into<String>) -> CliError {
        CliError::Parse {
            file: self.file.clone(),
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn parse(file: &str, text: &str) -> Result<Raw, CliError> {
        let mut raw = Raw {
            file: file.to_string(),
            sections: BTreeMap::new(),
            last_line: text.lines().count(),
        };
        let mut current: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(raw.error(no, name, "unknown section"));
                }
                if raw.sections.contains_key(name) {
                    return Err(raw.error(no, name, "duplicate section"));
                }
                raw.sections.insert(name.to_string(), (no, BTreeMap::new()));
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(raw.error(no, line, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(section) = current.as_deref() else {
                return Err(raw.error(no, key, "key outside of any section"));
            };
            let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map_or(&[][..], |(_, k)| k);
            if !allowed.contains(&key) {
                return Err(raw.error(no, key, format!("unknown key in [{section}]")));
            }
            if value.is_empty() {
                return Err(raw.error(no, key, "missing value"));
            }
            let entries = &mut raw.sections.get_mut(section).expect("section exists").1;
            if entries.contains_key(key) {
                return Err(raw.error(no, key, "duplicate key"));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: no,
                },
            );
        }
        Ok(raw)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|(_, e)| e.get(key))
    }

    fn required(&self, section: &str, key: &str) -> Result<&Entry, CliError> {
        self.get(section, key).ok_or_else(|| {
            let line = self.sections.get(section).map_or(self.last_line, |(l, _)| *l);
            self.error(line, key, format!("missing required key in [{section}]"))
        })
    }

    fn typed<T>(&self, section: &str, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| self.error(e.line, key, format!("invalid value `{}`", e.value))),
        }
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.typed(section, key, |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<usize>, CliError> {
        self.typed(section, key, |v| v.parse::<usize>().ok())
    }

    fn floats(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.typed(section, key, parse_floats)
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(self.last_line, |e| e.line)
    }
}

fn parse_floats(v: &str) -> Option<Vec<f64>> {
    v.split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect()
}

fn parse_grading(v: &str) -> Option<Grading> {
    if v == "uniform" {
        return Some(Grading::Uniform);
    }
    let mut parts = v.split(':');
    if parts.next()? != "geometric" {
        return None;
    }
    let ratio: f64 = parts.next()?.parse().ok().filter(|r: &f64| *r > 0.0 && r.is_finite())?;
    let toward = match parts.next()? {
        "start" => Endpoint::Start,
        "end" => Endpoint::End,
        _ => return None,
    };
    parts.next().is_none().then_some(Grading::Geometric { ratio, toward })
}

fn grading_text(g: &Grading) -> String {
    match g {
        Grading::Uniform => "uniform".into(),
        Grading::Geometric { ratio, toward } => {
            let end = match toward {
                Endpoint::Start => "start",
                Endpoint::End => "end",
            };
            format!("geometric:{ratio}:{end}")
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

impl ProblemFile {
    /// Parse `text`; `file` only labels error messages.
    pub fn parse(file: &str, text: &str) -> Result<Self, CliError> {
        let raw = Raw::parse(file, text)?;
        let n_entry = raw.required("problem", "n")?;
        let n = raw.count("problem", "n")?.expect("present");
        if n == 0 {
            return Err(raw.error(n_entry.line, "n", "dimension must be positive"));
        }
        let lag = raw.required("problem", "lagrangian")?;
        let lagrangian = LagrangianExpr::parse(&lag.value, n)
            .map_err(|e| raw.error(lag.line, "lagrangian", e.to_string()))?;
        let mut scalars = [0.0; 2];
        for (slot, key) in scalars.iter_mut().zip(["a", "b"]) {
            raw.required("problem", key)?;
            *slot = raw.float("problem", key)?.expect("present");
        }
        let mut vectors: [Vec<f64>; 4] = Default::default();
        for (slot, key) in vectors.iter_mut().zip(["x_a", "x_b", "xd_a", "xd_b"]) {
            let e = raw.required("problem", key)?;
            let v = raw.floats("problem", key)?.expect("present");
            if v.len() != n {
                return Err(raw.error(e.line, key, format!("expected {n} components, got {}", v.len())));
            }
            *slot = v;
        }
        let [x_a, x_b, xd_a, xd_b] = vectors;
        let problem = Problem::new(scalars[0], scalars[1], lagrangian, BoundaryData { x_a, x_b, xd_a, xd_b })
            .map_err(|e| raw.error(raw.line_of("problem", "b"), "b", e.to_string()))?;

        let mut solver = SolverSection::default();
        if let Some(v) = raw.count("solver", "mesh")? {
            solver.mesh = v;
        }
        if let Some(v) = raw.count("solver", "refinements")? {
            solver.refinements = v;
        }
        if let Some(v) = raw.float("solver", "grad_tol")? {
            solver.grad_tol = v;
        }
        if let Some(v) = raw.count("solver", "max_iters")? {
            solver.max_iters = v;
        }
        if let Some(v) = raw.count("solver", "quad_order")? {
            solver.quad_order = v;
        }
        if let Some(v) = raw.typed("solver", "grading", parse_grading)? {
            solver.grading = v;
        }

        let mut domain = DomainSection::default();
        {
            let s = &mut domain.sample;
            for (key, slot) in [("t", &mut s.t), ("x", &mut s.x), ("xd", &mut s.xd), ("xdd", &mut s.xdd)] {
                if let Some(v) = raw.floats("domain", key)? {
                    if v.len() != 2 {
                        return Err(raw.error(raw.line_of("domain", key), key, "expected `lo, hi`"));
                    }
                    *slot = Range::new(v[0], v[1]);
                }
            }
            if let Some(v) = raw.typed("domain", "counts", |v| {
                v.split(',').map(|p| p.trim().parse::<usize>().ok()).collect::<Option<Vec<_>>>()
            })? {
                if v.len() != 4 {
                    return Err(raw.error(raw.line_of("domain", "counts"), "counts", "expected `t, x, xd, xdd`"));
                }
                s.grid_counts = GridCounts {
                    t: v[0],
                    x: v[1],
                    xd: v[2],
                    xdd: v[3],
                };
            }
            if let Some(v) = raw.count("domain", "random")? {
                s.random_count = v;
            }
            if let Some(v) = raw.typed("domain", "seed", |v| v.parse::<u64>().ok())? {
                s.rng_seed = v;
            }
            s.validate()
                .map_err(|e| raw.error(raw.sections.get("domain").map_or(0, |(l, _)| *l), "domain", e.to_string()))?;
        }
        if let Some(v) = raw.float("domain", "b_min")? {
            domain.b_min = v;
        }
        if let Some(v) = raw.float("domain", "beta")? {
            domain.beta = v;
        }
        if let Some(v) = raw.float("domain", "mu")? {
            domain.mu = v;
        }
        if let Some(v) = raw.floats("domain", "radii")? {
            domain.radii = v;
        }

        let mut lav = LavrentievSection::default();
        if let Some(v) = raw.floats("lavrentiev", "caps")? {
            lav.caps = v;
        }
        if let Some(v) = raw.float("lavrentiev", "penalty_mu")? {
            lav.penalty_mu = v;
        }
        if let Some(v) = raw.float("lavrentiev", "penalty_growth")? {
            lav.penalty_growth = v;
        }
        if let Some(v) = raw.floats("lavrentiev", "seed_power_law")? {
            if v.len() != 2 || n != 1 {
                return Err(raw.error(
                    raw.line_of("lavrentiev", "seed_power_law"),
                    "seed_power_law",
                    "expected `coeff, exponent` for a scalar problem",
                ));
            }
            lav.seed_power_law = Some((v[0], v[1]));
        }

        Ok(ProblemFile {
            problem,
            solver,
            domain,
            lavrentiev: lav,
        })
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            grad_tol: s.grad_tol,
            max_iters: s.max_iters,
            quad_order: s.quad_order,
            refinements: s.refinements,
            initial_mesh: s.mesh,
            grading: s.grading,
            ..SolveOptions::default()
        }
    }

    pub fn seed_law(&self) -> Option<PowerLaw> {
        self.lavrentiev.seed_power_law.map(|(coeff, exponent)| PowerLaw {
            coeff,
            exponent,
            origin: self.problem.a(),
            end: self.problem.b(),
        })
    }

    /// Canonical file text; parses back to an equal `ProblemFile`.
    pub fn to_ini(&self) -> String {
        let p = &self.problem;
        let bc = p.bc();
        let s = &self.solver;
        let d = &self.domain;
        let ds = &d.sample;
        let l = &self.lavrentiev;
        let mut out = String::new();
        let _ = writeln!(out, "[problem]");
        let _ = writeln!(out, "a = {}", p.a());
        let _ = writeln!(out, "b = {}", p.b());
        let _ = writeln!(out, "n = {}", p.n());
        let _ = writeln!(out, "lagrangian = {}", p.lagrangian().canonical());
        let _ = writeln!(out, "x_a = {}", join(&bc.x_a));
        let _ = writeln!(out, "x_b = {}", join(&bc.x_b));
        let _ = writeln!(out, "xd_a = {}", join(&bc.xd_a));
        let _ = writeln!(out, "xd_b = {}", join(&bc.xd_b));
        let _ = writeln!(out, "\n[solver]");
        let _ = writeln!(out, "mesh = {}", s.mesh);
        let _ = writeln!(out, "refinements = {}", s.refinements);
        let _ = writeln!(out, "grad_tol = {:e}", s.grad_tol);
        let _ = writeln!(out, "max_iters = {}", s.max_iters);
        let _ = writeln!(out, "quad_order = {}", s.quad_order);
        let _ = writeln!(out, "grading = {}", grading_text(&s.grading));
        let _ = writeln!(out, "\n[domain]");
        for (key, r) in [("t", ds.t), ("x", ds.x), ("xd", ds.xd), ("xdd", ds.xdd)] {
            let _ = writeln!(out, "{key} = {}, {}", r.lo, r.hi);
        }
        let g = &ds.grid_counts;
        let _ = writeln!(out, "counts = {}, {}, {}, {}", g.t, g.x, g.xd, g.xdd);
        let _ = writeln!(out, "random = {}", ds.random_count);
        let _ = writeln!(out, "seed = {}", ds.rng_seed);
        let _ = writeln!(out, "b_min = {:e}", d.b_min);
        let _ = writeln!(out, "beta = {}", d.beta);
        let _ = writeln!(out, "mu = {}", d.mu);
        let _ = writeln!(out, "radii = {}", join(&d.radii));
        let _ = writeln!(out, "\n[lavrentiev]");
        let _ = writeln!(out, "caps = {}", join(&l.caps));
        let _ = writeln!(out, "penalty_mu = {}", l.penalty_mu);
        let _ = writeln!(out, "penalty_growth = {}", l.penalty_growth);
        if let Some((c, e)) = l.seed_power_law {
            let _ = writeln!(out, "seed_power_law = {c}, {e}");
        }
        out
    }
}
