use std::path::Path;
use std::time::Instant;

use chernoff_core::feynman::{feynman_estimate, MCSpec};
use chernoff_core::fractional::subordinated_with_step;
use chernoff_core::oracles::{dirichlet_exact, heat_exact_with, subordinated_oracle, EigenExpansion, GaussianData};
use chernoff_core::{
    apply_step, chernoff_iterate, Backend, ChernoffStep, DomainKind, Error, FieldMeta, InitialCondition, SolutionField,
    StepMode,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig, SolverBackend};
use crate::{write_file, CliError};

fn solve_error(e: Error) -> CliError {
    match e {
        Error::UnsupportedQuadDim { .. } => CliError::config(format!("solver.backend: {e}")),
        Error::BudgetExceeded { .. } => CliError::config(format!("solver.n / solver.quad_budget: {e}")),
        _ => CliError::numerical(e.to_string()),
    }
}

/// The Chernoff step implied by the problem and `solver.mode`.
pub fn step_for(cfg: &RunConfig) -> Result<ChernoffStep, CliError> {
    let p = &cfg.problem;
    let mode = match (cfg.solver.mode, &p.domain) {
        (None, None) => StepMode::WholeSpace,
        (None, Some(_)) => StepMode::HardKill,
        (Some(StepMode::WholeSpace), Some(_)) => {
            return Err(CliError::config("solver.mode: whole_space ignores problem.domain; remove one of them"))
        }
        (Some(m), None) if m != StepMode::WholeSpace => {
            return Err(CliError::config("solver.mode: killed modes need problem.domain"))
        }
        (Some(m), _) => m,
    };
    ChernoffStep::new(p.coeffs.clone(), p.domain.clone(), mode).map_err(|e| CliError::config(format!("solver.mode: {e}")))
}

fn mc_spec(cfg: &RunConfig) -> Result<MCSpec, CliError> {
    let seed = cfg.solver.seed.ok_or_else(|| CliError::config("solver.seed: required for the mc backend"))?;
    let mut mc = MCSpec::new(cfg.solver.samples, seed);
    mc.antithetic = cfg.solver.antithetic;
    mc.batches = cfg.solver.batches;
    mc.validate().map_err(|e| CliError::config(format!("solver.samples: {e}")))?;
    Ok(mc)
}

/// Evaluates the configured problem at `solver.n` steps.
pub fn solve_field(cfg: &RunConfig) -> Result<SolutionField, CliError> {
    solve_field_n(cfg, cfg.solver.n)
}

pub fn solve_field_n(cfg: &RunConfig, n: usize) -> Result<SolutionField, CliError> {
    let p = &cfg.problem;
    let step = step_for(cfg)?;
    let points = &cfg.output.points;
    let t = p.horizon;
    match cfg.solver.backend {
        SolverBackend::Mc => {
            let mc = mc_spec(cfg)?;
            let f0 = |x: &[f64]| p.initial_value(x);
            match &p.fractional {
                Some(mu) => subordinated_with_step(&step, mu, n, t, &f0, points, &mc, cfg.solver.tau),
                None => feynman_estimate(&step, n, t, &f0, points, &mc),
            }
            .map_err(solve_error)
        }
        SolverBackend::Quad => {
            if p.fractional.is_some() {
                return Err(CliError::config("solver.backend: quad does not cover fractional problems; use mc"));
            }
            let quad = &cfg.solver.quad;
            if p.dim() == 1 {
                let grid: Vec<f64> = points.iter().map(|x| x[0]).collect();
                return chernoff_iterate(&step, n, t, &p.initial, &grid, quad).map_err(solve_error);
            }
            if n != 1 {
                return Err(CliError::config(format!(
                    "solver.n: quadrature iterates only in one dimension; use n = 1 or the mc backend (d = {})",
                    p.dim()
                )));
            }
            let f0 = |x: &[f64]| p.initial_value(x);
            let values = points
                .iter()
                .map(|x| apply_step(&step, t, &f0, x, quad))
                .collect::<chernoff_core::Result<Vec<f64>>>()
                .map_err(solve_error)?;
            Ok(SolutionField {
                points: points.clone(),
                stderr: vec![0.0; values.len()],
                values,
                meta: FieldMeta {
                    t,
                    n,
                    samples: 0,
                    seed: None,
                    backend: Backend::Quad,
                },
            })
        }
    }
}

/// Closed-form reference at the output points, when one exists: constant
/// isotropic coefficients with Gaussian data on the whole space, with sine
/// data or any data on an interval or 2-d box (eigen expansion, `B = 0`),
/// and their `w delta_1/2` subordinations.
pub fn oracle_values(cfg: &RunConfig) -> Result<Option<Vec<f64>>, CliError> {
    let p = &cfg.problem;
    let Some((a, b, c)) = cfg.coeff_spec.isotropic_constant() else {
        return Ok(None);
    };
    type Inner = Box<dyn Fn(f64, &[f64]) -> f64>;
    let inner: Inner = match (&p.domain, &p.initial) {
        (None, InitialCondition::Gaussian { center, width, amplitude }) => {
            let g = GaussianData {
                center: center.clone(),
                width: *width,
                amplitude: *amplitude,
            };
            Box::new(move |s, x| heat_exact_with(a, Some(&b), c, s, x, &g))
        }
        (Some(g), f0) if b.iter().all(|&v| v == 0.0) => {
            let (lo, hi) = match g.kind() {
                DomainKind::Interval { lo, hi } => (vec![*lo], vec![*hi]),
                DomainKind::Box { lo, hi } if lo.len() == 2 => (lo.clone(), hi.clone()),
                _ => return Ok(None),
            };
            let modes = if lo.len() == 1 { 64 } else { 24 };
            let f0 = f0.clone();
            let exp = EigenExpansion::boxed(lo, hi, a, &|x: &[f64]| f0.eval(x), modes)
                .map_err(|e| CliError::numerical(format!("oracle: {e}")))?;
            Box::new(move |s, x| (-c * s).exp() * dirichlet_exact(&exp, s, x))
        }
        _ => return Ok(None),
    };
    let t = p.horizon;
    let values = match &p.fractional {
        None => cfg.output.points.iter().map(|x| inner(t, x)).collect(),
        Some(mu) => {
            if mu.half_weight().is_none() {
                return Ok(None);
            }
            cfg.output
                .points
                .iter()
                .map(|x| subordinated_oracle(&|s| inner(s, x), mu, t, 1e-10))
                .collect::<chernoff_core::Result<Vec<f64>>>()
                .map_err(|e| CliError::numerical(format!("oracle: {e}")))?
        }
    };
    Ok(Some(values))
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub field: SolutionField,
    pub csv: String,
    pub summary: serde_json::Value,
}

fn finite_max(v: &[f64]) -> f64 {
    v.iter().copied().filter(|e| e.is_finite()).fold(0.0, f64::max)
}

/// Solves and writes `<name>.csv` / `<name>.json` under `out_dir`.
pub fn cmd_solve(cfg: &RunConfig, out_dir: &Path, format: Format) -> Result<SolveOutcome, CliError> {
    let start = Instant::now();
    let field = solve_field(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let csv = field.to_csv();
    let summary = json!({
        "command": "solve",
        "config": cfg.raw,
        "backend": field.meta.backend,
        "seed": field.meta.seed,
        "n": field.meta.n,
        "samples": field.meta.samples,
        "t": field.meta.t,
        "wall_time_s": wall,
        "error_estimates": {
            "max_stderr": finite_max(&field.stderr),
            "stderr": field.stderr,
        },
        "points": field.points,
        "values": field.values,
    });
    let name = &cfg.output.name;
    if format.csv() {
        write_file(&out_dir.join(format!("{name}.csv")), &csv)?;
    }
    if format.json() {
        write_file(&out_dir.join(format!("{name}.json")), &pretty(&summary))?;
    }
    Ok(SolveOutcome { field, csv, summary })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub sup_error: f64,
    /// Standard error of the error at the point attaining the sup (combined
    /// with the reference's when the reference is the finest run).
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    /// `"oracle"` or `"finest_n"`.
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
    /// Every error is at most the previous one plus two combined standard
    /// errors. Reported, not enforced.
    pub nonincreasing_within_noise: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,sup_error,stderr,reference\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:?},{:?},{}\n", r.n, r.sup_error, r.stderr, self.reference));
        }
        s
    }
}

/// Sup-error over the output points for each `n`, against the closed-form
/// reference when there is one and against the largest `n` otherwise.
pub fn convergence_table(cfg: &RunConfig, n_list: &[usize]) -> Result<ConvergenceTable, CliError> {
    if n_list.len() < 2 {
        return Err(CliError::config("--n-list: need at least two values of n"));
    }
    if n_list.contains(&0) {
        return Err(CliError::config("--n-list: n must be at least 1"));
    }
    let fields = n_list
        .iter()
        .map(|&n| solve_field_n(cfg, n))
        .collect::<Result<Vec<_>, _>>()?;
    let (reference, ref_vals, ref_se) = match oracle_values(cfg)? {
        Some(v) => {
            let k = v.len();
            ("oracle", v, vec![0.0; k])
        }
        None => {
            let finest = n_list.iter().enumerate().max_by_key(|(_, n)| **n).map(|(i, _)| i).unwrap();
            let f = &fields[finest];
            ("finest_n", f.values.clone(), f.stderr.clone())
        }
    };
    let rows: Vec<ConvergenceRow> = n_list
        .iter()
        .zip(&fields)
        .map(|(&n, f)| {
            let mut best = (0.0, 0.0);
            for i in 0..f.len() {
                let e = (f.values[i] - ref_vals[i]).abs();
                if e >= best.0 {
                    let se = if f.stderr[i].is_finite() { f.stderr[i] } else { 0.0 };
                    best = (e, se.hypot(ref_se[i]));
                }
            }
            ConvergenceRow {
                n,
                sup_error: best.0,
                stderr: best.1,
            }
        })
        .collect();
    let nonincreasing_within_noise = rows
        .windows(2)
        .all(|w| w[1].sup_error <= w[0].sup_error + 2.0 * w[0].stderr.hypot(w[1].stderr));
    Ok(ConvergenceTable {
        reference: reference.into(),
        rows,
        nonincreasing_within_noise,
    })
}

/// [`convergence_table`], written as `<name>_convergence.csv` / `.json`.
pub fn cmd_convergence(
    cfg: &RunConfig,
    n_list: &[usize],
    out_dir: &Path,
    format: Format,
) -> Result<ConvergenceTable, CliError> {
    let start = Instant::now();
    let table = convergence_table(cfg, n_list)?;
    let name = &cfg.output.name;
    if format.csv() {
        write_file(&out_dir.join(format!("{name}_convergence.csv")), &table.to_csv())?;
    }
    if format.json() {
        let summary = json!({
            "command": "convergence",
            "config": cfg.raw,
            "n_list": n_list,
            "wall_time_s": start.elapsed().as_secs_f64(),
            "table": table,
        });
        write_file(&out_dir.join(format!("{name}_convergence.json")), &pretty(&summary))?;
    }
    Ok(table)
}
