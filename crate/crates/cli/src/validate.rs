//! Invariant suites behind `chernoff validate`.

use std::f64::consts::PI;
use std::path::Path;

use chernoff_core::chernoff::step_mass;
use chernoff_core::feynman::sample_chain;
use chernoff_core::fractional::{caputo, inverse_subordinator_tail, sample_stable, DensityBudget, TimeSeries};
use chernoff_core::model::catalog;
use chernoff_core::oracles::subordinated_oracle;
use chernoff_core::rng::substream;
use chernoff_core::{
    apply_step, chernoff_iterate, ChernoffStep, CoefficientSet, Domain, InitialCondition, QuadratureSpec,
    SubordinationMeasure,
};
use rand::Rng;
use serde::Serialize;

use crate::{write_file, CliError};

pub const SUITES: [&str; 4] = ["kernels", "killed", "fractional", "all"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    fn push_result(&mut self, name: impl Into<String>, r: Result<(bool, String), String>) {
        match r {
            Ok((pass, detail)) => self.push(name, pass, detail),
            Err(e) => self.push(name, false, e),
        }
    }
}

/// Runs `suite` over the shipped catalog plus `extra` coefficient sets.
pub fn run_suite(suite: &str, extra: &[CoefficientSet]) -> Result<ValidationReport, CliError> {
    if !SUITES.contains(&suite) {
        return Err(CliError::config(format!(
            "--suite: unknown suite {suite:?} (expected kernels, killed, fractional or all)"
        )));
    }
    let mut checks = Checks(Vec::new());
    if suite == "kernels" || suite == "all" {
        let mut sets = catalog::shipped();
        sets.extend(extra.iter().cloned());
        for c in &sets {
            kernel_checks(c, &mut checks);
        }
    }
    if suite == "killed" || suite == "all" {
        killed_checks(&mut checks);
    }
    if suite == "fractional" || suite == "all" {
        fractional_checks(&mut checks);
    }
    let pass = checks.0.iter().all(|c| c.pass);
    Ok(ValidationReport {
        suite: suite.into(),
        pass,
        checks: checks.0,
    })
}

/// [`run_suite`], writing `validate_<suite>.json` under `out_dir`.
pub fn cmd_validate(suite: &str, extra: &[CoefficientSet], out_dir: &Path) -> Result<ValidationReport, CliError> {
    let report = run_suite(suite, extra)?;
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    write_file(&out_dir.join(format!("validate_{suite}.json")), &s)?;
    Ok(report)
}

fn kernel_checks(c: &CoefficientSet, checks: &mut Checks) {
    let name = c.name().to_string();
    let d = c.dim();
    match c.check_invariants(2000, 5.0, 0xC0EF) {
        Ok(r) => checks.push(
            format!("{name}/d{d}: coefficient invariants"),
            true,
            format!("z.Az/|z|^2 in [{:.4}, {:.4}], min C = {:.4}", r.min_ratio, r.max_ratio, r.min_killing),
        ),
        Err(e) => {
            checks.push(format!("{name}/d{d}: coefficient invariants"), false, e.to_string());
            return;
        }
    }
    let step = ChernoffStep::whole_space(c.clone());
    let quad = QuadratureSpec {
        nodes: if d == 1 { 129 } else { 49 },
        ..QuadratureSpec::default()
    };
    let probes = if d == 1 { 200 } else { 40 };
    let mut rng = substream(0xC0E0, &[d as u64, name.len() as u64]);
    let r = (|| -> Result<(bool, String), String> {
        let (mut worst_ratio, mut worst_neg, mut worst_mass) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..probes {
            let t = rng.random_range(0.01..1.0);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let width = rng.random_range(0.3..2.0);
            let amp = rng.random_range(0.1..3.0);
            let f0 = |y: &[f64]| {
                let r2: f64 = y.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                amp * (-r2 / (2.0 * width * width)).exp()
            };
            let v = apply_step(&step, t, &f0, &x, &quad).map_err(|e| e.to_string())?;
            worst_ratio = worst_ratio.max(v.abs() / amp);
            worst_neg = worst_neg.min(v);
            let mass = step_mass(&step, t, &x, &quad).map_err(|e| e.to_string())?;
            let expected = (-t * c.killing_at(&x)).exp();
            worst_mass = worst_mass.max((mass - expected).abs());
        }
        let pass = worst_ratio <= 1.0 + 1e-9 && worst_neg >= -1e-12 && worst_mass <= 1e-8;
        Ok((
            pass,
            format!(
                "{probes} probes: max |F f|/sup f = {worst_ratio:.6}, min F f = {worst_neg:.2e}, \
                 max |F 1 - exp(-tC)| = {worst_mass:.2e}"
            ),
        ))
    })();
    checks.push_result(format!("{name}/d{d}: contraction, positivity, mass"), r);
}

fn killed_checks(checks: &mut Checks) {
    let g = Domain::interval(0.0, PI).expect("valid interval");
    let heat = catalog::heat(1, 1.0).expect("valid coefficients");
    let quad = QuadratureSpec::default();
    let t = 0.5;
    let grid = [PI / 4.0, PI / 2.0];
    let exact: Vec<f64> = grid.iter().map(|x| (-t as f64).exp() * x.sin()).collect();
    let sup_err = |step: &ChernoffStep, n: usize| -> Result<f64, String> {
        let f = chernoff_iterate(step, n, t, &InitialCondition::sine(), &grid, &quad).map_err(|e| e.to_string())?;
        Ok(f.values.iter().zip(&exact).map(|(v, e)| (v - e).abs()).fold(0.0, f64::max))
    };
    let hard = ChernoffStep::hard_kill(heat.clone(), g.clone()).expect("valid step");
    let soft = ChernoffStep::soft_cutoff(heat.clone(), g.clone()).expect("valid step");

    let r = (|| {
        let errs = [16, 64, 256].map(|n| sup_err(&hard, n));
        let errs = errs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let pass = errs.windows(2).all(|w| w[1] < w[0]) && errs[2] < 0.02;
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
        Ok((pass, format!("hard-kill sup errors at n = 16, 64, 256: {}", shown.join(", "))))
    })();
    checks.push_result("killed: Dirichlet heat converges", r);

    let r = (|| {
        let s = chernoff_iterate(&soft, 128, t, &InitialCondition::sine(), &grid, &quad).map_err(|e| e.to_string())?;
        let h = chernoff_iterate(&hard, 128, t, &InitialCondition::sine(), &grid, &quad).map_err(|e| e.to_string())?;
        let gap = s.values.iter().zip(&h.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((gap < 2e-3, format!("max |soft - hard| at n = 128: {gap:.3e}")))
    })();
    checks.push_result("killed: soft cutoff matches hard kill", r);

    let r = (|| {
        let mut rng = substream(0x6111, &[]);
        let (mut min_w, mut max_w, mut outside) = (f64::INFINITY, 0.0f64, 0usize);
        for i in 0..2000 {
            let x0 = [PI * (i as f64 + 0.5) / 2000.0];
            let c = sample_chain(&hard, 32, t, &x0, &mut rng).map_err(|e| e.to_string())?;
            min_w = min_w.min(c.weight);
            max_w = max_w.max(c.weight);
            if c.alive && !g.contains(c.end()) {
                outside += 1;
            }
        }
        let pass = min_w >= 0.0 && max_w <= 1.0 && outside == 0;
        Ok((pass, format!("weights in [{min_w}, {max_w}], {outside} live chains outside G")))
    })();
    checks.push_result("killed: chain weights are sub-probabilities", r);
}

fn fractional_checks(checks: &mut Checks) {
    let half = SubordinationMeasure::dirac(0.5).expect("valid measure");

    let r = subordinated_oracle(&|_| 1.0, &half, 1.0, 1e-12)
        .map(|m| ((m - 1.0).abs() <= 1e-10, format!("mass {m:.15}")))
        .map_err(|e| e.to_string());
    checks.push_result("fractional: inverse-subordinator density integrates to 1", r);

    let budget = DensityBudget::default();
    let ts: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
    let tails: Vec<f64> = ts.iter().map(|&t| inverse_subordinator_tail(&half, t, 1.0, &budget).0).collect();
    checks.push(
        "fractional: tail P(E_t > tau) nondecreasing in t",
        tails.windows(2).all(|w| w[1] >= w[0]),
        format!("tau = 1, t = 0.2..2: {tails:.4?}"),
    );

    let r = TimeSeries::from_fn(1.0, 2000, |t| t)
        .and_then(|u| caputo(&u, 0.5))
        .map(|d| {
            let v = d.last();
            let e = 2.0 / PI.sqrt();
            ((v - e).abs() < 2e-3, format!("D^1/2 t at t = 1: {v:.6} vs {e:.6}"))
        })
        .map_err(|e| e.to_string());
    checks.push_result("fractional: Caputo derivative of t", r);

    let mut rng = substream(0x57AB, &[]);
    let draws = 20_000;
    let mut worst = 0.0f64;
    for beta in [0.3, 0.5, 0.8] {
        for s in [0.5, 1.0, 2.0] {
            let v: Vec<f64> = (0..draws).map(|_| (-s * sample_stable(beta, &mut rng)).exp()).collect();
            let mean = v.iter().sum::<f64>() / draws as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let z = (mean - (-f64::powf(s, beta)).exp()).abs() / (var / draws as f64).sqrt();
            worst = worst.max(z);
        }
    }
    checks.push(
        "fractional: stable Laplace transform",
        worst <= 4.0,
        format!("max |z| over 9 (s, beta) pairs: {worst:.2}"),
    );
}
