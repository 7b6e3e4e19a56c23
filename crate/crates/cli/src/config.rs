//! Run configuration: flat INI sections `[problem]`, `[solver]`, `[output]`.
//!
//! ```ini
//! [problem]
//! ; heat | ou | variable_a | constant_killing | compound_poisson | constant | polynomial
//! coefficients = heat
//! dim = 1
//! a = 0.5
//! ; none | interval | box | ball
//! domain = interval
//! lo = 0
//! hi = pi
//! ; zero | constant | gaussian | sine
//! initial = sine
//! ; (beta, weight) atoms; omit for none
//! fractional = (0.5, 1.0)
//! t = 1
//!
//! [solver]
//! ; mc | quad
//! backend = mc
//! n = 64
//! samples = 100000
//! seed = 42
//!
//! [output]
//! ; ';' between points, ',' between coordinates
//! points = pi/4; pi/2
//! ; csv | json | both
//! format = both
//! ```
//!
//! Comments take whole lines; a trailing `; ...` would be read as part of
//! the value.
//!
//! Every numeric value accepts `pi` products such as `3*pi/4` or `-pi`.
//! Keys per coefficient set:
//!
//! | coefficients       | keys                                             |
//! |--------------------|--------------------------------------------------|
//! | `heat`             | `dim` (1), `a` (0.5)                             |
//! | `ou`               | `theta` (1), `a` (0.5)                           |
//! | `variable_a`       | `a0` (0.6), `a1` (0.3)                           |
//! | `constant_killing` | `dim` (1), `a` (0.5), `c` (0.3)                  |
//! | `compound_poisson` | `a` (0.5), `rate` (1), `jumps` (`(0.7, 0.5), (-0.4, 0.5)`) |
//! | `constant`         | `a` (d x d row-major), `b` (d), `c` (0)          |
//! | `polynomial`       | `a_poly`, `b_poly`, `c_poly` (ascending powers of `x`), `a_lower`, `a_upper` |
//!
//! Domains: `interval` and `box` take `lo`, `hi`; `ball` takes `center`,
//! `radius`; all take an optional `s_exponent`. Initial conditions:
//! `constant` takes `value`; `gaussian` takes `center` (origin), `width`
//! (1), `amplitude` (1); `sine` takes `modes` (all 1) and `amplitude` and
//! lives on the box domain (or `sine_lo`, `sine_hi`).
//!
//! Solver keys: `backend`, `n`, `samples`, `seed`, `antithetic`, `batches`,
//! `mode` (`auto | whole_space | soft | hard`), `quad_nodes`, `quad_window`,
//! `quad_interp`, `quad_table_nodes`, `quad_budget`, `tau`
//! (`auto | quadrature | mc`), `tau_nodes`, `tau_eps`. Output keys: `points` or `grid = lo, hi, count`
//! (one-dimensional), `dir`, `name`, `format`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use chernoff_core::fractional::TauSpec;
use chernoff_core::model::{catalog, DEFAULT_S_EXPONENT};
use chernoff_core::{
    CoefficientSet, Domain, DomainKind, InitialCondition, Problem, QuadratureSpec, StepMode, SubordinationMeasure,
};
use ini::Ini;

use crate::CliError;

/// `section -> key -> value`, exactly as read (after overrides). This is what
/// JSON summaries echo.
pub type RawConfig = BTreeMap<String, BTreeMap<String, String>>;

const SECTIONS: [&str; 3] = ["problem", "solver", "output"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "both" => Ok(Self::Both),
            _ => Err(format!("expected csv, json or both, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverBackend {
    Mc,
    Quad,
}

/// The coefficient set as named in the config, kept so that closed-form
/// references can be matched to it.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffSpec {
    Heat { dim: usize, a: f64 },
    Ou { theta: f64, a: f64 },
    VariableA { a0: f64, a1: f64 },
    ConstantKilling { dim: usize, a: f64, c: f64 },
    CompoundPoisson { a: f64, rate: f64, jumps: [(f64, f64); 2] },
    Constant { a: Vec<f64>, b: Vec<f64>, c: f64 },
    Polynomial { a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, lower: f64, upper: f64 },
}

impl CoeffSpec {
    pub fn build(&self) -> chernoff_core::Result<CoefficientSet> {
        match self {
            Self::Heat { dim, a } => catalog::heat(*dim, *a),
            Self::Ou { theta, a } => catalog::ou(*theta, *a),
            Self::VariableA { a0, a1 } => catalog::variable_a(*a0, *a1),
            Self::ConstantKilling { dim, a, c } => catalog::constant_killing(*dim, *a, *c),
            Self::CompoundPoisson { a, rate, jumps } => catalog::compound_poisson(*a, *rate, *jumps),
            Self::Constant { a, b, c } => CoefficientSet::constant(a.clone(), b.clone(), *c),
            Self::Polynomial { a, b, c, lower, upper } => {
                let (a, b, c) = (a.clone(), b.clone(), c.clone());
                Ok(CoefficientSet::new(
                    1,
                    *lower,
                    *upper,
                    move |x, out| out[0] = horner(&a, x[0]),
                    move |x, out| out[0] = horner(&b, x[0]),
                    move |x| horner(&c, x[0]),
                )?
                .with_name("polynomial"))
            }
        }
    }

    /// `(a, b, c)` when the coefficients are constant with `A = a I`.
    pub fn isotropic_constant(&self) -> Option<(f64, Vec<f64>, f64)> {
        match self {
            Self::Heat { dim, a } => Some((*a, vec![0.0; *dim], 0.0)),
            Self::ConstantKilling { dim, a, c } => Some((*a, vec![0.0; *dim], *c)),
            Self::Constant { a, b, c } => {
                let d = b.len();
                let a0 = a[0];
                let iso = (0..d).all(|i| (0..d).all(|j| a[i * d + j] == if i == j { a0 } else { 0.0 }));
                iso.then(|| (a0, b.clone(), *c))
            }
            _ => None,
        }
    }
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub backend: SolverBackend,
    pub n: usize,
    pub samples: usize,
    pub seed: Option<u64>,
    pub antithetic: bool,
    pub batches: usize,
    /// `None` picks whole space without a domain and the hard kill with one.
    pub mode: Option<StepMode>,
    pub quad: QuadratureSpec,
    pub tau: TauSpec,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub name: String,
    pub format: Format,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub coeff_spec: CoeffSpec,
    pub problem: Problem,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses INI text, or the JSON summary of an earlier run (its echoed
    /// `config` object).
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw = if text.trim_start().starts_with('{') {
            raw_from_summary(text)?
        } else {
            raw_from_ini(text)?
        };
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        for s in raw.keys() {
            if !SECTIONS.contains(&s.as_str()) {
                return Err(CliError::config(format!("unknown section [{s}]")));
            }
        }
        let empty = BTreeMap::new();
        let p = Section::new("problem", raw.get("problem").unwrap_or(&empty));
        let s = Section::new("solver", raw.get("solver").unwrap_or(&empty));
        let o = Section::new("output", raw.get("output").unwrap_or(&empty));

        let coeff_spec = parse_coeffs(&p)?;
        let coeffs = coeff_spec.build().map_err(|e| p.err("coefficients", e))?;
        let dim = coeffs.dim();
        let domain = parse_domain(&p, dim)?;
        let initial = parse_initial(&p, dim, domain.as_ref())?;
        let fractional = match p.get("fractional") {
            None | Some("none") | Some("") => None,
            Some(v) => {
                let atoms = parse_pairs(v).map_err(|e| p.err("fractional", e))?;
                Some(SubordinationMeasure::new(atoms).map_err(|e| p.err("fractional", e))?)
            }
        };
        let t = p.f64_or("t", 1.0)?;
        let problem = Problem::new(coeffs, domain, initial, fractional, t).map_err(|e| p.err("t/domain/initial", e))?;

        let solver = parse_solver(&s)?;
        let output = parse_output(&o, dim)?;
        p.reject_unknown()?;
        s.reject_unknown()?;
        o.reject_unknown()?;
        Ok(Self {
            raw,
            coeff_spec,
            problem,
            solver,
            output,
        })
    }

    /// Overrides a single raw value and re-parses.
    pub fn with_override(&self, section: &str, key: &str, value: String) -> Result<Self, CliError> {
        let mut raw = self.raw.clone();
        raw.entry(section.to_string()).or_default().insert(key.to_string(), value);
        Self::from_raw(raw)
    }
}

fn raw_from_ini(text: &str) -> Result<RawConfig, CliError> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::config(format!("config syntax: {e}")))?;
    let mut raw = RawConfig::new();
    for (sec, props) in ini.iter() {
        let Some(sec) = sec else {
            if props.iter().next().is_some() {
                return Err(CliError::config("keys before the first [section]"));
            }
            continue;
        };
        let entry = raw.entry(sec.to_string()).or_default();
        for (k, v) in props.iter() {
            entry.insert(k.to_string(), v.trim().to_string());
        }
    }
    Ok(raw)
}

fn raw_from_summary(text: &str) -> Result<RawConfig, CliError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("summary is not valid JSON: {e}")))?;
    let cfg = v
        .get("config")
        .ok_or_else(|| CliError::config("summary has no echoed \"config\" object"))?;
    serde_json::from_value(cfg.clone()).map_err(|e| CliError::config(format!("config: {e}")))
}

/// Reads keys from one section, remembering which were consumed.
struct Section<'a> {
    name: &'static str,
    map: &'a BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> Section<'a> {
    fn new(name: &'static str, map: &'a BTreeMap<String, String>) -> Self {
        Self {
            name,
            map,
            used: Default::default(),
        }
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key).map(String::as_str)
    }

    fn err(&self, key: &str, e: impl std::fmt::Display) -> CliError {
        CliError::config(format!("{}.{key}: {e}", self.name))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| eval_expr(v).map_err(|e| self.err(key, e))).transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(key).map(|v| parse_list(v).map_err(|e| self.err(key, e))).transpose()
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| self.err(key, format!("{e} (got {v:?})"))))
            .transpose()
    }

    fn reject_unknown(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.map.keys().find(|k| !used.contains(k)) {
            Some(k) => Err(self.err(k, "unknown key")),
            None => Ok(()),
        }
    }
}

/// Evaluates `[-]factor[*|/ factor]...` where a factor is a number or `pi`.
pub fn eval_expr(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty value".into());
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let f = match tok {
            "pi" | "PI" | "π" => std::f64::consts::PI,
            _ => tok.parse::<f64>().map_err(|_| format!("cannot read {s:?} as a number"))?,
        };
        if op == '*' {
            value *= f;
        } else {
            value /= f;
        }
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(sign * value)
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(eval_expr)
        .collect()
}

/// `(x, y), (x, y), ...`
fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.find('(').ok_or_else(|| format!("expected '(' in {s:?}"))?;
        let close = rest.find(')').ok_or_else(|| format!("unbalanced parentheses in {s:?}"))?;
        if close < open {
            return Err(format!("unbalanced parentheses in {s:?}"));
        }
        let v = parse_list(&rest[open + 1..close])?;
        if v.len() != 2 {
            return Err(format!("expected pairs, got ({})", &rest[open + 1..close]));
        }
        out.push((v[0], v[1]));
        rest = rest[close + 1..].trim_start().trim_start_matches([',', ';']).trim();
    }
    if out.is_empty() {
        return Err("no pairs given".into());
    }
    Ok(out)
}

fn parse_coeffs(p: &Section) -> Result<CoeffSpec, CliError> {
    let name = p.get("coefficients").unwrap_or("heat");
    let dim = p.parse::<usize>("dim")?;
    let one_d = |what: &str| -> Result<(), CliError> {
        match dim {
            None | Some(1) => Ok(()),
            Some(d) => Err(p.err("dim", format!("{what} is one-dimensional, got dim = {d}"))),
        }
    };
    let spec = match name {
        "heat" => CoeffSpec::Heat {
            dim: dim.unwrap_or(1),
            a: p.f64_or("a", 0.5)?,
        },
        "ou" => {
            one_d("ou")?;
            CoeffSpec::Ou {
                theta: p.f64_or("theta", 1.0)?,
                a: p.f64_or("a", 0.5)?,
            }
        }
        "variable_a" | "variable-a" => {
            one_d("variable_a")?;
            CoeffSpec::VariableA {
                a0: p.f64_or("a0", 0.6)?,
                a1: p.f64_or("a1", 0.3)?,
            }
        }
        "constant_killing" | "constant-killing" => CoeffSpec::ConstantKilling {
            dim: dim.unwrap_or(1),
            a: p.f64_or("a", 0.5)?,
            c: p.f64_or("c", 0.3)?,
        },
        "compound_poisson" | "compound-poisson" => {
            one_d("compound_poisson")?;
            let jumps = match p.get("jumps") {
                None => vec![(0.7, 0.5), (-0.4, 0.5)],
                Some(v) => parse_pairs(v).map_err(|e| p.err("jumps", e))?,
            };
            if jumps.len() != 2 {
                return Err(p.err("jumps", format!("expected two (jump, probability) atoms, got {}", jumps.len())));
            }
            CoeffSpec::CompoundPoisson {
                a: p.f64_or("a", 0.5)?,
                rate: p.f64_or("rate", 1.0)?,
                jumps: [jumps[0], jumps[1]],
            }
        }
        "constant" => {
            let d = dim.unwrap_or(1);
            let a = p.list("a")?.ok_or_else(|| p.err("a", "required for constant coefficients"))?;
            if a.len() != d * d {
                return Err(p.err("a", format!("expected {} entries for dim = {d}, got {}", d * d, a.len())));
            }
            let b = p.list("b")?.unwrap_or_else(|| vec![0.0; d]);
            if b.len() != d {
                return Err(p.err("b", format!("expected {d} entries, got {}", b.len())));
            }
            CoeffSpec::Constant {
                a,
                b,
                c: p.f64_or("c", 0.0)?,
            }
        }
        "polynomial" => {
            one_d("polynomial")?;
            let need = |k: &str| -> Result<f64, CliError> {
                p.f64(k)?.ok_or_else(|| p.err(k, "required for polynomial coefficients"))
            };
            CoeffSpec::Polynomial {
                a: p.list("a_poly")?.ok_or_else(|| p.err("a_poly", "required for polynomial coefficients"))?,
                b: p.list("b_poly")?.unwrap_or_default(),
                c: p.list("c_poly")?.unwrap_or_default(),
                lower: need("a_lower")?,
                upper: need("a_upper")?,
            }
        }
        other => {
            return Err(p.err(
                "coefficients",
                format!(
                    "unknown catalog entry {other:?} (expected heat, ou, variable_a, constant_killing, \
                     compound_poisson, constant or polynomial)"
                ),
            ))
        }
    };
    Ok(spec)
}

fn parse_domain(p: &Section, dim: usize) -> Result<Option<Domain>, CliError> {
    let kind = match p.get("domain").unwrap_or("none") {
        "none" => return Ok(None),
        "interval" | "box" => {
            let lo = p.list("lo")?.ok_or_else(|| p.err("lo", "required for this domain"))?;
            let hi = p.list("hi")?.ok_or_else(|| p.err("hi", "required for this domain"))?;
            if lo.len() != dim || hi.len() != dim {
                return Err(p.err("lo/hi", format!("expected {dim} coordinates each")));
            }
            if dim == 1 {
                DomainKind::Interval { lo: lo[0], hi: hi[0] }
            } else {
                DomainKind::Box { lo, hi }
            }
        }
        "ball" => {
            let center = p.list("center")?.unwrap_or_else(|| vec![0.0; dim]);
            if center.len() != dim {
                return Err(p.err("center", format!("expected {dim} coordinates")));
            }
            DomainKind::Ball {
                center,
                radius: p.f64("radius")?.ok_or_else(|| p.err("radius", "required for a ball"))?,
            }
        }
        other => return Err(p.err("domain", format!("unknown domain {other:?} (expected none, interval, box or ball)"))),
    };
    let gamma = p.f64_or("s_exponent", DEFAULT_S_EXPONENT)?;
    Domain::new(kind, gamma).map(Some).map_err(|e| p.err("domain", e))
}

fn parse_initial(p: &Section, dim: usize, domain: Option<&Domain>) -> Result<InitialCondition, CliError> {
    let amplitude = p.f64_or("amplitude", 1.0)?;
    match p.get("initial").unwrap_or("gaussian") {
        "zero" => Ok(InitialCondition::Zero),
        "constant" => Ok(InitialCondition::Constant(p.f64_or("value", 1.0)?)),
        "gaussian" => {
            let center = match p.get("initial_center") {
                Some(v) => parse_list(v).map_err(|e| p.err("initial_center", e))?,
                None => vec![0.0; dim],
            };
            if center.len() != dim {
                return Err(p.err("initial_center", format!("expected {dim} coordinates")));
            }
            let width = p.f64_or("width", 1.0)?;
            if !(width > 0.0) {
                return Err(p.err("width", "must be positive"));
            }
            Ok(InitialCondition::Gaussian {
                center,
                width,
                amplitude,
            })
        }
        "sine" => {
            let (lo, hi) = match (p.list("sine_lo")?, p.list("sine_hi")?) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => match domain.map(Domain::kind) {
                    Some(DomainKind::Interval { lo, hi }) => (vec![*lo], vec![*hi]),
                    Some(DomainKind::Box { lo, hi }) => (lo.clone(), hi.clone()),
                    _ => return Err(p.err("initial", "sine needs a box domain or sine_lo / sine_hi")),
                },
            };
            let modes = match p.get("modes") {
                Some(v) => v
                    .split(',')
                    .map(|m| m.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| p.err("modes", e))?,
                None => vec![1; dim],
            };
            if lo.len() != dim || hi.len() != dim || modes.len() != dim {
                return Err(p.err("modes", format!("expected {dim} entries")));
            }
            Ok(InitialCondition::SineMode {
                lo,
                hi,
                modes,
                amplitude,
            })
        }
        other => Err(p.err("initial", format!("unknown initial condition {other:?}"))),
    }
}

fn parse_solver(s: &Section) -> Result<SolverConfig, CliError> {
    let backend = match s.get("backend").unwrap_or("mc") {
        "mc" => SolverBackend::Mc,
        "quad" => SolverBackend::Quad,
        other => return Err(s.err("backend", format!("expected mc or quad, got {other:?}"))),
    };
    let n = s.parse::<usize>("n")?.unwrap_or(32);
    if n == 0 {
        return Err(s.err("n", "must be at least 1"));
    }
    let seed = s.parse::<u64>("seed")?;
    if backend == SolverBackend::Mc && seed.is_none() {
        return Err(s.err("seed", "required for the mc backend"));
    }
    let samples = s.parse::<usize>("samples")?.unwrap_or(100_000);
    let batches = s.parse::<usize>("batches")?.unwrap_or(32);
    if backend == SolverBackend::Mc && (samples == 0 || batches == 0) {
        return Err(s.err("samples", "samples and batches must be positive"));
    }
    let mode = match s.get("mode").unwrap_or("auto") {
        "auto" => None,
        "whole_space" => Some(StepMode::WholeSpace),
        "soft" | "soft_cutoff" => Some(StepMode::SoftCutoff),
        "hard" | "hard_kill" => Some(StepMode::HardKill),
        other => return Err(s.err("mode", format!("expected auto, whole_space, soft or hard, got {other:?}"))),
    };
    let mut quad = QuadratureSpec::default();
    if let Some(v) = s.parse::<usize>("quad_nodes")? {
        quad.nodes = v;
    }
    if let Some(v) = s.f64("quad_window")? {
        quad.window = v;
    }
    if let Some(v) = s.parse::<usize>("quad_interp")? {
        quad.interp_order = v;
    }
    if let Some(v) = s.parse::<usize>("quad_table_nodes")? {
        quad.table_nodes = v;
    }
    if let Some(v) = s.parse::<usize>("quad_budget")? {
        quad.budget = v;
    }
    quad.validate().map_err(|e| s.err("quad_*", e))?;
    let tau = match s.get("tau").unwrap_or("auto") {
        "auto" => TauSpec::Auto,
        "mc" => TauSpec::MonteCarlo,
        "quadrature" => TauSpec::Quadrature {
            nodes: s.parse::<usize>("tau_nodes")?.unwrap_or(TauSpec::DEFAULT_NODES),
            eps: s.f64_or("tau_eps", TauSpec::DEFAULT_EPS)?,
        },
        other => return Err(s.err("tau", format!("expected auto, quadrature or mc, got {other:?}"))),
    };
    Ok(SolverConfig {
        backend,
        n,
        samples,
        seed,
        antithetic: s.parse::<bool>("antithetic")?.unwrap_or(false),
        batches,
        mode,
        quad,
        tau,
    })
}

fn parse_output(o: &Section, dim: usize) -> Result<OutputConfig, CliError> {
    let points = match (o.get("points"), o.get("grid")) {
        (Some(_), Some(_)) => return Err(o.err("points", "give either points or grid, not both")),
        (Some(v), None) => parse_points(v, dim).map_err(|e| o.err("points", e))?,
        (None, Some(v)) => {
            let g = parse_list(v).map_err(|e| o.err("grid", e))?;
            if dim != 1 || g.len() != 3 || g[2] < 1.0 || g[2].fract() != 0.0 {
                return Err(o.err("grid", "expected `lo, hi, count` in one dimension"));
            }
            let k = g[2] as usize;
            (0..k)
                .map(|i| {
                    let s = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                    vec![g[0] + s * (g[1] - g[0])]
                })
                .collect()
        }
        (None, None) => vec![vec![0.0; dim]],
    };
    Ok(OutputConfig {
        dir: o.get("dir").map(PathBuf::from),
        name: o.get("name").unwrap_or("solution").to_string(),
        format: o.parse::<Format>("format")?.unwrap_or(Format::Both),
        points,
    })
}

fn parse_points(s: &str, dim: usize) -> Result<Vec<Vec<f64>>, String> {
    let groups: Vec<&str> = s.split(';').map(str::trim).filter(|g| !g.is_empty()).collect();
    let mut pts = Vec::new();
    for g in &groups {
        let v = parse_list(g)?;
        if dim == 1 && groups.len() == 1 {
            // a plain comma list in one dimension
            return Ok(v.into_iter().map(|x| vec![x]).collect());
        }
        if v.len() != dim {
            return Err(format!("point ({g}) has {} coordinates, expected {dim}", v.len()));
        }
        pts.push(v);
    }
    if pts.is_empty() {
        return Err("no points given".into());
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn expressions() {
        assert_eq!(eval_expr("pi").unwrap(), PI);
        assert_eq!(eval_expr("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(eval_expr("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(eval_expr(" 1e-3 ").unwrap(), 1e-3);
        assert!(eval_expr("pi +1").is_err());
        assert!(eval_expr("1/0").is_err());
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pairs("(0.5, 1.0), (0.3,0.5)").unwrap(), vec![(0.5, 1.0), (0.3, 0.5)]);
        assert!(parse_pairs("(0.5)").is_err());
        assert!(parse_pairs("0.5, 1").is_err());
    }

    #[test]
    fn points_forms() {
        assert_eq!(parse_points("-1, 0, 1", 1).unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(parse_points("0, 1; 2, 3", 2).unwrap(), vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert!(parse_points("0, 1, 2", 2).is_err());
    }

    #[test]
    fn defaults_parse() {
        let c = RunConfig::parse("[solver]\nseed = 1\n").unwrap();
        assert_eq!(c.problem.dim(), 1);
        assert_eq!(c.solver.n, 32);
        assert_eq!(c.output.points, vec![vec![0.0]]);
    }

    #[test]
    fn unknown_key_named() {
        let e = RunConfig::parse("[solver]\nseed = 1\nsamplez = 3\n").unwrap_err();
        assert!(e.message.contains("solver.samplez"), "{}", e.message);
    }

    #[test]
    fn polynomial_horner() {
        assert_eq!(horner(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(horner(&[], 2.0), 0.0);
    }
}
