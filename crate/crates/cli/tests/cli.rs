use std::path::Path;
use std::process::Command;

use chernoff_cli::{cmd_convergence, cmd_solve, run_suite, Format, RunConfig, EXIT_CONFIG};
use chernoff_core::CoefficientSet;

const HEAT: &str = "\
[problem]
coefficients = heat
a = 0.5
initial = gaussian
t = 1

[solver]
backend = mc
n = 4
samples = 40000
seed = 5

[output]
points = -1, 0, 1
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chernoff"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn heat_benchmark_row_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(HEAT).unwrap();
    let out = cmd_solve(&cfg, dir.path(), Format::Both).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(csv, out.csv);
    let row = csv.lines().nth(2).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "0.0");
    let v: f64 = cols[1].parse().unwrap();
    let se: f64 = cols[2].parse().unwrap();
    assert!((v - 0.5f64.sqrt()).abs() <= 4.0 * se, "{v} ± {se}");
    assert_eq!(&cols[3..], ["4", "40000", "5"]);
}

#[test]
fn summary_round_trips_to_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "heat.ini", HEAT);
    let status = bin()
        .args(["solve", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("a"))
        .args(["--seed", "99", "--threads", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(dir.path().join("a/solution.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["seed"], 99);
    assert_eq!(v["config"]["solver"]["seed"], "99");
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);

    let status = bin()
        .args(["solve", "--config"])
        .arg(dir.path().join("a/solution.json"))
        .arg("--out")
        .arg(dir.path().join("b"))
        .args(["--threads", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    let a = std::fs::read(dir.path().join("a/solution.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/solution.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn beta_outside_unit_interval_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = HEAT.replace("t = 1", "t = 1\nfractional = (0.5, 1.0), (1.2, 0.5)");
    let p = write(dir.path(), "bad.ini", &text);
    let out = bin().args(["solve", "--config"]).arg(&p).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG as i32));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("problem.fractional"), "{err}");
    assert!(err.contains("beta = 1.2"), "{err}");
}

#[test]
fn config_errors_name_the_key() {
    for (text, key) in [
        (HEAT.replace("a = 0.5", "a = -1"), "problem.coefficients"),
        (HEAT.replace("seed = 5", ""), "solver.seed"),
        (HEAT.replace("n = 4", "n = 0"), "solver.n"),
        (HEAT.replace("coefficients = heat", "coefficients = wave"), "problem.coefficients"),
        (HEAT.replace("points = -1, 0, 1", "points = 0, x"), "output.points"),
        (HEAT.replace("backend = mc", "backend = exact"), "solver.backend"),
    ] {
        let e = RunConfig::parse(&text).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        assert!(e.message.contains(key), "{key}: {}", e.message);
    }
}

#[test]
fn zero_initial_condition_gives_zero_field() {
    let cfg = RunConfig::parse(&HEAT.replace("initial = gaussian", "initial = zero")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_solve(&cfg, dir.path(), Format::Csv).unwrap();
    assert!(out.field.values.iter().all(|&v| v == 0.0));
    assert!(out.field.stderr.iter().all(|&v| v == 0.0));
}

#[test]
fn csv_is_plain_decimal_with_header() {
    let cfg = RunConfig::parse(HEAT).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_solve(&cfg, dir.path(), Format::Csv).unwrap();
    let mut lines = out.csv.lines();
    assert_eq!(lines.next(), Some("x0,value,stderr,n,samples,seed"));
    for l in lines {
        assert_eq!(l.split(',').count(), 6);
        for c in l.split(',').take(3) {
            c.parse::<f64>().unwrap();
        }
    }
    assert!(!dir.path().join("solution.json").exists());
}

#[test]
fn two_point_convergence_table_shape() {
    let cfg = RunConfig::parse(&HEAT.replace("points = -1, 0, 1", "points = 0.25")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let table = cmd_convergence(&cfg, &[1, 2], dir.path(), Format::Both).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.reference, "oracle");
    let csv = std::fs::read_to_string(dir.path().join("solution_convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(cmd_convergence(&cfg, &[4], dir.path(), Format::Csv).is_err());
}

#[test]
fn dirichlet_convergence_against_eigen_oracle() {
    let text = "\
[problem]
coefficients = heat
a = 1
domain = interval
lo = 0
hi = pi
initial = sine
t = 0.5
[solver]
backend = quad
[output]
points = pi/4, pi/2
";
    let cfg = RunConfig::parse(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let table = cmd_convergence(&cfg, &[8, 32, 128], dir.path(), Format::Csv).unwrap();
    assert_eq!(table.reference, "oracle");
    assert!(table.nonincreasing_within_noise, "{table:?}");
    assert!(table.rows[2].sup_error < table.rows[0].sup_error / 2.0);
}

#[test]
fn fractional_convergence_uses_subordinated_oracle() {
    let text = HEAT.replace("t = 1", "t = 1\nfractional = (0.5, 1)").replace("samples = 40000", "samples = 4000");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let table = cmd_convergence(&cfg, &[1, 2], dir.path(), Format::Csv).unwrap();
    assert_eq!(table.reference, "oracle");
    for r in &table.rows {
        assert!(r.sup_error <= 4.0 * r.stderr + 1e-12, "{r:?}");
    }
}

#[test]
fn finest_n_reference_without_oracle() {
    let text = HEAT.replace("coefficients = heat", "coefficients = ou");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let table = cmd_convergence(&cfg, &[1, 4], dir.path(), Format::Csv).unwrap();
    assert_eq!(table.reference, "finest_n");
    assert_eq!(table.rows[1].sup_error, 0.0);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["validate", "--suite", "unknown", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["validate", "--suite", "kernels", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate_kernels.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);

    let broken = write(
        dir.path(),
        "broken.ini",
        "[problem]\ncoefficients = polynomial\na_poly = 0.5\na_lower = 1\na_upper = 2\n[solver]\nseed = 1\n",
    );
    let out = bin()
        .args(["validate", "--suite", "all", "--config"])
        .arg(&broken)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL polynomial/d1: coefficient invariants"), "{stdout}");
    assert!(stdout.contains("ellipticity lower bound"), "{stdout}");
}

#[test]
fn broken_killing_fixture_names_invariant() {
    let bad = CoefficientSet::new(1, 0.5, 0.5, |_, o| o[0] = 0.5, |_, o| o[0] = 0.0, |x| x[0]).unwrap();
    let r = run_suite("kernels", &[bad]).unwrap();
    assert!(!r.pass);
    let f: Vec<_> = r.failures().collect();
    assert_eq!(f.len(), 1);
    assert!(f[0].detail.contains("killing rate"), "{}", f[0].detail);
}

#[test]
fn quad_backend_in_two_dimensions() {
    let text = "\
[problem]
coefficients = heat
dim = 2
a = 0.5
initial = gaussian
t = 0.3
[solver]
backend = quad
n = 1
quad_nodes = 65
[output]
points = 0, 0; 0.5, -0.5
";
    let cfg = RunConfig::parse(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_solve(&cfg, dir.path(), Format::Csv).unwrap();
    assert!(out.csv.starts_with("x0,x1,value,stderr,n,samples,seed\n"));
    let exact = 1.0 / 1.3;
    assert!((out.field.values[0] - exact).abs() < 1e-10);
    let e = RunConfig::parse(&text.replace("n = 1", "n = 2")).and_then(|c| cmd_solve(&c, dir.path(), Format::Csv));
    assert_eq!(e.unwrap_err().code, EXIT_CONFIG);
}
