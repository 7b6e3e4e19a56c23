use std::path::PathBuf;
use std::process::ExitCode;

use chernoff_cli::{
    cmd_convergence, cmd_solve, cmd_validate, with_threads, CliError, Format, RunConfig, EXIT_OK, EXIT_VALIDATION,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chernoff", version, about = "Chernoff approximations and Feynman formulae for FPK problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (default: `output.dir`, else the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides `output.format`.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured problem at the output points.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sup-error table over a list of step counts.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated step counts, e.g. `8,32,128`.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Run an invariant suite: kernels, killed, fractional or all.
    Validate {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Adds this config's coefficients to the kernel suite.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    match seed {
        Some(s) => cfg.with_override("solver", "seed", s.to_string()),
        None => Ok(cfg),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let out_dir = |cfg: Option<&RunConfig>| -> PathBuf {
        cli.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
            .unwrap_or_else(|| PathBuf::from("."))
    };
    match &cli.command {
        Command::Solve { config } => {
            let cfg = load(config, cli.seed)?;
            let format = cli.format.unwrap_or(cfg.output.format);
            let dir = out_dir(Some(&cfg));
            let out = with_threads(cli.threads, || cmd_solve(&cfg, &dir, format))??;
            eprintln!(
                "solved {} points, n = {}, max stderr {:.3e}",
                out.field.len(),
                out.field.meta.n,
                out.summary["error_estimates"]["max_stderr"].as_f64().unwrap_or(f64::NAN)
            );
            if !format.csv() {
                print!("{}", out.csv);
            }
            Ok(EXIT_OK)
        }
        Command::Convergence { config, n_list } => {
            let cfg = load(config, cli.seed)?;
            let format = cli.format.unwrap_or(cfg.output.format);
            let dir = out_dir(Some(&cfg));
            let table = with_threads(cli.threads, || cmd_convergence(&cfg, n_list, &dir, format))??;
            print!("{}", table.to_csv());
            if !table.nonincreasing_within_noise {
                eprintln!("note: errors are not nonincreasing within two combined standard errors");
            }
            Ok(EXIT_OK)
        }
        Command::Validate { suite, config } => {
            let extra = match config {
                Some(p) => vec![load(p, None)?.problem.coeffs],
                None => Vec::new(),
            };
            let dir = out_dir(None);
            let report = with_threads(cli.threads, || cmd_validate(suite, &extra, &dir))??;
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if report.pass { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
