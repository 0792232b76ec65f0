use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use navslip::adn::{check_all, AdnProblem, AdnReport};
use navslip::io::{self, RunReport};
use navslip::solver::{simulate, SimConfig};
use navslip::sweep::{run_sweep, SweepConfig};
use navslip::Error;

/// Thread count for sweeps; nothing else is read from the environment.
const THREADS_VAR: &str = "NAVSLIP_THREADS";

#[derive(Parser)]
#[command(name = "navslip", version, about = "Navier-slip flow on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and diagnose it.
    Simulate {
        config: PathBuf,
        /// Run directory (default: runs/<config stem>).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a vanishing-viscosity sweep.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the ellipticity conditions of a boundary value problem.
    Adn {
        problem: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Boundary points sampled.
        #[arg(long, default_value_t = 32)]
        boundary: usize,
        /// Covector directions sampled.
        #[arg(long, default_value_t = 8)]
        xi: usize,
    },
    /// Recompute every residual of a stored run.
    Diagnose { run: PathBuf },
}

#[derive(Serialize)]
struct AdnOutput<'a> {
    problem_file: String,
    boundary_samples: usize,
    xi_samples: usize,
    report: &'a AdnReport,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("{} line {} column {}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

fn out_dir(out: Option<PathBuf>, input: &Path) -> PathBuf {
    out.unwrap_or_else(|| {
        let stem = input.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
        PathBuf::from("runs").join(stem)
    })
}

fn print_residuals(report: &RunReport) {
    for e in &report.residuals.entries {
        let verdict = match e.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        };
        println!("{:<20} {:>12.4e}  {verdict}  ({})", e.name, e.value, e.norm);
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg: SimConfig = read_json(&config)?;
            let dir = out_dir(out, &config);
            let traj = simulate(&cfg)?;
            io::write_trajectory(&dir, &traj)?;
            let report = io::diagnose_trajectory(&traj)?;
            io::write_report(&dir, &report)?;
            println!("{} steps, {} snapshots -> {}", traj.steps, traj.snapshots.len(), dir.display());
            print_residuals(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let cfg: SweepConfig = read_json(&config)?;
            let dir = out_dir(out, &config);
            let report = run_sweep(&cfg)?;
            fs::create_dir_all(&dir)?;
            fs::write(dir.join(io::CONFIG_FILE), serde_json::to_string_pretty(&report.config)?)?;
            report.write_csv(fs::File::create(dir.join(io::SERIES_FILE))?)?;
            io::write_report(&dir, &report)?;
            println!("euler floor (per q): {:?}", report.euler_floor);
            for row in &report.rows {
                println!("nu = {:<8} sup diff {:?}  sup ||w||_p {:.4}  energy {}", row.nu, row.sup_lq_diff, row.sup_lp_enstrophy, if row.energy_ok { "ok" } else { "FAIL" });
            }
            println!("renormalized constant: {:.4e} -> {}", report.renorm_constant, dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Adn { problem, out, boundary, xi } => {
            let text = fs::read_to_string(&problem)?;
            let parsed = AdnProblem::from_json(&text)?;
            let report = check_all(&parsed, boundary, xi)?;
            let dir = out_dir(out, &problem);
            let output = AdnOutput {
                problem_file: problem.display().to_string(),
                boundary_samples: boundary,
                xi_samples: xi,
                report: &report,
            };
            io::write_report(&dir, &output)?;
            for c in &report.conditions {
                println!("{:<28} {}", c.name, if c.pass { "pass" } else { "FAIL" });
                if let Some(w) = &c.witness {
                    println!("  witness at theta = {:.4}, xi = {:?}: {}", w.theta, w.xi, w.reason);
                }
            }
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Diagnose { run } => {
            let traj = io::load_run(&run)?;
            let report = io::diagnose_trajectory(&traj)?;
            io::write_report(&run, &report)?;
            print_residuals(&report);
            Ok(if report.residuals.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: {THREADS_VAR} must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
