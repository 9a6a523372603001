use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simplex_esdg::error::{Error, Result};
use simplex_esdg::harness::report::{write_errors, write_fluxcount};
use simplex_esdg::harness::{convergence_study, count_fluxes, run_case, verify_operators, Outcome, RunConfig, Sweep};
use simplex_esdg::reference::ElementType;

/// Overrides the output directory of every subcommand.
const OUTPUT_ENV: &str = "ESDG_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "esdg", version, about = "Entropy-stable modal DG solver for compressible Euler on simplices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write monitors.csv (and errors.csv when an exact solution exists).
    Run { config: PathBuf },
    /// Run a mesh or degree sweep and write errors.csv with observed orders.
    Convergence {
        config: PathBuf,
        /// `M=2,4,8,16` or `p=1..5`.
        #[arg(long)]
        sweep: Sweep,
    },
    /// Check the reference SBP operators of one degree.
    VerifyOperators {
        #[arg(long)]
        element: ElementType,
        #[arg(long)]
        q: usize,
    },
    /// Count two-point fluxes per element for q = 1..=qmax and write fluxcount.csv.
    CountFluxes {
        #[arg(long)]
        element: ElementType,
        #[arg(long)]
        qmax: usize,
    },
}

fn output_dir(config: Option<&RunConfig>) -> Result<PathBuf> {
    let dir = match std::env::var_os(OUTPUT_ENV) {
        Some(d) => PathBuf::from(d),
        None => config
            .and_then(|c| c.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_admissibility() => 3,
        Error::Verification(_) => 4,
        Error::Config(_)
        | Error::Mesh(_)
        | Error::NoExactSolution(_)
        | Error::NonPositiveJacobian { .. }
        | Error::Connectivity { .. }
        | Error::DuplicateNodes(..)
        | Error::InvalidDegree(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn report_aborted(t: f64, reason: &str) -> Error {
    eprintln!("aborted at t = {t}: {reason}");
    Error::InadmissibleState("run aborted")
}

fn run(path: &Path) -> Result<()> {
    let cfg = RunConfig::from_path(path)?;
    let dir = output_dir(Some(&cfg))?;
    let case = run_case(&cfg)?;
    case.write(&dir)?;
    println!(
        "h = {:.6e}, dt = {:.6e}, steps = {}, rejected = {}, wall = {:.3?}",
        case.h, case.dt, case.integration.steps, case.integration.rejected, case.wall_time
    );
    for row in case.error_rows() {
        println!("L2 error {:>7}: {:.6e}", row.var, row.error);
    }
    match &case.outcome {
        Outcome::Completed => Ok(()),
        Outcome::Aborted { t, reason } => Err(report_aborted(*t, reason)),
    }
}

fn convergence(path: &Path, sweep: &Sweep) -> Result<()> {
    let cfg = RunConfig::from_path(path)?;
    let dir = output_dir(Some(&cfg))?;
    let study = convergence_study(&cfg, sweep)?;
    write_errors(&dir.join("errors.csv"), &study.rows)?;
    for r in &study.rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_default();
        println!("q={} p={} M={} {:>7} {:.6e} {}", r.q, r.p, r.m, r.var, r.error, order);
    }
    match study.cases.iter().find_map(|c| match &c.outcome {
        Outcome::Aborted { t, reason } => Some((*t, reason.clone())),
        Outcome::Completed => None,
    }) {
        Some((t, reason)) => Err(report_aborted(t, &reason)),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => run(&config),
        Command::Convergence { config, sweep } => convergence(&config, &sweep),
        Command::VerifyOperators { element, q } => {
            let rep = verify_operators(element, q)?;
            for (name, v) in rep.entries() {
                println!("{name:>18}: {v:.3e}");
            }
            Ok(())
        }
        Command::CountFluxes { element, qmax } => {
            let rows = count_fluxes(element, qmax)?;
            let dir = output_dir(None)?;
            write_fluxcount(&dir.join("fluxcount.csv"), element, &rows)?;
            for r in &rows {
                match (r.md_count, r.ratio) {
                    (Some(md), Some(ratio)) => println!("q={:>2} tensor {:>8} multidim {md:>8} ratio {ratio:.2}", r.q, r.tensor_count),
                    _ => println!("q={:>2} tensor {:>8}", r.q, r.tensor_count),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
