//! `dualqp` — canonical-duality verification for small quadratic programs.
//!
//! Exit codes: 0 all golden assertions and certificates pass (expected
//! REFUTED verdicts included), 1 a golden assertion failed, 2 input error,
//! 3 resource guard tripped.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dualqp_core::oracle::OracleConfig;
use dualqp_core::problem_file::read_problem_file;
use dualqp_core::report::{format_f64, to_json_17, ClaimStatus, RunReport};
use dualqp_core::repro::{
    curve_to_csv, pairs_to_csv, run_binary_sweep, run_binary_verify, run_example1, run_example2,
    run_fd_check, BinaryVerifyDoc, Example1Options, Example2Options, SweepOptions,
};
use dualqp_core::Error;

#[derive(Parser)]
#[command(
    name = "dualqp",
    version,
    about = "Verification toolkit for canonical duality on small quadratic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Golden reproduction: two-variable quadratic over a disk, dual
    /// critical multipliers {1, 2, 5}, local-minimizer claim refuted.
    #[command(name = "reproduce-example1")]
    ReproduceExample1 {
        /// Write the constraint-boundary profile as CSV (header `t,value`).
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Oracle sample budget; with --curve, also the number of CSV rows.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write the run report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Tolerance for the critical-multiplier assertions.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Override the constraint level (skips golden assertions).
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Golden reproduction: box-constrained quartic-regularized quadratic,
    /// duality identity at -15/2, both extremality claims refuted.
    #[command(name = "reproduce-example2")]
    ReproduceExample2 {
        /// Path parameter for the closed perturbation forms.
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Enumerate and certify dual critical pairs of a binary instance, or
    /// sweep seeded random instances.
    #[command(name = "binary-verify")]
    BinaryVerify {
        /// Problem file (family "binary").
        #[arg(long, required_unless_present = "sweep")]
        file: Option<PathBuf>,
        /// Run the randomized sweep instead of a single file.
        #[arg(long)]
        sweep: bool,
        /// Number of seeded instances in the sweep.
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        /// Sweep dimensions cycle through 1..=n.
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write report + pair table + certificates as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the pair table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check analytic dual derivatives against finite differences.
    #[command(name = "fd-check")]
    FdCheck {
        /// Problem file (any family).
        #[arg(long)]
        file: PathBuf,
        /// Points sampled per check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            print_report(&report);
            if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InstanceTooLarge { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<RunReport, Error> {
    match command {
        Command::ReproduceExample1 {
            curve,
            samples,
            json,
            tol,
            seed,
            lambda,
        } => {
            let opts = Example1Options {
                lambda_override: lambda,
                tol,
                seed,
                samples,
                curve_samples: curve.is_some().then_some(samples),
                command: reassemble_command(),
            };
            let run = run_example1(&opts)?;
            if run.non_golden {
                println!(
                    "NON-GOLDEN: lambda override {}; golden assertions skipped",
                    format_f64(lambda.unwrap())
                );
            }
            if let Some(path) = curve {
                write_file(&path, &curve_to_csv(run.curve.as_deref().unwrap_or(&[])))?;
            }
            if let Some(path) = json {
                write_file(&path, &run.report.to_json())?;
            }
            Ok(run.report)
        }
        Command::ReproduceExample2 {
            gamma,
            json,
            samples,
            seed,
        } => {
            let opts = Example2Options {
                gamma,
                seed,
                samples,
                command: reassemble_command(),
            };
            let run = run_example2(&opts)?;
            if let Some(path) = json {
                write_file(&path, &run.report.to_json())?;
            }
            Ok(run.report)
        }
        Command::BinaryVerify {
            file,
            sweep,
            seeds,
            n,
            samples,
            seed,
            json,
            csv,
        } => {
            let cfg = OracleConfig {
                seed,
                samples: samples.max(100),
                ..OracleConfig::default()
            };
            if sweep {
                let opts = SweepOptions {
                    seeds,
                    n_max: n,
                    scale: 5.0,
                    cfg,
                    command: reassemble_command(),
                };
                let report = run_binary_sweep(&opts)?;
                if let Some(path) = json {
                    write_file(&path, &report.to_json())?;
                }
                return Ok(report);
            }
            let path = file.expect("clap enforces --file unless --sweep");
            let problem = read_problem_file(&path)?.into_binary()?;
            let run = run_binary_verify(&problem, &cfg, &reassemble_command())?;
            print_pair_table(&run.pairs);
            if let Some(path) = csv {
                write_file(&path, &pairs_to_csv(&run.pairs))?;
            }
            if let Some(path) = json {
                let doc = BinaryVerifyDoc {
                    report: &run.report,
                    pairs: &run.pairs,
                    certificates: &run.certificates,
                };
                write_file(&path, &to_json_17(&doc))?;
            }
            Ok(run.report)
        }
        Command::FdCheck {
            file,
            samples,
            seed,
            json,
        } => {
            let problem = read_problem_file(&file)?;
            let report = run_fd_check(problem, samples, seed, &reassemble_command())?;
            if let Some(path) = json {
                write_file(&path, &report.to_json())?;
            }
            Ok(report)
        }
    }
}

fn reassemble_command() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn write_file(path: &Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content)
        .map_err(|e| Error::InvalidProblem(format!("cannot write {}: {e}", path.display())))
}

fn print_report(report: &RunReport) {
    for v in &report.verdicts {
        let mut line = format!("{:<9} {}", v.status.to_string(), v.claim_id);
        for (key, value) in &v.values {
            line.push_str(&format!("  {key}={}", format_f64(*value)));
        }
        if let Some(w) = &v.witness {
            line.push_str(&format!("  witness_value={}", format_f64(w.value)));
        }
        println!("{line}");
    }
    let ok = report.verdicts.iter().all(|v| v.status != ClaimStatus::Fail);
    println!(
        "{} verdicts, {}; {} ms; input digest {}",
        report.verdicts.len(),
        if ok { "all ok" } else { "FAILURES present" },
        report.timing_ms,
        report.input_digest
    );
}

fn print_pair_table(pairs: &[dualqp_core::binary::CriticalPair]) {
    println!(
        "{:<12} {:<11} {:<22} {:<22} {:<10} sigma",
        "x_star", "branch", "dual_value", "primal_value", "residual"
    );
    for p in pairs {
        let sigma = p
            .sigma
            .iter()
            .map(|s| format_f64(*s))
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "{:<12} {:<11} {:<22} {:<22} {:<10.2e} {sigma}",
            p.bits,
            p.branch.to_string(),
            format_f64(p.dual_value),
            format_f64(p.primal_value),
            p.residual
        );
    }
}
