//! Command-line front end: problem-file ingestion, periods and integrability
//! reports, dressed-form group operations, component and discreteness
//! censuses, the exponential pathology demo, and the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 numeric
//! error, 4 ambiguity (path-dependent evaluation without a path).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mapgroup::error::Error;

use mapgroup_cli::commands::{self, RunOptions};
use mapgroup_cli::report;

#[derive(Parser)]
#[command(name = "mapgroup", version, about = "Calculus of Lie group valued mapping groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Problem file (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Directory for CSV (and SVG) outputs; stdout only when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Magnus steps per unit parameter (overrides the problem file)
    #[arg(long)]
    steps: Option<usize>,
    /// Identity-closeness tolerance for period verdicts
    #[arg(long)]
    period_tol: Option<f64>,
    /// Report step-doubling error estimates of the transports
    #[arg(long)]
    tol_report: bool,
}

impl CommonArgs {
    fn options(&self, svg: bool) -> RunOptions {
        RunOptions {
            input: self.input.clone(),
            out: self.out.clone(),
            steps: self.steps,
            period_tol: self.period_tol,
            svg,
            tol_report: self.tol_report,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Period table over the canonical loop basis with integrability verdicts
    Periods {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate an element pointwise by transport along canonical or given paths
    Integrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write an SVG chart of |entry| along the first path (needs --out)
        #[arg(long)]
        svg: bool,
    },
    /// Group law on logarithmic derivatives: sampled dressed form + residual
    Multiply {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Inverse on logarithmic derivatives: sampled dressed form + residual
    Inverse {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Component classes of abelian-target elements over the loop basis
    Components {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Smith invariant factors, Hom rank, and the discreteness verdict
    Discreteness {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exponential pathology demo: h_n converging to 1 outside exp's image
    DemoExpPathology {
        /// Comma-separated n values
        #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
        n: Vec<u32>,
        /// Radius of the sampled disk
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        /// Directory for the CSV output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite (exit 1 on any failed criterion)
    Verify {
        /// Suite name; `all` runs everything
        #[arg(long)]
        suite: String,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidArgument(_) | Error::Unsupported(_) => 2,
        Error::Ambiguity(_) => 4,
        _ => 3,
    }
}

fn finish(result: mapgroup::error::Result<report::RunReport>, out: Option<&PathBuf>) -> ExitCode {
    match result {
        Ok(report) => {
            report.print();
            if let Some(dir) = out {
                if let Err(e) = report.write_csv(dir) {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit_code_for(&e));
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Periods { common } => {
            let out = common.out.clone();
            finish(commands::cmd_periods(&common.options(false)), out.as_ref())
        }
        Command::Integrate { common, svg } => {
            let out = common.out.clone();
            finish(commands::cmd_integrate(&common.options(svg)), out.as_ref())
        }
        Command::Multiply { common } => {
            let out = common.out.clone();
            finish(commands::cmd_multiply(&common.options(false)), out.as_ref())
        }
        Command::Inverse { common } => {
            let out = common.out.clone();
            finish(commands::cmd_inverse(&common.options(false)), out.as_ref())
        }
        Command::Components { common } => {
            let out = common.out.clone();
            finish(commands::cmd_components(&common.options(false)), out.as_ref())
        }
        Command::Discreteness { common } => {
            let out = common.out.clone();
            finish(commands::cmd_discreteness(&common.options(false)), out.as_ref())
        }
        Command::DemoExpPathology { n, radius, out } => {
            finish(commands::cmd_demo_exp_pathology(&n, radius), out.as_ref())
        }
        Command::Verify { suite } => match commands::cmd_verify(&suite) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
    }
}
