use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctbounds::bounds::{BoundId, Orientation};
use ctbounds::capacity::DEFAULT_HN_BUDGET;
use ctbounds_cli::commands::{self, Dist, Method};
use ctbounds_cli::reproduce::{self, Table};
use ctbounds_cli::{exit, CliError, Common, Format, Outcome};

/// Bounds on the number of contingency tables with given marginals.
///
/// Exit codes: 0 ok, 2 infeasible, 3 solver did not converge, 4 bad input,
/// 5 budget exceeded, 6 disconnected support, 7 reproduction mismatch.
#[derive(Parser, Debug)]
#[command(name = "ctbounds", version, about)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Flags {
    /// Comma-separated bound ids (ub1,ub2,ub3,lb1,lb2,newlb,gurvits_lb,gurvits_ub,cti,newlb_bounded).
    #[arg(long, global = true, value_delimiter = ',')]
    which: Option<Vec<String>>,
    /// Which marginal loses its correction factor: rows, cols, best or as-stated.
    #[arg(long, global = true, default_value = "best")]
    orientation: String,
    /// Relative tolerance of the capacity solver.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Significant digits in displayed values.
    #[arg(long, global = true, default_value_t = 2)]
    digits: usize,
    /// State budget for exact counting.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Budget on N times the number of variables for the h_N recurrence.
    #[arg(long, global = true, default_value_t = DEFAULT_HN_BUDGET)]
    hn_budget: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Enable expensive oracles (large exact counts, volume scaling estimates).
    #[arg(long, global = true)]
    slow: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper and lower bounds on the number of tables.
    Bounds { instance: PathBuf },
    /// Exact number of tables.
    Exact {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "dp")]
        method: Method,
    },
    /// Lower bound on the flow or transportation polytope volume.
    Volume {
        instance: PathBuf,
        /// Also evaluate the uniform closed form.
        #[arg(long)]
        closed_form: bool,
    },
    /// Bounds on the probability that a random table has these marginals.
    Random {
        instance: PathBuf,
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long)]
        s: f64,
    },
    /// Recompute a published comparison table and diff against it.
    Reproduce {
        #[arg(long, value_enum)]
        table: Table,
        #[arg(long)]
        case: Option<usize>,
    },
}

fn common(flags: &Flags) -> Result<Common, CliError> {
    let which = match &flags.which {
        Some(ids) => Some(ids.iter().map(|s| s.trim().parse::<BoundId>()).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    if flags.digits == 0 {
        return Err(CliError::Input("--digits must be at least 1".into()));
    }
    Ok(Common {
        which,
        orientation: flags.orientation.parse::<Orientation>()?,
        tol: flags.tol,
        max_iter: flags.max_iter,
        format: flags.format,
        digits: flags.digits,
        budget: flags.budget,
        hn_budget: flags.hn_budget,
        jobs: flags.jobs,
        slow: flags.slow,
    })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = common(&cli.flags)?;
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Bounds { instance } => commands::cmd_bounds(instance, &common),
        Command::Exact { instance, method } => commands::cmd_exact(instance, *method, &common),
        Command::Volume { instance, closed_form } => commands::cmd_volume(instance, *closed_form, &common),
        Command::Random { instance, dist, s } => commands::cmd_random(instance, *dist, *s, &common),
        Command::Reproduce { table, case } => reproduce::cmd_reproduce(*table, *case, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    let text = match outcome.report.render(cli.flags.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::OUTPUT as u8);
        }
    };
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{}", text.trim_end()).is_err() {
        return ExitCode::from(exit::OUTPUT as u8);
    }
    ExitCode::from(outcome.code as u8)
}
