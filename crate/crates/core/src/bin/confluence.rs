use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use confluence::output::RunStatus;
use confluence::sweep::{self, SweepSpec, DEFAULT_EPSILONS};
use confluence::{Result, RunConfig};

/// Radial phase field runs and ε-sweeps.
///
/// Exit status: 0 clean, 2 a run diverged, 1 error.
#[derive(Parser)]
#[command(name = "confluence", version)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file, or a run_meta.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set epsilon=0.01`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Interface widths, largest first.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS.to_vec())]
    epsilons: Vec<f64>,
    /// Number of sweep members run at once.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// One run; writes track, probes, snapshots, dip report and metadata.
    Run(Common),
    /// Dip time and location for each ε (table1.csv).
    Table1(SweepArgs),
    /// Analytic jump against measured amplitude for each ε (table2.csv).
    Table2(SweepArgs),
    /// Both tables from one set of runs.
    Sweep(SweepArgs),
}

fn spec(args: &SweepArgs) -> Result<SweepSpec> {
    let base = RunConfig::load(args.common.config.as_deref(), &args.common.set)?;
    Ok(SweepSpec {
        epsilons: args.epsilons.clone(),
        base,
        output_dir: args.common.out.clone(),
    })
}

fn status(any_diverged: bool) -> RunStatus {
    if any_diverged {
        RunStatus::Diverged
    } else {
        RunStatus::Completed
    }
}

fn execute(cli: Cli) -> Result<RunStatus> {
    match cli.command {
        Command::Run(c) => {
            let cfg = RunConfig::load(c.config.as_deref(), &c.set)?;
            let (summary, status) = sweep::run_to_dir(&cfg, &c.out)?;
            match summary.dip {
                Some(d) => println!(
                    "t_min = {:.5}  r_min = {:.4}  sigma_min = {:.6}  amplitude = {:.4}",
                    d.t_min, d.r_min, d.sigma_min, d.amplitude
                ),
                None => println!("no dip found"),
            }
            Ok(status)
        }
        Command::Table1(a) => {
            let rows = sweep::cmd_table1(&spec(&a)?, a.parallel)?;
            Ok(status(rows.iter().any(|r| r.diverged)))
        }
        Command::Table2(a) => {
            let rows = sweep::cmd_table2(&spec(&a)?, a.parallel)?;
            Ok(status(rows.iter().any(|r| r.diverged)))
        }
        Command::Sweep(a) => {
            let spec = spec(&a)?;
            let summaries = sweep::run_sweep(&spec, a.parallel)?;
            let t1 = sweep::table1_rows(&summaries);
            sweep::write_table1(&spec.output_dir.join(sweep::TABLE1_FILE), &t1)?;
            sweep::write_table2(&spec.output_dir.join(sweep::TABLE2_FILE), &sweep::table2_rows(&summaries))?;
            Ok(status(t1.iter().any(|r| r.diverged)))
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is taken by "diverged"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match execute(cli) {
        Ok(s) => ExitCode::from(s.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
