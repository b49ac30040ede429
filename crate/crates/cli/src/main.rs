use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod selftest;

use config::{CommonArgs, RunConfig};
use error::CliResult;

/// Non-classicality witness traces, violation scans and figure data.
#[derive(Parser, Debug)]
#[command(name = "ncwitness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// |W(t)| over one period for each requested method
    Trace(TraceArgs),
    /// One violation report per value of a swept parameter
    Scan(ScanArgs),
    /// Plot data: Fock levels 0, 1, 10, 15 and cat amplitudes 0, 1, 2, 5
    Figures(FiguresArgs),
    /// Cross-check closed forms against both oracles
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// N, nbar, alpha or beta
    #[arg(long)]
    sweep: Option<String>,
    /// `a,b,c`, inclusive integer range `lo..hi`, or `start:stop:count`
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
}

#[derive(Args, Debug)]
struct FiguresArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Directory receiving fig1 and fig2 (default: current directory)
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build()?.install(job)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Trace(a) => {
            let (cfg, _) = RunConfig::resolve(&a.common)?;
            in_pool(cfg.workers, || commands::cmd_trace(&cfg))
        }
        Command::Scan(a) => {
            let (cfg, file) = RunConfig::resolve(&a.common)?;
            in_pool(cfg.workers, || commands::cmd_scan(&cfg, &file, a.sweep, a.values))
        }
        Command::Figures(a) => {
            let (cfg, file) = RunConfig::resolve(&a.common)?;
            let paths = in_pool(cfg.workers, || commands::cmd_figures(&cfg, &file, a.output_dir))?;
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Selftest(a) => {
            let common = CommonArgs { workers: a.workers, ..CommonArgs::default() };
            let (cfg, _) = RunConfig::resolve(&common)?;
            in_pool(cfg.workers, selftest::cmd_selftest)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncwitness: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
