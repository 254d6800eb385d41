use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use funnelim::sim::montecarlo::MonteCarloOptions;
use funnelim_cli::commands::{
    cmd_check, cmd_compare, cmd_montecarlo, cmd_run, cmd_sweep, CliResult, OutputOverrides,
};

/// Funnel control with an internal model: check, simulate and compare
/// scenarios described in TOML files.
#[derive(Parser)]
#[command(name = "funnelim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario and print the itemized report.
    Check { config: PathBuf },
    /// Validate, simulate and export a scenario.
    Run {
        config: PathBuf,
        /// CSV output path (overrides the file's output.csv_path).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// SVG output path (overrides the file's output.svg_path).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run two scenarios that differ only in the internal model.
    Compare { first: PathBuf, second: PathBuf },
    /// Tail error and gain statistics for several values of k_r.
    Sweep {
        config: PathBuf,
        #[arg(long = "k-r", value_delimiter = ',', required = true)]
        k_r: Vec<f64>,
    },
    /// Random admissible scenarios with designed controllers.
    Montecarlo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: u64,
        #[arg(long = "k-r")]
        k_r: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        /// Tail error below which a run counts as converged.
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
}

fn dispatch(cli: Cli, out: &mut impl Write) -> CliResult {
    match cli.command {
        Command::Check { config } => cmd_check(&config, out),
        Command::Run { config, csv, svg } => cmd_run(&config, &OutputOverrides { csv, svg }, out),
        Command::Compare { first, second } => cmd_compare(&first, &second, out),
        Command::Sweep { config, k_r } => cmd_sweep(&config, &k_r, out),
        Command::Montecarlo { seed, count, k_r, t_end, h, threshold } => {
            let mut opts = MonteCarloOptions::default();
            opts.k_r = k_r.unwrap_or(opts.k_r);
            opts.t_end = t_end.unwrap_or(opts.t_end);
            opts.h = h.unwrap_or(opts.h);
            cmd_montecarlo(seed, count, &opts, threshold, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match dispatch(cli, &mut out) {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
