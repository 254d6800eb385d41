//! Subcommand implementations. Each returns the process exit status and
//! writes its report to the given sink.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use funnelim::sim::montecarlo::{run_suite, MonteCarloOptions};
use funnelim::sim::{kr_sweep, simulate, Termination};
use funnelim::SimulationTrace;
use thiserror::Error;

use crate::config::{ConfigError, LoadedConfig, Prepared};
use crate::report::{check, metrics_text, tail_gain_stats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Violation = 3,
    Config = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Config(_) => Exit::Config,
            Self::Io { .. } => Exit::Io,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

pub type CliResult = Result<Exit, CliError>;

/// Output overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct OutputOverrides {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

fn load(path: &Path) -> Result<(LoadedConfig, Prepared), CliError> {
    let loaded = LoadedConfig::load(path)?;
    let prepared = loaded.config.prepare()?;
    Ok((loaded, prepared))
}

pub fn cmd_check(path: &Path, out: &mut impl Write) -> CliResult {
    let (_, prepared) = load(path)?;
    let outcome = check(&prepared);
    write!(out, "{}", outcome.text).map_err(io_err("stdout"))?;
    Ok(if outcome.passed { Exit::Ok } else { Exit::Validation })
}

fn run_exit(trace: &SimulationTrace<f64>) -> Exit {
    match trace.status {
        Termination::Completed => Exit::Ok,
        _ => Exit::Violation,
    }
}

/// Validated simulation; `None` (after printing the report) when checks fail.
fn checked_run(prepared: &Prepared, out: &mut impl Write) -> Result<Option<SimulationTrace<f64>>, CliError> {
    let outcome = check(prepared);
    write!(out, "{}", outcome.text).map_err(io_err("stdout"))?;
    if !outcome.passed {
        return Ok(None);
    }
    match simulate(&prepared.scenario) {
        Ok(trace) => Ok(Some(trace)),
        Err(e) => {
            writeln!(out, "simulation failed: {e}").map_err(io_err("stdout"))?;
            Ok(None)
        }
    }
}

pub fn write_csv(path: &Path, trace: &SimulationTrace<f64>, precision: usize) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(format!("cannot create {}", path.display())))?;
    let mut w = BufWriter::new(file);
    crate::csv::write_trace(&mut w, trace, precision)
        .and_then(|()| w.flush())
        .map_err(io_err(format!("cannot write {}", path.display())))
}

pub fn write_svg(path: &Path, trace: &SimulationTrace<f64>) -> Result<(), CliError> {
    std::fs::write(path, crate::svg::render(trace)).map_err(io_err(format!("cannot write {}", path.display())))
}

pub fn cmd_run(path: &Path, overrides: &OutputOverrides, out: &mut impl Write) -> CliResult {
    let (loaded, prepared) = load(path)?;
    let Some(trace) = checked_run(&prepared, out)? else {
        return Ok(Exit::Validation);
    };
    let csv = overrides.csv.clone().or_else(|| loaded.csv_path());
    let svg = overrides.svg.clone().or_else(|| loaded.svg_path());
    if let Some(p) = &csv {
        write_csv(p, &trace, loaded.config.precision())?;
    }
    if let Some(p) = &svg {
        write_svg(p, &trace)?;
    }
    let (_, text) = metrics_text(&trace);
    let mut o = || -> io::Result<()> {
        write!(out, "{text}")?;
        if let Some(p) = &csv {
            writeln!(out, "csv: {}{}", p.display(), if trace.completed() { "" } else { " (partial)" })?;
        }
        if let Some(p) = &svg {
            writeln!(out, "svg: {}", p.display())?;
        }
        Ok(())
    };
    o().map_err(io_err("stdout"))?;
    Ok(run_exit(&trace))
}

/// Sections that must agree between the two sides of a comparison.
fn shared_mismatch(a: &LoadedConfig, b: &LoadedConfig) -> Option<&'static str> {
    let (a, b) = (&a.config, &b.config);
    if a.plant != b.plant {
        Some("plant")
    } else if a.reference != b.reference {
        Some("reference")
    } else if a.controller != b.controller {
        Some("controller")
    } else if a.sim != b.sim {
        Some("sim")
    } else {
        None
    }
}

/// Tail-error ratio from which one side is declared the better tracker.
pub const COMPARE_RATIO_THRESHOLD: f64 = 10.0;

pub fn cmd_compare(first: &Path, second: &Path, out: &mut impl Write) -> CliResult {
    let (la, pa) = load(first)?;
    let (lb, pb) = load(second)?;
    if let Some(section) = shared_mismatch(&la, &lb) {
        return Err(ConfigError::Invalid(format!(
            "[{section}] differs between {} and {}; only the internal model may differ",
            first.display(),
            second.display()
        ))
        .into());
    }
    let mut traces = Vec::new();
    for (path, prepared) in [(first, &pa), (second, &pb)] {
        writeln!(out, "== {}", path.display()).map_err(io_err("stdout"))?;
        match checked_run(prepared, out)? {
            Some(t) => traces.push(t),
            None => return Ok(Exit::Validation),
        }
    }
    let mut text = String::new();
    let mut metrics = Vec::new();
    for (path, trace) in [first, second].iter().zip(&traces) {
        let (m, body) = metrics_text(trace);
        let g = tail_gain_stats(trace);
        text += &format!("== {} (internal model {})\n{body}", path.display(), on_off(trace.with_internal_model));
        text += &format!(
            "tail gain: min {:.6}, max {:.6}, mean {:.6}, std {:.6e}\n",
            g.min, g.max, g.mean, g.std
        );
        metrics.push(m);
    }
    let (ta, tb) = (metrics[0].tail_error, metrics[1].tail_error);
    let ratio = if ta == tb { 1.0 } else { tb / ta };
    text += &format!("tail error ratio (second / first): {ratio:.6e}\n");
    let partial = metrics.iter().any(|m| m.partial);
    let verdict = if partial {
        "inconclusive: a run left its funnel, metrics are partial".to_string()
    } else if ratio >= COMPARE_RATIO_THRESHOLD {
        format!("first configuration tracks better by a factor of {ratio:.1}")
    } else if ratio <= 1.0 / COMPARE_RATIO_THRESHOLD {
        format!("second configuration tracks better by a factor of {:.1}", 1.0 / ratio)
    } else {
        "no significant difference in tail error".to_string()
    };
    text += &format!("verdict: {verdict}\n");
    write!(out, "{text}").map_err(io_err("stdout"))?;
    Ok(traces.iter().map(run_exit).max().unwrap_or(Exit::Ok))
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

pub fn cmd_sweep(path: &Path, k_r: &[f64], out: &mut impl Write) -> CliResult {
    let (_, prepared) = load(path)?;
    if k_r.is_empty() {
        return Err(ConfigError::Invalid("--k-r needs at least one value".into()).into());
    }
    let outcome = check(&prepared);
    if !outcome.passed {
        write!(out, "{}", outcome.text).map_err(io_err("stdout"))?;
        return Ok(Exit::Validation);
    }
    let mut exit = Exit::Ok;
    let mut text = format!("{:>12} {:>14} {:>14} {:>14}  {}\n", "k_r", "tail error", "gain max", "gain mean", "status");
    for point in kr_sweep(&prepared.scenario, k_r) {
        match point.metrics {
            Ok(m) => {
                let status = if m.partial {
                    exit = exit.max(Exit::Violation);
                    "partial"
                } else {
                    "completed"
                };
                text += &format!(
                    "{:>12} {:>14.6e} {:>14.6} {:>14.6}  {status}\n",
                    point.k_r, m.tail_error, m.gain_max, m.gain_mean
                );
            }
            Err(e) => {
                exit = exit.max(Exit::Validation);
                text += &format!("{:>12} failed: {e}\n", point.k_r);
            }
        }
    }
    write!(out, "{text}").map_err(io_err("stdout"))?;
    Ok(exit)
}

pub fn cmd_montecarlo(seed: u64, count: u64, opts: &MonteCarloOptions, threshold: f64, out: &mut impl Write) -> CliResult {
    let outcomes = run_suite::<f64>(seed..seed.saturating_add(count), opts);
    let mut exit = Exit::Ok;
    let (mut converged, mut bounded) = (0, 0);
    let mut text = String::new();
    for (seed, outcome) in &outcomes {
        match outcome {
            Ok(o) => {
                let conv = o.metrics.converged(threshold);
                let bounds = o.cascade_bounds_hold();
                converged += usize::from(conv);
                bounded += usize::from(bounds);
                if !bounds {
                    exit = exit.max(Exit::Violation);
                }
                text += &format!(
                    "seed {seed:>6}: m = {}, r = {}, tail error {:.3e}, gain max {:.3}, bounds {}, {}\n",
                    o.m,
                    o.r,
                    o.metrics.tail_error,
                    o.metrics.gain_max,
                    if bounds { "hold" } else { "VIOLATED" },
                    if conv { "converged" } else { "not converged" },
                );
            }
            Err(e) => {
                exit = exit.max(Exit::Validation);
                text += &format!("seed {seed:>6}: failed: {e}\n");
            }
        }
    }
    let n = outcomes.len();
    text += &format!("converged (tail error < {threshold:e}): {converged}/{n}\ncascade bounds hold: {bounded}/{n}\n");
    write!(out, "{text}").map_err(io_err("stdout"))?;
    Ok(exit)
}
