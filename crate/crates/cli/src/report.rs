//! Human-readable check reports and run summaries.

use std::fmt::Write as _;

use funnelim::funnel::sup_ratios;
use funnelim::sim::{tracking_metrics, Termination, TrackingMetrics, ValidationReport};
use funnelim::SimulationTrace;

use crate::config::Prepared;

/// Outcome of validating a prepared scenario.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub passed: bool,
    pub text: String,
    pub report: ValidationReport<f64>,
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", items.join(", "))
}

/// Runs every hypothesis check and itemizes the result.
pub fn check(prepared: &Prepared) -> CheckOutcome {
    let scn = &prepared.scenario;
    let report = scn.validate();
    let cls = &report.classification;
    let mut out = String::new();
    let mut line = |ok: bool, text: String| {
        let _ = writeln!(out, "[{}] {text}", mark(ok));
    };

    line(
        cls.relative_degree.is_some(),
        format!(
            "plant n = {}, m = {}: strict relative degree {}",
            scn.plant.n(),
            scn.plant.m(),
            cls.relative_degree.map_or("undefined".into(), |r| r.to_string())
        ),
    );
    line(
        cls.gamma_positive_definite,
        match &cls.gamma {
            Some(g) => format!("high-frequency gain positive definite (min eigenvalue {:.6})", min_sym_eigenvalue(g)),
            None => "high-frequency gain unavailable".into(),
        },
    );
    let zeros: Vec<String> = cls.invariant_zeros.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    let zero_text = match &cls.zeros_diagnostic {
        Some(d) => format!("invariant zeros unavailable: {d}"),
        None => format!("minimum phase, invariant zeros [{}]", zeros.join(", ")),
    };
    line(cls.minimum_phase, zero_text);
    let r = scn.controller.r();
    line(
        cls.relative_degree == Some(r),
        format!("controller has {r} funnel(s) for relative degree {}", cls.relative_degree.unwrap_or(0)),
    );
    line(report.membership, format!("reference annihilated by alpha = {}", scn.reference.alpha()));

    let mut passed = report.passed();
    match (&prepared.synthesis_error, &scn.internal_model) {
        (Some(err), _) => {
            passed = false;
            line(false, format!("internal model: {err}"));
        }
        (None, Some(im)) => {
            let identity = im.transfer_identity_error().unwrap_or(f64::NAN);
            line(
                true,
                format!(
                    "internal model of order {} per channel, beta = {}, transfer identity error {identity:.3e}",
                    im.order(),
                    im.beta
                ),
            );
            line(
                report.alpha_condition.unwrap_or(false),
                "no root of alpha is an invariant zero of the plant".into(),
            );
        }
        (None, None) => {
            let _ = writeln!(out, "[----] internal model disabled");
        }
    }

    let ratios = sup_ratios(&scn.controller);
    if ratios.is_empty() {
        let _ = writeln!(out, "[PASS] K1 holds trivially for a single funnel");
    }
    for (i, ((rate, ratio), margin)) in ratios.iter().zip(&report.k1.margins).enumerate() {
        let _ = writeln!(
            out,
            "[{}] K1 level {}: k = {}, rate sup {rate:.6}, ratio sup {ratio:.6}, margin {margin:.6}",
            mark(*margin > 0.0),
            i + 1,
            scn.controller.k()[i],
        );
    }
    match &report.k2 {
        Some(k2) => {
            for (i, occ) in k2.occupancies.iter().enumerate() {
                let _ = writeln!(out, "[{}] K2 level {}: initial occupancy {occ:.6}", mark(*occ < 1.0), i + 1);
            }
        }
        None => {
            let _ = writeln!(out, "[FAIL] K2: initial errors unavailable");
        }
    }
    if let Some(eps) = &report.epsilon {
        if !eps.is_empty() {
            let _ = writeln!(out, "epsilon bounds {}", list(eps));
        }
    }
    if !passed {
        let _ = writeln!(out, "issues:");
        for issue in prepared.synthesis_error.iter().chain(&report.issues) {
            let _ = writeln!(out, "  - {issue}");
        }
    }
    let _ = writeln!(out, "check: {}", mark(passed));
    CheckOutcome { passed, text: out, report }
}

fn min_sym_eigenvalue(g: &nalgebra::DMatrix<f64>) -> f64 {
    let sym = (g + g.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Statistics of the gain `k(t)` over the tail window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn tail_gain_stats(trace: &SimulationTrace<f64>) -> GainStats {
    let last = trace.samples.last().map_or(0.0, |s| s.t);
    let start = last * (1.0 - funnelim::sim::TAIL_FRACTION) - trace.h / 2.0;
    let tail: Vec<f64> = trace.samples.iter().filter(|s| s.t >= start).map(|s| s.k).collect();
    if tail.is_empty() {
        return GainStats { min: 0.0, max: 0.0, mean: 0.0, std: 0.0 };
    }
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let var = tail.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / n;
    GainStats {
        min: tail.iter().copied().fold(f64::INFINITY, f64::min),
        max: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std: var.sqrt(),
    }
}

pub fn termination_text(status: &Termination) -> String {
    match status {
        Termination::Completed => "completed".into(),
        Termination::FunnelViolation(v) => v.to_string(),
        Termination::NonFinite { t } => format!("state became non-finite at t = {t:.6} s"),
    }
}

pub fn metrics_text(trace: &SimulationTrace<f64>) -> (TrackingMetrics<f64>, String) {
    let m = tracking_metrics(trace);
    let mut out = String::new();
    let _ = writeln!(out, "status: {}", termination_text(&trace.status));
    if m.partial {
        let _ = writeln!(out, "metrics cover the recorded part only ({} samples)", m.samples);
    }
    let _ = writeln!(out, "samples: {}", m.samples);
    let _ = writeln!(out, "max occupancy: {}", list(&m.max_occupancy));
    let _ = writeln!(out, "tail error: {:.6e}", m.tail_error);
    let _ = writeln!(out, "gain: max {:.6}, mean {:.6}", m.gain_max, m.gain_mean);
    let _ = writeln!(out, "max input norm: {:.6}", m.max_input_norm);
    (m, out)
}
