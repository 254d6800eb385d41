//! Stacked time plots of a trace as a standalone SVG document.

use std::fmt::Write as _;

use funnelim::sim::Sample;
use funnelim::SimulationTrace;
use nalgebra::DVector;

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 150.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 28.0;
const GAP: f64 = 40.0;
/// Buckets per series; each bucket contributes its minimum and maximum.
const BUCKETS: usize = 1200;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    label: String,
    values: Vec<f64>,
    color: &'static str,
    dashed: bool,
}

struct Panel {
    title: String,
    series: Vec<Series>,
    /// Symmetric band `±band` drawn behind the series.
    band: Option<Vec<f64>>,
    /// Fixed vertical range; otherwise fitted to the series.
    range: Option<(f64, f64)>,
}

/// Envelope-preserving decimation: indices of the min and max of each bucket.
fn decimate(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    if n <= 2 * BUCKETS {
        return (0..n).collect();
    }
    let mut idx = Vec::with_capacity(2 * BUCKETS + 1);
    for b in 0..BUCKETS {
        let (lo, hi) = (b * n / BUCKETS, ((b + 1) * n / BUCKETS).max(b * n / BUCKETS + 1));
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if values[i] < values[imin] {
                imin = i;
            }
            if values[i] > values[imax] {
                imax = i;
            }
        }
        idx.push(imin.min(imax));
        if imin != imax {
            idx.push(imin.max(imax));
        }
    }
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

fn fitted_range(panel: &Panel) -> (f64, f64) {
    if let Some(r) = panel.range {
        return r;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in panel.series.iter().flat_map(|s| &s.values).filter(|v| v.is_finite()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-12 * (1.0 + hi.abs()));
    (lo - pad, hi + pad)
}

fn error_panel(title: String, trace: &SimulationTrace<f64>, level: usize) -> Panel {
    let scalar = trace.m == 1;
    let values: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| if scalar { s.errors[(0, level)] } else { s.errors.column(level).norm() })
        .collect();
    let psi: Vec<f64> = trace.samples.iter().map(|s| s.psi[level]).collect();
    let max_err = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_psi = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let lim = 1.1 * max_err.max(if min_psi.is_finite() { min_psi } else { max_err }).max(1e-12);
    let band: Vec<f64> = psi.iter().map(|p| p.min(lim)).collect();
    let label = if scalar { format!("e{}", level + 1) } else { format!("|e{}|", level + 1) };
    Panel {
        title,
        series: vec![Series { label, values, color: COLORS[0], dashed: false }],
        band: Some(band),
        range: Some(if scalar { (-lim, lim) } else { (0.0, lim) }),
    }
}

fn vector_series(
    name: &str,
    trace: &SimulationTrace<f64>,
    pick: impl Fn(&Sample<f64>) -> &DVector<f64>,
) -> Vec<Series> {
    (0..trace.m)
        .map(|j| Series {
            label: if trace.m == 1 { name.to_string() } else { format!("{name}_{}", j + 1) },
            values: trace.samples.iter().map(|s| pick(s)[j]).collect(),
            color: COLORS[j % COLORS.len()],
            dashed: false,
        })
        .collect()
}

fn panels(trace: &SimulationTrace<f64>) -> Vec<Panel> {
    let mut tracking = vector_series("y", trace, |s| &s.y);
    for (j, s) in vector_series("y_ref", trace, |s| &s.y_ref).into_iter().enumerate() {
        tracking.push(Series { color: COLORS[(j + 1) % COLORS.len()], dashed: true, ..s });
    }
    let r = trace.r;
    let mut out = vec![
        Panel { title: "output and reference".into(), series: tracking, band: None, range: None },
        error_panel("tracking error e1 and funnel".into(), trace, 0),
        error_panel(format!("cascade error e{r} and funnel"), trace, r - 1),
        Panel {
            title: "gain k".into(),
            series: vec![Series {
                label: "k".into(),
                values: trace.samples.iter().map(|s| s.k).collect(),
                color: COLORS[0],
                dashed: false,
            }],
            band: None,
            range: None,
        },
        Panel { title: "funnel input w".into(), series: vector_series("w", trace, |s| &s.w), band: None, range: None },
        Panel { title: "plant input u".into(), series: vector_series("u", trace, |s| &s.u), band: None, range: None },
    ];
    if r == 1 {
        out[2].title = "tracking error e1 and funnel (single level)".into();
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Six panels: output/reference, `e_1` with its funnel, `e_r` with its
/// funnel, the gain, the funnel input and the plant input.
pub fn render(trace: &SimulationTrace<f64>) -> String {
    let times: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let panels = panels(trace);
    let height = TOP + panels.len() as f64 * (PANEL_HEIGHT + GAP) + 10.0;
    let t_max = times.last().copied().unwrap_or(0.0).max(trace.h);
    let plot_w = WIDTH - LEFT - RIGHT;
    let x_of = |t: f64| LEFT + plot_w * t / t_max;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let top = TOP + p as f64 * (PANEL_HEIGHT + GAP);
        let (lo, hi) = fitted_range(panel);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let y_of = |v: f64| top + PANEL_HEIGHT * (1.0 - ((v.clamp(lo, hi) - lo) / span));
        let _ = writeln!(svg, r#"<text x="{LEFT}" y="{:.1}" font-weight="bold">{}</text>"#, top - 6.0, panel.title);
        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT}" y="{top:.1}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="#888"/>"##
        );
        for (v, anchor_y) in [(hi, top + 10.0), (lo, top + PANEL_HEIGHT)] {
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{anchor_y:.1}" text-anchor="end">{}</text>"#, LEFT - 4.0, fmt_tick(v));
        }
        if lo < 0.0 && hi > 0.0 {
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#ccc"/>"##,
                LEFT + plot_w,
                y = y_of(0.0)
            );
        }
        if let Some(band) = &panel.band {
            let idx = decimate(band);
            let upper: Vec<String> = idx.iter().map(|&i| format!("{:.1},{:.1}", x_of(times[i]), y_of(band[i]))).collect();
            let lower: Vec<String> = idx
                .iter()
                .rev()
                .map(|&i| format!("{:.1},{:.1}", x_of(times[i]), y_of(if lo < 0.0 { -band[i] } else { 0.0 })))
                .collect();
            let _ = writeln!(
                svg,
                r##"<polygon points="{} {}" fill="#f2c94c" fill-opacity="0.35" stroke="#c9a227" stroke-width="0.8"/>"##,
                upper.join(" "),
                lower.join(" ")
            );
        }
        for (k, s) in panel.series.iter().enumerate() {
            let idx = decimate(&s.values);
            let pts: Vec<String> = idx
                .iter()
                .filter(|&&i| s.values[i].is_finite())
                .map(|&i| format!("{:.1},{:.1}", x_of(times[i]), y_of(s.values[i])))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1"{dash}/>"#,
                pts.join(" "),
                s.color
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" fill="{}" text-anchor="end">{}</text>"#,
                LEFT + plot_w - 4.0,
                top + 14.0 + 13.0 * k as f64,
                s.color,
                s.label
            );
        }
    }
    let bottom = TOP + panels.len() as f64 * (PANEL_HEIGHT + GAP) - GAP + 16.0;
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="{bottom:.1}">0</text>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{bottom:.1}" text-anchor="end">t = {} s</text>"#,
        LEFT + plot_w,
        fmt_tick(t_max)
    );
    svg.push_str("</svg>\n");
    svg
}
