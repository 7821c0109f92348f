//! Deterministic rendering of experiment results: fixed 12-significant-digit
//! number formatting, CSV tables (RFC-4180-style quoting), self-contained
//! SVG line charts, and the run manifest.  Everything here is a pure
//! function of its inputs so identical runs produce byte-identical files.

use crate::discrete::DiscreteDomain;
use crate::harness::{EtaReport, LscReport, SweepReport};
use serde::{Deserialize, Serialize};

/// Format with exactly 12 significant digits.  Fixed-point notation for
/// decimal exponents in `[-4, 11]`, scientific (`d.ddddddddddde±k`)
/// outside that range.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.11e}", x);
    let (mant, exp) = s.split_once('e').expect("e-notation");
    let exp: i32 = exp.parse().expect("exponent parses");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 12);
    let body = if (-4..=11).contains(&exp) {
        if exp >= 0 {
            let e = exp as usize;
            let int = &digits[..=e];
            let frac = &digits[e + 1..];
            if frac.is_empty() {
                int.to_string()
            } else {
                format!("{int}.{frac}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        }
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exp)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// RFC-4180-style quoting: fields containing commas, quotes, or line
/// breaks are wrapped in double quotes with inner quotes doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row (newline-terminated).
pub fn csv_row(fields: &[String]) -> String {
    let mut out = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    out
}

/// CSV for an ε sweep: one row per eps.
pub fn sweep_csv(rep: &SweepReport) -> String {
    let mut out = String::from("eps,h,raw_modulus,eps_times_modulus,lower_bound,gap\n");
    for r in &rep.rows {
        out.push_str(&csv_row(&[
            fmt12(r.eps),
            fmt12(r.h),
            fmt12(r.raw_modulus),
            fmt12(r.eps_times_modulus),
            fmt12(r.lower_bound),
            fmt12(r.gap),
        ]));
    }
    out
}

/// CSV for an η sweep: one row per eta.
pub fn eta_csv(rep: &EtaReport) -> String {
    let mut out = String::from("eta,restricted_modulus,gap\n");
    for r in &rep.rows {
        out.push_str(&csv_row(&[
            fmt12(r.eta),
            fmt12(r.restricted_modulus),
            fmt12(r.gap),
        ]));
    }
    out
}

/// CSV for the lsc approximation: one row per n.
pub fn lsc_csv(rep: &LscReport) -> String {
    let mut out = String::from("n,integral,abs_diff\n");
    for r in &rep.rows {
        out.push_str(&csv_row(&[fmt12(r.n), fmt12(r.integral), fmt12(r.abs_diff)]));
    }
    out
}

/// One row of the asymptotic-defect table for triples `(0, w2, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticsRow {
    pub w2: f64,
    pub modulus: f64,
    /// `L/π + (2/π)·log 4`, the Liouville estimate of the modulus.
    pub liouville_estimate: f64,
    pub defect: f64,
}

/// CSV for the asymptotics table.
pub fn asymptotics_csv(rows: &[AsymptoticsRow]) -> String {
    let mut out = String::from("w2,modulus,liouville_estimate,defect\n");
    for r in rows {
        out.push_str(&csv_row(&[
            fmt12(r.w2),
            fmt12(r.modulus),
            fmt12(r.liouville_estimate),
            fmt12(r.defect),
        ]));
    }
    out
}

/// CSV of a node density: one row per grid node.
pub fn density_csv(dd: &DiscreteDomain, rho: &[f64]) -> String {
    let mut out = String::from("x,y,rho\n");
    for id in 0..dd.n_nodes() as u32 {
        let (x, y) = dd.xy(id);
        out.push_str(&csv_row(&[
            fmt12(x),
            fmt12(y),
            fmt12(rho[id as usize]),
        ]));
    }
    out
}

/// A named polyline for [`line_chart`].
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Chart frame and scales.
#[derive(Debug, Clone, Copy)]
pub struct ChartSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Log₁₀ x-axis (all x must be positive).
    pub log_x: bool,
    /// Optional horizontal reference line.
    pub target: Option<f64>,
}

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 480.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 58.0;
const PALETTE: [&str; 4] = ["#1f6fb4", "#c33d3d", "#2e8b57", "#8456b0"];

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (0.01..10000.0).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a deterministic, self-contained SVG line chart.
///
/// Panics if a series is empty or if `log_x` is requested with
/// non-positive x values (programming errors, not data errors).
pub fn line_chart(spec: &ChartSpec, series: &[Series]) -> String {
    assert!(!series.is_empty() && series.iter().all(|s| !s.points.is_empty()));
    let tx = |x: f64| -> f64 {
        if spec.log_x {
            assert!(x > 0.0, "log x-axis needs positive x");
            x.log10()
        } else {
            x
        }
    };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in s.points {
            let x = tx(x);
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if let Some(t) = spec.target {
        ymin = ymin.min(t);
        ymax = ymax.max(t);
    }
    if xmax - xmin < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let ypad = 0.06 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    let px = |x: f64| MARGIN_L + (tx(x) - xmin) / (xmax - xmin) * (CHART_W - MARGIN_L - MARGIN_R);
    let py = |y: f64| CHART_H - MARGIN_B - (y - ymin) / (ymax - ymin) * (CHART_H - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" \
         viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"Helvetica,Arial,sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{CHART_W}\" height=\"{CHART_H}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        CHART_W / 2.0,
        esc(spec.title)
    ));

    // Axes.
    let (x0, y0) = (MARGIN_L, CHART_H - MARGIN_B);
    let (x1, y1) = (CHART_W - MARGIN_R, MARGIN_T);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#333333\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#333333\"/>\n"
    ));

    // Ticks: five per axis in transformed coordinates.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xt = xmin + f * (xmax - xmin);
        let xv = if spec.log_x { 10f64.powf(xt) } else { xt };
        let xp = MARGIN_L + f * (CHART_W - MARGIN_L - MARGIN_R);
        svg.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{y0}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"#333333\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            y0 + 19.0,
            esc(&tick_label(xv))
        ));
        let yv = ymin + f * (ymax - ymin);
        let yp = py(yv);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp:.2}\" x2=\"{x0}\" y2=\"{yp:.2}\" stroke=\"#333333\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            x0 - 9.0,
            yp + 4.0,
            esc(&tick_label(yv))
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + CHART_W - MARGIN_R) / 2.0,
        CHART_H - 14.0,
        esc(spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {})\">{}</text>\n",
        (MARGIN_T + CHART_H - MARGIN_B) / 2.0,
        (MARGIN_T + CHART_H - MARGIN_B) / 2.0,
        esc(spec.y_label)
    ));

    // Target line.
    if let Some(t) = spec.target {
        let yp = py(t);
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{yp:.2}\" x2=\"{x1}\" y2=\"{yp:.2}\" \
             stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" \
             fill=\"#666666\">target {}</text>\n",
            x1,
            yp - 5.0,
            esc(&tick_label(t))
        ));
    }

    // Series.
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        for &(x, y) in s.points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(x),
                py(y)
            ));
        }
        // Legend entry.
        let lx = CHART_W - MARGIN_R - 150.0;
        let ly = MARGIN_T + 8.0 + 18.0 * si as f64;
        svg.push_str(&format!(
            "<rect x=\"{lx}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            ly - 10.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{ly}\" font-size=\"12\">{}</text>\n",
            lx + 17.0,
            esc(s.name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reproducibility record written next to every experiment's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// The subcommand and its arguments as invoked.
    pub command: String,
    /// Toolkit version.
    pub version: String,
    /// RNG seed in effect.
    pub seed: u64,
    /// SHA-256 of the configuration input (hex), or of the canonicalized
    /// argument list when no config file is involved.
    pub config_hash: String,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
