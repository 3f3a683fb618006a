//! Static SVG charts: histograms, boxplot, scatter and time-series overlay.
//!
//! Output is plain text with coordinates rounded to 0.01 px, so identical
//! inputs give identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::fs::write_atomic;
use super::IoError;
use crate::evaluation::{descriptive, histogram, trend_slope, EvalError, EvaluationReport};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

const OBSERVED_COLOR: &str = "#1f77b4";
const PREDICTED_COLOR: &str = "#ff7f0e";
const TREND_COLOR: &str = "#2ca02c";

pub const PLOT_FILES: [&str; 5] = [
    "histogram_observed.svg",
    "histogram_predicted.svg",
    "boxplot.svg",
    "scatter.svg",
    "trend.svg",
];

/// Linear map from a data range onto a pixel range. Zero-width data ranges
/// are widened so constant series still render.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = (lo.abs() * 0.05).max(1.0);
            (lo - pad, hi + pad)
        };
        Self { lo, hi, px_lo, px_hi }
    }

    fn px(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..TICKS).map(move |i| self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let mut svg = Self { body };
        svg.text(WIDTH / 2.0, 24.0, title, "middle", 15.0);
        svg
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{extra}/>"#
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
            w.max(0.0),
            h.max(0.0)
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{fill}" fill-opacity="0.8"/>"#
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    fn text(&mut self, x: f64, y: f64, text: &str, anchor: &str, size: f64) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            escape(text)
        );
    }

    fn axes(&mut self, x: &Scale, y: &Scale, x_label: &str, y_label: &str, x_ticks: bool) {
        let (left, bottom) = (MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM);
        self.line(left, MARGIN_TOP, left, bottom, "black", "");
        self.line(left, bottom, WIDTH - MARGIN_RIGHT, bottom, "black", "");
        for v in y.ticks() {
            let py = y.px(v);
            self.line(left - 4.0, py, left, py, "black", "");
            self.text(left - 7.0, py + 4.0, &format!("{v:.0}"), "end", 11.0);
        }
        if x_ticks {
            for v in x.ticks() {
                let px = x.px(v);
                self.line(px, bottom, px, bottom + 4.0, "black", "");
                self.text(px, bottom + 17.0, &format!("{v:.0}"), "middle", 11.0);
            }
        }
        self.text(
            (left + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 15.0,
            x_label,
            "middle",
            12.0,
        );
        let mid = (MARGIN_TOP + bottom) / 2.0;
        let _ = writeln!(
            self.body,
            r#"<text x="18" y="{mid:.2}" text-anchor="middle" transform="rotate(-90 18 {mid:.2})">{}</text>"#,
            escape(y_label)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let x = WIDTH - MARGIN_RIGHT - 150.0;
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = MARGIN_TOP + 8.0 + 16.0 * i as f64;
            self.line(x, y, x + 18.0, y, color, r#" stroke-width="2""#);
            self.text(x + 24.0, y + 4.0, label, "start", 11.0);
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn x_range() -> (f64, f64) {
    (MARGIN_LEFT, WIDTH - MARGIN_RIGHT)
}

fn y_range() -> (f64, f64) {
    (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn histogram_svg(values: &[f64], bins: usize, title: &str, color: &str) -> Result<String, EvalError> {
    let hist = histogram(values, bins)?;
    let (lo, hi) = bounds(values.iter().copied());
    let width = if hist.len() > 1 {
        hist[1].lower_edge - hist[0].lower_edge
    } else {
        0.0
    };
    let max_count = hist.iter().map(|b| b.count).max().unwrap_or(0);
    let x = Scale::new(lo, hi.max(lo + width), x_range().0, x_range().1);
    let y = Scale::new(0.0, max_count as f64, y_range().0, y_range().1);
    let mut svg = Svg::new(title);
    svg.axes(&x, &y, "Flow (PCU per bin)", "Frequency", true);
    let bar_px = if hist.len() > 1 {
        x.px(lo + width) - x.px(lo)
    } else {
        (x_range().1 - x_range().0) / 3.0
    };
    for b in &hist {
        let left = if hist.len() > 1 {
            x.px(b.lower_edge)
        } else {
            x.px(b.lower_edge) - bar_px / 2.0
        };
        let top = y.px(b.count as f64);
        svg.rect(left, top, bar_px, y_range().0 - top, color);
    }
    Ok(svg.finish())
}

pub fn boxplot_svg(observed: &[f64], predicted: &[f64]) -> Result<String, EvalError> {
    let sets = [
        ("Observed", observed, OBSERVED_COLOR),
        ("Predicted", predicted, PREDICTED_COLOR),
    ];
    let stats = [descriptive(observed)?, descriptive(predicted)?];
    let (lo, hi) = bounds(stats.iter().flat_map(|s| [s.min, s.max]));
    let x = Scale::new(0.0, 1.0, x_range().0, x_range().1);
    let y = Scale::new(lo, hi, y_range().0, y_range().1);
    let mut svg = Svg::new("Observed vs predicted flow");
    svg.axes(&x, &y, "", "Flow (PCU per bin)", false);
    let box_w = 90.0;
    for (i, ((label, _, color), s)) in sets.iter().zip(stats.iter()).enumerate() {
        let cx = x.px(0.25 + 0.5 * i as f64);
        svg.line(cx, y.px(s.min), cx, y.px(s.q1), "black", "");
        svg.line(cx, y.px(s.q3), cx, y.px(s.max), "black", "");
        svg.line(
            cx - box_w / 4.0,
            y.px(s.min),
            cx + box_w / 4.0,
            y.px(s.min),
            "black",
            "",
        );
        svg.line(
            cx - box_w / 4.0,
            y.px(s.max),
            cx + box_w / 4.0,
            y.px(s.max),
            "black",
            "",
        );
        svg.rect(cx - box_w / 2.0, y.px(s.q3), box_w, y.px(s.q1) - y.px(s.q3), color);
        svg.line(
            cx - box_w / 2.0,
            y.px(s.median),
            cx + box_w / 2.0,
            y.px(s.median),
            "black",
            r#" stroke-width="2""#,
        );
        svg.text(cx, HEIGHT - MARGIN_BOTTOM + 17.0, label, "middle", 12.0);
    }
    Ok(svg.finish())
}

pub fn scatter_svg(observed: &[f64], predicted: &[f64], report: &EvaluationReport) -> String {
    let (lo, hi) = bounds(observed.iter().chain(predicted).copied());
    let x = Scale::new(lo, hi, x_range().0, x_range().1);
    let y = Scale::new(lo, hi, y_range().0, y_range().1);
    let title = format!(
        "Predicted vs observed (r = {:.3}, R\u{b2} = {:.3})",
        report.pearson_r, report.r_squared
    );
    let mut svg = Svg::new(&title);
    svg.axes(&x, &y, "Observed (PCU)", "Predicted (PCU)", true);
    svg.line(
        x.px(x.lo),
        y.px(x.lo),
        x.px(x.hi),
        y.px(x.hi),
        "gray",
        r#" stroke-dasharray="4 3""#,
    );
    for (&o, &p) in observed.iter().zip(predicted) {
        svg.circle(x.px(o), y.px(p), OBSERVED_COLOR);
    }
    svg.finish()
}

/// Observed and predicted against bin index, with the OLS trend of the
/// observed values.
pub fn trend_svg(observed: &[f64], predicted: &[f64]) -> Result<String, EvalError> {
    let slope = trend_slope(observed)?;
    let n = observed.len();
    let mean_x = (n as f64 - 1.0) / 2.0;
    let mean_y = observed.iter().sum::<f64>() / n as f64;
    let intercept = mean_y - slope * mean_x;
    let trend_end = intercept + slope * (n - 1) as f64;

    let (lo, hi) = bounds(observed.iter().chain(predicted).copied().chain([intercept, trend_end]));
    let x = Scale::new(0.0, (n - 1) as f64, x_range().0, x_range().1);
    let y = Scale::new(lo, hi, y_range().0, y_range().1);
    let mut svg = Svg::new(&format!("Flow over time (trend {slope:+.2} PCU per bin)"));
    svg.axes(&x, &y, "Bin index", "Flow (PCU per bin)", true);
    let pts =
        |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(i, &f)| (x.px(i as f64), y.px(f))).collect() };
    svg.polyline(&pts(observed), OBSERVED_COLOR);
    svg.polyline(&pts(predicted), PREDICTED_COLOR);
    svg.line(
        x.px(0.0),
        y.px(intercept),
        x.px((n - 1) as f64),
        y.px(trend_end),
        TREND_COLOR,
        r#" stroke-width="2" stroke-dasharray="6 3""#,
    );
    svg.legend(&[
        ("Observed", OBSERVED_COLOR),
        ("Predicted", PREDICTED_COLOR),
        ("Observed trend", TREND_COLOR),
    ]);
    Ok(svg.finish())
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Writes the five charts into `out_dir` (which must exist) and returns their
/// paths in [`PLOT_FILES`] order.
pub fn render_plots(
    observed: &[f64],
    predicted: &[f64],
    report: &EvaluationReport,
    histogram_bins: usize,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PlotError> {
    if observed.len() != predicted.len() {
        return Err(EvalError::LengthMismatch(observed.len(), predicted.len()).into());
    }
    let docs = [
        histogram_svg(observed, histogram_bins, "Histogram of observed flow", OBSERVED_COLOR)?,
        histogram_svg(
            predicted,
            histogram_bins,
            "Histogram of predicted flow",
            PREDICTED_COLOR,
        )?,
        boxplot_svg(observed, predicted)?,
        scatter_svg(observed, predicted, report),
        trend_svg(observed, predicted)?,
    ];
    let mut paths = Vec::with_capacity(docs.len());
    for (name, doc) in PLOT_FILES.iter().zip(docs) {
        let path = out_dir.join(name);
        write_atomic(&path, doc.as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}
