use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, ReportError, Result};
use crate::stats::{Histogram, OlsFit};

/// Fixed 800x600 viewport and the plot area inside it.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub width: f64,
    pub height: f64,
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
}

pub const FRAME: Frame = Frame {
    width: 800.0,
    height: 600.0,
    left: 90.0,
    right: 770.0,
    top: 50.0,
    bottom: 530.0,
};

const SERIES_COLORS: [&str; 2] = ["#4a6fa5", "#d1495b"];

#[derive(Debug, Clone, Default)]
pub struct PlotLabels {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Legend entries, one per series.
    pub series: Vec<String>,
}

impl PlotLabels {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, names: &[&str]) -> Self {
        self.series = names.iter().map(|s| s.to_string()).collect();
        self
    }
}

/// Linear map from a data interval to a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    /// Data extent widened by 5% on each side.
    fn padded(min: f64, max: f64, px_lo: f64, px_hi: f64) -> Self {
        let span = max - min;
        let pad = if span > 0.0 {
            0.05 * span
        } else if min != 0.0 {
            0.05 * min.abs()
        } else {
            1.0
        };
        Self {
            lo: min - pad,
            hi: max + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> (Vec<f64>, usize) {
        let step = nice_step((self.hi - self.lo) / 5.0);
        let decimals = if step >= 1.0 {
            0
        } else {
            (-step.log10()).ceil() as usize
        };
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        ((first..=last).map(|k| k as f64 * step).collect(), decimals)
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn open(out: &mut String, labels: &PlotLabels) {
    let f = FRAME;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = f.width,
        h = f.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        f.width, f.height
    );
    let _ = writeln!(
        out,
        r#"<text class="title" x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        f.width / 2.0,
        escape(&labels.title)
    );
}

fn axes(out: &mut String, xs: &Scale, ys: &Scale, labels: &PlotLabels) {
    let f = FRAME;
    let _ = writeln!(
        out,
        r#"<path class="axes" d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        f.left, f.top, f.bottom, f.right
    );
    let (ticks, d) = xs.ticks();
    for t in ticks {
        let px = xs.map(t);
        let _ = writeln!(
            out,
            r#"<path class="tick" d="M{px:.2},{:.2} v5" stroke="black"/><text class="tick-label" x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.bottom,
            f.bottom + 20.0,
            tick_label(t, d)
        );
    }
    let (ticks, d) = ys.ticks();
    for t in ticks {
        let py = ys.map(t);
        let _ = writeln!(
            out,
            r#"<path class="tick" d="M{:.2},{py:.2} h-5" stroke="black"/><text class="tick-label" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            f.left,
            f.left - 8.0,
            py + 4.0,
            tick_label(t, d)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (f.left + f.right) / 2.0,
        f.height - 20.0,
        escape(&labels.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text class="y-label" x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (f.top + f.bottom) / 2.0,
        (f.top + f.bottom) / 2.0,
        escape(&labels.y_label)
    );
}

fn legend(out: &mut String, labels: &PlotLabels) {
    for (i, name) in labels.series.iter().enumerate().take(SERIES_COLORS.len()) {
        let y = FRAME.top + 10.0 + 18.0 * i as f64;
        let x = FRAME.right - 160.0;
        let _ = writeln!(
            out,
            r#"<g class="legend"><rect x="{x:.2}" y="{y:.2}" width="12" height="12" fill="{}" fill-opacity="0.6"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            SERIES_COLORS[i],
            x + 18.0,
            y + 10.0,
            escape(name)
        );
    }
}

fn equation(fit: &OlsFit) -> String {
    let sign = if fit.intercept < 0.0 { '-' } else { '+' };
    format!(
        "y = {:.3}x {sign} {:.1}  (R\u{b2} = {:.3})",
        fit.slope,
        fit.intercept.abs(),
        fit.r_squared
    )
}

/// Scatter plot with an optional regression line across the x-range.
pub fn scatter_svg(points: &[(f64, f64)], fit: Option<&OlsFit>, labels: &PlotLabels) -> Result<String> {
    if points.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(ReportError::NonFiniteInput);
    }
    let x_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let line = fit.map(|f| {
        (
            (x_min, f.intercept + f.slope * x_min),
            (x_max, f.intercept + f.slope * x_max),
        )
    });
    let ys_extent = points
        .iter()
        .map(|p| p.1)
        .chain(line.iter().flat_map(|(a, b)| [a.1, b.1]));
    let y_min = ys_extent.clone().fold(f64::INFINITY, f64::min);
    let y_max = ys_extent.fold(f64::NEG_INFINITY, f64::max);

    let xs = Scale::padded(x_min, x_max, FRAME.left, FRAME.right);
    let ys = Scale::padded(y_min, y_max, FRAME.bottom, FRAME.top);

    let mut out = String::new();
    open(&mut out, labels);
    axes(&mut out, &xs, &ys, labels);
    for &(x, y) in points {
        let _ = writeln!(
            out,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            xs.map(x),
            ys.map(y),
            SERIES_COLORS[0]
        );
    }
    if let (Some(f), Some((a, b))) = (fit, line) {
        let _ = writeln!(
            out,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/>"#,
            xs.map(a.0),
            ys.map(a.1),
            xs.map(b.0),
            ys.map(b.1),
            SERIES_COLORS[1]
        );
        let _ = writeln!(
            out,
            r#"<text class="equation" x="{:.2}" y="{:.2}">{}</text>"#,
            FRAME.left + 10.0,
            FRAME.top + 20.0,
            escape(&equation(f))
        );
    }
    legend(&mut out, labels);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_scatter(
    points: &[(f64, f64)],
    fit: Option<&OlsFit>,
    labels: &PlotLabels,
    path: impl AsRef<Path>,
) -> Result<()> {
    let svg = scatter_svg(points, fit, labels)?;
    write_file(path.as_ref(), svg.as_bytes())
}

/// Bar chart of bin counts; `overlay` is drawn as a second, translucent series.
pub fn histogram_svg(h: &Histogram, overlay: Option<&Histogram>, labels: &PlotLabels) -> Result<String> {
    if h.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let series: Vec<&Histogram> = std::iter::once(h).chain(overlay).collect();
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut c_max = 0usize;
    for s in &series {
        for (&k, &c) in &s.counts {
            let (lo, hi) = s.edges(k);
            x_min = x_min.min(lo);
            x_max = x_max.max(hi);
            c_max = c_max.max(c);
        }
    }
    let xs = Scale::padded(x_min, x_max, FRAME.left, FRAME.right);
    let ys = Scale {
        lo: 0.0,
        hi: c_max as f64 * 1.05,
        px_lo: FRAME.bottom,
        px_hi: FRAME.top,
    };

    let mut out = String::new();
    open(&mut out, labels);
    axes(&mut out, &xs, &ys, labels);
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="series series-{i}">"#);
        for (&k, &c) in &s.counts {
            let (lo, hi) = s.edges(k);
            let x = xs.map(lo);
            let top = ys.map(c as f64);
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-bin="{k}" data-count="{c}" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="{}" stroke="black" stroke-width="0.5"/>"#,
                xs.map(hi) - x,
                FRAME.bottom - top,
                SERIES_COLORS[i],
                if i == 0 { "0.7" } else { "0.45" }
            );
        }
        out.push_str("</g>\n");
    }
    legend(&mut out, labels);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_histogram(
    h: &Histogram,
    overlay: Option<&Histogram>,
    labels: &PlotLabels,
    path: impl AsRef<Path>,
) -> Result<()> {
    let svg = histogram_svg(h, overlay, labels)?;
    write_file(path.as_ref(), svg.as_bytes())
}
