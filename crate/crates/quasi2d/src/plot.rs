//! Deterministic SVG plots for experiment reports.
//!
//! Fixed canvas, fixed palette, no timestamps or environment-dependent
//! content: identical input renders byte-identical output, so plots can be
//! diffed in CI like any other artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The plot layouts the reporter knows how to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Tail statistic against size, both axes logarithmic.
    DecayLoglog,
    /// Path certificates against the path parameter, linear axes.
    CertificateVsT,
    /// Quadrature residual against node count, both axes logarithmic.
    ResidualVsM,
    /// Distribution of a ratio statistic, drawn as bars.
    RatioHistogram,
}

/// One named trace.
#[derive(Debug, Clone, Serialize)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        PlotSeries { name: name.into(), points }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 56.0;
/// Value substituted for nonpositive data on a logarithmic axis.
const LOG_FLOOR: f64 = 1e-16;

const PALETTE: [&str; 8] = [
    "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#117a65", "#566573", "#a04000",
];

fn axis_labels(kind: PlotKind) -> (&'static str, &'static str, bool, bool) {
    match kind {
        PlotKind::DecayLoglog => ("size", "tail statistic", true, true),
        PlotKind::CertificateVsT => ("t", "certificate value", false, false),
        PlotKind::ResidualVsM => ("nodes M", "residual", true, true),
        PlotKind::RatioHistogram => ("ratio", "count", false, false),
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Forward transform for one axis: log10 with flooring, or identity.
fn fwd(v: f64, log: bool) -> f64 {
    if log {
        v.max(LOG_FLOOR).log10()
    } else {
        v
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    xlog: bool,
    ylog: bool,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        let t = fwd(x, self.xlog);
        let span = (self.x1 - self.x0).max(1e-300);
        MARGIN_L + (t - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        let t = fwd(y, self.ylog);
        let span = (self.y1 - self.y0).max(1e-300);
        HEIGHT - MARGIN_B - (t - self.y0) / span * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

/// Render a plot as an SVG document string.
pub fn render_plot(kind: PlotKind, title: &str, series: &[PlotSeries]) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Config {
            key: "series".into(),
            message: "plot series must contain at least one point".into(),
        });
    }
    let (xlabel, ylabel, xlog, ylog) = axis_labels(kind);

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(fwd(x, xlog));
            ys.push(fwd(y, ylog));
        }
    }
    let (mut x0, mut x1) = bounds(&xs);
    let (mut y0, mut y1) = bounds(&ys);
    if kind == PlotKind::RatioHistogram {
        y0 = 0.0;
    }
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let f = Frame { x0, x1, y0, y1, xlog, ylog };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    );
    let _ = write!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"26\" font-size=\"16\" fill=\"#222222\">{}</text>\n",
        MARGIN_L,
        escape(title)
    );

    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"#333333\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"#333333\"/>\n",
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B,
    );

    // Ticks: five per axis in the transformed coordinates.
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let vx = if xlog { 10f64.powf(fx) } else { fx };
        let px = MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) * k as f64 / 4.0;
        let _ = write!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{b:.1}\" x2=\"{px:.1}\" y2=\"{b2:.1}\" stroke=\"#333333\"/>\n\
             <text x=\"{px:.1}\" y=\"{ty:.1}\" font-size=\"11\" fill=\"#222222\" \
             text-anchor=\"middle\">{}</text>\n",
            tick_label(vx),
            b = HEIGHT - MARGIN_B,
            b2 = HEIGHT - MARGIN_B + 5.0,
            ty = HEIGHT - MARGIN_B + 18.0,
        );
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let vy = if ylog { 10f64.powf(fy) } else { fy };
        let py = HEIGHT - MARGIN_B - (HEIGHT - MARGIN_T - MARGIN_B) * k as f64 / 4.0;
        let _ = write!(
            svg,
            "<line x1=\"{l2:.1}\" y1=\"{py:.1}\" x2=\"{l:.1}\" y2=\"{py:.1}\" stroke=\"#333333\"/>\n\
             <text x=\"{tx:.1}\" y=\"{py2:.1}\" font-size=\"11\" fill=\"#222222\" \
             text-anchor=\"end\">{}</text>\n",
            tick_label(vy),
            l = MARGIN_L,
            l2 = MARGIN_L - 5.0,
            tx = MARGIN_L - 8.0,
            py2 = py + 4.0,
        );
    }

    // Axis labels.
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" fill=\"#222222\" \
         text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = write!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" font-size=\"13\" fill=\"#222222\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        escape(ylabel)
    );

    // Data.
    if kind == PlotKind::RatioHistogram {
        render_bars(&mut svg, &f, series);
    } else {
        render_traces(&mut svg, &f, series);
    }

    // Legend, top right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_T + 14.0 + 16.0 * i as f64;
        let _ = write!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{ry:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{tx:.1}\" y=\"{ty:.1}\" font-size=\"11\" fill=\"#222222\">{}</text>\n",
            escape(&s.name),
            x = WIDTH - MARGIN_R - 170.0,
            ry = y - 9.0,
            tx = WIDTH - MARGIN_R - 155.0,
            ty = y,
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_traces(svg: &mut String, f: &Frame, series: &[PlotSeries]) {
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() > 1 {
            let mut d = String::new();
            for (k, &(x, y)) in s.points.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2}",
                    if k == 0 { "M" } else { " L" },
                    f.sx(x),
                    f.sy(y)
                );
            }
            let _ = write!(
                svg,
                "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
            );
        }
        for &(x, y) in &s.points {
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                f.sx(x),
                f.sy(y)
            );
        }
    }
}

fn render_bars(svg: &mut String, f: &Frame, series: &[PlotSeries]) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // Bar half-width: 40% of the smallest center gap, or a fixed slice
        // of the frame for a single bar.
        let mut gap = f64::INFINITY;
        for w in s.points.windows(2) {
            gap = gap.min((w[1].0 - w[0].0).abs());
        }
        let half = if gap.is_finite() {
            gap * 0.4
        } else {
            (f.x1 - f.x0).max(1e-12) * 0.05
        };
        let base = f.sy(if f.ylog { LOG_FLOOR } else { 0.0 });
        for &(x, y) in &s.points {
            let xl = f.sx(x - half);
            let xr = f.sx(x + half);
            let yt = f.sy(y);
            let _ = write!(
                svg,
                "<rect x=\"{xl:.2}\" y=\"{yt:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
                 fill=\"{color}\" fill-opacity=\"0.8\"/>\n",
                w = (xr - xl).max(1.0),
                h = (base - yt).max(0.0),
            );
        }
    }
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn pad(lo: &mut f64, hi: &mut f64) {
    if *hi - *lo < 1e-12 {
        *lo -= 0.5;
        *hi += 0.5;
    } else {
        let m = (*hi - *lo) * 0.05;
        *lo -= m;
        *hi += m;
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render and write a plot file.
pub fn emit_plot(path: &Path, kind: PlotKind, title: &str, series: &[PlotSeries]) -> Result<()> {
    let svg = render_plot(kind, title, series)?;
    fs::write(path, svg)?;
    Ok(())
}
