//! Minimal SVG 1.1 figures: ECDF overlays and gray-scale heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::EcdfView;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;
const TICKS: usize = 5;
const MAX_STEPS: usize = 2000;

pub enum Figure {
    /// Empirical step curve against a reference curve given as `(x, F(x))`.
    EcdfOverlay {
        sample: EcdfView,
        reference: Vec<(f64, f64)>,
        x_label: String,
    },
    /// Row-major `bins × bins` grid over `[−L, L]²`, row 0 at the bottom.
    Heatmap {
        values: Vec<f64>,
        bins: usize,
        half_width: f64,
    },
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, b, t) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(out, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#);
        let _ = writeln!(out, r#"<line x1="{l}" y1="{b}" x2="{l}" y2="{t}" stroke="black"/>"#);
        for i in 0..TICKS {
            let f = i as f64 / (TICKS - 1) as f64;
            let xv = self.x0 + f * (self.x1 - self.x0);
            let yv = self.y0 + f * (self.y1 - self.y0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{xp:.2}" y1="{b}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 20.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{yp:.2}" x2="{l}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                yp + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 20.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn ecdf_svg(sample: &EcdfView, reference: &[(f64, f64)], x_label: &str) -> Result<String> {
    let v = sample.values();
    let lo = v[0].min(reference.first().map_or(v[0], |p| p.0));
    let hi = v[v.len() - 1].max(reference.last().map_or(v[0], |p| p.0));
    let (x0, x1) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let frame = Frame { x0, x1, y0: 0.0, y1: 1.0 };
    let mut out = String::new();
    header(&mut out);
    frame.axes(&mut out, x_label, "CDF");

    let n = v.len();
    let stride = n.div_ceil(MAX_STEPS).max(1);
    let mut d = format!("M{:.2},{:.2}", frame.px(x0), frame.py(0.0));
    let mut i = stride - 1;
    loop {
        let i_clamped = i.min(n - 1);
        let x = frame.px(v[i_clamped]);
        let _ = write!(d, " H{x:.2}");
        let level = (i_clamped + 1) as f64 / n as f64;
        let _ = write!(d, " V{:.2}", frame.py(level));
        if i_clamped == n - 1 {
            break;
        }
        i += stride;
    }
    let _ = write!(d, " H{:.2}", frame.px(x1));
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#);

    let mut r = String::new();
    for (j, &(x, f)) in reference.iter().enumerate() {
        let _ = write!(r, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, frame.px(x), frame.py(f));
    }
    let _ = writeln!(
        out,
        r#"<path d="{r}" fill="none" stroke="red" stroke-width="1.5" stroke-dasharray="6,3"/>"#
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn heatmap_svg(values: &[f64], bins: usize, half_width: f64) -> Result<String> {
    if values.len() != bins * bins {
        return Err(Error::DimensionMismatch(format!(
            "heatmap expects {} cells, got {}",
            bins * bins,
            values.len()
        )));
    }
    let frame = Frame {
        x0: -half_width,
        x1: half_width,
        y0: -half_width,
        y1: half_width,
    };
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let mut out = String::new();
    header(&mut out);
    let cw = (WIDTH - 2.0 * MARGIN) / bins as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / bins as f64;
    for row in 0..bins {
        for col in 0..bins {
            let v = values[row * bins + col];
            let shade = if max > 0.0 { 255.0 * (1.0 - v / max) } else { 255.0 };
            let g = shade.round() as u8;
            let x = MARGIN + col as f64 * cw;
            let y = HEIGHT - MARGIN - (row + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({g},{g},{g})"/>"#
            );
        }
    }
    frame.axes(&mut out, "Re z", "Im z");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders a figure to an SVG string.
pub fn render(figure: &Figure) -> Result<String> {
    match figure {
        Figure::EcdfOverlay {
            sample,
            reference,
            x_label,
        } => ecdf_svg(sample, reference, x_label),
        Figure::Heatmap {
            values,
            bins,
            half_width,
        } => heatmap_svg(values, *bins, *half_width),
    }
}

pub fn emit_svg(figure: &Figure, path: &Path) -> Result<()> {
    let doc = render(figure)?;
    std::fs::write(path, doc).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
