//! Minimal SVG 1.1 output for prototype overlays and confusion matrices.

use std::fmt::Write as _;

use crate::diagnosis::Evaluation;
use crate::error::{Error, Result};
use crate::lead::ClassLabel;
use crate::prototype::PrototypeLibrary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub samples: Vec<f64>,
    /// Occurrence or any nonnegative weight; opacity is weight / max weight.
    pub weight: f64,
    pub color: String,
}

/// A translucent band over `[start, end)` sample indices, e.g. a P, QRS or T
/// region.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

pub fn class_color(class: ClassLabel) -> &'static str {
    match class {
        ClassLabel::Normal => "#1f4e9c",
        ClassLabel::Lvh => "#b2182b",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per curve on shared axes.
pub fn svg_comparison(title: &str, curves: &[Curve], bands: &[Band]) -> Result<String> {
    let first = curves.first().ok_or_else(|| Error::EmptyPlot(title.to_string()))?;
    let n = first.samples.len();
    if n < 2 {
        return Err(Error::EmptyPlot(format!("{title}: curves need at least 2 samples")));
    }
    if let Some(c) = curves.iter().find(|c| c.samples.len() != n) {
        return Err(Error::CurveLength { expected: n, found: c.samples.len() });
    }
    let lo = curves.iter().flat_map(|c| &c.samples).cloned().fold(f64::INFINITY, f64::min);
    let hi = curves.iter().flat_map(|c| &c.samples).cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo > 1e-12 { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let max_w = curves.iter().map(|c| c.weight).fold(0.0f64, f64::max);

    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    let x = |t: f64| MARGIN + t / (n - 1) as f64 * pw;
    let y = |v: f64| MARGIN + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    for b in bands {
        let x0 = x(b.start.min(n - 1) as f64);
        let x1 = x(b.end.min(n - 1) as f64);
        let _ = writeln!(
            s,
            r##"<rect class="band" x="{x0:.2}" y="{MARGIN}" width="{:.2}" height="{ph}" fill="#999999" fill-opacity="0.2"><title>{}</title></rect>"##,
            (x1 - x0).max(0.0),
            escape(&b.label)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444444" stroke-width="0.5"/>"##
    );
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##,
            y(0.0),
            MARGIN + pw
        );
    }
    for c in curves {
        let opacity = if max_w > 0.0 { c.weight / max_w } else { 1.0 };
        let mut pts = String::with_capacity(n * 14);
        for (t, v) in c.samples.iter().enumerate() {
            let _ = write!(pts, "{:.2},{:.2} ", x(t as f64), y(*v));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" stroke-opacity="{opacity}" points="{}"><title>{}</title></polyline>"#,
            escape(&c.color),
            pts.trim_end(),
            escape(&c.label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="11">{lo:.3} .. {hi:.3} mV</text>"#,
        HEIGHT - 12.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Overlay of a library's prototypes, darker for higher occurrence.
pub fn library_svg(lib: &PrototypeLibrary, bands: &[Band]) -> Result<String> {
    let curves: Vec<Curve> = lib
        .prototypes
        .iter()
        .enumerate()
        .map(|(i, p)| Curve {
            label: format!("prototype {i} (occurrence {})", p.occurrence),
            samples: p.samples.clone(),
            weight: p.occurrence as f64,
            color: class_color(lib.class_label).to_string(),
        })
        .collect();
    let title = format!(
        "{} {} prototypes ({} records)",
        lib.class_label,
        lib.lead,
        lib.total_occurrence()
    );
    svg_comparison(&title, &curves, bands)
}

/// Row-normalized 2x2 matrices side by side, one per method.
pub fn confusion_svg(eval: &Evaluation) -> String {
    let cell = 70.0;
    let panel = 2.0 * cell + 90.0;
    let methods = eval.methods();
    let w = methods.len() as f64 * panel + 40.0;
    let h = 2.0 * cell + 110.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let names = ["Normal", "LVH"];
    for (k, (name, m)) in methods.iter().enumerate() {
        let ox = 60.0 + k as f64 * panel;
        let oy = 50.0;
        let _ = writeln!(s, r#"<text x="{ox}" y="30" font-family="sans-serif" font-size="13">{name}</text>"#);
        let norm = m.normalized();
        let counts = [[m.tn, m.fp], [m.fn_, m.tp]];
        for (i, row) in norm.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let cx = ox + j as f64 * cell;
                let cy = oy + i as f64 * cell;
                let shade = 255.0 - (v * 200.0).round();
                let _ = writeln!(
                    s,
                    r##"<rect x="{cx}" y="{cy}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#333333"/>"##
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">{v:.2} ({})</text>"#,
                    cx + cell / 2.0,
                    cy + cell / 2.0 + 4.0,
                    counts[i][j]
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
                ox - 4.0,
                oy + i as f64 * cell + cell / 2.0 + 4.0,
                names[i]
            );
        }
        for (j, n) in names.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{n}</text>"#,
                ox + j as f64 * cell + cell / 2.0,
                oy + 2.0 * cell + 16.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="60" y="{}" font-family="sans-serif" font-size="11">rows: true class, columns: predicted class</text>"#,
        h - 14.0
    );
    s.push_str("</svg>\n");
    s
}
