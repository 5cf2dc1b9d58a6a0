//! x-t diagrams as plain SVG line segments.

use std::fmt::Write;

use congestion_core::wft::{FrontKind, History};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

const FAMILY_1: &str = "#1f77b4";
const FAMILY_2: &str = "#d62728";
const INTERFACE: &str = "#000000";

/// Fixed-precision coordinates keep the output byte-stable.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Front segments in the (x, t) plane: x to the right, t upwards. Shocks are
/// solid, rarefaction fronts dashed, interfaces black and bold.
pub fn xt_diagram(history: &History, title: &str) -> String {
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &history.segments {
        for x in [s.x0(), s.x1()] {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
        }
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (-1.0, 1.0);
    }
    let pad = 0.05 * (x_hi - x_lo).max(1e-9);
    if x_hi - x_lo < 1e-9 {
        (x_lo, x_hi) = (x_lo - 1.0, x_hi + 1.0);
    } else {
        (x_lo, x_hi) = (x_lo - pad, x_hi + pad);
    }
    let t_hi = if history.t_end > 0.0 {
        history.t_end
    } else {
        1.0
    };
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let py = |t: f64| HEIGHT - MARGIN - t / t_hi * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        num(WIDTH / 2.0),
        escape(title)
    );

    // axes
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M {} {} H {} M {} {} V {}" stroke="black" fill="none"/>"#,
        num(x0),
        num(y0),
        num(x1),
        num(x0),
        num(y0),
        num(y1)
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let tv = f * t_hi;
        let (tx, ty) = (px(xv), py(tv));
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            num(tx),
            num(y0),
            num(tx),
            num(y0 + 5.0),
            num(tx),
            num(y0 + 18.0),
            label(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            num(x0 - 5.0),
            num(ty),
            num(x0),
            num(ty),
            num(x0 - 8.0),
            num(ty + 4.0),
            label(tv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">x</text>"#,
        num(WIDTH / 2.0),
        num(HEIGHT - 20.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">t</text>"#,
        num(HEIGHT / 2.0)
    );

    // small waves first so that the interfaces stay on top
    let mut segments: Vec<_> = history.segments.iter().collect();
    segments.sort_by_key(|s| s.front.is_interface());
    for s in segments {
        let f = &s.front;
        let (color, width) = if f.is_interface() {
            (INTERFACE, "2.5")
        } else if f.family.index() == 1 {
            (FAMILY_1, "0.6")
        } else {
            (FAMILY_2, "0.6")
        };
        let dash = if f.kind == FrontKind::RarefactionPiece && !f.is_interface() {
            r#" stroke-dasharray="3 2""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{width}"{dash}/>"#,
            num(px(s.x0())),
            num(py(s.t0())),
            num(px(s.x1())),
            num(py(s.t1))
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
