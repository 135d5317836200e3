//! Log-log SVG rendering of f-gap curves, written directly with no
//! plotting dependency. One polyline per input CSV plus dashed t^-p guide
//! lines for reading slopes off the page.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::csvio::read_rows;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 190.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 64.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const GUIDE_POWERS: [f64; 3] = [2.0, 4.0, 6.0];

struct Curve {
    label: String,
    // log10 coordinates
    points: Vec<(f64, f64)>,
}

pub fn render(inputs: &[PathBuf], out: &Path) -> Result<(), String> {
    if inputs.is_empty() {
        return Err("plot needs at least one input CSV".into());
    }
    let mut curves = Vec::new();
    for path in inputs {
        let rows = read_rows(path)?;
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| match r.f_gap {
                Some(g) if g > 0.0 && r.t > 0.0 => Some((r.t.log10(), g.log10())),
                _ => None,
            })
            .collect();
        if points.len() < 2 {
            return Err(format!(
                "{}: need at least 2 positive (t, f_gap) rows to draw a curve",
                path.display()
            ));
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        curves.push(Curve { label, points });
    }

    let svg = render_svg(&curves);
    std::fs::write(out, svg).map_err(|e| format!("cannot write {}: {e}", out.display()))
}

fn nice_pow_label(exp: i64) -> String {
    format!("1e{exp}")
}

fn render_svg(curves: &[Curve]) -> String {
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &(x, y) in &c.points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if x_hi - x_lo < 1e-9 {
        x_hi = x_lo + 1.0;
    }
    if y_hi - y_lo < 1e-9 {
        y_hi = y_lo + 1.0;
    }
    let pad_x = 0.03 * (x_hi - x_lo);
    let pad_y = 0.05 * (y_hi - y_lo);
    x_lo -= pad_x;
    x_hi += pad_x;
    y_lo -= pad_y;
    y_hi += pad_y;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );

    // Decade grid and tick labels.
    let x_step = (((x_hi - x_lo) / 8.0).ceil() as i64).max(1);
    let y_step = (((y_hi - y_lo) / 8.0).ceil() as i64).max(1);
    let mut e = x_lo.ceil() as i64;
    while (e as f64) <= x_hi {
        let px = sx(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{MARGIN_T}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_T + plot_h
        );
        let _ = writeln!(
            s,
            r##"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="13" fill="#333333" text-anchor="middle">{}</text>"##,
            MARGIN_T + plot_h + 22.0,
            nice_pow_label(e)
        );
        e += x_step;
    }
    let mut e = y_lo.ceil() as i64;
    while (e as f64) <= y_hi {
        let py = sy(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" fill="#333333" text-anchor="end">{}</text>"##,
            MARGIN_L - 8.0,
            py + 4.0,
            nice_pow_label(e)
        );
        e += y_step;
    }

    // Axes frame and labels.
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333" stroke-width="1.5"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="15" fill="#111111" text-anchor="middle">t</text>"##,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r##"<text x="20" y="{:.2}" font-family="sans-serif" font-size="15" fill="#111111" text-anchor="middle" transform="rotate(-90 20 {:.2})">f gap</text>"##,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    // Slope guides t^-p anchored at the top-left of the data window.
    for (i, p) in GUIDE_POWERS.iter().enumerate() {
        let y_at = |x: f64| (y_hi - pad_y) - p * (x - (x_lo + pad_x));
        let x1 = x_lo + pad_x;
        let mut x2 = x_hi - pad_x;
        // Clip to the bottom of the window.
        if y_at(x2) < y_lo {
            x2 = x1 + ((y_hi - pad_y) - y_lo) / p;
        }
        if x2 <= x1 {
            continue;
        }
        let (px1, py1) = (sx(x1), sy(y_at(x1)));
        let (px2, py2) = (sx(x2), sy(y_at(x2)));
        let _ = writeln!(
            s,
            r##"<line x1="{px1:.2}" y1="{py1:.2}" x2="{px2:.2}" y2="{py2:.2}" stroke="#999999" stroke-width="1" stroke-dasharray="6 4"/>"##
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="#777777">t^-{}</text>"##,
            px2 + 4.0,
            py2 + 4.0 + 14.0 * i as f64,
            p
        );
    }

    // Data curves.
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut attr = String::new();
        for &(x, y) in &c.points {
            let _ = write!(attr, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            attr.trim_end()
        );
    }

    // Legend in the right margin.
    let lx = MARGIN_L + plot_w + 16.0;
    let mut ly = MARGIN_T + 12.0;
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3"/>"#,
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="13" fill="#111111">{}</text>"##,
            lx + 30.0,
            xml_escape(&c.label)
        );
        ly += 20.0;
    }

    s.push_str("</svg>\n");
    s
}

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
