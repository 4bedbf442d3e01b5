//! SVG drawing of a representation projected on two axes.

use std::fmt::Write;

use boxdim::geometry::BoxNd;
use boxdim::representation::TouchingRep;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Boxes become rectangles labelled with their vertex id, and every edge
/// gets a dashed outline around the projected intersection of its boxes.
/// A one-dimensional representation draws interval `v` in row `v`.
pub fn render(r: &TouchingRep, (a, b): (usize, usize)) -> Result<String, String> {
    if r.dim == 0 {
        return Err("nothing to draw in dimension 0".into());
    }
    if a >= r.dim || (r.dim > 1 && (b >= r.dim || a == b)) {
        return Err(format!("axes {a},{b} do not fit dimension {}", r.dim));
    }
    let rect = |bx: &BoxNd, row: usize| -> [f64; 4] {
        let x = bx.side(a);
        if r.dim == 1 {
            return [
                x.lo().to_f64(),
                row as f64,
                x.hi().to_f64(),
                row as f64 + 0.8,
            ];
        }
        let y = bx.side(b);
        [
            x.lo().to_f64(),
            y.lo().to_f64(),
            x.hi().to_f64(),
            y.hi().to_f64(),
        ]
    };
    let rects: Vec<[f64; 4]> = r
        .boxes
        .iter()
        .enumerate()
        .map(|(v, bx)| rect(bx, v))
        .collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for q in &rects {
        x0 = x0.min(q[0]);
        y0 = y0.min(q[1]);
        x1 = x1.max(q[2]);
        y1 = y1.max(q[3]);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    // SVG y grows downwards.
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| CANVAS - MARGIN - (y - y0) * scale;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (v, q) in rects.iter().enumerate() {
        let hue = (v * 137) % 360;
        writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="hsl({hue},60%,80%)" fill-opacity="0.6" stroke="black" stroke-width="1"/>"#,
            px(q[0]),
            py(q[3]),
            (q[2] - q[0]) * scale,
            (q[3] - q[1]) * scale
        )
        .unwrap();
    }
    for (u, v) in r.graph.edges() {
        let (p, q) = (&rects[u], &rects[v]);
        let lo = [p[0].max(q[0]), p[1].max(q[1])];
        let hi = [p[2].min(q[2]), p[3].min(q[3])];
        if lo[0] > hi[0] || lo[1] > hi[1] {
            continue;
        }
        writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="red" stroke-width="2" stroke-dasharray="6,4"/>"#,
            px(lo[0]) - 2.0,
            py(hi[1]) - 2.0,
            (hi[0] - lo[0]) * scale + 4.0,
            (hi[1] - lo[1]) * scale + 4.0
        )
        .unwrap();
    }
    for (v, q) in rects.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="14" text-anchor="middle" dominant-baseline="middle">{v}</text>"#,
            px((q[0] + q[2]) / 2.0),
            py((q[1] + q[3]) / 2.0)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
