//! SVG rendering of the planar extremal map: unit disk, Voronoi cells of the
//! inscribed triangle, the circle of radius `eps / sqrt(3)` and the image
//! points.

use std::fmt::Write;

use crate::maps::{ExtremalMap, MapError, SelfMap};

pub const VIEWPORT: f64 = 512.0;
pub const DISK_RADIUS: f64 = 240.0;
/// Blue, orange and green for cells 0, 1, 2.
pub const CELL_COLORS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];
const BOUNDARY_STROKE: &str = "#7f7f7f";

fn to_screen(p: &[f64]) -> (f64, f64) {
    let c = VIEWPORT / 2.0;
    (c + DISK_RADIUS * p[0], c - DISK_RADIUS * p[1])
}

/// Renders the figure for `eps` in `(0, 2]`. For `eps > sqrt(3)` the dotted
/// circle leaves the disk; it is still drawn and a note is added.
pub fn extremal_figure(eps: f64) -> Result<String, MapError> {
    let map = ExtremalMap::new(2, eps)?;
    let inner = map.image_radius();
    let c = VIEWPORT / 2.0;
    let mut svg = String::new();
    let w = &mut svg;
    // Writing to a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{v}" height="{v}" viewBox="0 0 {v} {v}">"#,
        v = VIEWPORT
    );
    let _ = writeln!(w, r#"  <rect width="{v}" height="{v}" fill="white"/>"#, v = VIEWPORT);
    let _ = writeln!(w, r#"  <g id="cells" stroke="{BOUNDARY_STROKE}" stroke-width="1" fill-opacity="0.35">"#);
    for i in 0..3 {
        let v = map.vertices().point(i);
        let theta = v[1].atan2(v[0]);
        let half = std::f64::consts::PI / 3.0;
        let (x0, y0) = to_screen(&[(theta - half).cos(), (theta - half).sin()]);
        let (x1, y1) = to_screen(&[(theta + half).cos(), (theta + half).sin()]);
        let _ = writeln!(
            w,
            r#"    <path id="cell-{i}" fill="{color}" d="M {c:.6} {c:.6} L {x0:.6} {y0:.6} A {r:.6} {r:.6} 0 0 0 {x1:.6} {y1:.6} Z"/>"#,
            color = CELL_COLORS[i],
            r = DISK_RADIUS
        );
    }
    let _ = writeln!(w, "  </g>");
    let _ = writeln!(
        w,
        r#"  <circle id="outer" cx="{c:.6}" cy="{c:.6}" r="{r:.6}" fill="none" stroke="black" stroke-width="2"/>"#,
        r = DISK_RADIUS
    );
    let _ = writeln!(
        w,
        r#"  <circle id="inner" cx="{c:.6}" cy="{c:.6}" r="{r:.6}" fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="4 4"/>"#,
        r = DISK_RADIUS * inner
    );
    for i in 0..3 {
        let image = map.eval(map.vertices().point(i));
        let (x, y) = to_screen(&image);
        let _ = writeln!(
            w,
            r#"  <circle id="image-{i}" cx="{x:.6}" cy="{y:.6}" r="6" fill="{color}" stroke="black" stroke-width="1"/>"#,
            color = CELL_COLORS[i]
        );
    }
    if inner > 1.0 {
        let _ = writeln!(
            w,
            r#"  <text id="note" x="8" y="504" font-family="sans-serif" font-size="12">eps/R_2 = {inner:.6} exceeds 1: dotted circle lies outside the unit disk</text>"#
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

/// Reads back the `r` attribute of the circle with the given id.
pub fn circle_radius(svg: &str, id: &str) -> Option<f64> {
    let marker = format!(r#"<circle id="{id}""#);
    let start = svg.find(&marker)?;
    let tag = &svg[start..start + svg[start..].find('>')?];
    let r_at = tag.find(r#" r=""#)? + 4;
    let end = tag[r_at..].find('"')?;
    tag[r_at..r_at + end].parse().ok()
}
