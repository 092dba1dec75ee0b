//! SVG plots of planar bodies and ellipses.

use std::f64::consts::PI;
use std::fmt::Write as _;

use slicekit::body::SymBody;
use slicekit::ellipsoid::Ellipsoid;

use crate::output::fmt_num;

const SIZE: f64 = 400.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Boundary of a planar body, counter-clockwise.
fn outline(a: &SymBody) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = a
        .vertices()
        .iter()
        .flat_map(|v| [(v[0], v[1]), (-v[0], -v[1])])
        .collect();
    pts.sort_by(|p, q| p.1.atan2(p.0).total_cmp(&q.1.atan2(q.0)));
    pts
}

fn ellipse_points(e: &Ellipsoid, m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            let m = e.matrix();
            let (c, s) = (t.cos(), t.sin());
            let q = m[(0, 0)] * c * c + 2.0 * m[(0, 1)] * c * s + m[(1, 1)] * s * s;
            let r = 1.0 / q.sqrt();
            (r * c, r * s)
        })
        .collect()
}

pub struct Plot {
    polygons: Vec<Vec<(f64, f64)>>,
}

impl Plot {
    pub fn new() -> Self {
        Plot {
            polygons: Vec::new(),
        }
    }

    pub fn body(mut self, a: &SymBody) -> Self {
        self.polygons.push(outline(a));
        self
    }

    pub fn ellipse(mut self, e: &Ellipsoid) -> Self {
        self.polygons.push(ellipse_points(e, 256));
        self
    }

    pub fn render(&self) -> String {
        let extent = self
            .polygons
            .iter()
            .flatten()
            .map(|&(x, y)| x.abs().max(y.abs()))
            .fold(1e-12, f64::max)
            * 1.1;
        let scale = SIZE / (2.0 * extent);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        )
        .unwrap();
        for (i, poly) in self.polygons.iter().enumerate() {
            let pts: Vec<String> = poly
                .iter()
                .map(|&(x, y)| {
                    format!(
                        "{},{}",
                        fmt_num(SIZE / 2.0 + x * scale),
                        fmt_num(SIZE / 2.0 - y * scale)
                    )
                })
                .collect();
            writeln!(
                s,
                r#"  <polygon points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                pts.join(" "),
                COLORS[i % COLORS.len()]
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}
