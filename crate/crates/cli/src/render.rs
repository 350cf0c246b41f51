//! DOT and SVG output. Both are deterministic functions of their input.

use std::collections::BTreeMap;
use std::fmt::Write;

use nhatlas::nhcalc::NhGraph;
use nhatlas::ratcore::{Ext, Side};
use nhatlas::{Point, Rat, Scalar, System};

pub fn point_label(p: &Point) -> String {
    format!("{}:{}", p.chart, p.coord.fmt_exact())
}

/// Non-separation as undirected dashed edges, points clustered by chart.
pub fn to_dot(g: &NhGraph<Rat>) -> String {
    let mut by_chart: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in g.points.iter().enumerate() {
        by_chart.entry(p.chart).or_default().push(i);
    }
    let mut out = String::from("graph nh {\n  node [shape=point];\n");
    for (c, vs) in &by_chart {
        let _ = writeln!(out, "  subgraph cluster_{c} {{\n    label=\"chart {c}\";");
        for v in vs {
            let _ = writeln!(out, "    p{v} [xlabel=\"{}\"];", point_label(&g.points[*v]));
        }
        out.push_str("  }\n");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "  p{a} -- p{b} [style=dashed];");
    }
    out.push_str("}\n");
    out
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 60.0;
const ROW: f64 = 70.0;

/// Charts stacked by id, glued regions shaded, non-separated pairs joined by
/// dashed arcs.
pub fn to_svg(s: &System, arcs: &[(Point, Point)]) -> String {
    // Horizontal range: every finite feature, padded.
    let mut xs: Vec<f64> = Vec::new();
    for c in s.charts() {
        xs.extend([&c.extent.lo, &c.extent.hi].into_iter().filter_map(|e| e.fin()).map(|v| v.to_f64()));
    }
    for t in s.transitions() {
        for p in &t.pieces {
            xs.extend([&p.dom.lo, &p.dom.hi].into_iter().filter_map(|e| e.fin()).map(|v| v.to_f64()));
        }
    }
    for (a, b) in arcs {
        xs.push(a.coord.to_f64());
        xs.push(b.coord.to_f64());
    }
    let (mut lo, mut hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.15).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |v: f64| MARGIN + (v.clamp(lo, hi) - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let ex = |e: &Ext<Rat>| match e {
        Ext::NegInf => sx(lo),
        Ext::PosInf => sx(hi),
        Ext::Fin(v) => sx(v.to_f64()),
    };
    let row: BTreeMap<usize, f64> = s.charts().iter().enumerate().map(|(i, c)| (c.id, 40.0 + ROW * i as f64)).collect();
    let height = 40.0 + ROW * s.charts().len() as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for t in s.transitions() {
        let y = row[&t.from];
        for p in &t.pieces {
            let (a, b) = (ex(&p.dom.lo), ex(&p.dom.hi));
            let _ = writeln!(out, "<rect x=\"{a:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"16\" fill=\"#4a7bd0\" fill-opacity=\"0.15\"/>", y - 8.0, b - a);
        }
        for c in &t.cascades {
            if let Ok(iv) = c.extent(Side::Dom) {
                let (a, b) = (ex(&iv.lo), ex(&iv.hi));
                let _ = writeln!(out, "<rect x=\"{a:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"16\" fill=\"#d07a4a\" fill-opacity=\"0.15\"/>", y - 8.0, b - a);
            }
        }
    }
    for c in s.charts() {
        let y = row[&c.id];
        let (a, b) = (ex(&c.extent.lo), ex(&c.extent.hi));
        let _ = writeln!(out, "<line x1=\"{a:.2}\" y1=\"{y:.2}\" x2=\"{b:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1.5\"/>");
        let _ = writeln!(out, "<text x=\"8\" y=\"{:.2}\">chart {}</text>", y + 4.0, c.id);
    }
    for (p, q) in arcs {
        let (x1, y1, x2, y2) = (sx(p.coord.to_f64()), row[&p.chart], sx(q.coord.to_f64()), row[&q.chart]);
        let bend = 30.0 + (y2 - y1).abs() * 0.25;
        let (cx, cy) = ((x1 + x2) / 2.0 + bend, (y1 + y2) / 2.0);
        let _ = writeln!(
            out,
            "<path d=\"M {x1:.2} {y1:.2} Q {cx:.2} {cy:.2} {x2:.2} {y2:.2}\" fill=\"none\" stroke=\"#b03030\" stroke-dasharray=\"5 4\"/>"
        );
        for (x, y) in [(x1, y1), (x2, y2)] {
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#b03030\"/>");
        }
    }
    out.push_str("</svg>\n");
    out
}
