//! Static figures: generators as dots on a lattice, differential terms as
//! segments. Output is plain text (dot, svg or tsv) and deterministic.

use std::fmt::Write;

use crate::algebra::ComplexUV;
use crate::filtered::FilteredComplex;
use crate::staircase::InftyComplex;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Empty when there is nothing worth printing.
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure {
    pub x_axis: String,
    pub y_axis: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

fn monomial_note(u: u32, v: u32) -> String {
    let part = |name: &str, e: u32| match e {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{e}"),
    };
    format!("{}{}", part("U", u), part("V", v))
}

/// Places each generator at minus half its bigrading, so multiplying by U
/// moves one step right and by V one step up.
pub fn figure_uv(c: &ComplexUV) -> Figure {
    let nodes = c
        .gens()
        .iter()
        .map(|g| Node { id: g.id.clone(), label: g.id.clone(), x: -g.gr_u as f64 / 2.0, y: -g.gr_v as f64 / 2.0 })
        .collect();
    let edges = c
        .terms()
        .map(|(x, y, m)| Edge { from: x, to: y, note: monomial_note(m.u, m.v) })
        .collect();
    Figure { x_axis: "U".into(), y_axis: "V".into(), nodes, edges }
}

/// Generators at `(I, J)`; edges carry the power of U when it is nonzero.
pub fn figure_filtered(c: &FilteredComplex) -> Figure {
    let nodes = c
        .gens()
        .iter()
        .map(|g| Node { id: g.id.clone(), label: g.name().to_string(), x: g.filt_i as f64, y: g.filt_j as f64 })
        .collect();
    let edges = c
        .terms()
        .map(|(x, y, k)| Edge { from: x, to: y, note: if k == 0 { String::new() } else { monomial_note(k as u32, 0) } })
        .collect();
    Figure { x_axis: "I".into(), y_axis: "J".into(), nodes, edges }
}

/// Generators at `(i, j)`; each edge is labeled with its length, the larger
/// of its horizontal and vertical extent.
pub fn figure_infty(c: &InftyComplex) -> Figure {
    let nodes = c
        .gens()
        .iter()
        .map(|g| Node { id: g.id.clone(), label: g.id.clone(), x: g.i as f64, y: g.j as f64 })
        .collect();
    let edges = c
        .terms()
        .map(|(x, y, k)| {
            let (a, b) = (c.gen(x), c.gen(y));
            let len = (a.i - b.i + k).abs().max((a.j - b.j + k).abs());
            Edge { from: x, to: y, note: len.to_string() }
        })
        .collect();
    Figure { x_axis: "i".into(), y_axis: "j".into(), nodes, edges }
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn to_dot(f: &Figure) -> String {
    let mut out = String::from("digraph complex {\n  node [shape=point];\n");
    for (k, n) in f.nodes.iter().enumerate() {
        let _ = writeln!(
            out,
            "  n{k} [xlabel=\"{}\", pos=\"{},{}!\"];",
            n.label.replace('"', "\\\""),
            num(n.x),
            num(n.y)
        );
    }
    for e in &f.edges {
        if e.note.is_empty() {
            let _ = writeln!(out, "  n{} -> n{};", e.from, e.to);
        } else {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.note);
        }
    }
    let _ = writeln!(out, "  // axes: x = {}, y = {}", f.x_axis, f.y_axis);
    out.push_str("}\n");
    out
}

const SCALE: f64 = 40.0;
const MARGIN: f64 = 60.0;

pub fn to_svg(f: &Figure) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    if let Some(first) = f.nodes.first() {
        (x0, x1, y0, y1) = (first.x, first.x, first.y, first.y);
    }
    for n in &f.nodes {
        x0 = x0.min(n.x);
        x1 = x1.max(n.x);
        y0 = y0.min(n.y);
        y1 = y1.max(n.y);
    }
    let width = (x1 - x0) * SCALE + 2.0 * MARGIN;
    let height = (y1 - y0) * SCALE + 2.0 * MARGIN;
    // screen y grows downward
    let px = |x: f64| MARGIN + (x - x0) * SCALE;
    let py = |y: f64| MARGIN + (y1 - y) * SCALE;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(out, "<g stroke=\"black\" stroke-width=\"1.5\">");
    for e in &f.edges {
        let (a, b) = (&f.nodes[e.from], &f.nodes[e.to]);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            num(px(a.x)),
            num(py(a.y)),
            num(px(b.x)),
            num(py(b.y))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g font-family=\"serif\" font-size=\"11\">");
    for e in f.edges.iter().filter(|e| !e.note.is_empty()) {
        let (a, b) = (&f.nodes[e.from], &f.nodes[e.to]);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"gray\">{}</text>",
            num(px((a.x + b.x) / 2.0) + 3.0),
            num(py((a.y + b.y) / 2.0) - 3.0),
            escape(&e.note)
        );
    }
    for n in &f.nodes {
        let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"3\"/>", num(px(n.x)), num(py(n.y)));
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{}</text>", num(px(n.x) + 5.0), num(py(n.y) - 5.0), escape(&n.label));
    }
    let _ = writeln!(out, "</g>");
    // axes in the lower left corner
    let (ox, oy) = (MARGIN / 3.0, height - MARGIN / 3.0);
    let _ = writeln!(
        out,
        "<g stroke=\"black\"><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/></g>",
        num(ox),
        num(oy),
        num(ox + SCALE),
        num(oy),
        num(ox),
        num(oy),
        num(ox),
        num(oy - SCALE)
    );
    let _ = writeln!(
        out,
        "<g font-family=\"serif\" font-size=\"12\"><text x=\"{}\" y=\"{}\">{}</text><text x=\"{}\" y=\"{}\">{}</text></g>",
        num(ox + SCALE + 3.0),
        num(oy + 4.0),
        escape(&f.x_axis),
        num(ox - 4.0),
        num(oy - SCALE - 4.0),
        escape(&f.y_axis)
    );
    out.push_str("</svg>\n");
    out
}

pub fn to_tsv(f: &Figure) -> String {
    let mut out = format!("kind\tid\tlabel\t{}\t{}\n", f.x_axis, f.y_axis);
    for n in &f.nodes {
        let _ = writeln!(out, "node\t{}\t{}\t{}\t{}", n.id, n.label, num(n.x), num(n.y));
    }
    out.push_str("kind\tfrom\tto\tnote\n");
    for e in &f.edges {
        let _ = writeln!(out, "edge\t{}\t{}\t{}", f.nodes[e.from].id, f.nodes[e.to].id, e.note);
    }
    out
}
