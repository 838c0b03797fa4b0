//! Self-contained SVG diagrams of 2-parameter subdivisions and thin supports.

use std::fmt::Write;

use thiserror::Error;

use crate::chambers::Subdivision;
use crate::grid::{GridShape, Region};
use crate::poset::FinitePoset;
use crate::thin::DecompositionReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("rendering needs a 2-parameter grid, got {0}")]
    UnsupportedDimension(usize),
}

pub const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6",
    "#d37295",
];

const CELL: usize = 32;
const MARGIN: usize = 16;
const NODE_RADIUS: f64 = 7.0;

struct Canvas {
    w: usize,
    h: usize,
    out: String,
}

impl Canvas {
    fn new(shape: &GridShape) -> Result<Self, SvgError> {
        if shape.n() != 2 {
            return Err(SvgError::UnsupportedDimension(shape.n()));
        }
        let (w, h) = (shape.sizes()[0], shape.sizes()[1]);
        let (pw, ph) = (w * CELL + 2 * MARGIN, h * CELL + 2 * MARGIN);
        let mut out = String::new();
        writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{pw}\" height=\"{ph}\" viewBox=\"0 0 {pw} {ph}\">").unwrap();
        out.push_str(
            "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#222222\"/></marker></defs>\n",
        );
        writeln!(out, "<rect width=\"{pw}\" height=\"{ph}\" fill=\"#ffffff\"/>").unwrap();
        Ok(Canvas { w, h, out })
    }

    /// Top-left pixel of cell `(x, y)`; `y` grows upwards.
    fn corner(&self, x: usize, y: usize) -> (usize, usize) {
        (MARGIN + x * CELL, MARGIN + (self.h - 1 - y) * CELL)
    }

    fn centre(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN as f64 + (x + 0.5) * CELL as f64, MARGIN as f64 + (self.h as f64 - 1.0 - y + 0.5) * CELL as f64)
    }

    fn region(&mut self, class: &str, id: usize, fill: &str, cells: &[(usize, usize)]) {
        let mut d = String::new();
        for &(x, y) in cells {
            let (px, py) = self.corner(x, y);
            write!(d, "M{px},{py}h{CELL}v{CELL}h-{CELL}z").unwrap();
        }
        writeln!(self.out, "<path class=\"{class}\" data-id=\"{id}\" d=\"{d}\" fill=\"{fill}\"/>").unwrap();
    }

    fn grid_lines(&mut self) {
        let mut d = String::new();
        for x in 0..=self.w {
            write!(d, "M{},{}v{}", MARGIN + x * CELL, MARGIN, self.h * CELL).unwrap();
        }
        for y in 0..=self.h {
            write!(d, "M{},{}h{}", MARGIN, MARGIN + y * CELL, self.w * CELL).unwrap();
        }
        writeln!(self.out, "<path class=\"grid\" d=\"{d}\" fill=\"none\" stroke=\"#ffffff\" stroke-width=\"1\"/>").unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn coords(shape: &GridShape, cells: &[usize]) -> Vec<(usize, usize)> {
    cells.iter().map(|&i| (shape.coord(i, 0), shape.coord(i, 1))).collect()
}

fn centroid(cells: &[(usize, usize)]) -> (f64, f64) {
    let n = cells.len() as f64;
    let (sx, sy) = cells.iter().fold((0usize, 0usize), |(a, b), &(x, y)| (a + x, b + y));
    (sx as f64 / n, sy as f64 / n)
}

/// Chambers filled by id, with the Hasse diagram of the chamber poset drawn
/// between chamber centroids.
pub fn render_subdivision(s: &Subdivision, poset: &FinitePoset) -> Result<String, SvgError> {
    let shape = s.shape();
    let mut canvas = Canvas::new(shape)?;
    let mut nodes = Vec::with_capacity(s.len());
    for c in s.chambers() {
        let cells = coords(shape, &c.cells);
        canvas.region("chamber", c.id, PALETTE[c.id % PALETTE.len()], &cells);
        let (x, y) = centroid(&cells);
        nodes.push(canvas.centre(x, y));
    }
    canvas.grid_lines();
    for &(p, q) in poset.hasse() {
        let ((x0, y0), (x1, y1)) = (nodes[p], nodes[q]);
        let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt().max(1e-9);
        let (ux, uy) = ((x1 - x0) / len, (y1 - y0) / len);
        writeln!(
            canvas.out,
            "<line class=\"cover\" data-from=\"{p}\" data-to=\"{q}\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#222222\" stroke-width=\"1.5\" marker-end=\"url(#head)\"/>",
            x0 + ux * NODE_RADIUS,
            y0 + uy * NODE_RADIUS,
            x1 - ux * NODE_RADIUS,
            y1 - uy * NODE_RADIUS
        )
        .unwrap();
    }
    for (id, (x, y)) in nodes.iter().enumerate() {
        writeln!(
            canvas.out,
            "<circle class=\"node\" data-id=\"{id}\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{NODE_RADIUS}\" fill=\"#ffffff\" stroke=\"#222222\"/>"
        )
        .unwrap();
        writeln!(
            canvas.out,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{id}</text>",
            y + 3.0
        )
        .unwrap();
    }
    Ok(canvas.finish())
}

/// Support components of a thin module filled by index; cells outside the
/// support stay white. Components that failed a check get a dashed outline.
pub fn render_components(shape: &GridShape, report: &DecompositionReport) -> Result<String, SvgError> {
    let mut canvas = Canvas::new(shape)?;
    let empty: Vec<(usize, usize)> = (0..shape.len()).map(|i| (shape.coord(i, 0), shape.coord(i, 1))).collect();
    canvas.region("background", 0, "#eeeeee", &empty);
    for (id, c) in report.components.iter().enumerate() {
        let region = Region::from_cells(shape, &c.cells);
        let cells = coords(shape, region.indices());
        canvas.region("component", id, PALETTE[id % PALETTE.len()], &cells);
        if !c.is_interval_summand() {
            let mut d = String::new();
            for &(x, y) in &cells {
                let (px, py) = canvas.corner(x, y);
                write!(d, "M{px},{py}h{CELL}v{CELL}h-{CELL}z").unwrap();
            }
            writeln!(canvas.out, "<path class=\"obstructed\" data-id=\"{id}\" d=\"{d}\" fill=\"none\" stroke=\"#000000\" stroke-dasharray=\"4 2\"/>").unwrap();
        }
    }
    canvas.grid_lines();
    Ok(canvas.finish())
}
