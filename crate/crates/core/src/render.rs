//! SVG drawings of a plan document and of simulated runs over it.
//!
//! Layers, bottom to top: grid, obstacle cells, blocks, spanning tree,
//! path, waypoints, trajectories.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::geometry::Vec2;
use crate::grid::CellState;
use crate::path::WaypointKind;
use crate::report::PlanDocument;
use crate::sim::TrajectorySample;

const PX_PER_M: f64 = 20.0;
const MARGIN: f64 = 10.0;
const TRACK_COLORS: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Canvas<'a> {
    doc: &'a PlanDocument,
    out: String,
}

impl<'a> Canvas<'a> {
    fn new(doc: &'a PlanDocument) -> Self {
        let w = doc.bounds.width() * PX_PER_M + 2.0 * MARGIN;
        let h = doc.bounds.height() * PX_PER_M + 2.0 * MARGIN;
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        Self { doc, out }
    }

    /// World to pixel coordinates, y up.
    fn px(&self, p: Vec2) -> (f64, f64) {
        let b = &self.doc.bounds;
        (MARGIN + (p.x - b.min.x) * PX_PER_M, MARGIN + (b.max.y - p.y) * PX_PER_M)
    }

    fn rect(&mut self, min: Vec2, max: Vec2, style: &str) {
        let (x0, y1) = self.px(min);
        let (x1, y0) = self.px(max);
        let _ = writeln!(
            self.out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    fn polyline(&mut self, points: impl IntoIterator<Item = Vec2>, style: &str) {
        let coords: Vec<String> = points
            .into_iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        if coords.len() >= 2 {
            let _ = writeln!(self.out, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
        }
    }

    fn begin(&mut self, id: &str) {
        let _ = writeln!(self.out, r#"<g id="{id}">"#);
    }

    fn end(&mut self) {
        let _ = writeln!(self.out, "</g>");
    }

    fn plan_layers(&mut self) {
        let doc = self.doc;
        let grid = &doc.plan.grid;

        self.begin("grid");
        let ext = grid.extent();
        for i in 0..=grid.width_cells {
            let x = grid.origin.x + i as f64 * grid.cell_size;
            self.polyline([Vec2::new(x, ext.min.y), Vec2::new(x, ext.max.y)], r##"stroke="#dddddd" stroke-width="0.5""##);
        }
        for j in 0..=grid.height_cells {
            let y = grid.origin.y + j as f64 * grid.cell_size;
            self.polyline([Vec2::new(ext.min.x, y), Vec2::new(ext.max.x, y)], r##"stroke="#dddddd" stroke-width="0.5""##);
        }
        self.end();

        self.begin("obstacles");
        for c in grid.indices() {
            if grid.get(c) == CellState::Obstacle {
                let r = grid.cell_rect(c);
                self.rect(r.min, r.max, r##"fill="#555555" fill-opacity="0.6""##);
            }
        }
        for o in &doc.obstacles {
            let mut ring = o.vertices.clone();
            ring.extend(o.vertices.first().copied());
            self.polyline(ring, r##"stroke="#000000" stroke-width="1""##);
        }
        self.end();

        self.begin("blocks");
        for b in doc.plan.blocks() {
            // larger blocks get lighter fills
            let shade = 150 + (b.size_cells.trailing_zeros() * 25).min(100);
            let style = format!(r##"fill="rgb({shade},{shade},255)" fill-opacity="0.35" stroke="#3355aa" stroke-width="1""##);
            self.rect(b.min(), b.max(), &style);
        }
        self.end();

        self.begin("tree");
        for e in &doc.plan.tree.edges {
            let a = doc.plan.graph.blocks[e.parent].center;
            let b = doc.plan.graph.blocks[e.child].center;
            self.polyline([a, b], r##"stroke="#2ca02c" stroke-width="2" stroke-dasharray="6 3""##);
        }
        self.end();

        self.begin("path");
        let path = &doc.plan.path;
        let mut points: Vec<Vec2> = path.points().collect();
        if path.closed {
            points.extend(points.first().copied());
        }
        self.polyline(points, r##"stroke="#ff7f0e" stroke-width="2""##);
        self.end();

        self.begin("waypoints");
        for w in &path.waypoints {
            let (x, y) = self.px(w.point);
            let fill = match w.kind {
                WaypointKind::Part { .. } => "#ff7f0e",
                WaypointKind::Joint { .. } => "#d62728",
                WaypointKind::Transit { .. } => "#9467bd",
            };
            let _ = writeln!(self.out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{fill}"/>"#);
        }
        self.end();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Map, blocks, spanning tree, path and waypoints.
pub fn render_plan(doc: &PlanDocument) -> String {
    let mut c = Canvas::new(doc);
    c.plan_layers();
    c.finish()
}

/// The plan drawing with each vehicle's recorded track on top.
pub fn render_run(doc: &PlanDocument, trajectory: &[TrajectorySample]) -> String {
    let mut c = Canvas::new(doc);
    c.plan_layers();
    let mut tracks: BTreeMap<usize, Vec<Vec2>> = BTreeMap::new();
    for s in trajectory {
        tracks.entry(s.ugv).or_default().push(Vec2::new(s.x, s.y));
    }
    c.begin("trajectories");
    for (ugv, track) in tracks {
        let style = format!(r#"stroke="{}" stroke-width="1.2" stroke-opacity="0.8""#, TRACK_COLORS[ugv % TRACK_COLORS.len()]);
        c.polyline(track, &style);
    }
    c.end();
    c.finish()
}
