//! Polygon obstacles, the tessellated grid map and scanline rasterization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{polygon_edges, segments_intersect, Rect, Segment, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("cell size must be positive and finite, got {0}")]
    CellSize(f64),
    #[error("map bounds are degenerate")]
    DegenerateBounds,
    #[error("obstacle {index}: {reason}")]
    InvalidPolygon { index: usize, reason: String },
}

/// Simple polygon given by its vertices; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonObstacle {
    pub vertices: Vec<Vec2>,
}

impl PolygonObstacle {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        Self { vertices }
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Self {
        Self::new(Rect::new(min, max).corners().to_vec())
    }

    /// Checks vertex count, repeated consecutive vertices and self intersection.
    pub fn validate(&self) -> Result<(), String> {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return Err(format!("needs at least 3 vertices, got {n}"));
        }
        if v.iter().any(|p| !p.is_finite()) {
            return Err("non-finite vertex".into());
        }
        for i in 0..n {
            if v[i] == v[(i + 1) % n] {
                return Err(format!("vertices {i} and {} coincide", (i + 1) % n));
            }
        }
        let edges: Vec<Segment> = polygon_edges(v).collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let (e, f) = (edges[i], edges[j]);
                    let shared = if j == i + 1 { e.b } else { e.a };
                    let other_e = if j == i + 1 { e.a } else { e.b };
                    let other_f = if j == i + 1 { f.b } else { f.a };
                    let de = other_e - shared;
                    let df = other_f - shared;
                    if de.cross(df) == 0.0 && de.dot(df) > 0.0 {
                        return Err(format!("edges {i} and {j} overlap"));
                    }
                } else if segments_intersect(edges[i], edges[j]) {
                    return Err(format!("edges {i} and {j} intersect"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Obstacle,
}

/// Cell index (column i, row j); row 0 is the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Connection direction between 4-adjacent cells or blocks.
///
/// The declaration order TOP < LEFT < BOTTOM < RIGHT is used as a tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    Top,
    Left,
    Bottom,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Top, Direction::Left, Direction::Bottom, Direction::Right];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Top => Direction::Bottom,
            Direction::Bottom => Direction::Top,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Unit step (di, dj) pointing towards the neighbour on this side.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Top => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Bottom => (0, -1),
            Direction::Right => (1, 0),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::Left | Direction::Right)
    }
}

/// Connection direction from `c` to `c_prime` exactly as tabulated for the
/// planner: `[i - i', j - j']` of `[-1,0]` is LEFT, `[1,0]` RIGHT,
/// `[0,-1]` BOTTOM and `[0,1]` TOP.
///
/// Read geometrically the label names the side of `c_prime` on which `c`
/// lies (`c` is left of `c_prime` for LEFT). The block graph stores the
/// opposite, neighbour-side convention; see [`geometric_direction`].
pub fn cell_direction(c: CellIndex, c_prime: CellIndex) -> Option<Direction> {
    let di = c.i as isize - c_prime.i as isize;
    let dj = c.j as isize - c_prime.j as isize;
    match (di, dj) {
        (-1, 0) => Some(Direction::Left),
        (1, 0) => Some(Direction::Right),
        (0, -1) => Some(Direction::Bottom),
        (0, 1) => Some(Direction::Top),
        _ => None,
    }
}

/// Side of `c` on which `c_prime` lies (`Left` when `c_prime` is the left neighbour).
pub fn geometric_direction(c: CellIndex, c_prime: CellIndex) -> Option<Direction> {
    cell_direction(c_prime, c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub width_cells: usize,
    pub height_cells: usize,
    pub cell_size: f64,
    pub origin: Vec2,
    /// Row-major from the bottom row: `cells[j * width_cells + i]`.
    pub cells: Vec<CellState>,
}

impl GridMap {
    pub fn filled(width_cells: usize, height_cells: usize, cell_size: f64, origin: Vec2, state: CellState) -> Self {
        Self { width_cells, height_cells, cell_size, origin, cells: vec![state; width_cells * height_cells] }
    }

    /// Builds a grid from rows of characters, top row first. `#` is an
    /// obstacle, anything else is free.
    pub fn from_ascii(rows: &[&str], cell_size: f64) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut grid = Self::filled(width, height, cell_size, Vec2::ZERO, CellState::Free);
        for (r, row) in rows.iter().enumerate() {
            let j = height - 1 - r;
            for (i, ch) in row.chars().enumerate() {
                if ch == '#' {
                    grid.set(CellIndex::new(i, j), CellState::Obstacle);
                }
            }
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn flat(&self, c: CellIndex) -> usize {
        c.j * self.width_cells + c.i
    }

    pub fn unflat(&self, k: usize) -> CellIndex {
        CellIndex::new(k % self.width_cells, k / self.width_cells)
    }

    pub fn get(&self, c: CellIndex) -> CellState {
        self.cells[self.flat(c)]
    }

    pub fn set(&mut self, c: CellIndex, state: CellState) {
        let k = self.flat(c);
        self.cells[k] = state;
    }

    pub fn is_free(&self, c: CellIndex) -> bool {
        self.get(c) == CellState::Free
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&s| s == CellState::Free).count()
    }

    pub fn obstacle_count(&self) -> usize {
        self.len() - self.free_count()
    }

    pub fn cell_rect(&self, c: CellIndex) -> Rect {
        let min = self.origin + Vec2::new(c.i as f64, c.j as f64) * self.cell_size;
        Rect::new(min, min + Vec2::new(self.cell_size, self.cell_size))
    }

    pub fn cell_center(&self, c: CellIndex) -> Vec2 {
        self.origin + Vec2::new(c.i as f64 + 0.5, c.j as f64 + 0.5) * self.cell_size
    }

    /// Cell containing a world point, if inside the grid.
    pub fn locate(&self, p: Vec2) -> Option<CellIndex> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width_cells as f64 || fy >= self.height_cells as f64 {
            return None;
        }
        Some(CellIndex::new(fx as usize, fy as usize))
    }

    pub fn neighbor(&self, c: CellIndex, d: Direction) -> Option<CellIndex> {
        let (di, dj) = d.step();
        let i = c.i as isize + di;
        let j = c.j as isize + dj;
        (i >= 0 && j >= 0 && (i as usize) < self.width_cells && (j as usize) < self.height_cells)
            .then(|| CellIndex::new(i as usize, j as usize))
    }

    pub fn indices(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.height_cells).flat_map(move |j| (0..self.width_cells).map(move |i| CellIndex::new(i, j)))
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin,
            self.origin + Vec2::new(self.width_cells as f64, self.height_cells as f64) * self.cell_size,
        )
    }

    /// Obstacle cells 4-adjacent to at least one free cell.
    pub fn is_obstacle_boundary(&self, c: CellIndex) -> bool {
        !self.is_free(c) && Direction::ALL.iter().any(|&d| self.neighbor(c, d).is_some_and(|n| self.is_free(n)))
    }

    /// Cells whose rectangles overlap the axis-aligned box `[lo, hi]`, clamped to the grid.
    pub fn cells_in_box(&self, lo: Vec2, hi: Vec2) -> impl Iterator<Item = CellIndex> {
        let span = |v: f64, o: f64, n: usize| -> Option<usize> {
            let f = ((v - o) / self.cell_size).floor();
            if f < 0.0 {
                Some(0).filter(|_| n > 0)
            } else {
                Some((f as usize).min(n.saturating_sub(1)))
            }
        };
        let (w, h) = (self.width_cells, self.height_cells);
        let outside = hi.x < self.origin.x
            || hi.y < self.origin.y
            || lo.x > self.origin.x + w as f64 * self.cell_size
            || lo.y > self.origin.y + h as f64 * self.cell_size;
        let range = (!outside).then(|| {
            (
                span(lo.x, self.origin.x, w).unwrap_or(0),
                span(hi.x, self.origin.x, w).unwrap_or(0),
                span(lo.y, self.origin.y, h).unwrap_or(0),
                span(hi.y, self.origin.y, h).unwrap_or(0),
            )
        });
        range
            .into_iter()
            .flat_map(|(i0, i1, j0, j1)| (j0..=j1).flat_map(move |j| (i0..=i1).map(move |i| CellIndex::new(i, j))))
    }

    /// True when the segment `a`-`b` enters no obstacle cell interior other
    /// than `except`.
    pub fn line_of_sight(&self, a: Vec2, b: Vec2, except: Option<CellIndex>) -> bool {
        let seg = Segment::new(a, b);
        let lo = Vec2::new(a.x.min(b.x), a.y.min(b.y));
        let hi = Vec2::new(a.x.max(b.x), a.y.max(b.y));
        self.cells_in_box(lo, hi)
            .filter(|&c| Some(c) != except && !self.is_free(c))
            .all(|c| !seg.intersects_open_rect(&self.cell_rect(c)))
    }
}

/// Number of cells needed to cover `length` meters, tolerant to float noise.
fn cells_to_cover(length: f64, cell_size: f64) -> usize {
    let ratio = length / cell_size;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Rasterizes polygon obstacles onto a grid with a horizontal scanline
/// through every row center.
///
/// A cell is an obstacle when the scanline span inside any polygon overlaps
/// the cell, or when any polygon edge enters the open cell rectangle, so thin
/// features are never lost. Cells overhanging the bounds (when the bounds are
/// not a multiple of the cell size) are obstacles.
pub fn rasterize(obstacles: &[PolygonObstacle], bounds: Rect, cell_size: f64) -> Result<GridMap, RasterError> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(RasterError::CellSize(cell_size));
    }
    if bounds.is_degenerate() {
        return Err(RasterError::DegenerateBounds);
    }
    for (index, poly) in obstacles.iter().enumerate() {
        poly.validate().map_err(|reason| RasterError::InvalidPolygon { index, reason })?;
    }

    let width = cells_to_cover(bounds.width(), cell_size).max(1);
    let height = cells_to_cover(bounds.height(), cell_size).max(1);
    let mut grid = GridMap::filled(width, height, cell_size, bounds.min, CellState::Free);

    let overhang_x = bounds.min.x + width as f64 * cell_size > bounds.max.x + 1e-9 * cell_size;
    let overhang_y = bounds.min.y + height as f64 * cell_size > bounds.max.y + 1e-9 * cell_size;
    if overhang_x {
        for j in 0..height {
            grid.set(CellIndex::new(width - 1, j), CellState::Obstacle);
        }
    }
    if overhang_y {
        for i in 0..width {
            grid.set(CellIndex::new(i, height - 1), CellState::Obstacle);
        }
    }

    let mut crossings: Vec<f64> = Vec::new();
    for poly in obstacles {
        // Span fill along each row's center line.
        for j in 0..height {
            let y = bounds.min.y + (j as f64 + 0.5) * cell_size;
            crossings.clear();
            for e in polygon_edges(&poly.vertices) {
                if (e.a.y > y) != (e.b.y > y) {
                    crossings.push(e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y));
                }
            }
            crossings.sort_by(f64::total_cmp);
            for pair in crossings.chunks_exact(2) {
                let (x0, x1) = (pair[0], pair[1]);
                if x1 <= x0 {
                    continue;
                }
                let first = ((x0 - bounds.min.x) / cell_size).floor().max(0.0) as usize;
                let last = (((x1 - bounds.min.x) / cell_size).ceil() as isize - 1).min(width as isize - 1);
                if last < 0 {
                    continue;
                }
                for i in first..=last as usize {
                    let r = grid.cell_rect(CellIndex::new(i, j));
                    if x1 > r.min.x && x0 < r.max.x {
                        grid.set(CellIndex::new(i, j), CellState::Obstacle);
                    }
                }
            }
        }
        // Conservative closure: every cell an edge passes through.
        for e in polygon_edges(&poly.vertices) {
            let lo = Vec2::new(e.a.x.min(e.b.x), e.a.y.min(e.b.y)) - bounds.min;
            let hi = Vec2::new(e.a.x.max(e.b.x), e.a.y.max(e.b.y)) - bounds.min;
            let i0 = (lo.x / cell_size).floor().max(0.0) as usize;
            let j0 = (lo.y / cell_size).floor().max(0.0) as usize;
            let i1 = ((hi.x / cell_size).floor() as isize).min(width as isize - 1);
            let j1 = ((hi.y / cell_size).floor() as isize).min(height as isize - 1);
            if i1 < 0 || j1 < 0 {
                continue;
            }
            for j in j0..=j1 as usize {
                for i in i0..=i1 as usize {
                    let c = CellIndex::new(i, j);
                    if grid.is_free(c) && e.intersects_open_rect(&grid.cell_rect(c)) {
                        grid.set(c, CellState::Obstacle);
                    }
                }
            }
        }
    }
    Ok(grid)
}
