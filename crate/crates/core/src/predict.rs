//! Path length, turn angle, turnaround time and coverage predictions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_pi, Segment, Vec2};
use crate::grid::{CellIndex, GridMap};
use crate::path::CoveragePath;

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("path needs at least two waypoints, got {0}")]
    TooShort(usize),
    #[error("segment {0} has zero length")]
    ZeroLengthSegment(usize),
    #[error("{name} must be positive and finite, got {value}")]
    Parameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_path_length: f64,
    pub max_time: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub path_length: f64,
    pub total_turn_angle: f64,
    pub turnaround_time: f64,
}

/// Length, summed absolute heading change, and `L/v + n_t * theta/omega`.
///
/// Closed paths include the closing segment and the corner back at the
/// first waypoint.
pub fn predict_kinematics(path: &CoveragePath, v: f64, omega: f64, n_t: f64) -> Result<Kinematics, PredictError> {
    for (name, value) in [("v", v), ("omega", omega)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(PredictError::Parameter { name, value });
        }
    }
    if !(n_t >= 0.0 && n_t.is_finite()) {
        return Err(PredictError::Parameter { name: "n_t", value: n_t });
    }
    if path.len() < 2 {
        return Err(PredictError::TooShort(path.len()));
    }
    let segs = path.segments();
    if let Some(k) = segs.iter().position(|s| s.length() == 0.0) {
        return Err(PredictError::ZeroLengthSegment(k));
    }
    let path_length: f64 = segs.iter().map(Segment::length).sum();
    let corners = if path.closed { segs.len() } else { segs.len() - 1 };
    let total_turn_angle: f64 =
        (0..corners).map(|k| wrap_pi(segs[(k + 1) % segs.len()].heading() - segs[k].heading()).abs()).sum();
    Ok(Kinematics { path_length, total_turn_angle, turnaround_time: path_length / v + n_t * total_turn_angle / omega })
}

/// Width of the directly swept corridor on either side of the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Halfwidth {
    Fixed(f64),
    /// Half the local block width, `block_size * cell_size / 2`.
    BlockScaled { cell_size: f64 },
}

impl Halfwidth {
    fn for_segment(&self, path: &CoveragePath, k: usize) -> f64 {
        match *self {
            Halfwidth::Fixed(w) => w,
            Halfwidth::BlockScaled { cell_size } => path.segment_block_size(k) as f64 * cell_size / 2.0,
        }
    }

    fn at_waypoint(&self, path: &CoveragePath, k: usize) -> f64 {
        match *self {
            Halfwidth::Fixed(w) => w,
            Halfwidth::BlockScaled { cell_size } => path.waypoints[k].block_size as f64 * cell_size / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePrediction {
    pub coverage_percent: f64,
    /// Free cells swept by the formation, sorted.
    pub direct_cells: Vec<CellIndex>,
    /// Free cells seen by the range sensor only, sorted.
    pub indirect_cells: Vec<CellIndex>,
    /// Boundary obstacle cells seen by the range sensor, sorted.
    pub observed_obstacles: Vec<CellIndex>,
    /// Free cells plus obstacle cells bordering free space.
    pub denominator: usize,
}

/// Predicts which cells of `grid` the team sweeps or observes along `path`.
///
/// Direct cells are free cells the polyline passes through or whose center
/// is within the corridor half-width. Free cells and boundary obstacle cells
/// whose center is within `sensing_range` of the path and visible from the
/// nearest path point count as observed. The ratio is taken over free cells
/// plus all boundary obstacle cells.
pub fn predict_coverage(path: &CoveragePath, grid: &GridMap, sensing_range: f64, halfwidth: Halfwidth) -> CoveragePrediction {
    let n = grid.len();
    let mut direct = vec![false; n];
    // a lone waypoint still sweeps its own neighbourhood
    let pieces: Vec<(Segment, f64)> = match path.len() {
        0 => Vec::new(),
        1 => vec![(Segment::new(path.waypoints[0].point, path.waypoints[0].point), halfwidth.at_waypoint(path, 0))],
        _ => path.segments().into_iter().enumerate().map(|(k, s)| (s, halfwidth.for_segment(path, k))).collect(),
    };
    for &(s, w) in &pieces {
        let pad = Vec2::new(w, w);
        let (lo, hi) = bbox(&s);
        for c in grid.cells_in_box(lo - pad, hi + pad) {
            if !grid.is_free(c) || direct[grid.flat(c)] {
                continue;
            }
            if s.intersects_closed_rect(&grid.cell_rect(c)) || s.distance_to(grid.cell_center(c)) <= w {
                direct[grid.flat(c)] = true;
            }
        }
    }

    let mut indirect = Vec::new();
    let mut observed = Vec::new();
    let mut denominator = 0;
    let reach = Vec2::new(sensing_range, sensing_range);
    for c in grid.indices() {
        let free = grid.is_free(c);
        if !free && !grid.is_obstacle_boundary(c) {
            continue;
        }
        denominator += 1;
        if direct[grid.flat(c)] {
            continue;
        }
        let center = grid.cell_center(c);
        let mut candidates: Vec<(f64, Vec2)> = pieces
            .iter()
            .map(|(s, _)| s)
            .filter(|s| {
                let (lo, hi) = bbox(s);
                center.x >= lo.x - reach.x && center.x <= hi.x + reach.x && center.y >= lo.y - reach.y && center.y <= hi.y + reach.y
            })
            .map(|s| {
                let p = s.closest_point(center);
                (p.distance(center), p)
            })
            .filter(|&(d, _)| d <= sensing_range)
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        if candidates.iter().any(|&(_, p)| grid.line_of_sight(p, center, Some(c))) {
            if free {
                indirect.push(c);
            } else {
                observed.push(c);
            }
        }
    }
    let direct_cells: Vec<CellIndex> = grid.indices().filter(|&c| direct[grid.flat(c)]).collect();
    let seen = direct_cells.len() + indirect.len() + observed.len();
    let coverage_percent = if denominator == 0 { 0.0 } else { seen as f64 / denominator as f64 };
    CoveragePrediction { coverage_percent, direct_cells, indirect_cells: indirect, observed_obstacles: observed, denominator }
}

fn bbox(s: &Segment) -> (Vec2, Vec2) {
    (Vec2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y)), Vec2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPrediction {
    pub path_length: f64,
    pub turnaround_time: f64,
    pub total_turn_angle: f64,
    pub coverage_percent: f64,
    pub direct_cells: Vec<CellIndex>,
    pub indirect_cells: Vec<CellIndex>,
    pub observed_obstacles: Vec<CellIndex>,
}

impl PlanPrediction {
    pub fn new(k: Kinematics, c: CoveragePrediction) -> Self {
        Self {
            path_length: k.path_length,
            turnaround_time: k.turnaround_time,
            total_turn_angle: k.total_turn_angle,
            coverage_percent: c.coverage_percent,
            direct_cells: c.direct_cells,
            indirect_cells: c.indirect_cells,
            observed_obstacles: c.observed_obstacles,
        }
    }
}
