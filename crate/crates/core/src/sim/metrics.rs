//! Coverage, redundancy, and group/order bookkeeping.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::grid::{CellIndex, GridMap};

/// Per-cell visit and observation state during a run.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    /// Entries per vehicle per cell.
    visits: Vec<Vec<u32>>,
    observed: Vec<bool>,
    current: Vec<Option<CellIndex>>,
    /// Fraction of the cell size a vehicle must be inside a new cell before
    /// it counts as entered.
    margin: f64,
    sensing_range: f64,
    visibility: BTreeMap<usize, Vec<usize>>,
    counted: Vec<bool>,
    denominator: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    /// Swept plus observed, over free and boundary obstacle cells.
    pub coverage_percent: f64,
    pub direct_percent: f64,
    pub indirect_percent: f64,
    /// Mean over vehicles of the share of free cells it entered twice or more.
    pub redundancy_percent: f64,
}

impl CoverageTracker {
    pub fn new(grid: &GridMap, n_ugvs: usize, sensing_range: f64, margin: f64) -> Self {
        let counted: Vec<bool> = grid.indices().map(|c| grid.is_free(c) || grid.is_obstacle_boundary(c)).collect();
        let denominator = counted.iter().filter(|&&b| b).count();
        Self {
            visits: vec![vec![0; grid.len()]; n_ugvs],
            observed: vec![false; grid.len()],
            current: vec![None; n_ugvs],
            margin,
            sensing_range,
            visibility: BTreeMap::new(),
            counted,
            denominator,
        }
    }

    /// Records vehicle `ugv` at `p`; returns true when it entered a new cell.
    pub fn update(&mut self, grid: &GridMap, ugv: usize, p: Vec2) -> bool {
        let Some(c) = grid.locate(p) else {
            return false;
        };
        if self.current[ugv] == Some(c) || !grid.is_free(c) {
            return false;
        }
        if self.current[ugv].is_some() {
            // hysteresis against chattering along a cell border
            let r = grid.cell_rect(c);
            let m = self.margin * grid.cell_size;
            if p.x < r.min.x + m || p.x > r.max.x - m || p.y < r.min.y + m || p.y > r.max.y - m {
                return false;
            }
        }
        self.current[ugv] = Some(c);
        let k = grid.flat(c);
        self.visits[ugv][k] += 1;
        let seen = self.visible_from(grid, k);
        for &v in &seen {
            self.observed[v] = true;
        }
        true
    }

    fn visible_from(&mut self, grid: &GridMap, k: usize) -> Vec<usize> {
        if let Some(v) = self.visibility.get(&k) {
            return v.clone();
        }
        let origin = grid.cell_center(grid.unflat(k));
        let reach = Vec2::new(self.sensing_range, self.sensing_range);
        let seen: Vec<usize> = grid
            .cells_in_box(origin - reach, origin + reach)
            .filter(|&c| self.counted[grid.flat(c)])
            .filter(|&c| {
                let center = grid.cell_center(c);
                center.distance(origin) <= self.sensing_range && grid.line_of_sight(origin, center, Some(c))
            })
            .map(|c| grid.flat(c))
            .collect();
        self.visibility.insert(k, seen.clone());
        seen
    }

    pub fn directly_covered(&self, k: usize) -> bool {
        self.visits.iter().any(|v| v[k] > 0)
    }

    pub fn summary(&self, grid: &GridMap) -> CoverageSummary {
        let free = grid.free_count();
        let mut direct = 0;
        let mut indirect = 0;
        for k in 0..grid.len() {
            if !self.counted[k] {
                continue;
            }
            if self.directly_covered(k) {
                direct += 1;
            } else if self.observed[k] {
                indirect += 1;
            }
        }
        let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let redundancy = if self.visits.is_empty() {
            0.0
        } else {
            self.visits.iter().map(|v| pct(v.iter().filter(|&&n| n >= 2).count(), free)).sum::<f64>() / self.visits.len() as f64
        };
        CoverageSummary {
            coverage_percent: pct(direct + indirect, self.denominator),
            direct_percent: pct(direct, self.denominator),
            indirect_percent: pct(indirect, self.denominator),
            redundancy_percent: redundancy,
        }
    }
}

/// Redundancy as a fraction: cells entered at least twice over free cells.
pub fn redundancy(visit_counts: &[u32], free_cells: usize) -> f64 {
    if free_cells == 0 {
        return 0.0;
    }
    visit_counts.iter().filter(|&&n| n >= 2).count() as f64 / free_cells as f64
}

/// Mean distance of the vehicles to their centroid, and mean deviation of
/// their velocities from the mean velocity.
pub fn group_order(positions: &[Vec2], velocities: &[Vec2]) -> (f64, f64) {
    let n = positions.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = |v: &[Vec2]| v.iter().fold(Vec2::ZERO, |a, &b| a + b) / v.len() as f64;
    let pc = mean(positions);
    let vc = mean(velocities);
    let g = positions.iter().map(|p| p.distance(pc)).sum::<f64>() / n as f64;
    let o = velocities.iter().map(|v| v.distance(vc)).sum::<f64>() / velocities.len() as f64;
    (g, o)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupOrderSample {
    pub tick: u64,
    pub group: f64,
    pub order: f64,
}

/// Every `every` ticks, averages G and O over the preceding `window` ticks.
#[derive(Debug, Clone)]
pub struct GroupOrderSampler {
    every: u64,
    window: usize,
    recent: VecDeque<(f64, f64)>,
    pub samples: Vec<GroupOrderSample>,
}

impl GroupOrderSampler {
    pub fn new(every: u64, window: usize) -> Self {
        Self { every: every.max(1), window: window.max(1), recent: VecDeque::new(), samples: Vec::new() }
    }

    pub fn record(&mut self, tick: u64, positions: &[Vec2], velocities: &[Vec2]) {
        self.recent.push_back(group_order(positions, velocities));
        if self.recent.len() > self.window {
            self.recent.pop_front();
        }
        if tick > 0 && tick.is_multiple_of(self.every) {
            let n = self.recent.len() as f64;
            let (g, o) = self.recent.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            self.samples.push(GroupOrderSample { tick, group: g / n, order: o / n });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellState;

    #[test]
    fn redundancy_fraction() {
        let mut counts = vec![1u32; 100];
        for c in counts.iter_mut().take(5) {
            *c = 2;
        }
        assert!((redundancy(&counts, 100) - 0.05).abs() < 1e-12);
        assert_eq!(redundancy(&[1; 10], 10), 0.0);
    }

    #[test]
    fn group_and_order() {
        let (g, o) = group_order(&[Vec2::ZERO, Vec2::new(2.0, 0.0)], &[Vec2::ZERO, Vec2::ZERO]);
        assert_eq!((g, o), (1.0, 0.0));
        let v = Vec2::new(0.3, 0.4);
        assert_eq!(group_order(&[Vec2::new(5.0, 5.0)], &[v]), (0.0, 0.0));
        assert_eq!(group_order(&[Vec2::ZERO, Vec2::ZERO], &[v, v]).1, 0.0);
    }

    #[test]
    fn sampler_windows() {
        let mut s = GroupOrderSampler::new(500, 150);
        for t in 0..=1000 {
            s.record(t, &[Vec2::ZERO, Vec2::new(2.0, 0.0)], &[Vec2::ZERO, Vec2::ZERO]);
        }
        assert_eq!(s.samples.len(), 2);
        assert_eq!(s.samples[0].tick, 500);
        assert!((s.samples[1].group - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tracker_counts_entries() {
        let grid = GridMap::filled(4, 1, 1.0, Vec2::ZERO, CellState::Free);
        let mut t = CoverageTracker::new(&grid, 1, 0.0, 0.1);
        assert!(t.update(&grid, 0, Vec2::new(0.5, 0.5)));
        // too close to the border to count yet
        assert!(!t.update(&grid, 0, Vec2::new(1.05, 0.5)));
        assert!(t.update(&grid, 0, Vec2::new(1.5, 0.5)));
        assert!(t.update(&grid, 0, Vec2::new(0.5, 0.5)));
        let s = t.summary(&grid);
        assert!((s.direct_percent - 0.5).abs() < 1e-12);
        assert!((s.redundancy_percent - 0.25).abs() < 1e-12);
    }
}
