//! Leader-follower formation: shapes, role assignment, spring and goal
//! forces, and the virtual leader's progress along the path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_pi, Pose, Segment, Vec2};
use crate::path::CoveragePath;

#[derive(Debug, Error, PartialEq)]
pub enum FormationError {
    #[error("formation needs at least one vehicle")]
    NoVehicles,
    #[error("cost matrix must be square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("cost matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("block size must be at least 1")]
    BlockSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormationShape {
    /// Wedge trailing the leader.
    V,
    /// Line abreast one step behind the leader.
    U,
    /// Single file.
    Q,
}

/// Single file for one-cell blocks, otherwise `wide` (V or U).
pub fn select_shape(block_size_cells: usize, wide: FormationShape) -> FormationShape {
    if block_size_cells <= 1 {
        FormationShape::Q
    } else {
        wide
    }
}

/// Scaling of the slot pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationGeometry {
    /// Fraction of the block width the wide shapes may span.
    pub swath_fraction: f64,
    /// Lower bound on the spacing between neighbouring slots.
    pub min_spacing: f64,
    /// Separation radius; single-file spacing is at least this.
    pub separation_radius: f64,
}

impl Default for FormationGeometry {
    fn default() -> Self {
        Self { swath_fraction: 1.0, min_spacing: 0.0, separation_radius: 1.1 }
    }
}

/// Slot offsets per role, as (lateral to the left, forward) in the leader frame.
///
/// Wide shapes use spacing `s = swath * BS * CS / (2 * ceil(n_q / 2))`; role `k` (from 1)
/// sits at lateral `(-1)^k * ceil(k/2) * s`, clamped to half the swath. V
/// places it `ceil(k/2) * s` behind the leader, U a constant `s` behind.
/// Single file places role `k` at `k * max(separation, CS/2)` behind.
pub fn formation_offsets(
    shape: FormationShape,
    block_size_cells: usize,
    cell_size: f64,
    n_q: usize,
    geometry: &FormationGeometry,
) -> Result<Vec<Vec2>, FormationError> {
    if n_q == 0 {
        return Err(FormationError::NoVehicles);
    }
    if block_size_cells == 0 {
        return Err(FormationError::BlockSize);
    }
    let width = geometry.swath_fraction * block_size_cells as f64 * cell_size;
    // outermost rank sits on the swath edge, so odd fleets are not clamped
    let s = (width / (2 * n_q.div_ceil(2)) as f64).max(geometry.min_spacing);
    if shape == FormationShape::Q {
        let sq = geometry.separation_radius.max(cell_size / 2.0).max(geometry.min_spacing);
        return Ok((1..=n_q).map(|k| Vec2::new(0.0, -(k as f64) * sq)).collect());
    }
    if n_q == 1 {
        return Ok(vec![Vec2::new(0.0, -s)]);
    }
    let half = width / 2.0;
    Ok((1..=n_q)
        .map(|k| {
            let rank = k.div_ceil(2) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let lateral = (sign * rank * s).clamp(-half, half);
            let back = match shape {
                FormationShape::V => rank * s,
                _ => s,
            };
            Vec2::new(lateral, -back)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { x: 0.35, y: 0.35, heading: 0.3 }
    }
}

/// Weighted displacement from a vehicle's pose to a role slot.
pub fn role_cost(ugv: Pose, slot: Pose, w: &CostWeights) -> f64 {
    let d = slot.position - ugv.position;
    w.x * d.x.abs() + w.y * d.y.abs() + w.heading * wrap_pi(slot.heading - ugv.heading).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignMode {
    /// Roles in order each take the free vehicle with the largest cost.
    #[default]
    MaxCost,
    /// Minimum total cost matching.
    MinCost,
}

/// Role-to-vehicle map for `costs[ugv][role]`.
pub fn assign_roles(costs: &[Vec<f64>], mode: AssignMode) -> Result<Vec<usize>, FormationError> {
    let n = costs.len();
    for (row, r) in costs.iter().enumerate() {
        if r.len() != n {
            return Err(FormationError::NotSquare { row, len: r.len(), n });
        }
        if let Some(col) = r.iter().position(|c| !c.is_finite()) {
            return Err(FormationError::NonFinite(row, col));
        }
    }
    Ok(match mode {
        AssignMode::MaxCost => {
            let mut taken = vec![false; n];
            (0..n)
                .map(|role| {
                    let mut best: Option<usize> = None;
                    for ugv in (0..n).filter(|&u| !taken[u]) {
                        if best.is_none_or(|b| costs[ugv][role] > costs[b][role]) {
                            best = Some(ugv);
                        }
                    }
                    let ugv = best.expect("one vehicle per role");
                    taken[ugv] = true;
                    ugv
                })
                .collect()
        }
        AssignMode::MinCost => hungarian(costs),
    })
}

/// Minimum-cost perfect matching (shortest augmenting paths with potentials).
fn hungarian(costs: &[Vec<f64>]) -> Vec<usize> {
    let n = costs.len();
    // 1-based arrays; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = costs[r - 1][col - 1] - u[r] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|role| owner[role] - 1).collect()
}

/// Linear spring pulling a vehicle toward its slot.
pub fn spring_force(slot: Vec2, position: Vec2, k0: f64) -> Vec2 {
    (slot - position) * k0
}

/// Slows the leader as the lead follower falls behind: full speed up to
/// `l_low`, linearly down to zero at `l_high`.
pub fn leader_speed(v_nominal: f64, distance: f64, l_low: f64, l_high: f64) -> f64 {
    v_nominal * (1.0 - ((distance - l_low) / (l_high - l_low)).clamp(0.0, 1.0))
}

pub fn goal_force(next_waypoint: Vec2, reference: Vec2, weight: f64) -> Vec2 {
    (next_waypoint - reference) * weight
}

/// Arc-length bookkeeping along a path polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrack {
    segments: Vec<Segment>,
    block_sizes: Vec<usize>,
    closed: bool,
    total: f64,
}

/// Position on a [`PathTrack`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArcCursor {
    pub segment: usize,
    /// Distance already covered on the current segment.
    pub offset: f64,
    /// Distance covered since the start.
    pub travelled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Moving,
    /// An open path ran out or a closed loop finished its lap.
    Completed,
}

impl PathTrack {
    pub fn new(path: &CoveragePath) -> Self {
        let (segments, block_sizes): (Vec<Segment>, Vec<usize>) = path
            .segments()
            .into_iter()
            .enumerate()
            .filter(|(_, s)| s.length() > 0.0)
            .map(|(k, s)| (s, path.segment_block_size(k)))
            .unzip();
        let total = segments.iter().map(Segment::length).sum();
        Self { segments, block_sizes, closed: path.closed, total }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Block size governing segment `k`.
    pub fn block_size(&self, k: usize) -> usize {
        self.block_sizes.get(k).copied().unwrap_or(1)
    }

    /// Pose at arc length `arc` from the start; wraps on closed paths and
    /// clamps on open ones.
    pub fn pose_at(&self, arc: f64) -> Pose {
        if self.segments.is_empty() {
            return Pose::default();
        }
        if !self.closed && arc < 0.0 {
            // open tracks extend straight back from their start
            let first = self.segments[0];
            return Pose::new(first.a + Vec2::from_angle(first.heading()) * arc, first.heading());
        }
        let mut s = if self.closed { arc.rem_euclid(self.total) } else { arc.min(self.total) };
        for seg in &self.segments {
            let len = seg.length();
            if s <= len {
                return Pose::new(seg.a + (seg.b - seg.a) * (s / len), seg.heading());
            }
            s -= len;
        }
        let last = self.segments[self.segments.len() - 1];
        Pose::new(last.b, last.heading())
    }

    pub fn total_length(&self) -> f64 {
        self.total
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn pose(&self, c: &ArcCursor) -> Pose {
        match self.segments.get(c.segment) {
            Some(s) => {
                let t = if s.length() > 0.0 { c.offset / s.length() } else { 0.0 };
                Pose::new(s.a + (s.b - s.a) * t, s.heading())
            }
            None => Pose::default(),
        }
    }

    /// Endpoint of the current segment.
    pub fn next_waypoint(&self, c: &ArcCursor) -> Vec2 {
        self.segments.get(c.segment).map_or(Vec2::ZERO, |s| s.b)
    }

    /// Moves `distance` along the path, carrying over segment ends; stops at
    /// the end of an open path or after one full lap of a closed one.
    pub fn advance(&self, c: ArcCursor, distance: f64) -> (ArcCursor, Progress) {
        if self.segments.is_empty() {
            return (c, Progress::Completed);
        }
        let mut c = c;
        let mut left = distance.max(0.0).min(self.total - c.travelled);
        while left > 0.0 {
            let seg_len = self.segments[c.segment].length();
            let room = seg_len - c.offset;
            if left < room {
                c.offset += left;
                c.travelled += left;
                left = 0.0;
            } else {
                left -= room;
                c.travelled += room;
                if c.segment + 1 == self.segments.len() {
                    c.offset = seg_len;
                    break;
                }
                c.segment += 1;
                c.offset = 0.0;
            }
        }
        let done = c.travelled >= self.total - 1e-12 * self.total.max(1.0);
        if done {
            c.travelled = self.total;
            let last = self.segments.len() - 1;
            c.segment = last;
            c.offset = self.segments[last].length();
        }
        (c, if done { Progress::Completed } else { Progress::Moving })
    }

    /// Segment index following `k`, wrapping on closed paths.
    pub fn following(&self, k: usize) -> Option<usize> {
        if k + 1 < self.segments.len() {
            Some(k + 1)
        } else if self.closed && !self.segments.is_empty() {
            Some(0)
        } else {
            None
        }
    }
}

/// One-step leader advance: arc length `v_q0 * dt` along `track`.
pub fn advance_waypoint(track: &PathTrack, cursor: ArcCursor, v_q0: f64, dt: f64) -> (ArcCursor, Pose, Progress) {
    let (c, p) = track.advance(cursor, v_q0 * dt);
    (c, track.pose(&c), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec2, b: Vec2) -> bool {
        a.distance(b) < 1e-12
    }

    #[test]
    fn shapes_by_block_size() {
        assert_eq!(select_shape(1, FormationShape::V), FormationShape::Q);
        assert_eq!(select_shape(4, FormationShape::V), FormationShape::V);
        assert_eq!(select_shape(2, FormationShape::U), FormationShape::U);
    }

    #[test]
    fn wedge_offsets() {
        let g = FormationGeometry::default();
        let v = formation_offsets(FormationShape::V, 4, 2.0, 4, &g).unwrap();
        let want = [(-2.0, -2.0), (2.0, -2.0), (-4.0, -4.0), (4.0, -4.0)];
        for (o, w) in v.iter().zip(want) {
            assert!(close(*o, Vec2::new(w.0, w.1)), "{o:?}");
        }
        let q = formation_offsets(FormationShape::Q, 1, 1.0, 3, &g).unwrap();
        assert!(close(q[2], Vec2::new(0.0, -3.3)));
        let one = formation_offsets(FormationShape::V, 4, 2.0, 1, &g).unwrap();
        assert_eq!(one, vec![Vec2::new(0.0, -4.0)]);
        assert_eq!(formation_offsets(FormationShape::V, 4, 2.0, 0, &g), Err(FormationError::NoVehicles));
    }

    #[test]
    fn lateral_extent_is_clamped() {
        let g = FormationGeometry::default();
        let u = formation_offsets(FormationShape::U, 2, 1.0, 5, &g).unwrap();
        assert!(u.iter().all(|o| o.x.abs() <= 1.0 + 1e-12 && (o.y + 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn cost_example() {
        let ugv = Pose::new(Vec2::ZERO, 0.0);
        let slot = Pose::new(Vec2::new(1.0, 2.0), 0.5);
        assert!((role_cost(ugv, slot, &CostWeights::default()) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn assignment_examples() {
        assert_eq!(assign_roles(&[vec![1.0, 0.0], vec![0.0, 1.0]], AssignMode::MaxCost).unwrap(), vec![0, 1]);
        assert_eq!(assign_roles(&vec![vec![1.0; 3]; 3], AssignMode::MaxCost).unwrap(), vec![0, 1, 2]);
        assert_eq!(assign_roles(&[vec![1.0, 0.0], vec![0.0, 1.0]], AssignMode::MinCost).unwrap(), vec![1, 0]);
        assert!(assign_roles(&[vec![1.0, 0.0]], AssignMode::MaxCost).is_err());
    }

    #[test]
    fn speed_governor() {
        assert_eq!(leader_speed(1.0, 0.2, 0.5, 2.0), 1.0);
        assert_eq!(leader_speed(1.0, 3.0, 0.5, 2.0), 0.0);
        assert!((leader_speed(1.0, 1.25, 0.5, 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn forces() {
        assert_eq!(spring_force(Vec2::new(-1.0, 0.0), Vec2::new(-2.0, 0.0), 5.0), Vec2::new(5.0, 0.0));
        let g = goal_force(Vec2::new(2.0, 0.0), Vec2::ZERO, 1.1);
        assert!(close(g, Vec2::new(2.2, 0.0)));
    }

    #[test]
    fn advance_across_corner() {
        let path = CoveragePath::open(&[Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)], 1);
        let track = PathTrack::new(&path);
        let start = ArcCursor { segment: 0, offset: 0.98, travelled: 0.98 };
        let (c, pose, p) = advance_waypoint(&track, start, 0.05, 1.0);
        assert_eq!(p, Progress::Moving);
        assert_eq!(c.segment, 1);
        assert!((c.offset - 0.03).abs() < 1e-12);
        assert!(close(pose.position, Vec2::new(1.0, 0.03)));
        assert!((pose.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let (_, _, p) = advance_waypoint(&track, c, 10.0, 1.0);
        assert_eq!(p, Progress::Completed);
        let (same, _, _) = advance_waypoint(&track, c, 0.0, 1.0);
        assert_eq!(same, c);
    }
}
