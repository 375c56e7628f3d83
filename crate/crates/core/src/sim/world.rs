//! Static and moving geometry, and the synthetic range sensor.

use serde::{Deserialize, Serialize};

use crate::avoidance::LidarScan;
use crate::geometry::{point_in_polygon, polygon_edges, ray_circle, ray_segment, Rect, Segment, Vec2};
use crate::grid::PolygonObstacle;

/// A disc looping along closed waypoints at constant speed; one waypoint
/// makes it static.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingDisc {
    pub waypoints: Vec<Vec2>,
    pub speed: f64,
    pub radius: f64,
}

impl MovingDisc {
    pub fn fixed(center: Vec2, radius: f64) -> Self {
        Self { waypoints: vec![center], speed: 0.0, radius }
    }

    pub fn position(&self, time: f64) -> Vec2 {
        let n = self.waypoints.len();
        if n < 2 || self.speed <= 0.0 {
            return self.waypoints.first().copied().unwrap_or_default();
        }
        let legs: Vec<Segment> = (0..n).map(|k| Segment::new(self.waypoints[k], self.waypoints[(k + 1) % n])).collect();
        let perimeter: f64 = legs.iter().map(Segment::length).sum();
        if perimeter == 0.0 {
            return self.waypoints[0];
        }
        let mut s = (self.speed * time).rem_euclid(perimeter);
        for leg in &legs {
            let len = leg.length();
            if s <= len {
                return if len > 0.0 { leg.a + (leg.b - leg.a) * (s / len) } else { leg.a };
            }
            s -= len;
        }
        self.waypoints[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub bounds: Rect,
    pub obstacles: Vec<PolygonObstacle>,
    pub movers: Vec<MovingDisc>,
    walls: Vec<Segment>,
}

impl World {
    pub fn new(bounds: Rect, obstacles: Vec<PolygonObstacle>, movers: Vec<MovingDisc>) -> Self {
        let corners = bounds.corners();
        let mut walls: Vec<Segment> = polygon_edges(&corners).collect();
        for o in &obstacles {
            walls.extend(polygon_edges(&o.vertices));
        }
        Self { bounds, obstacles, movers, walls }
    }

    /// Map boundary and obstacle edges.
    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    /// Distance from `p` to the nearest static surface; negative inside an
    /// obstacle or outside the bounds.
    pub fn clearance(&self, p: Vec2) -> f64 {
        let d = self.walls.iter().map(|w| w.distance_to(p)).fold(f64::INFINITY, f64::min);
        let inside = !self.bounds.contains(p) || self.obstacles.iter().any(|o| point_in_polygon(p, &o.vertices));
        if inside {
            -d
        } else {
            d
        }
    }
}

/// Range scan from vehicle `index` of `positions`, beam 0 along `heading`.
///
/// Beams stop at the nearest wall, moving disc, or other vehicle (a disc
/// of `ugv_radius`), capped at `max_range`.
pub fn synth_scan(
    world: &World,
    time: f64,
    positions: &[Vec2],
    index: usize,
    heading: f64,
    ugv_radius: f64,
    max_range: f64,
    increment: f64,
) -> LidarScan {
    let origin = positions[index];
    let near_walls: Vec<Segment> = world.walls.iter().copied().filter(|w| w.distance_to(origin) <= max_range).collect();
    let mut discs: Vec<(Vec2, f64)> = world
        .movers
        .iter()
        .map(|m| (m.position(time), m.radius))
        .chain(positions.iter().enumerate().filter(|&(k, _)| k != index).map(|(_, &p)| (p, ugv_radius)))
        .collect();
    discs.retain(|&(c, r)| c.distance(origin) - r <= max_range);

    let n = LidarScan::beam_count(increment);
    let ranges = (0..n)
        .map(|k| {
            let dir = Vec2::from_angle(heading + k as f64 * increment);
            let walls = near_walls.iter().filter_map(|w| ray_segment(origin, dir, *w));
            let circles = discs.iter().filter_map(|&(c, r)| ray_circle(origin, dir, c, r));
            walls.chain(circles).fold(max_range, f64::min)
        })
        .collect();
    LidarScan { angle_increment: increment, ranges, max_range }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn open_world() -> World {
        World::new(Rect::new(Vec2::new(-50.0, -50.0), Vec2::new(50.0, 50.0)), vec![], vec![])
    }

    #[test]
    fn empty_world_reads_max_range() {
        let s = synth_scan(&open_world(), 0.0, &[Vec2::ZERO], 0, 0.0, 0.3, 5.0, PI / 180.0);
        assert_eq!(s.ranges.len(), 360);
        assert!(s.ranges.iter().all(|&r| r == 5.0));
    }

    #[test]
    fn wall_and_peer_hits() {
        let wall = PolygonObstacle::rectangle(Vec2::new(2.0, -1.0), Vec2::new(3.0, 1.0));
        let w = World::new(Rect::new(Vec2::new(-50.0, -50.0), Vec2::new(50.0, 50.0)), vec![wall], vec![]);
        let s = synth_scan(&w, 0.0, &[Vec2::ZERO], 0, 0.0, 0.3, 5.0, PI / 180.0);
        assert!((s.ranges[0] - 2.0).abs() < 1e-12);
        let s = synth_scan(&open_world(), 0.0, &[Vec2::ZERO, Vec2::new(1.0, 0.0)], 0, 0.0, 0.3, 5.0, PI / 180.0);
        assert!((s.ranges[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn discs_loop_along_waypoints() {
        let m = MovingDisc { waypoints: vec![Vec2::ZERO, Vec2::new(2.0, 0.0)], speed: 1.0, radius: 0.2 };
        assert!(m.position(1.0).distance(Vec2::new(1.0, 0.0)) < 1e-12);
        assert!(m.position(3.0).distance(Vec2::new(1.0, 0.0)) < 1e-12);
        assert_eq!(MovingDisc::fixed(Vec2::new(1.0, 1.0), 0.5).position(10.0), Vec2::new(1.0, 1.0));
    }

    #[test]
    fn clearance_sign() {
        let wall = PolygonObstacle::rectangle(Vec2::new(2.0, -1.0), Vec2::new(3.0, 1.0));
        let w = World::new(Rect::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)), vec![wall], vec![]);
        assert!((w.clearance(Vec2::ZERO) - 2.0).abs() < 1e-12);
        assert!(w.clearance(Vec2::new(2.5, 0.0)) < 0.0);
    }
}
