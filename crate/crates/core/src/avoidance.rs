//! Closest-safe-angle obstacle avoidance on range scans.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_pi, wrap_two_pi, Vec2};

/// One sweep of range readings; beam `k` points at `k * angle_increment`
/// relative to the vehicle heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub angle_increment: f64,
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

impl LidarScan {
    pub fn beam_count(angle_increment: f64) -> usize {
        (TAU / angle_increment).round().max(1.0) as usize
    }
}

/// Beam endpoints relative to the vehicle center, in world orientation.
pub fn scan_to_points(scan: &LidarScan, heading: f64) -> Vec<Vec2> {
    scan.ranges
        .iter()
        .enumerate()
        .map(|(k, &d)| Vec2::from_angle(wrap_two_pi(k as f64 * scan.angle_increment + heading)) * d)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threat {
    pub center: Vec2,
    pub radius: f64,
}

/// Discrete headings `k * increment` on `[0, 2pi)` and which are blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedSet {
    pub increment: f64,
    pub blocked: Vec<bool>,
    /// Per threat: center-line direction and half-width of its blocked cone.
    pub intervals: Vec<(f64, f64)>,
}

impl BlockedSet {
    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.increment
    }

    pub fn safe_angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.blocked.len()).filter(|&k| !self.blocked[k]).map(|k| self.angle(k))
    }

    pub fn blocked_angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.blocked.len()).filter(|&k| self.blocked[k]).map(|k| self.angle(k))
    }

    /// Whether a continuous heading falls inside any threat's cone.
    pub fn blocks(&self, heading: f64) -> bool {
        self.intervals.iter().any(|&(eta, beta)| in_cone(heading, eta, beta))
    }
}

fn in_cone(angle: f64, eta: f64, beta: f64) -> bool {
    let off = wrap_pi(angle - eta).abs();
    if beta >= FRAC_PI_2 {
        // contact: the open half-plane toward the threat, or everything
        beta > FRAC_PI_2 || off < FRAC_PI_2 - 1e-12
    } else {
        off <= beta + 1e-12
    }
}

/// Headings whose straight-line motion would bring a disc of radius `r`
/// at `origin` into contact with a threat.
///
/// Each threat at distance `|OC| > r + R_p` blocks the cone
/// `eta +- asin((r + R_p) / |OC|)`; closer threats block the half-plane
/// facing them and a threat at the origin blocks everything.
pub fn blocked_angles(threats: &[Threat], origin: Vec2, r: f64, increment: f64) -> BlockedSet {
    let n = LidarScan::beam_count(increment);
    let mut intervals = Vec::with_capacity(threats.len());
    for t in threats {
        let oc = t.center - origin;
        let dist = oc.norm();
        let reach = r + t.radius;
        let (eta, beta) = if dist <= 1e-12 {
            (0.0, PI)
        } else if dist <= reach {
            (wrap_two_pi(oc.angle()), FRAC_PI_2)
        } else {
            (wrap_two_pi(oc.angle()), (reach / dist).asin())
        };
        intervals.push((eta, beta));
    }
    let blocked = (0..n)
        .map(|k| {
            let a = k as f64 * increment;
            intervals.iter().any(|&(eta, beta)| in_cone(a, eta, beta))
        })
        .collect();
    BlockedSet { increment, blocked, intervals }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Heading {
    Angle(f64),
    Halt,
}

/// Safe heading nearest `target` (wrapped distance, ties to the smaller angle).
pub fn select_heading(set: &BlockedSet, target: f64) -> Heading {
    let target = wrap_two_pi(target);
    let mut best: Option<(f64, f64)> = None;
    for a in set.safe_angles() {
        let d = wrap_pi(a - target).abs();
        if best.is_none_or(|(bd, ba)| d < bd - 1e-12 || (d <= bd + 1e-12 && a < ba)) {
            best = Some((d, a));
        }
    }
    best.map_or(Heading::Halt, |(_, a)| Heading::Angle(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuseMode {
    /// Point the force at the safe heading, keeping its magnitude.
    #[default]
    Redirect,
    /// Rotate the force by the safe heading angle.
    RotateBy,
}

/// Replaces a force whose direction is blocked with one along the chosen
/// safe heading.
pub fn fuse_avoidance(force: Vec2, set: &BlockedSet, mode: FuseMode) -> Vec2 {
    if force.norm() == 0.0 || !set.blocks(force.angle()) {
        return force;
    }
    match select_heading(set, force.angle()) {
        Heading::Halt => Vec2::ZERO,
        Heading::Angle(a) => apply_heading(force, Heading::Angle(a), mode),
    }
}

/// The force after steering to `heading`.
pub fn apply_heading(force: Vec2, heading: Heading, mode: FuseMode) -> Vec2 {
    match (heading, mode) {
        (Heading::Halt, _) => Vec2::ZERO,
        (Heading::Angle(a), FuseMode::Redirect) => Vec2::from_angle(a) * force.norm(),
        (Heading::Angle(a), FuseMode::RotateBy) => force.rotate(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    pub max_speed: f64,
    pub max_turn_rate: f64,
    pub heading_gain: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self { max_speed: 1.0, max_turn_rate: PI / 2.0, heading_gain: 2.0 }
    }
}

/// Speed and turn-rate command for a desired velocity.
pub fn control_input(v_av: Vec2, heading: f64, limits: &ControlLimits) -> (f64, f64) {
    let speed = v_av.norm();
    if speed == 0.0 {
        return (0.0, 0.0);
    }
    let err = wrap_pi(v_av.angle() - heading);
    let omega = (limits.heading_gain * err).clamp(-limits.max_turn_rate, limits.max_turn_rate);
    (speed.min(limits.max_speed), omega)
}

/// Turns nearby scan returns into disc threats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreatExtraction {
    /// Returns farther than this are ignored.
    pub detection_range: f64,
    /// Consecutive returns farther apart than this start a new cluster.
    pub max_gap: f64,
    /// Clusters are split so no disc spans more than this chord.
    pub max_chord: f64,
    pub min_radius: f64,
    /// Added to every disc radius.
    pub inflation: f64,
}

impl Default for ThreatExtraction {
    fn default() -> Self {
        Self { detection_range: 1.6, max_gap: 0.3, max_chord: 0.6, min_radius: 0.05, inflation: 0.1 }
    }
}

/// Clusters angularly adjacent returns within range and wraps each cluster
/// in a disc centered at its chord midpoint.
pub fn extract_threats(scan: &LidarScan, heading: f64, origin: Vec2, cfg: &ThreatExtraction) -> Vec<Threat> {
    let points = scan_to_points(scan, heading);
    let n = points.len();
    let hit = |k: usize| scan.ranges[k] <= cfg.detection_range && scan.ranges[k] < scan.max_range;
    if n == 0 || !(0..n).any(hit) {
        return Vec::new();
    }
    // start just after a gap so clusters crossing beam 0 stay whole
    let start = (0..n).find(|&k| !hit(k) || points[k].distance(points[(k + n - 1) % n]) > cfg.max_gap).unwrap_or(0);
    let mut threats = Vec::new();
    let mut cluster: Vec<Vec2> = Vec::new();
    let mut flush = |cluster: &mut Vec<Vec2>| {
        if let (Some(&a), Some(&b)) = (cluster.first(), cluster.last()) {
            let center = (a + b) * 0.5;
            let radius = cluster.iter().map(|p| p.distance(center)).fold(0.0, f64::max).max(cfg.min_radius);
            threats.push(Threat { center: origin + center, radius: radius + cfg.inflation });
        }
        cluster.clear();
    };
    for step in 0..n {
        let k = (start + step) % n;
        if !hit(k) {
            flush(&mut cluster);
            continue;
        }
        let p = points[k];
        if let Some(&last) = cluster.last() {
            let first = cluster[0];
            if p.distance(last) > cfg.max_gap || p.distance(first) > cfg.max_chord {
                flush(&mut cluster);
            }
        }
        cluster.push(p);
    }
    flush(&mut cluster);
    threats
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEG: f64 = PI / 180.0;

    #[test]
    fn points_from_scan() {
        let scan = LidarScan { angle_increment: PI / 2.0, ranges: vec![1.0, 2.0, 1.0, 1.0], max_range: 5.0 };
        let p = scan_to_points(&scan, 0.0);
        assert!(p[0].distance(Vec2::new(1.0, 0.0)) < 1e-12);
        assert!(p[1].distance(Vec2::new(0.0, 2.0)) < 1e-12);
        let r = scan_to_points(&scan, PI / 2.0);
        assert!(r[0].distance(Vec2::new(0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn cone_half_width() {
        let t = [Threat { center: Vec2::new(4.0, 0.0), radius: 0.2 }];
        let set = blocked_angles(&t, Vec2::ZERO, 0.3, DEG);
        let beta = (0.5_f64 / 4.0).asin();
        assert!((set.intervals[0].1 - beta).abs() < 1e-15);
        // 7.18 degrees: beams 0..=7 and 353..=359
        let blocked: Vec<usize> = (0..360).filter(|&k| set.blocked[k]).collect();
        assert_eq!(blocked.len(), 15);
        assert!(set.blocked[7] && !set.blocked[8] && set.blocked[353] && !set.blocked[352]);
    }

    #[test]
    fn contact_blocks_half_plane() {
        let t = [Threat { center: Vec2::new(0.5, 0.0), radius: 0.2 }];
        let set = blocked_angles(&t, Vec2::ZERO, 0.3, DEG);
        assert_eq!(set.intervals[0].1, FRAC_PI_2);
        assert!(set.blocked[89] && !set.blocked[90] && !set.blocked[180]);
        assert!(blocked_angles(&[], Vec2::ZERO, 0.3, DEG).blocked.iter().all(|b| !b));
        let on_top = blocked_angles(&[Threat { center: Vec2::ZERO, radius: 0.1 }], Vec2::ZERO, 0.3, DEG);
        assert_eq!(select_heading(&on_top, 0.0), Heading::Halt);
    }

    #[test]
    fn nearest_safe_heading() {
        let mut set = blocked_angles(&[], Vec2::ZERO, 0.3, DEG);
        for k in 0..=15 {
            set.blocked[k] = true;
        }
        match select_heading(&set, 10.0 * DEG) {
            Heading::Angle(a) => assert!((a - 16.0 * DEG).abs() < 1e-12),
            Heading::Halt => panic!(),
        }
        match select_heading(&set, 40.0 * DEG) {
            Heading::Angle(a) => assert!((a - 40.0 * DEG).abs() < 1e-12),
            Heading::Halt => panic!(),
        }
    }

    #[test]
    fn fused_force() {
        let r = apply_heading(Vec2::new(1.0, 0.0), Heading::Angle(PI / 2.0), FuseMode::RotateBy);
        assert!(r.distance(Vec2::new(0.0, 1.0)) < 1e-12);
        let same = apply_heading(Vec2::new(1.0, 0.0), Heading::Angle(0.0), FuseMode::RotateBy);
        assert!(same.distance(Vec2::new(1.0, 0.0)) < 1e-12);
        assert_eq!(apply_heading(Vec2::new(1.0, 0.0), Heading::Halt, FuseMode::Redirect), Vec2::ZERO);
        // unthreatened forces pass through
        let set = blocked_angles(&[Threat { center: Vec2::new(0.0, 4.0), radius: 0.2 }], Vec2::ZERO, 0.3, DEG);
        assert_eq!(fuse_avoidance(Vec2::new(1.0, 0.0), &set, FuseMode::Redirect), Vec2::new(1.0, 0.0));
        let turned = fuse_avoidance(Vec2::new(0.0, 2.0), &set, FuseMode::Redirect);
        assert!((turned.norm() - 2.0).abs() < 1e-12);
        assert!(!set.blocks(turned.angle()));
    }

    #[test]
    fn control_examples() {
        let lim = ControlLimits::default();
        let (v, w) = control_input(Vec2::new(0.0, 1.0), 0.0, &lim);
        assert_eq!(v, 1.0);
        assert!(w > 0.0);
        assert_eq!(control_input(Vec2::ZERO, 0.0, &lim), (0.0, 0.0));
        assert_eq!(control_input(Vec2::new(3.0, 0.0), 0.0, &lim).0, 1.0);
    }

    #[test]
    fn wall_becomes_chain_of_discs() {
        // wall at x = 1 seen from the origin
        let inc = DEG;
        let n = LidarScan::beam_count(inc);
        let ranges = (0..n)
            .map(|k| {
                let a = k as f64 * inc;
                if a.cos() > 0.0 { (1.0 / a.cos()).min(5.0) } else { 5.0 }
            })
            .collect();
        let scan = LidarScan { angle_increment: inc, ranges, max_range: 5.0 };
        let cfg = ThreatExtraction::default();
        let threats = extract_threats(&scan, 0.0, Vec2::ZERO, &cfg);
        assert!(threats.len() > 1);
        for t in &threats {
            assert!(t.radius <= cfg.max_chord / 2.0 + cfg.inflation + 0.05);
            assert!((t.center.x - 1.0).abs() < 0.1);
        }
        let set = blocked_angles(&threats, Vec2::ZERO, 0.3, inc);
        assert!(set.blocks(0.0));
        assert!(!set.blocks(PI));
    }
}
