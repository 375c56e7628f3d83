//! Fixed-step mission loop: virtual leader, formation or swarm control,
//! avoidance, integration, and metrics.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::avoidance::{
    blocked_angles, control_input, extract_threats, fuse_avoidance, ControlLimits, FuseMode, ThreatExtraction,
};
use crate::formation::{
    assign_roles, formation_offsets, leader_speed, role_cost, select_shape, spring_force, ArcCursor, AssignMode,
    CostWeights, FormationGeometry, FormationShape, PathTrack, Progress,
};
use crate::geometry::{wrap_pi, wrap_two_pi, Pose, Vec2};
use crate::grid::GridMap;
use crate::path::CoveragePath;
use crate::sim::metrics::{CoverageSummary, CoverageTracker, GroupOrderSample, GroupOrderSampler};
use crate::sim::swarm::{swarm_force, swarm_radii, Agent, SwarmParams};
use crate::sim::world::{synth_scan, World};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("path has no segments to follow")]
    EmptyPath,
    #[error("vehicle {ugv} starts in collision at ({x:.3}, {y:.3})")]
    Spawn { ugv: usize, x: f64, y: f64 },
    #[error("invalid mission setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Controller {
    /// Leader-follower formation with virtual springs.
    Cppf,
    /// Boids swarm chasing the virtual leader.
    Cpps,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UgvState {
    pub pose: Pose,
    pub v: f64,
    pub omega: f64,
}

impl UgvState {
    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.pose.heading) * self.v
    }
}

/// Forward-Euler unicycle step; heading kept in `[0, 2pi)`.
pub fn step_unicycle(s: UgvState, dt: f64) -> UgvState {
    let (sin, cos) = s.pose.heading.sin_cos();
    let position = s.pose.position + Vec2::new(s.v * cos, s.v * sin) * dt;
    let heading = wrap_two_pi(s.pose.heading + s.omega * dt);
    UgvState { pose: Pose::new(position, heading), ..s }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    pub dt: f64,
    pub n_ugvs: usize,
    /// Nominal virtual leader speed.
    pub leader_speed: f64,
    /// Rate at which the virtual leader turns on the spot at corners.
    pub leader_turn_rate: f64,
    pub limits: ControlLimits,
    pub ugv_radius: f64,
    pub spring_k: f64,
    /// Full leader speed while the lead follower is this close to its slot.
    pub leader_slow_distance: f64,
    /// Leader stops when the lead follower is this far from its slot.
    pub leader_stop_distance: f64,
    pub cost_weights: CostWeights,
    pub assign_mode: AssignMode,
    pub wide_shape: FormationShape,
    pub geometry: FormationGeometry,
    /// Followers closer than this to their slot hold still.
    pub position_tolerance: f64,
    pub fuse_mode: FuseMode,
    pub extraction: ThreatExtraction,
    pub scan_increment: f64,
    /// Range of the coverage sensor.
    pub sensing_range: f64,
    pub max_time: f64,
    /// The leader holds its start pose this long so the team can form up.
    pub muster_time: f64,
    pub swarm: SwarmParams,
    pub sample_every: u64,
    pub sample_window: usize,
    pub trajectory_stride: u64,
    /// Fraction of a cell a vehicle must be inside before it counts as entered.
    pub cell_entry_margin: f64,
    pub spawn_jitter: f64,
    /// Followers may drive backwards when the command points behind them.
    pub allow_reverse: bool,
    /// Roles are reassigned once the leader has been held this long; zero
    /// disables it. Breaks jams where a follower's way to its slot is walled
    /// off by peers sitting in theirs.
    pub reassign_after: f64,
    /// Speed per meter of penetration with which a vehicle inside a threat's
    /// reach is pushed back out; lets it dodge something closing in on it.
    pub escape_gain: f64,
    pub seed: u64,
    /// Start poses; defaults to the first formation slots plus jitter.
    pub initial_poses: Option<Vec<Pose>>,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 30.0,
            n_ugvs: 5,
            leader_speed: 1.1,
            leader_turn_rate: 0.5,
            limits: ControlLimits { max_speed: 2.0, max_turn_rate: 1.5, heading_gain: 2.0 },
            ugv_radius: 0.3,
            spring_k: 5.0,
            leader_slow_distance: 0.5,
            leader_stop_distance: 2.0,
            cost_weights: CostWeights::default(),
            assign_mode: AssignMode::MaxCost,
            wide_shape: FormationShape::V,
            geometry: FormationGeometry { swath_fraction: 0.4, min_spacing: 1.0, separation_radius: 1.1 },
            position_tolerance: 0.05,
            fuse_mode: FuseMode::Redirect,
            extraction: ThreatExtraction::default(),
            scan_increment: PI / 180.0,
            sensing_range: 4.0,
            max_time: 3600.0,
            muster_time: 0.0,
            swarm: SwarmParams::default(),
            sample_every: 500,
            sample_window: 150,
            trajectory_stride: 15,
            cell_entry_margin: 0.1,
            spawn_jitter: 0.1,
            allow_reverse: true,
            reassign_after: 5.0,
            escape_gain: 10.0,
            seed: 0,
            initial_poses: None,
        }
    }
}

impl MissionConfig {
    fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("dt", self.dt),
            ("leader_speed", self.leader_speed),
            ("leader_turn_rate", self.leader_turn_rate),
            ("max_speed", self.limits.max_speed),
            ("max_turn_rate", self.limits.max_turn_rate),
            ("ugv_radius", self.ugv_radius),
            ("spring_k", self.spring_k),
            ("scan_increment", self.scan_increment),
            ("max_time", self.max_time),
        ];
        if !(self.escape_gain >= 0.0 && self.escape_gain.is_finite()) {
            return Err(SimError::Config(format!("escape_gain must be zero or more, got {}", self.escape_gain)));
        }
        if !(self.reassign_after >= 0.0 && self.reassign_after.is_finite()) {
            return Err(SimError::Config(format!("reassign_after must be zero or more, got {}", self.reassign_after)));
        }
        if !(self.muster_time >= 0.0 && self.muster_time.is_finite()) {
            return Err(SimError::Config(format!("muster_time must be zero or more, got {}", self.muster_time)));
        }
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(SimError::Config(format!("{name} must be positive, got {v}")));
        }
        if self.n_ugvs == 0 {
            return Err(SimError::Config("n_ugvs must be at least 1".into()));
        }
        if self.leader_stop_distance <= self.leader_slow_distance {
            return Err(SimError::Config("leader_stop_distance must exceed leader_slow_distance".into()));
        }
        if let Some(p) = &self.initial_poses {
            if p.len() != self.n_ugvs {
                return Err(SimError::Config(format!("{} initial poses for {} vehicles", p.len(), self.n_ugvs)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub controller: Controller,
    pub ticks: u64,
    pub completed: bool,
    /// Time for the virtual leader to finish the path (or the cut-off).
    pub turnaround_time: f64,
    /// Length travelled by the team centroid.
    pub path_length: f64,
    pub path_length_per_ugv: Vec<f64>,
    pub coverage: CoverageSummary,
    pub group_order: Vec<GroupOrderSample>,
    pub min_peer_distance: f64,
    pub min_static_clearance: f64,
    /// Smallest gap between a vehicle center and a moving or static disc edge.
    pub min_disc_clearance: f64,
    pub peer_violation_ticks: u64,
    pub static_violation_ticks: u64,
    pub disc_violation_ticks: u64,
    /// Largest single-tick displacement of any vehicle.
    pub max_step: f64,
    pub role_changes: u64,
    /// Distance of each vehicle to its formation slot at the end of the run.
    pub final_slot_errors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub tick: u64,
    pub time: f64,
    pub ugv: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionResult {
    pub report: MetricsReport,
    pub trajectory: Vec<TrajectorySample>,
    /// Virtual leader positions at the trajectory sampling ticks.
    pub leader: Vec<Vec2>,
}

/// Virtual leader: moves along the track, stops at each corner and turns
/// on the spot before continuing.
#[derive(Debug, Clone)]
struct Leader {
    cursor: ArcCursor,
    heading: f64,
    turning_to: Option<f64>,
    done: bool,
}

impl Leader {
    fn new(track: &PathTrack) -> Self {
        let heading = track.pose(&ArcCursor::default()).heading;
        Self { cursor: ArcCursor::default(), heading, turning_to: None, done: false }
    }

    fn pose(&self, track: &PathTrack) -> Pose {
        Pose::new(track.pose(&self.cursor).position, self.heading)
    }

    fn step(&mut self, track: &PathTrack, speed: f64, turn_rate: f64, dt: f64) {
        if self.done {
            return;
        }
        if let Some(target) = self.turning_to {
            let err = wrap_pi(target - self.heading);
            let step = turn_rate * dt;
            if err.abs() <= step {
                self.heading = target;
                self.turning_to = None;
            } else {
                self.heading = wrap_pi(self.heading + step * err.signum());
            }
            return;
        }
        let seg = self.cursor.segment;
        let room = track.segments()[seg].length() - self.cursor.offset;
        let (cursor, progress) = track.advance(self.cursor, (speed * dt).min(room));
        self.cursor = cursor;
        if progress == Progress::Completed {
            self.done = true;
        } else if cursor.segment != seg {
            let next = track.segments()[cursor.segment].heading();
            if wrap_pi(next - self.heading).abs() > 1e-9 {
                self.turning_to = Some(next);
            }
        }
    }
}

/// Offsets of the slot pattern with their centroid moved onto the leader,
/// kept `wall_reach` inside the lane the leader drives down.
fn centered_offsets(
    shape: FormationShape,
    block_size: usize,
    cell_size: f64,
    n: usize,
    geometry: &FormationGeometry,
    wall_reach: f64,
) -> Vec<Vec2> {
    let raw = formation_offsets(shape, block_size, cell_size, n, geometry).expect("validated vehicle count");
    let mean = raw.iter().fold(Vec2::ZERO, |a, &b| a + b) / n as f64;
    // the path runs down the middle of a half block
    let limit = (block_size as f64 * cell_size / 4.0 - wall_reach).max(0.0);
    raw.into_iter().map(|o| o - mean).map(|o| Vec2::new(o.x.clamp(-limit, limit), o.y)).collect()
}

/// Shape and offsets for a block size. A wide shape squeezed so hard by the
/// lane that two slots come closer than `min_gap` becomes single file.
fn layout(block_size: usize, cell_size: f64, cfg: &MissionConfig, wall_reach: f64) -> (FormationShape, Vec<Vec2>) {
    let n = cfg.n_ugvs;
    let shape = select_shape(block_size, cfg.wide_shape);
    let offsets = centered_offsets(shape, block_size, cell_size, n, &cfg.geometry, wall_reach);
    let min_gap = cfg.geometry.min_spacing.max(2.0 * cfg.ugv_radius);
    let crowded = (0..n).any(|a| (a + 1..n).any(|b| offsets[a].distance(offsets[b]) < min_gap * 0.999));
    if shape != FormationShape::Q && crowded {
        let q = FormationShape::Q;
        return (q, centered_offsets(q, block_size, cell_size, n, &cfg.geometry, wall_reach));
    }
    (shape, offsets)
}

fn slot_positions(
    shape: FormationShape,
    offsets: &[Vec2],
    leader: &Leader,
    track: &PathTrack,
) -> Vec<Vec2> {
    let pose = leader.pose(track);
    offsets
        .iter()
        .map(|&o| {
            if shape == FormationShape::Q {
                // single file trails along the path itself
                track.pose_at(leader.cursor.travelled + o.y).transform(Vec2::new(o.x, 0.0))
            } else {
                pose.transform(o)
            }
        })
        .collect()
}

/// Runs a coverage mission along `path` and reports metrics on `grid`.
pub fn run_mission(
    path: &CoveragePath,
    cell_size: f64,
    grid: &GridMap,
    world: &World,
    controller: Controller,
    cfg: &MissionConfig,
) -> Result<MissionResult, SimError> {
    cfg.validate()?;
    let track = PathTrack::new(path);
    if track.segments().is_empty() {
        return Err(SimError::EmptyPath);
    }
    let n = cfg.n_ugvs;
    let dt = cfg.dt;
    let mut leader = Leader::new(&track);

    let mut block_size = track.block_size(0);
    // a slot closer to a wall than this sits inside the wall's threat reach
    let wall_reach = cfg.ugv_radius + cfg.extraction.max_chord / 2.0 + cfg.extraction.inflation;
    let (mut shape, mut offsets) = layout(block_size, cell_size, cfg, wall_reach);
    let slots = slot_positions(shape, &offsets, &leader, &track);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ugvs: Vec<UgvState> = match &cfg.initial_poses {
        Some(poses) => poses.iter().map(|&pose| UgvState { pose, v: 0.0, omega: 0.0 }).collect(),
        None => slots
            .iter()
            .map(|&s| {
                let j = cfg.spawn_jitter;
                let dx = if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 };
                let dy = if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 };
                let pose = Pose::new(s + Vec2::new(dx, dy), wrap_two_pi(leader.heading));
                UgvState { pose, v: 0.0, omega: 0.0 }
            })
            .collect(),
    };
    for (k, u) in ugvs.iter().enumerate() {
        let p = u.pose.position;
        let peer_clash = ugvs[..k].iter().any(|o| o.pose.position.distance(p) < 2.0 * cfg.ugv_radius);
        let disc_clash = world.movers.iter().any(|m| m.position(0.0).distance(p) < m.radius + cfg.ugv_radius);
        if world.clearance(p) < cfg.ugv_radius || peer_clash || disc_clash {
            return Err(SimError::Spawn { ugv: k, x: p.x, y: p.y });
        }
    }

    let assign = |ugvs: &[UgvState], slots: &[Vec2], heading: f64| -> Vec<usize> {
        let costs: Vec<Vec<f64>> = ugvs
            .iter()
            .map(|u| slots.iter().map(|&s| role_cost(u.pose, Pose::new(s, heading), &cfg.cost_weights)).collect())
            .collect();
        assign_roles(&costs, cfg.assign_mode).expect("square finite cost matrix")
    };
    // ugv_of_role[r] is the vehicle holding role r
    let mut ugv_of_role = assign(&ugvs, &slots, leader.heading);
    let mut role_changes = 0u64;
    let mut prev_slots: Option<Vec<Vec2>> = None;
    let mut held_for = 0.0;

    let mut coverage = CoverageTracker::new(grid, n, cfg.sensing_range, cfg.cell_entry_margin);
    for (k, u) in ugvs.iter().enumerate() {
        coverage.update(grid, k, u.pose.position);
    }
    let mut sampler = GroupOrderSampler::new(cfg.sample_every, cfg.sample_window);
    let mut trajectory = Vec::new();
    let mut leader_trace = Vec::new();
    let mut pl = vec![0.0; n];
    let mut pl_center = 0.0;
    let centroid = |u: &[UgvState]| u.iter().fold(Vec2::ZERO, |a, s| a + s.pose.position) / n as f64;
    let mut center = centroid(&ugvs);
    let (mut min_peer, mut min_static, mut min_disc) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let (mut peer_bad, mut static_bad, mut disc_bad) = (0u64, 0u64, 0u64);
    let mut max_step = 0.0_f64;

    let max_ticks = (cfg.max_time / dt).ceil() as u64;
    let mut tick = 0u64;
    let mut completed = false;
    while tick < max_ticks {
        let time = tick as f64 * dt;
        let seg = leader.cursor.segment;
        let bs = track.block_size(seg);
        if bs != block_size {
            block_size = bs;
            (shape, offsets) = layout(bs, cell_size, cfg, wall_reach);
            let slots = slot_positions(shape, &offsets, &leader, &track);
            let next = assign(&ugvs, &slots, leader.heading);
            role_changes += next.iter().zip(&ugv_of_role).filter(|(a, b)| a != b).count() as u64;
            ugv_of_role = next;
            prev_slots = None;
        }
        let slots = slot_positions(shape, &offsets, &leader, &track);
        let mut slot_of = vec![Vec2::ZERO; n];
        let mut slot_velocity = vec![Vec2::ZERO; n];
        for (role, &u) in ugv_of_role.iter().enumerate() {
            slot_of[u] = slots[role];
            if let Some(prev) = &prev_slots {
                slot_velocity[u] = (slots[role] - prev[role]) / dt;
            }
        }
        prev_slots = Some(slots);

        let leader_pose = leader.pose(&track);
        let lag = match controller {
            Controller::Cppf => slot_of[ugv_of_role[0]].distance(ugvs[ugv_of_role[0]].pose.position),
            Controller::Cpps => centroid(&ugvs).distance(leader_pose.position),
        };
        let v_q0 = leader_speed(cfg.leader_speed, lag, cfg.leader_slow_distance, cfg.leader_stop_distance);
        held_for = if v_q0 > 0.0 || time <= cfg.muster_time { 0.0 } else { held_for + dt };
        if controller == Controller::Cppf && cfg.reassign_after > 0.0 && held_for >= cfg.reassign_after {
            let slots = slot_positions(shape, &offsets, &leader, &track);
            let next = assign(&ugvs, &slots, leader.heading);
            role_changes += next.iter().zip(&ugv_of_role).filter(|(a, b)| a != b).count() as u64;
            ugv_of_role = next;
            prev_slots = None;
            held_for = 0.0;
        }

        let positions: Vec<Vec2> = ugvs.iter().map(|u| u.pose.position).collect();
        let agents: Vec<Agent> = ugvs.iter().map(|u| Agent { position: u.pose.position, velocity: u.velocity() }).collect();
        let radii = swarm_radii(cell_size, bs, n, &cfg.swarm);
        let commands: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let u = &ugvs[k];
                let desired = match controller {
                    Controller::Cppf => {
                        // slot velocity feeds forward; the spring removes the error
                        let err = slot_of[k] - u.pose.position;
                        if err.norm() < cfg.position_tolerance {
                            slot_velocity[k]
                        } else {
                            slot_velocity[k] + spring_force(slot_of[k], u.pose.position, cfg.spring_k)
                        }
                    }
                    Controller::Cpps => swarm_force(k, &agents, &radii, &cfg.swarm, leader_pose.position),
                };
                let scan = synth_scan(
                    world,
                    time,
                    &positions,
                    k,
                    u.pose.heading,
                    cfg.ugv_radius,
                    cfg.extraction.detection_range,
                    cfg.scan_increment,
                );
                let threats = extract_threats(&scan, u.pose.heading, u.pose.position, &cfg.extraction);
                let set = blocked_angles(&threats, u.pose.position, cfg.ugv_radius, cfg.scan_increment);
                let mut v_av = fuse_avoidance(desired, &set, cfg.fuse_mode);
                for t in &threats {
                    let away = u.pose.position - t.center;
                    let depth = cfg.ugv_radius + t.radius - away.norm();
                    if depth > 0.0 && away.norm() > 1e-9 {
                        v_av += away / away.norm() * (cfg.escape_gain * depth);
                    }
                }
                let err = wrap_pi(v_av.angle() - u.pose.heading);
                let (mut v, mut omega) = control_input(v_av, u.pose.heading, &cfg.limits);
                if cfg.allow_reverse && err.abs() > PI / 2.0 {
                    // back up and swing the tail toward the command instead
                    let tail = wrap_pi(err - PI * err.signum());
                    let lim = cfg.limits.max_turn_rate;
                    omega = (cfg.limits.heading_gain * tail).clamp(-lim, lim);
                    v = -v * tail.cos();
                } else {
                    // a unicycle turns toward the command before driving along it
                    v *= err.cos().max(0.0);
                }
                // never step deeper into a threat's reach
                let next = u.pose.position + Vec2::from_angle(u.pose.heading) * (v * dt);
                let intrudes = threats.iter().any(|t| {
                    let reach = cfg.ugv_radius + t.radius;
                    let d = next.distance(t.center);
                    d < reach && d < u.pose.position.distance(t.center)
                });
                if intrudes {
                    v = 0.0;
                }
                (v, omega)
            })
            .collect();

        for (k, u) in ugvs.iter_mut().enumerate() {
            let (v, omega) = commands[k];
            let before = u.pose.position;
            *u = step_unicycle(UgvState { v, omega, ..*u }, dt);
            let step = before.distance(u.pose.position);
            pl[k] += step;
            max_step = max_step.max(step);
        }
        let new_center = centroid(&ugvs);
        pl_center += center.distance(new_center);
        center = new_center;
        tick += 1;
        let now = tick as f64 * dt;

        let (mut peer_hit, mut static_hit, mut disc_hit) = (false, false, false);
        for (k, u) in ugvs.iter().enumerate() {
            let p = u.pose.position;
            coverage.update(grid, k, p);
            for o in &ugvs[k + 1..] {
                let d = p.distance(o.pose.position);
                min_peer = min_peer.min(d);
                peer_hit |= d < 2.0 * cfg.ugv_radius;
            }
            let c = world.clearance(p);
            min_static = min_static.min(c);
            static_hit |= c < cfg.ugv_radius;
            for m in &world.movers {
                let gap = p.distance(m.position(now)) - m.radius;
                min_disc = min_disc.min(gap);
                disc_hit |= gap < cfg.ugv_radius;
            }
        }
        peer_bad += peer_hit as u64;
        static_bad += static_hit as u64;
        disc_bad += disc_hit as u64;

        let velocities: Vec<Vec2> = ugvs.iter().map(UgvState::velocity).collect();
        let now_positions: Vec<Vec2> = ugvs.iter().map(|u| u.pose.position).collect();
        sampler.record(tick, &now_positions, &velocities);
        if cfg.trajectory_stride > 0 && tick.is_multiple_of(cfg.trajectory_stride) {
            for (k, u) in ugvs.iter().enumerate() {
                trajectory.push(TrajectorySample {
                    tick,
                    time: now,
                    ugv: k,
                    x: u.pose.position.x,
                    y: u.pose.position.y,
                    heading: u.pose.heading,
                    v: u.v,
                    omega: u.omega,
                });
            }
            leader_trace.push(leader.pose(&track).position);
        }

        if now > cfg.muster_time {
            // the governor holds corner turns back as well as travel
            leader.step(&track, v_q0, cfg.leader_turn_rate * v_q0 / cfg.leader_speed, dt);
        }
        if leader.done {
            completed = true;
            break;
        }
    }

    let final_slots = slot_positions(shape, &offsets, &leader, &track);
    let mut final_slot_errors = vec![0.0; n];
    for (role, &u) in ugv_of_role.iter().enumerate() {
        final_slot_errors[u] = final_slots[role].distance(ugvs[u].pose.position);
    }
    let report = MetricsReport {
        controller,
        ticks: tick,
        completed,
        turnaround_time: tick as f64 * dt,
        path_length: pl_center,
        path_length_per_ugv: pl,
        coverage: coverage.summary(grid),
        group_order: sampler.samples,
        min_peer_distance: min_peer,
        min_static_clearance: min_static,
        min_disc_clearance: min_disc,
        peer_violation_ticks: peer_bad,
        static_violation_ticks: static_bad,
        disc_violation_ticks: disc_bad,
        max_step,
        role_changes,
        final_slot_errors,
    };
    Ok(MissionResult { report, trajectory, leader: leader_trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_and_turning_steps() {
        let s = step_unicycle(UgvState { pose: Pose::default(), v: 1.0, omega: 0.0 }, 0.1);
        assert!(s.pose.position.distance(Vec2::new(0.1, 0.0)) < 1e-12);
        let r = step_unicycle(UgvState { pose: Pose::default(), v: 0.0, omega: PI }, 0.5);
        assert_eq!(r.pose.position, Vec2::ZERO);
        assert!((r.pose.heading - PI / 2.0).abs() < 1e-12);
    }

    fn quarter_circle_error(dt: f64) -> f64 {
        let steps = ((PI / 2.0) / dt).round() as usize;
        let mut s = UgvState { pose: Pose::default(), v: 1.0, omega: 1.0 };
        for _ in 0..steps {
            s = step_unicycle(s, dt);
        }
        let t = steps as f64 * dt;
        s.pose.position.distance(Vec2::new(t.sin(), 1.0 - t.cos()))
    }

    #[test]
    fn euler_error_is_first_order() {
        let coarse = quarter_circle_error(0.01);
        let fine = quarter_circle_error(0.005);
        assert!(fine <= coarse / 2.0 * 1.05, "{coarse} {fine}");
    }
}
