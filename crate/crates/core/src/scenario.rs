//! Scenario documents: map, fleet, budgets and every tunable, as TOML.
//!
//! Every section except `map` and `budgets` may be omitted; missing keys
//! take the defaults below. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::avoidance::{ControlLimits, FuseMode, ThreatExtraction};
use crate::formation::{AssignMode, CostWeights, FormationGeometry, FormationShape};
use crate::geometry::{Pose, Rect, Vec2};
use crate::grid::PolygonObstacle;
use crate::pipeline::PlanSettings;
use crate::predict::Budget;
use crate::search::{CandidateLadder, SearchConfig};
use crate::sim::{Controller, MissionConfig, MovingDisc, SwarmParams, World};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario does not parse: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub map: MapSection,
    pub budgets: BudgetSection,
    #[serde(default)]
    pub fleet: FleetSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub formation: FormationSection,
    #[serde(default)]
    pub avoidance: AvoidanceSection,
    #[serde(default)]
    pub swarm: SwarmSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub movers: Vec<MovingDisc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    #[serde(default)]
    pub origin: Vec2,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub obstacles: Vec<PolygonObstacle>,
    /// Areas the fleet must stay out of; planned around like obstacles.
    #[serde(default)]
    pub no_go: Vec<PolygonObstacle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub max_path_length: f64,
    pub max_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetSection {
    pub n_ugvs: usize,
    pub max_speed: f64,
    pub max_turn_rate: f64,
    /// Avoidance radius around each vehicle center.
    pub radius: f64,
    pub sensing_range: f64,
    /// Range inside which scan returns count as threats.
    pub detection_range: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_poses: Option<Vec<Pose>>,
}

impl Default for FleetSection {
    fn default() -> Self {
        Self {
            n_ugvs: 5,
            max_speed: 2.0,
            max_turn_rate: 1.5,
            radius: 0.3,
            sensing_range: 4.0,
            detection_range: 1.6,
            initial_poses: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    /// Explicit ladder; overrides the range below when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_sizes: Option<Vec<f64>>,
    pub cs_min: f64,
    pub cs_max: f64,
    pub cs_step: f64,
    pub patience: usize,
    /// Move to coarser sizes only when both budgets are exceeded.
    pub strict_search: bool,
    /// Virtual leader cruise speed, used for prediction and simulation alike.
    pub speed: f64,
    /// Virtual leader turn rate at corners.
    pub turn_rate: f64,
    pub n_t: f64,
    pub vehicle_spacing: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_block_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation_cell_size: Option<f64>,
    pub start: Vec2,
}

impl Default for PlannerSection {
    fn default() -> Self {
        let p = PlanSettings::default();
        Self {
            cell_sizes: None,
            cs_min: 0.75,
            cs_max: 3.0,
            cs_step: 0.25,
            patience: 10,
            strict_search: true,
            speed: p.speed,
            turn_rate: p.turn_rate,
            n_t: p.n_t,
            vehicle_spacing: p.vehicle_spacing,
            max_block_size: None,
            evaluation_cell_size: None,
            start: p.start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationSection {
    pub shape: FormationShape,
    pub assign: AssignMode,
    pub swath_fraction: f64,
    pub min_spacing: f64,
    pub separation_radius: f64,
    pub spring_k: f64,
    pub position_tolerance: f64,
    pub heading_gain: f64,
    pub cost_weights: CostWeights,
    pub leader_slow_distance: f64,
    pub leader_stop_distance: f64,
    pub allow_reverse: bool,
    pub reassign_after: f64,
    pub escape_gain: f64,
}

impl Default for FormationSection {
    fn default() -> Self {
        let m = MissionConfig::default();
        Self {
            shape: m.wide_shape,
            assign: m.assign_mode,
            swath_fraction: m.geometry.swath_fraction,
            min_spacing: m.geometry.min_spacing,
            separation_radius: m.geometry.separation_radius,
            spring_k: m.spring_k,
            position_tolerance: m.position_tolerance,
            heading_gain: m.limits.heading_gain,
            cost_weights: m.cost_weights,
            leader_slow_distance: m.leader_slow_distance,
            leader_stop_distance: m.leader_stop_distance,
            allow_reverse: m.allow_reverse,
            reassign_after: m.reassign_after,
            escape_gain: m.escape_gain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvoidanceSection {
    pub fuse_mode: FuseMode,
    pub scan_increment_deg: f64,
    pub max_gap: f64,
    pub max_chord: f64,
    pub min_radius: f64,
    pub inflation: f64,
}

impl Default for AvoidanceSection {
    fn default() -> Self {
        let e = ThreatExtraction::default();
        Self {
            fuse_mode: FuseMode::default(),
            scan_increment_deg: 1.0,
            max_gap: e.max_gap,
            max_chord: e.max_chord,
            min_radius: e.min_radius,
            inflation: e.inflation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmSection {
    pub k_alignment: f64,
    pub k_cohesion: f64,
    pub k_separation: f64,
    pub w_cohesion: f64,
    pub w_alignment: f64,
    pub w_separation: f64,
    pub w_goal: f64,
}

impl Default for SwarmSection {
    fn default() -> Self {
        let p = SwarmParams::default();
        Self {
            k_alignment: p.k_alignment,
            k_cohesion: p.k_cohesion,
            k_separation: p.k_separation,
            w_cohesion: p.w_cohesion,
            w_alignment: p.w_alignment,
            w_separation: p.w_separation,
            w_goal: p.w_goal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub controller: Controller,
    pub seed: u64,
    pub dt: f64,
    pub max_time: f64,
    /// Seconds the leader waits at the start while the team forms up.
    pub muster_time: f64,
    pub sample_every: u64,
    pub sample_window: usize,
    pub trajectory_stride: u64,
    pub cell_entry_margin: f64,
    pub spawn_jitter: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let m = MissionConfig::default();
        Self {
            controller: Controller::Cppf,
            seed: m.seed,
            dt: m.dt,
            max_time: m.max_time,
            muster_time: m.muster_time,
            sample_every: m.sample_every,
            sample_window: m.sample_window,
            trajectory_stride: m.trajectory_stride,
            cell_entry_margin: m.cell_entry_margin,
            spawn_jitter: m.spawn_jitter,
        }
    }
}

impl Scenario {
    /// A scenario with default settings on an empty map.
    pub fn empty(width: f64, height: f64, budgets: BudgetSection) -> Self {
        Self {
            name: String::new(),
            map: MapSection { origin: Vec2::ZERO, width, height, obstacles: Vec::new(), no_go: Vec::new() },
            budgets,
            fleet: FleetSection::default(),
            planner: PlannerSection::default(),
            formation: FormationSection::default(),
            avoidance: AvoidanceSection::default(),
            swarm: SwarmSection::default(),
            simulation: SimulationSection::default(),
            movers: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("map.width", self.map.width),
            ("map.height", self.map.height),
            ("budgets.max_path_length", self.budgets.max_path_length),
            ("budgets.max_time", self.budgets.max_time),
            ("fleet.max_speed", self.fleet.max_speed),
            ("fleet.max_turn_rate", self.fleet.max_turn_rate),
            ("fleet.radius", self.fleet.radius),
            ("fleet.sensing_range", self.fleet.sensing_range),
            ("fleet.detection_range", self.fleet.detection_range),
            ("planner.speed", self.planner.speed),
            ("planner.turn_rate", self.planner.turn_rate),
            ("planner.vehicle_spacing", self.planner.vehicle_spacing),
            ("formation.swath_fraction", self.formation.swath_fraction),
            ("formation.spring_k", self.formation.spring_k),
            ("formation.heading_gain", self.formation.heading_gain),
            ("avoidance.scan_increment_deg", self.avoidance.scan_increment_deg),
            ("avoidance.max_chord", self.avoidance.max_chord),
            ("simulation.dt", self.simulation.dt),
            ("simulation.max_time", self.simulation.max_time),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be a positive number, got {v}")));
            }
        }
        let non_negative = [
            ("planner.n_t", self.planner.n_t),
            ("formation.reassign_after", self.formation.reassign_after),
            ("formation.escape_gain", self.formation.escape_gain),
            ("formation.min_spacing", self.formation.min_spacing),
            ("formation.separation_radius", self.formation.separation_radius),
            ("formation.position_tolerance", self.formation.position_tolerance),
            ("avoidance.max_gap", self.avoidance.max_gap),
            ("avoidance.min_radius", self.avoidance.min_radius),
            ("avoidance.inflation", self.avoidance.inflation),
            ("simulation.spawn_jitter", self.simulation.spawn_jitter),
            ("simulation.cell_entry_margin", self.simulation.cell_entry_margin),
            ("simulation.muster_time", self.simulation.muster_time),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be zero or more, got {v}")));
            }
        }
        if self.fleet.n_ugvs == 0 {
            return Err(invalid("fleet.n_ugvs", "at least one vehicle is required"));
        }
        if let Some(p) = &self.fleet.initial_poses {
            if p.len() != self.fleet.n_ugvs {
                return Err(invalid("fleet.initial_poses", format!("{} poses for {} vehicles", p.len(), self.fleet.n_ugvs)));
            }
        }
        if let Some(bs) = self.planner.max_block_size {
            if bs == 0 || !bs.is_power_of_two() {
                return Err(invalid("planner.max_block_size", format!("must be a power of two, got {bs}")));
            }
        }
        if let Some(cs) = self.planner.evaluation_cell_size {
            if !(cs > 0.0 && cs.is_finite()) {
                return Err(invalid("planner.evaluation_cell_size", format!("must be positive, got {cs}")));
            }
        }
        self.ladder().map_err(|e| invalid("planner.cell_sizes", e.to_string()))?;
        if self.formation.leader_stop_distance <= self.formation.leader_slow_distance {
            return Err(invalid("formation.leader_stop_distance", "must exceed formation.leader_slow_distance"));
        }
        for (k, o) in self.map.obstacles.iter().enumerate() {
            o.validate().map_err(|m| invalid(&format!("map.obstacles[{k}]"), m))?;
        }
        for (k, o) in self.map.no_go.iter().enumerate() {
            o.validate().map_err(|m| invalid(&format!("map.no_go[{k}]"), m))?;
        }
        for (k, m) in self.movers.iter().enumerate() {
            if m.waypoints.is_empty() || !(m.radius > 0.0) || !(m.speed >= 0.0) {
                return Err(invalid(&format!("movers[{k}]"), "needs waypoints, a positive radius and a speed of zero or more"));
            }
        }
        Ok(())
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(self.map.origin, self.map.origin + Vec2::new(self.map.width, self.map.height))
    }

    /// Obstacles and no-go areas together.
    pub fn obstacles(&self) -> Vec<PolygonObstacle> {
        self.map.obstacles.iter().chain(&self.map.no_go).cloned().collect()
    }

    pub fn budget(&self) -> Budget {
        Budget {
            max_path_length: self.budgets.max_path_length,
            max_time: self.budgets.max_time,
            max_speed: self.fleet.max_speed,
        }
    }

    pub fn ladder(&self) -> Result<CandidateLadder, crate::search::SearchError> {
        match &self.planner.cell_sizes {
            Some(sizes) => CandidateLadder::new(sizes.clone()),
            None => CandidateLadder::from_range(self.planner.cs_min, self.planner.cs_max, self.planner.cs_step),
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            patience: self.planner.patience,
            strict_search: self.planner.strict_search,
            sensing_range: self.fleet.sensing_range,
        }
    }

    pub fn plan_settings(&self) -> PlanSettings {
        PlanSettings {
            n_ugvs: self.fleet.n_ugvs,
            vehicle_spacing: self.planner.vehicle_spacing,
            max_block_size: self.planner.max_block_size,
            speed: self.planner.speed,
            turn_rate: self.planner.turn_rate,
            n_t: self.planner.n_t,
            sensing_range: self.fleet.sensing_range,
            evaluation_cell_size: self.planner.evaluation_cell_size,
            start: self.planner.start,
        }
    }

    pub fn mission_config(&self) -> MissionConfig {
        let f = &self.formation;
        let a = &self.avoidance;
        let s = &self.swarm;
        let sim = &self.simulation;
        MissionConfig {
            dt: sim.dt,
            n_ugvs: self.fleet.n_ugvs,
            leader_speed: self.planner.speed,
            leader_turn_rate: self.planner.turn_rate,
            limits: ControlLimits {
                max_speed: self.fleet.max_speed,
                max_turn_rate: self.fleet.max_turn_rate,
                heading_gain: f.heading_gain,
            },
            ugv_radius: self.fleet.radius,
            spring_k: f.spring_k,
            leader_slow_distance: f.leader_slow_distance,
            leader_stop_distance: f.leader_stop_distance,
            cost_weights: f.cost_weights,
            assign_mode: f.assign,
            wide_shape: f.shape,
            geometry: FormationGeometry {
                swath_fraction: f.swath_fraction,
                min_spacing: f.min_spacing,
                separation_radius: f.separation_radius,
            },
            position_tolerance: f.position_tolerance,
            fuse_mode: a.fuse_mode,
            extraction: ThreatExtraction {
                detection_range: self.fleet.detection_range,
                max_gap: a.max_gap,
                max_chord: a.max_chord,
                min_radius: a.min_radius,
                inflation: a.inflation,
            },
            scan_increment: a.scan_increment_deg * PI / 180.0,
            sensing_range: self.fleet.sensing_range,
            max_time: sim.max_time,
            muster_time: sim.muster_time,
            swarm: SwarmParams {
                k_alignment: s.k_alignment,
                k_cohesion: s.k_cohesion,
                k_separation: s.k_separation,
                w_cohesion: s.w_cohesion,
                w_alignment: s.w_alignment,
                w_separation: s.w_separation,
                w_goal: s.w_goal,
            },
            sample_every: sim.sample_every,
            sample_window: sim.sample_window,
            trajectory_stride: sim.trajectory_stride,
            cell_entry_margin: sim.cell_entry_margin,
            spawn_jitter: sim.spawn_jitter,
            allow_reverse: f.allow_reverse,
            reassign_after: f.reassign_after,
            escape_gain: f.escape_gain,
            seed: sim.seed,
            initial_poses: self.fleet.initial_poses.clone(),
        }
    }

    pub fn world(&self) -> World {
        World::new(self.bounds(), self.obstacles(), self.movers.clone())
    }
}
