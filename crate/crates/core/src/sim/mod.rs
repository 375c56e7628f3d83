//! Deterministic kinematic simulation of the team on a plan.

pub mod metrics;
pub mod mission;
pub mod swarm;
pub mod world;

pub use metrics::{group_order, redundancy, CoverageSummary, CoverageTracker, GroupOrderSample, GroupOrderSampler};
pub use mission::{
    run_mission, step_unicycle, Controller, MetricsReport, MissionConfig, MissionResult, SimError, TrajectorySample,
    UgvState,
};
pub use swarm::{swarm_force, swarm_radii, Agent, SwarmParams, SwarmRadii};
pub use world::{synth_scan, MovingDisc, World};
