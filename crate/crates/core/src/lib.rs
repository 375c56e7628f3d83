//! Budget-constrained coverage planning for a team of ground vehicles.
//!
//! A polygon map is rasterized, free cells are grouped into square blocks,
//! a spanning tree over the blocks is circumnavigated into a closed coverage
//! loop, and the cell size is searched so the loop fits length and time
//! budgets. A kinematic simulator then drives the team along the loop in
//! formation (or as a swarm) with reactive obstacle avoidance.

pub mod avoidance;
pub mod blocks;
pub mod formation;
pub mod geometry;
pub mod grid;
pub mod mst;
pub mod path;
pub mod pipeline;
pub mod predict;
pub mod render;
pub mod report;
pub mod run;
pub mod scenario;
pub mod search;
pub mod sim;

use thiserror::Error;

pub use blocks::{Block, BlockGraph, BlockId};
pub use formation::{AssignMode, FormationShape};
pub use geometry::{Pose, Rect, Vec2};
pub use grid::{CellIndex, CellState, Direction, GridMap, PolygonObstacle};
pub use mst::SpanningTree;
pub use path::{CoveragePath, Waypoint, WaypointKind};
pub use pipeline::{optimize_plan, plan_at, Plan, PlanError, PlanSettings};
pub use predict::{Budget, PlanPrediction};
pub use report::{MetricsRow, PlanDocument, ReportError};
pub use run::{plan_scenario, simulate_plan, Run};
pub use scenario::{Scenario, ScenarioError};
pub use search::{CandidateLadder, Evaluation, EvaluationRecord, SearchConfig, SearchError, SearchOutcome};
pub use sim::{run_mission, Controller, MetricsReport, MissionConfig, MissionResult, SimError, World};

/// Any failure from scenario to simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Report(#[from] ReportError),
}
