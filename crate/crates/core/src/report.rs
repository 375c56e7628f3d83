//! Plan JSON and simulation CSV artifacts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rect;
use crate::grid::PolygonObstacle;
use crate::pipeline::Plan;
use crate::predict::Budget;
use crate::scenario::Scenario;
use crate::search::{EvaluationRecord, SearchOutcome};
use crate::sim::{MetricsReport, MissionResult};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("plan document does not parse: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Everything needed to render or simulate a plan without the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub name: String,
    pub bounds: Rect,
    /// Obstacles and no-go areas.
    pub obstacles: Vec<PolygonObstacle>,
    pub budget: Budget,
    pub ladder: Vec<f64>,
    pub chosen_index: usize,
    /// Cell size of the grid predicted coverage was scored on.
    pub evaluation_cell_size: f64,
    pub plan: Plan,
    /// Every candidate evaluated by the search, in order.
    pub search: Vec<EvaluationRecord>,
}

impl PlanDocument {
    pub fn new(scenario: &Scenario, ladder: &[f64], outcome: SearchOutcome<Plan>) -> Self {
        let finest = ladder.first().copied().unwrap_or(outcome.chosen_size);
        Self {
            name: scenario.name.clone(),
            bounds: scenario.bounds(),
            obstacles: scenario.obstacles(),
            budget: scenario.budget(),
            ladder: ladder.to_vec(),
            chosen_index: outcome.chosen_index,
            evaluation_cell_size: scenario.planner.evaluation_cell_size.unwrap_or(finest),
            plan: outcome.plan,
            search: outcome.evaluations,
        }
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One-row summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub controller: String,
    pub seed: u64,
    pub completed: bool,
    pub ticks: u64,
    pub turnaround_time: f64,
    pub path_length: f64,
    pub predicted_path_length: f64,
    pub predicted_turnaround_time: f64,
    pub path_length_deviation: f64,
    pub turnaround_time_deviation: f64,
    pub coverage_percent: f64,
    pub direct_percent: f64,
    pub indirect_percent: f64,
    pub redundancy_percent: f64,
    pub final_group: f64,
    pub final_order: f64,
    pub min_peer_distance: f64,
    pub min_static_clearance: f64,
    pub min_disc_clearance: f64,
    pub peer_violation_ticks: u64,
    pub static_violation_ticks: u64,
    pub disc_violation_ticks: u64,
    pub max_step: f64,
    pub role_changes: u64,
}

fn relative(actual: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        0.0
    } else {
        (actual - predicted).abs() / predicted
    }
}

impl MetricsRow {
    pub fn new(report: &MetricsReport, plan: &Plan, seed: u64) -> Self {
        let last = report.group_order.last();
        let p = &plan.prediction;
        Self {
            controller: serde_json::to_value(report.controller)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            seed,
            completed: report.completed,
            ticks: report.ticks,
            turnaround_time: report.turnaround_time,
            path_length: report.path_length,
            predicted_path_length: p.path_length,
            predicted_turnaround_time: p.turnaround_time,
            path_length_deviation: relative(report.path_length, p.path_length),
            turnaround_time_deviation: relative(report.turnaround_time, p.turnaround_time),
            coverage_percent: report.coverage.coverage_percent,
            direct_percent: report.coverage.direct_percent,
            indirect_percent: report.coverage.indirect_percent,
            redundancy_percent: report.coverage.redundancy_percent,
            final_group: last.map_or(0.0, |s| s.group),
            final_order: last.map_or(0.0, |s| s.order),
            min_peer_distance: report.min_peer_distance,
            min_static_clearance: report.min_static_clearance,
            min_disc_clearance: report.min_disc_clearance,
            peer_violation_ticks: report.peer_violation_ticks,
            static_violation_ticks: report.static_violation_ticks,
            disc_violation_ticks: report.disc_violation_ticks,
            max_step: report.max_step,
            role_changes: report.role_changes,
        }
    }
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn metrics_csv(row: &MetricsRow) -> Result<String, ReportError> {
    to_csv([row])
}

/// Group and order samples, one row per sampling tick.
pub fn group_order_csv(report: &MetricsReport) -> Result<String, ReportError> {
    to_csv(&report.group_order)
}

/// Vehicle states, one row per vehicle per recorded tick.
pub fn trajectory_csv(result: &MissionResult) -> Result<String, ReportError> {
    to_csv(&result.trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::optimize_plan;
    use crate::scenario::BudgetSection;

    #[test]
    fn plan_json_round_trips() {
        let mut s = Scenario::empty(10.0, 10.0, BudgetSection { max_path_length: 1e4, max_time: 1e4 });
        s.map.obstacles.push(PolygonObstacle::rectangle([3.1, 3.3].into(), [5.2, 6.0].into()));
        s.planner.cell_sizes = Some(vec![1.0, 2.0]);
        let ladder = s.ladder().unwrap();
        let outcome = optimize_plan(&s.obstacles(), s.bounds(), &ladder, &s.budget(), &s.plan_settings(), &s.search_config())
            .unwrap();
        let doc = PlanDocument::new(&s, &ladder.sizes, outcome);
        let back = PlanDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
