//! Scenario in, plan document and simulated run out.

use crate::grid::rasterize;
use crate::pipeline::{optimize_plan, PlanError};
use crate::report::{MetricsRow, PlanDocument};
use crate::scenario::Scenario;
use crate::sim::{run_mission, MissionResult};
use crate::Error;

/// Searches the scenario's cell-size ladder and packages the chosen plan.
pub fn plan_scenario(scenario: &Scenario) -> Result<PlanDocument, Error> {
    let ladder = scenario.ladder()?;
    let outcome = optimize_plan(
        &scenario.obstacles(),
        scenario.bounds(),
        &ladder,
        &scenario.budget(),
        &scenario.plan_settings(),
        &scenario.search_config(),
    )?;
    Ok(PlanDocument::new(scenario, &ladder.sizes, outcome))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub result: MissionResult,
    pub row: MetricsRow,
}

/// Flies the scenario's fleet along `doc`'s path. Coverage is counted on
/// the grid the plan's prediction was scored on.
pub fn simulate_plan(scenario: &Scenario, doc: &PlanDocument) -> Result<Run, Error> {
    let grid = rasterize(&doc.obstacles, doc.bounds, doc.evaluation_cell_size).map_err(PlanError::from)?;
    let cfg = scenario.mission_config();
    let result = run_mission(&doc.plan.path, doc.plan.cell_size, &grid, &scenario.world(), scenario.simulation.controller, &cfg)?;
    let row = MetricsRow::new(&result.report, &doc.plan, cfg.seed);
    Ok(Run { result, row })
}
