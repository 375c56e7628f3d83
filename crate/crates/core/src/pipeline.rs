//! Raster, blocks, tree, path and prediction chained into one plan, and the
//! cell-size search over it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{build_block_graph, build_blocks, default_max_block_size, Block, BlockError, BlockGraph, BlockId};
use crate::geometry::{Rect, Vec2};
use crate::grid::{rasterize, GridMap, PolygonObstacle, RasterError};
use crate::mst::{prim_mst, SpanningTree, TreeError};
use crate::path::{build_path, CoveragePath, PathError};
use crate::predict::{predict_coverage, predict_kinematics, Budget, Halfwidth, PlanPrediction, PredictError};
use crate::search::{optimize_cell_size, CandidateLadder, Evaluation, SearchConfig, SearchError, SearchOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Blocks(#[from] BlockError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("no free cell at cell size {0}")]
    NoFreeSpace(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSettings {
    pub n_ugvs: usize,
    /// Spacing per vehicle used to size the largest block.
    pub vehicle_spacing: f64,
    /// Overrides the block size derived from fleet size and spacing.
    pub max_block_size: Option<usize>,
    pub speed: f64,
    pub turn_rate: f64,
    pub n_t: f64,
    pub sensing_range: f64,
    /// Cell size of the grid coverage is predicted on; defaults to the plan's own.
    pub evaluation_cell_size: Option<f64>,
    /// The loop starts at the waypoint closest to this point.
    pub start: Vec2,
}

impl Default for PlanSettings {
    fn default() -> Self {
        Self {
            n_ugvs: 5,
            vehicle_spacing: 1.0,
            max_block_size: None,
            speed: 1.1,
            turn_rate: 0.5,
            n_t: 1.0,
            sensing_range: 4.0,
            evaluation_cell_size: None,
            start: Vec2::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub cell_size: f64,
    pub max_block_size: usize,
    pub grid: GridMap,
    pub graph: BlockGraph,
    pub tree: SpanningTree,
    pub path: CoveragePath,
    pub prediction: PlanPrediction,
}

impl Plan {
    pub fn blocks(&self) -> &[Block] {
        &self.graph.blocks
    }

    pub fn evaluation(&self) -> Evaluation {
        Evaluation {
            path_length: self.prediction.path_length,
            turnaround_time: self.prediction.turnaround_time,
            coverage_percent: self.prediction.coverage_percent,
        }
    }
}

/// Root block: the one nearest `start` inside the component with the most
/// free area, so an isolated pocket never hijacks the plan.
fn choose_root(graph: &BlockGraph, start: Vec2) -> BlockId {
    let n = graph.len();
    let mut component = vec![usize::MAX; n];
    let mut areas = Vec::new();
    for seed in 0..n {
        if component[seed] != usize::MAX {
            continue;
        }
        let id = areas.len();
        let mut area = 0usize;
        let mut stack = vec![seed];
        component[seed] = id;
        while let Some(b) = stack.pop() {
            area += graph.blocks[b].size_cells.pow(2);
            for w in graph.all_neighbors(b) {
                if component[w] == usize::MAX {
                    component[w] = id;
                    stack.push(w);
                }
            }
        }
        areas.push(area);
    }
    let best = (0..areas.len()).max_by(|&a, &b| areas[a].cmp(&areas[b]).then(b.cmp(&a))).unwrap_or(0);
    (0..n)
        .filter(|&b| component[b] == best)
        .min_by(|&a, &b| {
            let da = graph.blocks[a].center.distance(start);
            let db = graph.blocks[b].center.distance(start);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap_or(0)
}

/// Plans at one cell size. `eval_grid`, when given, is the grid coverage is
/// scored on.
pub fn plan_with_grid(
    obstacles: &[PolygonObstacle],
    bounds: Rect,
    cell_size: f64,
    settings: &PlanSettings,
    eval_grid: Option<&GridMap>,
) -> Result<Plan, PlanError> {
    let grid = rasterize(obstacles, bounds, cell_size)?;
    if grid.free_count() == 0 {
        return Err(PlanError::NoFreeSpace(cell_size));
    }
    let max_block_size = settings
        .max_block_size
        .unwrap_or_else(|| default_max_block_size(settings.n_ugvs, settings.vehicle_spacing, cell_size));
    let blocks = build_blocks(&grid, max_block_size)?;
    let graph = build_block_graph(&blocks, &grid)?;
    let root = choose_root(&graph, settings.start);
    let tree = prim_mst(&graph, root)?;
    let path = build_path(&graph.blocks, &tree, settings.start)?;
    let kinematics = predict_kinematics(&path, settings.speed, settings.turn_rate, settings.n_t)?;
    let halfwidth = Halfwidth::BlockScaled { cell_size };
    let coverage = predict_coverage(&path, eval_grid.unwrap_or(&grid), settings.sensing_range, halfwidth);
    let prediction = PlanPrediction::new(kinematics, coverage);
    log::debug!(
        "cs {cell_size}: {} blocks, {} waypoints, L {:.2}, T {:.2}, CP {:.4}",
        graph.len(),
        path.len(),
        prediction.path_length,
        prediction.turnaround_time,
        prediction.coverage_percent
    );
    Ok(Plan { cell_size, max_block_size, grid, graph, tree, path, prediction })
}

/// Plans at one cell size, scoring coverage on the evaluation grid from
/// `settings` if one is set.
pub fn plan_at(
    obstacles: &[PolygonObstacle],
    bounds: Rect,
    cell_size: f64,
    settings: &PlanSettings,
) -> Result<Plan, PlanError> {
    let eval = match settings.evaluation_cell_size {
        Some(cs) if cs != cell_size => Some(rasterize(obstacles, bounds, cs)?),
        _ => None,
    };
    plan_with_grid(obstacles, bounds, cell_size, settings, eval.as_ref())
}

/// Searches the ladder for the best-coverage plan within budget. Coverage
/// is scored on one shared grid so candidate sizes compare fairly; it uses
/// `settings.evaluation_cell_size` or else the finest ladder entry.
pub fn optimize_plan(
    obstacles: &[PolygonObstacle],
    bounds: Rect,
    ladder: &CandidateLadder,
    budget: &Budget,
    settings: &PlanSettings,
    config: &SearchConfig,
) -> Result<SearchOutcome<Plan>, SearchError> {
    let finest = ladder.sizes.first().copied().ok_or(SearchError::EmptyLadder)?;
    let eval_cs = settings.evaluation_cell_size.unwrap_or(finest);
    let eval_grid = rasterize(obstacles, bounds, eval_cs).ok();
    let mut evaluator = |cs: f64| -> Result<(Evaluation, Plan), String> {
        let plan = plan_with_grid(obstacles, bounds, cs, settings, eval_grid.as_ref()).map_err(|e| e.to_string())?;
        Ok((plan.evaluation(), plan))
    };
    optimize_cell_size(&mut evaluator, ladder, budget, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(size: f64) -> Rect {
        Rect::from_size(size, size)
    }

    #[test]
    fn empty_map_is_fully_covered() {
        let settings = PlanSettings { max_block_size: Some(4), ..PlanSettings::default() };
        let plan = plan_at(&[], square(20.0), 2.5, &settings).unwrap();
        assert_eq!(plan.graph.len(), 4);
        assert_eq!(plan.path.len(), 16);
        assert!((plan.prediction.coverage_percent - 1.0).abs() < 1e-12);
        assert!(plan.path.find_crossing().is_none());
    }

    #[test]
    fn isolated_pocket_does_not_become_root() {
        // a walled-off corner cell near the start
        let wall = vec![
            PolygonObstacle::rectangle(Vec2::new(1.0, 0.0), Vec2::new(2.0, 2.0)),
            PolygonObstacle::rectangle(Vec2::new(0.0, 1.0), Vec2::new(1.0, 2.0)),
        ];
        let settings = PlanSettings { max_block_size: Some(1), ..PlanSettings::default() };
        let plan = plan_at(&wall, square(6.0), 1.0, &settings).unwrap();
        assert_eq!(plan.tree.unreachable.len(), 1);
        assert!(plan.tree.reached.len() > 1);
    }

    #[test]
    fn evaluation_grid_changes_only_coverage() {
        let obstacles = vec![PolygonObstacle::rectangle(Vec2::new(4.2, 4.2), Vec2::new(5.1, 5.1))];
        let own = PlanSettings::default();
        let shared = PlanSettings { evaluation_cell_size: Some(0.5), ..PlanSettings::default() };
        let a = plan_at(&obstacles, square(10.0), 2.0, &own).unwrap();
        let b = plan_at(&obstacles, square(10.0), 2.0, &shared).unwrap();
        assert_eq!(a.path, b.path);
        assert_eq!(a.prediction.path_length, b.prediction.path_length);
    }

    #[test]
    fn search_respects_budget() {
        let ladder = CandidateLadder::from_range(1.0, 3.0, 0.5).unwrap();
        let budget = Budget { max_path_length: 150.0, max_time: 1e6, max_speed: 1.0 };
        let settings = PlanSettings { max_block_size: Some(2), ..PlanSettings::default() };
        let out = optimize_plan(&[], square(20.0), &ladder, &budget, &settings, &SearchConfig::default()).unwrap();
        assert!(out.plan.prediction.path_length <= 150.0);
        assert!(out.evaluations.iter().any(|e| e.evaluation.is_some_and(|v| v.path_length > 150.0)));
    }
}
