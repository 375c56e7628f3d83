//! Cell-size selection under path-length and time budgets.
//!
//! A bisection over the ascending ladder of cell sizes narrows down where
//! the budgets start to hold, then a linear walk toward coarser sizes keeps
//! the feasible size with the best predicted coverage, giving up after a
//! run of candidates without improvement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::predict::Budget;

const EQ_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("candidate ladder is empty")]
    EmptyLadder,
    #[error("candidate ladder must be positive and strictly ascending: {0}")]
    InvalidLadder(String),
    #[error("no cell size meets the budgets ({} evaluated)", evaluations.len())]
    Infeasible { coarsest: Option<Evaluation>, evaluations: Vec<EvaluationRecord> },
    #[error("best cell size {size} m exceeds the sensing range {range} m")]
    ExceedsSensingRange { size: f64, range: f64, evaluations: Vec<EvaluationRecord> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLadder {
    pub sizes: Vec<f64>,
}

impl CandidateLadder {
    pub fn new(sizes: Vec<f64>) -> Result<Self, SearchError> {
        if sizes.is_empty() {
            return Err(SearchError::EmptyLadder);
        }
        if let Some(s) = sizes.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(SearchError::InvalidLadder(format!("size {s}")));
        }
        if let Some(w) = sizes.windows(2).find(|w| w[1] <= w[0]) {
            return Err(SearchError::InvalidLadder(format!("{} then {}", w[0], w[1])));
        }
        Ok(Self { sizes })
    }

    /// `min, min + step, ...` up to `max` inclusive (with float tolerance).
    pub fn from_range(min: f64, max: f64, step: f64) -> Result<Self, SearchError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(SearchError::InvalidLadder(format!("step {step}")));
        }
        if max < min {
            return Err(SearchError::InvalidLadder(format!("max {max} below min {min}")));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        // round away accumulated float noise so 0.75 + 3 * 0.25 prints as 1.5
        let sizes = (0..count).map(|k| ((min + k as f64 * step) * 1e9).round() / 1e9).collect();
        Self::new(sizes)
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub path_length: f64,
    pub turnaround_time: f64,
    pub coverage_percent: f64,
}

impl Evaluation {
    pub fn feasible(&self, budget: &Budget) -> bool {
        self.path_length <= budget.max_path_length && self.turnaround_time <= budget.max_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Bisection,
    Linear,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub index: usize,
    pub cell_size: f64,
    pub phase: Phase,
    /// `None` when no plan could be built at this size.
    pub evaluation: Option<Evaluation>,
    pub failure: Option<String>,
}

/// Builds and scores a plan at one cell size.
pub trait Evaluator {
    type Plan: Clone;
    fn evaluate(&mut self, cell_size: f64) -> Result<(Evaluation, Self::Plan), String>;
}

impl<P: Clone, F: FnMut(f64) -> Result<(Evaluation, P), String>> Evaluator for F {
    type Plan = P;
    fn evaluate(&mut self, cell_size: f64) -> Result<(Evaluation, P), String> {
        self(cell_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub patience: usize,
    /// Move to coarser sizes only when both budgets are exceeded; when false,
    /// either one suffices.
    pub strict_search: bool,
    /// Sizes above this cannot be chosen.
    pub sensing_range: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { patience: 10, strict_search: true, sensing_range: f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<P> {
    pub chosen_index: usize,
    pub chosen_size: f64,
    pub evaluation: Evaluation,
    pub plan: P,
    /// Every evaluation in the order performed.
    pub evaluations: Vec<EvaluationRecord>,
}

struct Cache<'a, E: Evaluator> {
    ladder: &'a CandidateLadder,
    evaluator: &'a mut E,
    results: BTreeMap<usize, Result<(Evaluation, E::Plan), String>>,
    log: Vec<EvaluationRecord>,
}

impl<E: Evaluator> Cache<'_, E> {
    fn get(&mut self, index: usize, phase: Phase) -> Option<Evaluation> {
        if !self.results.contains_key(&index) {
            let cell_size = self.ladder.sizes[index];
            let result = self.evaluator.evaluate(cell_size);
            let (evaluation, failure) = match &result {
                Ok((e, _)) => (Some(*e), None),
                Err(msg) => (None, Some(msg.clone())),
            };
            self.log.push(EvaluationRecord { index, cell_size, phase, evaluation, failure });
            self.results.insert(index, result);
        }
        self.results[&index].as_ref().ok().map(|(e, _)| *e)
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Picks the ladder entry with the best predicted coverage among those
/// meeting `budget`.
///
/// Sizes that fail to produce a plan count as over both budgets. Coverage
/// ties go to the smaller size.
pub fn optimize_cell_size<E: Evaluator>(
    evaluator: &mut E,
    ladder: &CandidateLadder,
    budget: &Budget,
    config: &SearchConfig,
) -> Result<SearchOutcome<E::Plan>, SearchError> {
    if ladder.is_empty() {
        return Err(SearchError::EmptyLadder);
    }
    let mut cache = Cache { ladder, evaluator, results: BTreeMap::new(), log: Vec::new() };
    let last = ladder.len() as isize - 1;

    let (mut lo, mut hi) = (0_isize, last);
    while lo < hi {
        let m = (lo + hi) / 2;
        let e = cache.get(m as usize, Phase::Bisection);
        let (over_l, over_t) = match e {
            Some(e) => (e.path_length > budget.max_path_length, e.turnaround_time > budget.max_time),
            None => (true, true),
        };
        let go_coarser = if config.strict_search { over_l && over_t } else { over_l || over_t };
        if go_coarser {
            lo = m + 1;
        } else if e.is_some_and(|e| {
            approx_eq(e.path_length, budget.max_path_length) && approx_eq(e.turnaround_time, budget.max_time)
        }) {
            lo = m;
            hi = m;
        } else {
            hi = m - 1;
        }
    }

    let start = lo.min(hi).clamp(0, last) as usize;
    let mut best: Option<(usize, Evaluation)> = None;
    let mut stale = 0;
    for m in start..ladder.len() {
        match cache.get(m, Phase::Linear) {
            Some(e) if e.feasible(budget) => {
                if best.is_none_or(|(_, b)| e.coverage_percent > b.coverage_percent) {
                    best = Some((m, e));
                    stale = 0;
                } else {
                    stale += 1;
                }
            }
            // only count misses once something feasible has been seen
            _ if best.is_some() => stale += 1,
            _ => {}
        }
        if best.is_some() && stale >= config.patience {
            break;
        }
    }

    let Some((index, evaluation)) = best else {
        let coarsest = cache.get(last as usize, Phase::Final);
        return Err(SearchError::Infeasible { coarsest, evaluations: cache.log });
    };
    let size = ladder.sizes[index];
    if size > config.sensing_range {
        return Err(SearchError::ExceedsSensingRange { size, range: config.sensing_range, evaluations: cache.log });
    }
    let plan = cache.results[&index].as_ref().map(|(_, p)| p.clone()).expect("feasible entry has a plan");
    Ok(SearchOutcome { chosen_index: index, chosen_size: size, evaluation, plan, evaluations: cache.log })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    PathLength,
    Time,
    Speed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub value: f64,
    pub limit: f64,
    /// Amount by which the limit is exceeded.
    pub margin: f64,
    /// Trace step for speed violations.
    pub step: Option<usize>,
}

fn check(constraint: Constraint, value: f64, limit: f64, step: Option<usize>) -> Option<Violation> {
    (value > limit).then_some(Violation { constraint, value, limit, margin: value - limit, step })
}

/// Budget violations of a plan flown at nominal speed `speed`.
pub fn validate_plan(evaluation: &Evaluation, speed: f64, budget: &Budget) -> Vec<Violation> {
    [
        check(Constraint::PathLength, evaluation.path_length, budget.max_path_length, None),
        check(Constraint::Time, evaluation.turnaround_time, budget.max_time, None),
        check(Constraint::Speed, speed, budget.max_speed, None),
    ]
    .into_iter()
    .flatten()
    .collect()
}

/// Steps of a sampled trajectory that move farther than `max_speed * dt`.
pub fn validate_trace(positions: &[Vec2], dt: f64, max_speed: f64) -> Vec<Violation> {
    let limit = max_speed * dt * (1.0 + EQ_TOL);
    positions
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| check(Constraint::Speed, w[0].distance(w[1]), limit, Some(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(l: f64, t: f64) -> Budget {
        Budget { max_path_length: l, max_time: t, max_speed: 1.0 }
    }

    /// Scripted evaluator over a ladder of predictions (L, T = L, coverage).
    fn scripted(table: Vec<(f64, f64, f64)>) -> impl FnMut(f64) -> Result<(Evaluation, usize), String> {
        move |cs| {
            let k = table.iter().position(|r| r.0 == cs).ok_or("unknown size")?;
            let (_, l, c) = table[k];
            Ok((Evaluation { path_length: l, turnaround_time: l, coverage_percent: c }, k))
        }
    }

    #[test]
    fn lands_in_feasible_region() {
        let ladder = CandidateLadder::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut eval = scripted(vec![(1.0, 100.0, 0.99), (2.0, 50.0, 0.95), (3.0, 20.0, 0.9)]);
        let out = optimize_cell_size(&mut eval, &ladder, &budget(60.0, 60.0), &SearchConfig::default()).unwrap();
        assert_eq!(out.chosen_size, 2.0);
        assert_eq!(out.plan, 1);
        assert!(out.evaluation.feasible(&budget(60.0, 60.0)));
    }

    #[test]
    fn slack_budgets_choose_finest() {
        let ladder = CandidateLadder::from_range(0.75, 3.0, 0.25).unwrap();
        assert_eq!(ladder.len(), 10);
        assert_eq!(ladder.sizes[3], 1.5);
        let table = ladder.sizes.iter().map(|&s| (s, 100.0 / s, 1.0 - s / 10.0)).collect();
        let mut eval = scripted(table);
        let out = optimize_cell_size(&mut eval, &ladder, &budget(1e6, 1e6), &SearchConfig::default()).unwrap();
        assert_eq!(out.chosen_index, 0);
    }

    #[test]
    fn impossible_budgets_are_reported() {
        let ladder = CandidateLadder::new(vec![1.0, 2.0]).unwrap();
        let mut eval = scripted(vec![(1.0, 100.0, 1.0), (2.0, 50.0, 1.0)]);
        let err = optimize_cell_size(&mut eval, &ladder, &budget(1.0, 1.0), &SearchConfig::default()).unwrap_err();
        match err {
            SearchError::Infeasible { coarsest, .. } => assert_eq!(coarsest.unwrap().path_length, 50.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coverage_ties_prefer_finer() {
        let ladder = CandidateLadder::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut eval = scripted(vec![(1.0, 100.0, 0.9), (2.0, 50.0, 0.9), (3.0, 20.0, 0.9)]);
        let out = optimize_cell_size(&mut eval, &ladder, &budget(60.0, 60.0), &SearchConfig::default()).unwrap();
        assert_eq!(out.chosen_size, 2.0);
    }

    #[test]
    fn choice_beyond_sensing_range_fails() {
        let ladder = CandidateLadder::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut eval = scripted(vec![(1.0, 100.0, 0.9), (2.0, 50.0, 0.9), (3.0, 20.0, 0.9)]);
        let config = SearchConfig { sensing_range: 2.5, ..SearchConfig::default() };
        let err = optimize_cell_size(&mut eval, &ladder, &budget(30.0, 30.0), &config).unwrap_err();
        assert!(matches!(err, SearchError::ExceedsSensingRange { size, .. } if size == 3.0));
    }

    #[test]
    fn one_budget_over_moves_finer_in_strict_mode() {
        // length fits everywhere, time only at the coarse end
        let ladder = CandidateLadder::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let mut eval = |cs: f64| -> Result<(Evaluation, ()), String> {
            Ok((Evaluation { path_length: 1.0, turnaround_time: 10.0 / cs, coverage_percent: 1.0 - cs / 10.0 }, ()))
        };
        let b = budget(5.0, 3.0);
        let strict = optimize_cell_size(&mut eval, &ladder, &b, &SearchConfig::default()).unwrap();
        let relaxed = SearchConfig { strict_search: false, ..SearchConfig::default() };
        let loose = optimize_cell_size(&mut eval, &ladder, &b, &relaxed).unwrap();
        assert_eq!(strict.chosen_size, 4.0);
        assert_eq!(loose.chosen_size, 4.0);
        assert!(strict.evaluations.len() >= loose.evaluations.len());
    }

    #[test]
    fn plan_and_trace_violations() {
        let b = budget(100.0, 50.0);
        let ok = Evaluation { path_length: 100.0, turnaround_time: 50.0, coverage_percent: 1.0 };
        assert!(validate_plan(&ok, 1.0, &b).is_empty());
        let long = Evaluation { path_length: 101.0, ..ok };
        let v = validate_plan(&long, 1.0, &b);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, Constraint::PathLength);
        assert!((v[0].margin - 1.0).abs() < 1e-12);
        let trace = [Vec2::ZERO, Vec2::new(0.1, 0.0), Vec2::new(0.5, 0.0)];
        let bad = validate_trace(&trace, 0.1, 1.0);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].step, Some(1));
    }
}
