//! Post-hoc metrics over episode logs: path length, navigation efficiency,
//! map-accuracy replay, and per-(scenario, predictor) aggregation.

use std::collections::BTreeMap;

use crate::episode::{EpisodeLog, Outcome};
use crate::error::Result;
use crate::geom::Vec2;
use crate::grid::{GoalRegion, OccupancyGrid};
use crate::predict::{map_accuracy, predict, PredictorKind};
use crate::sensing::{sense, ContextMap, SensorModel};

/// Total executed path length: sum of distances between consecutive logged
/// positions.
pub fn path_length(log: &EpisodeLog) -> f64 {
    log.steps.windows(2).map(|w| w[0].position.dist(w[1].position)).sum()
}

/// Navigation efficiency at each logged step: progress toward the goal per
/// square meter of explored area, (d_0 - d_t) / explored_t. Steps with zero
/// explored area yield 0.
pub fn navigation_efficiency(log: &EpisodeLog) -> Vec<f64> {
    let d0 = match log.steps.first() {
        Some(r) => r.dist_to_goal,
        None => return Vec::new(),
    };
    log.steps
        .iter()
        .map(|r| {
            if r.explored_m2 > 0.0 {
                (d0 - r.dist_to_goal) / r.explored_m2
            } else {
                0.0
            }
        })
        .collect()
}

/// Replay the logged trajectory against the true grid, rebuilding the
/// context map step by step and scoring any predictor's map accuracy at each
/// step. Lets accuracy curves be computed for predictors that never ran.
pub fn accuracy_series(
    log: &EpisodeLog,
    grid: &OccupancyGrid,
    sensor: &SensorModel,
    predictor: &PredictorKind,
) -> Result<Vec<f64>> {
    let mut context = ContextMap::matching(grid);
    let mut out = Vec::with_capacity(log.steps.len());
    for rec in &log.steps {
        let obs = sense(grid, rec.position, sensor)?;
        context.accumulate(&obs)?;
        let needs_truth = matches!(predictor, PredictorKind::Oracle);
        let predicted = predict(predictor, &context, &obs, needs_truth.then_some(grid))?;
        out.push(map_accuracy(&predicted, grid)?);
    }
    Ok(out)
}

/// Mean results for one (scenario, predictor) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub predictor: String,
    pub trials: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub mean_path_length: f64,
    pub mean_steps: f64,
    pub mean_explored_m2: f64,
    pub mean_final_m_acc: f64,
    pub mean_final_efficiency: f64,
}

/// Aggregate logs into per-(scenario, predictor) means. Rows come back in
/// deterministic lexicographic order of (scenario_id, predictor).
pub fn aggregate(logs: &[EpisodeLog]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String), Vec<&EpisodeLog>> = BTreeMap::new();
    for log in logs {
        groups
            .entry((log.scenario_id.clone(), log.predictor.clone()))
            .or_default()
            .push(log);
    }
    groups
        .into_iter()
        .map(|((scenario_id, predictor), members)| {
            let n = members.len() as f64;
            let count = |f: &dyn Fn(&EpisodeLog) -> bool| {
                members.iter().filter(|l| f(l)).count() as f64 / n
            };
            let mean = |f: &dyn Fn(&EpisodeLog) -> f64| {
                members.iter().map(|l| f(l)).sum::<f64>() / n
            };
            SummaryRow {
                trials: members.len(),
                success_rate: count(&|l| l.outcome == Outcome::Success),
                collision_rate: count(&|l| {
                    matches!(
                        l.outcome,
                        Outcome::Failure(crate::episode::FailureReason::Collision)
                    )
                }),
                timeout_rate: count(&|l| {
                    matches!(
                        l.outcome,
                        Outcome::Failure(crate::episode::FailureReason::Timeout)
                    )
                }),
                mean_path_length: mean(&path_length),
                mean_steps: mean(&|l| l.steps.len() as f64),
                mean_explored_m2: mean(&|l| {
                    l.steps.last().map(|r| r.explored_m2).unwrap_or(0.0)
                }),
                mean_final_m_acc: mean(&|l| l.steps.last().map(|r| r.m_acc).unwrap_or(0.0)),
                mean_final_efficiency: mean(&|l| {
                    navigation_efficiency(l).last().copied().unwrap_or(0.0)
                }),
                scenario_id,
                predictor,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "scenario_id,predictor,trials,success_rate,collision_rate,timeout_rate,\
         mean_path_length,mean_steps,mean_explored_m2,mean_final_m_acc,mean_final_efficiency\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario_id,
            r.predictor,
            r.trials,
            r.success_rate,
            r.collision_rate,
            r.timeout_rate,
            r.mean_path_length,
            r.mean_steps,
            r.mean_explored_m2,
            r.mean_final_m_acc,
            r.mean_final_efficiency
        ));
    }
    s
}

/// Whether the distance-to-goal series ever increases by more than `tol`
/// after having decreased — a signature of backtracking out of a dead end.
pub fn has_backtracking(log: &EpisodeLog, tol: f64) -> bool {
    let mut min_so_far = f64::INFINITY;
    for r in &log.steps {
        if r.dist_to_goal < min_so_far {
            min_so_far = r.dist_to_goal;
        } else if r.dist_to_goal > min_so_far + tol {
            return true;
        }
    }
    false
}

/// Straight-line distance from the first logged position to the goal center
/// recorded in the log (dist_to_goal at t=0).
pub fn initial_distance(log: &EpisodeLog) -> f64 {
    log.steps.first().map(|r| r.dist_to_goal).unwrap_or(0.0)
}

/// Oracle shortest-path length for the scenario this log ran on.
pub fn oracle_length(
    grid: &OccupancyGrid,
    start: Vec2,
    goal: &GoalRegion,
) -> Result<Option<f64>> {
    grid.shortest_path_oracle(start, goal)
}
