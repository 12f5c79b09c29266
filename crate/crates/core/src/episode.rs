//! The closed-loop navigation episode: sense, accumulate, predict, plan,
//! smooth, build the default policy, select an action, execute it on the
//! true grid, and log everything.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::{mix_seed, Vec2};
use crate::grid::{CellState, GoalRegion, OccupancyGrid};
use crate::policy::{build_default_policy, default_epsilon, CovarianceSchedule, ScheduleParams};
use crate::predict::{map_accuracy, predict, PredictorKind};
use crate::rrt::{plan_geometric_path, PlannerParams};
use crate::search::{
    estimate_kl, select_action, step_dynamics, RationalityParams, RewardParams, RobotState,
};
use crate::sensing::{sense, ContextMap, SensorModel};
use crate::spline::{smooth_path, SplineParams};

/// Everything an episode needs besides the scenario and the predictor kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeParams {
    pub sensor: SensorModel,
    pub planner: PlannerParams,
    pub spline: SplineParams,
    pub schedule: ScheduleParams,
    pub rationality: RationalityParams,
    pub reward: RewardParams,
    pub max_steps: usize,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            sensor: SensorModel::default(),
            planner: PlannerParams::default(),
            spline: SplineParams::default(),
            schedule: ScheduleParams::default(),
            rationality: RationalityParams::default(),
            reward: RewardParams::default(),
            max_steps: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    Collision,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Failure(FailureReason),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Success => write!(f, "success"),
            Outcome::Failure(FailureReason::Collision) => write!(f, "failure_collision"),
            Outcome::Failure(FailureReason::Timeout) => write!(f, "failure_timeout"),
        }
    }
}

impl Outcome {
    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "success" => Some(Outcome::Success),
            "failure_collision" => Some(Outcome::Failure(FailureReason::Collision)),
            "failure_timeout" => Some(Outcome::Failure(FailureReason::Timeout)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub position: Vec2,
    pub action: Vec2,
    pub dist_to_goal: f64,
    pub explored_m2: f64,
    pub m_acc: f64,
    pub kl: f64,
    pub wall_ms: f64,
}

/// Time-indexed record of one navigation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub scenario_id: String,
    pub predictor: String,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl EpisodeLog {
    /// Per-step CSV. The trailing summary line carries outcome, total path
    /// length, step count, and seed.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,vx,vy,dist_to_goal,explored_m2,m_acc,kl,wall_ms\n");
        for r in &self.steps {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.position.x,
                r.position.y,
                r.action.x,
                r.action.y,
                r.dist_to_goal,
                r.explored_m2,
                r.m_acc,
                r.kl,
                r.wall_ms
            ));
        }
        s.push_str(&format!(
            "#summary,{},{},{},{},{},{}\n",
            self.scenario_id,
            self.predictor,
            self.outcome,
            crate::metrics::path_length(self),
            self.steps.len(),
            self.seed
        ));
        s
    }

    pub fn from_csv(text: &str) -> Result<EpisodeLog> {
        let mut steps = Vec::new();
        let mut scenario_id = String::new();
        let mut predictor = String::new();
        let mut outcome = None;
        let mut seed = 0;
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue; // header
            }
            if let Some(rest) = line.strip_prefix("#summary,") {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 6 {
                    return Err(GridNavError::Config(format!("bad summary line: {line}")));
                }
                scenario_id = f[0].to_string();
                predictor = f[1].to_string();
                outcome = Outcome::parse(f[2]);
                seed = f[5]
                    .parse()
                    .map_err(|_| GridNavError::Config(format!("bad seed: {}", f[5])))?;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(GridNavError::Config(format!("bad step line: {line}")));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| GridNavError::Config(format!("bad number: {s}")))
            };
            steps.push(StepRecord {
                t: f[0]
                    .parse()
                    .map_err(|_| GridNavError::Config(format!("bad t: {}", f[0])))?,
                position: Vec2::new(num(f[1])?, num(f[2])?),
                action: Vec2::new(num(f[3])?, num(f[4])?),
                dist_to_goal: num(f[5])?,
                explored_m2: num(f[6])?,
                m_acc: num(f[7])?,
                kl: num(f[8])?,
                wall_ms: num(f[9])?,
            });
        }
        let outcome = outcome.ok_or_else(|| GridNavError::Config("missing summary".into()))?;
        Ok(EpisodeLog { scenario_id, predictor, seed, steps, outcome })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::runner::write_atomic(path, &self.to_csv())
    }

    pub fn load(path: &Path) -> Result<EpisodeLog> {
        let text = std::fs::read_to_string(path)?;
        EpisodeLog::from_csv(&text)
    }
}

/// Run one closed-loop navigation episode. `initial_context` pre-seeds the
/// context map (for reveal-fraction sweeps); pass None to start fully
/// unknown. Deterministic given the seed.
#[allow(clippy::too_many_arguments)]
pub fn navigate_episode(
    grid: &OccupancyGrid,
    start: Vec2,
    goal: &GoalRegion,
    predictor: &PredictorKind,
    params: &EpisodeParams,
    seed: u64,
    scenario_id: &str,
    initial_context: Option<ContextMap>,
) -> Result<EpisodeLog> {
    let mut context = match initial_context {
        Some(ctx) => {
            if ctx.width() != grid.width() || ctx.height() != grid.height() {
                return Err(GridNavError::DimensionMismatch {
                    a_w: ctx.width(),
                    a_h: ctx.height(),
                    b_w: grid.width(),
                    b_h: grid.height(),
                });
            }
            ctx
        }
        None => ContextMap::matching(grid),
    };

    let rat = params.rationality;
    let horizon = rat.horizon;
    let schedule_template =
        CovarianceSchedule::linear(params.schedule.sigma_0, params.schedule.sigma_h, horizon);
    let epsilon = default_epsilon(horizon);

    let mut state = RobotState { position: start, time: 0 };
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut outcome = None;

    for step_idx in 0..params.max_steps {
        let step_clock = Instant::now();

        if goal.contains(state.position) {
            outcome = Some(Outcome::Success);
            // Terminal record so a start-in-goal episode still logs state.
            steps.push(StepRecord {
                t: step_idx,
                position: state.position,
                action: Vec2::default(),
                dist_to_goal: state.position.dist(goal.center),
                explored_m2: context.explored_area(),
                m_acc: steps.last().map(|r| r.m_acc).unwrap_or(0.0),
                kl: 0.0,
                wall_ms: step_clock.elapsed().as_secs_f64() * 1e3,
            });
            break;
        }

        let obs = sense(grid, state.position, &params.sensor)?;
        context.accumulate(&obs)?;
        let needs_truth = matches!(predictor, PredictorKind::Oracle);
        let predicted =
            predict(predictor, &context, &obs, needs_truth.then_some(grid))?;
        let m_acc = map_accuracy(&predicted, grid)?;

        // The sensor just observed the robot's cell free, so the predicted
        // map can never bury the start.
        debug_assert!(!predicted.cell_of(state.position).map_or(true, |(c, r)| {
            predicted.cell(c, r) == CellState::Occupied
        }));

        let step_seed = mix_seed(&[seed, step_idx as u64, 1]);
        let planner = PlannerParams { seed: mix_seed(&[seed, step_idx as u64, 2]), ..params.planner };
        let planned = plan_geometric_path(&predicted, state.position, goal, &planner);
        let smoothed = smooth_path(&planned.points, &params.spline, &predicted);
        let feasible_prefix = if planned.feasible {
            None
        } else {
            // Arc length of the prefix up to the fallback split.
            let split = planned.infeasible_from.unwrap_or(planned.points.len());
            let prefix: f64 = planned.points[..split]
                .windows(2)
                .map(|w| w[0].dist(w[1]))
                .sum();
            Some(prefix)
        };
        let q = build_default_policy(
            &smoothed,
            feasible_prefix,
            horizon,
            rat.dt,
            crate::search::V_MAX,
            schedule_template.clone(),
            epsilon,
        )?;

        let (expected_actions, sample_set) =
            select_action(&state, goal, &q, &predicted, &params.reward, &rat, step_seed);
        let kl = estimate_kl(&sample_set);

        // Execute the first action on the true grid (receding horizon).
        let action = expected_actions[0];
        let next = step_dynamics(&state, &action, rat.dt);
        let collided = !grid.in_bounds(next.position)
            || grid.segment_collides_unchecked(state.position, next.position);

        steps.push(StepRecord {
            t: step_idx,
            position: state.position,
            action: action.velocity.clamp_norm(crate::search::V_MAX),
            dist_to_goal: state.position.dist(goal.center),
            explored_m2: context.explored_area(),
            m_acc,
            kl,
            wall_ms: step_clock.elapsed().as_secs_f64() * 1e3,
        });

        if collided {
            outcome = Some(Outcome::Failure(FailureReason::Collision));
            break;
        }
        state = next;
    }

    let outcome = match outcome {
        Some(o) => o,
        None => {
            // Step budget exhausted; check whether the last motion landed in
            // the goal anyway.
            if goal.contains(state.position) {
                Outcome::Success
            } else {
                Outcome::Failure(FailureReason::Timeout)
            }
        }
    };

    Ok(EpisodeLog {
        scenario_id: scenario_id.to_string(),
        predictor: predictor.label().to_string(),
        seed,
        steps,
        outcome,
    })
}
