//! Importance-sampled bounded-rational action selection: deterministic
//! single-integrator dynamics, the per-step reward on the predicted map,
//! trajectory rollouts, the exp(beta*J) weighting, and a KL diagnostic of the
//! empirical tilted policy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::grid::{CellState, GoalRegion};
use crate::policy::{sample_trajectories, TrajectoryDistribution};
use crate::predict::{PredictedMap, Provenance};

pub const V_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub time: usize,
}

/// Velocity command; applied velocity is clamped to the 1 m/s speed bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionCommand {
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalityParams {
    pub beta: f64,
    /// Number of sampled trajectories per step.
    pub sample_count: usize,
    pub horizon: usize,
    pub dt: f64,
}

impl Default for RationalityParams {
    fn default() -> Self {
        RationalityParams { beta: 0.04, sample_count: 100, horizon: 10, dt: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Weight on distance to goal, 1/m.
    pub w_goal: f64,
    /// Penalty for collision on the predicted map.
    pub w_collision: f64,
    /// Penalty for proximity to imagined occupied cells.
    pub w_unreliable: f64,
    /// Radius of the collision / proximity disc, meters.
    pub collision_radius: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams { w_goal: 1.0, w_collision: 100.0, w_unreliable: 5.0, collision_radius: 0.1 }
    }
}

/// The empirical tilted policy phi_t: sampled trajectories, their rollout
/// rewards, derived action sequences, and max-shifted importance weights.
#[derive(Debug, Clone)]
pub struct WeightedSampleSet {
    pub trajectories: Vec<Vec<Vec2>>,
    pub actions: Vec<Vec<ActionCommand>>,
    pub rewards: Vec<f64>,
    /// w_k = exp(beta * (J_k - max_j J_j)); the best sample has weight 1.
    pub weights: Vec<f64>,
}

/// Deterministic single integrator with the speed bound applied by clamping.
pub fn step_dynamics(s: &RobotState, a: &ActionCommand, dt: f64) -> RobotState {
    RobotState {
        position: s.position + a.velocity.clamp_norm(V_MAX) * dt,
        time: s.time + 1,
    }
}

/// Nearest occupied cell (center distance) within `radius` of `p` on the
/// predicted map, if any. Out-of-bounds positions count as an observed
/// collision at distance zero.
fn nearest_occupied(map: &PredictedMap, p: Vec2, radius: f64) -> Option<(f64, Provenance)> {
    let (pc, pr) = match map.cell_of(p) {
        Some(cell) => cell,
        None => return Some((0.0, Provenance::ObservedCell)),
    };
    let span = (radius / map.resolution()).ceil() as i64 + 1;
    let mut best: Option<(f64, Provenance)> = None;
    for dr in -span..=span {
        for dc in -span..=span {
            let (c, r) = (pc as i64 + dc, pr as i64 + dr);
            if c < 0 || r < 0 || c >= map.width() as i64 || r >= map.height() as i64 {
                continue;
            }
            let (c, r) = (c as usize, r as usize);
            if map.cell(c, r) != CellState::Occupied {
                continue;
            }
            let d = map.center_of(c, r).dist(p);
            if d <= radius {
                match best {
                    Some((bd, _)) if bd <= d => {}
                    _ => best = Some((d, map.provenance(c, r))),
                }
            }
        }
    }
    // Treat the containing cell itself as distance zero regardless of center
    // offset.
    if map.cell(pc, pr) == CellState::Occupied {
        return Some((0.0, map.provenance(pc, pr)));
    }
    best
}

/// One-step reward at the post-step state s'. Discourages distance to the
/// goal, collisions on the predicted map (point disc and the swept segment),
/// and proximity to imagined occupied cells.
pub fn reward(
    prev: &RobotState,
    next: &RobotState,
    goal: &GoalRegion,
    map: &PredictedMap,
    rp: &RewardParams,
) -> f64 {
    let mut r = -rp.w_goal * next.position.dist(goal.center);
    let near = nearest_occupied(map, next.position, rp.collision_radius);
    let swept = map.segment_collides(prev.position, next.position);
    let collided = swept || matches!(near, Some((d, _)) if d <= rp.collision_radius);
    if collided {
        r -= rp.w_collision;
    }
    if let Some((_, Provenance::ImaginedCell)) = near {
        r -= rp.w_unreliable;
    }
    r
}

/// Cumulative reward of rolling an action sequence out from `start` on the
/// predicted map.
pub fn rollout(
    start: &RobotState,
    actions: &[ActionCommand],
    goal: &GoalRegion,
    map: &PredictedMap,
    rp: &RewardParams,
    dt: f64,
) -> f64 {
    let mut state = *start;
    let mut total = 0.0;
    for a in actions {
        let next = step_dynamics(&state, a, dt);
        total += reward(&state, &next, goal, map, rp);
        state = next;
    }
    total
}

/// Actions recovered from a waypoint sequence as bounded finite differences.
pub fn actions_from_waypoints(traj: &[Vec2], dt: f64) -> Vec<ActionCommand> {
    traj.windows(2)
        .map(|w| ActionCommand { velocity: ((w[1] - w[0]) / dt).clamp_norm(V_MAX) })
        .collect()
}

/// Importance-sampled expected optimal action sequence. Draws L trajectories
/// from the default policy, weights them by exp(beta * J) (max-shifted), and
/// returns the self-normalized weighted mean action sequence together with
/// the sample set. Rollouts are evaluated in parallel but reduced in fixed
/// sample-index order, so the result is independent of thread scheduling.
pub fn select_action(
    state: &RobotState,
    goal: &GoalRegion,
    q: &TrajectoryDistribution,
    map: &PredictedMap,
    rp: &RewardParams,
    rat: &RationalityParams,
    seed: u64,
) -> (Vec<ActionCommand>, WeightedSampleSet) {
    let trajectories = sample_trajectories(q, rat.sample_count, seed);
    let actions: Vec<Vec<ActionCommand>> =
        trajectories.iter().map(|t| actions_from_waypoints(t, rat.dt)).collect();
    let rewards: Vec<f64> = actions
        .par_iter()
        .map(|a| rollout(state, a, goal, map, rp, rat.dt))
        .collect();

    let weights = weights_from_rewards(&rewards, rat.beta);
    let expected = weighted_mean_actions(&actions, &weights, q.horizon() - 1);

    (expected, WeightedSampleSet { trajectories, actions, rewards, weights })
}

/// Max-shifted importance weights: w_k = exp(beta * (J_k - max_j J_j)).
/// Ratios equal the unshifted exp(beta*J) weights; the best sample has
/// weight exactly 1, so the sum can never vanish.
pub fn weights_from_rewards(rewards: &[f64], beta: f64) -> Vec<f64> {
    let max_reward = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rewards.iter().map(|&j| (beta * (j - max_reward)).exp()).collect()
}

/// Self-normalized weighted mean of action sequences, reduced in fixed
/// sample-index order.
pub fn weighted_mean_actions(
    actions: &[Vec<ActionCommand>],
    weights: &[f64],
    steps: usize,
) -> Vec<ActionCommand> {
    let mut expected = vec![Vec2::default(); steps];
    let mut weight_sum = 0.0;
    for (k, w) in weights.iter().enumerate() {
        weight_sum += w;
        for (j, a) in actions[k].iter().enumerate() {
            expected[j] += a.velocity * *w;
        }
    }
    expected
        .into_iter()
        .map(|v| ActionCommand { velocity: v / weight_sum })
        .collect()
}

/// KL divergence of the self-normalized weight distribution from uniform:
/// sum w_hat_k * ln(L * w_hat_k). Zero iff the weights are uniform; ln L for
/// a point mass.
pub fn estimate_kl(sample_set: &WeightedSampleSet) -> f64 {
    kl_from_weights(&sample_set.weights)
}

pub fn kl_from_weights(weights: &[f64]) -> f64 {
    let l = weights.len() as f64;
    let total: f64 = weights.iter().sum();
    let mut kl = 0.0;
    for &w in weights {
        let wh = w / total;
        if wh > 0.0 {
            kl += wh * (l * wh).ln();
        }
    }
    kl.max(0.0)
}
