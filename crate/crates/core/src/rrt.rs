//! RRT* geometric planning on a predicted map, with a straight-to-goal
//! fallback when no feasible path is found within the iteration budget.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::grid::{CellState, GoalRegion};
use crate::predict::PredictedMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub max_iterations: usize,
    /// Extension step in meters.
    pub step_size: f64,
    /// Probability of sampling the goal center instead of a uniform point.
    pub goal_bias: f64,
    /// Neighbor radius for rewiring, meters.
    pub rewire_radius: f64,
    pub seed: u64,
    /// Obstacle inflation in meters, applied to the map before planning.
    pub obstacle_inflation: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            max_iterations: 2000,
            step_size: 0.2,
            goal_bias: 0.1,
            rewire_radius: 0.5,
            seed: 0,
            obstacle_inflation: 0.1,
        }
    }
}

/// Planner output. When `feasible` is false the suffix starting at
/// `infeasible_from` is the straight fallback segment to the goal center.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub points: Vec<Vec2>,
    pub feasible: bool,
    pub infeasible_from: Option<usize>,
}

impl PlannedPath {
    /// Polyline length in meters.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

struct Node {
    pos: Vec2,
    parent: usize,
    cost: f64,
}

/// Plan a collision-free path from `start` to the goal region on the
/// (inflated) predicted map. Deterministic given `params.seed`.
pub fn plan_geometric_path(
    map: &PredictedMap,
    start: Vec2,
    goal: &GoalRegion,
    params: &PlannerParams,
) -> PlannedPath {
    let inflation_cells =
        (params.obstacle_inflation / map.resolution() - 1e-9).ceil().max(0.0) as usize;
    let inflated = map.inflate(inflation_cells);
    // If inflation swallowed the start cell (robot hugging a wall), fall back
    // to the raw map so planning can begin at all.
    let plan_map = match inflated.cell_of(start) {
        Some((c, r)) if inflated.cell(c, r) == CellState::Free => inflated,
        _ => map.clone(),
    };

    if start.dist(goal.center) <= goal.radius {
        return PlannedPath { points: vec![start], feasible: true, infeasible_from: None };
    }

    // Cheap exit: direct segment.
    if plan_map.in_bounds(goal.center) && !plan_map.segment_collides(start, goal.center) {
        return PlannedPath {
            points: vec![start, goal.center],
            feasible: true,
            infeasible_from: None,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let world_w = plan_map.width() as f64 * plan_map.resolution();
    let world_h = plan_map.height() as f64 * plan_map.resolution();

    let mut nodes = vec![Node { pos: start, parent: 0, cost: 0.0 }];
    let mut best_goal: Option<(usize, f64)> = None;

    for _ in 0..params.max_iterations {
        let sample = if rng.gen::<f64>() < params.goal_bias {
            goal.center
        } else {
            Vec2::new(rng.gen::<f64>() * world_w, rng.gen::<f64>() * world_h)
        };

        // Nearest node.
        let (nearest_idx, nearest_dist) = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, n.pos.dist(sample)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if nearest_dist < 1e-9 {
            continue;
        }

        // Steer toward the sample by at most step_size.
        let dir = (sample - nodes[nearest_idx].pos) / nearest_dist;
        let new_pos = nodes[nearest_idx].pos + dir * nearest_dist.min(params.step_size);
        if !plan_map.in_bounds(new_pos) || plan_map.segment_collides(nodes[nearest_idx].pos, new_pos)
        {
            continue;
        }

        // Choose the lowest-cost parent among neighbors.
        let mut parent = nearest_idx;
        let mut cost = nodes[nearest_idx].cost + nodes[nearest_idx].pos.dist(new_pos);
        let neighbors: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.pos.dist(new_pos) <= params.rewire_radius)
            .map(|(i, _)| i)
            .collect();
        for &i in &neighbors {
            let c = nodes[i].cost + nodes[i].pos.dist(new_pos);
            if c < cost && !plan_map.segment_collides(nodes[i].pos, new_pos) {
                parent = i;
                cost = c;
            }
        }
        let new_idx = nodes.len();
        nodes.push(Node { pos: new_pos, parent, cost });

        // Rewire neighbors through the new node.
        for &i in &neighbors {
            let c = cost + new_pos.dist(nodes[i].pos);
            if c < nodes[i].cost && !plan_map.segment_collides(new_pos, nodes[i].pos) {
                nodes[i].parent = new_idx;
                nodes[i].cost = c;
            }
        }

        if goal.contains(new_pos) {
            match best_goal {
                Some((_, best_cost)) if best_cost <= cost => {}
                _ => best_goal = Some((new_idx, cost)),
            }
        }
    }

    match best_goal {
        Some((idx, _)) => {
            let mut points = extract(&nodes, idx);
            shortcut(&plan_map, &mut points);
            PlannedPath { points, feasible: true, infeasible_from: None }
        }
        None => {
            // Nearest node to the goal, then a straight segment to the center.
            let (idx, _) = nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (i, n.pos.dist(goal.center)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let mut points = extract(&nodes, idx);
            shortcut(&plan_map, &mut points);
            let split = points.len();
            points.push(goal.center);
            PlannedPath { points, feasible: false, infeasible_from: Some(split) }
        }
    }
}

fn extract(nodes: &[Node], mut idx: usize) -> Vec<Vec2> {
    let mut rev = vec![nodes[idx].pos];
    while idx != 0 {
        idx = nodes[idx].parent;
        rev.push(nodes[idx].pos);
    }
    rev.reverse();
    rev
}

/// Greedy waypoint pruning: drop intermediate points whose bypass segment is
/// collision-free. Deterministic.
fn shortcut(map: &PredictedMap, points: &mut Vec<Vec2>) {
    let mut out = Vec::with_capacity(points.len());
    let mut i = 0;
    out.push(points[0]);
    while i + 1 < points.len() {
        let mut j = points.len() - 1;
        while j > i + 1 {
            if !map.segment_collides(points[i], points[j]) {
                break;
            }
            j -= 1;
        }
        out.push(points[j]);
        i = j;
    }
    *points = out;
}
