//! Acceptance suite. Each test checks one numbered criterion and prints a
//! single `criterion N: PASS/FAIL` line (visible with `--nocapture`, and on
//! failure in the captured output).

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gridnav::config::{ExperimentConfig, ScenarioEntry};
use gridnav::episode::{navigate_episode, EpisodeParams, FailureReason, Outcome};
use gridnav::geom::{mix_seed, Vec2};
use gridnav::grid::{CellState, GoalRegion, OccupancyGrid};
use gridnav::metrics::{accuracy_series, has_backtracking, path_length};
use gridnav::policy::{build_default_policy, CovarianceSchedule};
use gridnav::predict::{map_accuracy, predict, PredictorKind, Provenance};
use gridnav::rrt::PlannerParams;
use gridnav::runner::{cmd_generate, cmd_report, cmd_run, logs_dir, reveal_context};
use gridnav::scenario::ScenarioSpec;
use gridnav::search::{
    estimate_kl, kl_from_weights, rollout, select_action, ActionCommand, RationalityParams,
    RewardParams, RobotState, WeightedSampleSet,
};
use gridnav::sensing::{sense, ContextCell, ContextMap, Observation, SensorModel};

fn check(number: u32, name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {number} ({name}): PASS"),
        Err(msg) => {
            println!("criterion {number} ({name}): FAIL — {msg}");
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/utrap.grid")
}

fn trap_scenario() -> (OccupancyGrid, Vec2, GoalRegion) {
    let grid = OccupancyGrid::load(&fixture_path()).expect("committed fixture");
    let start = Vec2::new(1.0, 5.0);
    let goal = GoalRegion { center: Vec2::new(9.0, 5.0), radius: 0.3 };
    (grid, start, goal)
}

/// Shared episode parameters for the trap experiments (criteria 5-8).
fn trap_params() -> EpisodeParams {
    EpisodeParams {
        planner: PlannerParams {
            max_iterations: 800,
            obstacle_inflation: 0.15,
            ..PlannerParams::default()
        },
        reward: RewardParams {
            w_unreliable: 20.0,
            collision_radius: 0.15,
            ..RewardParams::default()
        },
        max_steps: 500,
        ..EpisodeParams::default()
    }
}

fn trap_seed(trial: u64) -> u64 {
    mix_seed(&[42, trial])
}

/// A predicted map built from ground-truth rows; cells listed in `imagined`
/// are marked imagined (values still taken from the truth).
fn predicted_from(
    rows: &[&str],
    res: f64,
    imagined: &[(usize, usize)],
) -> gridnav::predict::PredictedMap {
    let h = rows.len();
    let w = rows[0].len();
    let mut grid = OccupancyGrid::new_free(w, h, res);
    for (i, row) in rows.iter().enumerate() {
        for (c, ch) in row.chars().enumerate() {
            if ch == '#' {
                grid.set_cell(c, h - 1 - i, CellState::Occupied);
            }
        }
    }
    let mut ctx = ContextMap::matching(&grid);
    for r in 0..h {
        for c in 0..w {
            if !imagined.contains(&(c, r)) {
                ctx.set_cell(c, r, ContextCell::Known(grid.cell(c, r)));
            }
        }
    }
    let obs = Observation { timestamp: 0, cells: vec![] };
    predict(&PredictorKind::Oracle, &ctx, &obs, Some(&grid)).unwrap()
}

#[test]
fn c01_weight_reduction_limits() {
    check(1, "importance-weight reduction", || {
        let t0 = Instant::now();
        let map = predicted_from(
            &["........", "...#....", "........", "........", "........"],
            0.5,
            &[],
        );
        let goal = GoalRegion { center: Vec2::new(3.5, 1.25), radius: 0.2 };
        let state = RobotState { position: Vec2::new(0.5, 1.25), time: 0 };
        let schedule = CovarianceSchedule::linear(0.05, 0.2, 6);
        let q = build_default_policy(
            &[state.position, goal.center],
            None,
            6,
            0.5,
            1.0,
            schedule,
            10.0,
        )
        .map_err(|e| e.to_string())?;
        let rp = RewardParams::default();

        // beta = 0: the selected action must be the unweighted sample mean.
        let rat = RationalityParams { beta: 0.0, sample_count: 100, horizon: 6, dt: 0.5 };
        let (selected, set) = select_action(&state, &goal, &q, &map, &rp, &rat, 7);
        for step in 0..selected.len() {
            let mut mean = Vec2::default();
            for a in &set.actions {
                mean += a[step].velocity;
            }
            mean = mean / set.actions.len() as f64;
            let d = (selected[step].velocity - mean).norm();
            let scale = mean.norm().max(1.0);
            ensure!(
                d <= 1e-12 * scale,
                "beta=0 mean mismatch at step {step}: |diff| = {d:e}"
            );
        }

        // beta = 1e6: the selected action must be the argmax-J sample.
        let rat = RationalityParams { beta: 1e6, ..rat };
        let (selected, set) = select_action(&state, &goal, &q, &map, &rp, &rat, 7);
        let mut sorted = set.rewards.clone();
        sorted.sort_by(f64::total_cmp);
        ensure!(
            sorted.windows(2).all(|w| w[0] < w[1]),
            "fixture rewards are not distinct"
        );
        let best = set
            .rewards
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        for step in 0..selected.len() {
            let d = (selected[step].velocity - set.actions[best][step].velocity).norm();
            ensure!(d <= 1e-9, "beta=1e6 argmax mismatch at step {step}: |diff| = {d:e}");
        }

        let elapsed = t0.elapsed().as_secs_f64();
        ensure!(elapsed < 1.0, "runtime {elapsed:.2}s exceeds 1s");
        Ok(())
    });
}

#[test]
fn c02_density_normalization() {
    check(2, "trajectory density normalization", || {
        let t0 = Instant::now();
        let path = [Vec2::new(1.0, 1.0), Vec2::new(1.4, 1.0)];
        let schedule = CovarianceSchedule::linear(0.3, 0.3, 2);
        let q = build_default_policy(&path, None, 2, 0.5, 1.0, schedule, f64::INFINITY)
            .map_err(|e| e.to_string())?;

        let at_mean = q.density(&q.mean.waypoints).map_err(|e| e.to_string())?;
        ensure!(
            at_mean == 1.0 / q.normalization,
            "density at mean {at_mean} != 1/N {}",
            1.0 / q.normalization
        );

        // Monte-Carlo integral over the single free waypoint (2 dimensions):
        // uniform proposal over mean +/- 6 sigma.
        let sigma = q.covariance.sigmas[0];
        let half = 6.0 * sigma;
        let area = (2.0 * half) * (2.0 * half);
        let center = q.mean.waypoints[1];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let p = center
                + Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
            sum += q.density(&[q.mean.waypoints[0], p]).map_err(|e| e.to_string())?;
        }
        let integral = area * sum / n as f64;
        ensure!(
            (integral - 1.0).abs() <= 0.05,
            "MC integral {integral:.4} outside 1 +/- 0.05"
        );
        let elapsed = t0.elapsed().as_secs_f64();
        ensure!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
        Ok(())
    });
}

#[test]
fn c03_rollout_matches_brute_force() {
    check(3, "rollout oracle equivalence", || {
        // Independent enumerator: full-grid nearest-occupied scan and
        // explicit reward accumulation, sharing only the public primitives.
        fn brute_force_j(
            start: Vec2,
            actions: &[(f64, f64)],
            goal: &GoalRegion,
            map: &gridnav::predict::PredictedMap,
            rp: &RewardParams,
            dt: f64,
        ) -> f64 {
            let mut pos = start;
            let mut total = 0.0;
            for &(vx, vy) in actions {
                let mut v = Vec2::new(vx, vy);
                let n = v.norm();
                if n > 1.0 {
                    v = v * (1.0 / n);
                }
                let next = pos + v * dt;
                let mut r = -rp.w_goal * next.dist(goal.center);
                let mut collided = map.segment_collides(pos, next);
                let mut nearest: Option<(f64, Provenance)> = None;
                for row in 0..map.height() {
                    for col in 0..map.width() {
                        if map.cell(col, row) == CellState::Occupied {
                            let d = map.center_of(col, row).dist(next);
                            let d =
                                if map.cell_of(next) == Some((col, row)) { 0.0 } else { d };
                            if d <= rp.collision_radius {
                                match nearest {
                                    Some((bd, _)) if bd <= d => {}
                                    _ => nearest = Some((d, map.provenance(col, row))),
                                }
                            }
                        }
                    }
                }
                if nearest.is_some() {
                    collided = true;
                }
                if collided {
                    r -= rp.w_collision;
                }
                if let Some((_, Provenance::ImaginedCell)) = nearest {
                    r -= rp.w_unreliable;
                }
                total += r;
                pos = next;
            }
            total
        }

        let fixtures: Vec<(Vec<&str>, Vec<(usize, usize)>)> = vec![
            (vec!["....", ".#..", "....", "...."], vec![]),
            (vec![".....", ".###.", ".....", ".....", "....."], vec![(2, 3)]),
            (vec!["..#..", ".....", "#....", ".....", "....#"], vec![(2, 4), (0, 2)]),
            (
                vec!["......." , ".##....", ".......", "....#..", ".......", ".......", "......."],
                vec![(4, 3)],
            ),
        ];
        // Horizons up to 4 actions.
        let action_sets: Vec<Vec<(f64, f64)>> = vec![
            vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.3, -0.4)],
            vec![(0.5, 0.5), (-1.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (0.9, -0.3)],
            vec![(2.0, 0.0), (0.0, -2.0), (1.0, 0.0), (-0.5, 0.5)],
        ];
        let rp = RewardParams { collision_radius: 0.6, ..RewardParams::default() };
        let dt = 0.5;
        for (rows, imagined) in &fixtures {
            let map = predicted_from(rows, 1.0, imagined);
            let goal = GoalRegion {
                center: Vec2::new(map.width() as f64 - 0.5, map.height() as f64 - 0.5),
                radius: 0.2,
            };
            let start = RobotState { position: Vec2::new(0.5, 0.5), time: 0 };
            for actions in &action_sets {
                let cmds: Vec<ActionCommand> = actions
                    .iter()
                    .map(|&(x, y)| ActionCommand { velocity: Vec2::new(x, y) })
                    .collect();
                let got = rollout(&start, &cmds, &goal, &map, &rp, dt);
                let expected = brute_force_j(start.position, actions, &goal, &map, &rp, dt);
                ensure!(
                    got == expected,
                    "rollout {got} != brute force {expected} on {rows:?} / {actions:?}"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn c04_map_accuracy_formula() {
    check(4, "map accuracy formula", || {
        // Predictions from grid A scored against truth B give exact control
        // over the confusion counts.
        let truth_rows = ["##..", "..#.", "....", "#..."];
        let pred_rows_list: [(&[&str], f64); 4] = [
            // identical: accuracy 1.0
            (&["##..", "..#.", "....", "#..."], 1.0),
            // inverted: accuracy 0.0
            (&["..##", "##.#", "####", ".###"], 0.0),
            // one false positive: 15/16
            (&["##..", "..#.", "...#", "#..."], 15.0 / 16.0),
            // two false negatives: 14/16
            (&["#...", "..#.", "....", "...."], 14.0 / 16.0),
        ];
        let mut truth = OccupancyGrid::new_free(4, 4, 1.0);
        for (i, row) in truth_rows.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                if ch == '#' {
                    truth.set_cell(c, 4 - 1 - i, CellState::Occupied);
                }
            }
        }
        for (rows, expected) in pred_rows_list {
            let predicted = predicted_from(rows, 1.0, &[]);
            let acc = map_accuracy(&predicted, &truth).map_err(|e| e.to_string())?;
            ensure!(acc == expected, "accuracy {acc} != expected {expected} for {rows:?}");
        }
        Ok(())
    });
}

#[test]
fn c05_utrap_predictor_ordering() {
    check(5, "U-trap predictor ordering", || {
        let t0 = Instant::now();
        let (grid, start, goal) = trap_scenario();
        let params = trap_params();
        let sp = grid
            .shortest_path_oracle(start, &goal)
            .map_err(|e| e.to_string())?
            .ok_or("trap fixture is not solvable")?;

        let run = |kind: &PredictorKind, trial: u64| {
            navigate_episode(&grid, start, &goal, kind, &params, trap_seed(trial), "utrap", None)
        };

        let mut ci_timeouts = 0;
        let mut cn_nonmonotone = 0;
        let mut cg_successes = 0;
        let mut cg_lengths = Vec::new();
        for trial in 0..10 {
            let ci = run(&PredictorKind::ContextIgnorant, trial).map_err(|e| e.to_string())?;
            if ci.outcome == Outcome::Failure(FailureReason::Timeout) {
                ci_timeouts += 1;
            }
            let cn = run(&PredictorKind::ContextNeutral, trial).map_err(|e| e.to_string())?;
            if has_backtracking(&cn, 0.1) {
                cn_nonmonotone += 1;
            }
            let cg = run(
                &PredictorKind::ContextGenerative(gridnav::predict::InpaintParams::default()),
                trial,
            )
            .map_err(|e| e.to_string())?;
            if cg.outcome == Outcome::Success {
                cg_successes += 1;
                cg_lengths.push(path_length(&cg));
            }
        }
        eprintln!(
            "  [c5] ci_timeouts={ci_timeouts}/10 cn_nonmonotone={cn_nonmonotone}/10 \
             cg_successes={cg_successes}/10 cg_lengths={cg_lengths:.2?} oracle_sp={sp:.3}"
        );
        ensure!(ci_timeouts >= 8, "CI timeouts {ci_timeouts}/10 < 8");
        ensure!(cn_nonmonotone >= 5, "CN non-monotone trials {cn_nonmonotone}/10 < 5");
        ensure!(cg_successes >= 8, "CG successes {cg_successes}/10 < 8");
        let cg_mean: f64 = cg_lengths.iter().sum::<f64>() / cg_lengths.len() as f64;
        ensure!(
            cg_mean <= 1.5 * sp,
            "CG mean path {cg_mean:.2} > 1.5 x oracle {:.2}",
            1.5 * sp
        );
        let elapsed = t0.elapsed().as_secs_f64();
        ensure!(elapsed < 600.0, "runtime {elapsed:.0}s exceeds 600s");
        Ok(())
    });
}

#[test]
fn c06_oracle_predictor_bound() {
    check(6, "oracle predictor bound", || {
        let (grid, start, goal) = trap_scenario();
        let params = trap_params();
        let sp = grid
            .shortest_path_oracle(start, &goal)
            .map_err(|e| e.to_string())?
            .ok_or("trap fixture is not solvable")?;
        let mut lengths = Vec::new();
        for trial in 0..10 {
            let log = navigate_episode(
                &grid,
                start,
                &goal,
                &PredictorKind::Oracle,
                &params,
                trap_seed(trial),
                "utrap",
                None,
            )
            .map_err(|e| e.to_string())?;
            ensure!(
                log.outcome == Outcome::Success,
                "oracle trial {trial} ended with {:?}",
                log.outcome
            );
            lengths.push(path_length(&log));
        }
        let mean: f64 = lengths.iter().sum::<f64>() / lengths.len() as f64;
        ensure!(mean <= 1.2 * sp, "oracle mean path {mean:.2} > 1.2 x oracle {:.2}", 1.2 * sp);
        Ok(())
    });
}

#[test]
fn c07_context_sweep() {
    check(7, "initial-context sweep", || {
        let t0 = Instant::now();
        let (grid, start, goal) = trap_scenario();
        let params = trap_params();
        let kind = PredictorKind::ContextGenerative(gridnav::predict::InpaintParams::default());
        let fractions = [0.0, 0.2, 0.4, 0.6, 0.8];
        let mut means = Vec::new();
        for &f in &fractions {
            let mut lengths = Vec::new();
            for trial in 0..5u64 {
                let seed = mix_seed(&[9, (f * 100.0) as u64, trial]);
                let initial = reveal_context(&grid, f, mix_seed(&[seed, 1]), None);
                let log = navigate_episode(
                    &grid,
                    start,
                    &goal,
                    &kind,
                    &params,
                    seed,
                    "utrap",
                    Some(initial),
                )
                .map_err(|e| e.to_string())?;
                lengths.push(path_length(&log));
            }
            means.push(lengths.iter().sum::<f64>() / lengths.len() as f64);
        }
        eprintln!("  [c7] mean path length per fraction {fractions:?}: {means:.3?}");
        for w in means.windows(2) {
            ensure!(
                w[1] <= w[0] * 1.05,
                "mean path increased beyond 5% tolerance: {:?}",
                means
            );
        }
        ensure!(
            means[4] <= 0.9 * means[0],
            "f=0.8 ({:.2}) does not beat f=0 ({:.2}) by 10%",
            means[4],
            means[0]
        );
        let elapsed = t0.elapsed().as_secs_f64();
        ensure!(elapsed < 900.0, "runtime {elapsed:.0}s exceeds 900s");
        Ok(())
    });
}

#[test]
fn c08_accuracy_grows_with_context() {
    check(8, "accuracy grows with context", || {
        let (grid, start, goal) = trap_scenario();
        let params = trap_params();
        let log = navigate_episode(
            &grid,
            start,
            &goal,
            &PredictorKind::ContextNeutral,
            &params,
            trap_seed(0),
            "utrap",
            None,
        )
        .map_err(|e| e.to_string())?;
        let kind = PredictorKind::ContextGenerative(gridnav::predict::InpaintParams::default());
        let series =
            accuracy_series(&log, &grid, &params.sensor, &kind).map_err(|e| e.to_string())?;
        ensure!(series.len() >= 2, "episode too short: {} steps", series.len());
        let first = series[0];
        let last = *series.last().unwrap();
        ensure!(
            last > first,
            "final accuracy {last:.4} not greater than step-1 accuracy {first:.4}"
        );
        Ok(())
    });
}

#[test]
fn c09_pipeline_determinism() {
    check(9, "pipeline determinism", || {
        let make_cfg = |out: &Path| ExperimentConfig {
            master_seed: 5,
            trials: 2,
            out_dir: out.to_path_buf(),
            predictors: vec!["cn".into(), "ci".into()],
            scenarios: vec![ScenarioEntry {
                id: "blocks".into(),
                spec: Some(ScenarioSpec {
                    seed: 3,
                    size: (60, 60),
                    goal: Vec2::new(4.0, 4.0),
                    obstacle_motifs: vec![gridnav::scenario::ObstacleMotif::RandomBlocks {
                        count: 4,
                        size_range: (2, 6),
                    }],
                    ..ScenarioSpec::default()
                }),
                path: None,
                start: None,
                goal: None,
                goal_radius: None,
            }],
            rationality: RationalityParams { sample_count: 30, ..RationalityParams::default() },
            planner: PlannerParams { max_iterations: 300, ..PlannerParams::default() },
            max_steps: 120,
            ..ExperimentConfig::default()
        };

        let pipeline = |dir: &Path, jobs: usize| -> Result<Vec<(String, String)>, String> {
            let cfg = make_cfg(dir);
            cmd_generate(&cfg, dir).map_err(|e| e.to_string())?;
            let report = cmd_run(&cfg, jobs).map_err(|e| e.to_string())?;
            if !report.errors.is_empty() {
                return Err(format!("run errors: {:?}", report.errors));
            }
            let out = dir.join("report");
            let files = cmd_report(&logs_dir(&cfg), &out).map_err(|e| e.to_string())?;
            files
                .iter()
                .map(|p| {
                    Ok((
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read_to_string(p).map_err(|e| e.to_string())?,
                    ))
                })
                .collect()
        };

        let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d3 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let a = pipeline(d1.path(), 1)?;
        let b = pipeline(d2.path(), 1)?;
        let c = pipeline(d3.path(), 8)?;
        ensure!(a == b, "rerun with jobs=1 produced different CSVs");
        ensure!(a == c, "jobs=8 produced different CSVs than jobs=1");
        ensure!(a.len() == 5, "expected 5 report tables, got {}", a.len());
        Ok(())
    });
}

#[test]
fn c10_sensing_soundness() {
    check(10, "sensing soundness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let sensor = SensorModel { range: 0.6, ray_count: 90 };
        for case in 0..1000 {
            let mut grid = OccupancyGrid::new_free(15, 15, 0.1);
            for r in 0..15 {
                for c in 0..15 {
                    if rng.gen::<f64>() < 0.2 {
                        grid.set_cell(c, r, CellState::Occupied);
                    }
                }
            }
            // Random free cell with intra-cell jitter.
            let pos = loop {
                let c = rng.gen_range(0..15);
                let r = rng.gen_range(0..15);
                if grid.cell(c, r) == CellState::Free {
                    let jitter =
                        Vec2::new(rng.gen_range(-0.04..0.04), rng.gen_range(-0.04..0.04));
                    break grid.center_of(c, r) + jitter;
                }
            };
            let obs = sense(&grid, pos, &sensor).map_err(|e| e.to_string())?;
            // Any reported cell must have some point of the cell (interior,
            // edge, or corner — rays may graze a corner) reachable by a
            // straight sight line that crosses no occupied cell on the way.
            let line_clear_to = |c: usize, r: usize, target: Vec2| -> bool {
                let n = (target.dist(pos) / 0.005).ceil() as usize + 1;
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    let p = pos + (target - pos) * t;
                    if let Some((pc, pr)) = grid.cell_of(p) {
                        if (pc, pr) == (c, r) {
                            return true;
                        }
                        // The final sample sits on the target cell's
                        // boundary; whichever neighbor it maps to is not an
                        // occluder.
                        if i < n && grid.cell(pc, pr) == CellState::Occupied {
                            return false;
                        }
                    }
                }
                true
            };
            // Sample lattice spans the whole cell, densest check wins early
            // by trying the center first.
            let mut offsets: Vec<(i32, i32)> =
                (-4..=4i32).flat_map(|dx| (-4..=4i32).map(move |dy| (dx, dy))).collect();
            offsets.sort_by_key(|&(dx, dy)| dx * dx + dy * dy);
            for &((c, r), state) in &obs.cells {
                ensure!(
                    state == grid.cell(c, r),
                    "case {case}: reported state mismatch at ({c},{r})"
                );
                let center = grid.center_of(c, r);
                let visible = offsets.iter().any(|&(dx, dy)| {
                    let target = center
                        + Vec2::new(dx as f64, dy as f64) * (0.9999 * 0.1 / 8.0);
                    line_clear_to(c, r, target)
                });
                ensure!(visible, "case {case}: occluded cell ({c},{r}) reported");
            }
        }

        // Explored area is non-decreasing in episode logs.
        let spec = ScenarioSpec {
            seed: 2,
            goal: Vec2::new(8.0, 8.0),
            obstacle_motifs: vec![gridnav::scenario::ObstacleMotif::RandomBlocks {
                count: 4,
                size_range: (3, 7),
            }],
            ..ScenarioSpec::default()
        };
        let (grid, start, goal) =
            gridnav::scenario::generate_scenario(&spec).map_err(|e| e.to_string())?;
        let params = EpisodeParams {
            rationality: RationalityParams { sample_count: 30, ..RationalityParams::default() },
            planner: PlannerParams { max_iterations: 300, ..PlannerParams::default() },
            max_steps: 100,
            ..EpisodeParams::default()
        };
        for kind in [PredictorKind::ContextIgnorant, PredictorKind::ContextNeutral] {
            let log = navigate_episode(&grid, start, &goal, &kind, &params, 4, "mono", None)
                .map_err(|e| e.to_string())?;
            for w in log.steps.windows(2) {
                ensure!(
                    w[1].explored_m2 >= w[0].explored_m2,
                    "explored area decreased at t={}",
                    w[1].t
                );
            }
        }
        Ok(())
    });
}

#[test]
fn c11_kl_diagnostic() {
    check(11, "KL diagnostic", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..1000 {
            let l = rng.gen_range(2..64);
            let weights: Vec<f64> = (0..l).map(|_| rng.gen_range(1e-9..1.0f64)).collect();
            let set = WeightedSampleSet {
                trajectories: vec![],
                actions: vec![],
                rewards: vec![0.0; l],
                weights,
            };
            let kl = estimate_kl(&set);
            ensure!(kl >= 0.0, "case {case}: negative KL {kl}");
            ensure!(kl.is_finite(), "case {case}: non-finite KL {kl}");
        }
        ensure!(kl_from_weights(&[0.25; 4]) == 0.0, "uniform weights give nonzero KL");
        for l in [2usize, 10, 100] {
            let mut w = vec![0.0; l];
            w[l / 2] = 1.0;
            let kl = kl_from_weights(&w);
            let expected = (l as f64).ln();
            ensure!(
                (kl - expected).abs() <= 1e-6,
                "one-hot KL {kl} != ln {l} = {expected}"
            );
        }
        Ok(())
    });
}
