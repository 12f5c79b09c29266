//! Batch experiment commands: map generation, episode batches, the
//! initial-context sweep, and CSV report emission. All outputs are atomic
//! (write-temp-then-rename) and derivable from config plus master seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::episode::{navigate_episode, EpisodeLog};
use crate::error::{GridNavError, Result};
use crate::geom::{label_hash, mix_seed, Vec2};
use crate::grid::{GoalRegion, OccupancyGrid};
use crate::metrics::{aggregate, navigation_efficiency, summary_csv};
use crate::scenario::ScenarioSpec;
use crate::sensing::{ContextCell, ContextMap};

/// Write `content` to `path` atomically: temp file in the same directory,
/// then rename. Creates parent directories.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub start: Vec2,
    pub goal: Vec2,
    pub goal_radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub maps: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| GridNavError::Config(e.to_string()))
    }
}

pub fn maps_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("maps")
}

pub fn logs_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("logs")
}

pub fn sweep_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("sweep")
}

/// Generate map files plus a manifest. Spec-based scenarios produce one map
/// variant per trial (varying the generation seed); file-based scenarios are
/// copied through once. Pure function of the config.
pub fn cmd_generate(cfg: &ExperimentConfig, base: &Path) -> Result<Manifest> {
    let dir = maps_dir(cfg);
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::default();
    for entry in &cfg.scenarios {
        match &entry.spec {
            Some(spec) => {
                for trial in 0..cfg.trials {
                    let variant = ScenarioSpec {
                        seed: mix_seed(&[
                            cfg.master_seed,
                            label_hash(&entry.id),
                            spec.seed,
                            trial as u64,
                        ]),
                        ..spec.clone()
                    };
                    let (grid, start, goal) = crate::scenario::generate_scenario(&variant)?;
                    let id = format!("{}-{}", entry.id, trial);
                    let file = format!("{id}.grid");
                    write_atomic(&dir.join(&file), &grid.to_text())?;
                    manifest.maps.push(ManifestEntry {
                        id,
                        file,
                        start,
                        goal: goal.center,
                        goal_radius: goal.radius,
                    });
                }
            }
            None => {
                let (grid, start, goal) = entry.realize(base)?;
                let file = format!("{}.grid", entry.id);
                write_atomic(&dir.join(&file), &grid.to_text())?;
                manifest.maps.push(ManifestEntry {
                    id: entry.id.clone(),
                    file,
                    start,
                    goal: goal.center,
                    goal_radius: goal.radius,
                });
            }
        }
    }
    let text = toml::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join("manifest.toml"), &text)?;
    Ok(manifest)
}

/// Outcome tally for a batch; `errors` are component failures, not episode
/// failures (a logged Timeout is a valid result).
#[derive(Debug, Default)]
pub struct BatchReport {
    pub written: usize,
    pub skipped: usize,
    pub errors: Vec<String>,
}

struct Task {
    map: ManifestEntry,
    predictor: String,
    fraction: Option<f64>,
    out_path: PathBuf,
    seed: u64,
}

fn run_tasks(cfg: &ExperimentConfig, tasks: Vec<Task>, jobs: usize) -> Result<BatchReport> {
    use rayon::prelude::*;

    let dir = maps_dir(cfg);
    let mut grids: BTreeMap<String, OccupancyGrid> = BTreeMap::new();
    for t in &tasks {
        if !grids.contains_key(&t.map.file) {
            grids.insert(t.map.file.clone(), OccupancyGrid::load(&dir.join(&t.map.file))?);
        }
    }

    let params = cfg.episode_params();
    let run_one = |t: &Task| -> std::result::Result<bool, String> {
        if t.out_path.exists() {
            return Ok(false);
        }
        let grid = &grids[&t.map.file];
        let goal = GoalRegion { center: t.map.goal, radius: t.map.goal_radius };
        let kind = cfg
            .predictor_from_label(&t.predictor)
            .map_err(|e| format!("{}: {e}", t.out_path.display()))?;
        let initial = match t.fraction {
            Some(f) => Some(reveal_context(
                grid,
                f,
                mix_seed(&[t.seed, 0x5eed]),
                cfg.contiguous_reveal.then_some(t.map.start),
            )),
            None => None,
        };
        let scenario_id = match t.fraction {
            Some(f) => format!("{}:f{:.2}", t.map.id, f),
            None => t.map.id.clone(),
        };
        let log = navigate_episode(
            grid,
            t.map.start,
            &goal,
            &kind,
            &params,
            t.seed,
            &scenario_id,
            initial,
        )
        .map_err(|e| format!("{}: {e}", t.out_path.display()))?;
        log.save(&t.out_path).map_err(|e| format!("{}: {e}", t.out_path.display()))?;
        Ok(true)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GridNavError::Config(e.to_string()))?;
    let results: Vec<std::result::Result<bool, String>> =
        pool.install(|| tasks.par_iter().map(run_one).collect());

    let mut report = BatchReport::default();
    for r in results {
        match r {
            Ok(true) => report.written += 1,
            Ok(false) => report.skipped += 1,
            Err(e) => report.errors.push(e),
        }
    }
    Ok(report)
}

/// Run one episode per (map, predictor, trial). Idempotent: existing log
/// files are skipped. `jobs = 0` means rayon's default parallelism.
pub fn cmd_run(cfg: &ExperimentConfig, jobs: usize) -> Result<BatchReport> {
    let manifest = Manifest::load(&maps_dir(cfg).join("manifest.toml"))?;
    let dir = logs_dir(cfg);
    fs::create_dir_all(&dir)?;
    let mut tasks = Vec::new();
    for map in &manifest.maps {
        for predictor in &cfg.predictors {
            for trial in 0..cfg.trials {
                tasks.push(Task {
                    map: map.clone(),
                    predictor: predictor.clone(),
                    fraction: None,
                    out_path: dir.join(format!("{}_{}_{}.csv", map.id, predictor, trial)),
                    seed: mix_seed(&[
                        cfg.master_seed,
                        label_hash(&map.id),
                        label_hash(predictor),
                        trial as u64,
                    ]),
                });
            }
        }
    }
    run_tasks(cfg, tasks, jobs)
}

/// Run episodes across `reveal_fractions`, pre-seeding the initial context
/// with a deterministic fraction of revealed cells.
pub fn cmd_sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<BatchReport> {
    if cfg.reveal_fractions.is_empty() {
        return Err(GridNavError::Config("sweep requires non-empty reveal_fractions".into()));
    }
    let manifest = Manifest::load(&maps_dir(cfg).join("manifest.toml"))?;
    let dir = sweep_dir(cfg);
    fs::create_dir_all(&dir)?;
    let mut tasks = Vec::new();
    for map in &manifest.maps {
        for predictor in &cfg.predictors {
            for &f in &cfg.reveal_fractions {
                for trial in 0..cfg.trials {
                    tasks.push(Task {
                        map: map.clone(),
                        predictor: predictor.clone(),
                        fraction: Some(f),
                        out_path: dir.join(format!(
                            "{}_{}_f{:03}_{}.csv",
                            map.id,
                            predictor,
                            (f * 100.0).round() as u32,
                            trial
                        )),
                        seed: mix_seed(&[
                            cfg.master_seed,
                            label_hash(&map.id),
                            label_hash(predictor),
                            (f * 100.0).round() as u64,
                            trial as u64,
                        ]),
                    });
                }
            }
        }
    }
    run_tasks(cfg, tasks, jobs)
}

/// Build an initial context with exactly ⌊fraction·cells⌋ cells revealed
/// from ground truth. `around`: Some(start) reveals the cells nearest to the
/// start (contiguous disc); None reveals a seeded uniform-random subset.
pub fn reveal_context(
    grid: &OccupancyGrid,
    fraction: f64,
    seed: u64,
    around: Option<Vec2>,
) -> ContextMap {
    use rand::seq::SliceRandom;
    use rand_chacha::rand_core::SeedableRng;

    let total = grid.width() * grid.height();
    let count = (fraction * total as f64).floor() as usize;
    let mut context = ContextMap::matching(grid);
    let mut indices: Vec<usize> = (0..total).collect();
    match around {
        Some(center) => {
            let key = |&i: &usize| {
                let (c, r) = (i % grid.width(), i / grid.width());
                let p = grid.center_of(c, r);
                p.dist(center)
            };
            indices.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        }
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            indices.shuffle(&mut rng);
        }
    }
    for &i in indices.iter().take(count) {
        let (c, r) = (i % grid.width(), i / grid.width());
        context.set_cell(c, r, ContextCell::Known(grid.cell(c, r)));
    }
    context
}

/// Read every episode log under `log_dir` in sorted filename order.
pub fn load_logs(log_dir: &Path) -> Result<Vec<EpisodeLog>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(log_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(GridNavError::Config(format!("no logs in {}", log_dir.display())));
    }
    paths.iter().map(|p| EpisodeLog::load(p)).collect()
}

/// Emit the five report tables from a directory of episode logs.
pub fn cmd_report(log_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut logs = load_logs(log_dir)?;
    logs.sort_by(|a, b| {
        (&a.scenario_id, &a.predictor, a.seed).cmp(&(&b.scenario_id, &b.predictor, b.seed))
    });
    fs::create_dir_all(out_dir)?;

    let series = |value: &dyn Fn(&EpisodeLog, usize) -> f64| -> String {
        let mut s = String::from("scenario_id,predictor,seed,t,value\n");
        for log in &logs {
            for (i, rec) in log.steps.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    log.scenario_id,
                    log.predictor,
                    log.seed,
                    rec.t,
                    value(log, i)
                ));
            }
        }
        s
    };

    let tables: Vec<(&str, String)> = vec![
        ("dist_to_goal_vs_time.csv", series(&|l, i| l.steps[i].dist_to_goal)),
        ("explored_area_vs_time.csv", series(&|l, i| l.steps[i].explored_m2)),
        ("m_acc_vs_time.csv", series(&|l, i| l.steps[i].m_acc)),
        ("n_eff_vs_time.csv", series(&|l, i| navigation_efficiency(l)[i])),
        ("path_length_per_map.csv", summary_csv(&aggregate(&logs))),
    ];

    let mut written = Vec::new();
    for (name, content) in tables {
        let path = out_dir.join(name);
        write_atomic(&path, &content)?;
        written.push(path);
    }
    Ok(written)
}
