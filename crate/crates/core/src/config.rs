//! TOML experiment configuration. Every batch run is derivable from one
//! config file plus the master seed; `--print-defaults` dumps the full
//! schema with default values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::episode::EpisodeParams;
use crate::error::{GridNavError, Result};
use crate::geom::Vec2;
use crate::grid::{GoalRegion, OccupancyGrid};
use crate::policy::ScheduleParams;
use crate::predict::{InpaintParams, PredictorKind};
use crate::rrt::PlannerParams;
use crate::scenario::{generate_scenario, ScenarioSpec};
use crate::search::{RationalityParams, RewardParams};
use crate::sensing::SensorModel;
use crate::spline::SplineParams;

/// One environment to run on: either an inline generation spec or a grid
/// file on disk with an explicit start and goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ScenarioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_radius: Option<f64>,
}

impl ScenarioEntry {
    /// Materialize the grid, start, and goal. File paths are resolved
    /// relative to `base` (normally the config file's directory).
    pub fn realize(&self, base: &Path) -> Result<(OccupancyGrid, Vec2, GoalRegion)> {
        match (&self.spec, &self.path) {
            (Some(spec), None) => generate_scenario(spec),
            (None, Some(p)) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(p) };
                let grid = OccupancyGrid::load(&full)?;
                let start = self.start.ok_or_else(|| {
                    GridNavError::Config(format!("scenario '{}': file-based entry needs start", self.id))
                })?;
                let goal_c = self.goal.ok_or_else(|| {
                    GridNavError::Config(format!("scenario '{}': file-based entry needs goal", self.id))
                })?;
                let goal = GoalRegion { center: goal_c, radius: self.goal_radius.unwrap_or(0.3) };
                Ok((grid, start, goal))
            }
            (Some(_), Some(_)) => Err(GridNavError::Config(format!(
                "scenario '{}' sets both spec and path",
                self.id
            ))),
            (None, None) => Err(GridNavError::Config(format!(
                "scenario '{}' sets neither spec nor path",
                self.id
            ))),
        }
    }
}

fn default_trials() -> usize {
    1
}

fn default_predictors() -> Vec<String> {
    vec!["ci".into(), "cn".into(), "cg".into()]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_max_steps() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Predictor labels: "ci", "cn", "cg", "oracle".
    #[serde(default = "default_predictors")]
    pub predictors: Vec<String>,
    /// Initial-context reveal fractions for `sweep`, each in [0,1].
    #[serde(default)]
    pub reveal_fractions: Vec<f64>,
    /// Reveal a disc around the start instead of uniformly random cells.
    #[serde(default)]
    pub contiguous_reveal: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(default)]
    pub sensor: SensorModel,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default)]
    pub spline: SplineParams,
    #[serde(default)]
    pub schedule: ScheduleParams,
    #[serde(default)]
    pub rationality: RationalityParams,
    #[serde(default)]
    pub reward: RewardParams,
    #[serde(default)]
    pub inpaint: InpaintParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            trials: default_trials(),
            out_dir: default_out_dir(),
            predictors: default_predictors(),
            reveal_fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            contiguous_reveal: false,
            max_steps: default_max_steps(),
            scenarios: vec![ScenarioEntry {
                id: "default".into(),
                spec: Some(ScenarioSpec::default()),
                path: None,
                start: None,
                goal: None,
                goal_radius: None,
            }],
            sensor: SensorModel::default(),
            planner: PlannerParams::default(),
            spline: SplineParams::default(),
            schedule: ScheduleParams::default(),
            rationality: RationalityParams::default(),
            reward: RewardParams::default(),
            inpaint: InpaintParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| GridNavError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GridNavError::Config("trials must be >= 1".into()));
        }
        for f in &self.reveal_fractions {
            if !(0.0..=1.0).contains(f) {
                return Err(GridNavError::Config(format!("reveal fraction {f} outside [0,1]")));
            }
        }
        for p in &self.predictors {
            self.predictor_from_label(p)?;
        }
        let mut ids: Vec<&str> = self.scenarios.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.scenarios.len() {
            return Err(GridNavError::Config("duplicate scenario ids".into()));
        }
        Ok(())
    }

    pub fn predictor_from_label(&self, label: &str) -> Result<PredictorKind> {
        match label {
            "ci" => Ok(PredictorKind::ContextIgnorant),
            "cn" => Ok(PredictorKind::ContextNeutral),
            "cg" => Ok(PredictorKind::ContextGenerative(self.inpaint)),
            "oracle" => Ok(PredictorKind::Oracle),
            other => Err(GridNavError::Config(format!(
                "unknown predictor '{other}' (expected ci, cn, cg, or oracle)"
            ))),
        }
    }

    pub fn episode_params(&self) -> EpisodeParams {
        EpisodeParams {
            sensor: self.sensor,
            planner: self.planner,
            spline: self.spline,
            schedule: self.schedule,
            rationality: self.rationality,
            reward: self.reward,
            max_steps: self.max_steps,
        }
    }

    /// The default configuration rendered as annotated TOML.
    pub fn print_defaults() -> String {
        let mut s = String::from(
            "# Experiment configuration schema. Every field shown with its default.\n\
             # `scenarios` entries carry either an inline `spec` table or a grid-file\n\
             # `path` plus explicit `start`, `goal`, and `goal_radius`.\n\n",
        );
        s.push_str(&ExperimentConfig::default().to_toml());
        s
    }
}
