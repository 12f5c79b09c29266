//! The Gaussian trajectory default policy: mean path truncation to the
//! horizon, a growing diagonal covariance schedule, density evaluation, and
//! neighborhood-restricted sampling of the finite choice set.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::Vec2;
use crate::spline::point_at_arc_length;

/// Per-waypoint standard deviations, low near the current state and growing
/// toward the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSchedule {
    /// sigma_k for the free waypoints k = 1..H-1, meters; non-decreasing.
    pub sigmas: Vec<f64>,
}

impl CovarianceSchedule {
    /// Linear ramp from sigma_0 to sigma_h over H-1 free waypoints.
    pub fn linear(sigma_0: f64, sigma_h: f64, horizon: usize) -> Self {
        assert!(sigma_0 > 0.0 && sigma_h >= sigma_0 && horizon >= 2);
        let n = horizon - 1;
        let sigmas = (1..=n)
            .map(|k| {
                if n == 1 {
                    sigma_h
                } else {
                    sigma_0 + (sigma_h - sigma_0) * (k - 1) as f64 / (n - 1) as f64
                }
            })
            .collect();
        CovarianceSchedule { sigmas }
    }

    pub fn free_waypoints(&self) -> usize {
        self.sigmas.len()
    }

    /// log det of the full diagonal covariance over 2(H-1) coordinates.
    pub fn log_det(&self) -> f64 {
        self.sigmas.iter().map(|s| 4.0 * s.ln()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub sigma_0: f64,
    pub sigma_h: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams { sigma_0: 0.02, sigma_h: 0.3 }
    }
}

/// Mean waypoint path, exactly H points; waypoint 0 is the current position.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub waypoints: Vec<Vec2>,
    /// False on fallback segments the planner could not verify.
    pub feasible: Vec<bool>,
}

/// The default policy Q_t of one control step: a Gaussian over waypoint
/// perturbations around the planned mean path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDistribution {
    pub mean: MeanTrajectory,
    pub covariance: CovarianceSchedule,
    /// Normalization constant: density at the mean is 1/N.
    pub normalization: f64,
    /// Mahalanobis neighborhood radius for the sampled choice set.
    pub epsilon: f64,
    pub v_max: f64,
    pub dt: f64,
}

impl TrajectoryDistribution {
    pub fn horizon(&self) -> usize {
        self.mean.waypoints.len()
    }

    /// Gaussian density of a waypoint sequence over the 2(H-1) free
    /// coordinates.
    pub fn density(&self, trajectory: &[Vec2]) -> Result<f64> {
        if trajectory.len() != self.horizon() {
            return Err(GridNavError::TrajectoryLength {
                got: trajectory.len(),
                expected: self.horizon(),
            });
        }
        let m2 = self.mahalanobis_sq(trajectory);
        Ok((-0.5 * m2).exp() / self.normalization)
    }

    /// Squared Mahalanobis distance of the free waypoints from the mean.
    pub fn mahalanobis_sq(&self, trajectory: &[Vec2]) -> f64 {
        let mut m2 = 0.0;
        for (k, sigma) in self.covariance.sigmas.iter().enumerate() {
            let d = trajectory[k + 1] - self.mean.waypoints[k + 1];
            m2 += (d.x * d.x + d.y * d.y) / (sigma * sigma);
        }
        m2
    }
}

/// Truncate/pad a planned path to the horizon and wrap it in the Gaussian
/// default policy. Waypoints are the path resampled at arc-length v_max*dt.
pub fn build_default_policy(
    path: &[Vec2],
    feasible_prefix_len: Option<f64>,
    horizon: usize,
    dt: f64,
    v_max: f64,
    schedule: CovarianceSchedule,
    epsilon: f64,
) -> Result<TrajectoryDistribution> {
    if horizon < 2 {
        return Err(GridNavError::HorizonTooShort(horizon));
    }
    assert_eq!(schedule.free_waypoints(), horizon - 1, "schedule/horizon mismatch");
    assert!(!path.is_empty());

    let step = v_max * dt;
    let total: f64 = path.windows(2).map(|w| w[0].dist(w[1])).sum();
    let mut waypoints = Vec::with_capacity(horizon);
    let mut feasible = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let s = (k as f64 * step).min(total);
        waypoints.push(point_at_arc_length(path, s));
        feasible.push(match feasible_prefix_len {
            Some(limit) => s <= limit,
            None => true,
        });
    }
    // A planner fallback beyond the horizon still marks the trajectory tail.
    if feasible_prefix_len.is_some() && feasible.iter().all(|&f| f) {
        *feasible.last_mut().unwrap() = false;
    }

    // N = sqrt((2pi)^(2(H-1)) |Sigma|): density at the mean is 1/N and the
    // density integrates to one over the 2(H-1) free coordinates.
    let d = 2.0 * (horizon - 1) as f64;
    let log_n = 0.5 * (d * (2.0 * std::f64::consts::PI).ln() + schedule.log_det());
    let normalization = log_n.exp();

    Ok(TrajectoryDistribution {
        mean: MeanTrajectory { waypoints, feasible },
        covariance: schedule,
        normalization,
        epsilon,
        v_max,
        dt,
    })
}

/// Default Mahalanobis neighborhood: a three-sigma shell in 2(H-1) dims.
pub fn default_epsilon(horizon: usize) -> f64 {
    3.0 * (2.0 * (horizon - 1) as f64).sqrt()
}

const MAX_REJECTIONS: usize = 64;

/// Draw the finite choice set: L waypoint sequences from the Gaussian,
/// rejected back into the epsilon neighborhood, with waypoint 0 pinned to the
/// current position and per-step displacements clamped to v_max*dt.
pub fn sample_trajectories(
    q: &TrajectoryDistribution,
    count: usize,
    seed: u64,
) -> Vec<Vec<Vec2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = q.horizon();
    let step_limit = q.v_max * q.dt;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut accepted: Option<Vec<Vec2>> = None;
        for _ in 0..MAX_REJECTIONS {
            let mut traj = Vec::with_capacity(h);
            traj.push(q.mean.waypoints[0]);
            for k in 1..h {
                let sigma = q.covariance.sigmas[k - 1];
                let (gx, gy) = gauss_pair(&mut rng);
                traj.push(q.mean.waypoints[k] + Vec2::new(gx * sigma, gy * sigma));
            }
            // Clamp per-step displacement so derived actions respect the
            // speed bound, then test the neighborhood on what is returned.
            for k in 1..h {
                let d = traj[k] - traj[k - 1];
                traj[k] = traj[k - 1] + d.clamp_norm(step_limit);
            }
            if q.mahalanobis_sq(&traj).sqrt() <= q.epsilon {
                accepted = Some(traj);
                break;
            }
        }
        let traj = accepted.unwrap_or_else(|| q.mean.waypoints.clone());
        out.push(traj);
    }
    out
}

/// Box-Muller standard normal pair.
fn gauss_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}
