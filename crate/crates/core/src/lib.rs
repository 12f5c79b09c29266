//! Bounded-rational navigation in unknown 2D occupancy grids.
//!
//! The robot accumulates partial observations of a hidden grid, completes the
//! unobserved part through a pluggable map predictor, plans a mean path on the
//! predicted map (RRT* + B-spline smoothing), wraps it in a Gaussian trajectory
//! distribution, and picks actions by importance-sampled policy search.

pub mod config;
pub mod episode;
pub mod error;
pub mod geom;
pub mod grid;
pub mod metrics;
pub mod policy;
pub mod predict;
pub mod rrt;
pub mod runner;
pub mod scenario;
pub mod search;
pub mod sensing;
pub mod spline;

pub use error::GridNavError;
pub use geom::Vec2;
