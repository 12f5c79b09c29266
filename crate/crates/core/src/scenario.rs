//! Procedural test environments: random blocks, walls, and U-shaped traps
//! placed astride the start-goal segment.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::Vec2;
use crate::grid::{CellState, GoalRegion, OccupancyGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObstacleMotif {
    /// `count` square-ish blocks with side lengths drawn from `size_range` (cells).
    RandomBlocks { count: usize, size_range: (usize, usize) },
    /// Three-sided rectangular enclosure between start and goal; the opening
    /// faces away from the goal. Dimensions in cells, walls one cell thick.
    UTrap { opening_width: usize, depth: usize },
    /// `count` straight walls with lengths drawn from `length_range` (cells).
    Walls { count: usize, length_range: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub size: (usize, usize),
    pub resolution: f64,
    pub start: Vec2,
    pub goal: Vec2,
    pub goal_radius: f64,
    pub obstacle_motifs: Vec<ObstacleMotif>,
    pub obstacle_density: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 0,
            size: (100, 100),
            resolution: 0.1,
            start: Vec2::new(1.0, 5.0),
            goal: Vec2::new(9.0, 5.0),
            goal_radius: 0.3,
            obstacle_motifs: Vec::new(),
            obstacle_density: 0.0,
        }
    }
}

const MAX_ATTEMPTS: u32 = 50;

/// Deterministic scenario generation; the same spec always yields the same
/// grid. Retries with a derived sub-seed until start and goal are connected
/// by free cells, erroring out after a bounded number of attempts.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(OccupancyGrid, Vec2, GoalRegion)> {
    validate(spec)?;
    let goal = GoalRegion { center: spec.goal, radius: spec.goal_radius };
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt as u64));
        let grid = build_grid(spec, &mut rng);
        if connected(&grid, spec.start, &goal) {
            return Ok((grid, spec.start, goal));
        }
    }
    Err(GridNavError::GenerationFailure { seed: spec.seed, attempts: MAX_ATTEMPTS })
}

fn validate(spec: &ScenarioSpec) -> Result<()> {
    if spec.size.0 == 0 || spec.size.1 == 0 || spec.resolution <= 0.0 {
        return Err(GridNavError::Config("scenario size/resolution must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.obstacle_density) {
        return Err(GridNavError::Config("obstacle_density must be in [0,1]".into()));
    }
    let probe = OccupancyGrid::new_free(spec.size.0, spec.size.1, spec.resolution);
    for p in [spec.start, spec.goal] {
        if probe.cell_of(p).is_none() {
            return Err(GridNavError::OutOfBounds { x: p.x, y: p.y });
        }
    }
    Ok(())
}

fn build_grid(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    let (w, h) = spec.size;
    let mut grid = OccupancyGrid::new_free(w, h, spec.resolution);

    if spec.obstacle_density > 0.0 {
        for row in 0..h {
            for col in 0..w {
                if rng.gen::<f64>() < spec.obstacle_density {
                    grid.set_cell(col, row, CellState::Occupied);
                }
            }
        }
    }

    for motif in &spec.obstacle_motifs {
        match motif {
            ObstacleMotif::RandomBlocks { count, size_range } => {
                for _ in 0..*count {
                    let bw = rng.gen_range(size_range.0..=size_range.1);
                    let bh = rng.gen_range(size_range.0..=size_range.1);
                    let c0 = rng.gen_range(0..w);
                    let r0 = rng.gen_range(0..h);
                    fill_rect(&mut grid, c0, r0, bw, bh);
                }
            }
            ObstacleMotif::Walls { count, length_range } => {
                for _ in 0..*count {
                    let len = rng.gen_range(length_range.0..=length_range.1);
                    let c0 = rng.gen_range(0..w);
                    let r0 = rng.gen_range(0..h);
                    let horizontal = rng.gen::<bool>();
                    if horizontal {
                        fill_rect(&mut grid, c0, r0, len, 1);
                    } else {
                        fill_rect(&mut grid, c0, r0, 1, len);
                    }
                }
            }
            ObstacleMotif::UTrap { opening_width, depth } => {
                place_utrap(&mut grid, spec, *opening_width, *depth);
            }
        }
    }

    // Start and goal cells are always free.
    clear_around(&mut grid, spec.start, 1);
    clear_around(&mut grid, spec.goal, 1);
    grid
}

fn fill_rect(grid: &mut OccupancyGrid, c0: usize, r0: usize, w: usize, h: usize) {
    for r in r0..(r0 + h).min(grid.height()) {
        for c in c0..(c0 + w).min(grid.width()) {
            grid.set_cell(c, r, CellState::Occupied);
        }
    }
}

fn clear_around(grid: &mut OccupancyGrid, p: Vec2, radius: i64) {
    if let Some((c, r)) = grid.cell_of(p) {
        for dc in -radius..=radius {
            for dr in -radius..=radius {
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                if nc >= 0 && nr >= 0 && nc < grid.width() as i64 && nr < grid.height() as i64 {
                    grid.set_cell(nc as usize, nr as usize, CellState::Free);
                }
            }
        }
    }
}

/// Three-sided rectangular enclosure centered on the midpoint of the
/// start-goal segment. The closed back faces the goal; the opening faces the
/// start. The enclosure axis follows the dominant (axis-aligned) direction of
/// the start-goal segment.
fn place_utrap(grid: &mut OccupancyGrid, spec: &ScenarioSpec, opening_width: usize, depth: usize) {
    let (sc, sr) = match grid.cell_of(spec.start) {
        Some(c) => c,
        None => return,
    };
    let (gc, gr) = match grid.cell_of(spec.goal) {
        Some(c) => c,
        None => return,
    };
    let mid_c = ((sc + gc) / 2) as i64;
    let mid_r = ((sr + gr) / 2) as i64;
    let half = (opening_width / 2 + 1) as i64;
    let d = depth as i64;

    let dx = gc as i64 - sc as i64;
    let dy = gr as i64 - sr as i64;

    let mut set = |c: i64, r: i64| {
        if c >= 0 && r >= 0 && (c as usize) < grid.width() && (r as usize) < grid.height() {
            grid.set_cell(c as usize, r as usize, CellState::Occupied);
        }
    };

    if dx.abs() >= dy.abs() {
        // Goal is (mostly) along +x or -x; back wall is a vertical segment on
        // the goal side, arms run toward the start.
        let toward_goal = if dx >= 0 { 1i64 } else { -1 };
        let back_c = mid_c + toward_goal * d / 2;
        for r in (mid_r - half)..=(mid_r + half) {
            set(back_c, r);
        }
        for i in 0..d {
            let c = back_c - toward_goal * i;
            set(c, mid_r - half);
            set(c, mid_r + half);
        }
    } else {
        let toward_goal = if dy >= 0 { 1i64 } else { -1 };
        let back_r = mid_r + toward_goal * d / 2;
        for c in (mid_c - half)..=(mid_c + half) {
            set(c, back_r);
        }
        for i in 0..d {
            let r = back_r - toward_goal * i;
            set(mid_c - half, r);
            set(mid_c + half, r);
        }
    }
}

fn connected(grid: &OccupancyGrid, start: Vec2, goal: &GoalRegion) -> bool {
    let (sc, sr) = match grid.cell_of(start) {
        Some(c) => c,
        None => return false,
    };
    let mask = grid.flood_fill_free((sc, sr));
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            if mask[r * grid.width() + c] && goal.contains(grid.center_of(c, r)) {
                return true;
            }
        }
    }
    false
}
