//! Occluded circular field-of-view sensing and the accumulated context map.

use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::Vec2;
use crate::grid::{supercover_cells, CellState, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Sensing radius in meters.
    pub range: f64,
    /// Number of rays; angular resolution is 2*pi/ray_count.
    pub ray_count: usize,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel { range: 1.0, ray_count: 360 }
    }
}

/// One time step worth of sensed cells. Noiseless: values are ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub timestamp: usize,
    pub cells: Vec<((usize, usize), CellState)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextCell {
    Unknown,
    Known(CellState),
}

/// Tri-state accumulated observation c_t. Known cells never revert and never
/// change value.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMap {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<ContextCell>,
}

impl ContextMap {
    pub fn new_unknown(width: usize, height: usize, resolution: f64) -> Self {
        ContextMap {
            width,
            height,
            resolution,
            cells: vec![ContextCell::Unknown; width * height],
        }
    }

    pub fn matching(grid: &OccupancyGrid) -> Self {
        Self::new_unknown(grid.width(), grid.height(), grid.resolution())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cell(&self, col: usize, row: usize) -> ContextCell {
        self.cells[row * self.width + col]
    }

    pub fn set_cell(&mut self, col: usize, row: usize, s: ContextCell) {
        self.cells[row * self.width + col] = s;
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| !matches!(c, ContextCell::Unknown)).count()
    }

    /// Known area in square meters.
    pub fn explored_area(&self) -> f64 {
        self.known_count() as f64 * self.resolution * self.resolution
    }

    /// Merge an observation into the context. Errors if an already-known cell
    /// would change value (sensor/world inconsistency).
    pub fn accumulate(&mut self, obs: &Observation) -> Result<()> {
        for &((col, row), state) in &obs.cells {
            if col >= self.width || row >= self.height {
                return Err(GridNavError::DimensionMismatch {
                    a_w: self.width,
                    a_h: self.height,
                    b_w: col + 1,
                    b_h: row + 1,
                });
            }
            match self.cell(col, row) {
                ContextCell::Unknown => self.set_cell(col, row, ContextCell::Known(state)),
                ContextCell::Known(existing) => {
                    if existing != state {
                        return Err(GridNavError::ObservationConflict { col, row });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                s.push(match self.cell(col, row) {
                    ContextCell::Unknown => '?',
                    ContextCell::Known(CellState::Free) => '.',
                    ContextCell::Known(CellState::Occupied) => '#',
                });
            }
            s.push('\n');
        }
        s
    }
}

/// Cast `ray_count` rays from `position`, reporting cells along each ray in
/// distance order until the first occupied cell (inclusive) or the sensor
/// range. The robot's own cell is always reported.
pub fn sense(grid: &OccupancyGrid, position: Vec2, sensor: &SensorModel) -> Result<Observation> {
    let (pc, pr) = grid
        .cell_of(position)
        .ok_or(GridNavError::OutOfBounds { x: position.x, y: position.y })?;
    if grid.cell(pc, pr) == CellState::Occupied {
        return Err(GridNavError::SensorInObstacle { x: position.x, y: position.y });
    }

    let mut seen = vec![false; grid.width() * grid.height()];
    let mut cells = Vec::new();
    let mut report = |col: usize, row: usize, state: CellState| {
        let idx = row * grid.width() + col;
        if !seen[idx] {
            seen[idx] = true;
            cells.push(((col, row), state));
        }
    };
    report(pc, pr, CellState::Free);

    for i in 0..sensor.ray_count {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / sensor.ray_count as f64;
        let end = position + Vec2::new(angle.cos(), angle.sin()) * sensor.range;
        for (c, r) in supercover_cells(position, end, grid.resolution()) {
            if c < 0 || r < 0 || c >= grid.width() as i64 || r >= grid.height() as i64 {
                break; // out of the arena; the ray cannot re-enter
            }
            let (c, r) = (c as usize, r as usize);
            if grid.center_of(c, r).dist(position) > sensor.range {
                continue;
            }
            let state = grid.cell(c, r);
            report(c, r, state);
            if state == CellState::Occupied {
                break;
            }
        }
    }

    Ok(Observation { timestamp: 0, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_map_full_range_sees_everything() {
        let grid = OccupancyGrid::new_free(10, 10, 0.1);
        let sensor = SensorModel { range: 10.0, ray_count: 720 };
        let obs = sense(&grid, Vec2::new(0.5, 0.5), &sensor).unwrap();
        assert_eq!(obs.cells.len(), 100);
        assert!(obs.cells.iter().all(|&(_, s)| s == CellState::Free));
    }

    #[test]
    fn tiny_range_reports_only_own_cell() {
        let grid = OccupancyGrid::new_free(10, 10, 0.1);
        let sensor = SensorModel { range: 0.01, ray_count: 16 };
        let obs = sense(&grid, Vec2::new(0.52, 0.55), &sensor).unwrap();
        assert_eq!(obs.cells, vec![((5, 5), CellState::Free)]);
    }

    #[test]
    fn wall_occludes_cells_behind_it() {
        // Vertical wall at col 5; robot on the left, everything at col > 5 on
        // the robot's row band must be hidden. Verified against a dense
        // ray-march oracle below.
        let mut grid = OccupancyGrid::new_free(11, 11, 1.0);
        for row in 0..11 {
            grid.set_cell(5, row, CellState::Occupied);
        }
        let pos = Vec2::new(2.5, 5.5);
        let sensor = SensorModel { range: 20.0, ray_count: 1440 };
        let obs = sense(&grid, pos, &sensor).unwrap();
        for &((c, _), _) in &obs.cells {
            assert!(c <= 5, "cell behind wall observed: col {c}");
        }

        // Dense ray-march oracle: any cell the implementation reports must
        // have some interior point reachable by a straight sight line from
        // the robot that does not first enter an occupied cell. The center
        // alone is too strict: a ray may clip a cell's near edge while the
        // center sits behind an occluder.
        let line_clear_to = |c: usize, r: usize, target: Vec2| -> bool {
            let n = (target.dist(pos) / 0.01).ceil() as usize + 1;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let p = pos + (target - pos) * t;
                if let Some((pc, pr)) = grid.cell_of(p) {
                    if (pc, pr) == (c, r) {
                        return true; // reached the cell first
                    }
                    if grid.cell(pc, pr) == CellState::Occupied {
                        return false;
                    }
                }
            }
            true
        };
        for &((c, r), _) in &obs.cells {
            let center = grid.center_of(c, r);
            let res = grid.resolution();
            let visible = (-2..=2).any(|dx| {
                (-2..=2).any(|dy| {
                    let target = center
                        + Vec2::new(dx as f64, dy as f64) * (0.48 * res / 2.0);
                    line_clear_to(c, r, target)
                })
            });
            assert!(visible, "cell ({c},{r}) reported but occluded");
        }
    }

    #[test]
    fn sense_from_obstacle_errors() {
        let mut grid = OccupancyGrid::new_free(3, 3, 1.0);
        grid.set_cell(1, 1, CellState::Occupied);
        assert!(sense(&grid, Vec2::new(1.5, 1.5), &SensorModel::default()).is_err());
    }

    #[test]
    fn accumulate_is_idempotent_and_counts_union() {
        let grid = OccupancyGrid::new_free(4, 4, 1.0);
        let sensor = SensorModel { range: 1.2, ray_count: 64 };
        let obs = sense(&grid, Vec2::new(0.5, 0.5), &sensor).unwrap();
        let mut ctx = ContextMap::matching(&grid);
        ctx.accumulate(&obs).unwrap();
        let k = ctx.known_count();
        assert_eq!(k, obs.cells.len());
        let snapshot = ctx.clone();
        ctx.accumulate(&obs).unwrap();
        assert_eq!(ctx, snapshot);
    }

    #[test]
    fn disjoint_observations_sum() {
        let mut ctx = ContextMap::new_unknown(4, 4, 1.0);
        let a = Observation { timestamp: 0, cells: vec![((0, 0), CellState::Free)] };
        let b = Observation { timestamp: 1, cells: vec![((3, 3), CellState::Occupied)] };
        ctx.accumulate(&a).unwrap();
        ctx.accumulate(&b).unwrap();
        assert_eq!(ctx.known_count(), 2);
    }

    #[test]
    fn conflicting_observation_rejected() {
        let mut ctx = ContextMap::new_unknown(2, 2, 1.0);
        ctx.accumulate(&Observation { timestamp: 0, cells: vec![((0, 0), CellState::Free)] })
            .unwrap();
        let err = ctx
            .accumulate(&Observation { timestamp: 1, cells: vec![((0, 0), CellState::Occupied)] })
            .unwrap_err();
        assert!(matches!(err, GridNavError::ObservationConflict { col: 0, row: 0 }));
    }

    #[test]
    fn explored_area_arithmetic() {
        let mut ctx = ContextMap::new_unknown(10, 10, 0.1);
        assert_eq!(ctx.explored_area(), 0.0);
        for i in 0..10 {
            ctx.set_cell(i, 0, ContextCell::Known(CellState::Free));
        }
        assert!((ctx.explored_area() - 0.1).abs() < 1e-12);
    }
}
