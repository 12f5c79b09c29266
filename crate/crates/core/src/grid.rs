//! Ground-truth occupancy grids: representation, text I/O, the supercover
//! collision primitive shared by planning and rollout, and a shortest-path
//! oracle used for evaluation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Occupied,
}

/// Circular goal region; reaching means Euclidean distance to center <= radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: Vec2,
    pub radius: f64,
}

impl GoalRegion {
    pub fn contains(&self, p: Vec2) -> bool {
        p.dist(self.center) <= self.radius
    }
}

/// Binary ground-truth environment. Row-major storage with row 0 at the
/// bottom (y = 0); the text format writes the top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new_free(width: usize, height: usize, resolution: f64) -> Self {
        assert!(width >= 1 && height >= 1 && resolution > 0.0);
        OccupancyGrid {
            width,
            height,
            resolution,
            cells: vec![CellState::Free; width * height],
        }
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

    pub fn cell(&self, col: usize, row: usize) -> CellState {
        self.cells[row * self.width + col]
    }

    pub fn set_cell(&mut self, col: usize, row: usize, s: CellState) {
        self.cells[row * self.width + col] = s;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn in_bounds(&self, p: Vec2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x <= self.width as f64 * self.resolution
            && p.y <= self.height as f64 * self.resolution
    }

    /// Cell containing a world position; positions on the far edge clamp to
    /// the last cell. Returns None outside the grid.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        if !self.in_bounds(p) {
            return None;
        }
        let col = ((p.x / self.resolution) as usize).min(self.width - 1);
        let row = ((p.y / self.resolution) as usize).min(self.height - 1);
        Some((col, row))
    }

    /// World position of a cell center.
    pub fn center_of(&self, col: usize, row: usize) -> Vec2 {
        Vec2::new(
            (col as f64 + 0.5) * self.resolution,
            (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Out-of-bounds counts as occupied.
    pub fn occupied_at(&self, p: Vec2) -> bool {
        match self.cell_of(p) {
            Some((c, r)) => self.cell(c, r) == CellState::Occupied,
            None => true,
        }
    }

    fn occupied_cell_clamped(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true;
        }
        self.cell(col as usize, row as usize) == CellState::Occupied
    }

    /// True iff any supercover cell of the segment p0-p1 is occupied.
    /// Errors when an endpoint lies outside the grid.
    pub fn segment_collides(&self, p0: Vec2, p1: Vec2) -> Result<bool> {
        for p in [p0, p1] {
            if !self.in_bounds(p) {
                return Err(GridNavError::OutOfBounds { x: p.x, y: p.y });
            }
        }
        Ok(self.segment_collides_unchecked(p0, p1))
    }

    /// Same check with out-of-bounds treated as occupied (no error path);
    /// used on the hot rollout path.
    pub fn segment_collides_unchecked(&self, p0: Vec2, p1: Vec2) -> bool {
        supercover_cells(p0, p1, self.resolution)
            .iter()
            .any(|&(c, r)| self.occupied_cell_clamped(c, r))
    }

    /// 8-connected flood fill of free cells from `start`; returns reachability
    /// mask. Used for scenario validation and as a test oracle.
    pub fn flood_fill_free(&self, start: (usize, usize)) -> Vec<bool> {
        let mut seen = vec![false; self.width * self.height];
        if self.cell(start.0, start.1) == CellState::Occupied {
            return seen;
        }
        let mut stack = vec![start];
        seen[start.1 * self.width + start.0] = true;
        while let Some((c, r)) = stack.pop() {
            for dc in -1i64..=1 {
                for dr in -1i64..=1 {
                    if dc == 0 && dr == 0 {
                        continue;
                    }
                    let nc = c as i64 + dc;
                    let nr = r as i64 + dr;
                    if nc < 0 || nr < 0 || nc >= self.width as i64 || nr >= self.height as i64 {
                        continue;
                    }
                    let (nc, nr) = (nc as usize, nr as usize);
                    let idx = nr * self.width + nc;
                    if !seen[idx] && self.cell(nc, nr) == CellState::Free {
                        seen[idx] = true;
                        stack.push((nc, nr));
                    }
                }
            }
        }
        seen
    }

    /// Grid with every occupied cell dilated by `radius_cells` (Chebyshev).
    pub fn inflate(&self, radius_cells: usize) -> OccupancyGrid {
        if radius_cells == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        let r = radius_cells as i64;
        for row in 0..self.height {
            for col in 0..self.width {
                if self.cell(col, row) != CellState::Occupied {
                    continue;
                }
                for dc in -r..=r {
                    for dr in -r..=r {
                        let nc = col as i64 + dc;
                        let nr = row as i64 + dr;
                        if nc >= 0
                            && nr >= 0
                            && nc < self.width as i64
                            && nr < self.height as i64
                        {
                            out.set_cell(nc as usize, nr as usize, CellState::Occupied);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                s.push(match self.cell(col, row) {
                    CellState::Free => '.',
                    CellState::Occupied => '#',
                });
            }
            s.push('\n');
        }
        s
    }

    pub fn load(path: &Path) -> Result<OccupancyGrid> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }

    pub fn from_text(text: &str, path: &Path) -> Result<OccupancyGrid> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| GridNavError::MalformedHeader {
            path: path.to_owned(),
            reason: "empty file".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(GridNavError::MalformedHeader {
                path: path.to_owned(),
                reason: format!("expected `W H RES`, got `{header}`"),
            });
        }
        let width: usize = parts[0].parse().map_err(|_| GridNavError::MalformedHeader {
            path: path.to_owned(),
            reason: format!("bad width `{}`", parts[0]),
        })?;
        let height: usize = parts[1].parse().map_err(|_| GridNavError::MalformedHeader {
            path: path.to_owned(),
            reason: format!("bad height `{}`", parts[1]),
        })?;
        let resolution: f64 = parts[2].parse().map_err(|_| GridNavError::MalformedHeader {
            path: path.to_owned(),
            reason: format!("bad resolution `{}`", parts[2]),
        })?;
        if width == 0 || height == 0 || resolution <= 0.0 {
            return Err(GridNavError::MalformedHeader {
                path: path.to_owned(),
                reason: "dimensions must be positive".into(),
            });
        }
        let mut grid = OccupancyGrid::new_free(width, height, resolution);
        for file_row in 0..height {
            let line_no = file_row + 2;
            let line = lines.next().ok_or_else(|| GridNavError::RowLength {
                path: path.to_owned(),
                line: line_no,
                got: 0,
                expected: width,
            })?;
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != width {
                return Err(GridNavError::RowLength {
                    path: path.to_owned(),
                    line: line_no,
                    got: chars.len(),
                    expected: width,
                });
            }
            let row = height - 1 - file_row;
            for (col, &ch) in chars.iter().enumerate() {
                let state = match ch {
                    '.' => CellState::Free,
                    '#' => CellState::Occupied,
                    _ => {
                        return Err(GridNavError::IllegalCell {
                            path: path.to_owned(),
                            line: line_no,
                            ch,
                        })
                    }
                };
                grid.set_cell(col, row, state);
            }
        }
        Ok(grid)
    }

    /// Length of a shortest 8-connected free-cell path from the start cell to
    /// any cell inside the goal region, in meters. None when unreachable.
    pub fn shortest_path_oracle(&self, start: Vec2, goal: &GoalRegion) -> Result<Option<f64>> {
        let (sc, sr) = self
            .cell_of(start)
            .ok_or(GridNavError::OutOfBounds { x: start.x, y: start.y })?;
        if self.cell(sc, sr) == CellState::Occupied {
            return Ok(None);
        }
        let goal_mask: Vec<bool> = (0..self.width * self.height)
            .map(|i| {
                let (c, r) = (i % self.width, i / self.width);
                goal.contains(self.center_of(c, r))
            })
            .collect();

        #[derive(PartialEq)]
        struct Entry {
            cost: f64,
            idx: usize,
        }
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                other.cost.total_cmp(&self.cost)
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut dist = vec![f64::INFINITY; self.width * self.height];
        let start_idx = sr * self.width + sc;
        dist[start_idx] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry { cost: 0.0, idx: start_idx });
        while let Some(Entry { cost, idx }) = heap.pop() {
            if cost > dist[idx] {
                continue;
            }
            if goal_mask[idx] {
                return Ok(Some(cost));
            }
            let (c, r) = ((idx % self.width) as i64, (idx / self.width) as i64);
            for dc in -1i64..=1 {
                for dr in -1i64..=1 {
                    if dc == 0 && dr == 0 {
                        continue;
                    }
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= self.width as i64 || nr >= self.height as i64 {
                        continue;
                    }
                    let nidx = nr as usize * self.width + nc as usize;
                    if self.cells[nidx] == CellState::Occupied {
                        continue;
                    }
                    let step = if dc != 0 && dr != 0 {
                        std::f64::consts::SQRT_2 * self.resolution
                    } else {
                        self.resolution
                    };
                    let ncost = cost + step;
                    if ncost < dist[nidx] {
                        dist[nidx] = ncost;
                        heap.push(Entry { cost: ncost, idx: nidx });
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Every cell the segment a-b passes through, in traversal order, in cell
/// indices (may be negative or past the grid edge; callers clamp). Exact
/// corner crossings include both side cells so the cover is conservative.
pub fn supercover_cells(a: Vec2, b: Vec2, resolution: f64) -> Vec<(i64, i64)> {
    let ax = a.x / resolution;
    let ay = a.y / resolution;
    let bx = b.x / resolution;
    let by = b.y / resolution;
    let dx = bx - ax;
    let dy = by - ay;

    let mut cx = ax.floor() as i64;
    let mut cy = ay.floor() as i64;
    let ex = bx.floor() as i64;
    let ey = by.floor() as i64;

    let mut cells = vec![(cx, cy)];
    if dx == 0.0 && dy == 0.0 {
        return cells;
    }

    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };

    let frac_x = ax - ax.floor();
    let frac_y = ay - ay.floor();
    let mut t_max_x = if dx > 0.0 {
        (1.0 - frac_x) * t_delta_x
    } else if dx < 0.0 {
        frac_x * t_delta_x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy > 0.0 {
        (1.0 - frac_y) * t_delta_y
    } else if dy < 0.0 {
        frac_y * t_delta_y
    } else {
        f64::INFINITY
    };

    const EPS: f64 = 1e-12;
    let budget = 4 * ((ex - cx).abs() + (ey - cy).abs() + 2);
    for _ in 0..budget {
        if cx == ex && cy == ey {
            break;
        }
        if (t_max_x - t_max_y).abs() < EPS {
            // Corner crossing: include both adjacent cells.
            cells.push((cx + step_x, cy));
            cells.push((cx, cy + step_y));
            cx += step_x;
            cy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            cx += step_x;
            t_max_x += t_delta_x;
        } else {
            cy += step_y;
            t_max_y += t_delta_y;
        }
        cells.push((cx, cy));
    }
    cells
}
