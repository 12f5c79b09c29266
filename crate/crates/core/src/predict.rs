//! Map completion behind a pluggable predictor interface: the three baseline
//! predictors, a deterministic patch-based inpainting predictor, an oracle
//! predictor for testing, and the prediction-accuracy metric.

use serde::{Deserialize, Serialize};

use crate::error::{GridNavError, Result};
use crate::geom::Vec2;
use crate::grid::{supercover_cells, CellState, OccupancyGrid};
use crate::sensing::{ContextCell, ContextMap, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InpaintParams {
    /// Odd patch side length in cells.
    pub patch_size: usize,
    /// Candidate-scan stride in cells.
    pub search_stride: usize,
    /// Chebyshev dilation radius applied to imagined occupied cells.
    pub dilation_radius: usize,
    pub seed: u64,
}

impl Default for InpaintParams {
    fn default() -> Self {
        InpaintParams { patch_size: 5, search_stride: 2, dilation_radius: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PredictorKind {
    /// Uses only the instantaneous sensor field of view; everything else is
    /// imagined free.
    ContextIgnorant,
    /// Uses the accumulated context; unknown cells are imagined free with no
    /// structural extrapolation.
    ContextNeutral,
    /// Uses the accumulated context and fills unknown cells by patch-based
    /// inpainting from observed regularities.
    ContextGenerative(InpaintParams),
    /// Copies ground truth; for testing and upper-bound comparisons.
    Oracle,
}

impl PredictorKind {
    pub fn label(&self) -> &'static str {
        match self {
            PredictorKind::ContextIgnorant => "ci",
            PredictorKind::ContextNeutral => "cn",
            PredictorKind::ContextGenerative(_) => "cg",
            PredictorKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ObservedCell,
    ImaginedCell,
}

/// Binary completed map plus per-cell provenance. Observed cells always match
/// the context they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedMap {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellState>,
    provenance: Vec<Provenance>,
}

impl PredictedMap {
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

    pub fn provenance(&self, col: usize, row: usize) -> Provenance {
        self.provenance[row * self.width + col]
    }

    pub fn imagined_count(&self) -> usize {
        self.provenance.iter().filter(|&&p| p == Provenance::ImaginedCell).count()
    }

    pub fn in_bounds(&self, p: Vec2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x <= self.width as f64 * self.resolution
            && p.y <= self.height as f64 * self.resolution
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        if !self.in_bounds(p) {
            return None;
        }
        let col = ((p.x / self.resolution) as usize).min(self.width - 1);
        let row = ((p.y / self.resolution) as usize).min(self.height - 1);
        Some((col, row))
    }

    pub fn center_of(&self, col: usize, row: usize) -> Vec2 {
        Vec2::new(
            (col as f64 + 0.5) * self.resolution,
            (row as f64 + 0.5) * self.resolution,
        )
    }

    fn occupied_cell_clamped(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true;
        }
        self.cell(col as usize, row as usize) == CellState::Occupied
    }

    /// Supercover collision on the predicted map; out-of-bounds is occupied.
    pub fn segment_collides(&self, p0: Vec2, p1: Vec2) -> bool {
        supercover_cells(p0, p1, self.resolution)
            .iter()
            .any(|&(c, r)| self.occupied_cell_clamped(c, r))
    }

    /// Copy with every occupied cell dilated by `radius_cells` (Chebyshev);
    /// provenance is preserved.
    pub fn inflate(&self, radius_cells: usize) -> PredictedMap {
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
                        let (nc, nr) = (col as i64 + dc, row as i64 + dr);
                        if nc >= 0
                            && nr >= 0
                            && nc < self.width as i64
                            && nr < self.height as i64
                        {
                            out.cells[nr as usize * self.width + nc as usize] =
                                CellState::Occupied;
                        }
                    }
                }
            }
        }
        out
    }

    /// Grid text format for the occupancy part.
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

    /// Parallel provenance dump: `o` observed, `i` imagined.
    pub fn provenance_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                s.push(match self.provenance(col, row) {
                    Provenance::ObservedCell => 'o',
                    Provenance::ImaginedCell => 'i',
                });
            }
            s.push('\n');
        }
        s
    }
}

/// Complete a partial map. `ground_truth` is required only for the oracle
/// predictor; `current_obs` is used only by the context-ignorant predictor.
pub fn predict(
    kind: &PredictorKind,
    context: &ContextMap,
    current_obs: &Observation,
    ground_truth: Option<&OccupancyGrid>,
) -> Result<PredictedMap> {
    let (w, h) = (context.width(), context.height());
    let mut map = PredictedMap {
        width: w,
        height: h,
        resolution: context.resolution(),
        cells: vec![CellState::Free; w * h],
        provenance: vec![Provenance::ImaginedCell; w * h],
    };
    match kind {
        PredictorKind::ContextIgnorant => {
            for &((c, r), state) in &current_obs.cells {
                map.cells[r * w + c] = state;
                map.provenance[r * w + c] = Provenance::ObservedCell;
            }
        }
        PredictorKind::ContextNeutral => {
            copy_known(context, &mut map);
        }
        PredictorKind::ContextGenerative(params) => {
            copy_known(context, &mut map);
            inpaint(context, params, &mut map);
        }
        PredictorKind::Oracle => {
            let truth = ground_truth.ok_or(GridNavError::OracleWithoutTruth)?;
            for r in 0..h {
                for c in 0..w {
                    map.cells[r * w + c] = truth.cell(c, r);
                    if let ContextCell::Known(_) = context.cell(c, r) {
                        map.provenance[r * w + c] = Provenance::ObservedCell;
                    }
                }
            }
        }
    }
    Ok(map)
}

fn copy_known(context: &ContextMap, map: &mut PredictedMap) {
    for r in 0..context.height() {
        for c in 0..context.width() {
            if let ContextCell::Known(state) = context.cell(c, r) {
                map.cells[r * map.width + c] = state;
                map.provenance[r * map.width + c] = Provenance::ObservedCell;
            }
        }
    }
}

/// Patch-based inpainting. For every unknown cell whose patch window contains
/// at least one known cell, find the fully-known candidate patch (scanned at
/// `search_stride`, row-major, ties to the lowest scan index) minimizing the
/// Hamming distance over the window's known cells, and copy the candidate's
/// center value. Imagined occupied cells are then dilated by
/// `dilation_radius`, never overwriting observed cells.
fn inpaint(context: &ContextMap, params: &InpaintParams, map: &mut PredictedMap) {
    let (w, h) = (context.width(), context.height());
    let radius = (params.patch_size / 2) as i64;
    let stride = params.search_stride.max(1);

    // Candidate centers whose full window is known, in row-major scan order.
    let mut candidates: Vec<(i64, i64)> = Vec::new();
    for r in (0..h).step_by(stride) {
        for c in (0..w).step_by(stride) {
            let (c, r) = (c as i64, r as i64);
            if c - radius < 0 || r - radius < 0 || c + radius >= w as i64 || r + radius >= h as i64
            {
                continue;
            }
            let fully_known = (-radius..=radius).all(|dr| {
                (-radius..=radius).all(|dc| {
                    matches!(
                        context.cell((c + dc) as usize, (r + dr) as usize),
                        ContextCell::Known(_)
                    )
                })
            });
            if fully_known {
                candidates.push((c, r));
            }
        }
    }

    let mut fills: Vec<(usize, usize, CellState)> = Vec::new();
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            if matches!(context.cell(c as usize, r as usize), ContextCell::Known(_)) {
                continue;
            }
            // Window's known offsets.
            let mut known_offsets: Vec<(i64, i64, CellState)> = Vec::new();
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    if let ContextCell::Known(s) = context.cell(nc as usize, nr as usize) {
                        known_offsets.push((dc, dr, s));
                    }
                }
            }
            if known_offsets.is_empty() {
                continue; // deep unknown stays imagined free
            }
            let mut best: Option<(usize, CellState)> = None;
            for &(qc, qr) in &candidates {
                let mut dist = 0usize;
                for &(dc, dr, s) in &known_offsets {
                    let (nc, nr) = (qc + dc, qr + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        dist += 1;
                        continue;
                    }
                    match context.cell(nc as usize, nr as usize) {
                        ContextCell::Known(v) if v == s => {}
                        _ => dist += 1,
                    }
                }
                let center = match context.cell(qc as usize, qr as usize) {
                    ContextCell::Known(v) => v,
                    ContextCell::Unknown => continue,
                };
                match best {
                    Some((bd, _)) if bd <= dist => {}
                    _ => best = Some((dist, center)),
                }
            }
            if let Some((_, v)) = best {
                fills.push((c as usize, r as usize, v));
            }
        }
    }
    for (c, r, v) in fills {
        map.cells[r * w + c] = v;
    }

    // Dilate imagined occupied cells.
    if params.dilation_radius > 0 {
        let rad = params.dilation_radius as i64;
        let snapshot = map.cells.clone();
        for r in 0..h as i64 {
            for c in 0..w as i64 {
                let idx = r as usize * w + c as usize;
                if snapshot[idx] != CellState::Occupied
                    || map.provenance[idx] != Provenance::ImaginedCell
                {
                    continue;
                }
                for dr in -rad..=rad {
                    for dc in -rad..=rad {
                        let (nc, nr) = (c + dc, r + dr);
                        if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                            continue;
                        }
                        let nidx = nr as usize * w + nc as usize;
                        if map.provenance[nidx] == Provenance::ImaginedCell {
                            map.cells[nidx] = CellState::Occupied;
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub n_tp: usize,
    pub n_tn: usize,
    pub n_fp: usize,
    pub n_fn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.n_tp + self.n_tn + self.n_fp + self.n_fn
    }

    pub fn accuracy(&self) -> f64 {
        (self.n_tp + self.n_tn) as f64 / self.total() as f64
    }
}

/// Per-cell confusion counts with occupied as the positive class.
pub fn confusion(predicted: &PredictedMap, truth: &OccupancyGrid) -> Result<ConfusionCounts> {
    if predicted.width() != truth.width() || predicted.height() != truth.height() {
        return Err(GridNavError::DimensionMismatch {
            a_w: predicted.width(),
            a_h: predicted.height(),
            b_w: truth.width(),
            b_h: truth.height(),
        });
    }
    let mut counts = ConfusionCounts { n_tp: 0, n_tn: 0, n_fp: 0, n_fn: 0 };
    for r in 0..truth.height() {
        for c in 0..truth.width() {
            match (predicted.cell(c, r), truth.cell(c, r)) {
                (CellState::Occupied, CellState::Occupied) => counts.n_tp += 1,
                (CellState::Free, CellState::Free) => counts.n_tn += 1,
                (CellState::Occupied, CellState::Free) => counts.n_fp += 1,
                (CellState::Free, CellState::Occupied) => counts.n_fn += 1,
            }
        }
    }
    Ok(counts)
}

/// Fraction of cells whose predicted occupancy matches ground truth:
/// (n_tp + n_tn) / total.
pub fn map_accuracy(predicted: &PredictedMap, truth: &OccupancyGrid) -> Result<f64> {
    Ok(confusion(predicted, truth)?.accuracy())
}
