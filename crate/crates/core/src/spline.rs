//! Clamped B-spline path smoothing with collision-aware local repair.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::predict::PredictedMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplineParams {
    pub degree: usize,
    pub samples_per_span: usize,
    /// Target spacing of control points along the input polyline, meters.
    pub control_point_spacing: f64,
}

impl Default for SplineParams {
    fn default() -> Self {
        SplineParams { degree: 3, samples_per_span: 8, control_point_spacing: 0.3 }
    }
}

/// Smooth a polyline with a clamped B-spline over resampled control points.
/// Endpoints are preserved exactly. Spans whose smoothed samples collide on
/// the predicted map revert to the original polyline section (local repair).
pub fn smooth_path(path: &[Vec2], sp: &SplineParams, map: &PredictedMap) -> Vec<Vec2> {
    if path.len() < 2 {
        return path.to_vec();
    }
    if path.len() == 2 {
        return path.to_vec();
    }

    let ctrl = resample_polyline(path, sp.control_point_spacing);
    let degree = sp.degree.max(2).min(ctrl.len() - 1);
    if ctrl.len() < degree + 1 {
        return path.to_vec();
    }

    let knots = clamped_knots(ctrl.len(), degree);
    let spans = ctrl.len() - degree; // number of non-degenerate knot spans
    let samples_per_span = sp.samples_per_span.max(2);

    let mut out: Vec<Vec2> = vec![*path.first().unwrap()];
    for span in 0..spans {
        let t0 = knots[degree + span];
        let t1 = knots[degree + span + 1];
        let mut span_points = Vec::with_capacity(samples_per_span);
        for s in 1..=samples_per_span {
            let t = t0 + (t1 - t0) * s as f64 / samples_per_span as f64;
            span_points.push(de_boor(&ctrl, &knots, degree, t));
        }
        // Collision check for the span, including the edge from the last
        // accepted point.
        let mut prev = *out.last().unwrap();
        let mut collides = false;
        for &p in &span_points {
            if map.segment_collides(prev, p) {
                collides = true;
                break;
            }
            prev = p;
        }
        if collides {
            // Revert the span to the original control polyline section.
            let lo = (span as f64 / spans as f64 * (ctrl.len() - 1) as f64).floor() as usize;
            let hi = (((span + 1) as f64 / spans as f64) * (ctrl.len() - 1) as f64).ceil() as usize;
            for i in lo..=hi.min(ctrl.len() - 1) {
                out.push(ctrl[i]);
            }
        } else {
            out.extend_from_slice(&span_points);
        }
    }
    // Clamped spline ends at the last control point; force exact endpoint.
    let end = *path.last().unwrap();
    if out.last().map(|p| p.dist(end)).unwrap_or(f64::INFINITY) > 1e-9 {
        out.push(end);
    } else {
        *out.last_mut().unwrap() = end;
    }
    dedup_points(&mut out);
    out
}

/// Resample a polyline at roughly uniform arc-length spacing, keeping the
/// original endpoints and never dropping below the input vertex count density
/// needed to represent corners.
fn resample_polyline(path: &[Vec2], spacing: f64) -> Vec<Vec2> {
    let total: f64 = path.windows(2).map(|w| w[0].dist(w[1])).sum();
    if total < 1e-12 || spacing <= 0.0 {
        return path.to_vec();
    }
    let n = ((total / spacing).ceil() as usize).max(path.len() - 1);
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        out.push(point_at_arc_length(path, total * i as f64 / n as f64));
    }
    out
}

/// Point at a given arc length along a polyline.
pub fn point_at_arc_length(path: &[Vec2], s: f64) -> Vec2 {
    if s <= 0.0 {
        return path[0];
    }
    let mut acc = 0.0;
    for w in path.windows(2) {
        let seg = w[0].dist(w[1]);
        if acc + seg >= s && seg > 0.0 {
            let t = (s - acc) / seg;
            return w[0] + (w[1] - w[0]) * t;
        }
        acc += seg;
    }
    *path.last().unwrap()
}

fn clamped_knots(n_ctrl: usize, degree: usize) -> Vec<f64> {
    let n_knots = n_ctrl + degree + 1;
    let interior = n_knots - 2 * (degree + 1);
    let mut knots = Vec::with_capacity(n_knots);
    for _ in 0..=degree {
        knots.push(0.0);
    }
    for i in 1..=interior {
        knots.push(i as f64 / (interior + 1) as f64);
    }
    for _ in 0..=degree {
        knots.push(1.0);
    }
    knots
}

/// De Boor evaluation of the clamped B-spline at parameter t in [0, 1].
fn de_boor(ctrl: &[Vec2], knots: &[f64], degree: usize, t: f64) -> Vec2 {
    let t = t.clamp(0.0, 1.0);
    let n = ctrl.len();
    // Find knot span k with knots[k] <= t < knots[k+1].
    let mut k = degree;
    while k < n - 1 && t >= knots[k + 1] {
        k += 1;
    }
    let mut d: Vec<Vec2> = (0..=degree).map(|j| ctrl[j + k - degree]).collect();
    for r in 1..=degree {
        for j in (r..=degree).rev() {
            let i = j + k - degree;
            let denom = knots[i + degree + 1 - r] - knots[i];
            let alpha = if denom.abs() < 1e-15 { 0.0 } else { (t - knots[i]) / denom };
            d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
        }
    }
    d[degree]
}

fn dedup_points(points: &mut Vec<Vec2>) {
    points.dedup_by(|a, b| a.dist(*b) < 1e-12);
}

/// Discrete curvature proxy: sum of absolute heading changes along the path.
pub fn total_turning(path: &[Vec2]) -> f64 {
    let mut sum = 0.0;
    for w in path.windows(3) {
        let a = w[1] - w[0];
        let b = w[2] - w[1];
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            continue;
        }
        let cross = a.x * b.y - a.y * b.x;
        let dot = a.dot(b);
        sum += cross.atan2(dot).abs();
    }
    sum
}
