//! Euclidean primitives on the unit ball: the Jung constant, inscribed regular
//! simplices, diameters, minimal enclosing balls and convex combinations.

use std::ops::Deref;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for geometric identities (distances, norms, inequalities).
pub const TOL_GEOM: f64 = 1e-9;

/// Tolerance for the sum of convex-combination weights.
pub const TOL_WEIGHTS: f64 = 1e-12;

/// Point sets larger than this compute their diameter in parallel.
const PARALLEL_DIAMETER_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),
    #[error("coordinate {0} is not finite")]
    NonFinite(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point set is empty")]
    EmptySet,
    #[error("invalid convex combination: {0}")]
    InvalidCombination(String),
    #[error("invalid ball radius {0}")]
    InvalidRadius(f64),
}

/// A point of `R^n` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::InvalidDimension(0));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vectors have dimension at least 1");
        Vector(vec![0.0; dim])
    }

    /// Wraps coordinates produced by arithmetic on already-valid vectors.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = GeometryError;

    fn try_from(coords: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Radial projection onto the closed unit ball.
pub fn project_to_ball(x: &mut [f64]) {
    let r = norm(x);
    if r > 1.0 {
        x.iter_mut().for_each(|c| *c /= r);
    }
}

/// A nonempty finite configuration of points of equal dimension, stored flat.
///
/// The diameter is computed on first request and cached.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    diameter: OnceLock<f64>,
}

impl PointSet {
    pub fn new(points: Vec<Vector>) -> Result<Self, GeometryError> {
        let dim = points.first().ok_or(GeometryError::EmptySet)?.dim();
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in &points {
            if p.dim() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, found: p.dim() });
            }
            coords.extend_from_slice(p);
        }
        Ok(PointSet { dim, coords, diameter: OnceLock::new() })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        rows.into_iter().map(Vector::new).collect::<Result<Vec<_>, _>>().and_then(PointSet::new)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidDimension(0));
        }
        if coords.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        if coords.len() % dim != 0 {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(PointSet { dim, coords, diameter: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_vectors(&self) -> Vec<Vector> {
        self.iter().map(|p| Vector::from_raw(p.to_vec())).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Maximum pairwise Euclidean distance, exact up to rounding.
    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| self.compute_diameter())
    }

    fn compute_diameter(&self) -> f64 {
        let n = self.len();
        let row_max = |i: usize| {
            let p = self.point(i);
            (i + 1..n).map(|j| dist_sq(p, self.point(j))).fold(0.0, f64::max)
        };
        let max_sq = if n > PARALLEL_DIAMETER_THRESHOLD {
            (0..n).into_par_iter().map(row_max).reduce(|| 0.0, f64::max)
        } else {
            (0..n).map(row_max).fold(0.0, f64::max)
        };
        max_sq.sqrt()
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        dist(&self.center, p) <= self.radius + tol
    }
}

/// Jung constant `sqrt(2(n+1)/n)`: the edge length of the regular simplex
/// inscribed in the unit sphere of `R^n`.
pub fn jung_radius(n: usize) -> Result<f64, GeometryError> {
    if n == 0 {
        return Err(GeometryError::InvalidDimension(0));
    }
    let n = n as f64;
    Ok((2.0 * (n + 1.0) / n).sqrt())
}

/// Vertices of a regular `n`-simplex inscribed in the unit sphere, centred at
/// the origin.
///
/// The standard basis of `R^{n+1}` is centred and expressed in the orthonormal
/// basis `u_k = (-1, ..., -1, k, 0, ..., 0) / sqrt(k(k+1))` of the hyperplane
/// orthogonal to `(1, ..., 1)`. With this sign convention the first vertex of
/// the 1-simplex is `-1`.
pub fn regular_simplex_vertices(n: usize) -> Result<PointSet, GeometryError> {
    if n == 0 {
        return Err(GeometryError::InvalidDimension(0));
    }
    let scale = ((n + 1) as f64 / n as f64).sqrt();
    let mut coords = Vec::with_capacity(n * (n + 1));
    for i in 0..=n {
        for k in 1..=n {
            let kf = k as f64;
            let denom = (kf * (kf + 1.0)).sqrt();
            let c = match i.cmp(&k) {
                std::cmp::Ordering::Less => -1.0 / denom,
                std::cmp::Ordering::Equal => kf / denom,
                std::cmp::Ordering::Greater => 0.0,
            };
            coords.push(c * scale);
        }
    }
    PointSet::from_flat(n, coords)
}

pub fn diameter(x: &PointSet) -> f64 {
    x.diameter()
}

/// Smallest ball containing every point of `x`.
///
/// Move-to-front variant of Welzl's algorithm in arbitrary dimension. Points
/// are processed in input order, so the result is deterministic.
pub fn min_enclosing_ball(x: &PointSet) -> Ball {
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut support = Vec::with_capacity(x.dim() + 1);
    let ball = move_to_front(x, &mut order, x.len(), &mut support)
        .expect("a nonempty point set has an enclosing ball");
    // Re-derive the radius from the final centre so every point is covered.
    let radius = x.iter().map(|p| dist(&ball.center, p)).fold(0.0, f64::max);
    Ball { center: Vector::from_raw(ball.center), radius }
}

struct RawBall {
    center: Vec<f64>,
    radius_sq: f64,
}

impl RawBall {
    fn contains(&self, p: &[f64]) -> bool {
        dist_sq(&self.center, p) <= self.radius_sq * (1.0 + 1e-12) + 1e-30
    }
}

fn move_to_front(
    x: &PointSet,
    order: &mut Vec<usize>,
    end: usize,
    support: &mut Vec<usize>,
) -> Option<RawBall> {
    let mut ball = ball_with_boundary(x, support);
    if support.len() == x.dim() + 1 {
        return ball;
    }
    for i in 0..end {
        let p = order[i];
        if ball.as_ref().is_some_and(|b| b.contains(x.point(p))) {
            continue;
        }
        support.push(p);
        ball = move_to_front(x, order, i, support);
        support.pop();
        order.remove(i);
        order.insert(0, p);
    }
    ball
}

/// Smallest ball with all of `support` on its boundary. Falls back to the
/// smallest enclosing ball of the support when the points are affinely
/// dependent in floating point.
fn ball_with_boundary(x: &PointSet, support: &[usize]) -> Option<RawBall> {
    if support.is_empty() {
        return None;
    }
    let pts: Vec<&[f64]> = support.iter().map(|&i| x.point(i)).collect();
    circumball(&pts).or_else(|| enclosing_ball_of_few(&pts))
}

fn enclosing_ball_of_few(pts: &[&[f64]]) -> Option<RawBall> {
    let m = pts.len();
    let mut best: Option<RawBall> = None;
    for mask in 1u32..(1 << m) {
        let subset: Vec<&[f64]> = (0..m).filter(|&j| mask & (1 << j) != 0).map(|j| pts[j]).collect();
        let Some(b) = circumball(&subset) else { continue };
        if pts.iter().all(|p| b.contains(p)) && best.as_ref().is_none_or(|c| b.radius_sq < c.radius_sq) {
            best = Some(b);
        }
    }
    best
}

/// Circumscribed ball of affinely independent points, centred in their affine
/// hull. `None` when the Gram system is numerically singular.
fn circumball(pts: &[&[f64]]) -> Option<RawBall> {
    let p0 = pts[0];
    let m = pts.len() - 1;
    let dirs: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let mut gram = vec![vec![0.0; m + 1]; m];
    for j in 0..m {
        for k in 0..m {
            gram[j][k] = dot(&dirs[j], &dirs[k]);
        }
        gram[j][m] = 0.5 * gram[j][j];
    }
    let mu = solve_augmented(gram)?;
    let mut center = p0.to_vec();
    for (coef, d) in mu.iter().zip(&dirs) {
        center.iter_mut().zip(d).for_each(|(c, v)| *c += coef * v);
    }
    let radius_sq = pts.iter().map(|p| dist_sq(&center, p)).fold(0.0, f64::max);
    Some(RawBall { center, radius_sq })
}

/// Gaussian elimination with partial pivoting on an `m x (m+1)` augmented
/// matrix.
pub(crate) fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    let scale = a.iter().enumerate().map(|(i, r)| r[i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=m {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut sol = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * sol[k]).sum();
        sol[row] = (a[row][m] - s) / a[row][row];
    }
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

/// A point `sum_i w_i x_i` of a simplex spanned by `points`, with strictly
/// positive weights summing to one.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    points: PointSet,
    weights: Vec<f64>,
}

impl ConvexCombination {
    pub fn new(points: PointSet, weights: Vec<f64>) -> Result<Self, GeometryError> {
        if points.len() != weights.len() {
            return Err(GeometryError::InvalidCombination(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(GeometryError::InvalidCombination(format!("weight {w} is not strictly positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TOL_WEIGHTS {
            return Err(GeometryError::InvalidCombination(format!("weights sum to {total}")));
        }
        Ok(ConvexCombination { points, weights })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Evaluates the combination as a point of Euclidean space.
pub fn eval_combination(c: &ConvexCombination) -> Vector {
    let mut out = vec![0.0; c.points.dim()];
    for (p, w) in c.points.iter().zip(&c.weights) {
        out.iter_mut().zip(p).for_each(|(o, x)| *o += w * x);
    }
    Vector::from_raw(out)
}

/// Support point nearest to the evaluated combination, with its distance.
/// Ties go to the lowest index.
///
/// By Jung's theorem the distance never exceeds `diameter(support) / R_n`.
pub fn jung_nearest(c: &ConvexCombination) -> (usize, f64) {
    let y = eval_combination(c);
    c.points
        .iter()
        .map(|p| dist(p, &y))
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best })
}
