//! Brute-force verification at desk scale: exhaustive grid minima of the
//! displacement, ball-window modulus estimates, tightness reports against
//! `eps / R_n`, and randomized checks of Jung's bound.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    diameter, dist, dist_sq, jung_nearest, jung_radius, min_enclosing_ball, norm, ConvexCombination,
    GeometryError, PointSet, Vector, TOL_GEOM,
};
use crate::maps::{modulus_estimate, ExtremalMap, MapError, SampledMap, SelfMap};
use crate::sampling::{random_weights, uniform_in_ball};

/// Default cap on lattice points per sweep.
pub const DEFAULT_BUDGET: usize = 10_000_000;

pub const DEFAULT_SEED: u64 = 0x0B_2A_0E_57;

/// Allowed excess of the grid minimum over `eps / R_n`, in grid steps.
pub const TIGHTNESS_STEP_FACTOR: f64 = 2.0;

/// Maps with at most this many distinct sampled values use the exact
/// distance-transform route in [`modulus_grid`].
const MAX_LABELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid needs {requested} points, budget is {budget}")]
    Budget { requested: f64, budget: usize },
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("tightness bracket violated: gap {} outside [-{TOL_GEOM}, {} * step]", .0.gap, TIGHTNESS_STEP_FACTOR)]
    TightnessViolated(Box<TightnessReport>),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Axis-aligned lattice on `[-1, 1]^n` with `points_per_axis` points per axis
/// (endpoints included).
///
/// With `clip` set, lattice points outside the ball are dropped, except those
/// within half a cell diagonal of the sphere, which are projected onto it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub clip: bool,
    pub budget: usize,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self, OracleError> {
        if dim == 0 {
            return Err(OracleError::InvalidSpec("dimension must be at least 1".into()));
        }
        if points_per_axis < 2 {
            return Err(OracleError::InvalidSpec("need at least 2 points per axis".into()));
        }
        Ok(GridSpec { dim, points_per_axis, clip: true, budget: DEFAULT_BUDGET })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_clip(mut self, clip: bool) -> Self {
        self.clip = clip;
        self
    }

    pub fn step(&self) -> f64 {
        2.0 / (self.points_per_axis - 1) as f64
    }

    fn cube_count(&self) -> f64 {
        (self.points_per_axis as f64).powi(self.dim as i32)
    }

    pub fn check_budget(&self) -> Result<usize, OracleError> {
        let requested = self.cube_count();
        if requested > self.budget as f64 {
            return Err(OracleError::Budget { requested, budget: self.budget });
        }
        Ok(requested as usize)
    }

    fn lattice_point(&self, mut linear: usize, out: &mut [f64]) {
        let last = (self.points_per_axis - 1) as f64;
        for c in out.iter_mut() {
            let k = linear % self.points_per_axis;
            linear /= self.points_per_axis;
            *c = (2.0 * k as f64 - last) / last;
        }
    }

    fn in_ball(p: &[f64]) -> bool {
        norm(p) <= 1.0 + 1e-12
    }

    /// The sample for lattice index `linear`, if any.
    pub fn sample(&self, linear: usize) -> Option<Vec<f64>> {
        let mut p = vec![0.0; self.dim];
        self.lattice_point(linear, &mut p);
        if !self.clip || Self::in_ball(&p) {
            return Some(p);
        }
        let r = norm(&p);
        let shell = self.step() * (self.dim as f64).sqrt() / 2.0;
        (r <= 1.0 + shell).then(|| p.iter().map(|c| c / r).collect())
    }

    /// Lattice points only (no projected shell), in lattice order.
    fn lattice_sample(&self, linear: usize) -> Option<Vec<f64>> {
        let mut p = vec![0.0; self.dim];
        self.lattice_point(linear, &mut p);
        (!self.clip || Self::in_ball(&p)).then_some(p)
    }

    pub fn points(&self) -> Result<PointSet, OracleError> {
        let total = self.check_budget()?;
        let flat: Vec<f64> = (0..total).into_par_iter().flat_map_iter(|k| self.sample(k).unwrap_or_default()).collect();
        Ok(PointSet::from_flat(self.dim, flat)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub argmin: Vector,
    pub value: f64,
    pub evaluated: usize,
}

fn check_dim<M: SelfMap + ?Sized>(f: &M, spec: &GridSpec) -> Result<(), OracleError> {
    if f.dim() != spec.dim {
        return Err(MapError::WrongDimension { expected: spec.dim, found: f.dim() }.into());
    }
    Ok(())
}

/// Exhaustive minimum of `|x - f(x)|` over the grid. Ties go to the first
/// point in lattice order.
pub fn min_displacement_grid<M: SelfMap + ?Sized>(f: &M, spec: &GridSpec) -> Result<GridMinimum, OracleError> {
    check_dim(f, spec)?;
    let total = spec.check_budget()?;
    type Acc = (Option<(f64, usize)>, usize);
    let merge = |a: Acc, b: Acc| -> Acc {
        let best = match (a.0, b.0) {
            (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
            (x, y) => x.or(y),
        };
        (best, a.1 + b.1)
    };
    let (best, evaluated) = (0..total)
        .into_par_iter()
        .map(|k| match spec.sample(k) {
            Some(p) => (Some((dist(&f.eval(&p), &p), k)), 1),
            None => (None, 0),
        })
        .reduce(|| (None, 0), merge);
    let (value, k) = best.ok_or_else(|| OracleError::InvalidSpec("grid has no points in the ball".into()))?;
    let argmin = Vector::new(spec.sample(k).expect("argmin is a sample"))?;
    Ok(GridMinimum { argmin, value, evaluated })
}

/// Writes `x_0, ..., x_{n-1}, displacement` for every grid sample.
pub fn write_displacement_csv<M: SelfMap + ?Sized, W: Write>(f: &M, spec: &GridSpec, mut out: W) -> std::io::Result<()> {
    let total = spec
        .check_budget()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    let header: Vec<String> = (0..spec.dim).map(|a| format!("x{a}")).chain(["displacement".to_string()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for k in 0..total {
        if let Some(p) = spec.sample(k) {
            let d = dist(&f.eval(&p), &p);
            let row: Vec<String> = p.iter().chain([&d]).map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub n: usize,
    pub eps: f64,
    pub points_per_axis: usize,
    pub grid_step: f64,
    pub evaluated: usize,
    pub min_displacement: f64,
    pub argmin: Vector,
    /// `eps / R_n`.
    pub theoretical_bound: f64,
    /// `min_displacement - theoretical_bound`.
    pub gap: f64,
}

impl TightnessReport {
    pub fn within_bracket(&self) -> bool {
        self.gap >= -TOL_GEOM && self.gap <= TIGHTNESS_STEP_FACTOR * self.grid_step
    }
}

/// Sweeps the extremal map for `(n, eps)` and checks that the grid minimum of
/// the displacement lies in `[eps/R_n - tol, eps/R_n + 2 step]`.
pub fn tightness_report(n: usize, eps: f64, spec: &GridSpec) -> Result<TightnessReport, OracleError> {
    if spec.dim != n {
        return Err(OracleError::InvalidSpec(format!("grid dimension {} differs from n = {n}", spec.dim)));
    }
    let map = ExtremalMap::new(n, eps)?;
    let bound = eps / jung_radius(n)?;
    let min = min_displacement_grid(&map, spec)?;
    let report = TightnessReport {
        n,
        eps,
        points_per_axis: spec.points_per_axis,
        grid_step: spec.step(),
        evaluated: min.evaluated,
        min_displacement: min.value,
        argmin: min.argmin,
        theoretical_bound: bound,
        gap: min.value - bound,
    };
    if !report.within_bracket() {
        return Err(OracleError::TightnessViolated(Box::new(report)));
    }
    Ok(report)
}

/// Ball-window modulus `max_z diam f(B[z, r] ∩ grid)` over the lattice points
/// of `spec` (the projected boundary shell is not used here).
///
/// For maps with few distinct values this is computed exactly through one
/// Euclidean distance transform per value; otherwise it falls back to a
/// neighbour scan.
pub fn modulus_grid<M: SelfMap + ?Sized>(f: &M, r: f64, spec: &GridSpec) -> Result<f64, OracleError> {
    check_dim(f, spec)?;
    if !(r > spec.step()) {
        return Err(OracleError::InvalidSpec(format!("radius {r} must exceed the grid step {}", spec.step())));
    }
    let total = spec.check_budget()?;
    match distinct_values(f, spec, total) {
        Some(labels) => Ok(modulus_by_distance_transform(f, r, spec, total, &labels)),
        None => modulus_by_scan(f, r, spec, total),
    }
}

fn value_key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|c| c.to_bits()).collect()
}

/// Distinct values of `f` on the lattice, in a canonical order, or `None` if
/// there are more than [`MAX_LABELS`].
fn distinct_values<M: SelfMap + ?Sized>(f: &M, spec: &GridSpec, total: usize) -> Option<Vec<Vec<f64>>> {
    let found = (0..total)
        .into_par_iter()
        .try_fold(HashSet::new, |mut acc, k| {
            if let Some(p) = spec.lattice_sample(k) {
                acc.insert(value_key(&f.eval(&p)));
            }
            (acc.len() <= MAX_LABELS).then_some(acc)
        })
        .try_reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            (a.len() <= MAX_LABELS).then_some(a)
        })?;
    let mut keys: Vec<Vec<u64>> = found.into_iter().collect();
    keys.sort();
    Some(keys.into_iter().map(|k| k.into_iter().map(f64::from_bits).collect()).collect())
}

fn modulus_by_distance_transform<M: SelfMap + ?Sized>(
    f: &M,
    r: f64,
    spec: &GridSpec,
    total: usize,
    labels: &[Vec<f64>],
) -> f64 {
    let lookup: HashMap<Vec<u64>, u8> = labels.iter().enumerate().map(|(i, v)| (value_key(v), i as u8)).collect();
    const OUTSIDE: u8 = u8::MAX;
    let label_of: Vec<u8> = (0..total)
        .into_par_iter()
        .map(|k| spec.lattice_sample(k).map_or(OUTSIDE, |p| lookup[&value_key(&f.eval(&p))]))
        .collect();

    let step = spec.step();
    let mut present = vec![0u64; total];
    let mut field = vec![0.0f64; total];
    for label in 0..labels.len() as u8 {
        field
            .par_iter_mut()
            .zip(&label_of)
            .for_each(|(d, &l)| *d = if l == label { 0.0 } else { f64::INFINITY });
        squared_distance_transform(&mut field, spec.points_per_axis, spec.dim);
        present.par_iter_mut().zip(&field).zip(&label_of).for_each(|((mask, &d2), &l)| {
            if l != OUTSIDE && d2.sqrt() * step <= r + TOL_GEOM {
                *mask |= 1 << label;
            }
        });
    }

    let pair_dist: Vec<Vec<f64>> = labels.iter().map(|a| labels.iter().map(|b| dist(a, b)).collect()).collect();
    let mut seen: HashSet<u64> = present.iter().copied().collect();
    seen.remove(&0);
    seen.into_iter()
        .map(|mask| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| mask & (1 << i) != 0).collect();
            let mut best: f64 = 0.0;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    best = best.max(pair_dist[i][j]);
                }
            }
            best
        })
        .fold(0.0, f64::max)
}

/// Exact squared Euclidean distance transform (in grid units) of a field that
/// is 0 on features and +inf elsewhere, one separable pass per axis.
fn squared_distance_transform(field: &mut [f64], side: usize, dim: usize) {
    let mut line = vec![0.0; side];
    let mut out = vec![0.0; side];
    let mut hull = vec![0usize; side];
    let mut bounds = vec![0.0f64; side + 1];
    for axis in 0..dim {
        let stride = side.pow(axis as u32);
        let block = stride * side;
        for base in (0..field.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = field[start + t * stride];
                }
                lower_envelope(&line, &mut out, &mut hull, &mut bounds);
                for (t, v) in out.iter().enumerate() {
                    field[start + t * stride] = *v;
                }
            }
        }
    }
}

/// One-dimensional pass: `out[q] = min_p (q - p)^2 + f[p]` via the lower
/// envelope of parabolas rooted at finite entries.
fn lower_envelope(f: &[f64], out: &mut [f64], hull: &mut [usize], bounds: &mut [f64]) {
    let mut finite = f.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(q, _)| q);
    let Some(first) = finite.next() else {
        out.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    hull[0] = first;
    bounds[0] = f64::NEG_INFINITY;
    bounds[1] = f64::INFINITY;
    let key = |q: usize| f[q] + (q * q) as f64;
    for q in finite {
        let mut s;
        loop {
            let p = hull[k];
            s = (key(q) - key(p)) / (2.0 * (q as f64 - p as f64));
            if s <= bounds[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= bounds[k] {
            // k == 0 and the new parabola dominates from the left end.
            hull[0] = q;
        } else {
            k += 1;
            hull[k] = q;
            bounds[k] = s;
        }
        bounds[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while bounds[k + 1] < q as f64 {
            k += 1;
        }
        let p = hull[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

fn modulus_by_scan<M: SelfMap + ?Sized>(f: &M, r: f64, spec: &GridSpec, total: usize) -> Result<f64, OracleError> {
    let flat: Vec<f64> = (0..total).into_par_iter().flat_map_iter(|k| spec.lattice_sample(k).unwrap_or_default()).collect();
    let points = PointSet::from_flat(spec.dim, flat)?;
    let sampled = SampledMap::from_map(f, points, 0.0)?;
    Ok(modulus_estimate(&sampled, r)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JungCheck {
    /// Some point of the set within `diam / R_n` of the combination.
    NearestVertex,
    /// Minimal enclosing ball radius at most `diam / R_n`.
    EnclosingBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JungCounterexample {
    pub trial: usize,
    pub check: JungCheck,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub diameter: f64,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JungSummary {
    pub dim: usize,
    pub trials: usize,
    pub points_per_set: usize,
    pub seed: u64,
    /// Largest `nearest distance / (diam / R_n)` over nondegenerate sets.
    pub max_nearest_ratio: f64,
    /// Largest `enclosing radius / (diam / R_n)` over nondegenerate sets.
    pub max_ball_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum JungOutcome {
    Pass(JungSummary),
    Counterexample(JungCounterexample),
}

/// Random point set and convex weights for one trial. One trial in ten
/// repeats a single point to exercise the degenerate case.
pub fn jung_trial_set(dim: usize, points_per_set: usize, seed: u64, trial: usize) -> (PointSet, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let m = rng.random_range(1..=points_per_set.max(1));
    let rows: Vec<Vec<f64>> = if rng.random_bool(0.1) {
        let p = uniform_in_ball(&mut rng, dim);
        vec![p; m]
    } else {
        (0..m).map(|_| uniform_in_ball(&mut rng, dim)).collect()
    };
    let weights = random_weights(&mut rng, m);
    (PointSet::from_rows(rows).expect("finite random points"), weights)
}

/// Checks Jung's bound on `trials` random sets: the nearest set point to a
/// random convex combination, and the minimal enclosing ball radius, are both
/// at most `diam / R_n`. Returns the first violation found.
pub fn jung_random_test(dim: usize, trials: usize, points_per_set: usize, seed: u64) -> Result<JungOutcome, OracleError> {
    let r_n = jung_radius(dim)?;
    let per_trial = |trial: usize| -> Result<(f64, f64), JungCounterexample> {
        let (set, weights) = jung_trial_set(dim, points_per_set, seed, trial);
        let d = diameter(&set);
        let bound = d / r_n;
        let combination = ConvexCombination::new(set.clone(), weights.clone()).expect("random weights are valid");
        let (_, nearest) = jung_nearest(&combination);
        let ball = min_enclosing_ball(&set);
        let counterexample = |check, observed| JungCounterexample {
            trial,
            check,
            points: set.to_rows(),
            weights: weights.clone(),
            diameter: d,
            observed,
            bound,
        };
        if nearest > bound + TOL_GEOM {
            return Err(counterexample(JungCheck::NearestVertex, nearest));
        }
        let spill = set.iter().map(|p| dist_sq(&ball.center, p).sqrt()).fold(0.0, f64::max);
        if ball.radius > bound + TOL_GEOM || spill > ball.radius + TOL_GEOM {
            return Err(counterexample(JungCheck::EnclosingBall, ball.radius.max(spill)));
        }
        Ok(if d > 0.0 { (nearest / bound, ball.radius / bound) } else { (0.0, 0.0) })
    };
    let results: Vec<Result<(f64, f64), JungCounterexample>> = (0..trials).into_par_iter().map(per_trial).collect();
    let mut max_nearest_ratio: f64 = 0.0;
    let mut max_ball_ratio: f64 = 0.0;
    for res in results {
        match res {
            Ok((a, b)) => {
                max_nearest_ratio = max_nearest_ratio.max(a);
                max_ball_ratio = max_ball_ratio.max(b);
            }
            Err(c) => return Ok(JungOutcome::Counterexample(c)),
        }
    }
    Ok(JungOutcome::Pass(JungSummary { dim, trials, points_per_set, seed, max_nearest_ratio, max_ball_ratio }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{identity_map, ConstantMap, StepMap1D};

    #[test]
    fn grid_spec_validation_and_budget() {
        assert!(GridSpec::new(0, 10).is_err());
        assert!(GridSpec::new(2, 1).is_err());
        let spec = GridSpec::new(4, 1000).unwrap();
        assert!(matches!(spec.check_budget(), Err(OracleError::Budget { .. })));
        assert!(matches!(
            min_displacement_grid(&identity_map(4), &spec),
            Err(OracleError::Budget { .. })
        ));
    }

    #[test]
    fn grid_contains_axis_endpoints_and_boundary_shell() {
        let spec = GridSpec::new(2, 11).unwrap();
        let pts = spec.points().unwrap();
        assert!(pts.iter().all(|p| norm(p) <= 1.0 + 1e-12));
        assert!(pts.iter().any(|p| p == [1.0, 0.0]));
        assert!(pts.iter().any(|p| p == [0.0, 0.0]));
        // projected shell points lie on the sphere
        assert!(pts.iter().any(|p| (norm(p) - 1.0).abs() < 1e-12 && p[0].abs() > 0.1 && p[1].abs() > 0.1));
    }

    #[test]
    fn identity_has_zero_displacement() {
        let m = min_displacement_grid(&identity_map(2), &GridSpec::new(2, 21).unwrap()).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn step_map_grid_minimum() {
        // Analytic: |x - 1/2| on [-1, 0] is smallest at x = 0; |x + 1/2| on
        // (0, 1] approaches 1/2 as x -> 0+.
        let step = StepMap1D::new(1.0).unwrap();
        let m = min_displacement_grid(&step, &GridSpec::new(1, 10_001).unwrap()).unwrap();
        assert_eq!(m.value, 0.5);
        assert_eq!(m.argmin.coords(), &[0.0]);
        let even = min_displacement_grid(&step, &GridSpec::new(1, 10_000).unwrap()).unwrap();
        assert!(even.value >= 0.5 && even.value <= 0.5 + 2.0 / 9999.0);
    }

    #[test]
    fn tightness_reports() {
        let r1 = tightness_report(1, 1.0, &GridSpec::new(1, 2001).unwrap()).unwrap();
        assert_eq!(r1.theoretical_bound, 0.5);
        assert!(r1.gap.abs() <= r1.grid_step);
        let r2 = tightness_report(2, 1.0, &GridSpec::new(2, 301).unwrap()).unwrap();
        assert!((r2.theoretical_bound - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r3 = tightness_report(3, 2.0, &GridSpec::new(3, 41).unwrap()).unwrap();
        assert!((r3.theoretical_bound - 2.0 / (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(tightness_report(2, 1.0, &GridSpec::new(3, 11).unwrap()).is_err());
    }

    #[test]
    fn displacement_minimum_refines_on_nested_grids() {
        let map = ExtremalMap::new(2, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for ppa in [6, 11, 21, 41, 81, 161] {
            let v = min_displacement_grid(&map, &GridSpec::new(2, ppa).unwrap()).unwrap().value;
            assert!(v <= prev + TOL_GEOM, "ppa={ppa}");
            assert!(v >= 1.0 / 3f64.sqrt() - TOL_GEOM);
            prev = v;
        }
    }

    #[test]
    fn modulus_examples() {
        let c = ConstantMap::new(Vector::new(vec![0.1, 0.2]).unwrap()).unwrap();
        assert_eq!(modulus_grid(&c, 0.2, &GridSpec::new(2, 41).unwrap()).unwrap(), 0.0);

        let ext = ExtremalMap::new(2, 1.0).unwrap();
        let v = modulus_grid(&ext, 0.1, &GridSpec::new(2, 201).unwrap()).unwrap();
        assert!((v - 1.0).abs() < TOL_GEOM);

        let step = StepMap1D::new(2.0).unwrap();
        assert_eq!(modulus_grid(&step, 0.05, &GridSpec::new(1, 201).unwrap()).unwrap(), 2.0);

        assert!(modulus_grid(&step, 0.001, &GridSpec::new(1, 201).unwrap()).is_err());
    }

    #[test]
    fn distance_transform_matches_neighbour_scan() {
        for (dim, ppa, r) in [(1, 101, 0.05), (2, 41, 0.1), (2, 40, 0.13), (3, 15, 0.3)] {
            let spec = GridSpec::new(dim, ppa).unwrap();
            let total = spec.check_budget().unwrap();
            // Scanning needs values inside the ball, so eps <= R_n.
            for eps in [0.3, 1.0, jung_radius(dim).unwrap()] {
                let ext = ExtremalMap::new(dim, eps).unwrap();
                let labels = distinct_values(&ext, &spec, total).unwrap();
                let fast = modulus_by_distance_transform(&ext, r, &spec, total, &labels);
                let slow = modulus_by_scan(&ext, r, &spec, total).unwrap();
                assert_eq!(fast, slow, "dim={dim} ppa={ppa} eps={eps}");
            }
        }
    }

    #[test]
    fn lower_envelope_matches_brute_force() {
        let f = [f64::INFINITY, 0.0, f64::INFINITY, f64::INFINITY, 3.0, f64::INFINITY, 0.0, f64::INFINITY];
        let mut out = vec![0.0; f.len()];
        let mut hull = vec![0; f.len()];
        let mut bounds = vec![0.0; f.len() + 1];
        lower_envelope(&f, &mut out, &mut hull, &mut bounds);
        for q in 0..f.len() {
            let brute = (0..f.len()).map(|p| (q as f64 - p as f64).powi(2) + f[p]).fold(f64::INFINITY, f64::min);
            assert_eq!(out[q], brute, "q={q}");
        }
        let empty = [f64::INFINITY; 4];
        let mut out = vec![0.0; 4];
        lower_envelope(&empty, &mut out, &mut hull, &mut bounds);
        assert!(out.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn jung_random_small() {
        for dim in 1..=3 {
            match jung_random_test(dim, 500, 8, DEFAULT_SEED).unwrap() {
                JungOutcome::Pass(s) => {
                    assert!(s.max_nearest_ratio <= 1.0 + 1e-9);
                    assert!(s.max_ball_ratio <= 1.0 + 1e-9);
                }
                JungOutcome::Counterexample(c) => panic!("{c:?}"),
            }
        }
        // midpoint of two points in 1-D sits exactly diam/2 from both
        match jung_random_test(1, 300, 2, 5).unwrap() {
            JungOutcome::Pass(s) => assert!(s.max_ball_ratio > 0.999),
            JungOutcome::Counterexample(c) => panic!("{c:?}"),
        }
    }

    #[test]
    fn jung_trials_are_deterministic() {
        let a = jung_trial_set(3, 6, 42, 17);
        let b = jung_trial_set(3, 6, 42, 17);
        assert_eq!(a.0.to_rows(), b.0.to_rows());
        assert_eq!(a.1, b.1);
        assert_eq!(jung_random_test(2, 200, 5, 9).unwrap(), jung_random_test(2, 200, 5, 9).unwrap());
    }

    #[test]
    fn csv_dump_rows() {
        let mut buf = Vec::new();
        let step = StepMap1D::new(1.0).unwrap();
        write_displacement_csv(&step, &GridSpec::new(1, 5).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x0,displacement\n-1,1.5\n-0.5,1\n0,0.5\n0.5,1\n1,1.5\n");
    }
}
