//! Self-maps of the unit ball: the discontinuous extremal constructions,
//! finitely sampled maps, and ε-continuity diagnostics on samples.

use std::collections::HashSet;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    dist, dot, jung_radius, norm, regular_simplex_vertices, GeometryError, PointSet, Vector, TOL_GEOM,
};
use crate::index::CellIndex;
use crate::sampling::uniform_in_ball;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("eps must lie in (0, 2], got {0}")]
    InvalidEps(f64),
    #[error("point {0} lies outside the unit ball")]
    OutsideBall(String),
    #[error("expected a map of dimension {expected}, got {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("sampled map has {points} domain points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("probe {probe:?} is {distance} from the nearest sample, beyond covering radius {covering_radius}")]
    CoveringViolation { probe: Vec<f64>, distance: f64, covering_radius: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A map `B^n -> B^n` that can be evaluated pointwise.
pub trait SelfMap: Sync {
    fn dim(&self) -> usize;

    /// Image of `x`. Callers pass points of the closed unit ball.
    fn eval(&self, x: &[f64]) -> Vector;
}

impl<M: SelfMap + ?Sized> SelfMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> Vector {
        (**self).eval(x)
    }
}

impl<M: SelfMap + ?Sized + Send> SelfMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> Vector {
        (**self).eval(x)
    }
}

/// Maps whose image is a known finite set.
pub trait FiniteImage {
    fn image_set(&self) -> PointSet;
}

pub fn image_diameter<M: FiniteImage + ?Sized>(m: &M) -> f64 {
    m.image_set().diameter()
}

fn check_eps(eps: f64) -> Result<f64, MapError> {
    if eps > 0.0 && eps <= 2.0 {
        Ok(eps)
    } else {
        Err(MapError::InvalidEps(eps))
    }
}

/// The one-dimensional extremal map: `eps/2` on `[-1, 0]`, `-eps/2` on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMap1D {
    eps: f64,
}

impl StepMap1D {
    pub fn new(eps: f64) -> Result<Self, MapError> {
        Ok(StepMap1D { eps: check_eps(eps)? })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn step_eval(&self, x: f64) -> Result<f64, MapError> {
        if !(x.abs() <= 1.0 + TOL_GEOM) {
            return Err(MapError::OutsideBall(format!("{x}")));
        }
        Ok(self.value_at(x))
    }

    fn value_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.eps / 2.0
        } else {
            -self.eps / 2.0
        }
    }
}

impl SelfMap for StepMap1D {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64]) -> Vector {
        Vector::from_raw(vec![self.value_at(x[0])])
    }
}

impl FiniteImage for StepMap1D {
    fn image_set(&self) -> PointSet {
        PointSet::from_flat(1, vec![self.eps / 2.0, -self.eps / 2.0]).expect("finite image")
    }
}

/// Rule assigning points on shared Voronoi walls to a single cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

/// Tolerance on inner products below which two sites count as equidistant.
const VORONOI_TIE_TOL: f64 = 1e-12;

/// The extremal map on `B^n`: every point of the cell `V_i` around the simplex
/// vertex `x_i` is sent to `-(eps/R_n) x_i`.
#[derive(Debug, Clone)]
pub struct ExtremalMap {
    dim: usize,
    eps: f64,
    scale: f64,
    vertices: PointSet,
    tie_break: TieBreak,
}

impl ExtremalMap {
    pub fn new(dim: usize, eps: f64) -> Result<Self, MapError> {
        Self::with_tie_break(dim, eps, TieBreak::LowestIndex)
    }

    pub fn with_tie_break(dim: usize, eps: f64, tie_break: TieBreak) -> Result<Self, MapError> {
        let eps = check_eps(eps)?;
        let vertices = regular_simplex_vertices(dim)?;
        let scale = eps / jung_radius(dim)?;
        Ok(ExtremalMap { dim, eps, scale, vertices, tie_break })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn vertices(&self) -> &PointSet {
        &self.vertices
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    /// Norm of every image point, `eps / R_n`.
    pub fn image_radius(&self) -> f64 {
        self.scale
    }

    /// Index of the cell containing `x`. Nearest vertex is the one with the
    /// largest inner product, since all vertices are unit vectors.
    pub fn voronoi_index(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_dot = dot(x, self.vertices.point(0));
        for i in 1..=self.dim {
            let d = dot(x, self.vertices.point(i));
            let wins = match self.tie_break {
                TieBreak::LowestIndex => d > best_dot + VORONOI_TIE_TOL,
                TieBreak::HighestIndex => d >= best_dot - VORONOI_TIE_TOL,
            };
            if wins {
                best = i;
                best_dot = d;
            }
        }
        best
    }

    pub fn image_of_cell(&self, i: usize) -> Vector {
        Vector::from_raw(self.vertices.point(i).iter().map(|c| -self.scale * c).collect())
    }
}

impl SelfMap for ExtremalMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Vector {
        self.image_of_cell(self.voronoi_index(x))
    }
}

impl FiniteImage for ExtremalMap {
    fn image_set(&self) -> PointSet {
        PointSet::new((0..=self.dim).map(|i| self.image_of_cell(i)).collect()).expect("finite image")
    }
}

/// `x -> c` for a fixed `c` in the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMap {
    value: Vector,
}

impl ConstantMap {
    pub fn new(value: Vector) -> Result<Self, MapError> {
        if value.norm() > 1.0 + TOL_GEOM {
            return Err(MapError::OutsideBall(format!("{:?}", value.coords())));
        }
        Ok(ConstantMap { value })
    }
}

impl SelfMap for ConstantMap {
    fn dim(&self) -> usize {
        self.value.dim()
    }

    fn eval(&self, _x: &[f64]) -> Vector {
        self.value.clone()
    }
}

impl FiniteImage for ConstantMap {
    fn image_set(&self) -> PointSet {
        PointSet::new(vec![self.value.clone()]).expect("finite image")
    }
}

/// Adapter turning a closure into a [`SelfMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnMap { dim, f }
    }
}

impl<F> SelfMap for FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Vector {
        Vector::from_raw((self.f)(x))
    }
}

/// Identity map on `B^n`.
pub fn identity_map(dim: usize) -> FnMap<impl Fn(&[f64]) -> Vec<f64> + Sync> {
    FnMap::new(dim, |x: &[f64]| x.to_vec())
}

/// Antipodal map `x -> -x` on `B^n`.
pub fn negation_map(dim: usize) -> FnMap<impl Fn(&[f64]) -> Vec<f64> + Sync> {
    FnMap::new(dim, |x: &[f64]| x.iter().map(|c| -c).collect())
}

/// A finite sample `Z` of the ball with values `f(Z)`.
///
/// Evaluated as a [`SelfMap`] it is the nearest-sample extension of `f|_Z`
/// (ties to the lowest sample index).
#[derive(Debug, Clone)]
pub struct SampledMap {
    points: PointSet,
    values: PointSet,
    covering_radius: f64,
    eps: Option<f64>,
    nearest: OnceLock<CellIndex>,
}

impl SampledMap {
    pub fn new(points: PointSet, values: PointSet, covering_radius: f64) -> Result<Self, MapError> {
        if points.len() != values.len() {
            return Err(MapError::LengthMismatch { points: points.len(), values: values.len() });
        }
        if points.dim() != values.dim() {
            return Err(MapError::WrongDimension { expected: points.dim(), found: values.dim() });
        }
        if !(covering_radius >= 0.0 && covering_radius.is_finite()) {
            return Err(MapError::NonPositive { name: "covering_radius", value: covering_radius });
        }
        for p in points.iter().chain(values.iter()) {
            if norm(p) > 1.0 + TOL_GEOM {
                return Err(MapError::OutsideBall(format!("{p:?}")));
            }
        }
        Ok(SampledMap { points, values, covering_radius, eps: None, nearest: OnceLock::new() })
    }

    /// Samples `f` on `points`, evaluating each point exactly once.
    pub fn from_map<M: SelfMap + ?Sized>(f: &M, points: PointSet, covering_radius: f64) -> Result<Self, MapError> {
        if f.dim() != points.dim() {
            return Err(MapError::WrongDimension { expected: points.dim(), found: f.dim() });
        }
        let dim = points.dim();
        let flat: Vec<f64> = (0..points.len())
            .into_par_iter()
            .flat_map_iter(|i| f.eval(points.point(i)).into_inner())
            .collect();
        let values = PointSet::from_flat(dim, flat)?;
        Self::new(points, values, covering_radius)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self, MapError> {
        self.eps = Some(check_eps(eps)?);
        Ok(self)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn values(&self) -> &PointSet {
        &self.values
    }

    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the declared covering radius against `probes` uniform random
    /// points of the ball. Returns the first probe that is not covered.
    pub fn verify_covering(&self, probes: usize, seed: u64) -> Result<(), MapError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let index = self.nearest_index();
        for _ in 0..probes {
            let probe = uniform_in_ball(&mut rng, self.dim());
            let (_, d) = index.nearest(&self.points, &probe).expect("nonempty sample");
            if d > self.covering_radius + TOL_GEOM {
                return Err(MapError::CoveringViolation {
                    probe,
                    distance: d,
                    covering_radius: self.covering_radius,
                });
            }
        }
        Ok(())
    }

    fn nearest_index(&self) -> &CellIndex {
        self.nearest.get_or_init(|| {
            let n = self.points.len() as f64;
            let cell = if self.covering_radius > 0.0 {
                2.0 * self.covering_radius
            } else {
                2.0 / n.powf(1.0 / self.dim() as f64)
            };
            CellIndex::new(&self.points, cell.max(1e-6))
        })
    }

    pub(crate) fn nearest_sample(&self, x: &[f64]) -> (usize, f64) {
        self.nearest_index().nearest(&self.points, x).expect("nonempty sample")
    }
}

impl SelfMap for SampledMap {
    fn dim(&self) -> usize {
        self.points.dim()
    }

    fn eval(&self, x: &[f64]) -> Vector {
        let (i, _) = self.nearest_sample(x);
        Vector::from_raw(self.values.point(i).to_vec())
    }
}

impl FiniteImage for SampledMap {
    fn image_set(&self) -> PointSet {
        self.values.clone()
    }
}

/// Ball-based estimate of the modulus of discontinuity at scale `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub scale: f64,
    pub value: f64,
}

/// Largest image diameter of a closed `r`-ball of samples:
/// `max_z diam { f(z') : |z' - z| <= r }`.
pub fn modulus_estimate(m: &SampledMap, r: f64) -> Result<ModulusEstimate, MapError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(MapError::NonPositive { name: "r", value: r });
    }
    let points = &m.points;
    let index = CellIndex::new(points, r);
    let value = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut seen = HashSet::new();
            let mut window: Vec<&[f64]> = Vec::new();
            index.for_each_candidate(points.point(i), r, |j| {
                if dist(points.point(j), points.point(i)) <= r + TOL_GEOM {
                    let v = m.values.point(j);
                    let key: Vec<u64> = v.iter().map(|c| c.to_bits()).collect();
                    if seen.insert(key) {
                        window.push(v);
                    }
                }
            });
            let mut d2: f64 = 0.0;
            for a in 0..window.len() {
                for b in a + 1..window.len() {
                    d2 = d2.max(crate::geometry::dist_sq(window[a], window[b]));
                }
            }
            d2.sqrt()
        })
        .reduce(|| 0.0, f64::max);
    Ok(ModulusEstimate { scale: r, value })
}

/// A pair of nearby sample points that `f` pushes in opposite directions by
/// more than `eps_prime`, certifying a large image jump between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityWitness1D {
    /// Point moved right: `f(y_r) - y_r > eps_prime`.
    pub y_r: f64,
    /// Point moved left: `y_l - f(y_l) > eps_prime`.
    pub y_l: f64,
    pub f_y_r: f64,
    pub f_y_l: f64,
    pub image_gap: f64,
}

impl DiscontinuityWitness1D {
    /// `f(y_r) - f(y_l) > 2 eps' - |y_l - y_r|`.
    pub fn satisfies_gap_inequality(&self, eps_prime: f64) -> bool {
        self.image_gap > 2.0 * eps_prime - (self.y_l - self.y_r).abs()
    }
}

/// Outcome of the one-dimensional witness search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessSearch {
    Witness(DiscontinuityWitness1D),
    /// A sample with `|x - f(x)| < eps_prime`: no witness is needed.
    FixedPoint { x: f64, fx: f64, displacement: f64 },
    /// Either side of the right/left split is empty, or no crossing pair is
    /// within `resolution`.
    NoWitness,
}

/// Searches a sampled map of `[-1, 1]` for a discontinuity witness.
///
/// Samples are split into those moved right by more than `eps_prime` and
/// those moved left by more than `eps_prime`. If some sample moves by less
/// than `eps_prime`, the one moving least (smallest `x` on ties) is reported
/// instead.
/// Otherwise the first adjacent crossing pair at distance at most
/// `resolution` is returned.
pub fn discontinuity_witness_1d(m: &SampledMap, eps_prime: f64, resolution: f64) -> Result<WitnessSearch, MapError> {
    if m.dim() != 1 {
        return Err(MapError::WrongDimension { expected: 1, found: m.dim() });
    }
    if !(eps_prime > 0.0) {
        return Err(MapError::NonPositive { name: "eps_prime", value: eps_prime });
    }
    if !(resolution > 0.0) {
        return Err(MapError::NonPositive { name: "resolution", value: resolution });
    }
    let mut samples: Vec<(f64, f64)> = (0..m.len()).map(|i| (m.points.point(i)[0], m.values.point(i)[0])).collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let closest = samples
        .iter()
        .map(|&(x, fx)| (x, fx, (x - fx).abs()))
        .fold(None, |best: Option<(f64, f64, f64)>, c| match best {
            Some(b) if b.2 <= c.2 => Some(b),
            _ => Some(c),
        });
    if let Some((x, fx, displacement)) = closest.filter(|c| c.2 < eps_prime) {
        return Ok(WitnessSearch::FixedPoint { x, fx, displacement });
    }
    let moves_right = |&(x, fx): &(f64, f64)| fx - x > eps_prime;
    if samples.iter().all(moves_right) || !samples.iter().any(moves_right) {
        return Ok(WitnessSearch::NoWitness);
    }
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if moves_right(&a) == moves_right(&b) || b.0 - a.0 > resolution + TOL_GEOM {
            continue;
        }
        let ((y_r, f_y_r), (y_l, f_y_l)) = if moves_right(&a) { (a, b) } else { (b, a) };
        return Ok(WitnessSearch::Witness(DiscontinuityWitness1D {
            y_r,
            y_l,
            f_y_r,
            f_y_l,
            image_gap: f_y_r - f_y_l,
        }));
    }
    Ok(WitnessSearch::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(lo: i32, hi: i32, h: f64) -> PointSet {
        PointSet::from_flat(1, (lo..=hi).map(|k| k as f64 * h).collect()).unwrap()
    }

    #[test]
    fn step_eval_examples() {
        let m = StepMap1D::new(1.0).unwrap();
        assert_eq!(m.step_eval(-0.5).unwrap(), 0.5);
        assert_eq!(m.step_eval(0.0).unwrap(), 0.5);
        assert_eq!(StepMap1D::new(2.0).unwrap().step_eval(0.3).unwrap(), -1.0);
        assert!(matches!(m.step_eval(1.5), Err(MapError::OutsideBall(_))));
        assert_eq!(StepMap1D::new(2.5).unwrap_err(), MapError::InvalidEps(2.5));
        assert_eq!(StepMap1D::new(0.0).unwrap_err(), MapError::InvalidEps(0.0));
    }

    #[test]
    fn voronoi_index_examples() {
        let m = ExtremalMap::new(2, 1.0).unwrap();
        let x0 = m.vertices().point(0).to_vec();
        assert_eq!(m.voronoi_index(&x0), 0);
        assert_eq!(m.voronoi_index(&[0.0, 0.0]), 0);
        let x2: Vec<f64> = m.vertices().point(2).iter().map(|c| 0.9 * c).collect();
        // direct comparison of distances to all three sites
        let nearest = (0..3)
            .min_by(|&a, &b| dist(&x2, m.vertices().point(a)).total_cmp(&dist(&x2, m.vertices().point(b))))
            .unwrap();
        assert_eq!(nearest, 2);
        assert_eq!(m.voronoi_index(&x2), 2);
        let high = ExtremalMap::with_tie_break(2, 1.0, TieBreak::HighestIndex).unwrap();
        assert_eq!(high.voronoi_index(&[0.0, 0.0]), 2);
    }

    #[test]
    fn extremal_eval_examples() {
        let m1 = ExtremalMap::new(1, 1.0).unwrap();
        assert!((m1.eval(&[-0.2])[0] - 0.5).abs() < TOL_GEOM);

        let m2 = ExtremalMap::new(2, 1.0).unwrap();
        let y = m2.eval(&[0.0, 0.0]);
        let expected: Vec<f64> = m2.vertices().point(0).iter().map(|c| -c / 3f64.sqrt()).collect();
        assert!(dist(&y, &expected) < TOL_GEOM);
        assert!((y.norm() - 1.0 / 3f64.sqrt()).abs() < TOL_GEOM);

        for n in 1..=4 {
            let m = ExtremalMap::new(n, 2.0).unwrap();
            let r = jung_radius(n).unwrap();
            for i in 0..=n {
                let xi: Vec<f64> = m.vertices().point(i).iter().map(|c| 0.5 * c).collect();
                let y = m.eval(&xi);
                assert!((y.norm() - 2.0 / r).abs() < TOL_GEOM);
                let expected: Vec<f64> = m.vertices().point(i).iter().map(|c| -2.0 / r * c).collect();
                assert!(dist(&y, &expected) < TOL_GEOM);
                // 2/R_n <= 1 only on the line; in higher dimension the image leaves the ball.
                assert_eq!(y.norm() <= 1.0 + TOL_GEOM, n == 1);
            }
        }
    }

    #[test]
    fn image_diameters() {
        assert_eq!(image_diameter(&StepMap1D::new(1.0).unwrap()), 1.0);
        for n in 1..=4 {
            for eps in [0.1, 1.0, 2.0] {
                let d = image_diameter(&ExtremalMap::new(n, eps).unwrap());
                assert!((d - eps).abs() < TOL_GEOM, "n={n} eps={eps} d={d}");
            }
        }
        let c = ConstantMap::new(Vector::new(vec![0.2, 0.1]).unwrap()).unwrap();
        let s = SampledMap::from_map(&c, grid_2d(11), 0.2).unwrap();
        assert_eq!(image_diameter(&s), 0.0);
    }

    fn grid_2d(k: i32) -> PointSet {
        let h = 1.0 / k as f64;
        let mut rows = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                let p = vec![i as f64 * h, j as f64 * h];
                if norm(&p) <= 1.0 {
                    rows.push(p);
                }
            }
        }
        PointSet::from_rows(rows).unwrap()
    }

    #[test]
    fn extremal_n1_agrees_with_step_map() {
        let step = StepMap1D::new(1.3).unwrap();
        let low = ExtremalMap::new(1, 1.3).unwrap();
        let high = ExtremalMap::with_tie_break(1, 1.3, TieBreak::HighestIndex).unwrap();
        for k in -1000..=1000 {
            let x = k as f64 / 1000.0;
            let s = step.step_eval(x).unwrap();
            assert!((low.eval(&[x])[0] - s).abs() < TOL_GEOM, "x={x}");
            if k != 0 {
                assert!((high.eval(&[x])[0] - s).abs() < TOL_GEOM, "x={x}");
            }
        }
        assert!((high.eval(&[0.0])[0] - step.step_eval(0.0).unwrap()).abs() > 1.0);
    }

    #[test]
    fn sampled_map_validation() {
        let pts = grid_1d(-2, 2, 0.5);
        let vals = grid_1d(-1, 2, 0.5);
        assert!(matches!(SampledMap::new(pts.clone(), vals, 0.25), Err(MapError::LengthMismatch { .. })));
        let outside = PointSet::from_flat(1, vec![0.0, 0.0, 0.0, 0.0, 1.5]).unwrap();
        assert!(matches!(SampledMap::new(pts.clone(), outside, 0.25), Err(MapError::OutsideBall(_))));
        assert!(SampledMap::new(pts.clone(), pts.clone(), -1.0).is_err());
        let id = SampledMap::new(pts.clone(), pts, 0.25).unwrap();
        assert_eq!(id.eval(&[0.3]).coords(), &[0.5]);
        assert_eq!(id.eval(&[0.25]).coords(), &[0.0]);
    }

    #[test]
    fn covering_probe_check() {
        // Clipping the lattice to the disk leaves gaps near the circle wider
        // than half a cell diagonal.
        let fine = SampledMap::from_map(&identity_map(2), grid_2d(20), 0.05 * 2f64.sqrt()).unwrap();
        assert!(fine.verify_covering(2000, 3).is_ok());
        let lying = SampledMap::from_map(&identity_map(2), grid_2d(4), 0.01).unwrap();
        assert!(matches!(lying.verify_covering(2000, 3), Err(MapError::CoveringViolation { .. })));
    }

    #[test]
    fn modulus_examples() {
        let c = ConstantMap::new(Vector::new(vec![0.4]).unwrap()).unwrap();
        let grid = grid_1d(-100, 100, 0.01);
        let sc = SampledMap::from_map(&c, grid.clone(), 0.005).unwrap();
        assert_eq!(modulus_estimate(&sc, 0.3).unwrap().value, 0.0);

        let step = StepMap1D::new(1.0).unwrap();
        let s = SampledMap::from_map(&step, grid, 0.005).unwrap();
        assert_eq!(modulus_estimate(&s, 0.05).unwrap().value, 1.0);

        let right = SampledMap::from_map(&step, grid_1d(1, 100, 0.01), 0.005).unwrap();
        assert_eq!(modulus_estimate(&right, 0.05).unwrap().value, 0.0);

        assert!(modulus_estimate(&s, 0.0).is_err());
        assert!(modulus_estimate(&s, -1.0).is_err());
    }

    #[test]
    fn modulus_is_monotone_in_scale() {
        let s = SampledMap::from_map(&negation_map(2), grid_2d(10), 0.1).unwrap();
        let mut prev = 0.0;
        for r in [0.05, 0.1, 0.15, 0.2, 0.4, 0.8, 2.0] {
            let v = modulus_estimate(&s, r).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
        assert!((prev - s.values().diameter()).abs() < TOL_GEOM);
    }

    #[test]
    fn witness_found_below_half_eps() {
        let step = StepMap1D::new(1.0).unwrap();
        let s = SampledMap::from_map(&step, grid_1d(-100, 100, 0.01), 0.005).unwrap();
        match discontinuity_witness_1d(&s, 0.45, 0.01 + 1e-12).unwrap() {
            WitnessSearch::Witness(w) => {
                assert_eq!(w.y_r, 0.0);
                assert_eq!(w.y_l, 0.01);
                assert_eq!(w.image_gap, 1.0);
                assert!(w.satisfies_gap_inequality(0.45));
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn fixed_point_reported_above_half_eps() {
        let step = StepMap1D::new(1.0).unwrap();
        let s = SampledMap::from_map(&step, grid_1d(-100, 100, 0.01), 0.005).unwrap();
        for eps_prime in [0.55, 0.6] {
            match discontinuity_witness_1d(&s, eps_prime, 0.011).unwrap() {
                WitnessSearch::FixedPoint { x, displacement, .. } => {
                    assert_eq!(x, 0.0);
                    assert_eq!(displacement, 0.5);
                }
                other => panic!("expected fixed point, got {other:?}"),
            }
        }
    }

    #[test]
    fn clamped_shift_has_boundary_fixed_point() {
        let f = FnMap::new(1, |x: &[f64]| vec![(x[0] + 0.9).min(1.0)]);
        let s = SampledMap::from_map(&f, grid_1d(-100, 100, 0.01), 0.005).unwrap();
        match discontinuity_witness_1d(&s, 0.5, 0.01).unwrap() {
            WitnessSearch::FixedPoint { x, displacement, .. } => {
                assert_eq!(displacement, 0.0);
                assert_eq!(x, 1.0);
            }
            other => panic!("expected fixed point, got {other:?}"),
        }
    }

    #[test]
    fn witness_needs_both_sides() {
        let f = FnMap::new(1, |x: &[f64]| vec![if x[0] < 0.0 { 1.0 } else { -1.0 }]);
        // Samples only on the left: everything moves right.
        let left = SampledMap::from_map(&f, grid_1d(-100, -60, 0.01), 0.005).unwrap();
        assert_eq!(discontinuity_witness_1d(&left, 0.5, 0.01).unwrap(), WitnessSearch::NoWitness);
        // Gap between the sides wider than the resolution.
        let mut rows: Vec<f64> = (-100..=-10).map(|k| k as f64 * 0.01).collect();
        rows.extend((10..=100).map(|k| k as f64 * 0.01));
        let sparse = SampledMap::from_map(&f, PointSet::from_flat(1, rows).unwrap(), 0.1).unwrap();
        assert_eq!(discontinuity_witness_1d(&sparse, 0.5, 0.05).unwrap(), WitnessSearch::NoWitness);
        assert!(matches!(discontinuity_witness_1d(&sparse, 0.5, 0.25).unwrap(), WitnessSearch::Witness(_)));
    }
}
