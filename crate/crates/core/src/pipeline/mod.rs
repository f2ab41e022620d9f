//! Constructive approximate-fixed-point pipeline for ε-continuous maps.
//!
//! A dense sample `Z` of the ball is embedded into the Vietoris–Rips complex
//! `VR(Z; alpha)` by tent-function partitions of unity, pushed forward by the
//! sampled map, and averaged back into the ball. The resulting map `F` is
//! continuous, so it has a fixed point `y`; some sample in the support of `y`
//! is then an ε′-fixed point of the original map, and the certificate records
//! every term of the bound.

mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use solver::{find_fixed_point, FixedPointResult, SolverStage};

use crate::geometry::{
    dist, jung_radius, ConvexCombination, GeometryError, PointSet, Vector, TOL_GEOM,
};
use crate::index::CellIndex;
use crate::maps::{MapError, SampledMap, SelfMap};

/// Fraction of `alpha / sqrt(n)` kept as lattice spacing. The sample then
/// covers the ball with radius `0.9 * alpha / 2`, strictly inside the tent
/// supports.
pub const GRID_SAFETY: f64 = 0.1;

pub const DEFAULT_GRID_BUDGET: usize = 2_000_000;
pub const DEFAULT_SOLVER_BUDGET: usize = 2_000_000;
pub const DEFAULT_FP_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ALPHA_HALVINGS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("eps_prime = {eps_prime} does not exceed eps / R_n = {bound}")]
    Hypothesis { eps_prime: f64, bound: f64 },
    #[error("invalid pipeline parameters: {0}")]
    InvalidParams(String),
    #[error("sample grid for alpha = {alpha} needs {requested} lattice points, budget is {budget}; smallest feasible alpha is {min_alpha}")]
    GridBudget { alpha: f64, requested: f64, budget: usize, min_alpha: f64 },
    #[error("no sample within alpha/2 of {y:?}: the grid does not cover the ball")]
    CoveringViolation { y: Vec<f64> },
    #[error("fixed-point search stopped after {evaluations} evaluations with best residual {best_residual}")]
    NoConvergence { best_residual: f64, evaluations: usize },
    #[error("image jump {image_distance} between samples {pair:?} persists down to alpha = {alpha}")]
    AlphaExhausted { alpha: f64, pair: (usize, usize), image_distance: f64 },
    #[error("certificate inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Parameters of one pipeline run, validated against the certificate chain
/// `(eps + gamma) / R_n + alpha / 2 + fp_tol < eps_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub dim: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub fp_tol: f64,
}

impl PipelineParams {
    pub fn new(dim: usize, eps: f64, eps_prime: f64, gamma: f64, alpha: f64, fp_tol: f64) -> Result<Self, PipelineError> {
        let r = jung_radius(dim)?;
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(MapError::InvalidEps(eps).into());
        }
        if !(eps_prime > eps / r) {
            return Err(PipelineError::Hypothesis { eps_prime, bound: eps / r });
        }
        if !(gamma > 0.0 && gamma < r * eps_prime - eps) {
            return Err(PipelineError::InvalidParams(format!(
                "gamma = {gamma} must lie in (0, {})",
                r * eps_prime - eps
            )));
        }
        if !(alpha > 0.0 && fp_tol > 0.0) {
            return Err(PipelineError::InvalidParams("alpha and fp_tol must be positive".into()));
        }
        let params = PipelineParams { dim, eps, eps_prime, gamma, alpha, fp_tol };
        if !(params.certified_bound() < eps_prime) {
            return Err(PipelineError::InvalidParams(format!(
                "(eps + gamma)/R_n + alpha/2 + fp_tol = {} is not below eps_prime = {eps_prime}",
                params.certified_bound()
            )));
        }
        Ok(params)
    }

    pub fn jung_radius(&self) -> f64 {
        jung_radius(self.dim).expect("validated dimension")
    }

    /// `(eps + gamma) / R_n`: Jung bound for a simplex whose image has
    /// diameter at most `eps + gamma`.
    pub fn jung_term(&self) -> f64 {
        (self.eps + self.gamma) / self.jung_radius()
    }

    pub fn certified_bound(&self) -> f64 {
        self.jung_term() + self.alpha / 2.0 + self.fp_tol
    }
}

/// Samples of the map on a lattice dense enough that closed balls of radius
/// `0.9 * alpha / 2` around them cover the ball.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    map: SampledMap,
    alpha: f64,
    index: CellIndex,
}

impl SampleGrid {
    pub fn map(&self) -> &SampledMap {
        &self.map
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn points(&self) -> &PointSet {
        self.map.points()
    }

    pub fn values(&self) -> &PointSet {
        self.map.values()
    }
}

struct Lattice {
    spacing: f64,
    reach: i64,
    cover: f64,
}

fn lattice_for(dim: usize, alpha: f64) -> Lattice {
    let spacing = alpha / (dim as f64).sqrt() * (1.0 - GRID_SAFETY);
    let cover = spacing * (dim as f64).sqrt() / 2.0;
    let reach = ((1.0 + cover) / spacing).floor() as i64;
    Lattice { spacing, reach, cover }
}

fn lattice_count(dim: usize, alpha: f64) -> f64 {
    ((2 * lattice_for(dim, alpha).reach + 1) as f64).powi(dim as i32)
}

/// Builds the sample grid for `alpha` and evaluates `f` once per sample.
///
/// Lattice points of spacing `0.9 alpha / sqrt(n)` inside the ball are kept;
/// lattice points just outside (within the covering radius) are projected
/// radially onto the sphere. Projection onto the ball is 1-Lipschitz, so every
/// point of the ball stays within the covering radius of a sample.
pub fn build_sample_grid<M: SelfMap + ?Sized>(
    dim: usize,
    alpha: f64,
    f: &M,
    budget: usize,
) -> Result<SampleGrid, PipelineError> {
    if dim == 0 || f.dim() != dim {
        return Err(MapError::WrongDimension { expected: dim, found: f.dim() }.into());
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PipelineError::InvalidParams(format!("alpha must be positive, got {alpha}")));
    }
    let requested = lattice_count(dim, alpha);
    if requested > budget as f64 {
        return Err(PipelineError::GridBudget { alpha, requested, budget, min_alpha: min_feasible_alpha(dim, budget) });
    }
    let lat = lattice_for(dim, alpha);
    let side = (2 * lat.reach + 1) as usize;
    let mut coords = Vec::new();
    let mut idx = vec![0usize; dim];
    let mut p = vec![0.0; dim];
    'outer: loop {
        for a in 0..dim {
            p[a] = (idx[a] as i64 - lat.reach) as f64 * lat.spacing;
        }
        let r = crate::geometry::norm(&p);
        if r <= 1.0 {
            coords.extend_from_slice(&p);
        } else if r <= 1.0 + lat.cover {
            coords.extend(p.iter().map(|c| c / r));
        }
        for a in 0..dim {
            idx[a] += 1;
            if idx[a] < side {
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }
    let points = PointSet::from_flat(dim, coords)?;
    let map = SampledMap::from_map(f, points, lat.cover)?;
    let index = CellIndex::new(map.points(), alpha / 2.0);
    Ok(SampleGrid { map, alpha, index })
}

fn min_feasible_alpha(dim: usize, budget: usize) -> f64 {
    let mut alpha = 1e-12_f64.max(2.0 * (dim as f64).sqrt() / (budget as f64).powf(1.0 / dim as f64));
    while lattice_count(dim, alpha) > budget as f64 {
        alpha *= 1.01;
    }
    alpha
}

/// Image of a point under the partition-of-unity embedding into the Rips
/// complex: the samples within `alpha / 2` and their normalised tent weights.
#[derive(Debug, Clone)]
pub struct EmbeddedPoint {
    pub support: Vec<usize>,
    pub combination: ConvexCombination,
    /// Sum of the unnormalised tent weights.
    pub mass: f64,
}

struct Tents {
    support: Vec<usize>,
    weights: Vec<f64>,
    mass: f64,
}

fn tents(y: &[f64], grid: &SampleGrid) -> Result<Tents, PipelineError> {
    let half = grid.alpha / 2.0;
    let pts = grid.map.points();
    let mut support = Vec::new();
    let mut raw = Vec::new();
    grid.index.for_each_candidate(y, half, |i| {
        let d = dist(pts.point(i), y);
        if d < half {
            support.push(i);
            raw.push(half - d);
        }
    });
    if support.is_empty() {
        return Err(PipelineError::CoveringViolation { y: y.to_vec() });
    }
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_unstable_by_key(|&k| support[k]);
    let support: Vec<usize> = order.iter().map(|&k| support[k]).collect();
    let raw: Vec<f64> = order.iter().map(|&k| raw[k]).collect();
    let mass: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / mass).collect();
    Ok(Tents { support, weights, mass })
}

/// Tent weight `alpha/2 - |z - y|` on every sample in the open ball of radius
/// `alpha / 2` around `y`, normalised to sum to one.
pub fn embed(y: &[f64], grid: &SampleGrid) -> Result<EmbeddedPoint, PipelineError> {
    let t = tents(y, grid)?;
    let dim = grid.map.dim();
    let mut coords = Vec::with_capacity(dim * t.support.len());
    for &i in &t.support {
        coords.extend_from_slice(grid.map.points().point(i));
    }
    let combination = ConvexCombination::new(PointSet::from_flat(dim, coords)?, t.weights)?;
    Ok(EmbeddedPoint { support: t.support, combination, mass: t.mass })
}

/// `F(y) = sum_i w_i(y) f(z_i)`: the averaged image of the embedded point.
pub fn averaged_map_eval(y: &[f64], grid: &SampleGrid) -> Result<Vector, PipelineError> {
    let t = tents(y, grid)?;
    Ok(average_values(grid, &t))
}

fn average_values(grid: &SampleGrid, t: &Tents) -> Vector {
    let mut out = vec![0.0; grid.map.dim()];
    for (&i, w) in t.support.iter().zip(&t.weights) {
        out.iter_mut().zip(grid.map.values().point(i)).for_each(|(o, v)| *o += w * v);
    }
    Vector::from_raw(out)
}

/// Result of checking that sampled Rips edges map to short image edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimplicialCheck {
    Pass,
    /// Lexicographically first edge of `VR(Z; alpha)` whose image is longer
    /// than the bound.
    Witness { pair: (usize, usize), image_distance: f64 },
}

/// Checks `|f(z) - f(z')| <= bound` for every pair of samples with
/// `|z - z'| <= alpha`. Rips simplices are cliques, so edges suffice.
pub fn simplicial_image_check(grid: &SampleGrid, alpha: f64, bound: f64) -> SimplicialCheck {
    let pts = grid.map.points();
    let vals = grid.map.values();
    let hit = (0..pts.len()).into_par_iter().find_map_first(|i| {
        let mut first: Option<(usize, f64)> = None;
        grid.index.for_each_candidate(pts.point(i), alpha, |j| {
            if j <= i || first.is_some_and(|(k, _)| k < j) {
                return;
            }
            if dist(pts.point(i), pts.point(j)) <= alpha {
                let d = dist(vals.point(i), vals.point(j));
                if d > bound {
                    first = Some((j, d));
                }
            }
        });
        first.map(|(j, d)| ((i, j), d))
    });
    match hit {
        None => SimplicialCheck::Pass,
        Some((pair, image_distance)) => SimplicialCheck::Witness { pair, image_distance },
    }
}

/// A sample point certified to be an ε′-fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsFixedPointCertificate {
    pub sample_index: usize,
    pub z: Vector,
    pub fz: Vector,
    /// `|f(z) - z|`.
    pub displacement: f64,
    /// The target `eps_prime`.
    pub bound: f64,
    /// `(eps + gamma) / R_n + alpha / 2 + fp_tol`.
    pub certified_bound: f64,
    /// Fixed point of the averaged map the certificate was extracted from.
    pub y: Vector,
    pub residual: f64,
    /// `|f(z) - F(y)|`, at most `(eps + gamma) / R_n` by Jung's theorem.
    pub jung_distance: f64,
    /// `|z - y|`, below `alpha / 2`.
    pub proximity: f64,
}

/// Picks the support sample of `embed(y)` whose image is nearest to `F(y)`
/// and checks the triangle-inequality chain term by term.
pub fn extract_certificate(
    fp: &FixedPointResult,
    grid: &SampleGrid,
    params: &PipelineParams,
) -> Result<EpsFixedPointCertificate, PipelineError> {
    if fp.residual > params.fp_tol {
        return Err(PipelineError::Inconsistent(format!(
            "solver residual {} exceeds fp_tol {}",
            fp.residual, params.fp_tol
        )));
    }
    let t = tents(&fp.y, grid)?;
    let fy = average_values(grid, &t);
    let residual = dist(&fy, &fp.y);
    let vals = grid.map.values();
    let (sample_index, jung_distance) = t
        .support
        .iter()
        .map(|&i| (i, dist(vals.point(i), &fy)))
        .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let z = grid.map.points().point(sample_index);
    let fz = vals.point(sample_index);
    let proximity = dist(z, &fp.y);
    let displacement = dist(fz, z);

    let checks = [
        (jung_distance <= params.jung_term() + TOL_GEOM, "support image exceeds the Jung bound; rerun the simplicial check"),
        (proximity < params.alpha / 2.0, "selected sample lies outside the tent support"),
        (residual <= params.fp_tol, "recomputed residual exceeds fp_tol"),
        (displacement <= jung_distance + proximity + residual + TOL_GEOM, "triangle inequality failed"),
        (displacement < params.eps_prime, "displacement does not beat eps_prime"),
    ];
    if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(PipelineError::Inconsistent((*msg).to_string()));
    }
    Ok(EpsFixedPointCertificate {
        sample_index,
        z: Vector::from_raw(z.to_vec()),
        fz: Vector::from_raw(fz.to_vec()),
        displacement,
        bound: params.eps_prime,
        certified_bound: params.certified_bound(),
        y: fp.y.clone(),
        residual,
        jung_distance,
        proximity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub grid_budget: usize,
    pub solver_budget: usize,
    pub fp_tol: f64,
    pub max_alpha_halvings: usize,
    /// Initial alpha; defaults to `eps`.
    pub alpha0: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            grid_budget: DEFAULT_GRID_BUDGET,
            solver_budget: DEFAULT_SOLVER_BUDGET,
            fp_tol: DEFAULT_FP_TOL,
            max_alpha_halvings: DEFAULT_MAX_ALPHA_HALVINGS,
            alpha0: None,
        }
    }
}

/// One alpha tried by the simplicial check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaAttempt {
    pub alpha: f64,
    pub grid_size: usize,
    pub check: SimplicialCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub params: PipelineParams,
    pub attempts: Vec<AlphaAttempt>,
    pub fixed_point: FixedPointResult,
    pub certificate: EpsFixedPointCertificate,
    /// `|f(z) - z|` recomputed by evaluating the map at `z` directly.
    pub verified_displacement: f64,
}

/// Runs the whole chain for an ε-continuous map `f` and target `eps_prime`.
///
/// Uses `gamma = (R_n eps_prime - eps) / 2`, halves alpha from `alpha0` until
/// the arithmetic condition holds, then keeps halving while the simplicial
/// check finds a long image edge.
pub fn run_pipeline<M: SelfMap + ?Sized>(
    f: &M,
    eps: f64,
    eps_prime: f64,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    let dim = f.dim();
    let r = jung_radius(dim)?;
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(MapError::InvalidEps(eps).into());
    }
    if !(eps_prime > eps / r) {
        return Err(PipelineError::Hypothesis { eps_prime, bound: eps / r });
    }
    let gamma = (r * eps_prime - eps) / 2.0;
    let slack = eps_prime - (eps + gamma) / r;
    if !(slack > config.fp_tol) {
        return Err(PipelineError::InvalidParams(format!(
            "eps_prime exceeds eps / R_n by {}, too little for fp_tol = {}",
            2.0 * slack,
            config.fp_tol
        )));
    }
    let mut alpha = config.alpha0.unwrap_or(eps);
    while !((eps + gamma) / r + alpha / 2.0 + config.fp_tol < eps_prime) {
        alpha /= 2.0;
    }

    let mut attempts = Vec::new();
    let (grid, params) = loop {
        let params = PipelineParams::new(dim, eps, eps_prime, gamma, alpha, config.fp_tol)?;
        let grid = build_sample_grid(dim, alpha, f, config.grid_budget)?;
        let check = simplicial_image_check(&grid, alpha, eps + gamma);
        attempts.push(AlphaAttempt { alpha, grid_size: grid.len(), check });
        match check {
            SimplicialCheck::Pass => break (grid, params),
            SimplicialCheck::Witness { pair, image_distance } => {
                if attempts.len() > config.max_alpha_halvings {
                    return Err(PipelineError::AlphaExhausted { alpha, pair, image_distance });
                }
                alpha /= 2.0;
            }
        }
    };

    let fixed_point = find_fixed_point(|y: &[f64]| averaged_map_eval(y, &grid), dim, config.fp_tol, config.solver_budget)?;
    let certificate = extract_certificate(&fixed_point, &grid, &params)?;
    let verified_displacement = dist(&f.eval(&certificate.z), &certificate.z);
    if !(verified_displacement < eps_prime) {
        return Err(PipelineError::Inconsistent(format!(
            "re-evaluated displacement {verified_displacement} is not below eps_prime"
        )));
    }
    Ok(PipelineRun { params, attempts, fixed_point, certificate, verified_displacement })
}
