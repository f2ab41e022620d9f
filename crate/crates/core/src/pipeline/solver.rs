//! Residual-certified search for a fixed point of a continuous self-map of the
//! ball.
//!
//! Existence comes from Brouwer's theorem; the search only has to find a point
//! whose residual `|F(y) - y|` is below tolerance. It runs, in order:
//!
//! 1. damped iteration from a coarse set of starts, with a finite-difference
//!    Newton direction tried first at every step and `y + t (F(y) - y)` as the
//!    fallback, both with backtracking on the residual;
//! 2. in one dimension, bisection on `F(y) - y`, which changes sign on `[-1, 1]`;
//! 3. coarse-to-fine residual grids around the best candidates, each refined
//!    with the local iteration.
//!
//! Results are reduced in a fixed order so repeated runs return the same point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::geometry::{dist, norm, project_to_ball, solve_augmented, Vector};

const FD_STEP: f64 = 1e-7;
const MAX_BACKTRACKS: usize = 40;
const LOCAL_MAX_ITERS: usize = 200;
const REFINE_CANDIDATES: usize = 4;
const REFINE_LEVELS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStage {
    DampedIteration,
    Bisection,
    GridRefinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub y: Vector,
    /// `|F(y) - y|`.
    pub residual: f64,
    pub stage: SolverStage,
    /// Map evaluations spent by the run that produced `y`.
    pub evaluations: usize,
}

struct Local {
    y: Vec<f64>,
    residual: f64,
    evals: usize,
}

/// Finds `y` in `B^n` with `|F(y) - y| <= fp_tol`.
///
/// `budget` caps the number of map evaluations. Exhausting it yields
/// [`PipelineError::NoConvergence`] with the best residual seen.
pub fn find_fixed_point<F>(map: F, dim: usize, fp_tol: f64, budget: usize) -> Result<FixedPointResult, PipelineError>
where
    F: Fn(&[f64]) -> Result<Vector, PipelineError> + Sync,
{
    if dim == 0 {
        return Err(PipelineError::InvalidParams("dimension must be at least 1".into()));
    }
    if !(fp_tol > 0.0) {
        return Err(PipelineError::InvalidParams(format!("fp_tol must be positive, got {fp_tol}")));
    }
    let residual = |y: &[f64]| -> Result<f64, PipelineError> { Ok(dist(&map(y)?, y)) };

    let starts = start_points(dim);
    let per_start = (budget / (2 * starts.len())).max(4 * (dim + 2));
    let mut spent = 0usize;
    let mut best = f64::INFINITY;

    let outcomes: Vec<Result<Local, PipelineError>> =
        starts.par_iter().map(|s| local_solve(&map, s, fp_tol, per_start)).collect();
    for outcome in outcomes {
        let local = outcome?;
        spent += local.evals;
        best = best.min(local.residual);
        if local.residual <= fp_tol {
            return Ok(finish(local, SolverStage::DampedIteration));
        }
    }

    if dim == 1 {
        let local = bisection(&residual_signed(&map), fp_tol, budget.saturating_sub(spent))?;
        spent += local.evals;
        best = best.min(local.residual);
        if local.residual <= fp_tol {
            return Ok(finish(local, SolverStage::Bisection));
        }
    }

    let per_axis = match dim {
        1 => 41,
        2 => 21,
        3 => 11,
        _ => 5,
    };
    let mut boxes: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; dim], 1.0)];
    for _ in 0..REFINE_LEVELS {
        if spent >= budget {
            break;
        }
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for (center, half) in &boxes {
            probes.extend(box_lattice(center, *half, per_axis));
        }
        let scored: Vec<Result<(usize, f64), PipelineError>> =
            probes.par_iter().enumerate().map(|(i, p)| residual(p).map(|r| (i, r))).collect();
        let mut scored = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
        spent += probes.len();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        scored.truncate(REFINE_CANDIDATES);
        best = best.min(scored[0].1);

        let local_budget = (budget.saturating_sub(spent) / REFINE_CANDIDATES).min(per_start);
        let refined: Vec<Result<Local, PipelineError>> =
            scored.par_iter().map(|&(i, _)| local_solve(&map, &probes[i], fp_tol, local_budget)).collect();
        for outcome in refined {
            let local = outcome?;
            spent += local.evals;
            best = best.min(local.residual);
            if local.residual <= fp_tol {
                return Ok(finish(local, SolverStage::GridRefinement));
            }
        }

        let half = boxes[0].1 * 2.0 / (per_axis - 1) as f64;
        if half < 1e-14 {
            break;
        }
        boxes = scored.iter().map(|&(i, _)| (probes[i].clone(), half)).collect();
    }
    Err(PipelineError::NoConvergence { best_residual: best, evaluations: spent })
}

fn finish(local: Local, stage: SolverStage) -> FixedPointResult {
    FixedPointResult { y: Vector::from_raw(local.y), residual: local.residual, stage, evaluations: local.evals }
}

fn residual_signed<'a, F>(map: &'a F) -> impl Fn(f64) -> Result<f64, PipelineError> + 'a
where
    F: Fn(&[f64]) -> Result<Vector, PipelineError>,
{
    move |y: f64| Ok(map(&[y])?[0] - y)
}

/// Origin plus a coarse lattice clipped to the ball.
fn start_points(dim: usize) -> Vec<Vec<f64>> {
    let per_axis = match dim {
        1 => 9,
        2 => 5,
        3 => 4,
        _ => 3,
    };
    let mut out = vec![vec![0.0; dim]];
    out.extend(
        box_lattice(&vec![0.0; dim], 0.8, per_axis)
            .into_iter()
            .filter(|p| norm(p) > 0.0),
    );
    out
}

/// `per_axis^dim` lattice over the box `center +- half`, projected into the ball.
fn box_lattice(center: &[f64], half: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let step = 2.0 * half / (per_axis - 1) as f64;
    let mut idx = vec![0usize; dim];
    let mut out = Vec::with_capacity(per_axis.pow(dim as u32));
    loop {
        let mut p: Vec<f64> = (0..dim).map(|a| center[a] - half + idx[a] as f64 * step).collect();
        project_to_ball(&mut p);
        out.push(p);
        let mut a = 0;
        loop {
            if a == dim {
                return out;
            }
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn local_solve<F>(map: &F, start: &[f64], tol: f64, max_evals: usize) -> Result<Local, PipelineError>
where
    F: Fn(&[f64]) -> Result<Vector, PipelineError>,
{
    let dim = start.len();
    let mut y = start.to_vec();
    project_to_ball(&mut y);
    let mut g = displacement(&map(&y)?, &y);
    let mut res = norm(&g);
    let mut evals = 1;

    for _ in 0..LOCAL_MAX_ITERS {
        if res <= tol || evals >= max_evals {
            break;
        }
        let mut accepted = None;
        if let Some((dir, used)) = newton_direction(map, &y, &g)? {
            evals += used;
            accepted = backtrack(map, &y, &dir, res, &mut evals)?;
        } else {
            evals += dim;
        }
        if accepted.is_none() {
            accepted = backtrack(map, &y, &g, res, &mut evals)?;
        }
        let Some((next, next_g, next_res)) = accepted else { break };
        y = next;
        g = next_g;
        res = next_res;
    }
    Ok(Local { y, residual: res, evals })
}

fn displacement(fy: &[f64], y: &[f64]) -> Vec<f64> {
    fy.iter().zip(y).map(|(a, b)| a - b).collect()
}

type Step = Option<(Vec<f64>, Vec<f64>, f64)>;

/// Tries `y + t dir` for `t = 1, 1/2, ...` and keeps the first point whose
/// residual is strictly smaller than `res`.
fn backtrack<F>(map: &F, y: &[f64], dir: &[f64], res: f64, evals: &mut usize) -> Result<Step, PipelineError>
where
    F: Fn(&[f64]) -> Result<Vector, PipelineError>,
{
    let mut t = 1.0;
    for _ in 0..MAX_BACKTRACKS {
        let mut cand: Vec<f64> = y.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        project_to_ball(&mut cand);
        let g = displacement(&map(&cand)?, &cand);
        *evals += 1;
        let r = norm(&g);
        if r < res {
            return Ok(Some((cand, g, r)));
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Newton direction for `G(y) = F(y) - y` with a forward-difference Jacobian
/// (backward along axes where the forward probe would leave the ball).
fn newton_direction<F>(map: &F, y: &[f64], g: &[f64]) -> Result<Option<(Vec<f64>, usize)>, PipelineError>
where
    F: Fn(&[f64]) -> Result<Vector, PipelineError>,
{
    let dim = y.len();
    let mut jac = vec![vec![0.0; dim + 1]; dim];
    for k in 0..dim {
        let mut probe = y.to_vec();
        let mut h = FD_STEP;
        probe[k] += h;
        if norm(&probe) > 1.0 {
            h = -FD_STEP;
            probe[k] = y[k] + h;
        }
        let gk = displacement(&map(&probe)?, &probe);
        for row in 0..dim {
            jac[row][k] = (gk[row] - g[row]) / h;
        }
    }
    for row in 0..dim {
        jac[row][dim] = -g[row];
    }
    Ok(solve_augmented(jac).map(|d| (d, dim)))
}

/// Bisection on a continuous `G` with `G(-1) >= 0 >= G(1)`.
fn bisection<G>(g: &G, tol: f64, budget: usize) -> Result<Local, PipelineError>
where
    G: Fn(f64) -> Result<f64, PipelineError>,
{
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    let mut evals = 2;
    let mut best = if g_lo.abs() <= g_hi.abs() { (lo, g_lo.abs()) } else { (hi, g_hi.abs()) };
    if g_lo < 0.0 || g_hi > 0.0 {
        // Not a self-map of [-1, 1]; nothing to bracket.
        return Ok(Local { y: vec![best.0], residual: best.1, evals });
    }
    while best.1 > tol && evals < budget.max(3) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        evals += 1;
        if gm.abs() < best.1 {
            best = (mid, gm.abs());
        }
        if gm >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Local { y: vec![best.0], residual: best.1, evals })
}
