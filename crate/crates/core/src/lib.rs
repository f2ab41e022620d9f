//! Approximate fixed points of ε-continuous self-maps of the Euclidean unit
//! ball.
//!
//! An ε-continuous map `f: B^n -> B^n` has an ε′-fixed point for every
//! `ε′ > ε / R_n`, where `R_n = sqrt(2(n+1)/n)` is the Jung constant, and the
//! bound cannot be improved. This crate provides:
//!
//! - [`geometry`]: the Jung constant, inscribed regular simplices, diameters,
//!   minimal enclosing balls and convex combinations;
//! - [`maps`]: the extremal discontinuous maps and sampled maps, with
//!   ε-continuity diagnostics;
//! - [`pipeline`]: the constructive search that produces a certified
//!   ε′-fixed point;
//! - [`oracle`]: brute-force grid sweeps and randomized checks that verify
//!   the bound is attained;
//! - [`cli`]: the `epsfix` command-line front end and its report formats.

pub mod cli;
pub mod geometry;
mod index;
pub mod maps;
pub mod oracle;
pub mod pipeline;
pub mod sampling;

pub use geometry::{
    diameter, eval_combination, jung_nearest, jung_radius, min_enclosing_ball, regular_simplex_vertices, Ball,
    ConvexCombination, GeometryError, PointSet, Vector, TOL_GEOM, TOL_WEIGHTS,
};
pub use maps::{ExtremalMap, SampledMap, SelfMap, StepMap1D};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineRun};
