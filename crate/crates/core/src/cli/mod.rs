//! The `epsfix` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage or validation error,
//! 3 hypothesis violation (`eps_prime <= eps / R_n`), 4 budget exhaustion,
//! 5 I/O error.

pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::geometry::{jung_radius, PointSet, Vector};
use crate::maps::{
    identity_map, image_diameter, negation_map, ConstantMap, ExtremalMap, MapError, ModulusEstimate, SampledMap,
    SelfMap, StepMap1D,
};
use crate::oracle::{self, GridSpec, OracleError};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineError};
use report::*;

/// Radii at which constructed maps are checked for ε-continuity.
pub const MODULUS_RADII: [f64; 3] = [0.05, 0.1, 0.2];

pub const DEFAULT_JUNG_TRIALS: usize = 1000;
pub const DEFAULT_JUNG_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::CoveringViolation { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<crate::geometry::GeometryError> for CliError {
    fn from(e: crate::geometry::GeometryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Hypothesis { .. } => CliError::Hypothesis(e.to_string()),
            PipelineError::GridBudget { .. } | PipelineError::NoConvergence { .. } | PipelineError::AlphaExhausted { .. } => {
                CliError::Budget(e.to_string())
            }
            PipelineError::InvalidParams(_) | PipelineError::Geometry(_) => CliError::Usage(e.to_string()),
            PipelineError::Map(m) => m.into(),
            PipelineError::CoveringViolation { .. } | PipelineError::Inconsistent(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Budget { .. } => CliError::Budget(e.to_string()),
            OracleError::InvalidSpec(_) | OracleError::Geometry(_) => CliError::Usage(e.to_string()),
            OracleError::Map(m) => m.into(),
            OracleError::TightnessViolated(_) => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "epsfix", version, about = "Approximate fixed points of ε-continuous maps of the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of Jung constants R_k and eps/R_k for k = 1..n.
    Radius(RadiusArgs),
    /// Build the extremal map and certify it on a grid.
    Extremal(ExtremalArgs),
    /// Run the fixed-point pipeline and emit a certificate.
    Pipeline(PipelineArgs),
    /// Tightness sweep plus randomized Jung checks.
    Verify(VerifyArgs),
    /// Draw the planar extremal map as SVG.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    /// Grid points per axis for the certification sweep.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinMap {
    Step,
    Extremal,
    Constant,
    Identity,
    Negation,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Built-in map.
    #[arg(long, value_enum, conflicts_with = "map_file", required_unless_present = "map_file")]
    pub map: Option<BuiltinMap>,
    /// Sampled map file (JSON).
    #[arg(long)]
    pub map_file: Option<PathBuf>,
    /// Dimension for built-in maps other than `step`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Value of the constant map, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub value: Option<Vec<f64>>,
    /// Continuity parameter of the map; read from the map file when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_prime: f64,
    /// Largest sample grid the pipeline may build.
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_GRID_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: usize,
    #[arg(long, default_value_t = oracle::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = DEFAULT_JUNG_TRIALS)]
    pub trials: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// What a command produced: the primary output and an optional human summary
/// for standard error.
pub struct Output {
    pub body: Vec<u8>,
    pub summary: Option<String>,
}

pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out_path = match &cli.command {
        Command::Radius(a) => a.output.out.clone(),
        Command::Extremal(a) => a.output.out.clone(),
        Command::Pipeline(a) => a.output.out.clone(),
        Command::Verify(a) => a.output.out.clone(),
        Command::Figure(a) => a.output.out.clone(),
    };
    match execute(&cli.command).and_then(|o| emit(o, out_path.as_deref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(output: Output, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, &output.body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?,
        None => std::io::stdout().write_all(&output.body).map_err(|e| CliError::Io(e.to_string()))?,
    }
    if let Some(s) = output.summary {
        eprintln!("{s}");
    }
    Ok(())
}

pub fn execute(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Radius(a) => cmd_radius(a),
        Command::Extremal(a) => cmd_extremal(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Figure(a) => cmd_figure(a),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    body.push(b'\n');
    Ok(body)
}

fn unsupported(format: Format, command: &str) -> CliError {
    CliError::Usage(format!("format {format:?} is not supported by `{command}`"))
}

pub fn cmd_radius(a: &RadiusArgs) -> Result<Output, CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if !(a.eps > 0.0 && a.eps <= 2.0) {
        return Err(MapError::InvalidEps(a.eps).into());
    }
    let rows: Vec<RadiusRow> = (1..=a.n)
        .map(|n| {
            let r = jung_radius(n).expect("n >= 1");
            RadiusRow { n, jung_radius: r, eps_over_radius: a.eps / r }
        })
        .collect();
    let body = match a.output.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&RadiusReport { schema_version: SCHEMA_VERSION.into(), eps: a.eps, rows })?,
        Format::Csv | Format::Text => {
            let sep = if a.output.format == Some(Format::Csv) { "," } else { "\t" };
            let mut s = ["n", "jung_radius", "eps_over_radius"].join(sep);
            s.push('\n');
            for row in &rows {
                s.push_str(&format!("{}{sep}{}{sep}{}\n", row.n, row.jung_radius, row.eps_over_radius));
            }
            s.into_bytes()
        }
        f => return Err(unsupported(f, "radius")),
    };
    Ok(Output { body, summary: None })
}

/// Largest per-axis resolution with at most a million lattice points.
fn default_resolution(n: usize) -> usize {
    ((1e6f64).powf(1.0 / n as f64).floor() as usize).clamp(3, 2001)
}

fn modulus_table<M: SelfMap + ?Sized>(f: &M, spec: &GridSpec) -> Result<Vec<ModulusEstimate>, CliError> {
    MODULUS_RADII
        .iter()
        .filter(|&&r| r > spec.step())
        .map(|&r| Ok(ModulusEstimate { scale: r, value: oracle::modulus_grid(f, r, spec)? }))
        .collect()
}

pub fn cmd_extremal(a: &ExtremalArgs) -> Result<Output, CliError> {
    let map = ExtremalMap::new(a.n, a.eps)?;
    let spec = GridSpec::new(a.n, a.resolution.unwrap_or_else(|| default_resolution(a.n)))?.with_budget(a.budget);
    let format = a.output.format.unwrap_or(Format::Json);
    if format == Format::Csv {
        let mut body = Vec::new();
        oracle::write_displacement_csv(&map, &spec, &mut body).map_err(|e| CliError::Budget(e.to_string()))?;
        return Ok(Output { body, summary: None });
    }
    if format != Format::Json {
        return Err(unsupported(format, "extremal"));
    }
    let tightness = oracle::tightness_report(a.n, a.eps, &spec)?;
    let modulus = modulus_table(&map, &spec)?;
    let report = ExtremalReport {
        schema_version: SCHEMA_VERSION.into(),
        n: a.n,
        eps: a.eps,
        jung_radius: jung_radius(a.n)?,
        bound: map.image_radius(),
        tie_break: map.tie_break(),
        vertices: map.vertices().to_rows(),
        image_points: (0..=a.n).map(|i| map.image_of_cell(i).into_inner()).collect(),
        image_diameter: image_diameter(&map),
        tightness,
        modulus,
    };
    let summary = format!(
        "extremal map n={} eps={}: image diameter {}, min displacement {} >= bound {}",
        a.n, a.eps, report.image_diameter, report.tightness.min_displacement, report.bound
    );
    Ok(Output { body: to_json(&report)?, summary: Some(summary) })
}

pub fn load_sampled_map(path: &Path) -> Result<SampledMap, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let file: SampledMapFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed map file {}: {e}", path.display())))?;
    sampled_map_from_file(file)
}

pub fn sampled_map_from_file(file: SampledMapFile) -> Result<SampledMap, CliError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!("unsupported schema_version {:?}", file.schema_version)));
    }
    let check_dims = |rows: &[Vec<f64>], what: &str| {
        match rows.iter().position(|r| r.len() != file.dim) {
            Some(i) => Err(CliError::Usage(format!("{what}[{i}] does not have dimension {}", file.dim))),
            None => Ok(()),
        }
    };
    check_dims(&file.points, "points")?;
    check_dims(&file.values, "values")?;
    let map = SampledMap::new(
        PointSet::from_rows(file.points)?,
        PointSet::from_rows(file.values)?,
        file.covering_radius,
    )?;
    match file.eps {
        Some(eps) => Ok(map.with_eps(eps)?),
        None => Ok(map),
    }
}

pub fn sampled_map_to_file(map: &SampledMap) -> SampledMapFile {
    SampledMapFile {
        schema_version: SCHEMA_VERSION.into(),
        dim: map.dim(),
        eps: map.eps(),
        covering_radius: map.covering_radius(),
        points: map.points().to_rows(),
        values: map.values().to_rows(),
    }
}

fn builtin_map(a: &PipelineArgs, kind: BuiltinMap) -> Result<(Box<dyn SelfMap + Send>, MapDescription), CliError> {
    let dim = |default: Option<usize>| -> Result<usize, CliError> {
        match a.n.or(default) {
            Some(0) | None => Err(CliError::Usage("--n must be given and at least 1".into())),
            Some(n) => Ok(n),
        }
    };
    let eps = a.eps.ok_or_else(|| CliError::Usage("--eps is required for built-in maps".into()))?;
    let (map, dim): (Box<dyn SelfMap + Send>, usize) = match kind {
        BuiltinMap::Step => {
            if a.n.is_some_and(|n| n != 1) {
                return Err(CliError::Usage("the step map is one-dimensional".into()));
            }
            (Box::new(StepMap1D::new(eps)?), 1)
        }
        BuiltinMap::Extremal => {
            let n = dim(None)?;
            (Box::new(ExtremalMap::new(n, eps)?), n)
        }
        BuiltinMap::Constant => {
            let value = match &a.value {
                Some(v) => Vector::new(v.clone())?,
                None => Vector::zeros(dim(None)?),
            };
            if a.n.is_some_and(|n| n != value.dim()) {
                return Err(CliError::Usage("--value does not match --n".into()));
            }
            let n = value.dim();
            (Box::new(ConstantMap::new(value)?), n)
        }
        BuiltinMap::Identity => {
            let n = dim(None)?;
            (Box::new(identity_map(n)), n)
        }
        BuiltinMap::Negation => {
            let n = dim(None)?;
            (Box::new(negation_map(n)), n)
        }
    };
    let kind_name = format!("{kind:?}").to_lowercase();
    Ok((map, MapDescription { kind: kind_name, dim, source: None }))
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<Output, CliError> {
    let format = a.output.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(unsupported(format, "pipeline"));
    }
    let (map, description, eps): (Box<dyn SelfMap + Send>, MapDescription, f64) = match (&a.map, &a.map_file) {
        (Some(kind), _) => {
            let (m, d) = builtin_map(a, *kind)?;
            (m, d, a.eps.expect("checked by builtin_map"))
        }
        (None, Some(path)) => {
            let sampled = load_sampled_map(path)?;
            let eps = a
                .eps
                .or(sampled.eps())
                .ok_or_else(|| CliError::Usage("--eps is required when the map file has no eps".into()))?;
            let d = MapDescription { kind: "sampled".into(), dim: sampled.dim(), source: Some(path.display().to_string()) };
            (Box::new(sampled), d, eps)
        }
        (None, None) => return Err(CliError::Usage("either --map or --map-file is required".into())),
    };
    let config = PipelineConfig { grid_budget: a.budget, ..PipelineConfig::default() };
    let run = run_pipeline(map.as_ref(), eps, a.eps_prime, &config)?;
    let summary = format!(
        "certified {}-fixed point z = {:?}: |f(z) - z| = {} (re-evaluated {}), alpha = {}, grid {} samples",
        a.eps_prime,
        run.certificate.z.coords(),
        run.certificate.displacement,
        run.verified_displacement,
        run.params.alpha,
        run.attempts.last().map_or(0, |t| t.grid_size),
    );
    let report = PipelineReport {
        schema_version: SCHEMA_VERSION.into(),
        map: description,
        eps,
        eps_prime: a.eps_prime,
        params: run.params,
        attempts: run.attempts,
        solver: run.fixed_point,
        certificate: run.certificate,
        verification: Verification {
            reevaluated_displacement: run.verified_displacement,
            below_eps_prime: run.verified_displacement < a.eps_prime,
        },
    };
    Ok(Output { body: to_json(&report)?, summary: Some(summary) })
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Output, CliError> {
    let map = ExtremalMap::new(a.n, a.eps)?;
    let spec = GridSpec::new(a.n, a.resolution)?.with_budget(a.budget);
    spec.check_budget()?;
    let format = a.output.format.unwrap_or(Format::Json);
    if format == Format::Csv {
        let mut body = Vec::new();
        oracle::write_displacement_csv(&map, &spec, &mut body).map_err(|e| CliError::Budget(e.to_string()))?;
        return Ok(Output { body, summary: None });
    }
    if format != Format::Json {
        return Err(unsupported(format, "verify"));
    }
    let tightness = oracle::tightness_report(a.n, a.eps, &spec)?;
    let modulus = modulus_table(&map, &spec)?;
    let jung = oracle::jung_random_test(a.n, a.trials, DEFAULT_JUNG_POINTS, a.seed)?;
    let jung_ok = matches!(jung, oracle::JungOutcome::Pass(_));
    let summary = format!(
        "n={} eps={}: grid minimum {} vs bound {} (gap {}, step {}); Jung check {}",
        a.n,
        a.eps,
        tightness.min_displacement,
        tightness.theoretical_bound,
        tightness.gap,
        tightness.grid_step,
        if jung_ok { "passed" } else { "FAILED" }
    );
    let report = VerifyReport { schema_version: SCHEMA_VERSION.into(), tightness, modulus, jung };
    let body = to_json(&report)?;
    if !jung_ok {
        return Err(CliError::Internal(format!("Jung counterexample found:\n{}", String::from_utf8_lossy(&body))));
    }
    Ok(Output { body, summary: Some(summary) })
}

pub fn cmd_figure(a: &FigureArgs) -> Result<Output, CliError> {
    let format = a.output.format.unwrap_or(Format::Svg);
    if format != Format::Svg {
        return Err(unsupported(format, "figure"));
    }
    let body = svg::extremal_figure(a.eps)?.into_bytes();
    let summary = (a.eps > 3f64.sqrt()).then(|| "note: eps > sqrt(3), the dotted circle leaves the unit disk".to_string());
    Ok(Output { body, summary })
}
