//! JSON report and input-file schemas. Field names are frozen per
//! [`SCHEMA_VERSION`]; see `docs/report-schema.md`.

use serde::{Deserialize, Serialize};

use crate::maps::{ModulusEstimate, TieBreak};
use crate::oracle::{JungOutcome, TightnessReport};
use crate::pipeline::{AlphaAttempt, EpsFixedPointCertificate, FixedPointResult, PipelineParams};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub n: usize,
    pub jung_radius: f64,
    pub eps_over_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub schema_version: String,
    pub eps: f64,
    pub rows: Vec<RadiusRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub schema_version: String,
    pub n: usize,
    pub eps: f64,
    pub jung_radius: f64,
    /// `eps / R_n`: no point moves by less than this.
    pub bound: f64,
    pub tie_break: TieBreak,
    pub vertices: Vec<Vec<f64>>,
    pub image_points: Vec<Vec<f64>>,
    pub image_diameter: f64,
    pub tightness: TightnessReport,
    pub modulus: Vec<ModulusEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDescription {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `|f(z) - z|` from a fresh evaluation of the map.
    pub reevaluated_displacement: f64,
    pub below_eps_prime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: String,
    pub map: MapDescription,
    pub eps: f64,
    pub eps_prime: f64,
    pub params: PipelineParams,
    pub attempts: Vec<AlphaAttempt>,
    pub solver: FixedPointResult,
    pub certificate: EpsFixedPointCertificate,
    pub verification: Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: String,
    pub tightness: TightnessReport,
    pub modulus: Vec<ModulusEstimate>,
    pub jung: JungOutcome,
}

/// On-disk form of a sampled map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledMapFile {
    pub schema_version: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub covering_radius: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}
