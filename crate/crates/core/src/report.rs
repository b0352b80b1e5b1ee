//! Serializable experiment records. Reports embed the full configuration and
//! seed, and every number carries the identifier of the sample set it came
//! from; timing lives in a separate `meta` block so the deterministic body
//! can be compared byte for byte.

use serde::{Deserialize, Serialize};

use crate::checker::DeltaRicVerdict;
use crate::deform::{ConformalCheck, DeformationParams, GwFamilyCheck};
use crate::profile::Certificate;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Meta {
    pub timestamp_unix: u64,
    pub wall_ms: u64,
}

impl Meta {
    pub fn now(wall_ms: u64) -> Meta {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Meta {
            timestamp_unix,
            wall_ms,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReportBody {
    pub c: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub tau: f64,
    pub nu: f64,
    pub release_width: f64,
    pub release_peak: f64,
    pub certificates: Vec<Certificate>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub body: ProfileReportBody,
    pub meta: Meta,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureStats {
    pub sec_min: f64,
    pub sec_max: f64,
    pub ric_k: usize,
    pub ric_k_min: f64,
    pub argmin_point: Vec<f64>,
    pub argmin_frame: Vec<Vec<f64>>,
    pub samples: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReportBody {
    pub model: String,
    pub seed: u64,
    pub samples: usize,
    pub stats: CurvatureStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub body: CurvatureReportBody,
    pub meta: Meta,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseStats {
    /// Undeformed sectional curvature at the center.
    pub sec_at_p: f64,
    /// Deformed sectional range at the center; must sit below `-K`.
    pub sec_tilde_at_p: (f64, f64),
    /// Deformed Ricci eigenvalue extremes at the center.
    pub ricci_tilde_at_p: (f64, f64),
    /// Most positive deformed Ricci eigenvalue seen away from the support.
    pub ricci_tilde_away_max: f64,
    pub both_signs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalStats {
    pub k: usize,
    pub min_ric_k_before: f64,
    pub min_ric_k_after: f64,
    pub argmin_region: String,
    pub argmin_point: Vec<f64>,
    pub argmin_frame: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRRegionStats {
    pub region: String,
    pub points: usize,
    pub vv_image_norm_max: f64,
    pub hh_offblock_max: f64,
    pub hv_offblock_max: f64,
    pub hh_quadform_min: f64,
    pub hv_quadform_min: f64,
    pub verdicts_pass: usize,
    pub oracle_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformVerdicts {
    pub negative_at_p: bool,
    pub ric_k_preserved: bool,
    pub base_ricci_both_signs: bool,
    pub c1_small: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReportBody {
    pub model: String,
    pub params: DeformationParams,
    pub k: usize,
    pub seed: u64,
    pub samples: usize,
    pub lambda_hh: f64,
    pub lambda_hv: f64,
    pub certificates: Vec<Certificate>,
    pub base: BaseStats,
    pub total: TotalStats,
    pub delta_r: Vec<DeltaRRegionStats>,
    pub delta_ric_verdict_core: Option<DeltaRicVerdict>,
    pub verdicts: DeformVerdicts,
    pub sample_sets: Vec<SampleSetRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSetRecord {
    pub id: String,
    pub description: String,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReport {
    pub body: DeformationReportBody,
    pub meta: Meta,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySuiteCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReportBody {
    pub suite: String,
    pub model: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<VerifySuiteCheck>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub body: VerifyReportBody,
    pub meta: Meta,
}

/// Per-point conformal comparison used by the `conformal` suite.
#[derive(Clone, Debug, Serialize)]
pub struct ConformalSuiteEntry {
    pub build: String,
    pub point: Vec<f64>,
    pub check: ConformalCheck,
}

/// Per-point warped-formula comparison used by the `gw` suite.
#[derive(Clone, Debug, Serialize)]
pub struct GwSuiteEntry {
    pub point: Vec<f64>,
    pub families: Vec<GwFamilyCheck>,
}

/// Serializes a report body with stable key order (struct order) and UTF-8.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}
