//! Machine-readable verification reports.
//!
//! One JSON document per run, schema-versioned. Complex numbers are
//! serialized as `[re, im]` decimal-string pairs so no precision is lost
//! to binary floats; residuals and shell errors are `f64` (they are
//! measurements, not reconstructible values).

use serde::{Deserialize, Serialize};

use bcjack_core::qnum::Complex;

use crate::config::CheckConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Unconverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStatus {
    Pass,
    Fail,
    Unconverged,
    Error,
}

/// Complex number as full-precision decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexRepr(pub String, pub String);

impl From<&Complex> for ComplexRepr {
    fn from(v: &Complex) -> Self {
        ComplexRepr(
            v.re.to_string_radix(10, None),
            v.im.to_string_radix(10, None),
        )
    }
}

/// Echo of the parameters one sample drew, as name -> complex pairs.
pub type ParameterEcho = Vec<(String, ComplexRepr)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub q: f64,
    pub parameters: ParameterEcho,
    pub residual: Option<f64>,
    pub shell_error: f64,
    pub effective_threshold: f64,
    pub terms: u64,
    pub wall_ms: f64,
    pub status: SampleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub library_version: String,
    /// Unix timestamp in seconds; excluded from determinism comparisons.
    pub timestamp_unix: u64,
    pub config: CheckConfig,
    pub samples: Vec<SampleRecord>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(config: CheckConfig, samples: Vec<SampleRecord>) -> Self {
        let any_fail = samples.iter().any(|s| s.status == SampleStatus::Fail || s.status == SampleStatus::Error);
        let any_unconverged = samples.iter().any(|s| s.status == SampleStatus::Unconverged);
        let verdict = if any_fail {
            Verdict::Fail
        } else if any_unconverged {
            Verdict::Unconverged
        } else {
            Verdict::Pass
        };
        VerificationReport {
            schema: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            samples,
            verdict,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Unconverged => 2,
        }
    }

    /// The deterministic part of the report: per-sample residuals in
    /// index order, as exact bit patterns.
    pub fn residual_bits(&self) -> Vec<Option<u64>> {
        self.samples
            .iter()
            .map(|s| s.residual.map(f64::to_bits))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.residual)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
