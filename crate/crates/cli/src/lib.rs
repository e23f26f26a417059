//! Verification harness for the bcjack library: deterministic parameter
//! sampling, identity-check orchestration, machine-readable reports,
//! expression evaluation and golden-value regression storage.

pub mod checks;
pub mod config;
pub mod eval;
pub mod goldens;
pub mod report;
pub mod sampling;

pub use checks::run_check;
pub use config::{CheckConfig, Identity};
pub use report::{SampleStatus, Verdict, VerificationReport};
