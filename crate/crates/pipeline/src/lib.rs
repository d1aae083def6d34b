//! Batch front end for shadowkit: configuration, dataset generation with
//! per-sample manifests, mirrored companions and metric reports.

mod batch;
pub mod config;
pub mod error;
pub mod facial;
pub mod fixtures;
pub mod foreign;
pub mod manifest;
pub mod mirrors;
pub mod output;
pub mod report;

pub use batch::RunSummary;
pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use facial::gen_facial;
pub use foreign::gen_foreign;
pub use mirrors::gen_mirrors;
pub use report::{metrics, report, ImageSet, ReportTable};
