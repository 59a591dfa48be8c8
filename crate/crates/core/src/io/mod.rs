//! Configuration files, series CSV files, run manifests and the run
//! directory layout used by the `mhdk` binary.

mod config;
mod csv;
mod manifest;
mod output;

pub use config::{parse_config, parse_config_str, InitKind, InitSpec, RunConfig};
pub use csv::{emit_series, parse_series_csv, read_series, series_header, series_to_csv};
pub use manifest::{run_id, GridSummary, ManifestFile, PhysicsSummary, RunManifest};
pub use output::{execute_run, RunOutput, FINAL_CHECKPOINT, MANIFEST_FILE, SERIES_FILE};
