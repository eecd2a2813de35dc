/*!
Configuration, presets and run orchestration behind the `ghartree` binary.

A run is described by a `key = value` file (see [`config`]) and executed
by [`run_experiment`], which writes its artifacts and a `MANIFEST` into the
output directory.
*/

pub mod config;
pub mod manifest;
pub mod run;

pub use config::{parse_config, ConfigError, Preset, RunConfig};
pub use manifest::{Manifest, Status};
pub use run::{exit_code_for, run_experiment, Command, RunError, RunSummary, EXIT_CONFIG, EXIT_IO};
