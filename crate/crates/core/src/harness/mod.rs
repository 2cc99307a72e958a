//! Run configuration, result artifacts and experiment suites behind the
//! command-line tool.

pub mod artifact;
pub mod bench;
pub mod config;

pub use artifact::{execute, RunArtifact};
pub use config::{Algorithm, ObjectiveKind, RunConfig};
