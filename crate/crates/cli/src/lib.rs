//! Command-line plumbing for the speech sanitizer: the file-to-file
//! sanitize pipeline, the per-stage CPU benchmark and the PRAKA and attack
//! demonstrations.

pub mod bench;
pub mod demo;
pub mod error;
pub mod pipeline;

pub use error::{AtStage, Stage, StageError};
