//! Host-side companion of `depsketch-core`: thread-pool execution, file
//! formats, reproducible experiment manifests and the `depsketch` CLI.

pub mod cli;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod formats;
pub mod manifest;

pub use error::{Error, Result};
pub use exec::Parallel;
