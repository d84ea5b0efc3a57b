//! Signal and grid file formats, images and the subcommands of the `tfss`
//! binary.

pub mod commands;
pub mod error;
pub mod gridfile;
pub mod image;
pub mod input;
pub mod manifest;
pub mod threads;

pub use error::{CliError, Result};
pub use manifest::{RunManifest, Source};
