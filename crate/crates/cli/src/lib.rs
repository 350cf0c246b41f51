//! File format, rendering and command-line driver for `nhatlas`.

pub mod app;
pub mod atlas_file;
pub mod render;

pub use app::{run, Output};
pub use atlas_file::{export_atlas, parse_atlas, parse_atlas_str, AtlasFile, AtlasFileError};
