//! Library behind the `billiards` binary: scene loading, experiment
//! orchestration and deterministic artifact emission.

pub mod commands;
pub mod output;
pub mod svg;

pub use commands::{
    canonical_scene_text, cmd_compare, cmd_constants, cmd_fronts, cmd_trace, cmd_travel,
    load_scene, Artifacts, CliError, ComparisonReport, FrontSpec, LoadedScene, RunConfig,
    SingularRow,
};
