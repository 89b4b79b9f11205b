//! Scene description: an exterior strictly convex body with disjoint
//! strictly convex obstacles, global scene constants, the general-position
//! check and the scene file format.

mod body;
mod boundary;
mod constants;
mod file;
mod genpos;
mod world;

pub use body::{boundary_shape_operator, BodyShape, ImplicitBody, PolyTerm};
pub use boundary::BoundaryChart;
pub use constants::{
    compute_constants, estimation_ray_batch, reflection_angles, Condition, EstimationBudget,
    SceneConstants,
};
pub use file::{parse_scene_str, scene_to_string, ParsedScene};
pub use genpos::{check_general_position, recheck_witness, EclipseWitness, GeneralPositionReport};
pub use world::{GeometrySummary, Scene};
