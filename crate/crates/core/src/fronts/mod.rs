//! Convex wavefront machinery: shape-operator propagation along geodesics,
//! the reflection jump law, tangent-front construction, and the
//! separation and collision probes.

mod collision;
mod propagate;
mod reflect;
mod riccati;
mod state;
mod tangent;

pub use collision::{front_collision_probe, CollisionOptions, CollisionReport, OrthogonalRoot};
pub use propagate::{
    front_separation_check, propagate_front_patch, propagate_front_state, FrontLimits,
    FrontReflection, FrontTrack, PropagatedPatch, SeparationReport, TrackOutcome,
};
pub use reflect::reflect_shape_operator;
pub use riccati::{constant_curvature_scalar, propagate_shape_operator, BLOWUP_THRESHOLD};
pub use state::{FrontPatch, FrontState};
pub use tangent::{
    construct_tangent_front, construct_tangent_front_auto, surface_geodesic, TangentFrontOptions,
};
