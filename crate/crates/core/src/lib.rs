//! Numerical laboratory for billiard dynamics in Riemannian coordinate charts
//! with strictly convex obstacles.
//!
//! The crate is organised in four layers:
//!
//! * [`geometry`] - metric charts, Christoffel symbols, curvature, adaptive
//!   geodesic integration and parallel transport;
//! * [`scene`] - implicit strictly convex bodies, scene validation, global
//!   scene constants and the general-position check;
//! * [`billiard`] - the billiard flow: event detection, specular reflection,
//!   travelling times and symbolic itineraries;
//! * [`fronts`] - convex wavefront machinery: shape-operator propagation
//!   along geodesics, the reflection jump law, tangent-front construction
//!   and collision/separation probes.

pub mod billiard;
pub mod error;
pub mod fronts;
pub mod geometry;
pub(crate) mod rootfind;
pub mod scene;

pub use error::{BilliardError, FrontError, GeomError, SceneError};
