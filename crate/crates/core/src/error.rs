//! Error types shared across the crate.

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum GeomError {
    #[error("metric is not positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("plane spanned by the given vectors is ill-conditioned (gram determinant {det:.3e})")]
    IllConditionedPlane { det: f64 },

    #[error("geodesic left the chart domain at t = {t}")]
    DomainExit { t: f64, last_x: DVector<f64>, last_v: DVector<f64> },

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("integrator exceeded {max_steps} steps")]
    TooManySteps { max_steps: usize },

    #[error("cannot build a unit vector from a (near-)zero vector")]
    ZeroVector,
}

#[derive(Debug, Clone, Error)]
pub enum SceneError {
    #[error("body {label}: boundary is not a regular level set at {point:?} (|grad psi| = {grad_norm:.3e})")]
    DegenerateBoundary { label: usize, point: Vec<f64>, grad_norm: f64 },

    #[error("body {label} is not strictly convex: min principal curvature {min_curvature:.3e} at {point:?}")]
    NotStrictlyConvex { label: usize, point: Vec<f64>, min_curvature: f64 },

    #[error("obstacles {a} and {b} are too close: boundary distance {dist:.3e} < margin {margin:.3e}")]
    ObstaclesTooClose { a: usize, b: usize, dist: f64, margin: f64 },

    #[error("obstacle {label} is not contained in the interior of the exterior body")]
    ObstacleNotInterior { label: usize },

    #[error("point {point:?} is not on the boundary of body {label} (psi = {psi:.3e})")]
    NotOnBoundary { label: usize, point: Vec<f64>, psi: f64 },

    #[error("constant estimation budget exhausted; missing fields: {missing:?}")]
    PartialConstants { missing: Vec<String> },

    #[error("scene file parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: chart has dim {chart_dim}, body {label} has dim {body_dim}")]
    DimensionMismatch { chart_dim: usize, label: usize, body_dim: usize },

    #[error(transparent)]
    Geometry(#[from] GeomError),
}

#[derive(Debug, Clone, Error)]
pub enum BilliardError {
    #[error("start state is not in the closed billiard domain (psi_S = {psi_exterior:.3e}, min obstacle psi = {min_obstacle_psi:.3e})")]
    StartOutsideDomain { psi_exterior: f64, min_obstacle_psi: f64 },

    #[error("grazing incidence |<v,n>| = {dot:.3e} below tangency threshold; reflection law inapplicable")]
    GrazingReflection { dot: f64 },

    #[error("event refinement failed to converge (|psi| = {psi:.3e} after {iters} iterations)")]
    EventRefinement { psi: f64, iters: usize },

    #[error(transparent)]
    Geometry(#[from] GeomError),

    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Error)]
pub enum FrontError {
    #[error("shape operator blow-up near t = {t_estimate} (eigenvalue magnitude exceeded {threshold:.1e}); focal point")]
    FocalPoint { t_estimate: f64, threshold: f64 },

    #[error("tangent-front construction failed for eps = {eps}: {reason}; retry with a smaller eps")]
    ConstructionFailed { eps: f64, reason: String },

    #[error("front patch has a hole between parameters {u0} and {u1}; not comparable")]
    NotComparable { u0: f64, u1: f64 },

    #[error("grazing reflection of a front normal; jump law inapplicable (|<n,n_K>| = {dot:.3e})")]
    GrazingJump { dot: f64 },

    #[error("operation unsupported for patch dimension {dim}")]
    UnsupportedDimension { dim: usize },

    #[error(transparent)]
    Geometry(#[from] GeomError),

    #[error(transparent)]
    Billiard(#[from] BilliardError),

    #[error(transparent)]
    Scene(#[from] SceneError),
}
