//! Coordinate-patch Riemannian geometry: metric evaluation, Christoffel
//! symbols, curvature, unit-speed geodesic integration and parallel
//! transport.

mod chart;
mod integrate;
mod phase;
mod transport;

pub use chart::{christoffel_from_metric, ChartKind, MetricChart};
pub use integrate::{DenseStep, Dopri5, GeodesicSegment, IntegrationStats, StepControl};
pub use integrate::{geodesic_flow_rhs, integrate_geodesic, integrate_geodesic_segment};
pub use phase::{Frame, PhasePoint};
pub use transport::{parallel_transport, parallel_transport_vectors};
