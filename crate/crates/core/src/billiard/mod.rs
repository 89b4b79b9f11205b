//! The billiard flow in the scene: geodesic arcs joined by reflection,
//! tangency and exit events, travelling times and symbolic itineraries.

mod event;
mod itinerary;
mod sample;
mod trace;

pub use event::{
    outward_normal, reflect, smooth_ray_obstacle_hits, step_to_event, Event, EventKind, EventOptions,
};
pub use itinerary::{itinerary, itinerary_distance, Itinerary};
pub use sample::{boundary_ray, sample_sigmas, sample_travel_times, Sampler, SamplerKind, TravelStats};
pub use trace::{
    trace, travelling_time, CutoffReason, TraceLimits, Trajectory, TrajectoryStatus, TravelOutcome,
    TravelRecord,
};
