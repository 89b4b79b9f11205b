//! Chaining events into trajectories, and travelling-time records.

use nalgebra::DVector;

use crate::error::BilliardError;
use crate::geometry::{integrate_geodesic, PhasePoint};
use crate::scene::Scene;

use super::event::{step_to_event, Event, EventKind, EventOptions};

/// Cutoff limits for tracing. Defaults derive from the scene summary:
/// `t_max = 100 * diameter`, `max_reflections = 50 * reflection_window`.
#[derive(Clone, Copy, Debug)]
pub struct TraceLimits {
    pub t_max: f64,
    pub max_reflections: usize,
}

impl TraceLimits {
    pub fn for_scene(scene: &Scene) -> Self {
        TraceLimits {
            t_max: 100.0 * scene.summary.diameter,
            max_reflections: 50 * scene.summary.reflection_window as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutoffReason {
    TimeBudget,
    ReflectionBudget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrajectoryStatus {
    /// Reached the exterior boundary with no tangency along the way.
    Exited,
    /// Reached the exterior boundary after grazing an obstacle at least
    /// once; such rays are singularities of the travelling-time data.
    Singular,
    /// Hit a cutoff limit first; treated as (numerically) trapped.
    Trapped(CutoffReason),
}

/// A billiard trajectory: geodesic arcs joined by events.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub start: PhasePoint,
    /// Events in increasing absolute time.
    pub events: Vec<Event>,
    pub total_time: f64,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn reflections(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.kind, EventKind::Reflection { .. })).count()
    }

    pub fn tangencies(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.kind, EventKind::Tangency { .. })).count()
    }

    pub fn exited(&self) -> bool {
        matches!(self.status, TrajectoryStatus::Exited | TrajectoryStatus::Singular)
    }

    /// State of the exit event, when the trajectory exited.
    pub fn exit_state(&self) -> Option<&PhasePoint> {
        self.events.iter().rev().find_map(|e| match e.kind {
            EventKind::Exit => Some(&e.state_before),
            _ => None,
        })
    }

    /// Phase state at absolute time `t`, reconstructed by integrating the
    /// geodesic from the last event at or before `t`.
    pub fn state_at(&self, scene: &Scene, t: f64) -> Result<PhasePoint, BilliardError> {
        let t = t.clamp(0.0, self.total_time);
        let mut base = self.start.clone();
        let mut base_t = 0.0;
        for ev in &self.events {
            if ev.t > t {
                break;
            }
            base = ev.state_after.clone();
            base_t = ev.t;
        }
        if t - base_t < 1e-14 {
            return Ok(base);
        }
        Ok(integrate_geodesic(&scene.chart, &base, t - base_t, &EventOptions::default().step)?)
    }
}

/// Traces the billiard flow from `sigma` until exit or cutoff.
///
/// Tangencies are recorded and traced through without deflection. A
/// trajectory that grazes and later exits is `Singular`; one that hits the
/// limits is `Trapped`.
pub fn trace(scene: &Scene, sigma: &PhasePoint, limits: &TraceLimits, opts: &EventOptions) -> Result<Trajectory, BilliardError> {
    let mut events: Vec<Event> = Vec::new();
    let mut state = sigma.clone();
    let mut elapsed = 0.0;
    let mut reflections = 0usize;
    let mut saw_tangency = false;
    let mut last_obstacle: Option<usize> = None;

    loop {
        if reflections >= limits.max_reflections {
            return Ok(Trajectory {
                start: sigma.clone(),
                events,
                total_time: elapsed,
                status: TrajectoryStatus::Trapped(CutoffReason::ReflectionBudget),
            });
        }
        let budget = limits.t_max - elapsed;
        if budget <= 0.0 {
            return Ok(Trajectory {
                start: sigma.clone(),
                events,
                total_time: elapsed,
                status: TrajectoryStatus::Trapped(CutoffReason::TimeBudget),
            });
        }

        let mut ev = step_to_event(scene, &state, budget, opts)?;
        ev.t += elapsed;
        elapsed = ev.t;

        match ev.kind {
            EventKind::Reflection { obstacle } => {
                // a geodesic leaving a strictly convex body cannot
                // immediately return to it
                assert!(
                    last_obstacle != Some(obstacle),
                    "consecutive reflections on obstacle {obstacle}"
                );
                last_obstacle = Some(obstacle);
                reflections += 1;
                state = ev.state_after.clone();
                events.push(ev);
            }
            EventKind::Tangency { .. } => {
                saw_tangency = true;
                state = ev.state_after.clone();
                events.push(ev);
            }
            EventKind::Exit => {
                let total_time = ev.t;
                events.push(ev);
                let status =
                    if saw_tangency { TrajectoryStatus::Singular } else { TrajectoryStatus::Exited };
                return Ok(Trajectory { start: sigma.clone(), events, total_time, status });
            }
            EventKind::Cutoff => {
                let total_time = ev.t;
                events.push(ev);
                return Ok(Trajectory {
                    start: sigma.clone(),
                    events,
                    total_time,
                    status: TrajectoryStatus::Trapped(CutoffReason::TimeBudget),
                });
            }
        }
    }
}

/// Travelling-time record of a non-trapped boundary ray: entry and exit
/// boundary parameters, elapsed time, the generating direction and the
/// number of tangencies along the way.
#[derive(Clone, Debug)]
pub struct TravelRecord {
    pub entry_params: Vec<f64>,
    pub exit_params: Vec<f64>,
    pub entry_point: DVector<f64>,
    pub exit_point: DVector<f64>,
    pub t: f64,
    pub sigma: PhasePoint,
    pub reflections: usize,
    pub tangencies: usize,
    pub itinerary: Vec<usize>,
}

/// Outcome of a travelling-time query.
#[derive(Clone, Debug)]
pub enum TravelOutcome {
    Record(TravelRecord),
    Trapped { limits: TraceLimits, reflections: usize, tangencies: usize },
}

/// Travelling time of the inward boundary ray `sigma`.
pub fn travelling_time(
    scene: &Scene,
    sigma: &PhasePoint,
    limits: &TraceLimits,
    opts: &EventOptions,
) -> Result<TravelOutcome, BilliardError> {
    let traj = trace(scene, sigma, limits, opts)?;
    if !traj.exited() {
        return Ok(TravelOutcome::Trapped {
            limits: *limits,
            reflections: traj.reflections(),
            tangencies: traj.tangencies(),
        });
    }
    let exit = traj.exit_state().expect("exited trajectory has an exit event").clone();
    Ok(TravelOutcome::Record(TravelRecord {
        entry_params: scene.boundary.params_of(&sigma.x),
        exit_params: scene.boundary.params_of(&exit.x),
        entry_point: sigma.x.clone(),
        exit_point: exit.x.clone(),
        t: traj.total_time,
        sigma: sigma.clone(),
        reflections: traj.reflections(),
        tangencies: traj.tangencies(),
        itinerary: super::itinerary::itinerary(&traj).symbols,
    }))
}
