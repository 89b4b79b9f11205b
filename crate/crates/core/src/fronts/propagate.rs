//! Propagation of front patches through the billiard flow, with the
//! curvature log and the distance-growth check.

use rayon::prelude::*;

use crate::billiard::{step_to_event, EventKind, EventOptions};
use crate::error::FrontError;
use crate::geometry::MetricChart;
use crate::scene::{boundary_shape_operator, Scene};

use super::reflect::reflect_shape_operator;
use super::riccati::propagate_shape_operator;
use super::state::{FrontPatch, FrontState};

/// Limits for patch propagation.
#[derive(Clone, Copy, Debug)]
pub struct FrontLimits {
    pub t_max: f64,
    pub max_reflections: usize,
}

/// One reflection of one front sample, with the data the curvature
/// inequalities are checked against.
#[derive(Clone, Debug)]
pub struct FrontReflection {
    pub sample: usize,
    pub t: f64,
    pub obstacle: usize,
    /// Incidence angle from the outward obstacle normal (equals the angle
    /// of the outgoing front normal).
    pub phi: f64,
    pub k_min_before: f64,
    pub k_min_after: f64,
    /// Smallest principal curvature of the obstacle boundary at the point.
    pub obstacle_kappa_min: f64,
}

/// How one sample's propagation ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrackOutcome {
    Exited,
    Cutoff,
    /// Per-sample failure (focal point, grazing jump, ...); the sample
    /// becomes a hole in the propagated patch.
    Failed(String),
}

/// Piecewise propagation record of one sample: front states at the start
/// of every geodesic arc.
#[derive(Clone, Debug)]
pub struct FrontTrack {
    pub arcs: Vec<FrontState>,
    pub reflections: Vec<FrontReflection>,
    pub tangency_times: Vec<f64>,
    pub outcome: TrackOutcome,
    pub end_time: f64,
    /// (t, min principal curvature) checkpoints, increasing in t.
    pub curvature_log: Vec<(f64, f64)>,
}

impl FrontTrack {
    /// Front state at absolute time `t`, re-propagated from the arc start.
    pub fn state_at(&self, chart: &MetricChart, t: f64) -> Result<FrontState, FrontError> {
        let t = t.min(self.end_time);
        let mut base = &self.arcs[0];
        for arc in &self.arcs {
            if arc.t <= t + 1e-14 {
                base = arc;
            } else {
                break;
            }
        }
        if t - base.t < 1e-14 {
            return Ok(base.clone());
        }
        propagate_shape_operator(chart, base, t - base.t, &EventOptions::default().step)
    }

    /// Infimum of the minimum principal curvature over `[0, t]`.
    pub fn min_curvature_until(&self, t: f64) -> f64 {
        self.curvature_log
            .iter()
            .filter(|(tt, _)| *tt <= t + 1e-12)
            .map(|(_, k)| *k)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn last_reflection_time_until(&self, t: f64) -> Option<f64> {
        self.reflections.iter().filter(|r| r.t <= t + 1e-12).map(|r| r.t).next_back()
    }
}

/// A propagated patch: per-sample tracks plus the aggregate curvature data.
#[derive(Clone, Debug)]
pub struct PropagatedPatch {
    pub initial: FrontPatch,
    pub tracks: Vec<Option<FrontTrack>>,
    pub reflections: Vec<FrontReflection>,
    /// Global infimum of min principal curvature over all samples, times.
    pub min_curvature_observed: f64,
    /// Smallest post-reflection min principal curvature.
    pub min_post_reflection_curvature: f64,
}

impl PropagatedPatch {
    /// Snapshot of the patch at absolute time `t`; samples whose tracks
    /// ended earlier (exit, failure) become holes.
    pub fn patch_at(&self, chart: &MetricChart, t: f64) -> FrontPatch {
        let states = self
            .tracks
            .iter()
            .map(|tr| {
                tr.as_ref().and_then(|tr| {
                    if t <= tr.end_time + 1e-12 {
                        tr.state_at(chart, t).ok()
                    } else {
                        None
                    }
                })
            })
            .collect();
        FrontPatch {
            grid: self.initial.grid.clone(),
            params: self.initial.params.clone(),
            states,
            provenance: format!("{} propagated to t={t}", self.initial.provenance),
        }
    }
}

/// Propagates one front state through the billiard flow.
pub fn propagate_front_state(
    scene: &Scene,
    start: &FrontState,
    limits: &FrontLimits,
    opts: &EventOptions,
) -> Result<FrontTrack, FrontError> {
    let chart = &scene.chart;
    let mut arcs = vec![start.clone()];
    let mut reflections = Vec::new();
    let mut tangency_times = Vec::new();
    let mut curvature_log = vec![(start.t, start.min_curvature())];
    let mut current = start.clone();
    let mut refl_count = 0usize;

    loop {
        if refl_count >= limits.max_reflections {
            return Ok(FrontTrack {
                arcs,
                reflections,
                tangency_times,
                outcome: TrackOutcome::Cutoff,
                end_time: current.t,
                curvature_log,
            });
        }
        let budget = limits.t_max - current.t;
        if budget <= 0.0 {
            return Ok(FrontTrack {
                arcs,
                reflections,
                tangency_times,
                outcome: TrackOutcome::Cutoff,
                end_time: current.t,
                curvature_log,
            });
        }

        let ev = step_to_event(scene, &current.base, budget, opts)?;
        // co-integrate the front over the arc, logging curvature checkpoints
        let arc_len = ev.t;
        let checkpoints = 24;
        let mut moved = current.clone();
        for k in 1..=checkpoints {
            let target = arc_len * k as f64 / checkpoints as f64;
            let dt = target - (moved.t - current.t);
            moved = propagate_shape_operator(chart, &moved, dt.max(0.0), &opts.step)?;
            curvature_log.push((moved.t, moved.min_curvature()));
        }
        // pin the front base to the refined event point
        moved.base = ev.state_before.clone();

        match ev.kind {
            EventKind::Exit => {
                arcs.push(moved.clone());
                return Ok(FrontTrack {
                    arcs,
                    reflections,
                    tangency_times,
                    outcome: TrackOutcome::Exited,
                    end_time: moved.t,
                    curvature_log,
                });
            }
            EventKind::Cutoff => {
                arcs.push(moved.clone());
                return Ok(FrontTrack {
                    arcs,
                    reflections,
                    tangency_times,
                    outcome: TrackOutcome::Cutoff,
                    end_time: moved.t,
                    curvature_log,
                });
            }
            EventKind::Tangency { .. } => {
                // grazing does not deflect the front
                tangency_times.push(moved.t);
                current = moved;
                arcs.push(current.clone());
            }
            EventKind::Reflection { obstacle } => {
                let body = scene
                    .obstacles
                    .iter()
                    .find(|b| b.label == obstacle)
                    .expect("event labels come from the scene");
                let (s_k, tau, n_k) = boundary_shape_operator(body, chart, &moved.base.x)?;
                let k_min_before = moved.min_curvature();
                let bounced = reflect_shape_operator(chart, &moved, &s_k, &tau, &n_k, opts.tangency_tol)?;
                let phi = ev.incidence_angle.unwrap_or(f64::NAN);
                let rec = FrontReflection {
                    sample: usize::MAX,
                    t: bounced.t,
                    obstacle,
                    phi,
                    k_min_before,
                    k_min_after: bounced.min_curvature(),
                    obstacle_kappa_min: s_k.symmetric_eigenvalues().min(),
                };
                curvature_log.push((bounced.t, rec.k_min_after));
                reflections.push(rec);
                refl_count += 1;
                current = bounced;
                arcs.push(current.clone());
            }
        }
    }
}

/// Propagates every sample of a patch; per-sample errors become holes with
/// their reason recorded, and samples run concurrently with a
/// deterministic index-ordered merge.
pub fn propagate_front_patch(
    scene: &Scene,
    patch: &FrontPatch,
    limits: &FrontLimits,
    opts: &EventOptions,
) -> PropagatedPatch {
    let tracks: Vec<Option<FrontTrack>> = patch
        .states
        .par_iter()
        .enumerate()
        .map(|(i, st)| {
            st.as_ref().map(|st| match propagate_front_state(scene, st, limits, opts) {
                Ok(mut tr) => {
                    for r in &mut tr.reflections {
                        r.sample = i;
                    }
                    tr
                }
                Err(e) => FrontTrack {
                    arcs: vec![st.clone()],
                    reflections: Vec::new(),
                    tangency_times: Vec::new(),
                    outcome: TrackOutcome::Failed(e.to_string()),
                    end_time: st.t,
                    curvature_log: vec![(st.t, st.min_curvature())],
                },
            })
        })
        .collect();

    let mut reflections = Vec::new();
    let mut min_obs = f64::INFINITY;
    let mut min_post = f64::INFINITY;
    for tr in tracks.iter().flatten() {
        for (_, k) in &tr.curvature_log {
            min_obs = min_obs.min(*k);
        }
        for r in &tr.reflections {
            min_post = min_post.min(r.k_min_after);
            reflections.push(r.clone());
        }
    }
    PropagatedPatch {
        initial: patch.clone(),
        tracks,
        reflections,
        min_curvature_observed: min_obs,
        min_post_reflection_curvature: min_post,
    }
}

/// Report of the front distance-growth check between two patch parameters.
#[derive(Clone, Debug)]
pub struct SeparationReport {
    pub u0: f64,
    pub u1: f64,
    pub t: f64,
    pub d_initial: f64,
    pub d_propagated: f64,
    /// Infimum of min principal curvature over the sub-patch and `[0, t]`.
    pub k_min_interval: f64,
    /// Min principal curvature of the propagated sub-patch at time `t`.
    pub k_min_final: f64,
    /// Last reflection time in `[0, t]` over the sub-patch samples, if any.
    pub t_last_reflection: Option<f64>,
    /// Bound using the interval-infimum curvature and the last reflection
    /// time (`t` itself when no reflection occurred).
    pub bound_interval: f64,
    /// Same bound under the final-time curvature reading.
    pub bound_final: f64,
    pub holds_interval: bool,
    pub holds_final: bool,
}

/// Checks the distance growth `d_t >= d_0 * exp(t_n * k_min)` between two
/// parameters of a propagated patch.
pub fn front_separation_check(
    scene: &Scene,
    propagated: &PropagatedPatch,
    u0: f64,
    u1: f64,
    t: f64,
) -> Result<SeparationReport, FrontError> {
    let chart = &scene.chart;
    // parameters snap to the nearest grid samples; the report records the
    // snapped values
    let (i0, i1) = (
        propagated.initial.nearest_index(u0.min(u1)),
        propagated.initial.nearest_index(u0.max(u1)),
    );
    let u0 = propagated.initial.params[i0][0];
    let u1 = propagated.initial.params[i1][0];
    let d_initial = propagated.initial.arc_length_between(chart, u0, u1)?;
    let snapshot = propagated.patch_at(chart, t);
    let d_propagated = snapshot.arc_length_between(chart, u0, u1)?;

    let mut k_min_interval = f64::INFINITY;
    let mut t_last_reflection: Option<f64> = None;
    for idx in i0..=i1 {
        let Some(track) = &propagated.tracks[idx] else {
            return Err(FrontError::NotComparable { u0, u1 });
        };
        k_min_interval = k_min_interval.min(track.min_curvature_until(t));
        if let Some(tr) = track.last_reflection_time_until(t) {
            t_last_reflection = Some(t_last_reflection.map_or(tr, |x: f64| x.max(tr)));
        }
    }
    let k_min_final = snapshot
        .states
        .iter()
        .skip(i0)
        .take(i1 - i0 + 1)
        .flatten()
        .map(|s| s.min_curvature())
        .fold(f64::INFINITY, f64::min);

    let t_n = t_last_reflection.unwrap_or(t);
    let bound_interval = d_initial * (t_n * k_min_interval).exp();
    let bound_final = d_initial * (t_n * k_min_final).exp();
    let slack = 1e-9 * d_initial.max(1.0);
    Ok(SeparationReport {
        u0,
        u1,
        t,
        d_initial,
        d_propagated,
        k_min_interval,
        k_min_final,
        t_last_reflection,
        bound_interval,
        bound_final,
        holds_interval: d_propagated + slack >= bound_interval,
        holds_final: d_propagated + slack >= bound_final,
    })
}
