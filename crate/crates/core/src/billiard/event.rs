//! Event detection along the billiard flow: geodesic integration until the
//! first boundary crossing or grazing, with bracketing and refinement of
//! the event time.

use nalgebra::DVector;

use crate::error::{BilliardError, GeomError};
use crate::geometry::{geodesic_flow_rhs, DenseStep, Dopri5, MetricChart, PhasePoint, StepControl};
use crate::rootfind::brent;
use crate::scene::{ImplicitBody, Scene};

/// Detection thresholds and integrator policy for the billiard flow.
#[derive(Clone, Debug)]
pub struct EventOptions {
    /// A hit with `|<v, n_K>|` below this is a tangency and does not deflect.
    pub tangency_tol: f64,
    /// Refinement target on `|psi|` at event points.
    pub psi_tol: f64,
    /// Band on `|psi|` at a grazing minimum that still counts as touching.
    pub graze_band: f64,
    pub step: StepControl,
}

impl Default for EventOptions {
    fn default() -> Self {
        EventOptions { tangency_tol: 1e-6, psi_tol: 1e-10, graze_band: 1e-9, step: StepControl::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Reflection { obstacle: usize },
    Tangency { obstacle: usize },
    Exit,
    Cutoff,
}

/// One event of the billiard flow. `t` is measured from the state that
/// started the search; `incidence_angle` (radians from the outward obstacle
/// normal, 0 = head-on) is present for reflections and tangencies.
#[derive(Clone, Debug)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state_before: PhasePoint,
    pub state_after: PhasePoint,
    pub incidence_angle: Option<f64>,
}

/// Specular reflection of `v` in the unit outward normal `n_k` at `x`:
/// `v - 2 <v, n_k> n_k`.
///
/// Requires an incoming velocity; grazing input is an error so the caller
/// can classify the hit as a tangency instead.
pub fn reflect(
    chart: &MetricChart,
    x: &DVector<f64>,
    v: &DVector<f64>,
    n_k: &DVector<f64>,
        tangency_tol: f64,
) -> Result<DVector<f64>, BilliardError> {
    let dot = chart.inner(x, v, n_k);
    if dot.abs() < tangency_tol {
        return Err(BilliardError::GrazingReflection { dot });
    }
    debug_assert!(dot < 0.0, "reflect expects an incoming velocity");
    Ok(v - n_k * (2.0 * dot))
}

/// Outward unit normal of an implicit body at `x`.
pub fn outward_normal(
    chart: &MetricChart,
    body: &ImplicitBody,
    x: &DVector<f64>,
) -> Result<DVector<f64>, GeomError> {
    let grad = chart.metric_inverse(x)? * body.grad_psi(x);
    chart.unit(x, &grad)
}

/// d/dt of `psi` along the coordinate velocity (plain chain rule).
fn psi_rate(body: &ImplicitBody, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
    body.grad_psi(x).dot(v)
}

fn split_state(n: usize, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    (y.rows(0, n).into_owned(), y.rows(n, n).into_owned())
}

fn pack_state(p: &PhasePoint) -> DVector<f64> {
    let n = p.dim();
    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(&p.x);
    y.rows_mut(n, n).copy_from(&p.v);
    y
}

/// Re-integrates precisely from a step start to a requested interior time.
struct Replayer<'a> {
    chart: &'a MetricChart,
    t0: f64,
    y0: DVector<f64>,
    tol: f64,
}

impl<'a> Replayer<'a> {
    fn state_at(&self, t: f64) -> Result<(DVector<f64>, DVector<f64>), GeomError> {
        let n = self.chart.dim();
        if t <= self.t0 {
            return Ok(split_state(n, &self.y0));
        }
        let rhs =
            |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(self.chart, tt, y, dy);
        let ctl = StepControl { tol: self.tol, h_init: (t - self.t0).max(1e-12), ..Default::default() };
        let mut stepper = Dopri5::new(&rhs, self.t0, self.y0.clone(), ctl);
        stepper.run_to(t)?;
        Ok(split_state(n, &stepper.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Candidate {
    Crossing { body: usize, t_lo: f64, t_hi: f64 },
    Graze { body: usize, t: f64, psi: f64 },
    ExitCrossing { t_lo: f64, t_hi: f64 },
}

impl Candidate {
    fn time(&self) -> f64 {
        match self {
            Candidate::Crossing { t_hi, .. } => *t_hi,
            Candidate::Graze { t, .. } => *t,
            Candidate::ExitCrossing { t_hi, .. } => *t_hi,
        }
    }
}

/// Integrates the geodesic from `state` until the first billiard event or
/// `t_max`, refining the event time until `|psi| <= psi_tol`.
pub fn step_to_event(
    scene: &Scene,
    state: &PhasePoint,
    t_max: f64,
    opts: &EventOptions,
) -> Result<Event, BilliardError> {
    let chart = &scene.chart;
    let n = chart.dim();

    // a start inside an obstacle is an error; a start outside the exterior
    // body is tolerated (the ray simply has not entered yet, and the exit
    // event only fires on an inside-to-outside crossing)
    let min_obs0 = scene
        .obstacles
        .iter()
        .map(|b| b.psi(&state.x))
        .fold(f64::INFINITY, f64::min);
    let start_tol = 1e-7;
    if min_obs0 < -start_tol {
        return Err(BilliardError::StartOutsideDomain {
            psi_exterior: scene.exterior.psi(&state.x),
            min_obstacle_psi: min_obs0,
        });
    }

    // a body is armed once the ray is genuinely outside it; bodies the ray
    // starts on (post-reflection or post-tangency) arm after departure
    let arm_tol = 1e-8;
    let mut armed: Vec<bool> = scene.obstacles.iter().map(|b| b.psi(&state.x) > arm_tol).collect();

    let rhs = |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(chart, tt, y, dy);
    let mut stepper = Dopri5::new(&rhs, 0.0, pack_state(state), opts.step.clone());

    let near_cap = if scene.summary.d_min.is_finite() {
        scene.summary.d_min / 4.0
    } else {
        scene.summary.diameter / 8.0
    };
    let cap_floor = near_cap / 25.0;

    while stepper.t < t_max {
        // cap the step near obstacle boundaries to avoid tunnelling
        let (x_now, _) = split_state(n, &stepper.y);
        let clearance = scene.obstacle_clearance(&x_now).abs();
        let mut h_cap = (t_max - stepper.t).max(1e-15);
        h_cap = h_cap.min(scene.summary.diameter / 8.0);
        if clearance < scene.summary.d_min.min(scene.summary.diameter) {
            h_cap = h_cap.min(near_cap).min((clearance * 0.5).max(cap_floor));
        }

        let step = stepper.step(h_cap)?;
        let (x0, v0) = split_state(n, &step.y0);
        let (x1, v1) = split_state(n, &step.y1);
        if !chart.contains(&x1) {
            return Err(BilliardError::Geometry(GeomError::DomainExit {
                t: step.t1(),
                last_x: x1,
                last_v: v1,
            }));
        }

        let mut candidates: Vec<Candidate> = Vec::new();

        // exterior exit: psi_S crosses from inside (<= 0) to outside (> 0)
        let pe0 = scene.exterior.psi(&x0);
        let pe1 = scene.exterior.psi(&x1);
        if pe0 <= 0.0 && pe1 > 0.0 {
            candidates.push(Candidate::ExitCrossing { t_lo: step.t0, t_hi: step.t1() });
        }

        for (i, body) in scene.obstacles.iter().enumerate() {
            let p0 = body.psi(&x0);
            let p1 = body.psi(&x1);
            if armed[i] {
                if p0 > 0.0 && p1 <= 0.0 {
                    candidates.push(Candidate::Crossing { body: i, t_lo: step.t0, t_hi: step.t1() });
                } else if p0 > 0.0 && p1 > 0.0 {
                    // look for an interior minimum: approach then recede
                    let d0 = psi_rate(body, &x0, &v0);
                    let d1 = psi_rate(body, &x1, &v1);
                    if d0 < 0.0 && d1 > 0.0 {
                        if let Some(c) = locate_graze(chart, body, &step, i, opts) {
                            candidates.push(c);
                        }
                    }
                }
            }
            if p1 > arm_tol {
                armed[i] = true;
            }
        }

        if candidates.is_empty() {
            continue;
        }
        candidates.sort_by(|a, b| a.time().total_cmp(&b.time()));

        let replay = Replayer { chart, t0: step.t0, y0: step.y0.clone(), tol: opts.step.tol.min(1e-12) };

        for cand in candidates {
            match cand {
                Candidate::ExitCrossing { t_lo, t_hi } => {
                    let (t_ev, x_ev, v_ev) =
                        refine_crossing(chart, &scene.exterior, &step, &replay, t_lo, t_hi, opts)?;
                    let before = PhasePoint { x: x_ev.clone(), v: chart.unit(&x_ev, &v_ev)? };
                    return Ok(Event {
                        kind: EventKind::Exit,
                        t: t_ev,
                        state_after: before.clone(),
                        state_before: before,
                        incidence_angle: None,
                    });
                }
                Candidate::Crossing { body, t_lo, t_hi } => {
                    let obstacle = &scene.obstacles[body];
                    let (t_ev, x_ev, v_ev) =
                        refine_crossing(chart, obstacle, &step, &replay, t_lo, t_hi, opts)?;
                    return finish_obstacle_event(scene, body, t_ev, x_ev, v_ev, opts);
                }
                Candidate::Graze { body, t, psi } => {
                    // a clean grazing minimum: touching only within the band
                    if psi.abs() > opts.graze_band {
                        continue;
                    }
                    let (x_ev, v_ev) = replay.state_at(t)?;
                    return finish_obstacle_event(scene, body, t, x_ev, v_ev, opts);
                }
            }
        }
    }

    // cutoff: report the state at t_max
    let replay_final = Replayer { chart, t0: stepper.t, y0: stepper.y.clone(), tol: opts.step.tol };
    let (x_end, v_end) = replay_final.state_at(t_max.max(stepper.t))?;
    let state_end = PhasePoint { x: x_end.clone(), v: chart.unit(&x_end, &v_end)? };
    Ok(Event {
        kind: EventKind::Cutoff,
        t: t_max,
        state_before: state_end.clone(),
        state_after: state_end,
        incidence_angle: None,
    })
}

/// Finds an interior minimum of psi within the step and classifies it.
///
/// Returns a crossing candidate when the minimum dips below zero, a graze
/// candidate otherwise.
fn locate_graze(
    chart: &MetricChart,
    body: &ImplicitBody,
    step: &DenseStep,
    body_idx: usize,
    opts: &EventOptions,
) -> Option<Candidate> {
    let n = chart.dim();
    let rate_at = |t: f64| {
        let y = step.eval(t);
        let (x, v) = split_state(n, &y);
        psi_rate(body, &x, &v)
    };
    let (ta, tb) = (step.t0, step.t1());
    let (ra, rb) = (rate_at(ta), rate_at(tb));
    if !(ra < 0.0 && rb > 0.0) {
        return None;
    }
    let (t_min, _) = brent(rate_at, ta, tb, ra, rb, 1e-13 * step.h.max(1e-6), 0.0, 80);

    // polish the minimum on the exact flow with a guarded Newton on dpsi/dt
    let replay = Replayer { chart, t0: step.t0, y0: step.y0.clone(), tol: opts.step.tol.min(1e-12) };
    let mut t = t_min;
    for _ in 0..6 {
        let Ok((x, v)) = replay.state_at(t) else { return None };
        let r = psi_rate(body, &x, &v);
        let acc = -chart.christoffel_apply(&x, &v, &v);
        let curv = (body.hess_psi(&x) * &v).dot(&v) + body.grad_psi(&x).dot(&acc);
        if curv.abs() < 1e-300 {
            break;
        }
        let dt = r / curv;
        t = (t - dt).clamp(ta, tb);
        if dt.abs() < 1e-15 * t.abs().max(1e-9) {
            break;
        }
    }
    let (x, _) = replay.state_at(t).ok()?;
    let psi = body.psi(&x);
    if psi < -opts.psi_tol {
        // dipped inside: the first crossing lies before the minimum
        Some(Candidate::Crossing { body: body_idx, t_lo: step.t0, t_hi: t })
    } else {
        Some(Candidate::Graze { body: body_idx, t, psi })
    }
}

/// Brent on the dense interpolant followed by Newton on the exact flow.
fn refine_crossing(
    chart: &MetricChart,
    body: &ImplicitBody,
    step: &DenseStep,
    replay: &Replayer,
    t_lo: f64,
    t_hi: f64,
    opts: &EventOptions,
) -> Result<(f64, DVector<f64>, DVector<f64>), BilliardError> {
    let n = chart.dim();
    let psi_dense = |t: f64| {
        let y = step.eval(t);
        body.psi(&y.rows(0, n).into_owned())
    };
    let (pa, pb) = (psi_dense(t_lo), psi_dense(t_hi));
    let mut t = if pa * pb <= 0.0 {
        brent(psi_dense, t_lo, t_hi, pa, pb, 1e-14 * step.h.max(1e-9), 0.0, 80).0
    } else {
        0.5 * (t_lo + t_hi)
    };

    let mut best: Option<(f64, DVector<f64>, DVector<f64>, f64)> = None;
    for iter in 0..16 {
        let (x, v) = replay.state_at(t)?;
        let psi = body.psi(&x);
        if best.as_ref().is_none_or(|b| psi.abs() < b.3) {
            best = Some((t, x.clone(), v.clone(), psi.abs()));
        }
        if psi.abs() <= opts.psi_tol {
            let (t, x, v, _) = best.unwrap();
            return Ok((t, x, v));
        }
        let rate = psi_rate(body, &x, &v);
        if rate.abs() < 1e-300 {
            break;
        }
        let mut dt = psi / rate;
        // keep the iterate inside the bracket
        let max_move = (t_hi - t_lo).abs();
        dt = dt.clamp(-max_move, max_move);
        t = (t - dt).clamp(t_lo.min(t_hi), t_lo.max(t_hi));
        if iter > 10 && dt.abs() < 1e-16 {
            break;
        }
    }
    let (t, x, v, psi) = best.unwrap();
    if psi <= opts.psi_tol * 1e3 {
        // accept a slightly looser event rather than failing the trace
        return Ok((t, x, v));
    }
    Err(BilliardError::EventRefinement { psi, iters: 16 })
}

fn finish_obstacle_event(
    scene: &Scene,
    body_idx: usize,
    t_ev: f64,
    x_ev: DVector<f64>,
    v_ev: DVector<f64>,
    opts: &EventOptions,
) -> Result<Event, BilliardError> {
    let chart = &scene.chart;
    let body = &scene.obstacles[body_idx];
    let v_unit = chart.unit(&x_ev, &v_ev)?;
    let n_k = outward_normal(chart, body, &x_ev)?;
    let dot = chart.inner(&x_ev, &v_unit, &n_k);
    let incidence = (-dot).clamp(-1.0, 1.0).acos();
    let before = PhasePoint { x: x_ev.clone(), v: v_unit.clone() };

    if dot.abs() < opts.tangency_tol {
        return Ok(Event {
            kind: EventKind::Tangency { obstacle: body.label },
            t: t_ev,
            state_after: before.clone(),
            state_before: before,
            incidence_angle: Some(incidence),
        });
    }
    let v_out = reflect(chart, &x_ev, &v_unit, &n_k, opts.tangency_tol)?;
    let after = PhasePoint { x: x_ev, v: chart.unit(&before.x, &v_out)? };
    Ok(Event {
        kind: EventKind::Reflection { obstacle: body.label },
        t: t_ev,
        state_before: before,
        state_after: after,
        incidence_angle: Some(incidence),
    })
}

/// Labels of obstacles touched by the smooth geodesic (no reflections) from
/// `state`, traced until it exits the exterior body or `t_max` elapses.
///
/// Touching means a sign change of psi or a grazing minimum within
/// `touch_tol`. Used by the general-position check.
pub fn smooth_ray_obstacle_hits(
    scene: &Scene,
    state: &PhasePoint,
    t_max: f64,
    touch_tol: f64,
) -> Result<Vec<usize>, BilliardError> {
    let chart = &scene.chart;
    let n = chart.dim();
    let rhs = |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(chart, tt, y, dy);
    let opts = EventOptions::default();
    let mut stepper = Dopri5::new(&rhs, 0.0, pack_state(state), opts.step.clone());
    let mut hit: Vec<bool> = vec![false; scene.obstacles.len()];

    while stepper.t < t_max {
        let h_cap = (t_max - stepper.t).min(scene.summary.d_min.min(scene.summary.diameter) / 4.0);
        let step = match stepper.step(h_cap.max(1e-12)) {
            Ok(s) => s,
            Err(GeomError::StepUnderflow { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        let (x0, v0) = split_state(n, &step.y0);
        let (x1, v1) = split_state(n, &step.y1);
        if !chart.contains(&x1) {
            break;
        }

        for (i, body) in scene.obstacles.iter().enumerate() {
            if hit[i] {
                continue;
            }
            let p0 = body.psi(&x0);
            let p1 = body.psi(&x1);
            if p0 <= touch_tol || p1 <= touch_tol || (p0 > 0.0) != (p1 > 0.0) {
                hit[i] = true;
                continue;
            }
            let d0 = psi_rate(body, &x0, &v0);
            let d1 = psi_rate(body, &x1, &v1);
            if d0 < 0.0 && d1 > 0.0 {
                match locate_graze(chart, body, &step, i, &opts) {
                    Some(Candidate::Crossing { .. }) => hit[i] = true,
                    Some(Candidate::Graze { psi, .. }) if psi <= touch_tol => hit[i] = true,
                    _ => {}
                }
            }
        }

        // leave once outside the exterior body
        if scene.exterior.psi(&x1) > 0.0 {
            break;
        }
    }
    Ok(hit
        .iter()
        .enumerate()
        .filter(|(_, h)| **h)
        .map(|(i, _)| scene.obstacles[i].label)
        .collect())
}
