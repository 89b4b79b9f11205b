//! Orthogonal-collision probe between two convex fronts: isolates the
//! parameters of one front whose normal geodesic meets the other front
//! orthogonally, as a numerical witness that such parameters are discrete.

use nalgebra::DVector;

use crate::error::FrontError;
use crate::geometry::{geodesic_flow_rhs, Dopri5, MetricChart, PhasePoint, StepControl};

use super::state::FrontPatch;

#[derive(Clone, Debug)]
pub struct CollisionOptions {
    /// Ray budget before a sample counts as a miss.
    pub t_max: f64,
    /// Defect magnitude below which a contiguous run of samples counts as
    /// degenerate alignment.
    pub degenerate_tol: f64,
    /// Fraction of hitting samples that must be near-zero to report a
    /// discreteness violation.
    pub degenerate_fraction: f64,
    pub bisection_steps: usize,
}

impl Default for CollisionOptions {
    fn default() -> Self {
        CollisionOptions {
            t_max: 50.0,
            degenerate_tol: 3e-4,
            degenerate_fraction: 0.25,
            bisection_steps: 48,
        }
    }
}

/// An isolated orthogonal hit.
#[derive(Clone, Debug)]
pub struct OrthogonalRoot {
    /// Parameter on the probing front.
    pub param: f64,
    pub t_hit: f64,
    pub hit_point: DVector<f64>,
    /// Curvature of the probing front at the root parameter.
    pub k_x: f64,
    /// Curvature of the target front at the hit, expressed with respect to
    /// the arriving ray direction as normal.
    pub k_y_along_ray: f64,
    /// Parameter distance to the nearest other root (or to the patch edge).
    pub separation_radius: f64,
    /// Largest floor `k` with `k_y < -k < 0 < k < k_x`; positive iff the
    /// curvature hypothesis holds at this root.
    pub k_floor: f64,
}

#[derive(Clone, Debug)]
pub enum CollisionReport {
    Roots(Vec<OrthogonalRoot>),
    /// The defect is near zero on a sizeable run of parameters; the
    /// curvature hypothesis is likely violated. Reported, not asserted.
    DiscretenessViolated {
        near_zero_fraction: f64,
        k_y_along_ray_range: (f64, f64),
        note: String,
    },
}

/// Crossing of the geodesic from `state` with the polyline of `target`:
/// returns (ray time, polyline parameter, crossing point, unit ray velocity
/// there).
fn ray_hits_polyline(
    chart: &MetricChart,
    state: &PhasePoint,
    target: &FrontPatch,
    t_max: f64,
) -> Result<Option<(f64, f64, DVector<f64>, DVector<f64>)>, FrontError> {
    let n = chart.dim();
    let rhs = |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(chart, tt, y, dy);
    let mut y0 = DVector::zeros(2 * n);
    y0.rows_mut(0, n).copy_from(&state.x);
    y0.rows_mut(n, n).copy_from(&state.v);
    let ctl = StepControl { tol: 1e-11, h_init: 1e-2, h_max: 0.25, ..Default::default() };
    let mut stepper = Dopri5::new(&rhs, 0.0, y0, ctl);

    // polyline segments of present samples, with bounding boxes
    struct Seg<'a> {
        j: usize,
        a: &'a DVector<f64>,
        b: &'a DVector<f64>,
        lo: [f64; 2],
        hi: [f64; 2],
    }
    let segs: Vec<Seg> = target
        .states
        .windows(2)
        .enumerate()
        .filter_map(|(j, w)| match (&w[0], &w[1]) {
            (Some(a), Some(b)) => {
                let (pa, pb) = (&a.base.x, &b.base.x);
                Some(Seg {
                    j,
                    a: pa,
                    b: pb,
                    lo: [pa[0].min(pb[0]), pa[1].min(pb[1])],
                    hi: [pa[0].max(pb[0]), pa[1].max(pb[1])],
                })
            }
            _ => None,
        })
        .collect();

    let cross = |p: &DVector<f64>, q: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>| -> Option<(f64, f64)> {
        // 2D segment intersection in chart coordinates
        let r = q - p;
        let s = b - a;
        let denom = r[0] * s[1] - r[1] * s[0];
        if denom.abs() < 1e-300 {
            return None;
        }
        let ap = a - p;
        let t = (ap[0] * s[1] - ap[1] * s[0]) / denom;
        let u = (ap[0] * r[1] - ap[1] * r[0]) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            Some((t, u))
        } else {
            None
        }
    };

    while stepper.t < t_max {
        let step = stepper.step(t_max - stepper.t)?;
        // subdivide the dense step into chords
        let sub = 4;
        for k in 0..sub {
            let ta = step.t0 + step.h * k as f64 / sub as f64;
            let tb = step.t0 + step.h * (k + 1) as f64 / sub as f64;
            let ya = step.eval(ta);
            let yb = step.eval(tb);
            let pa = ya.rows(0, n).into_owned();
            let pb = yb.rows(0, n).into_owned();
            let clo = [pa[0].min(pb[0]), pa[1].min(pb[1])];
            let chi = [pa[0].max(pb[0]), pa[1].max(pb[1])];
            for seg in &segs {
                if clo[0] > seg.hi[0] || chi[0] < seg.lo[0] || clo[1] > seg.hi[1] || chi[1] < seg.lo[1]
                {
                    continue;
                }
                if let Some((tf, uf)) = cross(&pa, &pb, seg.a, seg.b) {
                    let t_hit = ta + (tb - ta) * tf;
                    let yh = step.eval(t_hit);
                    let xh = yh.rows(0, n).into_owned();
                    let vh = chart.unit(&xh, &yh.rows(n, n).into_owned())?;
                    let w = target.params[seg.j][0]
                        + (target.params[seg.j + 1][0] - target.params[seg.j][0]) * uf;
                    return Ok(Some((t_hit, w, xh, vh)));
                }
            }
        }
        if !chart.contains(&stepper.y.rows(0, n).into_owned()) {
            break;
        }
    }
    Ok(None)
}

/// Orthogonality defect of the probe ray from sample state `state`:
/// the inner product of the arriving ray direction with the target's unit
/// tangent at the hit. None when the ray misses.
///
/// The tangent comes from the target's interpolated unit normal (rotated a
/// quarter turn and metric-orthonormalized), which is one order more
/// accurate than the polyline chord.
#[allow(clippy::type_complexity)]
fn defect_of_state(
    chart: &MetricChart,
    state: &PhasePoint,
    target: &FrontPatch,
    opts: &CollisionOptions,
) -> Result<Option<(f64, f64, f64, DVector<f64>, DVector<f64>)>, FrontError> {
    let Some((t_hit, w, xh, vh)) = ray_hits_polyline(chart, state, target, opts.t_max)? else {
        return Ok(None);
    };
    // bracketing samples of the hit parameter
    let m = target.len();
    let mut ja = 0;
    while ja + 1 < m && target.params[ja + 1][0] < w {
        ja += 1;
    }
    let jb = (ja + 1).min(m - 1);
    let (Some(a), Some(b)) = (&target.states[ja], &target.states[jb]) else {
        return Ok(None);
    };
    let (ua, ub) = (target.params[ja][0], target.params[jb][0]);
    let f = if (ub - ua).abs() < 1e-300 { 0.0 } else { ((w - ua) / (ub - ua)).clamp(0.0, 1.0) };
    let n_interp = &a.base.v * (1.0 - f) + &b.base.v * f;
    let n_unit = chart.unit(&xh, &n_interp)?;
    let mut tan = DVector::from_vec(vec![n_unit[1], -n_unit[0]]);
    let c = chart.inner(&xh, &tan, &n_unit);
    tan -= &n_unit * c;
    let tan = chart.unit(&xh, &tan)?;
    Ok(Some((chart.inner(&xh, &vh, &tan), t_hit, w, xh, vh)))
}

/// Interpolated probing state at an arbitrary parameter of the patch (2D).
fn state_at_param(chart: &MetricChart, patch: &FrontPatch, u: f64) -> Option<PhasePoint> {
    let m = patch.len();
    let mut j = 0;
    while j + 1 < m && patch.params[j + 1][0] < u {
        j += 1;
    }
    let (a, b) = (patch.states[j].as_ref()?, patch.states[(j + 1).min(m - 1)].as_ref()?);
    let (ua, ub) = (patch.params[j][0], patch.params[(j + 1).min(m - 1)][0]);
    let f = if (ub - ua).abs() < 1e-300 { 0.0 } else { ((u - ua) / (ub - ua)).clamp(0.0, 1.0) };
    let x = &a.base.x * (1.0 - f) + &b.base.x * f;
    let v = &a.base.v * (1.0 - f) + &b.base.v * f;
    PhasePoint::new(chart, x, v).ok()
}

/// Scans the probing front's normal rays for orthogonal hits on the target
/// front, isolating defect sign changes and refining them by bisection.
///
/// The target's curvature along the arriving ray flips sign when its stored
/// normal opposes the ray, so the caller's patch orientations decide the
/// hypothesis check.
pub fn front_collision_probe(
    chart: &MetricChart,
    probe: &FrontPatch,
    target: &FrontPatch,
    opts: &CollisionOptions,
) -> Result<CollisionReport, FrontError> {
    if probe.grid.len() != 1 {
        return Err(FrontError::UnsupportedDimension { dim: probe.grid.len() + 1 });
    }

    // per-sample defects
    let mut defects: Vec<Option<f64>> = Vec::with_capacity(probe.len());
    let mut k_y_values: Vec<f64> = Vec::new();
    for st in probe.states.iter() {
        match st {
            Some(st) => {
                let d = defect_of_state(chart, &st.base, target, opts)?;
                if let Some((g, _, w, xh, vh)) = &d {
                    let j = target.nearest_index(*w);
                    if let Some(ty) = &target.states[j] {
                        let aligned = chart.inner(xh, vh, &ty.base.v) >= 0.0;
                        let k = ty.min_curvature();
                        k_y_values.push(if aligned { k } else { -k });
                    }
                    defects.push(Some(*g));
                } else {
                    defects.push(None);
                }
            }
            None => defects.push(None),
        }
    }

    // degenerate alignment: a sizeable fraction of hits with near-zero defect
    let hits: Vec<f64> = defects.iter().flatten().copied().collect();
    if !hits.is_empty() {
        let near_zero = hits.iter().filter(|g| g.abs() < opts.degenerate_tol).count();
        let frac = near_zero as f64 / hits.len() as f64;
        if frac >= opts.degenerate_fraction {
            let lo = k_y_values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = k_y_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Ok(CollisionReport::DiscretenessViolated {
                near_zero_fraction: frac,
                k_y_along_ray_range: (lo, hi),
                note: if hi > 0.0 {
                    "target curvature along the ray is not negative; curvature hypothesis violated"
                        .to_string()
                } else {
                    "defect nearly vanishes on an interval".to_string()
                },
            });
        }
    }

    // sign-change isolation over consecutive hitting samples
    let mut roots: Vec<OrthogonalRoot> = Vec::new();
    for i in 0..probe.len().saturating_sub(1) {
        let (Some(ga), Some(gb)) = (defects[i], defects[i + 1]) else { continue };
        if ga == 0.0 && gb == 0.0 {
            continue;
        }
        if ga * gb > 0.0 {
            continue;
        }
        let (mut ua, mut ub) = (probe.params[i][0], probe.params[i + 1][0]);
        let (mut ga, mut gb) = (ga, gb);
        for _ in 0..opts.bisection_steps {
            let um = 0.5 * (ua + ub);
            let Some(sm) = state_at_param(chart, probe, um) else { break };
            let Some((gm, _, _, _, _)) = defect_of_state(chart, &sm, target, opts)? else { break };
            if ga * gm <= 0.0 {
                ub = um;
                gb = gm;
            } else {
                ua = um;
                ga = gm;
            }
            let _ = gb;
        }
        let u_root = 0.5 * (ua + ub);
        let Some(sr) = state_at_param(chart, probe, u_root) else { continue };
        let Some((_, t_hit, w, xh, vh)) = defect_of_state(chart, &sr, target, opts)? else { continue };
        let j = probe.nearest_index(u_root);
        let k_x = probe.states[j].as_ref().map(|s| s.min_curvature()).unwrap_or(f64::NAN);
        let jt = target.nearest_index(w);
        let k_y_along_ray = target.states[jt]
            .as_ref()
            .map(|ty| {
                let aligned = chart.inner(&xh, &vh, &ty.base.v) >= 0.0;
                if aligned {
                    ty.min_curvature()
                } else {
                    -ty.max_curvature()
                }
            })
            .unwrap_or(f64::NAN);
        roots.push(OrthogonalRoot {
            param: u_root,
            t_hit,
            hit_point: xh,
            k_x,
            k_y_along_ray,
            separation_radius: f64::INFINITY,
            k_floor: k_x.min(-k_y_along_ray),
        });
    }

    // merge duplicate detections of a root sitting on a grid sample
    let spacing = if probe.len() > 1 {
        (probe.params.last().unwrap()[0] - probe.params.first().unwrap()[0])
            / (probe.len() - 1) as f64
    } else {
        0.0
    };
    roots.sort_by(|a, b| a.param.total_cmp(&b.param));
    roots.dedup_by(|b, a| {
        if (b.param - a.param).abs() < 0.5 * spacing.abs() {
            // keep the first; they describe the same root
            true
        } else {
            false
        }
    });

    // separation radii: distance to the nearest other root, else to the
    // parameter range edge (half the span for a closed probe)
    let span = probe.params.last().map(|p| p[0]).unwrap_or(0.0)
        - probe.params.first().map(|p| p[0]).unwrap_or(0.0);
    for i in 0..roots.len() {
        let mut sep = f64::INFINITY;
        for j in 0..roots.len() {
            if i != j {
                sep = sep.min((roots[i].param - roots[j].param).abs());
            }
        }
        if sep.is_infinite() {
            sep = 0.5 * span;
        }
        roots[i].separation_radius = sep;
    }
    Ok(CollisionReport::Roots(roots))
}
