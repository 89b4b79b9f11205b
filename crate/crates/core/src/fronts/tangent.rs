//! Construction of a strictly convex front whose normal rays graze an
//! obstacle boundary.
//!
//! From a boundary point and tangent direction, boundary-tangent rays are
//! flown forward: the sample at boundary parameter `u` is the tangent ray
//! of the boundary point at arc `u`, continued for time `eps - u` past its
//! grazing point, with the flow velocity as the front normal. The patch is
//! the outgoing front of the grazing ray family: strictly convex (the flat
//! circle case is an involute with curvature `1/(eps - u)`), and the ray
//! in the inward normal direction from any sample returns to the boundary
//! tangentially. In three dimensions the boundary parametrization comes
//! from a geodesic circle of radius `eps` on the boundary surface around
//! the backward-shifted footpoint.

use nalgebra::{DMatrix, DVector};

use crate::error::{FrontError, GeomError, SceneError};
use crate::geometry::{
    geodesic_flow_rhs, integrate_geodesic, Dopri5, Frame, MetricChart, PhasePoint, StepControl,
};
use crate::scene::{ImplicitBody, Scene};

use super::state::{FrontPatch, FrontState};

/// Unit-speed geodesic on the level set `psi = 0`, integrated with a
/// stabilizing projection back onto the surface after every step.
///
/// Returns the end point and end velocity after arc length `len >= 0`.
pub fn surface_geodesic(
    chart: &MetricChart,
    body: &ImplicitBody,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    len: f64,
) -> Result<(DVector<f64>, DVector<f64>), FrontError> {
    let n = chart.dim();
    let project = |x: &mut DVector<f64>| {
        // Newton steps along the coordinate gradient onto psi = 0
        for _ in 0..4 {
            let p = body.psi(x);
            if p.abs() < 1e-13 {
                break;
            }
            let g = body.grad_psi(x);
            let g2 = g.norm_squared().max(1e-300);
            *x -= g * (p / g2);
        }
    };
    let tangentize = |x: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>, GeomError> {
        let ginv = chart.metric_inverse(x)?;
        let nrm = chart.unit(x, &(&ginv * body.grad_psi(x)))?;
        let c = chart.inner(x, v, &nrm);
        chart.unit(x, &(v - nrm * c))
    };

    let mut x = x0.clone();
    project(&mut x);
    let v = tangentize(&x, v0)?;
    if len == 0.0 {
        return Ok((x, v));
    }

    let rhs = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
        let xx = y.rows(0, n).into_owned();
        let vv = y.rows(n, n).into_owned();
        let acc_geo = -chart.christoffel_apply(&xx, &vv, &vv);
        // normal force keeping the curve on the surface:
        // grad psi . xdd = -v^T H v
        let grad = body.grad_psi(&xx);
        let hess = body.hess_psi(&xx);
        let ginv = chart.metric_inverse(&xx).unwrap_or_else(|_| DMatrix::identity(n, n));
        let normal_dir = &ginv * &grad;
        let denom = grad.dot(&normal_dir).max(1e-300);
        let lambda = (-(&hess * &vv).dot(&vv) - grad.dot(&acc_geo)) / denom;
        for i in 0..n {
            dy[i] = vv[i];
            dy[n + i] = acc_geo[i] + lambda * normal_dir[i];
        }
    };

    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(&x);
    y.rows_mut(n, n).copy_from(&v);
    let ctl = StepControl { tol: 1e-11, h_init: (len / 16.0).max(1e-6), ..Default::default() };
    let mut stepper = Dopri5::new(&rhs, 0.0, y, ctl);
    while stepper.t < len {
        let remaining = len - stepper.t;
        stepper.step(remaining.min(len / 8.0))?;
        // stabilize: project position and keep the velocity tangent
        let mut xx = stepper.y.rows(0, n).into_owned();
        project(&mut xx);
        let vv = tangentize(&xx, &stepper.y.rows(n, n).into_owned())?;
        stepper.y.rows_mut(0, n).copy_from(&xx);
        stepper.y.rows_mut(n, n).copy_from(&vv);
    }
    let x_end = stepper.y.rows(0, n).into_owned();
    let v_end = chart.unit(&x_end, &stepper.y.rows(n, n).into_owned())?;
    Ok((x_end, v_end))
}

/// Walks the boundary from `x0` by signed arc length `u` in the direction
/// `dir` (for `u < 0` the walk runs against `dir`); returns the point and
/// the forward-pointing unit tangent there.
fn boundary_walk(
    chart: &MetricChart,
    body: &ImplicitBody,
    x0: &DVector<f64>,
    dir: &DVector<f64>,
    u: f64,
) -> Result<(DVector<f64>, DVector<f64>), FrontError> {
    if u >= 0.0 {
        surface_geodesic(chart, body, x0, dir, u)
    } else {
        let (x, v) = surface_geodesic(chart, body, x0, &(-dir), -u)?;
        Ok((x, -v))
    }
}

fn locate_obstacle<'s>(scene: &'s Scene, x0: &DVector<f64>) -> Result<&'s ImplicitBody, SceneError> {
    scene
        .obstacles
        .iter()
        .find(|b| b.psi(x0).abs() <= 1e-9)
        .ok_or_else(|| SceneError::NotOnBoundary {
            label: usize::MAX,
            point: x0.iter().copied().collect(),
            psi: scene.obstacles.iter().map(|b| b.psi(x0).abs()).fold(f64::INFINITY, f64::min),
        })
}

/// Grazing defect of the forward normal ray of a front sample against the
/// obstacle: `|<v, n_K>|` at the point of closest approach.
fn grazing_defect(
    chart: &MetricChart,
    body: &ImplicitBody,
    state: &PhasePoint,
    t_scan: f64,
) -> Result<f64, FrontError> {
    let n = chart.dim();
    let rhs = |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(chart, tt, y, dy);
    let mut y0 = DVector::zeros(2 * n);
    y0.rows_mut(0, n).copy_from(&state.x);
    y0.rows_mut(n, n).copy_from(&state.v);
    let ctl = StepControl { tol: 1e-11, h_init: t_scan / 64.0, ..Default::default() };
    let mut stepper = Dopri5::new(&rhs, 0.0, y0, ctl);
    let mut best_psi = f64::INFINITY;
    let mut best_state: Option<(DVector<f64>, DVector<f64>)> = None;
    while stepper.t < t_scan {
        let step = stepper.step((t_scan - stepper.t).min(t_scan / 32.0))?;
        for k in 0..=8 {
            let t = step.t0 + step.h * k as f64 / 8.0;
            let y = step.eval(t);
            let x = y.rows(0, n).into_owned();
            let p = body.psi(&x).abs();
            if p < best_psi {
                best_psi = p;
                best_state = Some((x, y.rows(n, n).into_owned()));
            }
        }
    }
    let (x, v) = best_state.expect("scan produced at least one sample");
    // refine to the true closest approach: Newton on d psi / dt
    let mut p = PhasePoint { x: x.clone(), v: chart.unit(&x, &v)? };
    let ctl = StepControl { tol: 1e-12, h_init: 1e-4, ..Default::default() };
    for _ in 0..8 {
        let rate = body.grad_psi(&p.x).dot(&p.v);
        let acc = -chart.christoffel_apply(&p.x, &p.v, &p.v);
        let curv = (body.hess_psi(&p.x) * &p.v).dot(&p.v) + body.grad_psi(&p.x).dot(&acc);
        if curv.abs() < 1e-300 {
            break;
        }
        let dt = -rate / curv;
        if dt.abs() < 1e-15 {
            break;
        }
        p = crate::geometry::integrate_geodesic(chart, &p, dt, &ctl)?;
    }
    let ginv = chart.metric_inverse(&p.x)?;
    let n_k = chart.unit(&p.x, &(&ginv * body.grad_psi(&p.x)))?;
    Ok(chart.inner(&p.x, &p.v, &n_k).abs())
}

/// Front curvature by finite differences over the patch grid (2D): the
/// covariant rate of the normal along the patch tangent.
fn curvature_fd_2d(
    chart: &MetricChart,
    pts: &[DVector<f64>],
    normals: &[DVector<f64>],
    i: usize,
    du: f64,
) -> f64 {
    let m = pts.len();
    // central differences inside, second-order one-sided at the ends
    let diff = |f: &[DVector<f64>]| -> DVector<f64> {
        if i == 0 {
            (&f[0] * -3.0 + &f[1] * 4.0 - &f[2]) / (2.0 * du)
        } else if i == m - 1 {
            (&f[m - 1] * 3.0 - &f[m - 2] * 4.0 + &f[m - 3]) / (2.0 * du)
        } else {
            (&f[i + 1] - &f[i - 1]) / (2.0 * du)
        }
    };
    let dy = diff(pts);
    let dn = diff(normals);
    let x = &pts[i];
    let gam = chart.christoffel(x);
    let n = chart.dim();
    let mut cov = DVector::zeros(n);
    for k in 0..n {
        cov[k] = dn[k] + (&gam[k] * &normals[i]).dot(&dy);
    }
    chart.inner(x, &cov, &dy) / chart.inner(x, &dy, &dy)
}

/// Options for the tangent-front construction.
#[derive(Clone, Debug)]
pub struct TangentFrontOptions {
    /// Half-width of the boundary parameter range, as a fraction of eps.
    pub delta_fraction: f64,
    /// Samples per grid dimension.
    pub samples: usize,
    /// Grazing tolerance on `|<v, n_K>|` at closest approach.
    pub graze_tol: f64,
}

impl Default for TangentFrontOptions {
    fn default() -> Self {
        TangentFrontOptions { delta_fraction: 0.5, samples: 33, graze_tol: 1e-5 }
    }
}

/// Builds the tangent front at `x0` (a point on some obstacle boundary) in
/// the unit tangent direction `v_dir`, with backing distance `eps`.
///
/// Every sampled normal ray grazes the obstacle within the tolerance and
/// all sampled principal curvatures are positive; otherwise the
/// construction fails and advises a smaller eps.
pub fn construct_tangent_front(
    scene: &Scene,
    x0: &DVector<f64>,
    v_dir: &DVector<f64>,
    eps: f64,
    opts: &TangentFrontOptions,
) -> Result<FrontPatch, FrontError> {
    let chart = &scene.chart;
    let body = locate_obstacle(scene, x0)?;
    let n = chart.dim();
    let delta = opts.delta_fraction * eps;
    let m = opts.samples;

    // make the direction exactly tangent and unit
    let ginv = chart.metric_inverse(x0)?;
    let n_k = chart.unit(x0, &(&ginv * body.grad_psi(x0)))?;
    let mut v_dir = v_dir.clone();
    let c = chart.inner(x0, &v_dir, &n_k);
    v_dir -= &n_k * c;
    let v_dir = chart.unit(x0, &v_dir)?;

    let build_2d = || -> Result<FrontPatch, FrontError> {
        let mut params = Vec::with_capacity(m);
        let mut pts = Vec::with_capacity(m);
        let mut normals = Vec::with_capacity(m);
        for i in 0..m {
            let u = -delta + 2.0 * delta * i as f64 / (m - 1) as f64;
            let (bx, bt) = boundary_walk(chart, body, x0, &v_dir, u)?;
            let fwd = integrate_geodesic(
                chart,
                &PhasePoint { x: bx, v: bt },
                eps - u,
                &StepControl::default(),
            )?;
            params.push(vec![u]);
            normals.push(fwd.v.clone());
            pts.push(fwd.x.clone());
        }
        let du = 2.0 * delta / (m - 1) as f64;
        let mut states = Vec::with_capacity(m);
        for i in 0..m {
            let k = curvature_fd_2d(chart, &pts, &normals, i, du);
            if !(k > 0.0) {
                return Err(FrontError::ConstructionFailed {
                    eps,
                    reason: format!("non-positive sampled curvature {k:.3e} at parameter {}", params[i][0]),
                });
            }
            let base = PhasePoint { x: pts[i].clone(), v: normals[i].clone() };
            let mut st = FrontState::scalar(chart, base, k)?;
            st.t = 0.0;
            states.push(Some(st));
        }
        Ok(FrontPatch {
            grid: vec![m],
            params,
            states,
            provenance: format!("tangent-front eps={eps}"),
        })
    };

    let build_3d = || -> Result<FrontPatch, FrontError> {
        // backward footpoint and the geodesic circle of radius eps on the
        // boundary surface around it
        let (x_star, v_at_star) = surface_geodesic(chart, body, x0, &(-&v_dir), eps)?;
        let e1 = -v_at_star; // points back toward x0 along the surface
        // complete to an orthonormal tangent basis at x_star
        let ginv_s = chart.metric_inverse(&x_star)?;
        let n_s = chart.unit(&x_star, &(&ginv_s * body.grad_psi(&x_star)))?;
        let mut e2 = DVector::zeros(n);
        for i in 0..n {
            let mut cand = DVector::zeros(n);
            cand[i] = 1.0;
            let c1 = chart.inner(&x_star, &cand, &n_s);
            cand -= &n_s * c1;
            let c2 = chart.inner(&x_star, &cand, &e1);
            cand -= &e1 * c2;
            let nrm = chart.norm(&x_star, &cand);
            if nrm > 1e-6 {
                e2 = cand / nrm;
                break;
            }
        }

        let m_th = m.min(17);
        let th_span = 0.9 * delta / eps; // angular half-width of the circle arc
        let mut params = Vec::new();
        let mut pts: Vec<DVector<f64>> = Vec::new();
        let mut normals: Vec<DVector<f64>> = Vec::new();
        let mut tangents_u: Vec<DVector<f64>> = Vec::new();
        for i in 0..m {
            let u = -delta + 2.0 * delta * i as f64 / (m - 1) as f64;
            for j in 0..m_th {
                let th = -th_span + 2.0 * th_span * j as f64 / (m_th - 1) as f64;
                let d = &e1 * th.cos() + &e2 * th.sin();
                let (cx, eta) = surface_geodesic(chart, body, &x_star, &d, eps)?;
                let (bx, bt) = boundary_walk(chart, body, &cx, &eta, u)?;
                let fwd = integrate_geodesic(
                    chart,
                    &PhasePoint { x: bx, v: bt },
                    eps - u,
                    &StepControl::default(),
                )?;
                params.push(vec![u, th]);
                pts.push(fwd.x.clone());
                normals.push(fwd.v.clone());
                tangents_u.push(DVector::zeros(n));
            }
        }
        let _ = &mut tangents_u;

        // curvature from finite differences over the 2-grid
        let du = 2.0 * delta / (m - 1) as f64;
        let dth = 2.0 * th_span / (m_th - 1) as f64;
        let idx = |i: usize, j: usize| i * m_th + j;
        let mut states: Vec<Option<FrontState>> = vec![None; m * m_th];
        for i in 0..m {
            for j in 0..m_th {
                let x = &pts[idx(i, j)];
                let nrm = &normals[idx(i, j)];
                let (ia, ib, da) = if i == 0 { (0, 1, du) } else if i == m - 1 { (m - 2, m - 1, du) } else { (i - 1, i + 1, 2.0 * du) };
                let (ja, jb, db) =
                    if j == 0 { (0, 1, dth) } else if j == m_th - 1 { (m_th - 2, m_th - 1, dth) } else { (j - 1, j + 1, 2.0 * dth) };
                let t1 = (&pts[idx(ib, j)] - &pts[idx(ia, j)]) / da;
                let t2 = (&pts[idx(i, jb)] - &pts[idx(i, ja)]) / db;
                let dn1 = (&normals[idx(ib, j)] - &normals[idx(ia, j)]) / da;
                let dn2 = (&normals[idx(i, jb)] - &normals[idx(i, ja)]) / db;
                let gam = chart.christoffel(x);
                let cov = |dn: &DVector<f64>, t: &DVector<f64>| -> DVector<f64> {
                    let mut out = DVector::zeros(n);
                    for k in 0..n {
                        out[k] = dn[k] + (&gam[k] * nrm).dot(t);
                    }
                    out
                };
                let cn1 = cov(&dn1, &t1);
                let cn2 = cov(&dn2, &t2);

                // express the shape operator in the state's orthonormal frame
                let base = PhasePoint { x: x.clone(), v: chart.unit(x, nrm)? };
                let frame = Frame::orthonormal_complement(chart, base.clone())?;
                let gram = DMatrix::from_fn(2, 2, |a, b| {
                    let ta = if a == 0 { &t1 } else { &t2 };
                    let tb = if b == 0 { &t1 } else { &t2 };
                    chart.inner(x, ta, tb)
                });
                let Some(gram_inv) = gram.try_inverse() else {
                    continue;
                };
                let mut s = DMatrix::zeros(2, 2);
                for a in 0..2 {
                    for b in 0..2 {
                        // coefficients of e_a in the (t1, t2) basis
                        let ea = &frame.e[a];
                        let rhsv = DVector::from_vec(vec![
                            chart.inner(x, ea, &t1),
                            chart.inner(x, ea, &t2),
                        ]);
                        let coef = &gram_inv * rhsv;
                        let cov_ea = &cn1 * coef[0] + &cn2 * coef[1];
                        s[(a, b)] = chart.inner(x, &cov_ea, &frame.e[b]);
                    }
                }
                let s = (&s + s.transpose()) * 0.5;
                let min_eig = s.symmetric_eigenvalues().min();
                if !(min_eig > 0.0) {
                    return Err(FrontError::ConstructionFailed {
                        eps,
                        reason: format!("non-positive sampled curvature {min_eig:.3e}"),
                    });
                }
                states[idx(i, j)] = Some(FrontState { base, frame: frame.e, s, t: 0.0 });
            }
        }
        Ok(FrontPatch {
            grid: vec![m, m_th],
            params,
            states,
            provenance: format!("tangent-front eps={eps}"),
        })
    };

    let patch = if n == 2 { build_2d()? } else { build_3d()? };

    // grazing validity on a spread of samples
    let check_count = patch.len().min(9);
    for k in 0..check_count {
        let i = k * (patch.len() - 1) / (check_count - 1).max(1);
        if let Some(st) = &patch.states[i] {
            // the inward ray (against the front normal) must return to the
            // boundary tangentially
            let defect = grazing_defect(chart, body, &st.base.reversed(), 2.5 * eps)?;
            if defect > opts.graze_tol {
                return Err(FrontError::ConstructionFailed {
                    eps,
                    reason: format!("normal ray misses tangency, |<v,n_K>| = {defect:.3e}"),
                });
            }
        }
    }
    Ok(patch)
}

/// Applies the eps halving policy: start at `0.05 / kappa_min` and halve
/// until the construction validates, at most eight times.
pub fn construct_tangent_front_auto(
    scene: &Scene,
    x0: &DVector<f64>,
    v_dir: &DVector<f64>,
    opts: &TangentFrontOptions,
) -> Result<(FrontPatch, f64), FrontError> {
    let mut eps = 0.05 / scene.summary.kappa_min;
    let mut last_err = None;
    for _ in 0..=8 {
        match construct_tangent_front(scene, x0, v_dir, eps, opts) {
            Ok(p) => return Ok((p, eps)),
            Err(e) => {
                last_err = Some(e);
                eps *= 0.5;
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}
