//! Shape-operator propagation along the normal geodesic: the matrix
//! Riccati equation `s' = R_N - s^2`, co-integrated with the geodesic and
//! the parallel frame.

use nalgebra::{DMatrix, DVector};

use crate::error::{FrontError, GeomError};
use crate::geometry::{Dopri5, MetricChart, PhasePoint, StepControl};

use super::state::FrontState;

/// Eigenvalue magnitude at which propagation stops with a focal-point
/// error; focusing is physical, not a bug.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// State layout for the joint system: x, v, m frame vectors, then the
/// (n-1)^2 shape-operator entries row-major.
fn pack(f: &FrontState) -> DVector<f64> {
    let n = f.base.dim();
    let m = n - 1;
    let mut y = DVector::zeros(2 * n + m * n + m * m);
    y.rows_mut(0, n).copy_from(&f.base.x);
    y.rows_mut(n, n).copy_from(&f.base.v);
    for (j, e) in f.frame.iter().enumerate() {
        y.rows_mut((2 + j) * n, n).copy_from(e);
    }
    let off = (2 + m) * n;
    for a in 0..m {
        for b in 0..m {
            y[off + a * m + b] = f.s[(a, b)];
        }
    }
    y
}

fn unpack(n: usize, t: f64, y: &DVector<f64>) -> FrontState {
    let m = n - 1;
    let base = PhasePoint { x: y.rows(0, n).into_owned(), v: y.rows(n, n).into_owned() };
    let frame: Vec<DVector<f64>> = (0..m).map(|j| y.rows((2 + j) * n, n).into_owned()).collect();
    let off = (2 + m) * n;
    let mut s = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            s[(a, b)] = y[off + a * m + b];
        }
    }
    FrontState { base, frame, s, t }
}

fn joint_rhs(chart: &MetricChart, y: &DVector<f64>, dy: &mut DVector<f64>) {
    let n = chart.dim();
    let m = n - 1;
    let x = y.rows(0, n).into_owned();
    let v = y.rows(n, n).into_owned();
    let gam = chart.christoffel(&x);

    // geodesic part
    for i in 0..n {
        dy[i] = v[i];
    }
    for k in 0..n {
        dy[n + k] = -(&gam[k] * &v).dot(&v);
    }
    // frame transport
    let mut frame = Vec::with_capacity(m);
    for j in 0..m {
        let e = y.rows((2 + j) * n, n).into_owned();
        for k in 0..n {
            dy[(2 + j) * n + k] = -(&gam[k] * &e).dot(&v);
        }
        frame.push(e);
    }
    // Riccati: s' = R_N - s^2 in the transported frame
    let off = (2 + m) * n;
    let mut s = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            s[(a, b)] = y[off + a * m + b];
        }
    }
    let r_n = chart.normal_curvature_matrix(&x, &v, &frame);
    let ds = r_n - &s * &s;
    for a in 0..m {
        for b in 0..m {
            dy[off + a * m + b] = ds[(a, b)];
        }
    }
}

/// Propagates a front state along its normal geodesic for time `t`.
///
/// Geodesic, frame transport and the Riccati flow are co-integrated; after
/// every accepted step the shape operator is symmetrized and the frame
/// re-orthonormalized. Eigenvalues beyond the blow-up threshold abort with
/// a focal-point error carrying the time estimate.
pub fn propagate_shape_operator(
    chart: &MetricChart,
    f: &FrontState,
    t: f64,
    ctl: &StepControl,
) -> Result<FrontState, FrontError> {
    assert!(t >= 0.0, "propagation runs forward");
    let n = chart.dim();
    let m = n - 1;
    if t == 0.0 {
        return Ok(f.clone());
    }

    let rhs = |_tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| joint_rhs(chart, y, dy);
    let mut stepper = Dopri5::new(&rhs, 0.0, pack(f), ctl.clone());

    while stepper.t < t {
        let remaining = t - stepper.t;
        stepper.step(remaining)?;

        // symmetrize the shape operator in place
        let off = (2 + m) * n;
        for a in 0..m {
            for b in (a + 1)..m {
                let mean = 0.5 * (stepper.y[off + a * m + b] + stepper.y[off + b * m + a]);
                stepper.y[off + a * m + b] = mean;
                stepper.y[off + b * m + a] = mean;
            }
        }
        let state = unpack(n, f.t + stepper.t, &stepper.y);
        let eig_mag = state.s.symmetric_eigenvalues().amax();
        if eig_mag > BLOWUP_THRESHOLD {
            return Err(FrontError::FocalPoint { t_estimate: f.t + stepper.t, threshold: BLOWUP_THRESHOLD });
        }
        if !chart.contains(&state.base.x) {
            return Err(FrontError::Geometry(GeomError::DomainExit {
                t: stepper.t,
                last_x: state.base.x,
                last_v: state.base.v,
            }));
        }
    }

    let mut out = unpack(n, f.t + t, &stepper.y);
    // reporting-only cleanup of the unit norm and frame orthogonality
    out.base.v = chart.unit(&out.base.x, &out.base.v)?;
    let mut fr = crate::geometry::Frame { base: out.base.clone(), e: out.frame };
    fr.reorthonormalize(chart)?;
    out.frame = fr.e;
    Ok(out)
}

/// Closed-form principal curvature on a constant-curvature chart:
/// the solution of `k' = -c - k^2` from `k0`.
///
/// Test oracle and calibration aid; blow-up returns None.
pub fn constant_curvature_scalar(c: f64, k0: f64, t: f64) -> Option<f64> {
    if c == 0.0 {
        let denom = 1.0 + k0 * t;
        if denom <= 0.0 {
            return None;
        }
        return Some(k0 / denom);
    }
    if c > 0.0 {
        let rc = c.sqrt();
        let phase = (k0 / rc).atan() - rc * t;
        if phase.abs() >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        return Some(rc * phase.tan());
    }
    let a = (-c).sqrt();
    // k' = a^2 - k^2
    if k0.abs() < a {
        Some(a * ((k0 / a).atanh() + a * t).tanh())
    } else if k0 == a {
        Some(a)
    } else if k0 > a {
        let x0 = (a / k0).atanh(); // acoth(k0/a)
        Some(a / (x0 + a * t).tanh())
    } else {
        // k0 < -a: blows down in finite time
        let x0 = (a / k0).atanh();
        let arg = x0 + a * t;
        if arg >= 0.0 {
            return None;
        }
        Some(a / arg.tanh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn front(chart: &MetricChart, k0: f64) -> FrontState {
        let base = PhasePoint::new(
            chart,
            DVector::from_vec(vec![0.05, -0.02]),
            DVector::from_vec(vec![1.0, 0.4]),
        )
        .unwrap();
        FrontState::scalar(chart, base, k0).unwrap()
    }

    #[test]
    fn flat_front_follows_the_expanding_circle_law() {
        let chart = MetricChart::flat(2);
        let out = propagate_shape_operator(&chart, &front(&chart, 1.0), 1.0, &StepControl::default())
            .unwrap();
        assert_abs_diff_eq!(out.s[(0, 0)], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(out.t, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_front_follows_the_tangent_law() {
        let chart = MetricChart::constant_curvature(2, 1.0);
        let out = propagate_shape_operator(&chart, &front(&chart, 1.0), 0.5, &StepControl::default())
            .unwrap();
        let expect = (std::f64::consts::FRAC_PI_4 - 0.5).tan();
        assert_abs_diff_eq!(out.s[(0, 0)], expect, epsilon = 1e-8);
        assert!((expect - 0.2934).abs() < 1e-4);
    }

    #[test]
    fn hyperbolic_front_settles_at_the_attracting_fixed_point() {
        let chart = MetricChart::constant_curvature(2, -1.0);
        let out = propagate_shape_operator(&chart, &front(&chart, 2.0), 5.0, &StepControl::default())
            .unwrap();
        assert_abs_diff_eq!(out.s[(0, 0)], 1.0, epsilon = 1e-4);
        let oracle = constant_curvature_scalar(-1.0, 2.0, 5.0).unwrap();
        assert_abs_diff_eq!(out.s[(0, 0)], oracle, epsilon = 1e-8);
    }

    #[test]
    fn focusing_front_reports_a_focal_point() {
        let chart = MetricChart::flat(2);
        // k0 = -1 focuses at t = 1
        let r = propagate_shape_operator(&chart, &front(&chart, -1.0), 2.0, &StepControl::default());
        match r {
            Err(FrontError::FocalPoint { t_estimate, .. }) => {
                assert!((t_estimate - 1.0).abs() < 0.05, "t_estimate = {t_estimate}");
            }
            other => panic!("expected focal point, got {other:?}"),
        }
    }

    #[test]
    fn matrix_propagation_matches_scalar_closed_forms_in_3d() {
        let chart = MetricChart::flat(3);
        let base = PhasePoint::new(
            &chart,
            DVector::from_vec(vec![0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        )
        .unwrap();
        let s0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let f = FrontState::new(&chart, base, s0).unwrap();
        let out = propagate_shape_operator(&chart, &f, 0.7, &StepControl::default()).unwrap();
        let eig = out.s.symmetric_eigenvalues();
        let mut got: Vec<f64> = eig.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(got[0], 1.0 / (1.0 + 0.7), epsilon = 1e-9);
        assert_abs_diff_eq!(got[1], 2.0 / (1.0 + 2.0 * 0.7), epsilon = 1e-9);
        assert!(out.symmetry_defect() < 1e-9);
    }

    #[test]
    fn scalar_oracle_handles_branches() {
        // flat decay
        assert_abs_diff_eq!(constant_curvature_scalar(0.0, 2.0, 3.0).unwrap(), 2.0 / 7.0, epsilon = 1e-15);
        // spherical blow-up is detected
        assert!(constant_curvature_scalar(1.0, 1.0, 3.0).is_none());
        // hyperbolic from below the fixed point
        let k = constant_curvature_scalar(-1.0, 0.3, 2.0).unwrap();
        assert!(k > 0.3 && k < 1.0);
    }
}
