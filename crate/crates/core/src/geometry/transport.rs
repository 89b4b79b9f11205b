//! Parallel transport along geodesic segments.
//!
//! Transport co-integrates the carried vectors with the base geodesic, so a
//! segment is transported by replaying it jointly rather than by
//! interpolating stored states.

use nalgebra::DVector;

use crate::error::GeomError;
use crate::geometry::{Dopri5, Frame, GeodesicSegment, MetricChart, StepControl};

/// Transports arbitrary tangent vectors along the segment's geodesic.
///
/// Returns the transported vectors at the segment end, in segment order.
pub fn parallel_transport_vectors(
    chart: &MetricChart,
    along: &GeodesicSegment,
    vectors: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, GeomError> {
    let n = chart.dim();
    let m = vectors.len();
    let (state0, dur, flip) = if along.duration < 0.0 {
        (along.start.reversed(), -along.duration, true)
    } else {
        (along.start.clone(), along.duration, false)
    };

    // state layout: [x (n) | v (n) | e_1 (n) | ... | e_m (n)]
    let mut y0 = DVector::zeros((2 + m) * n);
    y0.rows_mut(0, n).copy_from(&state0.x);
    y0.rows_mut(n, n).copy_from(&state0.v);
    for (j, e) in vectors.iter().enumerate() {
        let e = if flip { -e } else { e.clone() };
        y0.rows_mut((2 + j) * n, n).copy_from(&e);
    }

    let rhs = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
        let x = y.rows(0, n).into_owned();
        let v = y.rows(n, n).into_owned();
        let gam = chart.christoffel(&x);
        for i in 0..n {
            dy[i] = v[i];
        }
        for blk in 1..(2 + m) {
            let w = y.rows(blk * n, n).into_owned();
            for k in 0..n {
                dy[blk * n + k] = -(&gam[k] * &w).dot(&v);
            }
        }
    };

    let mut stepper = Dopri5::new(&rhs, 0.0, y0, StepControl::default());
    stepper.run_to(dur)?;

    let out: Vec<DVector<f64>> = (0..m)
        .map(|j| {
            let e = stepper.y.rows((2 + j) * n, n).into_owned();
            if flip {
                -e
            } else {
                e
            }
        })
        .collect();
    Ok(out)
}

/// Transports a velocity-orthonormal frame along a geodesic segment.
///
/// The segment must start at the frame's base; the output frame sits at the
/// segment end and is re-orthonormalized against the transported velocity.
pub fn parallel_transport(
    chart: &MetricChart,
    along: &GeodesicSegment,
    frame: &Frame,
) -> Result<Frame, GeomError> {
    debug_assert!(
        (&along.start.x - &frame.base.x).norm() < 1e-9,
        "segment must start at the frame base"
    );
    let moved = parallel_transport_vectors(chart, along, &frame.e)?;
    let mut out = Frame { base: along.end.clone(), e: moved };
    out.reorthonormalize(chart)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use crate::geometry::PhasePoint;
    use super::*;
    use crate::geometry::integrate_geodesic_segment;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn phase(chart: &MetricChart, x: [f64; 2], v: [f64; 2]) -> PhasePoint {
        PhasePoint::new(chart, DVector::from_vec(x.to_vec()), DVector::from_vec(v.to_vec())).unwrap()
    }

    #[test]
    fn flat_transport_is_the_identity() {
        let chart = MetricChart::flat(2);
        let p = phase(&chart, [0.0, 0.0], [1.0, 0.0]);
        let seg = integrate_geodesic_segment(&chart, &p, 2.5, &StepControl::default()).unwrap();
        let moved =
            parallel_transport_vectors(&chart, &seg, &[DVector::from_vec(vec![0.3, 0.7])]).unwrap();
        assert_abs_diff_eq!(moved[0][0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(moved[0][1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn transport_preserves_inner_products() {
        let chart = MetricChart::constant_curvature(2, -0.6);
        let p = phase(&chart, [0.2, 0.1], [1.0, -0.4]);
        let seg = integrate_geodesic_segment(&chart, &p, 1.7, &StepControl::default()).unwrap();
        let a = DVector::from_vec(vec![0.5, 0.2]);
        let b = DVector::from_vec(vec![-0.1, 0.9]);
        let before = chart.inner(&p.x, &a, &b);
        let moved = parallel_transport_vectors(&chart, &seg, &[a, b]).unwrap();
        let after = chart.inner(&seg.end.x, &moved[0], &moved[1]);
        assert_abs_diff_eq!(before, after, epsilon = 1e-8);
    }

    #[test]
    fn frame_stays_orthogonal_to_velocity() {
        let chart = MetricChart::constant_curvature(2, 1.0);
        let p = phase(&chart, [0.1, 0.2], [0.3, 1.0]);
        let f = Frame::orthonormal_complement(&chart, p.clone()).unwrap();
        let seg = integrate_geodesic_segment(&chart, &p, 1.2, &StepControl::default()).unwrap();
        let g = parallel_transport(&chart, &seg, &f).unwrap();
        assert!(g.gram_defect(&chart) < 1e-8);
        assert!(chart.inner(&g.base.x, &g.e[0], &g.base.v).abs() < 1e-8);
    }

    #[test]
    fn sphere_triangle_holonomy_is_a_quarter_turn() {
        // three geodesic legs bounding an octant of the unit sphere: a radial
        // run to the coordinate unit circle, a quarter of the circle, and a
        // radial run back; the enclosed area is pi/2
        let chart = MetricChart::constant_curvature(2, 1.0);
        let ctl = StepControl::default();

        let legs = [
            phase(&chart, [0.0, 0.0], [1.0, 0.0]),
            phase(&chart, [1.0, 0.0], [0.0, 1.0]),
            phase(&chart, [0.0, 1.0], [0.0, -1.0]),
        ];

        let start = DVector::from_vec(vec![0.0, 0.0]);
        let mut vecs = vec![
            PhasePoint::new(&chart, start.clone(), DVector::from_vec(vec![1.0, 0.0])).unwrap().v,
            PhasePoint::new(&chart, start, DVector::from_vec(vec![0.0, 1.0])).unwrap().v,
        ];
        for leg in &legs {
            let seg = integrate_geodesic_segment(&chart, leg, FRAC_PI_2, &ctl).unwrap();
            vecs = parallel_transport_vectors(&chart, &seg, &vecs).unwrap();
        }

        // back at the origin compare against the initial unit pair; g = 4I
        // there, so (0.5, 0) and (0, 0.5) are unit
        let origin = DVector::from_vec(vec![0.0, 0.0]);
        let v0 = DVector::from_vec(vec![0.5, 0.0]);
        let e0 = DVector::from_vec(vec![0.0, 0.5]);
        let cosang = chart.inner(&origin, &vecs[0], &v0);
        let sinang = chart.inner(&origin, &vecs[0], &e0);
        let angle = sinang.atan2(cosang).abs();
        assert_abs_diff_eq!(angle, FRAC_PI_2, epsilon = 1e-6);
    }
}
