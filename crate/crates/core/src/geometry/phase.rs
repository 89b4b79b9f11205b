//! Phase-space state of the geodesic/billiard flow and orthonormal frames.

use nalgebra::DVector;

use crate::error::GeomError;
use crate::geometry::MetricChart;

/// Base point plus unit velocity; `|v|_g = 1` within 1e-9.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
}

impl PhasePoint {
    /// Builds a phase point, rescaling `v` to unit metric norm.
    pub fn new(chart: &MetricChart, x: DVector<f64>, v: DVector<f64>) -> Result<Self, GeomError> {
        let v = chart.unit(&x, &v)?;
        Ok(PhasePoint { x, v })
    }

    /// Same ray traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        PhasePoint { x: self.x.clone(), v: -&self.v }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `| |v|_g - 1 |` drift of the unit-speed invariant.
    pub fn speed_defect(&self, chart: &MetricChart) -> f64 {
        (chart.norm(&self.x, &self.v) - 1.0).abs()
    }
}

/// Orthonormal basis of the orthogonal complement of the velocity.
#[derive(Clone, Debug)]
pub struct Frame {
    pub base: PhasePoint,
    pub e: Vec<DVector<f64>>,
}

impl Frame {
    /// Completes `base.v` to an orthonormal basis by Gram-Schmidt over the
    /// coordinate axes, returning the n-1 vectors orthogonal to `v`.
    pub fn orthonormal_complement(chart: &MetricChart, base: PhasePoint) -> Result<Self, GeomError> {
        let n = base.dim();
        let mut basis: Vec<DVector<f64>> = vec![base.v.clone()];
        for i in 0..n {
            if basis.len() == n {
                break;
            }
            let mut cand = DVector::zeros(n);
            cand[i] = 1.0;
            for b in &basis {
                let c = chart.inner(&base.x, &cand, b);
                cand -= b * c;
            }
            let nrm = chart.norm(&base.x, &cand);
            if nrm > 1e-8 {
                cand /= nrm;
                basis.push(cand);
            }
        }
        if basis.len() != n {
            return Err(GeomError::ZeroVector);
        }
        Ok(Frame { base, e: basis.split_off(1) })
    }

    /// Re-orthonormalizes the frame vectors against the current velocity.
    pub fn reorthonormalize(&mut self, chart: &MetricChart) -> Result<(), GeomError> {
        let x = &self.base.x;
        let mut done: Vec<DVector<f64>> = vec![self.base.v.clone()];
        for e in &self.e {
            let mut cand = e.clone();
            for b in &done {
                let c = chart.inner(x, &cand, b);
                cand -= b * c;
            }
            let nrm = chart.norm(x, &cand);
            if nrm < 1e-10 {
                return Err(GeomError::ZeroVector);
            }
            done.push(cand / nrm);
        }
        self.e = done.split_off(1);
        Ok(())
    }

    /// Max deviation of the Gram matrix of `{v, e_1, ..}` from the identity.
    pub fn gram_defect(&self, chart: &MetricChart) -> f64 {
        let mut all = vec![self.base.v.clone()];
        all.extend(self.e.iter().cloned());
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((chart.inner(&self.base.x, a, b) - want).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_point_normalizes_velocity() {
        let chart = MetricChart::constant_curvature(2, 1.0);
        let p = PhasePoint::new(
            &chart,
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![3.0, 0.0]),
        )
        .unwrap();
        // conformal factor at the origin is 2, so unit coordinates are 1/2
        assert!((p.v[0] - 0.5).abs() < 1e-14);
        assert!(p.speed_defect(&chart) < 1e-14);
    }

    #[test]
    fn zero_velocity_is_rejected() {
        let chart = MetricChart::flat(2);
        let r = PhasePoint::new(
            &chart,
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0]),
        );
        assert!(matches!(r, Err(GeomError::ZeroVector)));
    }

    #[test]
    fn frame_gram_matrix_is_identity() {
        for chart in [MetricChart::flat(3), MetricChart::constant_curvature(3, -0.5)] {
            let base = PhasePoint::new(
                &chart,
                DVector::from_vec(vec![0.1, 0.2, -0.1]),
                DVector::from_vec(vec![1.0, 2.0, -0.5]),
            )
            .unwrap();
            let f = Frame::orthonormal_complement(&chart, base).unwrap();
            assert_eq!(f.e.len(), 2);
            assert!(f.gram_defect(&chart) < 1e-12);
        }
    }
}
