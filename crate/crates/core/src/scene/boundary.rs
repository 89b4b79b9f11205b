//! Intrinsic parametrization of the exterior boundary.
//!
//! In two dimensions boundary points are encoded by the metric arc-length
//! parameter measured counterclockwise from the angle-zero point; in three
//! dimensions by the two chart angles (polar, azimuth) of the boundary ray
//! from the interior seed point.

use nalgebra::DVector;

use crate::error::SceneError;
use crate::geometry::MetricChart;
use crate::scene::body::ImplicitBody;

const TABLE_SIZE: usize = 4096;

/// Parametrization of the exterior boundary with its arc-length table.
#[derive(Clone, Debug)]
pub struct BoundaryChart {
    dim: usize,
    seed: DVector<f64>,
    /// cumulative metric arc length at angle `2 pi i / TABLE_SIZE` (2D only)
    cumulative: Vec<f64>,
    total_length: f64,
}

impl BoundaryChart {
    pub fn build(chart: &MetricChart, exterior: &ImplicitBody) -> Result<Self, SceneError> {
        let dim = exterior.dim();
        let seed = exterior.interior_point();
        if dim != 2 {
            return Ok(BoundaryChart { dim, seed, cumulative: Vec::new(), total_length: 0.0 });
        }
        let mut pts = Vec::with_capacity(TABLE_SIZE + 1);
        for i in 0..=TABLE_SIZE {
            let th = 2.0 * std::f64::consts::PI * i as f64 / TABLE_SIZE as f64;
            pts.push(exterior.boundary_along(&DVector::from_vec(vec![th.cos(), th.sin()]))?);
        }
        let mut cumulative = Vec::with_capacity(TABLE_SIZE + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in pts.windows(2) {
            // midpoint-rule metric length of the short chord
            let mid = (&w[0] + &w[1]) * 0.5;
            let d = &w[1] - &w[0];
            acc += chart.norm(&mid, &d);
            cumulative.push(acc);
        }
        Ok(BoundaryChart { dim, seed, cumulative, total_length: acc })
    }

    pub fn param_dim(&self) -> usize {
        self.dim - 1
    }

    /// Total boundary length (2D only).
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    fn angle_to_arc(&self, th: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let th = th.rem_euclid(tau);
        let pos = th / tau * TABLE_SIZE as f64;
        let i = (pos.floor() as usize).min(TABLE_SIZE - 1);
        let frac = pos - i as f64;
        self.cumulative[i] + frac * (self.cumulative[i + 1] - self.cumulative[i])
    }

    fn arc_to_angle(&self, s: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let s = s.rem_euclid(self.total_length);
        // binary search in the cumulative table
        let mut lo = 0usize;
        let mut hi = TABLE_SIZE;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cumulative[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let seg = self.cumulative[lo + 1] - self.cumulative[lo];
        let frac = if seg > 0.0 { (s - self.cumulative[lo]) / seg } else { 0.0 };
        (lo as f64 + frac) / TABLE_SIZE as f64 * tau
    }

    /// Boundary parameters of a point on the exterior boundary.
    pub fn params_of(&self, x: &DVector<f64>) -> Vec<f64> {
        let d = x - &self.seed;
        if self.dim == 2 {
            vec![self.angle_to_arc(d[1].atan2(d[0]))]
        } else {
            let r = d.norm();
            let polar = (d[2] / r).acos();
            let azimuth = d[1].atan2(d[0]);
            vec![polar, azimuth]
        }
    }

    /// Boundary point for the given parameters.
    pub fn point_of(&self, exterior: &ImplicitBody, params: &[f64]) -> Result<DVector<f64>, SceneError> {
        let dir = if self.dim == 2 {
            let th = self.arc_to_angle(params[0]);
            DVector::from_vec(vec![th.cos(), th.sin()])
        } else {
            let (polar, azimuth) = (params[0], params[1]);
            DVector::from_vec(vec![
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            ])
        };
        exterior.boundary_along(&dir)
    }

    /// Inward unit normal of the exterior boundary at `x`.
    pub fn inward_normal(
        &self,
        chart: &MetricChart,
        exterior: &ImplicitBody,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>, SceneError> {
        let ginv = chart.metric_inverse(x)?;
        let grad = &ginv * exterior.grad_psi(x);
        Ok(-chart.unit(x, &grad)?)
    }

    /// Unit tangent of the boundary at `x`, counterclockwise (2D only).
    pub fn tangent(
        &self,
        chart: &MetricChart,
        exterior: &ImplicitBody,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>, SceneError> {
        let inward = self.inward_normal(chart, exterior, x)?;
        // rotate the coordinate representation and orthonormalize
        let mut t = DVector::from_vec(vec![inward[1], -inward[0]]);
        let c = chart.inner(x, &t, &inward);
        t -= &inward * c;
        Ok(chart.unit(x, &t)?)
    }
}
