//! Metric charts: a single coordinate patch with metric tensor, Christoffel
//! symbols and curvature tensor evaluation.
//!
//! Three kinds are supported. Flat Cartesian and constant-curvature charts
//! carry closed-form symbols; a numeric chart is defined by a metric
//! function alone and differentiates it with central finite differences.
//! The constant-curvature model is the conformal one,
//! `g_ij = (2 / (1 + c |x|^2))^2 delta_ij`,
//! which covers curvature `c` of either sign (for `c < 0` the chart domain
//! is the coordinate ball `|x| < 1/sqrt(-c)`).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::GeomError;

/// Finite-difference step for numeric charts.
fn fd_step(x: &DVector<f64>) -> f64 {
    (1e-5f64).max(1e-5 * x.norm())
}

type MetricFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

#[derive(Clone)]
pub enum ChartKind {
    FlatCartesian,
    ConstantCurvature(f64),
    NumericFromMetric(Arc<MetricFn>),
}

impl fmt::Debug for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::FlatCartesian => write!(f, "FlatCartesian"),
            ChartKind::ConstantCurvature(c) => write!(f, "ConstantCurvature({c})"),
            ChartKind::NumericFromMetric(_) => write!(f, "NumericFromMetric(..)"),
        }
    }
}

/// A Riemannian metric on a single coordinate patch.
///
/// Immutable after construction and safe to share across threads.
#[derive(Clone, Debug)]
pub struct MetricChart {
    dim: usize,
    kind: ChartKind,
}

impl MetricChart {
    pub fn flat(dim: usize) -> Self {
        assert!(dim >= 2, "chart dimension must be at least 2");
        MetricChart { dim, kind: ChartKind::FlatCartesian }
    }

    /// Conformal model of constant sectional curvature `c`.
    pub fn constant_curvature(dim: usize, c: f64) -> Self {
        assert!(dim >= 2, "chart dimension must be at least 2");
        if c == 0.0 {
            return MetricChart::flat(dim);
        }
        MetricChart { dim, kind: ChartKind::ConstantCurvature(c) }
    }

    /// Chart defined by a metric function alone; all symbols come from
    /// central finite differences of `g`.
    pub fn from_metric<F>(dim: usize, g: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 2, "chart dimension must be at least 2");
        MetricChart { dim, kind: ChartKind::NumericFromMetric(Arc::new(g)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    /// Constant-curvature value when the chart is a model chart.
    pub fn curvature_constant(&self) -> Option<f64> {
        match self.kind {
            ChartKind::FlatCartesian => Some(0.0),
            ChartKind::ConstantCurvature(c) => Some(c),
            ChartKind::NumericFromMetric(_) => None,
        }
    }

    /// Radius of the coordinate domain, when the model chart has one.
    pub fn domain_radius(&self) -> Option<f64> {
        match self.kind {
            ChartKind::ConstantCurvature(c) if c < 0.0 => Some(1.0 / (-c).sqrt()),
            _ => None,
        }
    }

    /// True if `x` lies strictly inside the chart domain.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self.domain_radius() {
            Some(r) => x.norm() < r * (1.0 - 1e-12),
            None => true,
        }
    }

    fn conformal_factor(&self, c: f64, x: &DVector<f64>) -> f64 {
        2.0 / (1.0 + c * x.norm_squared())
    }

    /// Metric components `g_ij(x)`.
    pub fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        match &self.kind {
            ChartKind::FlatCartesian => DMatrix::identity(n, n),
            ChartKind::ConstantCurvature(c) => {
                let lam = self.conformal_factor(*c, x);
                DMatrix::identity(n, n) * (lam * lam)
            }
            ChartKind::NumericFromMetric(g) => g(x),
        }
    }

    /// Inverse metric `g^ij(x)`; errors if `g` is not positive definite.
    pub fn metric_inverse(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, GeomError> {
        match &self.kind {
            ChartKind::FlatCartesian => Ok(DMatrix::identity(self.dim, self.dim)),
            ChartKind::ConstantCurvature(c) => {
                let lam = self.conformal_factor(*c, x);
                Ok(DMatrix::identity(self.dim, self.dim) / (lam * lam))
            }
            ChartKind::NumericFromMetric(_) => {
                let g = self.metric(x);
                g.clone()
                    .cholesky()
                    .map(|ch| ch.inverse())
                    .ok_or_else(|| GeomError::DegenerateMetric { point: x.iter().copied().collect() })
            }
        }
    }

    /// Inner product of tangent vectors at `x`.
    pub fn inner(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match &self.kind {
            ChartKind::FlatCartesian => u.dot(v),
            ChartKind::ConstantCurvature(c) => {
                let lam = self.conformal_factor(*c, x);
                lam * lam * u.dot(v)
            }
            ChartKind::NumericFromMetric(_) => (self.metric(x) * v).dot(u),
        }
    }

    pub fn norm(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.inner(x, u, u).max(0.0).sqrt()
    }

    /// Rescale `u` to unit metric norm.
    pub fn unit(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>, GeomError> {
        let n = self.norm(x, u);
        if n < 1e-300 {
            return Err(GeomError::ZeroVector);
        }
        Ok(u / n)
    }

    /// Christoffel symbols at `x`, indexed as `out[k][(i, j)]`.
    pub fn christoffel(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        match &self.kind {
            ChartKind::FlatCartesian => vec![DMatrix::zeros(n, n); n],
            ChartKind::ConstantCurvature(c) => {
                // Conformal metric: Gamma^k_ij = d_i phi delta_jk + d_j phi delta_ik
                // - d_k phi delta_ij, with phi = log(lambda).
                let denom = 1.0 + c * x.norm_squared();
                let dphi: Vec<f64> = x.iter().map(|&xi| -2.0 * c * xi / denom).collect();
                let mut out = vec![DMatrix::zeros(n, n); n];
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut v = 0.0;
                            if j == k {
                                v += dphi[i];
                            }
                            if i == k {
                                v += dphi[j];
                            }
                            if i == j {
                                v -= dphi[k];
                            }
                            out[k][(i, j)] = v;
                        }
                    }
                }
                out
            }
            ChartKind::NumericFromMetric(_) => christoffel_from_metric(self, x)
                .expect("numeric chart metric must stay positive definite on its domain"),
        }
    }

    /// Quadratic form `Gamma^k_ij v^i w^j` for all `k`.
    pub fn christoffel_apply(&self, x: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let gam = self.christoffel(x);
        DVector::from_iterator(self.dim, gam.iter().map(|gk| (gk * w).dot(v)))
    }

    /// Curvature tensor evaluation `<R(X,Y)Z, W>` at `x`.
    pub fn riem(
        &self,
        x: &DVector<f64>,
        xv: &DVector<f64>,
        yv: &DVector<f64>,
        zv: &DVector<f64>,
        wv: &DVector<f64>,
    ) -> f64 {
        match &self.kind {
            ChartKind::FlatCartesian => 0.0,
            ChartKind::ConstantCurvature(c) => {
                // R(X,Y)Z = c (<Y,Z> X - <X,Z> Y)
                c * (self.inner(x, yv, zv) * self.inner(x, xv, wv)
                    - self.inner(x, xv, zv) * self.inner(x, yv, wv))
            }
            ChartKind::NumericFromMetric(_) => self.riem_numeric(x, xv, yv, zv, wv),
        }
    }

    /// `R^l_kij` from central differences of the Christoffel symbols:
    /// `R(d_i, d_j) d_k = (d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik) d_l`.
    fn riem_numeric(
        &self,
        x: &DVector<f64>,
        xv: &DVector<f64>,
        yv: &DVector<f64>,
        zv: &DVector<f64>,
        wv: &DVector<f64>,
    ) -> f64 {
        let n = self.dim;
        let h = fd_step(x);
        let gam = self.christoffel(x);

        // dgam[i][k][(j, l)] approximates d_i Gamma^k_jl
        let mut dgam: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let gp = self.christoffel(&xp);
            let gm = self.christoffel(&xm);
            dgam.push(
                gp.iter()
                    .zip(gm.iter())
                    .map(|(p, m)| (p - m) / (2.0 * h))
                    .collect(),
            );
        }

        let g = self.metric(x);
        let mut total = 0.0;
        for i in 0..n {
            if xv[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if yv[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if zv[k] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        let mut r = dgam[i][l][(j, k)] - dgam[j][l][(i, k)];
                        for m in 0..n {
                            r += gam[l][(i, m)] * gam[m][(j, k)] - gam[l][(j, m)] * gam[m][(i, k)];
                        }
                        // contract with g_{l.} w
                        let mut gw = 0.0;
                        for p in 0..n {
                            gw += g[(l, p)] * wv[p];
                        }
                        total += xv[i] * yv[j] * zv[k] * r * gw;
                    }
                }
            }
        }
        total
    }

    /// Sectional curvature of the plane spanned by `xv`, `yv`.
    pub fn sectional_curvature(
        &self,
        x: &DVector<f64>,
        xv: &DVector<f64>,
        yv: &DVector<f64>,
    ) -> Result<f64, GeomError> {
        let xx = self.inner(x, xv, xv);
        let yy = self.inner(x, yv, yv);
        let xy = self.inner(x, xv, yv);
        let denom = xx * yy - xy * xy;
        if denom <= 1e-12 * xx * yy {
            return Err(GeomError::IllConditionedPlane { det: denom });
        }
        Ok(self.riem(x, xv, yv, yv, xv) / denom)
    }

    /// Normal-curvature matrix `(R_N)_ij = <R(N, e_i) N, e_j>` in an
    /// orthonormal frame of the normal complement.
    pub fn normal_curvature_matrix(
        &self,
        x: &DVector<f64>,
        normal: &DVector<f64>,
        frame: &[DVector<f64>],
    ) -> DMatrix<f64> {
        let m = frame.len();
        match &self.kind {
            ChartKind::FlatCartesian => DMatrix::zeros(m, m),
            ChartKind::ConstantCurvature(c) => {
                // <R(N,e_i)N, e_j> = -c delta_ij for orthonormal {N, e_i}.
                DMatrix::identity(m, m) * (-c)
            }
            ChartKind::NumericFromMetric(_) => {
                let mut out = DMatrix::zeros(m, m);
                for i in 0..m {
                    for j in i..m {
                        let v = self.riem(x, normal, &frame[i], normal, &frame[j]);
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
                out
            }
        }
    }

    /// Geodesic distance between chart points.
    ///
    /// Closed form on the model charts; numeric charts fall back to the
    /// length of the coordinate segment, which is only an estimate and is
    /// documented as such.
    pub fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match &self.kind {
            ChartKind::FlatCartesian => (x - y).norm(),
            ChartKind::ConstantCurvature(c) if *c > 0.0 => {
                let r = 1.0 / c.sqrt();
                let p = embed_sphere(*c, x);
                let q = embed_sphere(*c, y);
               let cosang = (p.dot(&q) / (r * r)).clamp(-1.0, 1.0);
                r * cosang.acos()
            }
            ChartKind::ConstantCurvature(c) => {
                let a = (-c).sqrt();
                let u = x * a;
                let v = y * a;
                let du2 = (&u - &v).norm_squared();
                let arg = 1.0 + 2.0 * du2 / ((1.0 - u.norm_squared()) * (1.0 - v.norm_squared()));
                arg.max(1.0).acosh() / a
            }
            ChartKind::NumericFromMetric(_) => {
                // coordinate-segment length, 64-point composite midpoint rule
                let steps = 64;
                let mut len = 0.0;
                let dxy = y - x;
                for s in 0..steps {
                    let t = (s as f64 + 0.5) / steps as f64;
                    let p = x + &dxy * t;
                    len += self.norm(&p, &dxy) / steps as f64;
                }
                len
            }
        }
    }

    /// Unit initial velocity of the geodesic from `p` toward `q`
    /// (the direction of the log map). Model charts only.
    pub fn log_direction(&self, p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>, GeomError> {
        match &self.kind {
            ChartKind::FlatCartesian => self.unit(p, &(q - p)),
            ChartKind::ConstantCurvature(c) if *c > 0.0 => {
                let r = 1.0 / c.sqrt();
                let ph = embed_sphere(*c, p);
                let qh = embed_sphere(*c, q);
                let cosang = (ph.dot(&qh) / (r * r)).clamp(-1.0, 1.0);
                // tangent component of qh at ph, scaled so that
                // ph cos(e) + w sin(e) stays on the sphere
                let w = &qh - &ph * cosang;
                let wn = w.norm();
                if wn < 1e-14 {
                    return Err(GeomError::ZeroVector);
                }
                let w = w / wn * r;
                // pull back through stereographic projection by a small move
                let eps = 1e-6f64;
                let pp = project_sphere(*c, &(ph.clone() * eps.cos() + &w * eps.sin()));
                let pm = project_sphere(*c, &(ph * eps.cos() - &w * eps.sin()));
                self.unit(p, &((pp - pm) / (2.0 * eps)))
            }
            ChartKind::ConstantCurvature(c) => {
                let ph = embed_hyperboloid(*c, p);
                let qh = embed_hyperboloid(*c, q);
                let r2 = -1.0 / c;
                let ip = minkowski(&ph, &qh);
                // component of qh Minkowski-orthogonal to ph; spacelike, so
                // its Minkowski square is negative
                let w = &qh - &ph * (ip / r2);
                let wn = (-minkowski(&w, &w)).max(0.0).sqrt();
                if wn < 1e-14 {
                    return Err(GeomError::ZeroVector);
                }
                let w = w / wn;
                let eps = 1e-6f64;
                let pp = project_hyperboloid(*c, &(ph.clone() * eps.cosh() + &w * (r2.sqrt() * eps.sinh())));
                let pm = project_hyperboloid(*c, &(ph * eps.cosh() - &w * (r2.sqrt() * eps.sinh())));
                self.unit(p, &((pp - pm) / (2.0 * eps)))
            }
            ChartKind::NumericFromMetric(_) => self.unit(p, &(q - p)),
        }
    }
}

/// Levi-Civita Christoffel symbols from central finite differences of the
/// metric, regardless of the chart kind. Indexed as `out[k][(i, j)]`.
pub fn christoffel_from_metric(
    chart: &MetricChart,
    x: &DVector<f64>,
) -> Result<Vec<DMatrix<f64>>, GeomError> {
    let n = chart.dim();
    let h = fd_step(x);
    let ginv = chart.metric_inverse(x)?;

    // dg[i] approximates d_i g
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        dg.push((chart.metric(&xp) - chart.metric(&xm)) / (2.0 * h));
    }

    let mut out = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[k][(i, j)] = v;
                out[k][(j, i)] = v;
            }
        }
    }
    Ok(out)
}

/// Embed a chart point of the curvature-`c` model (`c > 0`) into the sphere
/// of radius `1/sqrt(c)` in `R^{n+1}` by inverse stereographic projection.
pub fn embed_sphere(c: f64, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let r = 1.0 / c.sqrt();
    let y = x * c.sqrt();
    let d = 1.0 + y.norm_squared();
    let mut out = DVector::zeros(n + 1);
    for i in 0..n {
        out[i] = r * 2.0 * y[i] / d;
    }
    out[n] = r * (y.norm_squared() - 1.0) / d;
    out
}

/// Inverse of [`embed_sphere`]: stereographic projection back to the chart.
pub fn project_sphere(c: f64, p: &DVector<f64>) -> DVector<f64> {
    let n = p.len() - 1;
    let r = 1.0 / c.sqrt();
    let scaled = p / r;
    let denom = 1.0 - scaled[n];
    let mut y = DVector::zeros(n);
    for i in 0..n {
        y[i] = scaled[i] / denom;
    }
    y / c.sqrt()
}

/// Embed a chart point of the curvature-`c` model (`c < 0`) into the
/// hyperboloid `x_0^2 - |x|^2 = 1/(-c)` in Minkowski space.
pub fn embed_hyperboloid(c: f64, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let r = 1.0 / (-c).sqrt();
    let y = x * (-c).sqrt();
    let d = 1.0 - y.norm_squared();
    let mut out = DVector::zeros(n + 1);
    out[0] = r * (1.0 + y.norm_squared()) / d;
    for i in 0..n {
        out[i + 1] = r * 2.0 * y[i] / d;
    }
    out
}

/// Inverse of [`embed_hyperboloid`].
pub fn project_hyperboloid(c: f64, p: &DVector<f64>) -> DVector<f64> {
    let n = p.len() - 1;
    let r = 1.0 / (-c).sqrt();
    let scaled = p / r;
    let denom = 1.0 + scaled[0];
    let mut y = DVector::zeros(n);
    for i in 0..n {
        y[i] = scaled[i + 1] / denom;
    }
    y / (-c).sqrt()
}

fn minkowski(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let mut s = p[0] * q[0];
    for i in 1..p.len() {
        s -= p[i] * q[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn flat_chart_symbols_vanish() {
        let chart = MetricChart::flat(2);
        let x = vec2(1.3, -0.7);
        for gk in chart.christoffel(&x) {
            assert_eq!(gk.amax(), 0.0);
        }
        let e1 = vec2(1.0, 0.0);
        let e2 = vec2(0.0, 1.0);
        assert_eq!(chart.riem(&x, &e1, &e2, &e2, &e1), 0.0);
        assert_eq!(chart.sectional_curvature(&x, &e1, &e2).unwrap(), 0.0);
    }

    #[test]
    fn polar_coordinate_christoffels() {
        // g = diag(1, r^2) on (r, theta): Gamma^r_tt = -r, Gamma^t_rt = 1/r
        let chart = MetricChart::from_metric(2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x[0] * x[0]]))
        });
        let x = vec2(2.0, 0.4);
        let gam = christoffel_from_metric(&chart, &x).unwrap();
        assert_abs_diff_eq!(gam[0][(1, 1)], -2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(gam[1][(0, 1)], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(gam[1][(1, 0)], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(gam[0][(0, 0)], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(gam[1][(1, 1)], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn finite_difference_matches_closed_form_on_model_chart() {
        let chart = MetricChart::constant_curvature(2, 1.0);
        for &(a, b) in &[(0.3, 0.1), (-0.5, 0.8), (0.0, 0.0), (1.1, -0.4)] {
            let x = vec2(a, b);
            let fd = christoffel_from_metric(&chart, &x).unwrap();
            let cf = chart.christoffel(&x);
            for (m_fd, m_cf) in fd.iter().zip(cf.iter()) {
                assert!((m_fd - m_cf).amax() < 1e-6, "deviation at {x:?}");
            }
        }
    }

    #[test]
    fn christoffel_symmetry_in_lower_indices() {
        let chart = MetricChart::constant_curvature(3, -0.7);
        let x = DVector::from_vec(vec![0.2, -0.3, 0.4]);
        let gam = chart.christoffel(&x);
        for gk in &gam {
            assert!((gk - gk.transpose()).amax() < 1e-14);
        }
    }

    #[test]
    fn sphere_sectional_curvature_is_inverse_radius_squared() {
        // radius R = 2 corresponds to c = 1/4
        let chart = MetricChart::constant_curvature(2, 0.25);
        let x = vec2(0.4, 0.9);
        let e1 = vec2(1.0, 0.3);
        let e2 = vec2(-0.2, 1.0);
        assert_abs_diff_eq!(chart.sectional_curvature(&x, &e1, &e2).unwrap(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn hyperbolic_sectional_curvature() {
        let chart = MetricChart::constant_curvature(3, -1.0);
        let x = DVector::from_vec(vec![0.2, 0.1, -0.3]);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.5]);
        let e2 = DVector::from_vec(vec![0.0, 1.0, -0.2]);
        assert_abs_diff_eq!(chart.sectional_curvature(&x, &e1, &e2).unwrap(), -1.0, epsilon = 1e-6);
    }

    #[test]
    fn numeric_chart_curvature_matches_model() {
        // same conformal sphere metric, but presented numerically
        let c = 1.0;
        let chart = MetricChart::from_metric(2, move |x: &DVector<f64>| {
            let lam = 2.0 / (1.0 + c * x.norm_squared());
            DMatrix::identity(2, 2) * (lam * lam)
        });
        let x = vec2(0.3, -0.2);
        let e1 = vec2(1.0, 0.0);
        let e2 = vec2(0.0, 1.0);
        let sec = chart.sectional_curvature(&x, &e1, &e2).unwrap();
        assert_abs_diff_eq!(sec, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn near_parallel_plane_is_rejected() {
        let chart = MetricChart::flat(2);
        let x = vec2(0.0, 0.0);
        let e1 = vec2(1.0, 0.0);
        let e2 = vec2(1.0, 1e-9);
        assert!(matches!(
            chart.sectional_curvature(&x, &e1, &e2),
            Err(GeomError::IllConditionedPlane { .. })
        ));
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let chart = MetricChart::from_metric(2, |_x| DMatrix::zeros(2, 2));
        let x = vec2(0.0, 0.0);
        assert!(matches!(
            chart.metric_inverse(&x),
            Err(GeomError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn model_distances_match_closed_forms() {
        // flat
        let flat = MetricChart::flat(2);
        assert_abs_diff_eq!(flat.distance(&vec2(0.0, 0.0), &vec2(3.0, 4.0)), 5.0, epsilon = 1e-12);

        // sphere: origin to coordinate radius tan(t/2) is distance t (c = 1)
        let sph = MetricChart::constant_curvature(2, 1.0);
        let t = 0.9f64;
        assert_abs_diff_eq!(
            sph.distance(&vec2(0.0, 0.0), &vec2((t / 2.0).tan(), 0.0)),
            t,
            epsilon = 1e-12
        );

        // hyperbolic: origin to coordinate radius tanh(t/2) is distance t (c = -1)
        let hyp = MetricChart::constant_curvature(2, -1.0);
        assert_abs_diff_eq!(
            hyp.distance(&vec2(0.0, 0.0), &vec2((t / 2.0).tanh(), 0.0)),
            t,
            epsilon = 1e-12
        );
    }

    #[test]
    fn embeddings_round_trip() {
        let x = vec2(0.37, -0.81);
        let back = project_sphere(0.5, &embed_sphere(0.5, &x));
        assert!((&back - &x).norm() < 1e-12);
        let y = vec2(0.21, 0.4);
        let back = project_hyperboloid(-2.0, &embed_hyperboloid(-2.0, &y));
        assert!((&back - &y).norm() < 1e-12);
    }

    #[test]
    fn log_direction_points_at_target() {
        for chart in [
            MetricChart::flat(2),
            MetricChart::constant_curvature(2, 1.0),
            MetricChart::constant_curvature(2, -1.0),
        ] {
            let p = vec2(0.3, 0.1);
            let q = vec2(-0.2, 0.4);
            let dir = chart.log_direction(&p, &q).unwrap();
            assert_abs_diff_eq!(chart.norm(&p, &dir), 1.0, epsilon = 1e-9);
        }
    }
}
