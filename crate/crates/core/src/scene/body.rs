//! Implicit strictly convex bodies: psi < 0 inside, psi = 0 on the
//! boundary, psi > 0 outside.

use nalgebra::{DMatrix, DVector};

use crate::error::SceneError;
use crate::geometry::MetricChart;

/// One monomial `coef * x_0^e0 * x_1^e1 * ...` of an implicit polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTerm {
    pub coef: f64,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BodyShape {
    /// `|x - center|^2 - r^2` in two dimensions.
    Disc { center: Vec<f64>, radius: f64 },
    /// `sum_i ((x_i - c_i)/a_i)^2 - 1`.
    Ellipse { center: Vec<f64>, semi_axes: Vec<f64> },
    /// `|x - center|^2 - r^2` in three dimensions.
    Ball { center: Vec<f64>, radius: f64 },
    /// General polynomial level set; needs an interior seed point for
    /// boundary sampling.
    Polynomial { terms: Vec<PolyTerm>, interior: Vec<f64> },
}

/// An implicit body on a chart, identified by a small integer label.
///
/// Derivatives are analytic for every built-in shape.
#[derive(Clone, Debug)]
pub struct ImplicitBody {
    pub shape: BodyShape,
    pub label: usize,
}

impl ImplicitBody {
    pub fn new(shape: BodyShape, label: usize) -> Self {
        ImplicitBody { shape, label }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            BodyShape::Disc { center, .. } => center.len(),
            BodyShape::Ellipse { center, .. } => center.len(),
            BodyShape::Ball { center, .. } => center.len(),
            BodyShape::Polynomial { interior, .. } => interior.len(),
        }
    }

    pub fn psi(&self, x: &DVector<f64>) -> f64 {
        match &self.shape {
            BodyShape::Disc { center, radius } | BodyShape::Ball { center, radius } => {
                let mut s = 0.0;
                for (i, c) in center.iter().enumerate() {
                    s += (x[i] - c) * (x[i] - c);
                }
                s - radius * radius
            }
            BodyShape::Ellipse { center, semi_axes } => {
                let mut s = 0.0;
                for (i, (c, a)) in center.iter().zip(semi_axes).enumerate() {
                    let d = (x[i] - c) / a;
                    s += d * d;
                }
                s - 1.0
            }
            BodyShape::Polynomial { terms, .. } => terms
                .iter()
                .map(|t| {
                    t.coef
                        * t.exponents
                            .iter()
                            .enumerate()
                            .map(|(i, &e)| x[i].powi(e as i32))
                            .product::<f64>()
                })
                .sum(),
        }
    }

    pub fn grad_psi(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = x.len();
        match &self.shape {
            BodyShape::Disc { center, .. } | BodyShape::Ball { center, .. } => {
                DVector::from_iterator(n, (0..n).map(|i| 2.0 * (x[i] - center[i])))
            }
            BodyShape::Ellipse { center, semi_axes } => DVector::from_iterator(
                n,
                (0..n).map(|i| 2.0 * (x[i] - center[i]) / (semi_axes[i] * semi_axes[i])),
            ),
            BodyShape::Polynomial { terms, .. } => {
                let mut g = DVector::zeros(n);
                for t in terms {
                    for i in 0..n {
                        let e = t.exponents[i];
                        if e == 0 {
                            continue;
                        }
                        let mut v = t.coef * e as f64 * x[i].powi(e as i32 - 1);
                        for (j, &ej) in t.exponents.iter().enumerate() {
                            if j != i {
                                v *= x[j].powi(ej as i32);
                            }
                        }
                        g[i] += v;
                    }
                }
                g
            }
        }
    }

    pub fn hess_psi(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        match &self.shape {
            BodyShape::Disc { .. } | BodyShape::Ball { .. } => DMatrix::identity(n, n) * 2.0,
            BodyShape::Ellipse { semi_axes, .. } => DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                semi_axes.iter().map(|a| 2.0 / (a * a)),
            )),
            BodyShape::Polynomial { terms, .. } => {
                let mut hess = DMatrix::zeros(n, n);
                for t in terms {
                    for i in 0..n {
                        for j in i..n {
                            let mut v = t.coef;
                            let mut ok = true;
                            for (k, &ek) in t.exponents.iter().enumerate() {
                                let mut e = ek as i32;
                                if k == i {
                                    v *= e as f64;
                                    e -= 1;
                                }
                                if k == j {
                                    v *= e as f64;
                                    e -= 1;
                                }
                                if e < 0 {
                                    ok = false;
                                    break;
                                }
                                v *= x[k].powi(e);
                            }
                            if ok && v != 0.0 {
                                hess[(i, j)] += v;
                                if i != j {
                                    hess[(j, i)] += v;
                                }
                            }
                        }
                    }
                }
                hess
            }
        }
    }

    /// An interior point used as a seed for boundary sampling.
    pub fn interior_point(&self) -> DVector<f64> {
        match &self.shape {
            BodyShape::Disc { center, .. }
            | BodyShape::Ball { center, .. }
            | BodyShape::Ellipse { center, .. } => DVector::from_vec(center.clone()),
            BodyShape::Polynomial { interior, .. } => DVector::from_vec(interior.clone()),
        }
    }

    /// Finds the boundary point along the open ray `seed + s * dir`, s > 0,
    /// by bracketing and bisection on psi.
    pub fn boundary_along(&self, dir: &DVector<f64>) -> Result<DVector<f64>, SceneError> {
        let seed = self.interior_point();
        debug_assert!(self.psi(&seed) < 0.0, "seed point must be interior");
        let dir = dir / dir.norm();
        let mut lo = 0.0f64;
        let mut hi = 1e-3f64;
        let mut guard = 0;
        while self.psi(&(&seed + &dir * hi)) < 0.0 {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 80 {
                return Err(SceneError::DegenerateBoundary {
                    label: self.label,
                    point: seed.iter().copied().collect(),
                    grad_norm: 0.0,
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.psi(&(&seed + &dir * mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * (1.0 + hi) {
                break;
            }
        }
        Ok(&seed + &dir * (0.5 * (lo + hi)))
    }

    /// Deterministic boundary sample of roughly `count` points.
    pub fn boundary_samples(&self, count: usize) -> Result<Vec<DVector<f64>>, SceneError> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        if n == 2 {
            for i in 0..count {
                let th = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                out.push(self.boundary_along(&DVector::from_vec(vec![th.cos(), th.sin()]))?);
            }
        } else {
            // Fibonacci sphere directions
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * i as f64;
                out.push(self.boundary_along(&DVector::from_vec(vec![
                    r * th.cos(),
                    r * th.sin(),
                    z,
                ]))?);
            }
        }
        Ok(out)
    }
}

/// Shape operator of the boundary at `x`, with respect to the outward unit
/// normal (equivalently, the second fundamental form with respect to the
/// inward normal), expressed in an orthonormal tangent frame.
///
/// Returns `(matrix, tangent_frame, outward_normal)`.
pub fn boundary_shape_operator(
    body: &ImplicitBody,
    chart: &MetricChart,
    x: &DVector<f64>,
) -> Result<(DMatrix<f64>, Vec<DVector<f64>>, DVector<f64>), SceneError> {
    let n = chart.dim();
    let psi = body.psi(x);
    if psi.abs() > 1e-9 {
        return Err(SceneError::NotOnBoundary {
            label: body.label,
            point: x.iter().copied().collect(),
            psi,
        });
    }
    let dpsi = body.grad_psi(x);
    if dpsi.norm() < 1e-10 {
        return Err(SceneError::DegenerateBoundary {
            label: body.label,
            point: x.iter().copied().collect(),
            grad_norm: dpsi.norm(),
        });
    }

    let ginv = chart.metric_inverse(x)?;
    let grad = &ginv * &dpsi; // metric gradient, points outward
    let normal = chart.unit(x, &grad)?;

    // orthonormal tangent frame from Gram-Schmidt over coordinate axes
    let mut basis: Vec<DVector<f64>> = vec![normal.clone()];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut cand = DVector::zeros(n);
        cand[i] = 1.0;
        for b in &basis {
            let c = chart.inner(x, &cand, b);
            cand -= b * c;
        }
        let nrm = chart.norm(x, &cand);
        if nrm > 1e-8 {
            basis.push(cand / nrm);
        }
    }
    let tangent: Vec<DVector<f64>> = basis.split_off(1);

    // s_ab = <nabla_{tau_a} G, tau_b> / |G| with G the metric gradient field.
    // d_i G^k = g^{kj} d_i d_j psi + (d_i g^{kj}) d_j psi, and the metric
    // derivative comes from metric compatibility:
    // d_i g^{kj} = -g^{km} Gamma^j_mi - g^{jm} Gamma^k_mi.
    let hess = body.hess_psi(x);
    let gam = chart.christoffel(x);
    let g = chart.metric(x);
    let grad_norm = chart.norm(x, &grad);

    let mut dgrad = DMatrix::zeros(n, n); // dgrad[(k, i)] = d_i G^k + Gamma^k_im G^m
    for i in 0..n {
        for k in 0..n {
            let mut v = 0.0;
            for j in 0..n {
                v += ginv[(k, j)] * hess[(i, j)];
                // derivative of the inverse metric
                let mut dginv = 0.0;
                for m in 0..n {
                    dginv -= ginv[(k, m)] * gam[j][(m, i)] + ginv[(j, m)] * gam[k][(m, i)];
                }
                v += dginv * dpsi[j];
            }
            for m in 0..n {
                v += gam[k][(i, m)] * grad[m];
            }
            dgrad[(k, i)] = v;
        }
    }

    let m = n - 1;
    let mut s = DMatrix::zeros(m, m);
    for a in 0..m {
        // covariant derivative of G along tau_a
        let mut cov = DVector::zeros(n);
        for k in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += dgrad[(k, i)] * tangent[a][i];
            }
            cov[k] = v;
        }
        for b in 0..m {
            s[(a, b)] = (&g * &tangent[b]).dot(&cov) / grad_norm;
        }
    }
    // symmetrize away round-off
    let s = (&s + s.transpose()) * 0.5;
    Ok((s, tangent, normal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vx(v: &[f64]) -> DVector<f64> {
        DVector::from_vec(v.to_vec())
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        let chart = MetricChart::flat(2);
        let body = ImplicitBody::new(BodyShape::Disc { center: vec![1.0, -2.0], radius: 3.0 }, 0);
        for th in [0.0, 0.7, 2.1, 4.4] {
            let x = vx(&[1.0 + 3.0 * f64::cos(th), -2.0 + 3.0 * f64::sin(th)]);
            let (s, _tau, nrm) = boundary_shape_operator(&body, &chart, &x).unwrap();
            assert_abs_diff_eq!(s[(0, 0)], 1.0 / 3.0, epsilon = 1e-10);
            // outward normal points away from the center
            let radial = vx(&[f64::cos(th), f64::sin(th)]);
            assert!(nrm.dot(&radial) > 0.99);
        }
    }

    #[test]
    fn sphere_principal_curvatures() {
        let chart = MetricChart::flat(3);
        let body = ImplicitBody::new(BodyShape::Ball { center: vec![0.0, 0.0, 0.0], radius: 2.0 }, 0);
        let x = vx(&[2.0 / 3.0f64.sqrt(), 2.0 / 3.0f64.sqrt(), 2.0 / 3.0f64.sqrt()]);
        let (s, _, _) = boundary_shape_operator(&body, &chart, &x).unwrap();
        let eig = s.symmetric_eigenvalues();
        for e in eig.iter() {
            assert_abs_diff_eq!(*e, 0.5, epsilon = 1e-9);
        }
    }

    /// Brute-force curvature of the parametrized ellipse (a cos t, b sin t).
    fn ellipse_curvature_oracle(a: f64, b: f64, t: f64) -> f64 {
        let (xp, yp) = (-a * t.sin(), b * t.cos());
        let (xpp, ypp) = (-a * t.cos(), -b * t.sin());
        (xp * ypp - yp * xpp) / (xp * xp + yp * yp).powf(1.5)
    }

    #[test]
    fn ellipse_vertex_curvature_matches_parametric_oracle() {
        let chart = MetricChart::flat(2);
        let body = ImplicitBody::new(
            BodyShape::Ellipse { center: vec![0.0, 0.0], semi_axes: vec![2.0, 1.0] },
            0,
        );
        // major-axis vertex (2, 0): curvature a/b^2 = 2
        let oracle = ellipse_curvature_oracle(2.0, 1.0, 0.0);
        assert_abs_diff_eq!(oracle, 2.0, epsilon = 1e-12);
        let (s, _, _) = boundary_shape_operator(&body, &chart, &vx(&[2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], oracle, epsilon = 1e-9);

        // and off-vertex points against the same oracle
        for t in [0.5, 1.2, 2.9] {
            let x = vx(&[2.0 * f64::cos(t), f64::sin(t)]);
            let (s, _, _) = boundary_shape_operator(&body, &chart, &x).unwrap();
            assert_abs_diff_eq!(s[(0, 0)], ellipse_curvature_oracle(2.0, 1.0, t), epsilon = 1e-8);
        }
    }

    #[test]
    fn off_boundary_point_is_rejected() {
        let chart = MetricChart::flat(2);
        let body = ImplicitBody::new(BodyShape::Disc { center: vec![0.0, 0.0], radius: 1.0 }, 3);
        let r = boundary_shape_operator(&body, &chart, &vx(&[1.5, 0.0]));
        assert!(matches!(r, Err(SceneError::NotOnBoundary { label: 3, .. })));
    }

    #[test]
    fn polynomial_body_matches_disc() {
        // x^2 + y^2 - 1 as an explicit polynomial
        let poly = ImplicitBody::new(
            BodyShape::Polynomial {
                terms: vec![
                    PolyTerm { coef: 1.0, exponents: vec![2, 0] },
                    PolyTerm { coef: 1.0, exponents: vec![0, 2] },
                    PolyTerm { coef: -1.0, exponents: vec![0, 0] },
                ],
                interior: vec![0.0, 0.0],
            },
            0,
        );
        let disc = ImplicitBody::new(BodyShape::Disc { center: vec![0.0, 0.0], radius: 1.0 }, 0);
        let x = vx(&[0.3, -0.8]);
        assert_abs_diff_eq!(poly.psi(&x), disc.psi(&x), epsilon = 1e-14);
        assert!((poly.grad_psi(&x) - disc.grad_psi(&x)).norm() < 1e-14);
        assert!((poly.hess_psi(&x) - disc.hess_psi(&x)).norm() < 1e-14);

        let chart = MetricChart::flat(2);
        let b = poly.boundary_along(&vx(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(b.norm(), 1.0, epsilon = 1e-12);
        let (s, _, _) = boundary_shape_operator(&poly, &chart, &b).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn curved_chart_circle_has_metric_curvature() {
        // a coordinate circle of radius r centred at the origin of the
        // hyperbolic model is a metric circle of radius rho = 2 atanh(r);
        // its geodesic curvature is coth(rho) * sign convention > 1
        let chart = MetricChart::constant_curvature(2, -1.0);
        let body = ImplicitBody::new(BodyShape::Disc { center: vec![0.0, 0.0], radius: 0.5 }, 0);
        let x = vx(&[0.5, 0.0]);
        let (s, _, _) = boundary_shape_operator(&body, &chart, &x).unwrap();
        let rho = 2.0 * 0.5f64.atanh();
        assert_abs_diff_eq!(s[(0, 0)], 1.0 / rho.tanh(), epsilon = 1e-8);
    }
}
