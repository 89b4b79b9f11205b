//! Wavefront state: a point with unit normal, a transported orthonormal
//! frame of the normal complement, and the shape operator in that frame.

use nalgebra::{DMatrix, DVector};

use crate::error::{FrontError, GeomError};
use crate::geometry::{Frame, MetricChart, PhasePoint};

/// State of a convex front along one of its normal rays.
///
/// `base.v` is the unit front normal, `frame` an orthonormal basis of its
/// orthogonal complement, and `s` the shape-operator components in that
/// frame (units 1/length). `t` is the elapsed propagation time.
#[derive(Clone, Debug)]
pub struct FrontState {
    pub base: PhasePoint,
    pub frame: Vec<DVector<f64>>,
    pub s: DMatrix<f64>,
    pub t: f64,
}

impl FrontState {
    /// Builds a front state; the frame comes from Gram-Schmidt around the
    /// normal and `s` must be symmetric in that frame.
    pub fn new(chart: &MetricChart, base: PhasePoint, s: DMatrix<f64>) -> Result<Self, GeomError> {
        let frame = Frame::orthonormal_complement(chart, base.clone())?;
        debug_assert_eq!(s.nrows(), base.dim() - 1);
        Ok(FrontState { base, frame: frame.e, s, t: 0.0 })
    }

    /// Scalar constructor for two-dimensional charts.
    pub fn scalar(chart: &MetricChart, base: PhasePoint, k: f64) -> Result<Self, GeomError> {
        FrontState::new(chart, base, DMatrix::from_element(1, 1, k))
    }

    pub fn min_curvature(&self) -> f64 {
        self.s.symmetric_eigenvalues().min()
    }

    pub fn max_curvature(&self) -> f64 {
        self.s.symmetric_eigenvalues().max()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.s - self.s.transpose()).amax()
    }
}

/// A sampled codimension-1 front: a parameter grid with one state per node.
/// Missing states mark holes left by per-sample propagation failures.
#[derive(Clone, Debug)]
pub struct FrontPatch {
    /// Grid shape: `[m]` in 2D, `[m1, m2]` in 3D.
    pub grid: Vec<usize>,
    /// Parameter tuples, row-major over the grid.
    pub params: Vec<Vec<f64>>,
    pub states: Vec<Option<FrontState>>,
    pub provenance: String,
}

impl FrontPatch {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn holes(&self) -> usize {
        self.states.iter().filter(|s| s.is_none()).count()
    }

    /// Smallest principal curvature over all present samples.
    pub fn min_curvature(&self) -> f64 {
        self.states
            .iter()
            .flatten()
            .map(|s| s.min_curvature())
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the sample with parameter closest to `u` (2D).
    pub fn nearest_index(&self, u: f64) -> usize {
        let mut best = 0;
        let mut err = f64::INFINITY;
        for (i, p) in self.params.iter().enumerate() {
            let d = (p[0] - u).abs();
            if d < err {
                err = d;
                best = i;
            }
        }
        best
    }

    /// Arc length along the patch polyline between two parameter values
    /// (2D), metric lengths of the chords between consecutive samples.
    pub fn arc_length_between(
        &self,
        chart: &MetricChart,
        u0: f64,
        u1: f64,
    ) -> Result<f64, FrontError> {
        if self.grid.len() != 1 {
            return Err(FrontError::UnsupportedDimension { dim: self.grid.len() + 1 });
        }
        let (i0, i1) = (self.nearest_index(u0.min(u1)), self.nearest_index(u0.max(u1)));
        let mut acc = 0.0;
        for i in i0..i1 {
            let (Some(a), Some(b)) = (&self.states[i], &self.states[i + 1]) else {
                return Err(FrontError::NotComparable { u0, u1 });
            };
            let mid = (&a.base.x + &b.base.x) * 0.5;
            let d = &b.base.x - &a.base.x;
            acc += chart.norm(&mid, &d);
        }
        Ok(acc)
    }

    /// Circle front in a two-dimensional chart: coordinate circle of radius
    /// `r` with outward (`sign = +1`) or inward (`sign = -1`) normals, and
    /// the matching shape operator. Exact for the flat chart; on curved
    /// charts the curvature is sampled from the boundary geometry.
    pub fn circle(
        chart: &MetricChart,
        center: &DVector<f64>,
        r: f64,
        sign: f64,
        arc: (f64, f64),
        samples: usize,
    ) -> Result<FrontPatch, FrontError> {
        assert_eq!(chart.dim(), 2);
        let mut params = Vec::with_capacity(samples);
        let mut states = Vec::with_capacity(samples);
        for i in 0..samples {
            let th = arc.0 + (arc.1 - arc.0) * i as f64 / (samples - 1).max(1) as f64;
            let x = DVector::from_vec(vec![center[0] + r * th.cos(), center[1] + r * th.sin()]);
            let radial = DVector::from_vec(vec![th.cos(), th.sin()]);
            let base = PhasePoint::new(chart, x.clone(), &radial * sign)?;
            // curvature of the coordinate circle with respect to the chosen
            // normal; flat: sign / r
            let k = match chart.curvature_constant() {
                Some(0.0) => sign / r,
                _ => {
                    let body = crate::scene::ImplicitBody::new(
                        crate::scene::BodyShape::Disc {
                            center: vec![center[0], center[1]],
                            radius: r,
                        },
                        usize::MAX,
                    );
                    let (s, _, _) = crate::scene::boundary_shape_operator(&body, chart, &x)?;
                    sign * s[(0, 0)]
                }
            };
            params.push(vec![th]);
            states.push(Some(FrontState::scalar(chart, base, k)?));
        }
        Ok(FrontPatch { grid: vec![samples], params, states, provenance: "circle".to_string() })
    }

    /// Sphere front in a flat three-dimensional chart.
    pub fn sphere(
        chart: &MetricChart,
        center: &DVector<f64>,
        r: f64,
        sign: f64,
        grid: (usize, usize),
    ) -> Result<FrontPatch, FrontError> {
        assert_eq!(chart.dim(), 3);
        assert!(matches!(chart.curvature_constant(), Some(0.0)));
        let (m1, m2) = grid;
        let mut params = Vec::with_capacity(m1 * m2);
        let mut states = Vec::with_capacity(m1 * m2);
        for i in 0..m1 {
            // stay away from the poles
            let polar = 0.2 + (std::f64::consts::PI - 0.4) * i as f64 / (m1 - 1).max(1) as f64;
            for j in 0..m2 {
                let azim = 2.0 * std::f64::consts::PI * j as f64 / m2 as f64;
                let radial = DVector::from_vec(vec![
                    polar.sin() * azim.cos(),
                    polar.sin() * azim.sin(),
                    polar.cos(),
                ]);
                let x = center + &radial * r;
                let base = PhasePoint::new(chart, x, &radial * sign)?;
                let s = DMatrix::identity(2, 2) * (sign / r);
                params.push(vec![polar, azim]);
                states.push(Some(FrontState::new(chart, base, s)?));
            }
        }
        Ok(FrontPatch { grid: vec![m1, m2], params, states, provenance: "sphere".to_string() })
    }
}
