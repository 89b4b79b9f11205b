//! The reflection jump law for front shape operators.
//!
//! For a front hitting an obstacle boundary, the incoming and outgoing
//! shape operators satisfy, for all vectors tangent to the obstacle,
//! `<s+ Y+, Z+> - <s- Y-, Z-> = -2 <n-, n_K> <s_K Y, Z>`
//! where `Y+/-` are the projections of `Y` onto the front tangent spaces
//! before and after reflection. Assembling both sides in the obstacle
//! tangent frame and inverting the outgoing projection yields `s+`.

use nalgebra::{DMatrix, DVector};

use crate::error::FrontError;
use crate::geometry::{Frame, MetricChart, PhasePoint};

use super::state::FrontState;

/// Applies the jump law at a boundary point.
///
/// `s_k` is the obstacle shape operator in the orthonormal tangent frame
/// `tau` (with respect to the outward normal `n_k`); the incoming front
/// normal must satisfy `<n-, n_K> < 0`. The output state carries the
/// reflected frame, re-orthonormalized against the reflected normal.
pub fn reflect_shape_operator(
    chart: &MetricChart,
    f: &FrontState,
    s_k: &DMatrix<f64>,
    tau: &[DVector<f64>],
    n_k: &DVector<f64>,
    tangency_tol: f64,
) -> Result<FrontState, FrontError> {
    let x = &f.base.x;
    let m = f.frame.len();
    debug_assert_eq!(s_k.nrows(), m);
    debug_assert_eq!(tau.len(), m);

    let dot = chart.inner(x, &f.base.v, n_k);
    if dot.abs() < tangency_tol {
        return Err(FrontError::GrazingJump { dot });
    }
    debug_assert!(dot < 0.0, "jump law expects an incoming normal");
    let mu = -2.0 * dot;

    // reflected normal and frame
    let n_plus = &f.base.v - n_k * (2.0 * dot);
    let e_plus: Vec<DVector<f64>> = f
        .frame
        .iter()
        .map(|e| {
            let c = chart.inner(x, e, n_k);
            e - n_k * (2.0 * c)
        })
        .collect();

    // projection matrices (A_pm)_{ia} = <tau_a, e_i^pm>
    let mut a_minus = DMatrix::zeros(m, m);
    let mut a_plus = DMatrix::zeros(m, m);
    for a in 0..m {
        for i in 0..m {
            a_minus[(i, a)] = chart.inner(x, &tau[a], &f.frame[i]);
            a_plus[(i, a)] = chart.inner(x, &tau[a], &e_plus[i]);
        }
    }
    let a_plus_inv = a_plus
        .clone()
        .try_inverse()
        .ok_or(FrontError::GrazingJump { dot })?;

    let rhs = a_minus.transpose() * &f.s * &a_minus + s_k * mu;
    let s_plus = a_plus_inv.transpose() * rhs * a_plus_inv;
    let s_plus = (&s_plus + s_plus.transpose()) * 0.5;

    let base = PhasePoint { x: x.clone(), v: chart.unit(x, &n_plus)? };
    let mut frame = Frame { base: base.clone(), e: e_plus };
    frame.reorthonormalize(chart)?;
    Ok(FrontState { base, frame: frame.e, s: s_plus, t: f.t })
}
