//! Adaptive Dormand-Prince 5(4) integration with dense output, and the
//! unit-speed geodesic flow built on top of it.
//!
//! The stepper is exposed one accepted step at a time so that event
//! detection can clamp the next step near obstacle boundaries and query the
//! continuous extension inside each step.

use nalgebra::DVector;

use crate::error::GeomError;
use crate::geometry::{MetricChart, PhasePoint};

/// Butcher tableau of Dormand-Prince 5(4).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (the last tableau row; FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Embedded fourth-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
/// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Step-size policy for the adaptive integrator.
#[derive(Clone, Debug)]
pub struct StepControl {
    /// Per-step error target (absolute and relative).
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { tol: 1e-10, h_init: 1e-3, h_min: 1e-14, h_max: 1.0, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub y0: DVector<f64>,
    pub y1: DVector<f64>,
    rcont: [DVector<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluates the fourth-order interpolant at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        &self.rcont[0]
            + (&self.rcont[1] + (&self.rcont[2] + (&self.rcont[3] + &self.rcont[4] * th1) * th) * th1) * th
    }
}

/// Adaptive Dormand-Prince stepper over a dynamically-sized state.
pub struct Dopri5<'f> {
    f: &'f (dyn Fn(f64, &DVector<f64>, &mut DVector<f64>) + 'f),
    pub t: f64,
    pub y: DVector<f64>,
    h_next: f64,
    ctl: StepControl,
    k1: Option<DVector<f64>>,
    pub stats: IntegrationStats,
}

impl<'f> Dopri5<'f> {
    pub fn new(
        f: &'f (dyn Fn(f64, &DVector<f64>, &mut DVector<f64>) + 'f),
        t0: f64,
        y0: DVector<f64>,
        ctl: StepControl,
    ) -> Self {
        let h0 = ctl.h_init.min(ctl.h_max).max(ctl.h_min);
        Dopri5 { f, t: t0, y: y0, h_next: h0, ctl, k1: None, stats: IntegrationStats::default() }
    }

    fn error_norm(&self, y0: &DVector<f64>, y1: &DVector<f64>, err: &DVector<f64>) -> f64 {
        let n = err.len();
        let mut acc = 0.0;
        for i in 0..n {
            let sc = self.ctl.tol + self.ctl.tol * y0[i].abs().max(y1[i].abs());
            let e = err[i] / sc;
            acc += e * e;
        }
        (acc / n as f64).sqrt()
    }

    /// Advances by one accepted step of size at most `h_cap`.
    pub fn step(&mut self, h_cap: f64) -> Result<DenseStep, GeomError> {
        let n = self.y.len();
        let mut h = self.h_next.min(h_cap).min(self.ctl.h_max);
        if !(h > 0.0) {
            return Err(GeomError::StepUnderflow { t: self.t });
        }

        let k1 = match self.k1.take() {
            Some(k) => k,
            None => {
                let mut k = DVector::zeros(n);
                (self.f)(self.t, &self.y, &mut k);
                self.stats.rhs_evals += 1;
                k
            }
        };

        loop {
            if self.stats.accepted + self.stats.rejected >= self.ctl.max_steps {
                return Err(GeomError::TooManySteps { max_steps: self.ctl.max_steps });
            }
            let mut k = [
                k1.clone(),
                DVector::zeros(n),
                DVector::zeros(n),
                DVector::zeros(n),
                DVector::zeros(n),
                DVector::zeros(n),
                DVector::zeros(n),
            ];
            for s in 1..7 {
                let mut ys = self.y.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        ys.axpy(h * a, kj, 1.0);
                    }
                }
                let mut ks = DVector::zeros(n);
                (self.f)(self.t + C[s] * h, &ys, &mut ks);
                self.stats.rhs_evals += 1;
                k[s] = ks;
            }

            let mut y1 = self.y.clone();
            let mut err = DVector::zeros(n);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y1.axpy(h * B5[s], &k[s], 1.0);
                }
                let db = B5[s] - B4[s];
                if db != 0.0 {
                    err.axpy(h * db, &k[s], 1.0);
                }
            }

            let errn = self.error_norm(&self.y, &y1, &err);
            if errn <= 1.0 {
                // accept
                let dy = &y1 - &self.y;
                let mut rcont5 = DVector::zeros(n);
                for s in 0..7 {
                    if D[s] != 0.0 {
                        rcont5.axpy(h * D[s], &k[s], 1.0);
                    }
                }
                let rcont = [
                    self.y.clone(),
                    dy.clone(),
                    &k[0] * h - &dy,
                    &dy - &k[6] * h - (&k[0] * h - &dy),
                    rcont5,
                ];
                let step = DenseStep { t0: self.t, h, y0: self.y.clone(), y1: y1.clone(), rcont };

                let fac = (0.9 * errn.powf(-0.2)).clamp(0.2, 5.0);
                self.h_next = (h * fac).min(self.ctl.h_max);
                self.t += h;
                self.y = y1;
                self.k1 = Some(k[6].clone());
                self.stats.accepted += 1;
                return Ok(step);
            }

            self.stats.rejected += 1;
            let fac = (0.9 * errn.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
            if h < self.ctl.h_min {
                return Err(GeomError::StepUnderflow { t: self.t });
            }
        }
    }

    /// Integrates up to exactly `t_end` (assumes `t_end >= t`).
    pub fn run_to(&mut self, t_end: f64) -> Result<(), GeomError> {
        while self.t < t_end - 1e-15 * t_end.abs().max(1.0) {
            let remaining = t_end - self.t;
            self.step(remaining)?;
        }
        Ok(())
    }
}

/// Right-hand side of the geodesic equation on the state `[x; v]`.
pub fn geodesic_flow_rhs(chart: &MetricChart, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
    let n = chart.dim();
    let x = y.rows(0, n).into_owned();
    let v = y.rows(n, n).into_owned();
    let acc = chart.christoffel_apply(&x, &v, &v);
    for i in 0..n {
        dy[i] = v[i];
        dy[n + i] = -acc[i];
    }
}

/// A geodesic arc produced by the integrator: start state, signed duration
/// and the reached end state.
#[derive(Clone, Debug)]
pub struct GeodesicSegment {
    pub start: PhasePoint,
    pub duration: f64,
    pub end: PhasePoint,
}

fn pack(p: &PhasePoint) -> DVector<f64> {
    let n = p.dim();
    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(&p.x);
    y.rows_mut(n, n).copy_from(&p.v);
    y
}

fn unpack(n: usize, y: &DVector<f64>) -> PhasePoint {
    PhasePoint { x: y.rows(0, n).into_owned(), v: y.rows(n, n).into_owned() }
}

/// Integrates the unit-speed geodesic flow for time `t` (either sign).
///
/// The velocity is never rescaled during integration; the returned state is
/// renormalized in reporting only. Leaving the chart domain yields a
/// domain-exit error carrying the last valid state.
pub fn integrate_geodesic(
    chart: &MetricChart,
    start: &PhasePoint,
    t: f64,
    ctl: &StepControl,
) -> Result<PhasePoint, GeomError> {
    Ok(integrate_geodesic_segment(chart, start, t, ctl)?.end)
}

/// As [`integrate_geodesic`], returning the whole segment.
pub fn integrate_geodesic_segment(
    chart: &MetricChart,
    start: &PhasePoint,
    t: f64,
    ctl: &StepControl,
) -> Result<GeodesicSegment, GeomError> {
    let n = chart.dim();
    // negative durations run the reversed ray forward
    let (state0, dur) = if t < 0.0 { (start.reversed(), -t) } else { (start.clone(), t) };

    let rhs = |tt: f64, y: &DVector<f64>, dy: &mut DVector<f64>| geodesic_flow_rhs(chart, tt, y, dy);
    let mut stepper = Dopri5::new(&rhs, 0.0, pack(&state0), ctl.clone());
    while stepper.t < dur {
        let remaining = dur - stepper.t;
        let step = stepper.step(remaining)?;
        let reached = unpack(n, &step.y1);
        if !chart.contains(&reached.x) {
            return Err(GeomError::DomainExit { t: stepper.t, last_x: reached.x, last_v: reached.v });
        }
    }
    let mut end = unpack(n, &stepper.y);
    end.v = chart.unit(&end.x, &end.v)?;
    if t < 0.0 {
        end = end.reversed();
    }
    Ok(GeodesicSegment { start: start.clone(), duration: t, end })
}
