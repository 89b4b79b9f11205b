//! Scalar root bracketing and refinement (Brent's method).

/// Finds a root of `f` in `[a, b]` given `f(a) * f(b) <= 0`; iterates
/// never leave the bracket.
///
/// Stops when the bracket is narrower than `xtol` or `|f|` drops below
/// `ftol`. Returns the best abscissa and its value.
pub(crate) fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> (f64, f64) {
    debug_assert!(fa * fb <= 0.0, "root must be bracketed");
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = c;
    let mut mflag = true;

    for _ in 0..max_iter {
        if fb == 0.0 || fb.abs() <= ftol || (b - a).abs() <= xtol {
            return (b, fb);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            // secant
            b - fb * (b - a) / (fb - fa)
        };

        // fall back to bisection unless s lies between (3a+b)/4 and b and
        // the step is genuinely shrinking
        let lo = (3.0 * a + b) / 4.0;
        let out_of_range = !(lo.min(b) < s && s < lo.max(b));
        let big_step = if mflag {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        let stalled =
            if mflag { (b - c).abs() < xtol } else { (c - d).abs() < xtol };
        if out_of_range || big_step || stalled {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }

        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    (b, fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let f = |x: f64| x * x - 2.0;
        let (x, fx) = brent(f, 0.0, 2.0, f(0.0), f(2.0), 1e-15, 0.0, 100);
        assert!((x - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(fx.abs() < 1e-13);

        let g = |x: f64| x.cos() - x;
        let (x, _) = brent(g, 0.0, 1.0, g(0.0), g(1.0), 1e-15, 0.0, 100);
        assert!((g(x)).abs() < 1e-14);
    }

    #[test]
    fn stays_inside_the_bracket_near_a_shallow_double_root() {
        // (t - 1)^2 - 1e-10 has roots at 1 +/- 1e-5; with the bracket ending
        // between them, only the left root is admissible
        let f = |t: f64| (t - 1.0) * (t - 1.0) - 1e-10;
        let (x, fx) = brent(f, 0.0, 1.0, f(0.0), f(1.0), 1e-15, 0.0, 200);
        assert!((0.0..=1.0).contains(&x), "escaped the bracket: {x}");
        assert!((x - (1.0 - 1e-5)).abs() < 1e-12, "x = {x}");
        assert!(fx.abs() < 1e-14);
    }

    #[test]
    fn handles_a_root_exactly_at_the_bracket_end() {
        let f = |t: f64| t * (t - 3.0);
        let (x, _) = brent(f, -1.0, 0.0, f(-1.0), f(0.0), 1e-15, 0.0, 100);
        assert!(x.abs() < 1e-12);
    }
}
