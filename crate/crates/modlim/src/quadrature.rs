//! Adaptive numerical integration used by the exact-modulus and harness
//! modules.
//!
//! The integrands here (`1/f` for piecewise profiles, pairings against an
//! extremal density) are smooth between explicitly known breakpoints, so the
//! strategy is: split at the supplied breakpoints, then run adaptive Simpson
//! refinement on each smooth span with a per-span share of the absolute
//! error budget.

/// The integrator could not reach the requested absolute tolerance within
/// its evaluation budget.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFailure {
    /// Error estimate actually achieved.
    pub achieved: f64,
    /// Tolerance that was requested.
    pub requested: f64,
}

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`, splitting
/// first at the interior points of `splits` (points outside `(a, b)` are
/// ignored; they need not be sorted).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    splits: &[f64],
) -> Result<f64, QuadFailure> {
    if a == b {
        return Ok(0.0);
    }
    debug_assert!(a < b);
    let mut cuts: Vec<f64> = splits.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut points = Vec::with_capacity(cuts.len() + 2);
    points.push(a);
    points.extend(cuts);
    points.push(b);

    let total_w = b - a;
    let mut sum = 0.0;
    let mut err = 0.0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        // Give each span a budget share proportional to its width, with a
        // floor so zero-width spans cannot demand exact arithmetic.
        let span_tol = (abs_tol * (hi - lo) / total_w).max(abs_tol * 1e-3);
        let (v, e) = simpson_adaptive(&f, lo, hi, span_tol);
        sum += v;
        err += e;
    }
    if err > abs_tol {
        Err(QuadFailure {
            achieved: err,
            requested: abs_tol,
        })
    } else {
        Ok(sum)
    }
}

/// Adaptive Simpson on one smooth span. Returns (value, error estimate).
fn simpson_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Standard Richardson error estimate for Simpson: |delta| / 15.
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        (left + right + delta / 15.0, delta.abs() / 15.0)
    } else {
        let (lv, le) = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
        let (rv, re) = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        (lv + rv, le + re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact for cubics; the adaptive wrapper must preserve that.
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, &[]).unwrap();
        // ∫₀² (x³ − 2x + 1) dx = 4 − 4 + 2 = 2.
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_reciprocal_accurately() {
        // ∫₁² dx/x = ln 2.
        let v = integrate(|x| 1.0 / x, 1.0, 2.0, 1e-12, &[]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn splits_handle_kinks() {
        // |x − 1| has a kink at 1; with the split supplied each half is a
        // polynomial and the result is exact.
        let v = integrate(|x| (x - 1.0).abs(), 0.0, 2.0, 1e-13, &[1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unsorted_and_outside_splits_are_tolerated() {
        let v = integrate(|x| x, 0.0, 1.0, 1e-12, &[5.0, 0.75, -1.0, 0.25, 0.75]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        let v = integrate(|x| 1.0 / x, 1.0, 1.0, 1e-12, &[]).unwrap();
        assert_eq!(v, 0.0);
    }
}
