//! Principal-branch Lambert-W and a bracketing root finder for strictly
//! decreasing scalar functions.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Slack allowed below `-1/e` before an argument is rejected.
pub const BRANCH_POINT_SLACK: f64 = 1e-14;

/// Residual target used by [`find_root_decreasing`] callers in this crate.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

const MAX_HALLEY_ITERATIONS: usize = 50;
const MAX_DOUBLINGS: u32 = 200;

/// Principal branch `W0` of the Lambert-W function on `[-1/e, inf)`.
///
/// Halley's iteration on `w e^w - x = 0`, seeded from the branch-point
/// series near `-1/e`, a `log1p` form for moderate arguments and the
/// asymptotic `ln x - ln ln x` expansion for large ones.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::LambertDomain(x));
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let branch = -1.0 / E;
    if x < branch - BRANCH_POINT_SLACK {
        return Err(Error::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // distance to the branch point, scaled so q = 0 at x = -1/e
    let q = E * x + 1.0;
    if q <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x, q);
    for _ in 0..MAX_HALLEY_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            // overshot the branch point; restart from just above it
            w = -1.0 + q.sqrt().min(0.5) * f64::EPSILON.sqrt();
            continue;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }

    let residual = (w * w.exp() - x).abs();
    if !residual.is_finite() || residual > 1e-12 * x.abs().max(1.0) {
        return Err(Error::LambertConvergence { x, residual });
    }
    Ok(w)
}

fn initial_guess(x: f64, q: f64) -> f64 {
    if x < -0.3 {
        let p = (2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// A sign-changing interval `[lo, hi]` for a decreasing function:
/// `f_lo >= 0 >= f_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brackets the root of a strictly decreasing `f` on `[0, inf)` by doubling
/// the right end of `[0, 1]`.
///
/// `Ok(None)` when `f(0) <= 0`, i.e. there is no positive root.
pub fn bracket_decreasing<F: FnMut(f64) -> f64>(f: &mut F) -> Result<Option<RootBracket>> {
    let f0 = finite(f, 0.0)?;
    if f0 <= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut f_lo) = (0.0, f0);
    let mut hi = 1.0;
    for _ in 0..MAX_DOUBLINGS {
        let f_hi = finite(f, hi)?;
        if f_hi <= 0.0 {
            return Ok(Some(RootBracket { lo, hi, f_lo, f_hi }));
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
    }
    Err(Error::NoSignChange {
        doublings: MAX_DOUBLINGS,
    })
}

/// Root of a strictly decreasing function on `[0, inf)`.
///
/// Returns `Ok(None)` if `f(0) <= 0`. Otherwise the bracket from
/// [`bracket_decreasing`] is bisected until `|f(beta)| <= tol`; the returned
/// point is always strictly positive. If the bracket collapses to adjacent
/// floats first, the endpoint with the smaller residual is returned.
pub fn find_root_decreasing<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> Result<Option<f64>> {
    let Some(mut b) = bracket_decreasing(&mut f)? else {
        return Ok(None);
    };
    if b.f_hi == 0.0 {
        return Ok(Some(b.hi));
    }
    loop {
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo || mid >= b.hi {
            let best = if b.lo > 0.0 && b.f_lo.abs() < b.f_hi.abs() {
                b.lo
            } else {
                b.hi
            };
            return Ok(Some(best));
        }
        let fm = finite(&mut f, mid)?;
        if fm.abs() <= tol {
            return Ok(Some(mid));
        }
        if fm > 0.0 {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
            b.f_hi = fm;
        }
    }
}

/// [`find_root_decreasing`] with Newton steps inside the bracket.
///
/// `f` returns the value and derivative. A Newton step that would leave the
/// current bracket falls back to bisection, so the iterate count is never
/// worse than plain bisection by more than a factor of two.
pub fn find_root_decreasing_newton<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    tol: f64,
) -> Result<Option<f64>> {
    let Some(mut b) = bracket_decreasing(&mut |x| f(x).0)? else {
        return Ok(None);
    };
    if b.f_hi == 0.0 {
        return Ok(Some(b.hi));
    }
    let mut x = 0.5 * (b.lo + b.hi);
    loop {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        if fx.abs() <= tol {
            return Ok(Some(x));
        }
        if fx > 0.0 {
            b.lo = x;
            b.f_lo = fx;
        } else {
            b.hi = x;
            b.f_hi = fx;
        }
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo || mid >= b.hi {
            return Ok(Some(x));
        }
        let newton = x - fx / dfx;
        x = if dfx < 0.0 && newton > b.lo && newton < b.hi {
            newton
        } else {
            mid
        };
    }
}

fn finite<F: FnMut(f64) -> f64>(f: &mut F, at: f64) -> Result<f64> {
    let v = f(at);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Plain Newton on w e^w = x from a crude start, kept separate from the
    // Halley path above.
    fn newton_oracle(x: f64) -> f64 {
        let mut w = if x > 1.0 { x.ln() } else { 0.0 };
        for _ in 0..200 {
            let ew = w.exp();
            w -= (w * ew - x) / (ew * (w + 1.0));
        }
        w
    }

    #[test]
    fn fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() <= 1e-14);
        // omega constant, frozen from newton_oracle(1.0)
        let omega = 0.567_143_290_409_783_8;
        assert!((newton_oracle(1.0) - omega).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - omega).abs() < 1e-15);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_newton_on_moderate_arguments() {
        for &x in &[-0.2, 0.1, 0.5, 2.0, 10.0, 1e3, 1e6] {
            let w = lambert_w0(x).unwrap();
            assert!((w - newton_oracle(x)).abs() <= 1e-13 * w.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(matches!(lambert_w0(-0.5), Err(Error::LambertDomain(_))));
        assert!(lambert_w0(f64::NAN).is_err());
        // within the slack is clamped to the branch value
        assert_eq!(lambert_w0(-1.0 / E - 5e-15).unwrap(), -1.0);
    }

    #[test]
    fn near_branch_point() {
        for k in 1..15 {
            let x = -1.0 / E + 10f64.powi(-k);
            let w = lambert_w0(x).unwrap();
            assert!(w > -1.0 && w < 0.0);
            assert!((w * w.exp() - x).abs() <= 1e-15);
        }
    }

    #[test]
    fn tiny_arguments_keep_relative_precision() {
        for &x in &[1e-300, -1e-20, 3e-9, -7e-6] {
            let w = lambert_w0(x).unwrap();
            // W(x) = x - x^2 + 3/2 x^3 - ...
            let series = x - x * x + 1.5 * x * x * x;
            assert!(((w - series) / series).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn root_of_linear() {
        let r = find_root_decreasing(|b| 1.0 - b, 1e-10).unwrap().unwrap();
        assert!((r - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn no_root_when_negative_at_origin() {
        assert_eq!(find_root_decreasing(|b| -1.0 - b, 1e-10).unwrap(), None);
        assert_eq!(find_root_decreasing(|b| -b, 1e-10).unwrap(), None);
    }

    #[test]
    fn root_of_exponential() {
        let r = find_root_decreasing(|b| (-b).exp() - 0.5, 1e-10)
            .unwrap()
            .unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn far_root_needs_many_doublings() {
        let r = find_root_decreasing(|b| 1e40 - b, 1e-10).unwrap().unwrap();
        assert!((r - 1e40).abs() / 1e40 < 1e-15);
    }

    #[test]
    fn bracket_failure_is_reported() {
        // decreasing but bounded below by a positive constant
        let err = find_root_decreasing(|b| 1.0 + (-b).exp(), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { doublings: 200 }));
        assert!(find_root_decreasing(|_| f64::NAN, 1e-10).is_err());
    }

    #[test]
    fn newton_variant_matches_bisection() {
        let f = |b: f64| ((-b).exp() - 0.5, -(-b).exp());
        let n = find_root_decreasing_newton(f, 1e-12).unwrap().unwrap();
        let b = find_root_decreasing(|b| f(b).0, 1e-12).unwrap().unwrap();
        assert!((n - b).abs() < 1e-11);
        assert_eq!(find_root_decreasing_newton(|b| (-b, -1.0), 1e-10).unwrap(), None);
        // a misleading derivative only slows it down
        let r = find_root_decreasing_newton(|b| (3.0 - b, 1.0), 1e-10).unwrap().unwrap();
        assert!((r - 3.0).abs() <= 1e-10);
    }

    #[test]
    fn bracket_invariants() {
        let b = bracket_decreasing(&mut |x: f64| 5.0 - x).unwrap().unwrap();
        assert!(b.lo < b.hi);
        assert!(b.f_lo >= 0.0 && b.f_hi <= 0.0);
        assert_eq!((b.lo, b.hi), (4.0, 8.0));
    }

    proptest! {
        #[test]
        fn residual_bound(u in 0.0f64..1.0, scale in 0i32..7) {
            let x = -1.0 / E + u * 10f64.powi(scale);
            let w = lambert_w0(x).unwrap();
            prop_assert!(w >= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn monotone(a in -0.36787944f64..1e6, b in -0.36787944f64..1e6) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(lambert_w0(lo).unwrap() <= lambert_w0(hi).unwrap());
        }

        #[test]
        fn decreasing_roots_meet_tolerance(
            root in 0.0f64..1e4,
            slope in 1e-3f64..1e3,
            curve in 0.0f64..2.0,
        ) {
            prop_assume!(root > 1e-6);
            // strictly decreasing, mildly nonlinear
            let f = |b: f64| slope * (root - b) - curve * (b.atan() - root.atan());
            let r = find_root_decreasing(f, 1e-10).unwrap().unwrap();
            prop_assert!(r > 0.0);
            prop_assert!(f(r).abs() <= 1e-10 || (r - root).abs() <= 4.0 * f64::EPSILON * root);
        }
    }
}
