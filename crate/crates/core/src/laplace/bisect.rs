use crate::error::{domain, Result};
use crate::scalar::Real;

/// Root of a monotone function together with the iteration count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed<T> {
    pub root: T,
    pub iterations: usize,
}

/// Finds `r` in `[lo, hi]` with `|g(r)| <= tol` or a bracket no wider than `tol`.
///
/// `g` must be monotone on the interval with `g(lo) * g(hi) <= 0`.
pub fn bisect_monotone<T: Real, G: Fn(T) -> T>(g: G, lo: T, hi: T, tol: T) -> Result<T> {
    bisect_monotone_traced(g, lo, hi, tol).map(|b| b.root)
}

/// [`bisect_monotone`], also reporting how many midpoints were evaluated.
pub fn bisect_monotone_traced<T: Real, G: Fn(T) -> T>(
    g: G,
    lo: T,
    hi: T,
    tol: T,
) -> Result<Bracketed<T>> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(format!("invalid bracket [{}, {}]", lo.as_f64(), hi.as_f64())));
    }
    if !(tol > T::zero()) {
        return Err(domain("bisection tolerance must be positive"));
    }
    let (glo, ghi) = (g(lo), g(hi));
    if glo.is_nan() || ghi.is_nan() {
        return Err(domain("function is NaN at a bracket end"));
    }
    if glo == T::zero() {
        return Ok(Bracketed { root: lo, iterations: 0 });
    }
    if ghi == T::zero() {
        return Ok(Bracketed { root: hi, iterations: 0 });
    }
    if glo.signum() == ghi.signum() {
        return Err(domain(format!(
            "bracket [{}, {}] does not enclose a sign change (g = {}, {})",
            lo.as_f64(),
            hi.as_f64(),
            glo.as_f64(),
            ghi.as_f64()
        )));
    }

    let increasing = glo < T::zero();
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    loop {
        let mid = lo + (hi - lo) * T::half();
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(Bracketed { root: mid, iterations });
        }
        iterations += 1;
        let gm = g(mid);
        if gm.abs() <= tol {
            return Ok(Bracketed { root: mid, iterations });
        }
        if (gm < T::zero()) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_root() {
        let r = bisect_monotone(|x: f64| x - 2.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_at_left_end() {
        assert_eq!(bisect_monotone(|x: f64| (-x).exp() - 1.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        assert!(matches!(
            bisect_monotone(|x: f64| x + 1.0, 0.0, 1.0, 1e-9),
            Err(crate::Error::Domain(_))
        ));
    }

    proptest! {
        #[test]
        fn iteration_bound(root in -10.0f64..10.0, slope in 0.01f64..100.0, tol_exp in 3i32..14) {
            let tol = 10f64.powi(-tol_exp);
            let (lo, hi) = (-20.0, 20.0);
            let b = bisect_monotone_traced(|x| slope * (x - root), lo, hi, tol).unwrap();
            let bound = ((hi - lo) / tol).log2().ceil() as usize + 2;
            prop_assert!(b.iterations <= bound);
            prop_assert!((slope * (b.root - root)).abs() <= tol || (b.root - root).abs() <= tol);
        }
    }
}
