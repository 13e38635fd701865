//! Adaptive Simpson quadrature.
//!
//! Finite ranges are integrated directly; `b = +inf` is mapped onto `[0, 1)`
//! with `x = a + t / (1 - t)`, which turns any integrand with at least
//! exponential decay into a bounded integrand vanishing at `t = 1`.
//! Point masses are never sampled: callers declare them and their
//! contribution is added in closed form by [`integrate_measure`].

use crate::error::{numeric, Result};
use crate::scalar::Real;

/// Maximum bisection depth below the initial panels.
const MAX_DEPTH: usize = 48;
/// Initial uniform panels; guards against missing narrow features.
const INITIAL_PANELS: usize = 8;
/// Function-evaluation budget for one call.
const MAX_EVALS: usize = 4_000_000;

/// A point mass `weight` located at `at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub at: T,
    pub weight: T,
}

struct Panel<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

/// `noise` is the absolute accuracy of `f` itself; a panel whose Simpson
/// correction is explained by that noise is not subdivided further.
fn adaptive<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, noise: T, evals: &mut usize) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let n = T::of(INITIAL_PANELS as f64);
    let h = (b - a) / n;
    let mut stack = Vec::with_capacity(64);
    let mut x0 = a;
    let mut f0 = f(a);
    *evals += 1;
    for k in 0..INITIAL_PANELS {
        let x1 = if k + 1 == INITIAL_PANELS { b } else { a + h * T::of((k + 1) as f64) };
        let xm = (x0 + x1) * T::half();
        let (fm, f1) = (f(xm), f(x1));
        *evals += 2;
        stack.push(Panel {
            a: x0,
            b: x1,
            fa: f0,
            fm,
            fb: f1,
            whole: simpson(x0, x1, f0, fm, f1),
            tol: tol / n,
            depth: 0,
        });
        x0 = x1;
        f0 = f1;
    }

    let mut total = T::zero();
    let mut unresolved = T::zero();
    while let Some(p) = stack.pop() {
        let m = (p.a + p.b) * T::half();
        let lm = (p.a + m) * T::half();
        let rm = (m + p.b) * T::half();
        let (flm, frm) = (f(lm), f(rm));
        *evals += 2;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(numeric(
                "integrate",
                format!("non-finite integrand near x = {}", m.as_f64()),
                f64::INFINITY,
            ));
        }
        let floor = noise * (p.b - p.a);
        if delta.abs() <= T::of(15.0) * p.tol + floor || p.depth >= MAX_DEPTH || m <= p.a || m >= p.b {
            if delta.abs() > T::of(15.0) * p.tol + floor {
                unresolved += delta.abs() / T::of(15.0);
            }
            total += left + right + delta / T::of(15.0);
            continue;
        }
        if *evals > MAX_EVALS {
            return Err(numeric(
                "integrate",
                "evaluation budget exhausted",
                (delta.abs() / T::of(15.0) + unresolved).as_f64(),
            ));
        }
        let tol = p.tol * T::half();
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol,
            depth: p.depth + 1,
        });
    }
    if unresolved > tol {
        return Err(numeric(
            "integrate",
            "maximum subdivision depth reached",
            unresolved.as_f64(),
        ));
    }
    Ok(total)
}

/// Integrates `f` over `[a, b]` to absolute accuracy `tol`; `b` may be `+inf`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    integrate_piecewise(f, a, b, &[], tol)
}

/// Like [`integrate`], but splits the range at the given breakpoints
/// (discontinuities or kinks of the integrand). Breakpoints outside `(a, b)`
/// are ignored.
pub fn integrate_piecewise<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
) -> Result<T> {
    integrate_piecewise_noisy(f, a, b, breakpoints, tol, T::zero())
}

/// [`integrate_piecewise`] for an integrand that is itself only accurate to
/// `noise` (absolute) on the finite pieces, e.g. the output of a numerical
/// inversion. The result is then accurate to about `tol + noise * (b - a)`.
pub fn integrate_piecewise_noisy<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
    noise: T,
) -> Result<T> {
    if b < a {
        return integrate_piecewise_noisy(f, b, a, breakpoints, tol, noise).map(|v| -v);
    }
    if a == b {
        return Ok(T::zero());
    }
    let mut cuts: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();

    // Tolerance is shared in proportion to width, so that many short pieces
    // do not push the request below the noise floor of the integrand. An
    // infinite tail piece gets half of the budget.
    let tail = b.is_infinite();
    let finite_end = if tail { cuts.last().copied().unwrap_or(a) } else { b };
    let finite_tol = if tail { tol * T::half() } else { tol };
    let span = finite_end - a;
    let mut evals = 0usize;
    let mut total = T::zero();
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let piece_tol = if hi.is_infinite() {
            tol * T::half()
        } else if span > T::zero() {
            finite_tol * (hi - lo) / span
        } else {
            finite_tol
        };
        total += if hi.is_infinite() {
            let g = |t: T| {
                if t >= T::one() {
                    return T::zero();
                }
                let one_minus = T::one() - t;
                let v = f(lo + t / one_minus) / (one_minus * one_minus);
                if v.is_finite() {
                    v
                } else {
                    T::zero()
                }
            };
            adaptive(&g, T::zero(), T::one(), piece_tol, T::zero(), &mut evals)?
        } else {
            adaptive(&f, lo, hi, piece_tol, noise, &mut evals)?
        };
        lo = hi;
    }
    Ok(total)
}

/// `∫ f dν` over `[a, b]` for the measure `ν = density + Σ atoms`.
///
/// The density part goes through adaptive quadrature; each atom inside the
/// closed range contributes `weight * f(at)` exactly.
pub fn integrate_measure<T: Real, F, D>(
    f: F,
    density: D,
    atoms: &[Atom<T>],
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
) -> Result<T>
where
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    integrate_measure_noisy(f, density, atoms, a, b, breakpoints, tol, T::zero())
}

/// [`integrate_measure`] with the density part integrated by
/// [`integrate_piecewise_noisy`]; `noise` bounds the error of `f * density`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_measure_noisy<T: Real, F, D>(
    f: F,
    density: D,
    atoms: &[Atom<T>],
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
    noise: T,
) -> Result<T>
where
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let continuous = integrate_piecewise_noisy(|x| f(x) * density(x), a, b, breakpoints, tol, noise)?;
    let discrete: T = atoms
        .iter()
        .filter(|at| at.at >= a && at.at <= b)
        .map(|at| at.weight * f(at.at))
        .sum();
    Ok(continuous + discrete)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_tail_integrates_to_one() {
        let v = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn slow_decay_tail() {
        let v = integrate(|x: f64| 0.05 * (-0.05 * x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn empty_range_is_zero() {
        assert_eq!(integrate(|x: f64| x.sin() + 7.0, 0.0, 0.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn reversed_range_flips_sign() {
        let v = integrate(|x: f64| x * x, 1.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn breakpoint_handles_jump() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let v = integrate_piecewise(step, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.3 + 1.4, epsilon = 1e-12);
    }

    #[test]
    fn atoms_are_added_not_sampled() {
        let atoms = [Atom { at: 1.0, weight: 0.5 }, Atom { at: 3.0, weight: 0.25 }];
        // density 0.25 on [0, 1]; atom at 3 is outside [0, 2]
        let v = integrate_measure(
            |x: f64| (-x).exp(),
            |x| if (0.0..=1.0).contains(&x) { 0.25 } else { 0.0 },
            &atoms,
            0.0,
            2.0,
            &[1.0],
            1e-12,
        )
        .unwrap();
        let expected = 0.25 * (1.0 - (-1.0f64).exp()) + 0.5 * (-1.0f64).exp();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-11);
    }

    #[test]
    fn single_precision_works() {
        let v = integrate(|x: f32| (-x).exp(), 0.0, f32::INFINITY, 1e-5).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
    }

    #[test]
    fn linearity() {
        let f = |x: f64| (-0.3 * x).exp() * (1.0 + x.sin());
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let tol = 1e-10;
        let (alpha, beta) = (2.5, -0.75);
        let lhs = integrate(|x| alpha * f(x) + beta * g(x), 0.0, 10.0, tol).unwrap();
        let rhs = alpha * integrate(f, 0.0, 10.0, tol).unwrap() + beta * integrate(g, 0.0, 10.0, tol).unwrap();
        assert!((lhs - rhs).abs() < 10.0 * tol);
    }
}
