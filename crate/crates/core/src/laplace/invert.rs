//! Numerical inversion of unilateral Laplace transforms.
//!
//! Fourier-series (Bromwich) inversion with Euler summation of the
//! alternating tail:
//!
//! ```text
//! s_n(t) = e^{A/2}/(2t) Re F(A/2t) + e^{A/2}/t Σ_{k=1..n} (-1)^k Re F((A + 2kπi)/2t)
//! f(t)  ≈ Σ_{k=0..m} C(m,k) 2^{-m} s_{n+k}(t)
//! ```
//!
//! `A` controls the discretization (aliasing) error, roughly `e^{-A}` times
//! the size of `f`. It is chosen per call as `ln(1/tol) + precision_lift`.
//! The truncation error is estimated by comparing the Euler sums at `n` and
//! `n + 1`; when that residual exceeds the tolerance the term count is
//! doubled until `max_terms`.

use num_complex::Complex;

use crate::error::{domain, numeric, Result};
use crate::scalar::Real;

/// A transform `F(s)` analytic for `Re(s) > abscissa_hint`.
pub struct TransformFn<T, F> {
    evaluator: F,
    abscissa_hint: T,
}

impl<T: Real, F: Fn(Complex<T>) -> Complex<T>> TransformFn<T, F> {
    /// Wraps an evaluator after probing it at a few points right of the
    /// abscissa; rejects evaluators that return non-finite values there.
    pub fn new(evaluator: F, abscissa_hint: T) -> Result<Self> {
        if !abscissa_hint.is_finite() {
            return Err(domain("abscissa hint must be finite"));
        }
        let base = abscissa_hint.max(T::zero());
        let probes = [(1.0, 0.0), (1.0, 1.0), (0.1, 10.0), (10.0, 100.0), (0.5, -3.0)];
        for (re, im) in probes {
            let s = Complex::new(base + T::of(re), T::of(im));
            let v = evaluator(s);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(domain(format!(
                    "transform is not finite at s = {}{:+}i",
                    s.re.as_f64(),
                    s.im.as_f64()
                )));
            }
        }
        Ok(Self {
            evaluator,
            abscissa_hint,
        })
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        (self.evaluator)(s)
    }

    pub fn abscissa_hint(&self) -> T {
        self.abscissa_hint
    }
}

/// Parameters of the Euler-summation inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerInversion<T> {
    /// Extra nats of discretization accuracy beyond `ln(1/tol)`.
    pub precision_lift: T,
    /// Number of plain terms `n` before Euler averaging starts.
    pub terms: usize,
    /// Binomial averaging order `m`.
    pub euler_terms: usize,
    /// Upper limit for `n` when the residual check forces a retry.
    pub max_terms: usize,
}

impl<T: Real> Default for EulerInversion<T> {
    fn default() -> Self {
        Self {
            precision_lift: T::LN_10(),
            terms: 24,
            euler_terms: 12,
            max_terms: 6144,
        }
    }
}

impl<T: Real> EulerInversion<T> {
    /// Approximates `f(x)` where `F = L[f]`.
    pub fn invert<F>(&self, transform: &TransformFn<T, F>, x: T, tol: T) -> Result<T>
    where
        F: Fn(Complex<T>) -> Complex<T>,
    {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(domain(format!("inversion point must be positive, got {}", x.as_f64())));
        }
        if !(tol > T::of(1e-12) && tol < T::of(1e-3)) {
            return Err(domain(format!("inversion tolerance {} outside (1e-12, 1e-3)", tol.as_f64())));
        }

        // Shift so that the transform is analytic on Re(s) > 0.
        let sigma = transform.abscissa_hint().max(T::zero());
        let a = -tol.ln() + self.precision_lift;
        let m = self.euler_terms;
        let weights = binomial_weights::<T>(m);
        let scale = (a * T::half()).exp() / x;
        let two_x = T::two() * x;

        let mut n = self.terms.max(1);
        let mut cached: Vec<T> = Vec::new();
        loop {
            let needed = n + m + 2;
            while cached.len() < needed {
                let k = cached.len();
                let s = Complex::new(a / two_x + sigma, T::of(k as f64) * T::PI() / x);
                let re = transform.eval(s).re;
                let signed = if k.is_multiple_of(2) { re } else { -re };
                cached.push(if k == 0 { signed * T::half() } else { signed });
            }
            if cached.iter().any(|v| !v.is_finite()) {
                return Err(numeric("invert", "transform returned a non-finite value", f64::INFINITY));
            }

            // partial sums s_j for j = n .. n+m+1
            let mut partial = Vec::with_capacity(m + 2);
            let mut acc: T = cached[..n].iter().copied().sum();
            for &c in &cached[n..n + m + 2] {
                acc += c;
                partial.push(acc);
            }
            let euler = |offset: usize| -> T {
                weights
                    .iter()
                    .zip(&partial[offset..offset + m + 1])
                    .map(|(&w, &s)| w * s)
                    .sum::<T>()
                    * scale
            };
            let e0 = euler(0);
            let e1 = euler(1);
            let magnitude = cached.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            let roundoff = T::epsilon() * scale * magnitude * T::of(needed as f64).sqrt();
            let residual = (e1 - e0).abs() + roundoff;
            let value = e1 * (sigma * x).exp();
            if residual <= tol {
                return Ok(value);
            }
            if n * 2 > self.max_terms {
                return Err(numeric(
                    "invert",
                    format!("no convergence with {} terms at x = {}", n + m + 2, x.as_f64()),
                    residual.as_f64(),
                ));
            }
            n *= 2;
        }
    }

    /// Inverts a probability density: values in `[-tol, 0)` are clamped to
    /// zero, anything more negative is reported as a numeric error.
    pub fn invert_density<F>(&self, transform: &TransformFn<T, F>, x: T, tol: T) -> Result<T>
    where
        F: Fn(Complex<T>) -> Complex<T>,
    {
        let v = self.invert(transform, x, tol)?;
        clamp_density(v, tol)
    }
}

pub(crate) fn clamp_density<T: Real>(v: T, tol: T) -> Result<T> {
    if v >= T::zero() {
        Ok(v)
    } else if v >= -tol {
        Ok(T::zero())
    } else {
        Err(numeric(
            "invert_density",
            "inverted density is negative beyond tolerance",
            v.abs().as_f64(),
        ))
    }
}

fn binomial_weights<T: Real>(m: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(m + 1);
    let mut c = T::one();
    let half_m = T::half().powi(m as i32);
    for k in 0..=m {
        w.push(c * half_m);
        c = c * T::of((m - k) as f64) / T::of((k + 1) as f64);
    }
    w
}

/// Inverts with default parameters.
pub fn invert<T, F>(transform: &TransformFn<T, F>, x: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    EulerInversion::default().invert(transform, x, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type C = Complex<f64>;

    #[test]
    fn exponential_pair() {
        let f = TransformFn::new(|s: C| 1.0 / (s + 1.0), 0.0).unwrap();
        let v = invert(&f, 1.0, 1e-9).unwrap();
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn unit_step() {
        let f = TransformFn::new(|s: C| 1.0 / s, 0.0).unwrap();
        assert_abs_diff_eq!(invert(&f, 3.0, 1e-8).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn growing_function_with_positive_abscissa() {
        // L[e^{0.5 t}] = 1/(s - 0.5)
        let f = TransformFn::new(|s: C| 1.0 / (s - 0.5), 0.5).unwrap();
        assert_abs_diff_eq!(invert(&f, 2.0, 1e-9).unwrap(), 1.0f64.exp(), epsilon = 1e-7);
    }

    #[test]
    fn rejects_nonpositive_point_and_bad_tolerance() {
        let f = TransformFn::new(|s: C| 1.0 / (s + 1.0), 0.0).unwrap();
        assert!(matches!(invert(&f, 0.0, 1e-8), Err(crate::Error::Domain(_))));
        assert!(matches!(invert(&f, 1.0, 1e-2), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn probing_rejects_singular_evaluator() {
        let r = TransformFn::new(|_s: C| C::new(f64::NAN, 0.0), 0.0);
        assert!(r.is_err());
    }

    #[test]
    fn binomial_weights_sum_to_one() {
        let w = binomial_weights::<f64>(11);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 1.0 / 2048.0, epsilon = 0.0);
    }

    #[test]
    fn density_clamping() {
        assert_eq!(clamp_density(-1e-9, 1e-8).unwrap(), 0.0);
        assert!(clamp_density(-1e-6, 1e-8).is_err());
        assert_eq!(clamp_density(0.25, 1e-8).unwrap(), 0.25);
    }

    #[test]
    fn exponential_mixture_round_trip() {
        // 0.3 e^{-t} + 0.7 * 2 e^{-2t}
        let f = TransformFn::new(|s: C| 0.3 / (s + 1.0) + 1.4 / (s + 2.0), 0.0).unwrap();
        let mut worst: f64 = 0.0;
        for k in 1..=200 {
            let x = 0.1 * k as f64;
            let exact = 0.3 * (-x).exp() + 1.4 * (-2.0 * x).exp();
            worst = worst.max((invert(&f, x, 1e-9).unwrap() - exact).abs());
        }
        assert!(worst < 1e-6, "worst error {worst:e}");
    }
}
