//! Closed forms for exponential service.
//!
//! Every quantity is parameterized by the roots `a >= b` of
//! `s^2 + (λ+μ)s + λ_i μ = 0`. The textbook expressions divide by the gap
//! `D = a - b`, which vanishes when `λ_i = λ = μ`. Writing `a, b = r ± D/2`
//! turns them into products of `e^{rx}` with even entire functions of
//! `z = Dx/2`:
//!
//! ```text
//! shc(z) = sinh z / z
//! φ1(z)  = (z cosh z - sinh z) / z^3                  -> 1/3
//! φ2(z)  = ((z^2 + 3) sinh z - 3 z cosh z) / z^5      -> 1/15
//! ```
//!
//! These are evaluated by power series for small `z`, so the repeated-root
//! case is just `D = 0` and needs no separate branch.
//!
//! All functions take the total rate `λ` and the source rate `λ_i` as
//! independent inputs; keeping `Σ λ_j = λ` is the caller's job. Derivatives
//! are partials in `λ_i` with `λ` held fixed.

use crate::error::{domain, Result};
use crate::scalar::{sinhc, Real};

/// Roots of `s^2 + (λ+μ)s + λ_i μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair<T> {
    /// Larger root, in `[b, 0)`.
    pub a: T,
    /// Smaller root.
    pub b: T,
    /// `a - b`; exactly zero below the repeated-root threshold.
    pub gap: T,
    mid: T,
}

impl<T: Real> RootPair<T> {
    /// `(a + b) / 2 = -(λ+μ)/2`.
    pub fn midpoint(&self) -> T {
        self.mid
    }

    /// Whether the gap was snapped to zero.
    pub fn is_repeated(&self) -> bool {
        self.gap == T::zero()
    }
}

/// Mean and variance of AoI and PAoI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean_aoi: T,
    pub var_aoi: T,
    pub mean_paoi: T,
    pub var_paoi: T,
}

fn check<T: Real>(total: T, mu: T, rate: T) -> Result<()> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(domain(format!("service rate must be positive, got {}", mu.as_f64())));
    }
    if !(rate > T::zero()) {
        return Err(domain(format!("source rate must be positive, got {}", rate.as_f64())));
    }
    if !(rate <= total) || !total.is_finite() {
        return Err(domain(format!(
            "source rate {} exceeds total rate {}",
            rate.as_f64(),
            total.as_f64()
        )));
    }
    Ok(())
}

/// Roots for total rate `λ`, service rate `μ` and source rate `λ_i`.
pub fn roots<T: Real>(total: T, mu: T, rate: T) -> Result<RootPair<T>> {
    check(total, mu, rate)?;
    let sum = total + mu;
    // (λ+μ)^2 - 4λ_iμ rewritten as a sum of nonnegative terms
    let disc = (total - mu) * (total - mu) + T::of(4.0) * (total - rate) * mu;
    let mut d = disc.sqrt();
    if d < T::of(1e-9) * sum {
        d = T::zero();
    }
    let b = -(sum + d) * T::half();
    let a = rate * mu / b;
    Ok(RootPair {
        a: if d == T::zero() { b } else { a },
        b,
        gap: d,
        mid: -sum * T::half(),
    })
}

/// `(e^{rx} cosh z, e^{rx} shc z)` without overflow for large `z`.
fn scaled_ch_shc<T: Real>(mid: T, z: T, x: T) -> (T, T) {
    let rx = mid * x;
    if z < T::one() {
        let e = rx.exp();
        (e * z.cosh(), e * sinhc(z))
    } else {
        let (ea, eb) = ((rx + z).exp(), (rx - z).exp());
        ((ea + eb) * T::half(), (ea - eb) * T::half() / z)
    }
}

/// `e^{rx} φ1(z)`.
fn scaled_phi1<T: Real>(mid: T, z: T, x: T) -> T {
    if z < T::two() {
        // Σ_{n>=1} 2n z^{2n-2} / (2n+1)!
        let z2 = z * z;
        let mut pow_over_fact = T::one() / T::of(6.0);
        let mut acc = T::zero();
        for n in 1..40 {
            let nf = T::of(n as f64);
            let term = T::two() * nf * pow_over_fact;
            acc += term;
            if term < T::epsilon() * acc {
                break;
            }
            pow_over_fact = pow_over_fact * z2 / ((T::two() * nf + T::two()) * (T::two() * nf + T::of(3.0)));
        }
        (mid * x).exp() * acc
    } else {
        let (ch, shc) = scaled_ch_shc(mid, z, x);
        (z * ch - z * shc) / (z * z * z)
    }
}

/// `e^{rx} φ2(z)`.
fn scaled_phi2<T: Real>(mid: T, z: T, x: T) -> T {
    if z < T::two() {
        // Σ_{n>=2} 4n(n-1) z^{2n-4} / (2n+1)!
        let z2 = z * z;
        let mut pow_over_fact = T::one() / T::of(120.0);
        let mut acc = T::zero();
        for n in 2..40 {
            let nf = T::of(n as f64);
            let term = T::of(4.0) * nf * (nf - T::one()) * pow_over_fact;
            acc += term;
            if term < T::epsilon() * acc {
                break;
            }
            pow_over_fact = pow_over_fact * z2 / ((T::two() * nf + T::two()) * (T::two() * nf + T::of(3.0)));
        }
        (mid * x).exp() * acc
    } else {
        let (ch, shc) = scaled_ch_shc(mid, z, x);
        let sh = z * shc;
        ((z * z + T::of(3.0)) * sh - T::of(3.0) * z * ch) / z.powi(5)
    }
}

/// Inter-departure density, which is also the stationary AoI density.
pub fn interdeparture_pdf_closed<T: Real>(roots: &RootPair<T>, rate: T, mu: T, x: T) -> T {
    if x < T::zero() {
        return T::zero();
    }
    let z = roots.gap * x * T::half();
    let (_, shc) = scaled_ch_shc(roots.mid, z, x);
    rate * mu * x * shc
}

/// `P(Δ > w)`.
pub fn aoi_violation_closed<T: Real>(roots: &RootPair<T>, w: T) -> T {
    if w <= T::zero() {
        return T::one();
    }
    let z = roots.gap * w * T::half();
    let (ch, shc) = scaled_ch_shc(roots.mid, z, w);
    (ch - roots.mid * w * shc).min(T::one()).max(T::zero())
}

/// `P(Δ^P > p)`.
pub fn paoi_violation_closed<T: Real>(roots: &RootPair<T>, total: T, mu: T, p: T) -> T {
    if p <= T::zero() {
        return T::one();
    }
    let sum = total + mu;
    let z = roots.gap * p * T::half();
    let (_, shc) = scaled_ch_shc(roots.mid, z, p);
    ((-sum * p).exp() + sum * p * shc).min(T::one()).max(T::zero())
}

/// Density of the peak age.
pub fn paoi_pdf_closed<T: Real>(roots: &RootPair<T>, total: T, mu: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let sum = total + mu;
    let z = roots.gap * x * T::half();
    let (ch, shc) = scaled_ch_shc(roots.mid, z, x);
    (sum * ((-sum * x).exp() - ch - roots.mid * x * shc)).max(T::zero())
}

/// Means and variances of AoI and PAoI.
pub fn moments<T: Real>(total: T, mu: T, rate: T) -> Result<Moments<T>> {
    check(total, mu, rate)?;
    let sum = total + mu;
    let lm = rate * mu;
    let mean_aoi = sum / lm;
    let var_aoi = mean_aoi * mean_aoi - T::two() / lm;
    let mean_paoi = sum.recip() + mean_aoi;
    let var_paoi = (sum * sum).recip() + var_aoi;
    Ok(Moments {
        mean_aoi,
        var_aoi,
        mean_paoi,
        var_paoi,
    })
}

/// `P(Δ > w)` from raw parameters.
pub fn aoi_violation<T: Real>(total: T, mu: T, rate: T, w: T) -> Result<T> {
    check_threshold(w)?;
    Ok(aoi_violation_closed(&roots(total, mu, rate)?, w))
}

fn check_threshold<T: Real>(x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("threshold must be nonnegative and finite, got {}", x.as_f64())))
    }
}

/// `P(Δ^P > p)` from raw parameters.
pub fn paoi_violation<T: Real>(total: T, mu: T, rate: T, p: T) -> Result<T> {
    check_threshold(p)?;
    Ok(paoi_violation_closed(&roots(total, mu, rate)?, total, mu, p))
}

/// `∂P^A/∂λ_i` at fixed `λ`.
pub fn aoi_violation_grad<T: Real>(total: T, mu: T, rate: T, w: T) -> Result<T> {
    let rp = roots(total, mu, rate)?;
    if w <= T::zero() {
        return Ok(T::zero());
    }
    let z = rp.gap * w * T::half();
    let (_, shc) = scaled_ch_shc(rp.mid, z, w);
    let phi1 = scaled_phi1(rp.mid, z, w);
    let w2 = w * w;
    Ok(mu * T::half() * (rp.mid * w2 * w * phi1 - w2 * shc))
}

/// `∂²P^A/∂λ_i²` at fixed `λ`.
pub fn aoi_violation_hess<T: Real>(total: T, mu: T, rate: T, w: T) -> Result<T> {
    let rp = roots(total, mu, rate)?;
    if w <= T::zero() {
        return Ok(T::zero());
    }
    let z = rp.gap * w * T::half();
    let phi1 = scaled_phi1(rp.mid, z, w);
    let phi2 = scaled_phi2(rp.mid, z, w);
    let w4 = w.powi(4);
    Ok(mu * mu / T::of(4.0) * (w4 * phi1 - rp.mid * w4 * w * phi2))
}

/// `∂P^P/∂λ_i` at fixed `λ`.
pub fn paoi_violation_grad<T: Real>(total: T, mu: T, rate: T, p: T) -> Result<T> {
    let rp = roots(total, mu, rate)?;
    if p <= T::zero() {
        return Ok(T::zero());
    }
    let z = rp.gap * p * T::half();
    Ok(-(total + mu) * mu * p.powi(3) * scaled_phi1(rp.mid, z, p) * T::half())
}

/// `∂²P^P/∂λ_i²` at fixed `λ`.
pub fn paoi_violation_hess<T: Real>(total: T, mu: T, rate: T, p: T) -> Result<T> {
    let rp = roots(total, mu, rate)?;
    if p <= T::zero() {
        return Ok(T::zero());
    }
    let z = rp.gap * p * T::half();
    Ok((total + mu) * mu * mu * p.powi(5) * scaled_phi2(rp.mid, z, p) / T::of(4.0))
}
