//! Age distributions for general service times.
//!
//! The inter-departure time `Y_i` of source `i` has transform
//!
//! ```text
//! L_Y(s) = λ_i L_S(λ+s) / (λ_i L_S(λ+s) + s)
//! ```
//!
//! and the stationary AoI has the same law as `Y_i`. The system time `T` of a
//! delivered update has density `e^{-λx} f_S(x) / L_S(λ)` and is independent
//! of the preceding inter-departure time, so PAoI is distributed as `Y + T`.
//!
//! Densities and distribution functions of `Y` come from numerical
//! inversion. `Y >= s0`, the left end of the service support, so the
//! transform is shifted by `e^{s s0}` before inverting; for deterministic
//! service that moves the first jump of the density onto the origin where it
//! does no harm. Violation probabilities invert `L_Y(s)/s` (a continuous
//! function even when the density jumps) instead of integrating the density.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::laplace::{
    bisect_monotone, clamp_density, integrate_measure_noisy, integrate_piecewise_noisy, EulerInversion, TransformFn,
};
use crate::mm11::Moments;
use crate::scalar::Real;
use crate::service::ServiceModel;

/// Arrival rates, service law and (optionally) per-source thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T> {
    rates: Vec<T>,
    service: ServiceModel<T>,
    total_rate: T,
    thresholds_aoi: Vec<T>,
    thresholds_paoi: Vec<T>,
}

impl<T: Real> SystemSpec<T> {
    pub fn new(rates: Vec<T>, service: ServiceModel<T>) -> Result<Self> {
        if rates.is_empty() {
            return Err(domain("at least one source is required"));
        }
        if let Some(bad) = rates.iter().find(|r| !(**r > T::zero() && r.is_finite())) {
            return Err(domain(format!("arrival rates must be positive and finite, got {}", bad.as_f64())));
        }
        let total_rate = rates.iter().copied().sum();
        Ok(Self {
            rates,
            service,
            total_rate,
            thresholds_aoi: Vec::new(),
            thresholds_paoi: Vec::new(),
        })
    }

    /// Attaches per-source AoI thresholds `w_i` and PAoI thresholds `p_i`.
    pub fn with_thresholds(mut self, aoi: Vec<T>, paoi: Vec<T>) -> Result<Self> {
        let n = self.rates.len();
        for (name, v) in [("AoI", &aoi), ("PAoI", &paoi)] {
            if v.len() != n {
                return Err(domain(format!("{name} thresholds: expected {n} values, got {}", v.len())));
            }
            if v.iter().any(|t| !(*t > T::zero() && t.is_finite())) {
                return Err(domain(format!("{name} thresholds must be positive and finite")));
            }
        }
        self.thresholds_aoi = aoi;
        self.thresholds_paoi = paoi;
        Ok(self)
    }

    pub fn n_sources(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn rate(&self, i: usize) -> T {
        self.rates[i]
    }

    pub fn total_rate(&self) -> T {
        self.total_rate
    }

    pub fn service(&self) -> &ServiceModel<T> {
        &self.service
    }

    pub fn thresholds_aoi(&self) -> &[T] {
        &self.thresholds_aoi
    }

    pub fn thresholds_paoi(&self) -> &[T] {
        &self.thresholds_paoi
    }

    fn check_source(&self, i: usize) -> Result<()> {
        if i < self.rates.len() {
            Ok(())
        } else {
            Err(domain(format!("source index {i} out of range (N = {})", self.rates.len())))
        }
    }
}

/// Which random variable an [`AgeDistribution`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgeKind {
    Aoi,
    Paoi,
    InterDeparture,
    SystemTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CacheTag {
    Pdf,
    Cdf,
}

/// Numerical evaluator for a [`SystemSpec`].
///
/// Inverted values are memoized per source and evaluation point. The cache
/// only stores deterministic function values, so results do not depend on
/// evaluation order or thread count.
pub struct Analyzer<T> {
    spec: SystemSpec<T>,
    inversion: EulerInversion<T>,
    cdf_tol: T,
    pdf_tol: T,
    quad_tol: T,
    cache: RwLock<HashMap<(usize, CacheTag, u64), T>>,
}

impl<T: Real> Analyzer<T> {
    pub fn new(spec: SystemSpec<T>) -> Self {
        let (cdf_tol, pdf_tol, quad_tol) = if T::epsilon() < T::of(1e-10) {
            (T::of(1e-9), T::of(1e-8), T::of(1e-9))
        } else {
            (T::of(1e-4), T::of(1e-4), T::of(1e-4))
        };
        Self {
            spec,
            inversion: EulerInversion::default(),
            cdf_tol,
            pdf_tol,
            quad_tol,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Overrides the inversion and quadrature tolerances.
    pub fn with_tolerances(mut self, cdf_tol: T, pdf_tol: T, quad_tol: T) -> Self {
        self.cdf_tol = cdf_tol;
        self.pdf_tol = pdf_tol;
        self.quad_tol = quad_tol;
        self.cache.get_mut().expect("cache lock").clear();
        self
    }

    pub fn with_inversion(mut self, inversion: EulerInversion<T>) -> Self {
        self.inversion = inversion;
        self.cache.get_mut().expect("cache lock").clear();
        self
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    fn service(&self) -> &ServiceModel<T> {
        &self.spec.service
    }

    fn lambda(&self) -> T {
        self.spec.total_rate
    }

    fn service_lt_at_lambda(&self) -> T {
        self.service()
            .laplace(self.lambda())
            .expect("total rate is positive")
    }

    fn lt_unchecked(&self, i: usize, s: Complex<T>) -> Complex<T> {
        let li = self.spec.rates[i];
        let ls = self.service().laplace_complex(s + self.lambda()) * li;
        ls / (ls + s)
    }

    /// `e^{s s0} L_Y(s)`, the transform of `Y - s0`.
    fn shifted_lt(&self, i: usize, s: Complex<T>) -> Complex<T> {
        let li = self.spec.rates[i];
        let s0 = self.shift();
        let z = s + self.lambda();
        let k = self.service().laplace_complex_shifted(z) * (-self.lambda() * s0).exp() * li;
        k / (k * (-s * s0).exp() + s)
    }

    /// `L_Y(s)` for source `i` (0-based).
    pub fn interdeparture_lt(&self, i: usize, s: Complex<T>) -> Result<Complex<T>> {
        self.spec.check_source(i)?;
        Ok(self.lt_unchecked(i, s))
    }

    /// Density of the system time of a delivered update.
    pub fn system_time_pdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        (-self.lambda() * x).exp() * self.service().density(x) / self.service_lt_at_lambda()
    }

    /// Distribution function of the system time, atoms included.
    pub fn system_time_cdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        (self.service().partial_transform(self.lambda(), x) / self.service_lt_at_lambda()).min(T::one())
    }

    /// `(E[T], Var T)`.
    pub fn system_time_moments(&self) -> Result<(T, T)> {
        let l = self.service_lt_at_lambda();
        let m1 = self.service().weighted_moment(1, self.lambda())? / l;
        let m2 = self.service().weighted_moment(2, self.lambda())? / l;
        Ok((m1, (m2 - m1 * m1).max(T::zero())))
    }

    fn shift(&self) -> T {
        self.service().support_start()
    }

    fn cached(&self, key: (usize, CacheTag, u64), compute: impl FnOnce() -> Result<T>) -> Result<T> {
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        self.cache.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// Inter-departure density; by construction also the AoI density.
    pub fn interdeparture_pdf(&self, i: usize, x: T) -> Result<T> {
        self.spec.check_source(i)?;
        let s0 = self.shift();
        if x < s0 {
            return Ok(T::zero());
        }
        self.cached((i, CacheTag::Pdf, x.as_f64().to_bits()), || {
            let t = x - s0;
            if t == T::zero() {
                // right limit: initial-value theorem on the shifted transform
                let s = T::of(1e8) / (T::one() + s0);
                let v = self.shifted_lt(i, Complex::new(s, T::zero())) * s;
                return Ok(v.re.max(T::zero()));
            }
            let f = TransformFn::new(move |s: Complex<T>| self.shifted_lt(i, s), T::zero())?;
            let v = self.inversion.invert(&f, t, self.pdf_tol)?;
            clamp_density(v, self.pdf_tol)
        })
    }

    pub fn aoi_pdf(&self, i: usize, x: T) -> Result<T> {
        self.interdeparture_pdf(i, x)
    }

    /// `P(Y_i <= x)`, obtained by inverting `L_Y(s)/s`.
    pub fn interdeparture_cdf(&self, i: usize, x: T) -> Result<T> {
        self.spec.check_source(i)?;
        let s0 = self.shift();
        if x <= s0 {
            return Ok(T::zero());
        }
        self.cached((i, CacheTag::Cdf, x.as_f64().to_bits()), || {
            let f = TransformFn::new(
                move |s: Complex<T>| self.shifted_lt(i, s) / s,
                T::zero(),
            )?;
            let v = self.inversion.invert(&f, x - s0, self.cdf_tol)?;
            Ok(v.max(T::zero()).min(T::one()))
        })
    }

    pub fn aoi_cdf(&self, i: usize, x: T) -> Result<T> {
        self.interdeparture_cdf(i, x)
    }

    /// `P(Δ_i > w)`.
    pub fn aoi_violation(&self, i: usize, w: T) -> Result<T> {
        self.spec.check_source(i)?;
        if !(w >= T::zero()) {
            return Err(domain("AoI threshold must be nonnegative"));
        }
        Ok(T::one() - self.interdeparture_cdf(i, w)?)
    }

    /// `P(Y + T <= p)` integrated over the system-time law:
    /// `(1/L_S(λ)) ∫ F_Y(p - t) e^{-λt} dF_S(t)`.
    fn paoi_cdf(&self, i: usize, p: T) -> Result<T> {
        let lambda = self.lambda();
        let s0 = self.shift();
        let svc = self.service();
        // F_Y(p - t) vanishes for t >= p - s0
        let upper = p - s0;
        if upper <= T::zero() {
            return Ok(T::zero());
        }
        let mut bps = svc.breakpoints();
        bps.extend(svc.breakpoints().iter().map(|&b| p - b));
        bps.push(upper);
        // evaluate F_Y lazily; the closure cannot return errors, so stash the first one
        let failure: RwLock<Option<crate::Error>> = RwLock::new(None);
        let fy = |t: T| match self.interdeparture_cdf(i, p - t) {
            Ok(v) => v * (-lambda * t).exp(),
            Err(e) => {
                failure.write().expect("lock").get_or_insert(e);
                T::zero()
            }
        };
        // inverted values carry errors somewhat above the requested tolerance
        let noise = T::of(10.0) * self.cdf_tol * svc.density_max();
        let v = integrate_measure_noisy(fy, |t| svc.density(t), svc.atoms(), T::zero(), upper, &bps, self.quad_tol, noise)?;
        if let Some(e) = failure.into_inner().expect("lock") {
            return Err(e);
        }
        Ok((v / self.service_lt_at_lambda()).max(T::zero()).min(T::one()))
    }

    /// `P(Δ_i^P > p)`.
    pub fn paoi_violation(&self, i: usize, p: T) -> Result<T> {
        self.spec.check_source(i)?;
        if !(p >= T::zero()) {
            return Err(domain("PAoI threshold must be nonnegative"));
        }
        Ok(T::one() - self.paoi_cdf(i, p)?)
    }

    /// PAoI density: `(1/L_S(λ)) ∫ f_Y(x - t) e^{-λt} dF_S(t)`.
    pub fn paoi_pdf(&self, i: usize, x: T) -> Result<T> {
        self.spec.check_source(i)?;
        let lambda = self.lambda();
        let s0 = self.shift();
        let svc = self.service();
        let upper = x - s0;
        if upper <= T::zero() {
            return Ok(T::zero());
        }
        let mut bps = svc.breakpoints();
        bps.extend(svc.breakpoints().iter().map(|&b| x - b));
        let failure: RwLock<Option<crate::Error>> = RwLock::new(None);
        let fy = |t: T| match self.interdeparture_pdf(i, x - t) {
            Ok(v) => v * (-lambda * t).exp(),
            Err(e) => {
                failure.write().expect("lock").get_or_insert(e);
                T::zero()
            }
        };
        let atoms: Vec<_> = svc.atoms().iter().copied().filter(|a| a.at < upper).collect();
        let noise = T::of(10.0) * self.pdf_tol * svc.density_max();
        let v = integrate_measure_noisy(fy, |t| svc.density(t), &atoms, T::zero(), upper, &bps, self.quad_tol, noise)?;
        if let Some(e) = failure.into_inner().expect("lock") {
            return Err(e);
        }
        Ok((v / self.service_lt_at_lambda()).max(T::zero()))
    }

    /// `E[Y_i] = 1 / (λ_i L_S(λ))`.
    pub fn mean_interdeparture(&self, i: usize) -> Result<T> {
        self.spec.check_source(i)?;
        Ok((self.spec.rates[i] * self.service_lt_at_lambda()).recip())
    }

    /// `Var Y_i` from the second derivative of the transform at zero.
    pub fn variance_interdeparture(&self, i: usize) -> Result<T> {
        let mean = self.mean_interdeparture(i)?;
        let li = self.spec.rates[i];
        let wm = self.service().weighted_moment(1, self.lambda())?;
        let second = T::two() * (T::one() - li * wm) * mean * mean;
        Ok(second - mean * mean)
    }

    /// Means and variances of AoI and PAoI.
    pub fn moments(&self, i: usize) -> Result<Moments<T>> {
        let mean_aoi = self.mean_interdeparture(i)?;
        let var_aoi = self.variance_interdeparture(i)?;
        let (mt, vt) = self.system_time_moments()?;
        Ok(Moments {
            mean_aoi,
            var_aoi,
            mean_paoi: mean_aoi + mt,
            var_paoi: var_aoi + vt,
        })
    }

    /// Rightmost real singularity of `L_Y`: the root of
    /// `λ_i L_S(λ+s) + s = 0` in `[-λ_i, 0)`.
    pub fn dominant_pole(&self, i: usize) -> Result<T> {
        self.spec.check_source(i)?;
        let li = self.spec.rates[i];
        let lambda = self.lambda();
        let svc = self.service();
        let h = |s: T| li * svc.laplace((lambda + s).max(T::zero())).unwrap_or(T::one()) + s;
        let tol = T::epsilon().sqrt() * li;
        bisect_monotone(h, -li, T::zero(), tol)
    }

    /// A point beyond which the tail of `Y_i` (and of PAoI) is negligible:
    /// the dominant-pole envelope `2 e^{s* (x - s0)}` drops below `1e-9`.
    pub fn evaluation_horizon(&self, i: usize) -> Result<T> {
        let pole = self.dominant_pole(i)?;
        let s0 = self.shift();
        let nats = T::of((2e9f64).ln());
        let (mt, vt) = self.system_time_moments()?;
        Ok(s0 + nats / pole.abs() + mt + T::of(10.0) * vt.sqrt())
    }

    /// Bundles pdf, cdf and moments for one source and quantity.
    pub fn distribution(&self, i: usize, kind: AgeKind) -> Result<AgeDistribution<'_, T>> {
        self.spec.check_source(i)?;
        let m = self.moments(i)?;
        let (mt, vt) = self.system_time_moments()?;
        let (mean, variance) = match kind {
            AgeKind::Aoi | AgeKind::InterDeparture => (m.mean_aoi, m.var_aoi),
            AgeKind::Paoi => (m.mean_paoi, m.var_paoi),
            AgeKind::SystemTime => (mt, vt),
        };
        Ok(AgeDistribution {
            analyzer: self,
            source: i,
            kind,
            mean,
            variance,
        })
    }
}

/// One source's distribution of AoI, PAoI, inter-departure or system time.
pub struct AgeDistribution<'a, T> {
    analyzer: &'a Analyzer<T>,
    pub source: usize,
    pub kind: AgeKind,
    pub mean: T,
    pub variance: T,
}

impl<T: Real> AgeDistribution<'_, T> {
    pub fn pdf(&self, x: T) -> Result<T> {
        let a = self.analyzer;
        match self.kind {
            AgeKind::Aoi | AgeKind::InterDeparture => a.interdeparture_pdf(self.source, x),
            AgeKind::Paoi => a.paoi_pdf(self.source, x),
            AgeKind::SystemTime => Ok(a.system_time_pdf(x)),
        }
    }

    pub fn cdf(&self, x: T) -> Result<T> {
        let a = self.analyzer;
        match self.kind {
            AgeKind::Aoi | AgeKind::InterDeparture => a.interdeparture_cdf(self.source, x),
            AgeKind::Paoi => {
                if x <= T::zero() {
                    Ok(T::zero())
                } else {
                    Ok(T::one() - a.paoi_violation(self.source, x)?)
                }
            }
            AgeKind::SystemTime => Ok(a.system_time_cdf(x)),
        }
    }

    /// Points in `(0, upto]` where the density may jump or kink: integer
    /// multiples of the service law's breakpoints and atoms (the transform
    /// of `Y` expands into powers of the service transform), shifted once
    /// more by the system time for PAoI.
    fn singular_points(&self, upto: T) -> Vec<T> {
        let svc = self.analyzer.service();
        let mut base = svc.breakpoints();
        base.extend(svc.atoms().iter().map(|a| a.at));
        base.push(svc.support_start());
        base.retain(|&b| b > T::zero());
        if self.kind == AgeKind::SystemTime {
            return base;
        }
        let mut points = Vec::new();
        for &b in &base {
            let count = (upto / b).floor().as_f64().min(512.0) as usize;
            points.extend((1..=count).map(|k| b * T::of(k as f64)));
        }
        if self.kind == AgeKind::Paoi {
            let shifted: Vec<T> = points.iter().flat_map(|&p| base.iter().map(move |&b| p + b)).collect();
            points.extend(shifted);
            points.extend(base.iter().copied());
        }
        points.retain(|&p| p <= upto);
        points
    }

    /// `∫_0^x pdf`, computed by quadrature of the density (atoms of the
    /// system-time law are not included).
    pub fn integrated_pdf(&self, x: T, tol: T) -> Result<T> {
        let failure: RwLock<Option<crate::Error>> = RwLock::new(None);
        let f = |y: T| match self.pdf(y) {
            Ok(v) => v,
            Err(e) => {
                failure.write().expect("lock").get_or_insert(e);
                T::zero()
            }
        };
        let bps = self.singular_points(x);
        let noise = T::of(10.0) * self.analyzer.pdf_tol;
        let v = integrate_piecewise_noisy(f, T::zero(), x, &bps, tol, noise)?;
        if let Some(e) = failure.into_inner().expect("lock") {
            return Err(e);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mm11;
    use approx::assert_abs_diff_eq;

    fn fig3(service: ServiceModel<f64>) -> Analyzer<f64> {
        Analyzer::new(SystemSpec::new(vec![0.2, 0.4], service).unwrap())
    }

    #[test]
    fn transform_values() {
        let a = fig3(ServiceModel::exponential(1.0).unwrap());
        let one = a.interdeparture_lt(0, Complex::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-15);
        let v = a.interdeparture_lt(0, Complex::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.2 / 2.8, epsilon = 1e-15);
        assert!(a.interdeparture_lt(2, Complex::new(1.0, 0.0)).is_err());
        let h = 1e-6;
        let d = (a.interdeparture_lt(0, Complex::new(h, 0.0)).unwrap().re - 1.0) / h;
        assert_abs_diff_eq!(-d, 8.0, epsilon = 1e-3);
        assert_abs_diff_eq!(a.mean_interdeparture(0).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn system_time_density() {
        let a = fig3(ServiceModel::exponential(1.0).unwrap());
        assert_abs_diff_eq!(a.system_time_pdf(0.0), 1.6, epsilon = 1e-14);
        assert_eq!(a.system_time_pdf(-1.0), 0.0);
        let mass = crate::laplace::integrate(|x| a.system_time_pdf(x), 0.0, f64::INFINITY, 1e-11).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        let u = fig3(ServiceModel::uniform(1.0).unwrap());
        let mass = crate::laplace::integrate_piecewise(|x| u.system_time_pdf(x), 0.0, f64::INFINITY, &[2.0], 1e-11)
            .unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        let d = fig3(ServiceModel::deterministic(1.0).unwrap());
        assert_eq!(d.system_time_cdf(0.999), 0.0);
        assert_abs_diff_eq!(d.system_time_cdf(1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exponential_matches_closed_forms() {
        let a = fig3(ServiceModel::exponential(1.0).unwrap());
        let r = mm11::roots(0.6, 1.0, 0.2).unwrap();
        for x in [0.5, 2.0, 8.0] {
            let closed = mm11::interdeparture_pdf_closed(&r, 0.2, 1.0, x);
            assert_abs_diff_eq!(a.aoi_pdf(0, x).unwrap(), closed, epsilon = 1e-6);
        }
        for x in [1.0, 8.625, 20.0] {
            let closed = mm11::paoi_pdf_closed(&r, 0.6, 1.0, x);
            assert_abs_diff_eq!(a.paoi_pdf(0, x).unwrap(), closed, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(a.aoi_violation(0, 8.0).unwrap(), 0.3695946843, epsilon = 1e-7);
        assert_abs_diff_eq!(a.paoi_violation(0, 8.625).unwrap(), 0.3710258635, epsilon = 1e-7);
        let m = a.moments(0).unwrap();
        let c = mm11::moments(0.6, 1.0, 0.2).unwrap();
        assert_abs_diff_eq!(m.mean_aoi, c.mean_aoi, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_aoi, c.var_aoi, epsilon = 1e-9);
        assert_abs_diff_eq!(m.mean_paoi, c.mean_paoi, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_paoi, c.var_paoi, epsilon = 1e-9);
        assert_abs_diff_eq!(a.dominant_pole(0).unwrap(), r.a, epsilon = 1e-7);
    }

    #[test]
    fn small_thresholds_and_domain() {
        let a = fig3(ServiceModel::exponential(1.0).unwrap());
        assert!(a.aoi_violation(0, 1e-6).unwrap() > 1.0 - 1e-8);
        assert!(a.paoi_violation(0, 1e-6).unwrap() > 1.0 - 1e-8);
        assert_eq!(a.aoi_violation(0, 0.0).unwrap(), 1.0);
        assert_eq!(a.paoi_violation(0, 0.0).unwrap(), 1.0);
        assert!(a.aoi_violation(0, -1.0).is_err());
        assert_eq!(a.aoi_pdf(0, -1.0).unwrap(), 0.0);
        assert_eq!(a.paoi_pdf(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_single_source_mean() {
        let a = Analyzer::new(SystemSpec::new(vec![0.5], ServiceModel::deterministic(2.0).unwrap()).unwrap());
        assert_abs_diff_eq!(a.mean_interdeparture(0).unwrap(), (0.25f64).exp() / 0.5, epsilon = 1e-12);
        assert_eq!(a.aoi_pdf(0, 0.4).unwrap(), 0.0);
        assert_eq!(a.aoi_cdf(0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn single_source_exponential_mean() {
        let a = Analyzer::new(SystemSpec::new(vec![0.7], ServiceModel::exponential(1.3).unwrap()).unwrap());
        assert_abs_diff_eq!(a.mean_interdeparture(0).unwrap(), 2.0 / (0.7 * 1.3), epsilon = 1e-12);
    }

    #[test]
    fn cdf_agrees_with_integrated_density() {
        for svc in [ServiceModel::exponential(1.0).unwrap(), ServiceModel::uniform(1.0).unwrap()] {
            let a = fig3(svc);
            let d = a.distribution(0, AgeKind::Aoi).unwrap();
            for x in [1.0, 4.0, 9.0] {
                let q = d.integrated_pdf(x, 1e-8).unwrap();
                assert_abs_diff_eq!(q, d.cdf(x).unwrap(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn violations_decrease_for_all_laws() {
        for svc in [
            ServiceModel::exponential(1.0).unwrap(),
            ServiceModel::deterministic(1.0).unwrap(),
            ServiceModel::uniform(1.0).unwrap(),
        ] {
            let a = fig3(svc);
            // deterministic service puts PAoI at or above 2/μ
            let mut prev = (1.0, 1.0);
            for k in 1..=50 {
                let x = 2.0 + 0.36 * k as f64;
                let cur = (a.aoi_violation(0, x).unwrap(), a.paoi_violation(0, x).unwrap());
                assert!(cur.0 < prev.0 && cur.1 < prev.1, "x = {x}: {cur:?} vs {prev:?}");
                prev = cur;
            }
        }
    }

    #[test]
    fn memoized_values_are_stable() {
        let a = fig3(ServiceModel::uniform(1.0).unwrap());
        let first = a.paoi_violation(0, 7.5).unwrap();
        let second = a.paoi_violation(0, 7.5).unwrap();
        assert_eq!(first.to_bits(), second.to_bits());
        let fresh = fig3(ServiceModel::uniform(1.0).unwrap());
        assert_eq!(fresh.paoi_violation(0, 7.5).unwrap().to_bits(), first.to_bits());
    }

    #[test]
    fn single_precision_path() {
        let a = Analyzer::new(SystemSpec::new(vec![0.2f32, 0.4], ServiceModel::exponential(1.0).unwrap()).unwrap());
        let v = a.aoi_violation(0, 8.0).unwrap();
        assert!((v - 0.3695947).abs() < 1e-3, "{v}");
    }
}
