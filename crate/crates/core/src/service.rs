//! Service-time laws: density, Laplace transform, moments and sampling.
//!
//! Densities are split into a continuous part ([`ServiceModel::density`]) and
//! point masses ([`ServiceModel::atoms`]). Deterministic service is a single
//! unit atom and has zero continuous density everywhere.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laplace::{integrate, Atom};
use crate::scalar::Real;

/// Piecewise-linear density on a user grid, renormalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity<T> {
    xs: Vec<T>,
    fs: Vec<T>,
    /// Cumulative mass at each grid point.
    cum: Vec<T>,
}

impl<T: Real> TabulatedDensity<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain("tabulated density needs at least two grid points"));
        }
        if points[0].0 < T::zero() {
            return Err(domain("tabulated density must be supported on [0, inf)"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain("tabulated grid abscissae must be strictly increasing"));
            }
        }
        if points.iter().any(|&(x, f)| !x.is_finite() || !f.is_finite() || f < T::zero()) {
            return Err(domain("tabulated density values must be finite and nonnegative"));
        }
        let xs: Vec<T> = points.iter().map(|p| p.0).collect();
        let raw: Vec<T> = points.iter().map(|p| p.1).collect();
        let mut cum = vec![T::zero()];
        for k in 0..xs.len() - 1 {
            let h = xs[k + 1] - xs[k];
            let last = *cum.last().expect("nonempty");
            cum.push(last + h * (raw[k] + raw[k + 1]) * T::half());
        }
        let mass = *cum.last().expect("nonempty");
        if !(mass > T::zero()) {
            return Err(domain("tabulated density has zero mass"));
        }
        let fs: Vec<T> = raw.iter().map(|&f| f / mass).collect();
        let cum: Vec<T> = cum.iter().map(|&c| c / mass).collect();
        // interior nodes on the line through their neighbours add nothing
        let scale = fs.iter().copied().fold(T::zero(), T::max);
        let mut keep = vec![true; xs.len()];
        let mut last = 0;
        for k in 1..xs.len() - 1 {
            let t = (xs[k] - xs[last]) / (xs[k + 1] - xs[last]);
            let line = fs[last] + (fs[k + 1] - fs[last]) * t;
            if (fs[k] - line).abs() <= T::epsilon() * T::of(64.0) * scale {
                keep[k] = false;
            } else {
                last = k;
            }
        }
        let pick = |v: &[T]| v.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect::<Vec<T>>();
        Ok(Self {
            xs: pick(&xs),
            fs: pick(&fs),
            cum: pick(&cum),
        })
    }

    pub fn grid(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    fn segments(&self) -> impl Iterator<Item = (T, T, T, T)> + '_ {
        (0..self.xs.len() - 1).map(move |k| (self.xs[k], self.xs[k + 1], self.fs[k], self.fs[k + 1]))
    }

    fn density(&self, x: T) -> T {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return T::zero();
        }
        let k = self.xs.partition_point(|&g| g <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let t = (x - x0) / (x1 - x0);
        self.fs[k] + (self.fs[k + 1] - self.fs[k]) * t
    }

    /// `∫ x^k f(x) dx` for k <= 2; Simpson is exact for the cubic integrand.
    fn raw_moment(&self, k: i32) -> T {
        self.segments()
            .map(|(x0, x1, f0, f1)| {
                let xm = (x0 + x1) * T::half();
                let fm = (f0 + f1) * T::half();
                (x1 - x0) / T::of(6.0)
                    * (x0.powi(k) * f0 + T::of(4.0) * xm.powi(k) * fm + x1.powi(k) * f1)
            })
            .sum()
    }

    /// `∫_0^upper e^{-zx} f(x) dx`, exact per linear segment.
    fn transform_upto(&self, z: Complex<T>, upper: T) -> Complex<T> {
        self.transform_from(z, upper, T::zero())
    }

    /// `∫_0^upper e^{-z(x - origin)} f(x) dx`.
    fn transform_from(&self, z: Complex<T>, upper: T, origin: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x0, x1, f0, f1) in self.segments() {
            if x0 >= upper {
                break;
            }
            let slope = (f1 - f0) / (x1 - x0);
            let h = x1.min(upper) - x0;
            let (i0, i1) = linear_segment_moments(z, h);
            acc = acc + (i0 * f0 + i1 * slope) * (-z * (x0 - origin)).exp();
        }
        acc
    }

    fn sample_from_uniform(&self, u: T) -> T {
        let n = self.xs.len();
        let k = self.cum.partition_point(|&c| c <= u).clamp(1, n - 1) - 1;
        let (x0, x1, f0, f1) = (self.xs[k], self.xs[k + 1], self.fs[k], self.fs[k + 1]);
        let h = x1 - x0;
        let target = (u - self.cum[k]).max(T::zero());
        let slope = (f1 - f0) / h;
        // solve f0 v + slope v^2 / 2 = target for v in [0, h]
        let disc = (f0 * f0 + T::two() * slope * target).max(T::zero());
        let denom = f0 + disc.sqrt();
        let v = if denom > T::zero() { T::two() * target / denom } else { T::zero() };
        x0 + v.min(h)
    }
}

/// `(∫_0^h e^{-zu} du, ∫_0^h u e^{-zu} du)`.
fn linear_segment_moments<T: Real>(z: Complex<T>, h: T) -> (Complex<T>, Complex<T>) {
    let w = z * h;
    if w.norm() < T::of(0.5) {
        // Σ (-w)^n / (n+1)!  and  Σ (-w)^n / ((n+2) n!)
        let mut pow_over_fact = Complex::new(T::one(), T::zero());
        let mut s0 = Complex::new(T::zero(), T::zero());
        let mut s1 = Complex::new(T::zero(), T::zero());
        for n in 0..24 {
            let nf = T::of(n as f64);
            s0 = s0 + pow_over_fact / (nf + T::one());
            s1 = s1 + pow_over_fact / (nf + T::two());
            pow_over_fact = -pow_over_fact * w / (nf + T::one());
        }
        (s0 * h, s1 * h * h)
    } else {
        let e = (-w).exp();
        let one = Complex::new(T::one(), T::zero());
        let i0 = (one - e) / z;
        let i1 = (one - e * (one + w)) / (z * z);
        (i0, i1)
    }
}

/// Which law a [`ServiceModel`] follows.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceKind<T> {
    Exponential,
    /// Unit atom at the mean service time.
    Deterministic,
    /// Uniform on `[0, 2 * mean]`.
    Uniform,
    CustomTabulated(TabulatedDensity<T>),
}

/// A service-time distribution with mean `1/mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceModel<T> {
    kind: ServiceKind<T>,
    mean: T,
    atoms: Vec<Atom<T>>,
}

fn check_rate<T: Real>(mu: T) -> Result<()> {
    if mu > T::zero() && mu.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("service rate must be positive and finite, got {}", mu.as_f64())))
    }
}

impl<T: Real> ServiceModel<T> {
    pub fn exponential(mu: T) -> Result<Self> {
        check_rate(mu)?;
        Ok(Self {
            kind: ServiceKind::Exponential,
            mean: mu.recip(),
            atoms: Vec::new(),
        })
    }

    pub fn deterministic(mu: T) -> Result<Self> {
        check_rate(mu)?;
        let d = mu.recip();
        Ok(Self {
            kind: ServiceKind::Deterministic,
            mean: d,
            atoms: vec![Atom { at: d, weight: T::one() }],
        })
    }

    pub fn uniform(mu: T) -> Result<Self> {
        check_rate(mu)?;
        Ok(Self {
            kind: ServiceKind::Uniform,
            mean: mu.recip(),
            atoms: Vec::new(),
        })
    }

    /// Builds a tabulated law from `(x, f(x))` pairs, renormalized to unit mass.
    pub fn custom(points: &[(T, T)]) -> Result<Self> {
        let table = TabulatedDensity::new(points)?;
        let mean = table.raw_moment(1);
        if !(mean > T::zero()) {
            return Err(domain("tabulated density must have positive mean"));
        }
        Ok(Self {
            kind: ServiceKind::CustomTabulated(table),
            mean,
            atoms: Vec::new(),
        })
    }

    pub fn kind(&self) -> &ServiceKind<T> {
        &self.kind
    }

    /// Kendall letter of the law (`M`, `D`, `U`, `G`).
    pub fn kendall(&self) -> &'static str {
        match self.kind {
            ServiceKind::Exponential => "M",
            ServiceKind::Deterministic => "D",
            ServiceKind::Uniform => "U",
            ServiceKind::CustomTabulated(_) => "G",
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, ServiceKind::Exponential)
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Service rate `mu = 1 / mean`.
    pub fn rate(&self) -> T {
        self.mean.recip()
    }

    pub fn variance(&self) -> T {
        match &self.kind {
            ServiceKind::Exponential => self.mean * self.mean,
            ServiceKind::Deterministic => T::zero(),
            ServiceKind::Uniform => {
                let width = T::two() * self.mean;
                width * width / T::of(12.0)
            }
            ServiceKind::CustomTabulated(t) => (t.raw_moment(2) - self.mean * self.mean).max(T::zero()),
        }
    }

    fn uniform_width(&self) -> T {
        T::two() * self.mean
    }

    /// Continuous part of the density; atoms are reported by [`Self::atoms`].
    pub fn density(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        match &self.kind {
            ServiceKind::Exponential => {
                let mu = self.rate();
                mu * (-mu * x).exp()
            }
            ServiceKind::Deterministic => T::zero(),
            ServiceKind::Uniform => {
                let c = self.uniform_width();
                if x <= c {
                    c.recip()
                } else {
                    T::zero()
                }
            }
            ServiceKind::CustomTabulated(t) => t.density(x),
        }
    }

    /// Supremum of [`Self::density`].
    pub fn density_max(&self) -> T {
        match &self.kind {
            ServiceKind::Exponential => self.rate(),
            ServiceKind::Deterministic => T::zero(),
            ServiceKind::Uniform => self.uniform_width().recip(),
            ServiceKind::CustomTabulated(t) => t.fs.iter().copied().fold(T::zero(), T::max),
        }
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    /// Points where the continuous density jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.kind {
            ServiceKind::Exponential | ServiceKind::Deterministic => Vec::new(),
            ServiceKind::Uniform => vec![self.uniform_width()],
            ServiceKind::CustomTabulated(t) => t.xs.clone(),
        }
    }

    /// Left end of the support: `S >= support_start()` almost surely.
    pub fn support_start(&self) -> T {
        match &self.kind {
            ServiceKind::Exponential | ServiceKind::Uniform => T::zero(),
            ServiceKind::Deterministic => self.mean,
            ServiceKind::CustomTabulated(t) => t
                .segments()
                .find(|&(_, _, f0, f1)| f0 > T::zero() || f1 > T::zero())
                .map(|(x0, ..)| x0)
                .unwrap_or(T::zero()),
        }
    }

    /// `E[e^{-sS}]` on the nonnegative real axis.
    pub fn laplace(&self, s: T) -> Result<T> {
        if !(s >= T::zero()) {
            return Err(domain(format!("Laplace argument must be nonnegative, got {}", s.as_f64())));
        }
        if s == T::zero() {
            return Ok(T::one());
        }
        Ok(self.laplace_complex(Complex::new(s, T::zero())).re)
    }

    /// Analytic continuation of the transform to complex `s` with `Re(s) >= 0`.
    pub fn laplace_complex(&self, s: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        match &self.kind {
            ServiceKind::Exponential => {
                let mu = self.rate();
                Complex::new(mu, T::zero()) / (s + mu)
            }
            ServiceKind::Deterministic => (-s * self.mean).exp(),
            ServiceKind::Uniform => {
                let w = s * self.uniform_width();
                if w.norm() < T::of(0.5) {
                    // (1 - e^{-w}) / w = Σ (-w)^n / (n+1)!
                    let mut term = one;
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for n in 1..24 {
                        acc = acc + term;
                        term = -term * w / T::of((n + 1) as f64);
                    }
                    acc
                } else {
                    (one - (-w).exp()) / w
                }
            }
            ServiceKind::CustomTabulated(t) => t.transform_upto(s, T::infinity()),
        }
    }

    /// `E[e^{-s(S - s0)}]` with `s0` the support start; unlike
    /// `e^{s s0} L_S(s)` it stays finite for large `Re(s)`.
    pub fn laplace_complex_shifted(&self, s: Complex<T>) -> Complex<T> {
        match &self.kind {
            ServiceKind::Deterministic => Complex::new(T::one(), T::zero()),
            ServiceKind::CustomTabulated(t) => t.transform_from(s, T::infinity(), self.support_start()),
            _ => self.laplace_complex(s),
        }
    }

    /// `G(u) = ∫_0^u e^{-λt} dF_S(t)`, atoms included.
    pub fn partial_transform(&self, lambda: T, u: T) -> T {
        let atoms: T = self
            .atoms
            .iter()
            .filter(|a| a.at <= u)
            .map(|a| a.weight * (-lambda * a.at).exp())
            .sum();
        atoms + self.partial_transform_continuous(lambda, u)
    }

    /// Continuous-density part of [`Self::partial_transform`].
    pub fn partial_transform_continuous(&self, lambda: T, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            ServiceKind::Exponential => {
                let mu = self.rate();
                let k = lambda + mu;
                -mu * (-k * u).exp_m1() / k
            }
            ServiceKind::Deterministic => T::zero(),
            ServiceKind::Uniform => {
                let c = self.uniform_width();
                let m = u.min(c);
                if lambda == T::zero() {
                    m / c
                } else {
                    -(-lambda * m).exp_m1() / (lambda * c)
                }
            }
            ServiceKind::CustomTabulated(t) => t.transform_upto(Complex::new(lambda, T::zero()), u).re,
        }
    }

    /// `E[S^k e^{-λS}]` for `k` in `0..=2`; these are `(-1)^k` times the
    /// k-th derivative of the transform at `λ`.
    pub fn weighted_moment(&self, k: u32, lambda: T) -> Result<T> {
        if k > 2 {
            return Err(domain("weighted moments are provided for k <= 2"));
        }
        if !(lambda >= T::zero()) {
            return Err(domain("weighted moment needs a nonnegative exponent"));
        }
        let ki = k as i32;
        Ok(match &self.kind {
            ServiceKind::Exponential => {
                let mu = self.rate();
                let fact = T::of([1.0, 1.0, 2.0][k as usize]);
                mu * fact / (lambda + mu).powi(ki + 1)
            }
            ServiceKind::Deterministic => self.mean.powi(ki) * (-lambda * self.mean).exp(),
            ServiceKind::Uniform => {
                // (1/c) ∫_0^c x^k e^{-λx} dx = c^k Σ (-y)^n / (n! (n+k+1)), y = λc
                let c = self.uniform_width();
                let y = lambda * c;
                let kf = T::of(k as f64);
                let value = if y < T::one() {
                    let mut term = T::one();
                    let mut acc = T::zero();
                    for n in 0..30 {
                        let nf = T::of(n as f64);
                        acc += term / (nf + kf + T::one());
                        term = -term * y / (nf + T::one());
                    }
                    acc
                } else {
                    let e = (-y).exp();
                    match k {
                        0 => -(-y).exp_m1() / y,
                        1 => (T::one() - e * (T::one() + y)) / (y * y),
                        _ => (T::two() - e * (T::two() + T::two() * y + y * y)) / (y * y * y),
                    }
                };
                c.powi(ki) * value
            }
            ServiceKind::CustomTabulated(t) => {
                let tol = fine_tol::<T>();
                let mut acc = T::zero();
                for (x0, x1, _, _) in t.segments() {
                    acc += integrate(|x| x.powi(ki) * (-lambda * x).exp() * t.density(x), x0, x1, tol)?;
                }
                acc
            }
        })
    }

    /// Draws one service time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match &self.kind {
            ServiceKind::Deterministic => self.mean,
            ServiceKind::Exponential => {
                // 1 - U lies in (0, 1]
                let u = T::of(1.0 - rng.random::<f64>());
                -u.ln() * self.mean
            }
            ServiceKind::Uniform => T::of(rng.random::<f64>()) * self.uniform_width(),
            ServiceKind::CustomTabulated(t) => t.sample_from_uniform(T::of(rng.random::<f64>())),
        }
    }
}

pub(crate) fn fine_tol<T: Real>() -> T {
    T::epsilon() * T::of(256.0)
}

/// Serialized form of a service law:
/// `{"kind": "exponential"|"deterministic"|"uniform"|"custom", "mu": .., "grid": [[x, f], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    pub kind: ServiceKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceKindTag {
    Exponential,
    Deterministic,
    Uniform,
    Custom,
}

impl ServiceSpec {
    pub fn exponential(mu: f64) -> Self {
        Self {
            kind: ServiceKindTag::Exponential,
            mu: Some(mu),
            grid: None,
        }
    }

    pub fn build<T: Real>(&self) -> Result<ServiceModel<T>> {
        let mu = || -> Result<T> {
            self.mu
                .map(T::of)
                .ok_or_else(|| Error::InvalidConfig(format!("service kind {:?} requires \"mu\"", self.kind)))
        };
        if self.kind != ServiceKindTag::Custom && self.grid.is_some() {
            return Err(Error::InvalidConfig("\"grid\" is only valid for custom service".into()));
        }
        match self.kind {
            ServiceKindTag::Exponential => ServiceModel::exponential(mu()?),
            ServiceKindTag::Deterministic => ServiceModel::deterministic(mu()?),
            ServiceKindTag::Uniform => ServiceModel::uniform(mu()?),
            ServiceKindTag::Custom => {
                let grid = self
                    .grid
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("custom service requires \"grid\"".into()))?;
                let mut points: Vec<(T, T)> = grid.iter().map(|p| (T::of(p[0]), T::of(p[1]))).collect();
                if let Some(target) = self.mu {
                    // rescale the abscissae so the mean becomes 1/mu
                    let mean = ServiceModel::custom(&points)?.mean();
                    let factor = T::of(target).recip() / mean;
                    for p in &mut points {
                        p.0 *= factor;
                        p.1 = p.1 / factor;
                    }
                }
                ServiceModel::custom(&points)
            }
        }
    }
}
