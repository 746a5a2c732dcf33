//! Eigenvalue spectra of covariance operators.
//!
//! A [`Spectrum`] is a positive, non-increasing, summable sequence
//! `λ₁ ≥ λ₂ ≥ …` stored as an explicit head followed by an optional
//! parametric tail. Everything downstream (counting functions, Laplace
//! functionals, the exact CDF) needs sums over the *whole* sequence, so the
//! tail is never silently dropped: sums over it go through
//! [`crate::series::sum_from`].
//!
//! Indices are 1-based throughout, matching `λₙ` notation.

mod catalog;
mod counting;
mod json;
mod nystrom;

pub use catalog::{catalog, CatalogParams, CATALOG_NAMES};
pub use counting::{check_growth_condition, CountingFunction, GrowthReport, GrowthRow, Verdict};
pub use json::SpectrumSpec;
pub use nystrom::{nystrom_spectrum, Kernel, KernelSpec};

use crate::error::{domain, Error, Result};
use crate::series::{sum_from, SeriesSum, Summand};

/// Largest count the tail inversion reports exactly (2^53).
pub const MAX_COUNT: u64 = 1 << 53;

/// Direct terms summed before a tail series switches to its integral remainder.
pub(crate) const DIRECT_TERMS: u64 = 1024;

/// Parametric model for the eigenvalues past the explicit head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// `λₙ = scale / ((n + shift)^exponent + offset)`, `exponent > 1`.
    ///
    /// The plain power law `scale·n^(−exponent)` has `shift = offset = 0`;
    /// the Brownian spectrum `1/((n − ½)²π²)` is `shift = −½`.
    Power { scale: f64, exponent: f64, shift: f64, offset: f64 },
    /// `λₙ = scale · exp(−c·(πn)^alpha)`.
    StretchedExp { scale: f64, c: f64, alpha: f64 },
}

impl TailModel {
    pub fn power(scale: f64, exponent: f64) -> Self {
        TailModel::Power { scale, exponent, shift: 0.0, offset: 0.0 }
    }

    pub fn stretched_exp(c: f64, alpha: f64) -> Self {
        TailModel::StretchedExp { scale: 1.0, c, alpha }
    }

    /// Model value at a continuous index.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TailModel::Power { scale, exponent, shift, offset } => {
                scale / ((x + shift).powf(exponent) + offset)
            }
            TailModel::StretchedExp { scale, c, alpha } => {
                scale * (-c * (std::f64::consts::PI * x).powf(alpha)).exp()
            }
        }
    }

    /// `ln λ(x)`, free of overflow for large `x`.
    pub fn ln_value(&self, x: f64) -> f64 {
        match *self {
            TailModel::Power { scale, exponent, shift, offset } => {
                let m = x + shift;
                let lm = exponent * m.ln();
                scale.ln() - lm - (offset * (-lm).exp()).ln_1p()
            }
            TailModel::StretchedExp { scale, c, alpha } => {
                scale.ln() - c * (std::f64::consts::PI * x).powf(alpha)
            }
        }
    }

    fn validate(&self, start: u64) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            TailModel::Power { scale, exponent, shift, offset } => {
                if !ok(scale) || !exponent.is_finite() || exponent <= 1.0 {
                    return Err(Error::Validation(format!(
                        "power tail needs scale > 0 and exponent > 1 (got {scale}, {exponent})"
                    )));
                }
                let m = start as f64 + shift;
                if !shift.is_finite() || !offset.is_finite() || m <= 0.0 || m.powf(exponent) + offset <= 0.0 {
                    return Err(Error::Validation(format!(
                        "power tail with shift {shift} and offset {offset} is not positive from index {start}"
                    )));
                }
                if offset < 0.0 && m.powf(exponent) + offset <= 0.0 {
                    return Err(Error::Validation("power tail denominator must stay positive".into()));
                }
            }
            TailModel::StretchedExp { scale, c, alpha } => {
                if !ok(scale) || !ok(c) || !ok(alpha) {
                    return Err(Error::Validation(format!(
                        "stretched_exp tail needs scale, C, alpha > 0 (got {scale}, {c}, {alpha})"
                    )));
                }
            }
        }
        if !ok(self.value(start as f64)) {
            return Err(Error::Validation(format!("tail value at index {start} is not a positive finite number")));
        }
        Ok(())
    }

    /// Continuous index bound `B` with `λ(x) > λ ⟺ x < B`; `None` when no
    /// index qualifies.
    fn index_bound(&self, lambda: f64) -> Option<f64> {
        match *self {
            TailModel::Power { scale, exponent, shift, offset } => {
                let d = scale / lambda - offset;
                (d > 0.0).then(|| d.powf(1.0 / exponent) - shift)
            }
            TailModel::StretchedExp { scale, c, alpha } => {
                let l = (scale / lambda).ln();
                (l > 0.0).then(|| (l / c).powf(1.0 / alpha) / std::f64::consts::PI)
            }
        }
    }

    /// Number of indices `n ≥ start` with `λ(n) > lambda`.
    pub fn count_above(&self, lambda: f64, start: u64) -> Result<u64> {
        let bound = match self.index_bound(lambda) {
            Some(b) => b,
            None => return Ok(0),
        };
        if !bound.is_finite() || bound > MAX_COUNT as f64 {
            return Err(Error::UnboundedCount { lambda, floor: self.value(MAX_COUNT as f64) });
        }
        let s = start as f64;
        let mut k = if bound <= s { 0 } else { (bound.ceil() - s).max(0.0) as u64 };
        // Correct rounding in the closed-form inversion against the model itself.
        while k > 0 && self.value((start + k - 1) as f64) <= lambda {
            k -= 1;
        }
        while self.value((start + k) as f64) > lambda {
            k += 1;
        }
        Ok(k)
    }

    /// Same asymptotic class as `other`, i.e. `ln(λₙ/λ̃ₙ) → 0` summably.
    fn product_compatible(&self, other: &TailModel) -> bool {
        let same = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs());
        match (*self, *other) {
            (
                TailModel::Power { scale: a, exponent: p, shift: s, .. },
                TailModel::Power { scale: b, exponent: q, shift: t, .. },
            ) => same(a, b) && same(p, q) && same(s, t),
            (
                TailModel::StretchedExp { scale: a, c, alpha },
                TailModel::StretchedExp { scale: b, c: d, alpha: beta },
            ) => same(a, b) && same(c, d) && same(alpha, beta),
            _ => false,
        }
    }

    fn scaled(&self, factor: f64) -> TailModel {
        match *self {
            TailModel::Power { scale, exponent, shift, offset } => {
                TailModel::Power { scale: scale * factor, exponent, shift, offset }
            }
            TailModel::StretchedExp { scale, c, alpha } => {
                TailModel::StretchedExp { scale: scale * factor, c, alpha }
            }
        }
    }
}

/// Positive summable eigenvalue sequence: explicit head plus optional tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    head: Vec<f64>,
    tail: Option<TailModel>,
}

impl Spectrum {
    /// Builds and validates a spectrum. The tail, if any, starts at index
    /// `head.len() + 1`.
    pub fn new(head: Vec<f64>, tail: Option<TailModel>) -> Result<Self> {
        if head.is_empty() && tail.is_none() {
            return Err(Error::Validation("spectrum has no eigenvalues".into()));
        }
        if let Some(i) = head.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Validation(format!(
                "eigenvalue {} = {} is not a positive finite number",
                i + 1,
                head[i]
            )));
        }
        if let Some(i) = head.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Validation(format!(
                "eigenvalues must be non-increasing: λ{} = {} < λ{} = {}",
                i + 1,
                head[i],
                i + 2,
                head[i + 1]
            )));
        }
        if let Some(t) = &tail {
            let start = head.len() as u64 + 1;
            t.validate(start)?;
            if t.value((start + 1) as f64) > t.value(start as f64) {
                return Err(Error::Validation("tail model must be non-increasing".into()));
            }
            if let Some(&last) = head.last() {
                let first = t.value(start as f64);
                if last < first {
                    return Err(Error::Validation(format!(
                        "head ends at {last} below the tail's first value {first}"
                    )));
                }
            }
        }
        Ok(Spectrum { head, tail })
    }

    /// Finite spectrum from a list of eigenvalues. The list is sorted into
    /// non-increasing order.
    pub fn explicit(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Spectrum::new(values, None)
    }

    pub fn parametric(tail: TailModel) -> Result<Self> {
        Spectrum::new(Vec::new(), Some(tail))
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// First index handled by the tail model.
    pub fn tail_start(&self) -> u64 {
        self.head.len() as u64 + 1
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// Number of eigenvalues, `None` for infinite spectra.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.head.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `λₙ` for 1-based `n`; zero past the end of a finite spectrum.
    pub fn eigenvalue(&self, n: u64) -> f64 {
        assert!(n >= 1, "eigenvalue indices are 1-based");
        if let Some(v) = self.head.get((n - 1) as usize) {
            *v
        } else if let Some(t) = &self.tail {
            t.value(n as f64)
        } else {
            0.0
        }
    }

    /// Largest eigenvalue.
    pub fn leading(&self) -> f64 {
        self.eigenvalue(1)
    }

    /// First `n` eigenvalues as a finite spectrum.
    pub fn truncated(&self, n: usize) -> Result<Spectrum> {
        if n == 0 {
            return Err(Error::Usage("truncation must keep at least one eigenvalue".into()));
        }
        let values: Vec<f64> = (1..=n as u64)
            .map(|k| self.eigenvalue(k))
            .take_while(|v| *v > 0.0)
            .collect();
        Spectrum::new(values, None)
    }

    /// The spectrum of `c·X`², i.e. every eigenvalue multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Spectrum> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(domain(format!("scale factor must be positive, got {factor}")));
        }
        Spectrum::new(
            self.head.iter().map(|v| v * factor).collect(),
            self.tail.map(|t| t.scaled(factor)),
        )
    }

    /// `Σₙ f(λₙ)` over the whole spectrum. `f` must vanish fast enough as
    /// `λ → 0` for the series to converge.
    pub fn sum_map<T: Summand>(&self, f: impl Fn(f64) -> T) -> Result<SeriesSum<T>> {
        let mut acc = T::zero();
        for &v in &self.head {
            acc = acc + f(v);
        }
        match &self.tail {
            None => Ok(SeriesSum { value: acc, bound: 0.0, direct: self.head.len() as u64 }),
            Some(t) => {
                let s = sum_from(self.tail_start() as f64, DIRECT_TERMS, |x| f(t.value(x)))?;
                Ok(SeriesSum {
                    value: acc + s.value,
                    bound: s.bound,
                    direct: self.head.len() as u64 + s.direct,
                })
            }
        }
    }

    /// `Σ_{n > index} λₙ`.
    pub fn mass_beyond(&self, index: u64) -> Result<f64> {
        let head_len = self.head.len() as u64;
        let head_part: f64 = if index < head_len {
            self.head[index as usize..].iter().sum()
        } else {
            0.0
        };
        let tail_part = match &self.tail {
            None => 0.0,
            Some(t) => sum_from(index.max(head_len) as f64 + 1.0, DIRECT_TERMS, |x| t.value(x))?.value,
        };
        Ok(head_part + tail_part)
    }

    /// `Σₙ λₙ`, the trace of the covariance operator.
    pub fn total(&self) -> Result<f64> {
        self.mass_beyond(0)
    }

    /// `𝒩(λ) = #{n : λₙ > λ}`. Strict inequality: an eigenvalue equal to
    /// the threshold is not counted.
    pub fn counting(&self, lambda: f64) -> Result<u64> {
        if !(lambda > 0.0) {
            return Err(domain(format!("counting threshold must be positive, got {lambda}")));
        }
        let in_head = self.head.partition_point(|v| *v > lambda) as u64;
        if in_head < self.head.len() as u64 {
            return Ok(in_head);
        }
        match &self.tail {
            None => Ok(in_head),
            Some(t) => Ok(in_head + t.count_above(lambda, self.tail_start())?),
        }
    }

    /// `𝓜(λ) = ∫₀^λ 𝒩(t) dt = Σₙ min(λₙ, λ)`.
    pub fn cumulative_mass(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(domain(format!("cumulative mass threshold must be positive, got {lambda}")));
        }
        let mut mass: f64 = self.head.iter().map(|v| v.min(lambda)).sum();
        if let Some(t) = &self.tail {
            let start = self.tail_start();
            let above = if self.head.last().is_some_and(|v| *v <= lambda) {
                0
            } else {
                t.count_above(lambda, start)?
            };
            mass += above as f64 * lambda;
            mass += sum_from((start + above) as f64, DIRECT_TERMS, |x| t.value(x))?.value;
        }
        Ok(mass)
    }

    /// Smallest `N` with `Σ_{n>N} λₙ ≤ limit`, capped at `max_index`.
    pub fn truncation_index(&self, limit: f64, max_index: u64) -> Result<u64> {
        if !(limit >= 0.0) {
            return Err(domain("truncation mass limit must be non-negative"));
        }
        let head_len = self.head.len() as u64;
        let tail_mass = self.mass_beyond(head_len)?;
        if tail_mass <= limit {
            // Walk back through the head while the discarded mass stays small.
            let mut n = head_len;
            let mut discarded = tail_mass;
            while n > 0 && discarded + self.head[(n - 1) as usize] <= limit {
                discarded += self.head[(n - 1) as usize];
                n -= 1;
            }
            return Ok(n);
        }
        // Tail model present: exponential search, then bisection on the index.
        let mut lo = head_len;
        let mut hi = head_len.max(1) * 2;
        while self.mass_beyond(hi)? > limit {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi > max_index {
                if self.mass_beyond(max_index)? > limit {
                    return Err(Error::Truncation(format!(
                        "tail mass {:e} beyond index {max_index} still exceeds the limit {limit:e}",
                        self.mass_beyond(max_index)?
                    )));
                }
                hi = max_index;
                break;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.mass_beyond(mid)? <= limit {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Whether `ln(λₙ/λ̃ₙ)` is summable against `other`'s tail.
    pub(crate) fn tails_product_compatible(&self, other: &Spectrum) -> Option<bool> {
        match (&self.tail, &other.tail) {
            (Some(a), Some(b)) => Some(a.product_compatible(b)),
            (None, None) => None,
            _ => Some(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn exp_decay() -> Spectrum {
        // λₙ = e^(−n) is the stretched family with α = 1, C = 1/π.
        Spectrum::parametric(TailModel::stretched_exp(1.0 / PI, 1.0)).unwrap()
    }

    #[test]
    fn counting_examples() {
        assert_eq!(exp_decay().counting((-5.5f64).exp()).unwrap(), 5);
        let two = Spectrum::explicit(vec![1.0, 0.5]).unwrap();
        assert_eq!(two.counting(2.0).unwrap(), 0);
        let se = Spectrum::parametric(TailModel::stretched_exp(2.0, 0.5)).unwrap();
        let lambda = (-2.0 * (2.0 * PI).sqrt()).exp();
        assert_eq!(se.counting(lambda).unwrap(), 1);
    }

    #[test]
    fn counting_is_strict_at_eigenvalues() {
        let s = Spectrum::explicit(vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(s.counting(0.5).unwrap(), 1);
        assert_eq!(s.counting(0.4999).unwrap(), 2);
    }

    #[test]
    fn counting_rejects_bad_thresholds() {
        let s = Spectrum::explicit(vec![1.0]).unwrap();
        assert!(matches!(s.counting(0.0), Err(Error::Domain(_))));
        assert!(matches!(s.counting(-1.0), Err(Error::Domain(_))));
        let p = Spectrum::parametric(TailModel::power(1.0, 2.0)).unwrap();
        match p.counting(1e-300) {
            Err(Error::UnboundedCount { floor, .. }) => assert!(floor > 1e-300),
            other => panic!("expected unbounded count, got {other:?}"),
        }
    }

    #[test]
    fn counting_combines_head_and_tail() {
        let s = Spectrum::new(vec![3.0, 2.0], Some(TailModel::power(1.0, 2.0))).unwrap();
        // tail: 1/9, 1/16, 1/25, ...
        assert_eq!(s.counting(2.5).unwrap(), 1);
        assert_eq!(s.counting(0.1).unwrap(), 3);
        assert_eq!(s.counting(0.01).unwrap(), 9);
    }

    #[test]
    fn cumulative_mass_examples() {
        let two = Spectrum::explicit(vec![1.0, 0.5]).unwrap();
        assert!((two.cumulative_mass(0.7).unwrap() - 1.2).abs() < 1e-15);
        assert!((two.cumulative_mass(10.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn cumulative_mass_power_tail_matches_brute_force() {
        let p = Spectrum::parametric(TailModel::power(1.0, 2.0)).unwrap();
        // Oracle: direct sum to 10⁶, remainder Σ_{n>10⁶} n⁻² between 1/(10⁶+1) and 1/10⁶.
        let n_max = 1_000_000u64;
        let direct: f64 = (1..=n_max).rev().map(|n| (1.0 / (n as f64).powi(2)).min(0.01)).sum();
        let oracle = direct + 1.0 / (n_max as f64 + 0.5);
        let got = p.cumulative_mass(0.01).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        // Σ_{n≤10} 0.01 + Σ_{n>10} n⁻² = 0.1 + π²/6 − H₁₀⁽²⁾ ≈ 0.19517
        let closed = 0.1 + PI * PI / 6.0 - (1..=10).map(|n| 1.0 / (n as f64).powi(2)).sum::<f64>();
        assert!((got - closed).abs() < 1e-12, "{got} vs {closed}");
    }

    #[test]
    fn total_of_brownian_spectrum_is_half() {
        let b = catalog("brownian", &CatalogParams::default()).unwrap();
        assert!((b.total().unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn validation_catches_bad_input() {
        assert!(Spectrum::new(vec![0.5, 1.0], None).is_err());
        assert!(Spectrum::new(vec![1.0, -0.1], None).is_err());
        assert!(Spectrum::new(vec![], None).is_err());
        // head ends below the tail's first value
        assert!(Spectrum::new(vec![1.0, 1e-3], Some(TailModel::power(1.0, 2.0))).is_err());
        assert!(Spectrum::parametric(TailModel::power(1.0, 1.0)).is_err());
    }

    #[test]
    fn scale_property_of_counting() {
        let s = catalog("brownian", &CatalogParams { head: 4, ..Default::default() }).unwrap();
        let c = 3.7;
        let scaled = s.scaled(c).unwrap();
        for k in 1..40 {
            let lambda = 0.4 * 0.8f64.powi(k);
            assert_eq!(scaled.counting(lambda).unwrap(), s.counting(lambda / c).unwrap());
        }
    }

    #[test]
    fn truncation_index_meets_limit() {
        let b = catalog("brownian", &CatalogParams::default()).unwrap();
        let n = b.truncation_index(1e-4, 10_000_000).unwrap();
        assert!(b.mass_beyond(n).unwrap() <= 1e-4);
        assert!(b.mass_beyond(n - 1).unwrap() > 1e-4);
        let f = Spectrum::explicit(vec![1.0, 1e-5, 1e-6]).unwrap();
        assert_eq!(f.truncation_index(2e-5, 10).unwrap(), 1);
        assert_eq!(f.truncation_index(0.0, 10).unwrap(), 3);
    }
}
