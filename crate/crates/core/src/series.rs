//! Summation of infinite series `Σ_{n ≥ start} f(n)` whose terms come from a
//! smooth, eventually decaying function of a continuous index.
//!
//! The first terms are summed directly. If they have not died out after the
//! direct budget, the remainder is replaced by the midpoint integral
//! `∫_{M+1/2}^∞ f` with the first Euler–Maclaurin correction, integrated on
//! fixed Gauss–Legendre panels in `t = ln(x / X)`. Fixed panels keep the
//! result smooth in any parameter `f` depends on, which finite-difference
//! checks downstream rely on.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::panel_rule;

/// Ratio below which a term no longer changes a partial sum.
const NEGLIGIBLE: f64 = 1e-18;
const PANEL_WIDTH: f64 = 0.5;
const MAX_LOG_SPAN: f64 = 5000.0;

/// Values the series engine can accumulate.
pub trait Summand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    /// Whether `term` is below rounding relative to `acc`, componentwise.
    fn negligible(term: &Self, acc: &Self) -> bool;
    fn is_finite(&self) -> bool;
}

impl Summand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn negligible(term: &Self, acc: &Self) -> bool {
        term.abs() <= NEGLIGIBLE * acc.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Summand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn negligible(term: &Self, acc: &Self) -> bool {
        term.norm() <= NEGLIGIBLE * acc.norm()
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Fixed-size bundle of real sums evaluated in one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sums<const K: usize>(pub [f64; K]);

impl<const K: usize> Add for Sums<K> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const K: usize> Sub for Sums<K> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const K: usize> Mul<f64> for Sums<K> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const K: usize> Summand for Sums<K> {
    fn zero() -> Self {
        Sums([0.0; K])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    fn negligible(term: &Self, acc: &Self) -> bool {
        term.0
            .iter()
            .zip(acc.0.iter())
            .all(|(t, a)| t.abs() <= NEGLIGIBLE * a.abs())
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// A summed series with a bound on the remainder treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum<T> {
    pub value: T,
    /// For terms of constant sign that decrease in magnitude this bounds the
    /// error of the remainder estimate; otherwise it is an indicator.
    pub bound: f64,
    /// Number of terms summed directly.
    pub direct: u64,
}

/// Sums `f(n)` for integer `n = start, start + 1, ...`.
///
/// `min_direct` is the number of terms summed directly before the integral
/// remainder may take over; super-geometric series usually stop earlier once
/// their terms are negligible.
pub fn sum_from<T: Summand>(start: f64, min_direct: u64, f: impl Fn(f64) -> T) -> Result<SeriesSum<T>> {
    let mut acc = T::zero();
    let mut n = start;
    let mut k = 0u64;
    loop {
        let term = f(n);
        if !term.is_finite() {
            return Err(Error::Truncation(format!("non-finite series term at index {n}")));
        }
        acc = acc + term;
        k += 1;
        if k >= 8 && T::negligible(&term, &acc) {
            return Ok(SeriesSum { value: acc, bound: 2.0 * term.magnitude(), direct: k });
        }
        if k >= min_direct {
            break;
        }
        n += 1.0;
    }

    let last = n;
    let origin = last + 0.5;
    let correction = (f(last + 1.0) - f(last)) * (1.0 / 24.0);
    let (nodes, weights) = panel_rule();
    let mut integral = T::zero();
    let mut t0 = 0.0;
    let mut quiet = 0;
    while t0 < MAX_LOG_SPAN {
        let half = 0.5 * PANEL_WIDTH;
        let mid = t0 + half;
        let mut panel = T::zero();
        for (x, w) in nodes.iter().zip(weights) {
            let t = mid + half * x;
            let xs = origin * t.exp();
            panel = panel + f(xs) * (w * half * xs);
        }
        if !panel.is_finite() {
            return Err(Error::Truncation(format!(
                "non-finite tail integrand beyond index {last}"
            )));
        }
        integral = integral + panel;
        t0 += PANEL_WIDTH;
        let total = acc + integral;
        if T::negligible(&panel, &total) || panel.magnitude() == 0.0 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(SeriesSum {
                    value: acc + integral + correction,
                    bound: f(origin).magnitude() + correction.magnitude(),
                    direct: k,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Truncation(format!(
        "series tail beyond index {last} did not converge within e^{MAX_LOG_SPAN} times the start"
    )))
}

/// `ln(1 + z)` accurate for small complex `z`.
pub fn ln_1p_complex(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        // Alternating series; four terms reach machine precision here.
        let z2 = z * z;
        z - z2 * 0.5 + z2 * z * (1.0 / 3.0) - z2 * z2 * 0.25
    } else {
        (Complex64::new(1.0, 0.0) + z).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn basel_sum_through_integral_remainder() {
        let s = sum_from(1.0, 1024, |x: f64| 1.0 / (x * x)).unwrap();
        assert!((s.value - PI * PI / 6.0).abs() < 1e-13, "{}", s.value - PI * PI / 6.0);
        assert_eq!(s.direct, 1024);
        assert!(s.bound < 1e-6);
    }

    #[test]
    fn slowly_convergent_power_series() {
        // ζ(1.5) = 2.612375348685488...
        let s = sum_from(1.0, 1024, |x: f64| x.powf(-1.5)).unwrap();
        assert!((s.value - 2.612_375_348_685_488).abs() < 1e-11, "{}", s.value);
    }

    #[test]
    fn geometric_series_stops_directly() {
        let s = sum_from(0.0, 1024, |x: f64| (-x).exp()).unwrap();
        let exact = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((s.value - exact).abs() < 1e-15);
        assert!(s.direct < 100);
    }

    #[test]
    fn bundles_sum_componentwise() {
        let s = sum_from(1.0, 1024, |x: f64| Sums([1.0 / (x * x), (-x).exp()])).unwrap();
        assert!((s.value.0[0] - PI * PI / 6.0).abs() < 1e-13);
        assert!((s.value.0[1] - 1.0 / (1.0f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn complex_terms() {
        let z = Complex64::new(0.0, 1.0);
        let s = sum_from(1.0, 1024, |x: f64| z / (x * x)).unwrap();
        assert!((s.value.im - PI * PI / 6.0).abs() < 1e-13);
        assert!(s.value.re.abs() < 1e-15);
    }

    #[test]
    fn small_argument_log() {
        let z = Complex64::new(1e-6, -2e-6);
        let w = ln_1p_complex(z);
        // exp(w) - 1 by its own series must give z back.
        let back = w + w * w * 0.5 + w * w * w * (1.0 / 6.0) + w * w * w * w * (1.0 / 24.0);
        assert!((back - z).norm() < 1e-22);
        let direct = Complex64::new(1.0 + 1e-6, -2e-6).ln();
        assert!((w - direct).norm() < 1e-15);
    }
}
