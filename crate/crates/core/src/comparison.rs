//! Comparison of small-ball probabilities for two spectra `λₙ` (a) and
//! `λ̃ₙ` (b).
//!
//! At the exact level, `P̃(r)/P(r) → 𝒫^(1/2)` when `𝒫 = Π λₙ/λ̃ₙ` converges.
//! At the logarithmic level, `ln P̃(r)/ln P(r) → 1` whenever the counting
//! functions are equivalent and the growth condition on `𝓜` holds, which
//! covers pairs such as `e^(−n)` and `2e^(−n)` where the product diverges.
//! Ratios are always `b` over `a`.

use serde::Serialize;

use crate::error::{usage, Result};
use crate::exactdist::cdf_inversion;
use crate::saddle::{log_small_ball_estimate, small_ball_estimate};
use crate::series::sum_from;
use crate::spectra::{check_growth_condition, CountingFunction, Spectrum, TailModel, Verdict};
use crate::table::{fmt_f64, CsvRow};

/// Terms of `ln(λₙ/λ̃ₙ)` summed directly before the integral remainder.
const PRODUCT_DIRECT: u64 = 10_000;

/// Smallest probability at which the inversion cross-check is run.
const CROSS_CHECK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LiProduct {
    Converges { value: f64, remainder_bound: f64 },
    Diverges { reason: String },
}

impl LiProduct {
    pub fn value(&self) -> Option<f64> {
        match self {
            LiProduct::Converges { value, .. } => Some(*value),
            LiProduct::Diverges { .. } => None,
        }
    }

    /// One-line summary used as the CSV header comment.
    pub fn header_line(&self) -> String {
        match self {
            LiProduct::Converges { value, remainder_bound } => {
                format!("P: {} remainder_bound: {}", fmt_f64(*value), fmt_f64(*remainder_bound))
            }
            LiProduct::Diverges { reason } => format!("P: divergent ({reason})"),
        }
    }
}

/// `ln(a(x)/b(x))` for tails already known to be compatible, written so
/// that the tiny differences far out keep their relative accuracy.
fn tail_log_ratio(a: &TailModel, b: &TailModel, x: f64) -> f64 {
    match (a, b) {
        (
            TailModel::Power { exponent, shift, offset: oa, .. },
            TailModel::Power { offset: ob, .. },
        ) => {
            let m = (x + shift).powf(-exponent);
            (ob * m).ln_1p() - (oa * m).ln_1p()
        }
        _ => 0.0,
    }
}

/// `𝒫 = Π λₙ/λ̃ₙ`, or a divergence verdict when `Σ|ln(λₙ/λ̃ₙ)| = ∞`.
pub fn li_product(a: &Spectrum, b: &Spectrum) -> Result<LiProduct> {
    match (a.len(), b.len()) {
        (Some(n), Some(m)) => {
            if n != m {
                return Err(usage(format!("finite spectra must have equal lengths, got {n} and {m}")));
            }
            let log: f64 = a.head().iter().zip(b.head()).map(|(x, y)| (x / y).ln()).sum();
            return Ok(LiProduct::Converges { value: log.exp(), remainder_bound: 0.0 });
        }
        (None, None) => {}
        _ => return Err(usage("cannot form the product of a finite and an infinite spectrum")),
    }
    let (ta, tb) = (a.tail().expect("infinite"), b.tail().expect("infinite"));
    if a.tails_product_compatible(b) != Some(true) {
        return Ok(LiProduct::Diverges {
            reason: format!("ln(λₙ/λ̃ₙ) is not summable for tails {ta:?} and {tb:?}"),
        });
    }
    let head_len = a.head().len().max(b.head().len()) as u64;
    let head: f64 = (1..=head_len).map(|n| (a.eigenvalue(n) / b.eigenvalue(n)).ln()).sum();
    let tail = sum_from(head_len as f64 + 1.0, PRODUCT_DIRECT, |x| tail_log_ratio(ta, tb, x))?;
    let log = head + tail.value;
    let value = log.exp();
    Ok(LiProduct::Converges { value, remainder_bound: value * tail.bound.exp_m1().abs() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub r: f64,
    #[serde(rename = "P_a")]
    pub p_a: f64,
    #[serde(rename = "P_b")]
    pub p_b: f64,
    pub exact_ratio: f64,
    #[serde(rename = "logP_a")]
    pub log_p_a: f64,
    #[serde(rename = "logP_b")]
    pub log_p_b: f64,
    pub log_ratio: f64,
    /// `P_b/P_a` from the exact CDF where both probabilities allow it.
    pub inversion_ratio: Option<f64>,
}

impl CsvRow for ComparisonRow {
    fn header() -> &'static [&'static str] {
        &["r", "P_a", "P_b", "exact_ratio", "logP_a", "logP_b", "log_ratio"]
    }
    fn record(&self) -> Vec<String> {
        [self.r, self.p_a, self.p_b, self.exact_ratio, self.log_p_a, self.log_p_b, self.log_ratio]
            .iter()
            .map(|v| fmt_f64(*v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub product: LiProduct,
    pub rows: Vec<ComparisonRow>,
    /// Method behind the exact and log columns.
    pub exact_method: &'static str,
    pub log_method: &'static str,
    /// Set when the growth check on `a`'s counting function fails; the
    /// numbers are still computed.
    pub growth_warning: bool,
}

impl ComparisonReport {
    /// `|exact_ratio − 𝒫^(1/2)|` strictly decreasing along the grid.
    pub fn exact_trend_decreasing(&self) -> bool {
        let Some(p) = self.product.value() else { return false };
        let gaps: Vec<f64> = self.rows.iter().map(|row| (row.exact_ratio - p.sqrt()).abs()).collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }

    /// `|log_ratio − 1|` non-increasing along the grid.
    pub fn log_trend_nonincreasing(&self) -> bool {
        let gaps: Vec<f64> = self.rows.iter().map(|row| (row.log_ratio - 1.0).abs()).collect();
        gaps.windows(2).all(|w| w[1] <= w[0])
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(usage("r grid is empty"));
    }
    if r_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(usage("r grid must be strictly decreasing"));
    }
    Ok(())
}

/// Heuristic growth gate on the counting function of `a`.
fn growth_fails(a: &Spectrum) -> Result<bool> {
    let top = a.leading();
    let x_grid: Vec<f64> = (1..=12).map(|k| top * 10f64.powi(-k)).collect();
    let report = check_growth_condition(&CountingFunction::Empirical(a.clone()), &[2.0, 4.0], &x_grid)?;
    Ok(report.verdict == Verdict::Fail)
}

fn row(a: &Spectrum, b: &Spectrum, r: f64) -> Result<ComparisonRow> {
    let (ea, eb) = (small_ball_estimate(a, r)?, small_ball_estimate(b, r)?);
    let (la, lb) = (log_small_ball_estimate(a, r)?, log_small_ball_estimate(b, r)?);
    let inversion_ratio = if ea.value >= CROSS_CHECK_FLOOR && eb.value >= CROSS_CHECK_FLOOR {
        let pa = cdf_inversion(a, r, 1e-12)?.probability;
        let pb = cdf_inversion(b, r, 1e-12)?.probability;
        Some(pb / pa)
    } else {
        None
    };
    Ok(ComparisonRow {
        r,
        p_a: ea.value,
        p_b: eb.value,
        exact_ratio: (eb.log_value - ea.log_value).exp(),
        log_p_a: la,
        log_p_b: lb,
        log_ratio: lb / la,
        inversion_ratio,
    })
}

/// Both comparisons on one grid: saddle estimates `P_b/P_a` against
/// `𝒫^(1/2)`, and `ln P_b / ln P_a` against 1.
pub fn compare(a: &Spectrum, b: &Spectrum, r_grid: &[f64]) -> Result<ComparisonReport> {
    check_grid(r_grid)?;
    let product = li_product(a, b)?;
    let rows = r_grid.iter().map(|&r| row(a, b, r)).collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        product,
        rows,
        exact_method: "saddle",
        log_method: "log_saddle",
        growth_warning: growth_fails(a)?,
    })
}

/// Exact-level comparison; see [`compare`].
pub fn exact_ratio_check(a: &Spectrum, b: &Spectrum, r_grid: &[f64]) -> Result<ComparisonReport> {
    compare(a, b, r_grid)
}

/// Log-level comparison; see [`compare`]. The growth gate only raises
/// [`ComparisonReport::growth_warning`].
pub fn loglevel_ratio(a: &Spectrum, b: &Spectrum, r_grid: &[f64]) -> Result<ComparisonReport> {
    compare(a, b, r_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn inv_square() -> Spectrum {
        Spectrum::parametric(TailModel::power(1.0, 2.0)).unwrap()
    }

    fn inv_square_plus_one() -> Spectrum {
        Spectrum::parametric(TailModel::Power { scale: 1.0, exponent: 2.0, shift: 0.0, offset: 1.0 }).unwrap()
    }

    #[test]
    fn sinh_product() {
        let p = li_product(&inv_square(), &inv_square_plus_one()).unwrap();
        match p {
            LiProduct::Converges { value, remainder_bound } => {
                let exact = PI.sinh() / PI;
                assert!((value - exact).abs() < 1e-9, "{value} vs {exact}");
                assert!(remainder_bound <= 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_spectra() {
        let s = inv_square();
        assert_eq!(li_product(&s, &s).unwrap().value(), Some(1.0));
        let f = Spectrum::explicit(vec![1.0, 0.2]).unwrap();
        assert_eq!(li_product(&f, &f).unwrap().value(), Some(1.0));
        let rep = compare(&s, &s, &[1e-2, 1e-3]).unwrap();
        assert!(rep.rows.iter().all(|r| r.exact_ratio == 1.0 && r.log_ratio == 1.0), "{rep:?}");
    }

    #[test]
    fn constant_ratio_diverges() {
        let a = Spectrum::parametric(TailModel::stretched_exp(1.0 / PI, 1.0)).unwrap();
        let b = Spectrum::parametric(TailModel::StretchedExp { scale: 2.0, c: 1.0 / PI, alpha: 1.0 }).unwrap();
        assert!(matches!(li_product(&a, &b).unwrap(), LiProduct::Diverges { .. }));
        let c = Spectrum::parametric(TailModel::power(3.0, 2.0)).unwrap();
        assert!(matches!(li_product(&inv_square(), &c).unwrap(), LiProduct::Diverges { .. }));
    }

    #[test]
    fn mismatched_lengths() {
        let a = Spectrum::explicit(vec![1.0]).unwrap();
        let b = Spectrum::explicit(vec![1.0, 0.5]).unwrap();
        assert!(matches!(li_product(&a, &b), Err(crate::Error::Usage(_))));
        assert!(matches!(li_product(&a, &inv_square()), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn swap_inverts() {
        let (a, b) = (inv_square(), inv_square_plus_one());
        let p = li_product(&a, &b).unwrap().value().unwrap();
        let q = li_product(&b, &a).unwrap().value().unwrap();
        assert!((p * q - 1.0).abs() < 1e-13);
        let grid = [1e-2, 1e-3];
        let ab = compare(&a, &b, &grid).unwrap();
        let ba = compare(&b, &a, &grid).unwrap();
        for (x, y) in ab.rows.iter().zip(&ba.rows) {
            assert!((x.exact_ratio * y.exact_ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_must_decrease() {
        let s = inv_square();
        assert!(compare(&s, &s, &[1e-3, 1e-2]).is_err());
        assert!(compare(&s, &s, &[]).is_err());
    }
}
