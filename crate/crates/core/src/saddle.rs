//! Laplace functionals of `Q = Σ λₙξₙ²` and the saddle-point small-ball
//! estimate.
//!
//! With `L(u) = −½ Σ ln(1 + 2uλₙ)` the log-Laplace transform of `Q`, the
//! saddle `u(r)` solves `L′(u) + r = 0` and
//!
//! ```text
//! P{Q ≤ r} ~ exp(L(u) + ur) / √(2π u² L″(u)),   r → 0.
//! ```

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::series::Sums;
use crate::spectra::Spectrum;
use crate::table::{fmt_f64, CsvRow};

/// `(L, L′, L″)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceFunctionals {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    /// Terms summed directly, head included.
    #[serde(skip)]
    pub direct: u64,
}

/// Evaluates the functionals at any `u` with `1 + 2uλ₁ > 0`; negative `u`
/// is used by the CDF inversion.
pub(crate) fn functionals_signed(spectrum: &Spectrum, u: f64) -> Result<LaplaceFunctionals> {
    let s = spectrum.sum_map(|lam| {
        let t = 2.0 * u * lam;
        let d = 1.0 + t;
        let q = lam / d;
        Sums([-0.5 * t.ln_1p(), -q, 2.0 * q * q])
    })?;
    let [l, l1, l2] = s.value.0;
    Ok(LaplaceFunctionals { l, l1, l2, direct: s.direct })
}

/// `L(u) = −½Σ ln(1+2uλₙ)`, `L′(u) = −Σ λₙ/(1+2uλₙ)`,
/// `L″(u) = Σ 2λₙ²/(1+2uλₙ)²`, from one pass over the spectrum.
pub fn laplace_functionals(spectrum: &Spectrum, u: f64) -> Result<LaplaceFunctionals> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(domain(format!("Laplace argument u must be non-negative, got {u}")));
    }
    functionals_signed(spectrum, u)
}

/// Solved saddle point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleState {
    pub r: f64,
    pub u: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
}

impl CsvRow for SaddleState {
    fn header() -> &'static [&'static str] {
        &["r", "u", "L", "L1", "L2"]
    }
    fn record(&self) -> Vec<String> {
        [self.r, self.u, self.l, self.l1, self.l2].iter().map(|v| fmt_f64(*v)).collect()
    }
}

const RESIDUAL: f64 = 1e-12;

/// Root of `L′(c) + r = 0` on `(lo, hi)` where the left side increases.
/// Safeguarded Newton: a Newton step leaving the bracket is replaced by
/// bisection.
fn newton_bracketed(spectrum: &Spectrum, r: f64, mut lo: f64, mut hi: f64, start: f64) -> Result<(f64, LaplaceFunctionals)> {
    let mut c = start;
    let mut f = functionals_signed(spectrum, c)?;
    for _ in 0..300 {
        let g = f.l1 + r;
        if g.abs() <= RESIDUAL * r {
            return Ok((c, f));
        }
        if g < 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let newton = c - g / f.l2;
        let next = if newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if next == c || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok((c, f));
        }
        c = next;
        f = functionals_signed(spectrum, c)?;
    }
    Ok((c, f))
}

/// Unique positive `u` with `L′(u) = −r`.
pub fn solve_saddle(spectrum: &Spectrum, r: f64) -> Result<SaddleState> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("threshold r must be positive, got {r}")));
    }
    let total = spectrum.total()?;
    if r >= total {
        return Err(Error::OutOfRegime(format!(
            "r = {r} is not below the trace Σλₙ = {total}; the saddle point is not positive"
        )));
    }
    let mut hi = 1.0 / r;
    while functionals_signed(spectrum, hi)?.l1 + r <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::OutOfRegime(format!("no saddle point found for r = {r}")));
        }
    }
    let (u, f) = newton_bracketed(spectrum, r, 0.0, hi, 0.5 * hi)?;
    Ok(SaddleState { r, u, l: f.l, l1: f.l1, l2: f.l2 })
}

/// Real root `c > −1/(2λ₁)` of `L′(c) + r = 0` for any `r > 0`; negative
/// when `r` exceeds the mean of `Q`.
pub(crate) fn saddle_signed(spectrum: &Spectrum, r: f64) -> Result<(f64, LaplaceFunctionals)> {
    let total = spectrum.total()?;
    if r < total {
        let s = solve_saddle(spectrum, r)?;
        let f = functionals_signed(spectrum, s.u)?;
        return Ok((s.u, f));
    }
    let edge = -0.5 / spectrum.leading();
    let mut gap = 0.5;
    let mut lo = edge * (1.0 - gap);
    while functionals_signed(spectrum, lo)?.l1 + r >= 0.0 {
        gap *= 0.5;
        lo = edge * (1.0 - gap);
        if gap < 1e-300 {
            return Err(Error::OutOfRegime(format!("no real saddle point for r = {r}")));
        }
    }
    newton_bracketed(spectrum, r, lo, 0.0, 0.5 * lo)
}

/// Estimate row; shares the CSV schema of [`crate::exactdist::CdfResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallEstimate {
    pub r: f64,
    /// Probability for `saddle`, `ln P` for `log_saddle`.
    pub value: f64,
    /// Natural log of the estimate; finite where `value` underflows.
    #[serde(skip)]
    pub log_value: f64,
    pub method: String,
    /// Relative residual of the saddle equation.
    pub err: f64,
    /// Terms summed directly for the functionals.
    pub terms: u64,
}

impl CsvRow for SmallBallEstimate {
    fn header() -> &'static [&'static str] {
        crate::exactdist::CDF_HEADER
    }
    fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.r),
            fmt_f64(self.value),
            self.method.clone(),
            fmt_f64(self.err),
            self.terms.to_string(),
            fmt_f64(0.0),
        ]
    }
}

fn solve_with_terms(spectrum: &Spectrum, r: f64) -> Result<(SaddleState, u64)> {
    let s = solve_saddle(spectrum, r)?;
    let terms = functionals_signed(spectrum, s.u)?.direct;
    Ok((s, terms))
}

/// `exp(L(u) + ur) / √(2π u² L″(u))` at the exact saddle.
pub fn small_ball_estimate(spectrum: &Spectrum, r: f64) -> Result<SmallBallEstimate> {
    let (s, terms) = solve_with_terms(spectrum, r)?;
    let log_value = s.l + s.u * r - 0.5 * (2.0 * std::f64::consts::PI * s.u * s.u * s.l2).ln();
    Ok(SmallBallEstimate {
        r,
        value: log_value.exp(),
        log_value,
        method: "saddle".into(),
        err: ((s.l1 + r) / r).abs(),
        terms,
    })
}

/// `L(u) + ur`, the logarithmic small-ball estimate.
pub fn log_small_ball_estimate(spectrum: &Spectrum, r: f64) -> Result<f64> {
    let s = solve_saddle(spectrum, r)?;
    Ok(s.l + s.u * r)
}

/// [`log_small_ball_estimate`] as a table row.
pub fn log_small_ball_row(spectrum: &Spectrum, r: f64) -> Result<SmallBallEstimate> {
    let (s, terms) = solve_with_terms(spectrum, r)?;
    Ok(SmallBallEstimate {
        r,
        value: s.l + s.u * r,
        log_value: s.l + s.u * r,
        method: "log_saddle".into(),
        err: ((s.l1 + r) / r).abs(),
        terms,
    })
}
