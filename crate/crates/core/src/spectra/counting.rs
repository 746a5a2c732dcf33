use serde::Serialize;

use super::Spectrum;
use crate::error::{domain, usage, Result};
use crate::slowvary::SlowVaryingPhi;

/// `𝒩(λ)`, either counted from a spectrum or given in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum CountingFunction {
    Empirical(Spectrum),
    /// `𝒩 ≡ k`, the small-λ behaviour of a spectrum with `k` terms.
    Constant(f64),
    /// `𝒩(λ) = coef·λ^order` with `order ∈ (−1, 0)`; `λₙ = n^(−2)` gives
    /// `coef = 1`, `order = −½`.
    Power { coef: f64, order: f64 },
    Slow(SlowVaryingPhi),
}

impl CountingFunction {
    /// Upper end of the range where the closed form applies.
    pub fn lambda_max(&self) -> f64 {
        match self {
            CountingFunction::Slow(phi) => phi.lambda_max(),
            _ => f64::INFINITY,
        }
    }

    pub fn count(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(domain(format!("counting threshold must be positive, got {lambda}")));
        }
        match self {
            CountingFunction::Empirical(s) => Ok(s.counting(lambda)? as f64),
            CountingFunction::Constant(k) => Ok(*k),
            CountingFunction::Power { coef, order } => Ok(coef * lambda.powf(*order)),
            CountingFunction::Slow(phi) => phi.eval(lambda),
        }
    }

    /// `𝓜(x) = ∫₀^x 𝒩(t) dt`.
    pub fn mass(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain(format!("mass argument must be positive, got {x}")));
        }
        match self {
            CountingFunction::Empirical(s) => s.cumulative_mass(x),
            CountingFunction::Constant(k) => Ok(k * x),
            CountingFunction::Power { coef, order } => {
                if !(*order > -1.0 && *order < 0.0) {
                    return Err(domain(format!("power counting order must lie in (-1, 0), got {order}")));
                }
                Ok(coef * x.powf(1.0 + order) / (1.0 + order))
            }
            CountingFunction::Slow(phi) => phi.mass(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub h: f64,
    pub x: f64,
    pub ratio: f64,
}

/// Ratio table `𝓜(hx)/𝓜(x)` and a finite-grid verdict.
///
/// The verdict stands in for a `liminf` and is only evidence: it passes when,
/// for every `h`, the smallest ratio over the smallest third of the `x` grid
/// (at least three points) exceeds `1 + margin(h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// `(h, min ratio over the tail window, margin)` per `h`.
    pub window_minima: Vec<(f64, f64, f64)>,
    pub verdict: Verdict,
    pub heuristic: bool,
}

/// Margin demanded above 1: a hundredth of the gap `h − 1`.
fn margin(h: f64) -> f64 {
    0.01 * (h - 1.0)
}

pub fn check_growth_condition(cf: &CountingFunction, h_grid: &[f64], x_grid: &[f64]) -> Result<GrowthReport> {
    if h_grid.is_empty() || x_grid.is_empty() {
        return Err(usage("growth check needs non-empty h and x grids"));
    }
    if let Some(h) = h_grid.iter().find(|h| !(**h > 1.0 && h.is_finite())) {
        return Err(domain(format!("growth factors must exceed 1, got {h}")));
    }
    if x_grid.iter().any(|x| !(*x > 0.0)) || x_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("x grid must be positive and strictly decreasing"));
    }
    let window = (x_grid.len() / 3).max(3).min(x_grid.len());
    let mut rows = Vec::with_capacity(h_grid.len() * x_grid.len());
    let mut window_minima = Vec::with_capacity(h_grid.len());
    let mut verdict = Verdict::Pass;
    for &h in h_grid {
        let mut min_tail = f64::INFINITY;
        for (i, &x) in x_grid.iter().enumerate() {
            if h * x > cf.lambda_max() {
                return Err(domain(format!(
                    "h·x = {} exceeds the counting function's validity bound {}",
                    h * x,
                    cf.lambda_max()
                )));
            }
            let ratio = cf.mass(h * x)? / cf.mass(x)?;
            rows.push(GrowthRow { h, x, ratio });
            if i >= x_grid.len() - window {
                min_tail = min_tail.min(ratio);
            }
        }
        let m = margin(h);
        if !(min_tail > 1.0 + m) {
            verdict = Verdict::Fail;
        }
        window_minima.push((h, min_tail, m));
    }
    Ok(GrowthReport { rows, window_minima, verdict, heuristic: true })
}
