//! Logarithmic small-ball asymptotics for slowly varying counting functions,
//! and the worked family of stationary processes with spectral density
//! `exp(−C|ξ|^α)`.
//!
//! When `𝒩(λ) ~ φ(λ)` with `φ` slowly varying at zero,
//!
//! ```text
//! ln P{Σ λₙξₙ² ≤ r} ~ −ψ(1/u)/2,   ψ(x) = ∫ₓ¹ φ(z) dz/z,
//! ```
//!
//! where `u = u(r)` solves `φ(1/u)/(2u) ~ r`. This module takes the exact
//! root of that relation.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::integrate;

/// Closed-form or sampled slowly varying function of `λ` near zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlowVaryingPhi {
    /// `φ ≡ c`, the counting function of a finite spectrum near zero.
    Constant { c: f64 },
    /// `φ(λ) = c·ln^β(1/λ)`.
    LogPower { c: f64, beta: f64 },
    /// `φ(λ) = c·ln(1/λ)/ln ln(1/λ)`, valid for `λ < e^(−e)`.
    LogOverLoglog { c: f64 },
    /// Piecewise-linear in `ln λ` through the samples.
    Sampled { lambda: Vec<f64>, phi: Vec<f64> },
}

impl SlowVaryingPhi {
    pub fn log_power(c: f64, beta: f64) -> Self {
        SlowVaryingPhi::LogPower { c, beta }
    }

    pub fn log_over_loglog(c: f64) -> Self {
        SlowVaryingPhi::LogOverLoglog { c }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let ok = match self {
            SlowVaryingPhi::Constant { c } | SlowVaryingPhi::LogOverLoglog { c } => pos(*c),
            SlowVaryingPhi::LogPower { c, beta } => pos(*c) && pos(*beta),
            SlowVaryingPhi::Sampled { lambda, phi } => {
                lambda.len() >= 2
                    && lambda.len() == phi.len()
                    && lambda.iter().all(|v| pos(*v))
                    && phi.iter().all(|v| pos(*v))
                    && lambda.windows(2).all(|w| w[0] < w[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid slowly varying function {self:?}")))
        }
    }

    /// Upper end of the range where the form is meaningful.
    pub fn lambda_max(&self) -> f64 {
        match self {
            SlowVaryingPhi::Constant { .. } | SlowVaryingPhi::LogPower { .. } => 1.0,
            SlowVaryingPhi::LogOverLoglog { .. } => (-E).exp(),
            SlowVaryingPhi::Sampled { lambda, .. } => lambda[lambda.len() - 1],
        }
    }

    /// Lower end of the validity range; zero for closed forms.
    pub fn lambda_min(&self) -> f64 {
        match self {
            SlowVaryingPhi::Sampled { lambda, .. } => lambda[0],
            _ => 0.0,
        }
    }

    /// `φ(λ)` without range checks.
    pub fn value(&self, lambda: f64) -> f64 {
        self.value_at_log(-lambda.ln())
    }

    /// `φ(e^(−w))`, the form the quadratures use.
    fn value_at_log(&self, w: f64) -> f64 {
        match self {
            SlowVaryingPhi::Constant { c } => *c,
            SlowVaryingPhi::LogPower { c, beta } => c * w.powf(*beta),
            SlowVaryingPhi::LogOverLoglog { c } => c * w / w.ln(),
            SlowVaryingPhi::Sampled { lambda, phi } => {
                let x = -w;
                let logs: Vec<f64> = lambda.iter().map(|v| v.ln()).collect();
                let i = logs.partition_point(|l| *l <= x).clamp(1, logs.len() - 1);
                let t = (x - logs[i - 1]) / (logs[i] - logs[i - 1]);
                phi[i - 1] + t * (phi[i] - phi[i - 1])
            }
        }
    }

    /// `φ(λ)` with the validity range enforced.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda > self.lambda_min() && lambda <= self.lambda_max()) {
            return Err(domain(format!(
                "λ = {lambda} outside the validity range ({}, {}]",
                self.lambda_min(),
                self.lambda_max()
            )));
        }
        Ok(self.value(lambda))
    }

    /// `∫₀^x φ(t) dt`, integrated in `w = ln(1/t)`.
    pub fn mass(&self, x: f64) -> Result<f64> {
        if self.lambda_min() > 0.0 {
            return Err(domain("sampled φ has no mass below its first sample"));
        }
        if !(x > 0.0 && x <= self.lambda_max()) {
            return Err(domain(format!("mass argument {x} outside (0, {}]", self.lambda_max())));
        }
        let w0 = -x.ln();
        let f = |w: f64| self.value_at_log(w) * (-w).exp();
        let mut total = 0.0;
        let mut a = w0;
        loop {
            let piece = integrate(f, a, a + 8.0, 0.0, 1e-13).value;
            total += piece;
            a += 8.0;
            if piece.abs() <= 1e-16 * total.abs() {
                break;
            }
        }
        Ok(total)
    }
}

/// `ψ(x) = ∫ₓ^top φ(z) dz/z` where `top = min(1, λ_max)`.
///
/// For `ln/lnln` the upper limit is `e^(−e)` since the form changes sign
/// above it; the difference is a constant, lower order than `ψ` itself.
pub fn psi(phi: &SlowVaryingPhi, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(domain(format!("ψ argument must lie in (0, 1], got {x}")));
    }
    if x <= phi.lambda_min() {
        return Err(domain(format!("ψ argument {x} below φ's validity floor {}", phi.lambda_min())));
    }
    let top = phi.lambda_max().min(1.0);
    if x >= top {
        return Ok(0.0);
    }
    let w = -x.ln();
    Ok(match phi {
        SlowVaryingPhi::Constant { c } => c * w,
        SlowVaryingPhi::LogPower { c, beta } => c * w.powf(beta + 1.0) / (beta + 1.0),
        _ => {
            let w_top = -top.ln();
            integrate(|s| phi.value_at_log(s), w_top, w, 1e-10, 1e-14).value
        }
    })
}

/// Exact root `u` of `φ(1/u)/(2u) = r` on the branch where the left side
/// decreases in `u`.
pub fn solve_u_slowvary(phi: &SlowVaryingPhi, r: f64) -> Result<f64> {
    phi.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("threshold r must be positive, got {r}")));
    }
    let t_lo = -phi.lambda_max().ln();
    let t_max = if phi.lambda_min() > 0.0 { -phi.lambda_min().ln() } else { 700.0 };
    let target = (2.0 * r).ln();
    // ln(φ(e^(−t))/(2e^t)) − ln r, a function of t = ln u.
    let h = |t: f64| phi.value_at_log(t).ln() - t - target;

    // Step past the rising part near the top of the validity range.
    let step = 0.25;
    let mut t = t_lo + 1e-9;
    while t + step < t_max && h(t + step) >= h(t) {
        t += step;
    }
    if h(t) < 0.0 {
        return Err(Error::OutOfRegime(format!(
            "r = {r} exceeds max φ(1/u)/(2u) on the validity range; no asymptotic root"
        )));
    }
    let mut lo = t;
    let mut hi = t + 1.0;
    while h(hi) > 0.0 {
        lo = hi;
        hi += (hi - t).max(1.0);
        if hi > t_max {
            if h(t_max) > 0.0 {
                return Err(Error::OutOfRegime(format!(
                    "r = {r} too small: the root lies below φ's validity floor"
                )));
            }
            hi = t_max;
            break;
        }
    }
    while hi - lo > 1e-13 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `−ψ(1/u(r))/2`, the logarithmic small-ball asymptotics for slowly
/// varying counting functions.
pub fn log_asymp_slowvary(phi: &SlowVaryingPhi, r: f64) -> Result<f64> {
    let u = solve_u_slowvary(phi, r)?;
    Ok(-0.5 * psi(phi, 1.0 / u)?)
}

/// `φ(cλ)/φ(λ)` along a grid, a finite witness of slow variation.
pub fn slow_variation_ratios(phi: &SlowVaryingPhi, c: f64, lambdas: &[f64]) -> Vec<f64> {
    lambdas.iter().map(|&l| phi.value(c * l) / phi.value(l)).collect()
}

/// Parameters of the process with spectral density `exp(−C|ξ|^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcAlphaParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
}

/// Which asymptotic regime an `α` falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcAlphaCase {
    #[serde(rename = "alpha<1")]
    Below,
    #[serde(rename = "alpha=1")]
    Critical,
    #[serde(rename = "alpha>1")]
    Above,
}

impl RcAlphaCase {
    pub fn label(&self) -> &'static str {
        match self {
            RcAlphaCase::Below => "alpha<1",
            RcAlphaCase::Critical => "alpha=1",
            RcAlphaCase::Above => "alpha>1",
        }
    }
}

impl RcAlphaParams {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0 && alpha.is_finite() && alpha > 0.0) {
            return Err(domain(format!("need C > 0 and alpha > 0, got C = {c}, alpha = {alpha}")));
        }
        Ok(RcAlphaParams { c, alpha })
    }

    pub fn case(&self) -> RcAlphaCase {
        if self.alpha < 1.0 {
            RcAlphaCase::Below
        } else if self.alpha == 1.0 {
            RcAlphaCase::Critical
        } else {
            RcAlphaCase::Above
        }
    }
}

/// Counting-function asymptotics `𝒩(λ) ~ φ(λ)` for the `exp(−C|ξ|^α)` family.
pub fn rc_alpha_counting(params: RcAlphaParams) -> Result<SlowVaryingPhi> {
    let RcAlphaParams { c, alpha } = RcAlphaParams::new(params.c, params.alpha)?;
    Ok(match params.case() {
        RcAlphaCase::Below => SlowVaryingPhi::log_power(1.0 / (PI * c.powf(1.0 / alpha)), 1.0 / alpha),
        RcAlphaCase::Critical => SlowVaryingPhi::log_power(1.0 / (PI * frak_c(c)?), 1.0),
        RcAlphaCase::Above => SlowVaryingPhi::log_over_loglog(1.0 / (2.0 - 2.0 / alpha)),
    })
}

/// Closed-form `ln P{‖X‖ ≤ ε}` asymptotics for the `exp(−C|ξ|^α)` family.
pub fn rc_alpha_log_asymp(params: RcAlphaParams, eps: f64) -> Result<f64> {
    let RcAlphaParams { c, alpha } = RcAlphaParams::new(params.c, params.alpha)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("ε must lie in (0, 1), got {eps}")));
    }
    let l = (1.0 / eps).ln();
    Ok(match params.case() {
        RcAlphaCase::Below => {
            -(2.0 / c).powf(1.0 / alpha) * alpha * l.powf((alpha + 1.0) / alpha) / ((alpha + 1.0) * PI)
        }
        RcAlphaCase::Critical => -l * l / (PI * frak_c(c)?),
        RcAlphaCase::Above => {
            let ll = l.ln();
            if ll <= 0.0 {
                return Err(domain(format!("ln ln(1/ε) must be positive for alpha > 1, got ε = {eps}")));
            }
            -(1.0 / (2.0 - 2.0 / alpha)) * l * l / ll
        }
    })
}

/// Complete elliptic integral of the first kind `K(k)`, modulus convention,
/// by the arithmetic–geometric mean: `K(k) = π / (2·AGM(1, √(1−k²)))`.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(k.abs() < 1.0) {
        return Err(domain(format!("elliptic modulus must satisfy |k| < 1, got {k}")));
    }
    let mut a = 1.0;
    let mut g = ((1.0 - k) * (1.0 + k)).sqrt();
    for _ in 0..64 {
        if (a - g).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = next;
    }
    Ok(PI / (2.0 * a))
}

/// `𝔊(C) = K(sech(π/2C)) / K(tanh(π/2C))`.
pub fn frak_c(c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain(format!("C must be positive, got {c}")));
    }
    let x = PI / (2.0 * c);
    Ok(elliptic_k(1.0 / x.cosh())? / elliptic_k(x.tanh())?)
}
