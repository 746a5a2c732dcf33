//! Distribution function of `Q = Σ λₙξₙ²` by numerical inversion of its
//! Laplace transform, and by Monte Carlo simulation.
//!
//! The inversion runs along the vertical line through the real saddle point
//! `c` of `L(s) + sr`:
//!
//! ```text
//! F(r)       = e^{L(c)+cr}/(π c)  ∫₀^∞ Re g(y) dy     (c > 0)
//! 1 − F(r)   = e^{L(c)+cr}/(π|c|) ∫₀^∞ Re g(y) dy     (c < 0)
//! g(y)       = exp(L(c+iy) − L(c) + iyr) · c/(c+iy)
//! ```
//!
//! Factoring out `e^{L(c)+cr}` keeps relative accuracy deep in the lower
//! tail, where `½ − ∫` forms lose everything to cancellation. `L(s)` is
//! summed over the whole spectrum, tail model included.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, usage, Error, Result};
use crate::quad::{integrate, wynn_epsilon};
use crate::saddle::saddle_signed;
use crate::series::ln_1p_complex;
use crate::spectra::Spectrum;
use crate::table::{fmt_f64, CsvRow};

pub const CDF_HEADER: &[&str] = &["r", "probability", "method", "err", "truncation_N", "tail_mass"];

/// Samples per Monte Carlo chunk; chunk `k` draws from stream `k` of the
/// seeded generator, so results do not depend on the thread count.
pub const CHUNK: usize = 65_536;

/// Largest truncation index the Monte Carlo path accepts.
pub const MAX_TRUNCATION: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CdfMethod {
    Inversion,
    MonteCarlo,
}

impl CdfMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            CdfMethod::Inversion => "inversion",
            CdfMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    /// Eigenvalues used explicitly.
    pub index: u64,
    /// `Σ_{n > index} λₙ` left out of the computation.
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfResult {
    pub r: f64,
    pub probability: f64,
    pub method: CdfMethod,
    pub err: f64,
    pub truncation: Truncation,
}

impl CsvRow for CdfResult {
    fn header() -> &'static [&'static str] {
        CDF_HEADER
    }
    fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.r),
            fmt_f64(self.probability),
            self.method.tag().into(),
            fmt_f64(self.err),
            self.truncation.index.to_string(),
            fmt_f64(self.truncation.tail_mass),
        ]
    }
}

fn complex_l(spectrum: &Spectrum, s: Complex64) -> Result<Complex64> {
    let two_s = s * 2.0;
    Ok(spectrum.sum_map(|lam| ln_1p_complex(two_s * lam) * -0.5)?.value)
}

const MAX_PANELS: usize = 2000;
const RELATIVE: f64 = 1e-10;

/// `P{Q ≤ r}` to absolute error `tol` (at least `1e−12`).
pub fn cdf_inversion(spectrum: &Spectrum, r: f64, tol: f64) -> Result<CdfResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("threshold r must be positive, got {r}")));
    }
    if !(tol >= 1e-12) {
        return Err(domain(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    let (saddle, f0) = saddle_signed(spectrum, r)?;
    // Too close to the mean the pole at 0 dominates; move right of it.
    let c_floor = 0.5 / functionals_at_zero_sd(spectrum)?;
    let (c, lc) = if saddle.abs() < c_floor {
        (c_floor, crate::saddle::laplace_functionals(spectrum, c_floor)?)
    } else {
        (saddle, f0)
    };
    let log_scale = lc.l + c * r;
    if log_scale < -708.0 {
        return Err(Error::PrecisionLimit(format!(
            "P{{Q ≤ {r}}} ≈ e^{log_scale:.1} underflows double precision; use the saddle estimate of ln P"
        )));
    }
    let prefactor = log_scale.exp() / (std::f64::consts::PI * c.abs());
    // Absolute `tol` on P, and never worse than 1e−10 relative: near the
    // saddle the integral is about √(π/(2L″)).
    let scale = (std::f64::consts::FRAC_PI_2 / lc.l2).sqrt();
    let target = (tol / prefactor).min(RELATIVE * scale);

    let g = |y: f64| -> f64 {
        let s = Complex64::new(c, y);
        match complex_l(spectrum, s) {
            Ok(l) => {
                let e = (l - lc.l + Complex64::new(0.0, y * r)).exp();
                (e * c / s).re
            }
            Err(_) => f64::NAN,
        }
    };
    let envelope = |y: f64| -> f64 {
        let s = Complex64::new(c, y);
        complex_l(spectrum, s).map(|l| (l.re - lc.l).exp() * c.abs() / s.norm()).unwrap_or(f64::NAN)
    };

    let width = 1.0 / lc.l2.sqrt();
    let half_period = std::f64::consts::PI / r;
    let mut a = 0.0;
    let mut step = 0.5 * width.min(c.abs());
    let mut total = 0.0;
    let mut err = 0.0;
    let mut partial: Vec<f64> = Vec::new();
    let mut extrapolated: Option<(f64, f64)> = None;
    for _ in 0..MAX_PANELS {
        let b = a + step;
        let piece = integrate(g, a, b, 0.05 * target, 1e-13);
        if !piece.value.is_finite() {
            return Err(Error::Truncation(format!("inversion integrand is not finite on [{a}, {b}]")));
        }
        total += piece.value;
        err += piece.err;
        a = b;
        let env = envelope(a);
        // Decayed: the rest is below the target even without cancellation.
        if env * a < 1e-3 * target && piece.value.abs() < 1e-2 * target {
            extrapolated = Some((total, env * a));
            break;
        }
        if step < half_period {
            step = (2.0 * step).min(half_period);
            continue;
        }
        partial.push(total);
        if partial.len() >= 12 {
            let n = partial.len();
            let w1 = wynn_epsilon(&partial[n - 10..]);
            let w2 = wynn_epsilon(&partial[n - 11..n - 1]);
            let spread = (w1 - w2).abs();
            if spread < 0.05 * target {
                extrapolated = Some((w1, spread));
                break;
            }
        }
    }
    let (integral, tail_err) = extrapolated.ok_or_else(|| {
        Error::Truncation(format!(
            "inversion integral at r = {r} did not converge within {MAX_PANELS} panels"
        ))
    })?;
    let part = prefactor * integral;
    let probability = if c > 0.0 { part } else { 1.0 - part };
    Ok(CdfResult {
        r,
        probability: probability.clamp(0.0, 1.0),
        method: CdfMethod::Inversion,
        err: prefactor * (err + tail_err),
        truncation: Truncation { index: lc.direct, tail_mass: 0.0 },
    })
}

fn functionals_at_zero_sd(spectrum: &Spectrum) -> Result<f64> {
    Ok(crate::saddle::laplace_functionals(spectrum, 0.0)?.l2.sqrt())
}

/// Head of `spectrum` long enough that the discarded mass is at most
/// `1e−3·r`.
fn truncate_for(spectrum: &Spectrum, r: f64) -> Result<(Vec<f64>, Truncation)> {
    let n = spectrum.truncation_index(1e-3 * r, MAX_TRUNCATION)?;
    if n == 0 {
        return Ok((Vec::new(), Truncation { index: 0, tail_mass: spectrum.total()? }));
    }
    let values: Vec<f64> = (1..=n).map(|k| spectrum.eigenvalue(k)).collect();
    let tail_mass = spectrum.mass_beyond(n)?;
    Ok((values, Truncation { index: n, tail_mass }))
}

fn simulate<T: Send>(
    values: &[f64],
    n_samples: usize,
    seed: u64,
    per_chunk: impl Fn(&mut dyn Iterator<Item = f64>) -> T + Sync,
) -> Vec<T> {
    let chunks = n_samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(n_samples - k * CHUNK);
            let mut it = (0..len).map(|_| {
                values.iter().fold(0.0, |acc, lam| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    acc + lam * z * z
                })
            });
            per_chunk(&mut it)
        })
        .collect()
}

/// Raw draws of `Σ λₙξₙ²` over a finite spectrum (truncate infinite ones
/// first with [`Spectrum::truncated`]).
pub fn sample_norm_squared(spectrum: &Spectrum, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(usage("number of samples must be positive"));
    }
    if !spectrum.is_finite() {
        return Err(usage("sampling needs a finite spectrum; truncate the tail first"));
    }
    let chunks = simulate(spectrum.head(), n_samples, seed, |it| it.collect::<Vec<f64>>());
    Ok(chunks.into_iter().flatten().collect())
}

/// Empirical `P{Q_N ≤ r}` with its binomial standard error.
pub fn cdf_monte_carlo(spectrum: &Spectrum, r: f64, n_samples: usize, seed: u64) -> Result<CdfResult> {
    if n_samples == 0 {
        return Err(usage("number of samples must be positive"));
    }
    if n_samples < 1000 {
        return Err(usage(format!("Monte Carlo needs at least 1000 samples, got {n_samples}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("threshold r must be positive, got {r}")));
    }
    let (values, truncation) = truncate_for(spectrum, r)?;
    let hits: usize = simulate(&values, n_samples, seed, |it| it.filter(|q| *q <= r).count())
        .into_iter()
        .sum();
    let p = hits as f64 / n_samples as f64;
    Ok(CdfResult {
        r,
        probability: p,
        method: CdfMethod::MonteCarlo,
        err: (p * (1.0 - p) / n_samples as f64).sqrt(),
        truncation,
    })
}
