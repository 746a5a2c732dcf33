//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to
//! stderr (uncaptured) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallball::comparison::{exact_ratio_check, li_product, loglevel_ratio};
use smallball::exactdist::{cdf_inversion, cdf_monte_carlo};
use smallball::saddle::{laplace_functionals, log_small_ball_estimate, small_ball_estimate};
use smallball::slowvary::{elliptic_k, frak_c, rc_alpha_log_asymp, RcAlphaParams};
use smallball::spectra::{
    catalog, check_growth_condition, nystrom_spectrum, CatalogParams, CountingFunction, Kernel, KernelSpec,
};
use smallball::{Spectrum, TailModel};

fn report(id: &str, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{verdict}] {id} {title}: {detail}");
}

fn brownian() -> Spectrum {
    catalog("brownian", &CatalogParams::default()).unwrap()
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

#[test]
fn a01_closed_form_cdf_oracles() {
    let t = Instant::now();
    let chi = Spectrum::explicit(vec![1.0]).unwrap();
    let exp = Spectrum::explicit(vec![0.5, 0.5]).unwrap();
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 2.0] {
        let p1 = cdf_inversion(&chi, r, 1e-10).unwrap().probability;
        worst = worst.max((p1 - libm::erf((r / 2.0f64).sqrt())).abs());
        let p2 = cdf_inversion(&exp, r, 1e-10).unwrap().probability;
        worst = worst.max((p2 - (1.0 - (-r as f64).exp())).abs());
    }
    let elapsed = t.elapsed();
    let pass = worst <= 1e-8 && within(elapsed, 1);
    report("A1", "closed-form CDF oracles", pass, &format!("max abs err {worst:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn a02_monte_carlo_agrees_with_inversion() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let values: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..1.0)).collect();
        let s = Spectrum::explicit(values.clone()).unwrap();
        let total: f64 = values.iter().sum();
        let r = total * rng.random_range(0.2..1.5);
        let inv = cdf_inversion(&s, r, 1e-10).unwrap();
        let mc = cdf_monte_carlo(&s, r, 1_000_000, 1000 + k).unwrap();
        let combined = (mc.err * mc.err + inv.err * inv.err).sqrt();
        worst = worst.max((mc.probability - inv.probability).abs() / combined);
    }
    let elapsed = t.elapsed();
    let pass = worst <= 3.0 && within(elapsed, 30);
    report("A2", "Monte Carlo vs inversion", pass, &format!("max |diff|/se {worst:.2}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn a03_nystrom_brownian_kernel() {
    let t = Instant::now();
    let s = nystrom_spectrum(&KernelSpec::new(Kernel::Brownian, 0.0, 1.0, 200), 200).unwrap();
    let worst = (1..=5u64)
        .map(|n| {
            let exact = 1.0 / ((n as f64 - 0.5).powi(2) * PI * PI);
            (s.eigenvalue(n) - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let trace: f64 = s.head().iter().sum();
    let elapsed = t.elapsed();
    let top_ok = worst <= 1e-4;
    let trace_ok = (trace - 0.5).abs() <= 1e-6;
    let pass = top_ok && trace_ok && within(elapsed, 5);
    report(
        "A3",
        "Nyström on min(s,t)",
        pass,
        &format!("top-5 max rel err {worst:.2e} (ok={top_ok}), eigenvalue sum {trace:.9} (ok={trace_ok}), {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn a04_saddle_formula_against_inversion() {
    let t = Instant::now();
    let b = brownian();
    let ratios: Vec<f64> = [0.2f64, 0.1, 0.05]
        .iter()
        .map(|e| {
            let r = e * e;
            small_ball_estimate(&b, r).unwrap().value / cdf_inversion(&b, r, 1e-12).unwrap().probability
        })
        .collect();
    let elapsed = t.elapsed();
    let gaps: Vec<f64> = ratios.iter().map(|q| (q - 1.0).abs()).collect();
    let pass = (0.8..=1.2).contains(&ratios[2]) && gaps.windows(2).all(|w| w[1] < w[0]) && within(elapsed, 60);
    report("A4", "saddle estimate vs exact CDF", pass, &format!("ratios {ratios:.4?}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn a05_brownian_log_asymptotics() {
    let b = brownian();
    let scaled: Vec<f64> = [0.2f64, 0.1, 0.05]
        .iter()
        .map(|e| 8.0 * e * e * log_small_ball_estimate(&b, e * e).unwrap())
        .collect();
    let last = scaled[2];
    let trend = scaled.windows(2).all(|w| (w[1] + 1.0).abs() < (w[0] + 1.0).abs());
    let pass = (-1.15..=-0.85).contains(&last) && trend;
    report("A5", "Brownian 8ε² ln P", pass, &format!("8ε²·ln P at ε = 0.2, 0.1, 0.05: {scaled:.4?}"));
    assert!(pass);
}

fn inv_square() -> Spectrum {
    Spectrum::parametric(TailModel::power(1.0, 2.0)).unwrap()
}

fn inv_square_plus_one() -> Spectrum {
    Spectrum::parametric(TailModel::Power { scale: 1.0, exponent: 2.0, shift: 0.0, offset: 1.0 }).unwrap()
}

#[test]
fn a06_convergent_product_comparison() {
    let (a, b) = (inv_square(), inv_square_plus_one());
    let p = li_product(&a, &b).unwrap().value().unwrap();
    let exact = PI.sinh() / PI;
    let report_ = exact_ratio_check(&a, &b, &[1e-2, 1e-3, 1e-4]).unwrap();
    let last = report_.rows[2].exact_ratio;
    let pass = (p - exact).abs() <= 1e-6
        && (last - p.sqrt()).abs() <= 0.02 * p.sqrt()
        && report_.exact_trend_decreasing();
    let ratios: Vec<f64> = report_.rows.iter().map(|r| r.exact_ratio).collect();
    report(
        "A6",
        "product constant and exact ratio",
        pass,
        &format!("P = {p:.9} (sinh π/π = {exact:.9}), ratios {ratios:.5?} vs √P = {:.5}", p.sqrt()),
    );
    assert!(pass);
}

#[test]
fn a07_log_level_comparison_with_divergent_product() {
    let a = Spectrum::parametric(TailModel::stretched_exp(1.0 / PI, 1.0)).unwrap();
    let b = Spectrum::parametric(TailModel::StretchedExp { scale: 2.0, c: 1.0 / PI, alpha: 1.0 }).unwrap();
    let rep = loglevel_ratio(&a, &b, &[1e-3, 1e-6, 1e-9]).unwrap();
    let ratios: Vec<f64> = rep.rows.iter().map(|r| r.log_ratio).collect();
    let bound_ok = (0.95..=1.05).contains(&ratios[1]);
    let trend_ok = rep.log_trend_nonincreasing();
    let divergent = rep.product.value().is_none();
    let pass = bound_ok && trend_ok && divergent;
    report(
        "A7",
        "log-level comparison, e^(-n) vs 2e^(-n)",
        pass,
        &format!("log ratios {ratios:.4?} at r = 1e-3, 1e-6, 1e-9 (in band at 1e-6: {bound_ok}, trend: {trend_ok}, product divergent: {divergent})"),
    );
    assert!(pass);
}

#[test]
fn a08_slowly_varying_closed_form_vs_saddle() {
    let s = Spectrum::parametric(TailModel::stretched_exp(2.0, 0.5)).unwrap();
    let params = RcAlphaParams::new(2.0, 0.5).unwrap();
    let gaps: Vec<(f64, f64, f64)> = [1e-5f64, 1e-7]
        .iter()
        .map(|&e| {
            let saddle = log_small_ball_estimate(&s, e * e).unwrap();
            let closed = rc_alpha_log_asymp(params, e).unwrap();
            (saddle, closed, (saddle - closed).abs() / closed.abs())
        })
        .collect();
    let pass = gaps[0].2 <= 0.2 && gaps[1].2 < gaps[0].2;
    report(
        "A8",
        "exp(-2√(πn)) saddle vs closed form",
        pass,
        &format!(
            "ε = 1e-5: {:.1} vs {:.1} (gap {:.1}%); ε = 1e-7: {:.1} vs {:.1} (gap {:.1}%)",
            gaps[0].0,
            gaps[0].1,
            100.0 * gaps[0].2,
            gaps[1].0,
            gaps[1].1,
            100.0 * gaps[1].2
        ),
    );
    assert!(pass);
}

#[test]
fn a09_elliptic_constants() {
    let k0 = elliptic_k(0.0).unwrap();
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let agm = elliptic_k(k).unwrap();
    // Independent oracle: Gauss–Legendre on the defining integral, whose
    // integrand is analytic on [0, π/2].
    let (x, w) = smallball::quad::gauss_legendre_on(64, 0.0, PI / 2.0);
    let quad: f64 = x.iter().zip(&w).map(|(t, w)| w / (1.0 - k * k * t.sin().powi(2)).sqrt()).sum();
    let sym = frak_c(PI / (2.0 * (1.0 + 2f64.sqrt()).ln())).unwrap();
    let pass = (k0 - PI / 2.0).abs() <= 1e-14
        && (agm - quad).abs() <= 1e-10
        && (agm - 1.854_074_677_3).abs() <= 1e-10
        && (sym - 1.0).abs() <= 1e-10;
    report("A9", "elliptic constants", pass, &format!("K(0) = {k0}, K(1/√2) = {agm} (quad {quad}), 𝔊 = {sym}"));
    assert!(pass);
}

#[test]
fn a10_gauss_kernel_counting() {
    let s = nystrom_spectrum(&KernelSpec::new(Kernel::Gauss { c: 1.0 }, 0.0, 1.0, 200), 200).unwrap();
    let mut table = String::from("lambda,count,asymptotic,ratio\n");
    for k in 2..=12 {
        let lambda = 10f64.powi(-k);
        let l = (1.0 / lambda).ln();
        let asym = l / l.ln();
        let count = s.counting(lambda).unwrap() as f64;
        table.push_str(&format!("{lambda:e},{count},{asym},{}\n", count / asym));
    }
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(dir.join("gauss_kernel_counting.csv"), &table).unwrap();
    let l = 1e10f64.ln();
    let asym = l / l.ln();
    let count = s.counting(1e-10).unwrap() as f64;
    let ratio = count / asym;
    let pass = (0.5..=2.0).contains(&ratio);
    report(
        "A10",
        "Gaussian-kernel counting vs ln/lnln",
        pass,
        &format!("N(1e-10) = {count}, ln/lnln = {asym:.3}, ratio {ratio:.3}; table in {}", dir.display()),
    );
    assert!(pass);
}

#[test]
fn a11_invariant_suites() {
    let spectra = [
        brownian(),
        inv_square(),
        Spectrum::parametric(TailModel::stretched_exp(2.0, 0.5)).unwrap(),
        Spectrum::explicit(vec![1.0, 0.5, 0.1]).unwrap(),
    ];
    let mut fd_worst: f64 = 0.0;
    for s in &spectra {
        for u in [0.1, 1.0, 10.0, 1e3, 1e5] {
            let h = 1e-5 * u;
            let (lo, mid, hi) = (
                laplace_functionals(s, u - h).unwrap(),
                laplace_functionals(s, u).unwrap(),
                laplace_functionals(s, u + h).unwrap(),
            );
            let d1 = (hi.l - lo.l) / (2.0 * h);
            let d2 = (hi.l1 - lo.l1) / (2.0 * h);
            fd_worst = fd_worst.max(((d1 - mid.l1) / mid.l1).abs()).max(((d2 - mid.l2) / mid.l2).abs());
        }
    }
    let fd_ok = fd_worst <= 1e-6;

    let mut scale_worst: f64 = 0.0;
    let base = Spectrum::explicit(vec![1.0, 0.6, 0.3, 0.1]).unwrap();
    for c in [0.1, 10.0] {
        let scaled = base.scaled(c).unwrap();
        for r in [0.1, 0.5, 1.5] {
            let p = cdf_inversion(&base, r, 1e-10).unwrap().probability;
            let q = cdf_inversion(&scaled, c * r, 1e-10).unwrap().probability;
            scale_worst = scale_worst.max((p - q).abs() / 2e-10);
            let e = small_ball_estimate(&base, r).unwrap().value;
            let f = small_ball_estimate(&scaled, c * r).unwrap().value;
            scale_worst = scale_worst.max((e - f).abs() / (1e-10 * e));
        }
    }
    let scale_ok = scale_worst <= 1.0;

    let x_grid: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
    let empirical = check_growth_condition(&CountingFunction::Empirical(inv_square()), &[4.0], &x_grid).unwrap();
    let closed = check_growth_condition(&CountingFunction::Power { coef: 1.0, order: -0.5 }, &[4.0], &x_grid).unwrap();
    let last = empirical.rows.last().unwrap().ratio;
    let growth_ok = (last - 2.0).abs() <= 0.02 && closed.rows.iter().all(|r| (r.ratio - 2.0).abs() <= 0.02);

    let pass = fd_ok && scale_ok && growth_ok;
    report(
        "A11",
        "invariant suites",
        pass,
        &format!("finite differences {fd_worst:.1e}, scale invariance {scale_worst:.2} of budget, growth ratio {last:.5}"),
    );
    assert!(pass);
}
