use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::Spectrum;
use crate::error::{domain, Error, Result};
use crate::quad::gauss_legendre_on;

/// Covariance kernels `G(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `min(s, t)`.
    Brownian,
    /// `1`, rank one.
    Constant,
    /// `C / (π(C² + (s − t)²))`.
    Cauchy { c: f64 },
    /// `exp(−(s − t)²/(4C)) / (2√(πC))`.
    Gauss { c: f64 },
    /// Values on a square grid, bilinearly interpolated. `values[i][j]` is
    /// `G(grid[i], grid[j])`.
    Tabulated { grid: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Brownian => "brownian",
            Kernel::Constant => "constant",
            Kernel::Cauchy { .. } => "cauchy",
            Kernel::Gauss { .. } => "gauss",
            Kernel::Tabulated { .. } => "tabulated",
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match self {
            Kernel::Brownian => s.min(t),
            Kernel::Constant => 1.0,
            Kernel::Cauchy { c } => c / (PI * (c * c + (s - t) * (s - t))),
            Kernel::Gauss { c } => (-(s - t) * (s - t) / (4.0 * c)).exp() / (2.0 * (PI * c).sqrt()),
            Kernel::Tabulated { grid, values } => {
                let (i, fx) = locate(grid, s);
                let (j, fy) = locate(grid, t);
                let v = |a: usize, b: usize| values[a][b];
                (1.0 - fx) * (1.0 - fy) * v(i, j)
                    + fx * (1.0 - fy) * v(i + 1, j)
                    + (1.0 - fx) * fy * v(i, j + 1)
                    + fx * fy * v(i + 1, j + 1)
            }
        }
    }

    /// `∫ₐᵇ G(x, y) dy` in closed form, for kernels whose diagonal kink
    /// limits plain Gauss–Legendre to algebraic accuracy.
    fn row_integral(&self, x: f64, a: f64, b: f64) -> Option<f64> {
        match self {
            Kernel::Brownian => Some(0.5 * (x * x - a * a) + x * (b - x)),
            _ => None,
        }
    }

    fn validate(&self, a: f64, b: f64) -> Result<()> {
        match self {
            Kernel::Brownian if a < 0.0 => {
                Err(domain(format!("min(s,t) is a covariance only on [a,b] with a ≥ 0, got a = {a}")))
            }
            Kernel::Cauchy { c } | Kernel::Gauss { c } if !(c.is_finite() && *c > 0.0) => {
                Err(domain(format!("kernel parameter C must be positive, got {c}")))
            }
            Kernel::Tabulated { grid, values } => {
                let n = grid.len();
                if n < 2 || values.len() != n || values.iter().any(|row| row.len() != n) {
                    return Err(Error::Validation("tabulated kernel needs an n×n table on n ≥ 2 grid points".into()));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Validation("tabulated kernel grid must be strictly increasing".into()));
                }
                if grid[0] > a || grid[n - 1] < b {
                    return Err(Error::Validation(format!(
                        "tabulated grid [{}, {}] does not cover the interval [{a}, {b}]",
                        grid[0],
                        grid[n - 1]
                    )));
                }
                let scale = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..n {
                    for j in 0..i {
                        if (values[i][j] - values[j][i]).abs() > 1e-12 * scale {
                            return Err(Error::Validation(format!(
                                "tabulated kernel is not symmetric at ({i}, {j}): {} vs {}",
                                values[i][j], values[j][i]
                            )));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    let i = grid.partition_point(|g| *g <= x).clamp(1, n - 1) - 1;
    let f = ((x - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, f)
}

/// Kernel on an interval with a constant weight density.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kernel: Kernel,
    pub interval: (f64, f64),
    pub weight: f64,
    pub nodes: usize,
}

impl KernelSpec {
    pub fn new(kernel: Kernel, a: f64, b: f64, nodes: usize) -> Self {
        KernelSpec { kernel, interval: (a, b), weight: 1.0, nodes }
    }
}

/// Eigenvalues of `∫ G(s, t) f(t) w dt = λ f(s)` by Gauss–Legendre Nyström
/// discretization, sorted descending.
///
/// For the Brownian kernel the quadrature error of each row is removed by a
/// diagonal correction `∫G(xᵢ, y)dy − Σⱼ G(xᵢ, xⱼ)wⱼ` (singularity
/// subtraction). It is invariant under the square-root-weight similarity.
pub fn nystrom_spectrum(spec: &KernelSpec, n_nodes: usize) -> Result<Spectrum> {
    let (a, b) = spec.interval;
    if n_nodes < 2 {
        return Err(domain(format!("Nyström needs at least 2 nodes, got {n_nodes}")));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain(format!("interval must satisfy a < b, got [{a}, {b}]")));
    }
    if !(spec.weight.is_finite() && spec.weight > 0.0) {
        return Err(domain(format!("weight density must be positive, got {}", spec.weight)));
    }
    spec.kernel.validate(a, b)?;

    let (x, w) = gauss_legendre_on(n_nodes, a, b);
    let rho = spec.weight;
    let sw: Vec<f64> = w.iter().map(|v| (v * rho).sqrt()).collect();
    let rows: Vec<Vec<f64>> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<f64> = (0..n_nodes).map(|j| sw[i] * spec.kernel.eval(x[i], x[j]) * sw[j]).collect();
            if let Some(exact) = spec.kernel.row_integral(x[i], a, b) {
                let discrete: f64 = (0..n_nodes).map(|j| spec.kernel.eval(x[i], x[j]) * w[j]).sum();
                row[i] += rho * (exact - discrete);
            }
            row
        })
        .collect();
    let mut m = DMatrix::from_fn(n_nodes, n_nodes, |i, j| rows[i][j]);
    // Exact symmetry so the solver sees a symmetric matrix bit for bit.
    for i in 0..n_nodes {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(|p, q| q.total_cmp(p));
    let top = values[0];
    if !(top > 0.0) {
        return Err(Error::NotPsd { eigenvalue: top, tolerance: 0.0 });
    }
    let tolerance = 10.0 * n_nodes as f64 * f64::EPSILON * top;
    if let Some(&low) = values.last() {
        if low < -tolerance {
            return Err(Error::NotPsd { eigenvalue: low, tolerance });
        }
    }
    values.retain(|v| *v >= 10.0 * f64::EPSILON * top);
    Spectrum::new(values, None)
}
