use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Spectrum, TailModel};
use crate::error::{usage, Result};

pub const CATALOG_NAMES: [&str; 4] = ["brownian", "power", "stretched_exp", "explicit"];

/// Parameters for [`catalog`]. Fields a family does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogParams {
    /// Number of leading eigenvalues stored explicitly.
    pub head: usize,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
    pub shift: Option<f64>,
    pub offset: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub values: Vec<f64>,
}

/// Named spectrum families.
///
/// * `brownian`: `λₙ = 1/((n − ½)²π²)`, the covariance `min(s,t)` on `[0,1]`.
/// * `power`: `λₙ = scale/((n + shift)^exponent + offset)`.
/// * `stretched_exp`: `λₙ = scale·exp(−C(πn)^α)`, whose counting function is
///   `ln^(1/α)(1/λ)/(πC^(1/α))` up to rounding.
/// * `explicit`: the given finite list.
pub fn catalog(name: &str, params: &CatalogParams) -> Result<Spectrum> {
    let tail = match name {
        "brownian" => TailModel::Power { scale: 1.0 / (PI * PI), exponent: 2.0, shift: -0.5, offset: 0.0 },
        "power" => TailModel::Power {
            scale: params.scale.unwrap_or(1.0),
            exponent: params
                .exponent
                .ok_or_else(|| usage("catalog family `power` needs `exponent`"))?,
            shift: params.shift.unwrap_or(0.0),
            offset: params.offset.unwrap_or(0.0),
        },
        "stretched_exp" => TailModel::StretchedExp {
            scale: params.scale.unwrap_or(1.0),
            c: params.c.ok_or_else(|| usage("catalog family `stretched_exp` needs `C`"))?,
            alpha: params
                .alpha
                .ok_or_else(|| usage("catalog family `stretched_exp` needs `alpha`"))?,
        },
        "explicit" => return Spectrum::explicit(params.values.clone()),
        other => {
            return Err(usage(format!(
                "unknown spectrum family `{other}`; known families: {}",
                CATALOG_NAMES.join(", ")
            )))
        }
    };
    let head: Vec<f64> = (1..=params.head as u64).map(|n| tail.value(n as f64)).collect();
    Spectrum::new(head, Some(tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn brownian_head_and_tail() {
        let b = catalog("brownian", &CatalogParams { head: 3, ..Default::default() }).unwrap();
        let expected = [4.0 / (PI * PI), 4.0 / (9.0 * PI * PI), 4.0 / (25.0 * PI * PI)];
        for (got, want) in b.head().iter().zip(expected) {
            assert!((got - want).abs() <= 1e-16 * want);
        }
        assert!(b.tail().is_some());
        assert!((b.eigenvalue(4) - 4.0 / (49.0 * PI * PI)).abs() < 1e-17);
    }

    #[test]
    fn stretched_exp_head() {
        let p = CatalogParams { head: 2, c: Some(2.0), alpha: Some(0.5), ..Default::default() };
        let s = catalog("stretched_exp", &p).unwrap();
        assert_eq!(s.head().len(), 2);
        assert!((s.head()[0] - (-2.0 * PI.sqrt()).exp()).abs() < 1e-16);
        assert!((s.head()[1] - (-2.0 * (2.0 * PI).sqrt()).exp()).abs() < 1e-17);
    }

    #[test]
    fn explicit_is_identity() {
        let p = CatalogParams { values: vec![1.0, 0.5], ..Default::default() };
        let s = catalog("explicit", &p).unwrap();
        assert_eq!(s.head(), &[1.0, 0.5]);
        assert!(s.is_finite());
    }

    #[test]
    fn unknown_family_lists_catalog() {
        match catalog("ornstein", &CatalogParams::default()) {
            Err(Error::Usage(msg)) => {
                for name in CATALOG_NAMES {
                    assert!(msg.contains(name));
                }
            }
            other => panic!("{other:?}"),
        }
    }
}
