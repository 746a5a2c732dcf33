use serde::{Deserialize, Serialize};

use super::{catalog, nystrom_spectrum, CatalogParams, Kernel, KernelSpec, Spectrum, TailModel};
use crate::error::{usage, Error, Result};

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn one() -> f64 {
    1.0
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

/// On-disk description of a spectrum.
///
/// ```json
/// {"type": "explicit", "values": [1, 0.5]}
/// {"type": "power", "scale": 1, "exponent": 2}
/// {"type": "stretched_exp", "C": 2, "alpha": 0.5}
/// {"type": "kernel", "name": "gauss", "C": 1, "interval": [0, 1], "nodes": 200}
/// {"type": "catalog", "name": "brownian", "params": {"head": 10}}
/// ```
///
/// Parametric forms accept `head` (number of leading terms stored
/// explicitly) or `values` (an explicit head that replaces the model's first
/// terms). Power tails also take `shift` and `offset`:
/// `λₙ = scale/((n + shift)^exponent + offset)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSpec {
    Explicit {
        values: Vec<f64>,
    },
    Power {
        #[serde(default = "one")]
        scale: f64,
        exponent: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        offset: f64,
        #[serde(default, skip_serializing_if = "usize_is_zero")]
        head: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        values: Vec<f64>,
    },
    StretchedExp {
        #[serde(rename = "C")]
        c: f64,
        alpha: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "usize_is_zero")]
        head: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        values: Vec<f64>,
    },
    Kernel {
        name: String,
        #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default = "unit_interval")]
        interval: [f64; 2],
        nodes: usize,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        weight: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<Vec<f64>>>,
    },
    Catalog {
        name: String,
        #[serde(default)]
        params: CatalogParams,
    },
}

fn usize_is_zero(v: &usize) -> bool {
    *v == 0
}

fn with_head(tail: TailModel, head: usize, values: &[f64]) -> Result<Spectrum> {
    if !values.is_empty() {
        if head != 0 && head != values.len() {
            return Err(usage(format!("`head` = {head} disagrees with {} explicit values", values.len())));
        }
        return Spectrum::new(values.to_vec(), Some(tail));
    }
    let h: Vec<f64> = (1..=head as u64).map(|n| tail.value(n as f64)).collect();
    Spectrum::new(h, Some(tail))
}

impl SpectrumSpec {
    /// Parses JSON text; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Usage(format!(
                "malformed spectrum JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum specs always serialize")
    }

    pub fn to_spectrum(&self) -> Result<Spectrum> {
        match self {
            SpectrumSpec::Explicit { values } => Spectrum::explicit(values.clone()),
            SpectrumSpec::Power { scale, exponent, shift, offset, head, values } => with_head(
                TailModel::Power { scale: *scale, exponent: *exponent, shift: *shift, offset: *offset },
                *head,
                values,
            ),
            SpectrumSpec::StretchedExp { c, alpha, scale, head, values } => {
                with_head(TailModel::StretchedExp { scale: *scale, c: *c, alpha: *alpha }, *head, values)
            }
            SpectrumSpec::Kernel { .. } => {
                let spec = self.kernel_spec()?.expect("kernel variant");
                nystrom_spectrum(&spec, spec.nodes)
            }
            SpectrumSpec::Catalog { name, params } => catalog(name, params),
        }
    }

    /// The Nyström problem described by a `kernel` spec.
    pub fn kernel_spec(&self) -> Result<Option<KernelSpec>> {
        let SpectrumSpec::Kernel { name, c, interval, nodes, weight, grid, values } = self else {
            return Ok(None);
        };
        let need_c = || c.ok_or_else(|| usage(format!("kernel `{name}` needs `C`")));
        let kernel = match name.as_str() {
            "brownian" => Kernel::Brownian,
            "constant" => Kernel::Constant,
            "cauchy" => Kernel::Cauchy { c: need_c()? },
            "gauss" => Kernel::Gauss { c: need_c()? },
            "tabulated" => match (grid, values) {
                (Some(g), Some(v)) => Kernel::Tabulated { grid: g.clone(), values: v.clone() },
                _ => return Err(usage("tabulated kernel needs `grid` and `values`")),
            },
            other => {
                return Err(usage(format!(
                    "unknown kernel `{other}`; known kernels: brownian, constant, cauchy, gauss, tabulated"
                )))
            }
        };
        Ok(Some(KernelSpec { kernel, interval: (interval[0], interval[1]), weight: *weight, nodes: *nodes }))
    }

    /// Spec that reproduces `spectrum` exactly.
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        let values = spectrum.head().to_vec();
        match spectrum.tail() {
            None => SpectrumSpec::Explicit { values },
            Some(TailModel::Power { scale, exponent, shift, offset }) => SpectrumSpec::Power {
                scale: *scale,
                exponent: *exponent,
                shift: *shift,
                offset: *offset,
                head: 0,
                values,
            },
            Some(TailModel::StretchedExp { scale, c, alpha }) => {
                SpectrumSpec::StretchedExp { c: *c, alpha: *alpha, scale: *scale, head: 0, values }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_forms_parse() {
        let cases = [
            r#"{"type":"explicit","values":[1,0.5]}"#,
            r#"{"type":"power","scale":1,"exponent":2}"#,
            r#"{"type":"stretched_exp","C":2,"alpha":0.5}"#,
            r#"{"type":"kernel","name":"gauss","C":1,"interval":[0,1],"nodes":20}"#,
            r#"{"type":"catalog","name":"brownian","params":{"head":3}}"#,
        ];
        for text in cases {
            let spec = SpectrumSpec::from_json(text).unwrap();
            spec.to_spectrum().unwrap();
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        match SpectrumSpec::from_json("{\n  \"type\": \"explicit\",\n  \"values\": [1, }") {
            Err(Error::Usage(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(SpectrumSpec::from_json(r#"{"type":"power","exponent":2,"bogus":1}"#).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let s = catalog("brownian", &CatalogParams { head: 5, ..Default::default() }).unwrap();
        let text = SpectrumSpec::from_spectrum(&s).to_json();
        let back = SpectrumSpec::from_json(&text).unwrap().to_spectrum().unwrap();
        assert_eq!(back, s);

        let e = Spectrum::explicit(vec![0.1 + 0.2, 1.0 / 3.0]).unwrap();
        let back = SpectrumSpec::from_json(&SpectrumSpec::from_spectrum(&e).to_json()).unwrap();
        assert_eq!(back.to_spectrum().unwrap(), e);
    }

    #[test]
    fn head_count_and_values_must_agree() {
        let bad = SpectrumSpec::Power {
            scale: 1.0,
            exponent: 2.0,
            shift: 0.0,
            offset: 0.0,
            head: 3,
            values: vec![1.0],
        };
        assert!(bad.to_spectrum().is_err());
    }
}
