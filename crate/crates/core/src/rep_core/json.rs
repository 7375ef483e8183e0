// SPDX-License-Identifier: MIT OR Apache-2.0

//! Canonical JSON encoding of coefficient tensors.

use super::params::{classify, IrrepParams, Series, SeriesHint, TensorParams};
use super::tensor::{CoeffTensor, Window};
use crate::error::{CohomError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Human-readable description of the accepted tensor format.
pub const TENSOR_SCHEMA: &str = r#"{"factors":[{"series":"first_principal|second_principal|complementary|first_discrete|second_discrete","mu":<real>,"epsilon":0|1,"n":<int, discrete only>,"nu":<real, optional; complementary: nu, principal: t with nu = i t>}],"window":[[lo,hi],...],"coeffs":[[re,im],...]}  (coeffs row-major over the window, last axis fastest)"#;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorJson {
    pub series: String,
    pub mu: f64,
    pub epsilon: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub factors: Vec<FactorJson>,
    pub window: Vec<[i64; 2]>,
    pub coeffs: Vec<[f64; 2]>,
}

impl FactorJson {
    pub fn from_params(p: &IrrepParams) -> Self {
        let n = match p.series {
            Series::FirstDiscrete(n) | Series::SecondDiscrete(n) => Some(n),
            _ => None,
        };
        // written so a round trip reproduces nu bit for bit
        let nu = match p.series {
            Series::Complementary => Some(p.nu.re),
            Series::FirstPrincipal | Series::SecondPrincipal => Some(p.nu.im),
            _ => None,
        };
        FactorJson {
            series: p.series.name().to_string(),
            mu: p.mu,
            epsilon: p.epsilon,
            n,
            nu,
        }
    }

    pub fn to_params(&self) -> Result<IrrepParams> {
        let hint = SeriesHint::from_name(&self.series)
            .ok_or_else(|| CohomError::Json(format!("unknown series '{}'", self.series)))?;
        let p = classify(self.mu, self.epsilon, Some(hint))?;
        match (p.series, self.n) {
            (Series::FirstDiscrete(m) | Series::SecondDiscrete(m), Some(n)) if m != n => {
                return Err(CohomError::InconsistentParameters(format!(
                    "mu = {} gives n = {m}, but n = {n} was given",
                    self.mu
                )))
            }
            (Series::FirstDiscrete(_) | Series::SecondDiscrete(_), None) => {
                return Err(CohomError::Json("discrete factors need \"n\"".into()))
            }
            (s, Some(_)) if !s.is_discrete() => {
                return Err(CohomError::Json("\"n\" is only allowed for discrete factors".into()))
            }
            _ => {}
        }
        let Some(nu) = self.nu else { return Ok(p) };
        let (q, nu_sq) = match p.series {
            Series::Complementary => (IrrepParams::complementary(nu)?, nu * nu),
            Series::FirstPrincipal | Series::SecondPrincipal if nu >= 0.0 => {
                (IrrepParams::principal(p.epsilon, nu), -nu * nu)
            }
            _ => {
                return Err(CohomError::Json(
                    "\"nu\" is only allowed for non-discrete factors".into(),
                ))
            }
        };
        if (nu_sq - (1.0 - 4.0 * self.mu)).abs() > 1e-12 * (1.0 + self.mu.abs()) {
            return Err(CohomError::InconsistentParameters(format!(
                "nu = {nu} does not match mu = {}",
                self.mu
            )));
        }
        Ok(IrrepParams { mu: self.mu, ..q })
    }
}

impl TensorJson {
    pub fn from_tensor(f: &CoeffTensor) -> Self {
        TensorJson {
            factors: f.params().factors().iter().map(FactorJson::from_params).collect(),
            window: f.window().bounds().iter().map(|&(lo, hi)| [lo, hi]).collect(),
            coeffs: f.coeffs().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<CoeffTensor> {
        let factors = self
            .factors
            .iter()
            .map(FactorJson::to_params)
            .collect::<Result<Vec<_>>>()?;
        let params = TensorParams::new(factors)?;
        let window = Window::new(self.window.iter().map(|b| (b[0], b[1])).collect())?;
        let coeffs = self.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        CoeffTensor::new(params, window, coeffs)
    }
}

impl CoeffTensor {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TensorJson::from_tensor(self)).expect("finite values serialize")
    }

    pub fn from_json(s: &str) -> Result<CoeffTensor> {
        let raw: TensorJson = serde_json::from_str(s).map_err(|e| CohomError::Json(e.to_string()))?;
        raw.to_tensor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let s = r#"{"factors":[{"series":"first_principal","mu":0.25,"epsilon":0}],"window":[[-1,1]],"coeffs":[[0,0],[1,0],[0,0]]}"#;
        let f = CoeffTensor::from_json(s).unwrap();
        assert_eq!(f.get(&[0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn discrete_needs_matching_n() {
        let ok = r#"{"factors":[{"series":"first_discrete","mu":-2,"epsilon":0,"n":2}],"window":[[2,3]],"coeffs":[[0,0],[2,0]]}"#;
        assert!(CoeffTensor::from_json(ok).is_ok());
        let bad = ok.replace("\"n\":2", "\"n\":3");
        assert!(CoeffTensor::from_json(&bad).is_err());
        let missing = ok.replace(",\"n\":2", "");
        assert!(CoeffTensor::from_json(&missing).is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(CoeffTensor::from_json("").is_err());
        assert!(CoeffTensor::from_json("{}").is_err());
        let wrong_len =
            r#"{"factors":[{"series":"complementary","mu":0.1875,"epsilon":0}],"window":[[-1,1]],"coeffs":[[0,0]]}"#;
        assert!(CoeffTensor::from_json(wrong_len).is_err());
    }

    #[test]
    fn negative_branch_survives() {
        let p = IrrepParams::complementary(-0.4).unwrap();
        let f = CoeffTensor::delta(p, (-1, 1), 1).unwrap();
        let g = CoeffTensor::from_json(&f.to_json()).unwrap();
        assert_eq!(g.params().factor(0).nu.re, -0.4);
    }
}
