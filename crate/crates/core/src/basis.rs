//! Oscillating Gaussians on a geometric exponent ladder.
//!
//! `g^c = N R^l exp(−νR²) cos(ανR²)` and `g^s = N R^l exp(−νR²) sin(ανR²)`,
//! with `ν_n = 1/r_n²` and `r_n` a geometric progression from `r_min` to
//! `r_max`. Functions are ordered `cos_1, sin_1, cos_2, sin_2, ...`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrals;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis needs at least two exponent pairs, got n_max = {0}")]
    DegenerateGrid(usize),
    #[error("need 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}")]
    InvalidRange { r_min: f64, r_max: f64 },
    #[error("oscillation ratio must be finite and non-negative, got {0}")]
    InvalidOscillation(f64),
    #[error("{kind} function with nu = {nu} has no norm (self-overlap {overlap})")]
    Normalization { kind: Kind, nu: f64, overlap: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cos,
    Sin,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Cos => "cos",
            Kind::Sin => "sin",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    /// Number of cos/sin pairs; the basis holds `2 * n_max` functions.
    pub n_max: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub l: u32,
    pub alpha_osc: f64,
}

impl BasisSpec {
    pub fn new(n_max: usize, r_min: f64, r_max: f64, l: u32) -> Self {
        Self { n_max, r_min, r_max, l, alpha_osc: FRAC_PI_2 }
    }

    /// 120 pairs, `r_min = 3e-5`, `r_max = 20`.
    pub fn reference(l: u32) -> Self {
        Self::new(120, 3e-5, 20.0, l)
    }

    pub fn size(&self) -> usize {
        2 * self.n_max
    }

    pub fn validate(&self) -> Result<(), BasisError> {
        if self.n_max < 2 {
            return Err(BasisError::DegenerateGrid(self.n_max));
        }
        let ordered = self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite();
        if !ordered {
            return Err(BasisError::InvalidRange { r_min: self.r_min, r_max: self.r_max });
        }
        if !(self.alpha_osc >= 0.0 && self.alpha_osc.is_finite()) {
            return Err(BasisError::InvalidOscillation(self.alpha_osc));
        }
        Ok(())
    }

    /// Exponents `ν_1 > ν_2 > ... > ν_{n_max}`.
    pub fn exponents(&self) -> Result<Vec<f64>, BasisError> {
        self.validate()?;
        let ratio = self.r_max / self.r_min;
        let last = (self.n_max - 1) as f64;
        Ok((0..self.n_max)
            .map(|n| {
                let r = self.r_min * ratio.powf(n as f64 / last);
                1.0 / (r * r)
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFunction {
    pub kind: Kind,
    pub nu: f64,
    pub l: u32,
    pub alpha_osc: f64,
    pub norm: f64,
}

impl BasisFunction {
    /// `w = ν(1 − iα)`, so that `R^l exp(−wR²)` has the cos kind as its real
    /// part and the sin kind as its imaginary part.
    pub fn complex_exponent(&self) -> Complex64 {
        Complex64::new(self.nu, -self.alpha_osc * self.nu)
    }
}

pub fn build(spec: &BasisSpec) -> Result<Vec<BasisFunction>, BasisError> {
    let exponents = spec.exponents()?;
    let mut functions = Vec::with_capacity(spec.size());
    for nu in exponents {
        for kind in [Kind::Cos, Kind::Sin] {
            let norm = normalization(kind, nu, spec.l, spec.alpha_osc)?;
            functions.push(BasisFunction { kind, nu, l: spec.l, alpha_osc: spec.alpha_osc, norm });
        }
    }
    Ok(functions)
}

pub fn evaluate(f: &BasisFunction, r: f64) -> f64 {
    let r2 = r * r;
    let phase = f.alpha_osc * f.nu * r2;
    let oscillation = match f.kind {
        Kind::Cos => phase.cos(),
        Kind::Sin => phase.sin(),
    };
    f.norm * r.powi(f.l as i32) * (-f.nu * r2).exp() * oscillation
}

/// `N` such that `∫ g² R² dR = 1`, from the closed-form self-overlap.
pub fn normalization(kind: Kind, nu: f64, l: u32, alpha_osc: f64) -> Result<f64, BasisError> {
    let raw = BasisFunction { kind, nu, l, alpha_osc, norm: 1.0 };
    let overlap = integrals::overlap_element(&raw, &raw).unwrap_or(f64::NAN);
    if overlap > 0.0 && overlap.is_finite() {
        Ok(1.0 / overlap.sqrt())
    } else {
        Err(BasisError::Normalization { kind, nu, overlap })
    }
}
