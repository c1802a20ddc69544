//! Semiclassical quantization near threshold for a `−C6/R⁶` tail.
//!
//! `ν_th − ν = F(ε_ν)` with
//!
//! ```text
//! F(ε) = (2bκ − (dκ)²) / (2π[1 + x⁴])
//!      + x⁴/(1 + x⁴) · [−1/8 + D/(2π x^{2/3}) + Γ(2/3) x^{2/3} / (4√π Γ(7/6))]
//! ```
//!
//! where `κ = √(2Mε)` and `x = κβ6`. The tail lengths `b` and `ā` are fixed
//! multiples of β6; `d` and `D` must be supplied or calibrated.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::constants::PhysicalConstants;
use crate::potential::Flavor;
use crate::reference::{BETA6_BO, BETA6_SCALED, THRESHOLD_NUMBERS};

/// `b / β6 = ā / β6` for an n = 6 tail.
pub const B_OVER_BETA6: f64 = 0.4779888;

/// Tabulated rows used to calibrate `(d, D)` when none are configured.
pub const DEFAULT_CALIBRATION_ROWS: [u32; 4] = [20, 23, 26, 29];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("dissociation energy must be non-negative, got {0}")]
    Domain(f64),
    #[error("tail constant {0} is not set; supply it or calibrate it")]
    Incomplete(&'static str),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("F = {f} is within 1e-9 of an integer (zero-energy resonance)")]
    Pole { f: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    /// Dispersion coefficient (hartree·bohr⁶).
    pub c6: f64,
    /// Nuclear reduced mass.
    pub reduced_mass: f64,
    pub beta6: f64,
    pub b: f64,
    pub a_bar: f64,
    pub d: Option<f64>,
    pub big_d: Option<f64>,
}

impl TailParams {
    pub fn new(c6: f64, reduced_mass: f64) -> Result<Self, WkbError> {
        let beta6 = beta6(c6, reduced_mass)?;
        Ok(Self {
            c6,
            reduced_mass,
            beta6,
            b: B_OVER_BETA6 * beta6,
            a_bar: B_OVER_BETA6 * beta6,
            d: None,
            big_d: None,
        })
    }

    /// Recovers `C6 = β6⁴ / (2M)` from a quoted length scale.
    pub fn from_beta6(beta6: f64, reduced_mass: f64) -> Result<Self, WkbError> {
        positive("beta6", beta6)?;
        positive("reduced mass", reduced_mass)?;
        Self::new(beta6.powi(4) / (2.0 * reduced_mass), reduced_mass)
    }

    pub fn with_constants(mut self, d: f64, big_d: f64) -> Self {
        self.d = Some(d);
        self.big_d = Some(big_d);
        self
    }

    pub fn kappa(&self, eps: f64) -> f64 {
        (2.0 * self.reduced_mass * eps).sqrt()
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), WkbError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WkbError::NonPositive { name, value })
    }
}

/// `β6 = (2·C6·M)^{1/4}`.
pub fn beta6(c6: f64, reduced_mass: f64) -> Result<f64, WkbError> {
    positive("C6", c6)?;
    positive("reduced mass", reduced_mass)?;
    Ok((2.0 * c6 * reduced_mass).powf(0.25))
}

fn growth_coefficient() -> f64 {
    gamma(2.0 / 3.0) / (4.0 * PI.sqrt() * gamma(7.0 / 6.0))
}

/// `F = A0 − d²·A1 + D·A2`; the split keeps `F` linear in `(d², D)`.
#[derive(Clone, Copy, Debug)]
struct Pieces {
    a0: f64,
    a1: f64,
    a2: f64,
}

fn pieces(eps: f64, params: &TailParams) -> Result<Pieces, WkbError> {
    if !(eps >= 0.0) {
        return Err(WkbError::Domain(eps));
    }
    let kappa = params.kappa(eps);
    let x = kappa * params.beta6;
    let x4 = x.powi(4);
    let denom = 1.0 + x4;
    let x23 = x.cbrt().powi(2);
    Ok(Pieces {
        a0: 2.0 * params.b * kappa / (2.0 * PI * denom) + x4 / denom * (-0.125 + growth_coefficient() * x23),
        a1: kappa * kappa / (2.0 * PI * denom),
        // x⁴ · x^{-2/3} written as x^{10/3} so that ε = 0 is regular.
        a2: x4 / x23.max(f64::MIN_POSITIVE) / (2.0 * PI * denom),
    })
}

pub fn quantization_function(eps: f64, params: &TailParams) -> Result<f64, WkbError> {
    let d = params.d.ok_or(WkbError::Incomplete("d"))?;
    let big_d = params.big_d.ok_or(WkbError::Incomplete("D"))?;
    let p = pieces(eps, params)?;
    Ok(p.a0 - d * d * p.a1 + big_d * p.a2)
}

/// `ν + F(ε_ν)`.
pub fn threshold_quantum_number(nu: u32, eps: f64, params: &TailParams) -> Result<f64, WkbError> {
    Ok(f64::from(nu) + quantization_function(eps, params)?)
}

/// Largest integer below `ν_th`.
pub fn predicted_bound_count(nu_th: f64) -> i64 {
    nu_th.ceil() as i64 - 1
}

/// `a = ā + b / tan(πF(ε))`.
pub fn wkb_scattering_length(eps: f64, params: &TailParams) -> Result<f64, WkbError> {
    let f = quantization_function(eps, params)?;
    if (f - f.round()).abs() < 1e-9 {
        return Err(WkbError::Pole { f });
    }
    Ok(params.a_bar + params.b / (PI * f).tan())
}

/// Tail of the built-in curve, with C6 recovered from the published β6.
pub fn builtin_tail(flavor: Flavor, constants: &PhysicalConstants) -> TailParams {
    let beta6 = match flavor {
        Flavor::BornOppenheimer => BETA6_BO,
        Flavor::MassScaled => BETA6_SCALED,
    };
    TailParams::from_beta6(beta6, constants.nuclear_reduced_mass).expect("published β6 is positive")
}

/// Calibration rows pairing `eps[ν − 1]` with the tabulated `ν_th` of `flavor`.
pub fn tabulated_rows(flavor: Flavor, nus: &[u32], eps: &[f64]) -> Result<Vec<CalibrationRow>, WkbError> {
    nus.iter()
        .map(|&nu| {
            let target = THRESHOLD_NUMBERS
                .iter()
                .find(|row| row.0 == nu)
                .ok_or_else(|| WkbError::Calibration(format!("no tabulated threshold number for row {nu}")))?;
            let eps = *eps
                .get(nu as usize - 1)
                .ok_or_else(|| WkbError::Calibration(format!("row {nu} is not bound")))?;
            let nu_th = match flavor {
                Flavor::BornOppenheimer => target.1,
                Flavor::MassScaled => target.2,
            };
            Ok(CalibrationRow { nu, eps, nu_th })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub nu: u32,
    pub eps: f64,
    pub nu_th: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub d: f64,
    pub big_d: f64,
    /// Largest `|ν + F(ε) − ν_th|` over the fitted rows.
    pub max_residual: f64,
    /// The unconstrained optimum had `d² < 0`; `d` was held at 0.
    pub pinned: bool,
}

/// Least-squares `(d, D)` so that `ν + F(ε_ν)` matches the targets, subject
/// to `d` being real. `F` is linear in `(d², D)`, so this is a two-column
/// linear fit with the bound `d² >= 0`.
pub fn calibrate_tail_constants(rows: &[CalibrationRow], params: &TailParams) -> Result<Calibration, WkbError> {
    if rows.len() < 4 {
        return Err(WkbError::Calibration(format!("need at least 4 rows, got {}", rows.len())));
    }
    let n = rows.len();
    let mut design = DMatrix::zeros(n, 2);
    let mut rhs = DVector::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let p = pieces(row.eps, params)?;
        design[(i, 0)] = -p.a1;
        design[(i, 1)] = p.a2;
        rhs[i] = row.nu_th - f64::from(row.nu) - p.a0;
    }
    let scales: Vec<f64> = (0..2).map(|j| design.column(j).norm()).collect();
    if scales.iter().any(|&s| !(s > 0.0)) {
        return Err(WkbError::Calibration("rows carry no information on d or D".into()));
    }
    for (j, &s) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = design.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-10 * smax) {
        return Err(WkbError::Calibration(format!("rank-deficient design (singular values {smax:e}, {smin:e})")));
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| WkbError::Calibration(e.to_string()))?;
    let mut d_squared = solution[0] / scales[0];
    let mut big_d = solution[1] / scales[1];
    // d is a real length, so d² < 0 moves the optimum onto the boundary d = 0.
    let pinned = d_squared < 0.0;
    if pinned {
        let column = design.column(1);
        d_squared = 0.0;
        big_d = column.dot(&rhs) / column.norm_squared() / scales[1];
    }
    let d = d_squared.sqrt();
    let fitted = params.with_constants(d, big_d);
    let max_residual = rows
        .iter()
        .map(|row| threshold_quantum_number(row.nu, row.eps, &fitted).map(|v| (v - row.nu_th).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Calibration { d, big_d, max_residual, pinned })
}
