//! Analytic H–H̄ interaction curves.
//!
//! Both fits share the form
//!
//! ```text
//! V(R) = E∞ + (E_sr − E∞ − 1/R)·exp(−βR²) + Σ_{n=1..6} Σ_{k=0..4} A_nk R^k exp(−α_n R²)
//! ```
//!
//! with `E_sr = E₁(Ps)` for the Born–Oppenheimer curve and `μ·E₁(Ps)` for the
//! mass-scaled one. The constraint `Σ_n A_n0 = 0` fixes the sixth Gaussian's
//! constant coefficient, which the published table leaves out; it is
//! completed when a model is built.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::PhysicalConstants;

pub const GAUSSIANS: usize = 6;
pub const POWERS: usize = 5;

/// Highest analytic derivative order supported by [`PotentialModel::eval_derivative`].
pub const MAX_DERIVATIVE_ORDER: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("internuclear distance must be positive, got R = {0}")]
    Domain(f64),
    #[error("derivative order {0} is outside 1..=4")]
    DerivativeOrder(u32),
    #[error("nonadiabatic series needs 2 <= n_max_terms <= 4, got {0}")]
    UnsupportedOrder(u32),
    #[error("vibrational quantum number must be >= 1, got {0}")]
    QuantumNumber(u32),
    #[error("invalid potential parameter: {0}")]
    Parameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    BornOppenheimer,
    MassScaled,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::BornOppenheimer, Flavor::MassScaled];

    pub fn threshold(self, constants: &PhysicalConstants) -> f64 {
        match self {
            Flavor::BornOppenheimer => constants.bo_threshold,
            Flavor::MassScaled => constants.scaled_threshold,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Flavor::BornOppenheimer => "bo",
            Flavor::MassScaled => "scaled",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Flavor {
    type Err = PotentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bo" | "born-oppenheimer" | "born_oppenheimer" => Ok(Flavor::BornOppenheimer),
            "scaled" | "mass-scaled" | "mass_scaled" | "ms" => Ok(Flavor::MassScaled),
            other => Err(PotentialError::Parameter(format!("unknown flavor `{other}`"))),
        }
    }
}

const BO_PARAMETERS: &str = "
A_10 = -19.8582635505679
A_11 = 67.6269717956708
A_12 = -20.0575886039098
A_13 = 1.6436298797648
A_14 = -0.0417677179701
A_20 = 57.5162155781683
A_21 = 9.3918281802097
A_22 = 3.0569545228764
A_23 = -0.2521821480278
A_24 = 0.0965988366924
A_30 = 4.7043278292101
A_31 = -16.1993647293737
A_32 = 23.4284275566323
A_33 = -14.9456597423665
A_34 = 3.8997649015388
A_40 = -19.9771658686913
A_41 = -173.8431212019852
A_42 = 39.0038819732993
A_43 = -4.9839482825694
A_44 = 0.2098970274357
A_50 = -22.3850547348492
A_51 = 106.8813949154074
A_52 = -24.8069885152175
A_53 = 2.2667291349955
A_54 = -0.0258580270297
A_61 = 0.0000097266439
A_62 = -0.0000006275304
A_63 = 0.0000000184890
A_64 = -0.0000000002113
alpha_1 = 0.0897852714851
alpha_2 = 0.2268196733512
alpha_3 = 2.2437975957692
alpha_4 = 0.1412060702801
alpha_5 = 0.1048123413141
alpha_6 = 0.0068068098389
beta = 6.1520725018366
";

const SCALED_PARAMETERS: &str = "
A_10 = -20.1369672678805
A_11 = 44.1781330016383
A_12 = -14.6255427563730
A_13 = 1.2854178363453
A_14 = -0.0344425997356
A_20 = 57.6405552715681
A_21 = -24.8917421281046
A_22 = 8.8916405222450
A_23 = -1.4152945078081
A_24 = 0.1428155629355
A_30 = 5.4110168738119
A_31 = -17.2109690438145
A_32 = 24.7666406025529
A_33 = -15.7590990169304
A_34 = 4.1982517062010
A_40 = -20.2530003255519
A_41 = -131.5359580062383
A_42 = 36.6202418042846
A_43 = 2.3956839062761
A_44 = 0.0726049211608
A_50 = -22.6615482631176
A_51 = 123.3264381665587
A_52 = -29.3520833084752
A_53 = -4.7119434834608
A_54 = 0.4403103436776
A_61 = 0.0000091571743
A_62 = -0.0000005856539
A_63 = 0.0000000171095
A_64 = -0.0000000001939
alpha_1 = 0.0893701431156
alpha_2 = 0.2952163755619
alpha_3 = 2.2164844767807
alpha_4 = 0.1171840549361
alpha_5 = 0.1108374703554
alpha_6 = 0.0067006105329
beta = 6.1431639772293
";

/// A named fit parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum ParameterName {
    Linear { n: usize, k: usize },
    Alpha(usize),
    Beta,
}

impl FromStr for ParameterName {
    type Err = PotentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PotentialError::Parameter(format!("unknown parameter name `{s}`"));
        if s == "beta" {
            return Ok(ParameterName::Beta);
        }
        if let Some(idx) = s.strip_prefix("alpha_") {
            let n: usize = idx.parse().map_err(|_| bad())?;
            if (1..=GAUSSIANS).contains(&n) {
                return Ok(ParameterName::Alpha(n - 1));
            }
            return Err(bad());
        }
        if let Some(idx) = s.strip_prefix("A_") {
            let digits: Vec<u32> = idx.chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or_else(bad)?;
            if let [n, k] = digits[..] {
                let (n, k) = (n as usize, k as usize);
                if (1..=GAUSSIANS).contains(&n) && k < POWERS {
                    if n == GAUSSIANS && k == 0 {
                        return Err(PotentialError::Parameter(
                            "A_60 is implied by the constraint sum_n A_n0 = 0 and cannot be set".into(),
                        ));
                    }
                    return Ok(ParameterName::Linear { n: n - 1, k });
                }
            }
        }
        Err(bad())
    }
}

/// Parses `name = value` lines. Blank lines and `#` comments are skipped.
fn parse_parameter_text(text: &str) -> Result<BTreeMap<ParameterName, f64>, PotentialError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = line.split_once('=').ok_or_else(|| {
            PotentialError::Parameter(format!("line {}: expected `name = value`", lineno + 1))
        })?;
        let name: ParameterName = name.trim().parse()?;
        let value: f64 = value.trim().parse().map_err(|_| {
            PotentialError::Parameter(format!("line {}: cannot parse `{}`", lineno + 1, value.trim()))
        })?;
        if !value.is_finite() {
            return Err(PotentialError::Parameter(format!("line {}: non-finite value", lineno + 1)));
        }
        out.insert(name, value);
    }
    Ok(out)
}

/// One fitted potential curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub flavor: Flavor,
    /// `linear[n][k]` multiplies `R^k exp(−α_n R²)` (hartree·bohr^−k).
    pub linear: [[f64; POWERS]; GAUSSIANS],
    /// Gaussian exponents α_n (bohr^−2).
    pub exponents: [f64; GAUSSIANS],
    /// Exponent β of the Coulomb-times-Gaussian short-range term. `+∞`
    /// switches the term off.
    pub short_range_exponent: f64,
    /// Dissociation threshold E∞ (hartree).
    pub threshold: f64,
    /// Short-range constant E_sr (hartree).
    pub short_range_constant: f64,
}

impl PotentialModel {
    /// The published fit for `flavor`, with A_60 completed from the constraint.
    pub fn load_builtin(flavor: Flavor) -> Self {
        Self::load_builtin_with(flavor, &PhysicalConstants::default())
    }

    pub fn load_builtin_with(flavor: Flavor, constants: &PhysicalConstants) -> Self {
        let text = match flavor {
            Flavor::BornOppenheimer => BO_PARAMETERS,
            Flavor::MassScaled => SCALED_PARAMETERS,
        };
        let params = parse_parameter_text(text).expect("built-in parameter table parses");
        let short_range_constant = match flavor {
            Flavor::BornOppenheimer => constants.positronium_ground,
            Flavor::MassScaled => constants.mu * constants.positronium_ground,
        };
        let mut model = Self {
            flavor,
            linear: [[0.0; POWERS]; GAUSSIANS],
            exponents: [0.0; GAUSSIANS],
            short_range_exponent: 0.0,
            threshold: flavor.threshold(constants),
            short_range_constant,
        };
        model.apply(&params);
        model.complete_constraint();
        model
    }

    /// Replaces parameters listed in a `name = value` text (names `A_nk`,
    /// `alpha_n`, `beta`). A_60 is re-derived afterwards.
    pub fn with_overrides(&self, text: &str) -> Result<Self, PotentialError> {
        let params = parse_parameter_text(text)?;
        let mut model = self.clone();
        model.apply(&params);
        model.complete_constraint();
        model.validate()?;
        Ok(model)
    }

    /// A flat potential `V(R) = threshold`.
    pub fn constant(flavor: Flavor, threshold: f64) -> Self {
        Self {
            flavor,
            linear: [[0.0; POWERS]; GAUSSIANS],
            exponents: [1.0; GAUSSIANS],
            short_range_exponent: f64::INFINITY,
            threshold,
            short_range_constant: threshold,
        }
    }

    fn apply(&mut self, params: &BTreeMap<ParameterName, f64>) {
        for (&name, &value) in params {
            match name {
                ParameterName::Linear { n, k } => self.linear[n][k] = value,
                ParameterName::Alpha(n) => self.exponents[n] = value,
                ParameterName::Beta => self.short_range_exponent = value,
            }
        }
    }

    fn complete_constraint(&mut self) {
        let partial: f64 = self.linear[..GAUSSIANS - 1].iter().map(|row| row[0]).sum();
        self.linear[GAUSSIANS - 1][0] = -partial;
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if let Some(a) = self.exponents.iter().find(|&&a| !(a > 0.0)) {
            return Err(PotentialError::Parameter(format!("Gaussian exponent must be positive, got {a}")));
        }
        if !(self.short_range_exponent > 0.0) {
            return Err(PotentialError::Parameter(format!(
                "short-range exponent must be positive, got {}",
                self.short_range_exponent
            )));
        }
        Ok(())
    }

    /// Residual of the constraint `Σ_n A_n0`.
    pub fn constraint_residual(&self) -> f64 {
        self.linear.iter().map(|row| row[0]).sum()
    }

    pub fn has_short_range_term(&self) -> bool {
        self.short_range_exponent.is_finite()
    }

    pub fn eval(&self, r: f64) -> Result<f64, PotentialError> {
        check_distance(r)?;
        let r2 = r * r;
        let mut v = self.threshold;
        if self.has_short_range_term() {
            v += (self.short_range_constant - self.threshold - 1.0 / r) * (-self.short_range_exponent * r2).exp();
        }
        for (row, &alpha) in self.linear.iter().zip(&self.exponents) {
            let poly = row.iter().rev().fold(0.0, |acc, &a| acc * r + a);
            v += poly * (-alpha * r2).exp();
        }
        Ok(v)
    }

    /// Analytic `d^order V / dR^order` for `1 <= order <= 4`.
    pub fn eval_derivative(&self, r: f64, order: u32) -> Result<f64, PotentialError> {
        check_distance(r)?;
        if !(1..=MAX_DERIVATIVE_ORDER).contains(&order) {
            return Err(PotentialError::DerivativeOrder(order));
        }
        Ok(self.derivative_unchecked(r, order))
    }

    fn derivative_unchecked(&self, r: f64, order: u32) -> f64 {
        self.terms()
            .into_iter()
            .map(|mut term| {
                for _ in 0..order {
                    term = term.derivative();
                }
                term.value(r)
            })
            .sum()
    }

    fn terms(&self) -> Vec<LaurentGaussian> {
        let mut terms = Vec::with_capacity(GAUSSIANS + 1);
        if self.has_short_range_term() {
            terms.push(LaurentGaussian {
                lowest: -1,
                coeffs: vec![-1.0, self.short_range_constant - self.threshold],
                exponent: self.short_range_exponent,
            });
        }
        for (row, &alpha) in self.linear.iter().zip(&self.exponents) {
            terms.push(LaurentGaussian { lowest: 0, coeffs: row.to_vec(), exponent: alpha });
        }
        terms
    }
}

/// `Σ_p c_p R^p · exp(−a R²)` with `p = lowest, lowest + 1, ...`.
#[derive(Clone, Debug)]
struct LaurentGaussian {
    lowest: i32,
    coeffs: Vec<f64>,
    exponent: f64,
}

impl LaurentGaussian {
    fn value(&self, r: f64) -> f64 {
        let mut power = r.powi(self.lowest);
        let mut acc = 0.0;
        for &c in &self.coeffs {
            acc += c * power;
            power *= r;
        }
        acc * (-self.exponent * r * r).exp()
    }

    fn derivative(&self) -> Self {
        // d/dR c R^p e^{-aR²} = c p R^{p-1} e^{-aR²} − 2 a c R^{p+1} e^{-aR²}
        let mut coeffs = vec![0.0; self.coeffs.len() + 2];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let p = self.lowest + idx as i32;
            coeffs[idx] += c * p as f64;
            coeffs[idx + 2] -= 2.0 * self.exponent * c;
        }
        Self { lowest: self.lowest - 1, coeffs, exponent: self.exponent }
    }
}

fn check_distance(r: f64) -> Result<(), PotentialError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(PotentialError::Domain(r))
    }
}

/// `E₁(Ps) − 1/R` (Born–Oppenheimer) or `μ·E₁(Ps) − 1/R` (mass-scaled).
pub fn short_range_reference(constants: &PhysicalConstants, r: f64, flavor: Flavor) -> Result<f64, PotentialError> {
    check_distance(r)?;
    let level = match flavor {
        Flavor::BornOppenheimer => constants.positronium_ground,
        Flavor::MassScaled => constants.mu * constants.positronium_ground,
    };
    Ok(level - 1.0 / r)
}

/// Dispersion expansion `E∞ − Σ C_n / R^n`; `coefficients` holds `(n, C_n)` pairs.
pub fn long_range_reference(threshold: f64, coefficients: &[(u32, f64)], r: f64) -> Result<f64, PotentialError> {
    check_distance(r)?;
    let tail: f64 = coefficients.iter().map(|&(n, c)| c / r.powi(n as i32)).sum();
    Ok(threshold - tail)
}

/// Dispersion coefficients of the mass-scaled curve, `C̃_n = C_n / μ^{n−1}`.
pub fn scaled_dispersion(coefficients: &[(u32, f64)], constants: &PhysicalConstants) -> Vec<(u32, f64)> {
    coefficients
        .iter()
        .map(|&(n, c)| (n, c / constants.mu.powi(n as i32 - 1)))
        .collect()
}

/// Maps a Born–Oppenheimer grid point onto the mass-scaled curve: `(R/μ, μ·E)`.
pub fn mass_scale_grid_point(r: f64, energy: f64, constants: &PhysicalConstants) -> (f64, f64) {
    (r / constants.mu, constants.mu * energy)
}

/// `Ṽ(R) − V_BO(R)` in millihartree.
pub fn delta_lep(bo: &PotentialModel, scaled: &PotentialModel, r: f64) -> Result<f64, PotentialError> {
    Ok(1000.0 * (scaled.eval(r)? - bo.eval(r)?))
}

/// Truncated nonadiabatic remainder
/// `Σ_{n=2..N} (−1/m_p)^n Σ_{k=0..n} (n!/k!)² R^k/(n−k)! · d^k E/dR^k`.
pub fn nonadiabatic_series(
    model: &PotentialModel,
    constants: &PhysicalConstants,
    r: f64,
    n_max_terms: u32,
) -> Result<f64, PotentialError> {
    if !(2..=MAX_DERIVATIVE_ORDER).contains(&n_max_terms) {
        return Err(PotentialError::UnsupportedOrder(n_max_terms));
    }
    let mut derivatives = vec![model.eval(r)?];
    for k in 1..=n_max_terms {
        derivatives.push(model.derivative_unchecked(r, k));
    }
    let factorial = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let inverse_mass = -1.0 / constants.proton_mass;
    let mut total = 0.0;
    for n in 2..=n_max_terms {
        let inner: f64 = (0..=n)
            .map(|k| {
                let ratio = factorial(n) / factorial(k);
                ratio * ratio * r.powi(k as i32) / factorial(n - k) * derivatives[k as usize]
            })
            .sum();
        total += inverse_mass.powi(n as i32) * inner;
    }
    Ok(total)
}

/// Protonium s-level `−μ_n / (2ν²) = −m_p / (4ν²)`.
pub fn protonium_level(nu: u32, constants: &PhysicalConstants) -> Result<f64, PotentialError> {
    if nu < 1 {
        return Err(PotentialError::QuantumNumber(nu));
    }
    Ok(-constants.nuclear_reduced_mass / (2.0 * f64::from(nu) * f64::from(nu)))
}
