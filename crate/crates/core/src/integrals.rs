//! Closed-form matrix elements.
//!
//! A basis function is `N·Re h` (cos kind) or `N·Im h` (sin kind) with
//! `h = R^l exp(−wR²)`, `w = ν(1 − iα)`. Writing each as a combination of `h`
//! and `h̄` turns every element into four complex Gaussian moments
//! `J(m, z) = ∫₀^∞ R^m exp(−zR²) dR`. The four terms come in conjugate pairs,
//! so the imaginary part of their sum is pure roundoff; it is tracked and then
//! dropped.
//!
//! Every operator is a [`Kernel`]: a short list of moments with polynomial
//! prefactors and exponent shifts, applied to each pair of exponents.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{BasisFunction, Kind};
use crate::potential::PotentialModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("Gaussian moment diverges: Re z = {0} <= 0")]
    Divergent(f64),
    #[error("basis functions carry different angular momenta ({0} and {1})")]
    AngularMomentumMismatch(u32, u32),
    #[error("reduced mass must be positive, got {0}")]
    ReducedMass(f64),
}

/// `∫₀^∞ R^m exp(−zR²) dR = Γ((m+1)/2) / (2 z^{(m+1)/2})`, principal branch.
pub fn moment(m: u32, z: Complex64) -> Result<Complex64, IntegralError> {
    if !(z.re > 0.0) {
        return Err(IntegralError::Divergent(z.re));
    }
    Ok(moment_unchecked(m, z))
}

fn moment_unchecked(m: u32, z: Complex64) -> Complex64 {
    let half = (m / 2) as i32;
    if m % 2 == 1 {
        // Γ(p) = (p−1)! with p = (m+1)/2
        let p = half + 1;
        let gamma: f64 = (1..p).map(f64::from).product();
        gamma / (2.0 * z.powi(p))
    } else {
        // Γ(q + 1/2) = (2q−1)!! √π / 2^q with q = m/2
        let q = half;
        let double_factorial: f64 = (1..=q).map(|k| f64::from(2 * k - 1)).product();
        let gamma = double_factorial * std::f64::consts::PI.sqrt() / 2f64.powi(q);
        gamma / (2.0 * z.powi(q) * z.sqrt())
    }
}

/// An element before the imaginary roundoff is dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawElement {
    pub value: f64,
    pub residue: f64,
}

impl RawElement {
    /// `|Im| / (|Re| + 1)`.
    pub fn relative_residue(&self) -> f64 {
        self.residue.abs() / (self.value.abs() + 1.0)
    }
}

/// Polynomial factor `P(w_a, w_b)` in front of a moment.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Prefactor {
    One,
    Sum,
    Product,
}

impl Prefactor {
    fn at(self, x: Complex64, y: Complex64) -> Complex64 {
        match self {
            Prefactor::One => Complex64::new(1.0, 0.0),
            Prefactor::Sum => x + y,
            Prefactor::Product => x * y,
        }
    }

    /// `P(x, y) − P(x̄, y)`.
    fn delta(self, x: Complex64, y: Complex64) -> Complex64 {
        let dx = Complex64::new(0.0, 2.0 * x.im);
        match self {
            Prefactor::One => Complex64::new(0.0, 0.0),
            Prefactor::Sum => dx,
            Prefactor::Product => dx * y,
        }
    }
}

/// `coeff · P(w_a, w_b) · J(m, w_a + w_b + shift)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    coeff: f64,
    prefactor: Prefactor,
    m: u32,
    shift: f64,
}

/// `K(w_a, w_b) = Σ terms`, symmetric in its arguments and satisfying
/// `K(w̄_a, w̄_b) = conj K(w_a, w_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    terms: Vec<Term>,
}

impl Kernel {
    pub fn overlap(l: u32) -> Self {
        Self { terms: vec![Term { coeff: 1.0, prefactor: Prefactor::One, m: 2 * l + 2, shift: 0.0 }] }
    }

    /// `(1/2μ_n)[(l² + l(l+1)) J(2l) − 2l(w_a + w_b) J(2l+2) + 4 w_a w_b J(2l+4)]`.
    pub fn kinetic(l: u32, mu_n: f64) -> Result<Self, IntegralError> {
        if !(mu_n > 0.0) {
            return Err(IntegralError::ReducedMass(mu_n));
        }
        let scale = 0.5 / mu_n;
        let lf = f64::from(l);
        let mut terms = vec![Term { coeff: 4.0 * scale, prefactor: Prefactor::Product, m: 2 * l + 4, shift: 0.0 }];
        if l > 0 {
            terms.push(Term {
                coeff: scale * (lf * lf + lf * (lf + 1.0)),
                prefactor: Prefactor::One,
                m: 2 * l,
                shift: 0.0,
            });
            terms.push(Term { coeff: -2.0 * lf * scale, prefactor: Prefactor::Sum, m: 2 * l + 2, shift: 0.0 });
        }
        Ok(Self { terms })
    }

    pub fn potential(l: u32, model: &PotentialModel) -> Self {
        let m = 2 * l + 2;
        let one = |coeff, m, shift| Term { coeff, prefactor: Prefactor::One, m, shift };
        let mut terms = vec![one(model.threshold, m, 0.0)];
        if model.has_short_range_term() {
            let beta = model.short_range_exponent;
            terms.push(one(model.short_range_constant - model.threshold, m, beta));
            terms.push(one(-1.0, m - 1, beta));
        }
        for (row, &alpha) in model.linear.iter().zip(&model.exponents) {
            for (k, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    terms.push(one(a, m + k as u32, alpha));
                }
            }
        }
        Self { terms }
    }

    fn value(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.prefactor.at(x, y) * moment_unchecked(t.m, x + y + t.shift))
            .sum()
    }

    /// `K(x, y) − K(x̄, y)`, accurate even when `|Im x| ≪ |y|`:
    /// `J(m, z₁) − J(m, z₂) = J(m, z₂)·expm1(−p·log1p((z₁ − z₂)/z₂))`.
    fn difference(&self, x: Complex64, y: Complex64) -> Complex64 {
        let dx = Complex64::new(0.0, 2.0 * x.im);
        let xc = x.conj();
        self.terms
            .iter()
            .map(|t| {
                let z1 = x + y + t.shift;
                let z2 = xc + y + t.shift;
                let j2 = moment_unchecked(t.m, z2);
                let p = 0.5 * f64::from(t.m + 1);
                let dj = j2 * expm1(-p * log1p(dx / z2));
                t.coeff * (t.prefactor.delta(x, y) * moment_unchecked(t.m, z1) + t.prefactor.at(xc, y) * dj)
            })
            .sum()
    }
}

fn log1p(u: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    Complex64::new(re, u.im.atan2(1.0 + u.re))
}

fn expm1(v: Complex64) -> Complex64 {
    let half = (0.5 * v.im).sin();
    Complex64::new(v.re.exp_m1() * v.im.cos() - 2.0 * half * half, v.re.exp() * v.im.sin())
}

/// `g = N (h + σ h̄) / (2τ)` with `(σ, τ) = (1, 1)` for cos and `(−1, i)` for sin.
fn sigma_tau(kind: Kind) -> (f64, Complex64) {
    match kind {
        Kind::Cos => (1.0, Complex64::new(1.0, 0.0)),
        Kind::Sin => (-1.0, Complex64::new(0.0, 1.0)),
    }
}

/// `∫ g_i K g_j` as four kernel evaluations. The conjugate pair belonging to
/// the more diffuse function is combined first, through
/// [`Kernel::difference`] when the pair enters with a minus sign; the
/// direct difference would cancel when the exponents differ by many orders.
pub fn element(fi: &BasisFunction, fj: &BasisFunction, kernel: &Kernel) -> Result<RawElement, IntegralError> {
    if fi.l != fj.l {
        return Err(IntegralError::AngularMomentumMismatch(fi.l, fj.l));
    }
    // Equal exponents: cos first, so that swapping i and j is bitwise neutral.
    let swap = fj.nu < fi.nu || (fj.nu == fi.nu && fj.kind == Kind::Cos && fi.kind == Kind::Sin);
    let (fx, fy) = if swap { (fj, fi) } else { (fi, fj) };
    let (x, y) = (fx.complex_exponent(), fy.complex_exponent());
    if !(x.re + y.re > 0.0) {
        return Err(IntegralError::Divergent(x.re + y.re));
    }
    let (sx, tx) = sigma_tau(fx.kind);
    let (sy, ty) = sigma_tau(fy.kind);
    let half_sum = |y: Complex64| {
        if sx > 0.0 {
            kernel.value(x, y) + kernel.value(x.conj(), y)
        } else {
            kernel.difference(x, y)
        }
    };
    let total = (half_sum(y) + sy * half_sum(y.conj())) * (fx.norm * fy.norm) / (4.0 * tx * ty);
    Ok(RawElement { value: total.re, residue: total.im })
}

pub fn overlap_raw(fi: &BasisFunction, fj: &BasisFunction) -> Result<RawElement, IntegralError> {
    element(fi, fj, &Kernel::overlap(fi.l))
}

/// `(1/2μ_n) [∫ g_i′ g_j′ R² dR + l(l+1) ∫ g_i g_j dR]`.
pub fn kinetic_raw(fi: &BasisFunction, fj: &BasisFunction, mu_n: f64) -> Result<RawElement, IntegralError> {
    element(fi, fj, &Kernel::kinetic(fi.l, mu_n)?)
}

pub fn potential_raw(
    fi: &BasisFunction,
    fj: &BasisFunction,
    model: &PotentialModel,
) -> Result<RawElement, IntegralError> {
    element(fi, fj, &Kernel::potential(fi.l, model))
}

pub fn overlap_element(fi: &BasisFunction, fj: &BasisFunction) -> Result<f64, IntegralError> {
    overlap_raw(fi, fj).map(|e| e.value)
}

pub fn kinetic_element(fi: &BasisFunction, fj: &BasisFunction, mu_n: f64) -> Result<f64, IntegralError> {
    kinetic_raw(fi, fj, mu_n).map(|e| e.value)
}

pub fn potential_element(fi: &BasisFunction, fj: &BasisFunction, model: &PotentialModel) -> Result<f64, IntegralError> {
    potential_raw(fi, fj, model).map(|e| e.value)
}

/// Overlap, kinetic and potential matrices of one basis.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrices {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub potential: DMatrix<f64>,
    /// Largest `|Im| / (|Re| + 1)` seen before the imaginary parts were dropped.
    pub max_residue: f64,
}

impl HamiltonianMatrices {
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.potential
    }
}

/// Computes the upper triangle once (rows in parallel) and mirrors it.
pub fn assemble(
    basis: &[BasisFunction],
    model: &PotentialModel,
    mu_n: f64,
) -> Result<HamiltonianMatrices, IntegralError> {
    let n = basis.len();
    let l = basis.first().map_or(0, |f| f.l);
    let kernels = [Kernel::overlap(l), Kernel::kinetic(l, mu_n)?, Kernel::potential(l, model)];
    let rows: Vec<Vec<[RawElement; 3]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    Ok([
                        element(&basis[i], &basis[j], &kernels[0])?,
                        element(&basis[i], &basis[j], &kernels[1])?,
                        element(&basis[i], &basis[j], &kernels[2])?,
                    ])
                })
                .collect::<Result<Vec<_>, IntegralError>>()
        })
        .collect::<Result<_, _>>()?;

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut potential = DMatrix::zeros(n, n);
    let mut max_residue = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for (offset, [s, t, v]) in row.iter().enumerate() {
            let j = i + offset;
            for (target, element) in [(&mut overlap, s), (&mut kinetic, t), (&mut potential, v)] {
                target[(i, j)] = element.value;
                target[(j, i)] = element.value;
                max_residue = max_residue.max(element.relative_residue());
            }
        }
    }
    Ok(HamiltonianMatrices { overlap, kinetic, potential, max_residue })
}
