#![allow(dead_code)]

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use hhbar_core::basis::{self, BasisFunction};
use num_complex::Complex64;
use hhbar_core::potential::PotentialModel;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G7/K15 quadrature over consecutive `breakpoints`:
/// bisects the piece with the largest error estimate until the total error
/// estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    let mut heap = BinaryHeap::new();
    let (mut total, mut error) = (0.0, 0.0);
    for w in breakpoints.windows(2) {
        let (value, err) = kronrod(f, w[0], w[1]);
        total += value;
        error += err;
        heap.push(Piece { a: w[0], b: w[1], value, error: err });
    }
    for _ in 0..100_000 {
        if error <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        total -= worst.value;
        error -= worst.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = kronrod(f, a, b);
            total += value;
            error += err;
            heap.push(Piece { a, b, value, error: err });
        }
    }
    // Sum small pieces first.
    let mut values: Vec<f64> = heap.into_iter().map(|p| p.value).collect();
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    values.iter().sum()
}

/// Breakpoints from `lo` to `hi` spaced geometrically, with 0 prepended.
pub fn geometric_breaks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut points = vec![0.0];
    let step = (hi / lo).ln() / (count - 1) as f64;
    points.extend((0..count).map(|i| lo * (step * i as f64).exp()));
    points
}

/// Radius beyond which `R^m exp(−νR²)` is negligible (envelope < 1e-18 of its peak scale).
pub fn cutoff(nu: f64) -> f64 {
    (45.0 / nu).sqrt()
}

fn pair_breaks(fi: &BasisFunction, fj: &BasisFunction) -> Vec<f64> {
    let nu = fi.nu + fj.nu;
    let width = 1.0 / nu.sqrt();
    geometric_breaks(1e-3 * width, cutoff(nu), 60)
}

/// `(∫ f, ∫ |f|)` over the support of a basis pair. The second value is the
/// scale against which cancellation in the first is judged.
pub fn pair_integral(fi: &BasisFunction, fj: &BasisFunction, f: &dyn Fn(f64) -> f64, rel_tol: f64) -> (f64, f64) {
    let breaks = pair_breaks(fi, fj);
    let magnitude = integrate(&|r| f(r).abs(), &breaks, 0.0, 1e-8);
    let value = integrate(f, &breaks, rel_tol * magnitude, rel_tol);
    (value, magnitude)
}

pub fn overlap_quadrature(fi: &BasisFunction, fj: &BasisFunction) -> (f64, f64) {
    let f = |r: f64| basis::evaluate(fi, r) * basis::evaluate(fj, r) * r * r;
    pair_integral(fi, fj, &f, 1e-13)
}

/// Derivative of a basis function by direct differentiation of its formula.
pub fn basis_derivative(f: &BasisFunction, r: f64) -> f64 {
    let l = f.l as i32;
    let phase = f.alpha_osc * f.nu * r * r;
    let (osc, dosc) = match f.kind {
        basis::Kind::Cos => (phase.cos(), -phase.sin()),
        basis::Kind::Sin => (phase.sin(), phase.cos()),
    };
    let envelope = (-f.nu * r * r).exp();
    let power = if l == 0 { 1.0 } else { r.powi(l) };
    let dpower = if l == 0 { 0.0 } else { f64::from(l) * r.powi(l - 1) };
    f.norm * envelope * (dpower * osc + power * (-2.0 * f.nu * r * osc + 2.0 * f.alpha_osc * f.nu * r * dosc))
}

/// Second derivative from `h = R^l exp(−wR²)`, `w = ν(1 − iα)`:
/// `h″ = [l(l−1)R^{l−2} − 2w(2l+1)R^l + 4w²R^{l+2}] exp(−wR²)`.
pub fn basis_second_derivative(f: &BasisFunction, r: f64) -> f64 {
    let l = f.l as i32;
    let w = Complex64::new(f.nu, -f.alpha_osc * f.nu);
    let lf = f64::from(f.l);
    let mut poly = -2.0 * w * (2.0 * lf + 1.0) * r.powi(l) + 4.0 * w * w * r.powi(l + 2);
    if l >= 2 {
        poly += lf * (lf - 1.0) * r.powi(l - 2);
    }
    let h2 = poly * (-w * r * r).exp();
    f.norm
        * match f.kind {
            basis::Kind::Cos => h2.re,
            basis::Kind::Sin => h2.im,
        }
}

/// Symmetrized kinetic form by quadrature.
pub fn kinetic_quadrature(fi: &BasisFunction, fj: &BasisFunction, mu_n: f64) -> (f64, f64) {
    let ll = f64::from(fi.l * (fi.l + 1));
    let f = |r: f64| {
        let gi = basis::evaluate(fi, r);
        let gj = basis::evaluate(fj, r);
        (basis_derivative(fi, r) * basis_derivative(fj, r) * r * r + ll * gi * gj) / (2.0 * mu_n)
    };
    pair_integral(fi, fj, &f, 1e-13)
}

/// Operator form `⟨g_i| −g″/2μ − g′/(μR) + l(l+1)/(2μR²) |g_j⟩` by quadrature.
pub fn kinetic_operator_quadrature(fi: &BasisFunction, fj: &BasisFunction, mu_n: f64) -> (f64, f64) {
    let ll = f64::from(fi.l * (fi.l + 1));
    let f = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let gj = basis::evaluate(fj, r);
        let applied = -basis_second_derivative(fj, r) / (2.0 * mu_n) - basis_derivative(fj, r) / (mu_n * r)
            + ll * gj / (2.0 * mu_n * r * r);
        basis::evaluate(fi, r) * applied * r * r
    };
    pair_integral(fi, fj, &f, 1e-13)
}

pub fn potential_quadrature(fi: &BasisFunction, fj: &BasisFunction, model: &PotentialModel) -> (f64, f64) {
    let f = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        basis::evaluate(fi, r) * model.eval(r).unwrap() * basis::evaluate(fj, r) * r * r
    };
    pair_integral(fi, fj, &f, 1e-13)
}
