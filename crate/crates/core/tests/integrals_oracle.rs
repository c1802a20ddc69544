//! Analytic matrix elements against adaptive quadrature.
//!
//! Errors are measured against `∫|integrand|`: for pairs whose integrand
//! changes sign the element itself can be far smaller than the numbers being
//! summed, and neither side can resolve it better than that scale.

mod common;

use std::sync::LazyLock;

use common::*;
use hhbar_core::basis::{self, BasisFunction, BasisSpec, Kind};
use hhbar_core::constants::PhysicalConstants;
use hhbar_core::integrals::{self, moment};
use hhbar_core::potential::{self, Flavor, PotentialModel};
use num_complex::Complex64;
use proptest::prelude::*;

static BASES: LazyLock<[Vec<BasisFunction>; 2]> = LazyLock::new(|| {
    [0, 1].map(|l| basis::build(&BasisSpec::reference(l)).unwrap())
});

static MODELS: LazyLock<[PotentialModel; 2]> = LazyLock::new(|| Flavor::ALL.map(PotentialModel::load_builtin));

fn mu_n() -> f64 {
    PhysicalConstants::default().nuclear_reduced_mass
}

fn pair() -> impl Strategy<Value = (usize, usize, usize)> {
    (0usize..2, 0usize..240, 0usize..240)
}

fn check(kind: &str, (i, j, l): (usize, usize, usize), analytic: f64, (quad, magnitude): (f64, f64), tol: f64) {
    let err = (analytic - quad).abs() / magnitude;
    let plain = (analytic - quad).abs() / quad.abs().max(f64::MIN_POSITIVE);
    println!("{kind} l={l} ({i},{j}) value={analytic:.6e} err/|f|={err:.2e} err/|I|={plain:.2e}");
    assert!(err <= tol, "{kind} ({i},{j}) l={l}: analytic {analytic:e} quadrature {quad:e}, scaled error {err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn overlap_matches_quadrature((l, i, j) in pair()) {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        let s = integrals::overlap_element(fi, fj).unwrap();
        check("S", (i, j, l), s, overlap_quadrature(fi, fj), 1e-10);
    }

    #[test]
    fn kinetic_matches_quadrature((l, i, j) in pair()) {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        let t = integrals::kinetic_element(fi, fj, mu_n()).unwrap();
        check("T", (i, j, l), t, kinetic_quadrature(fi, fj, mu_n()), 1e-10);
    }

    #[test]
    fn potential_matches_quadrature((l, i, j) in pair(), flavor in 0usize..2) {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        let model = &MODELS[flavor];
        let v = integrals::potential_element(fi, fj, model).unwrap();
        check("V", (i, j, l), v, potential_quadrature(fi, fj, model), 1e-8);
    }

    #[test]
    fn elements_are_exactly_symmetric((l, i, j) in pair()) {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        let model = &MODELS[0];
        prop_assert_eq!(integrals::overlap_element(fi, fj).unwrap(), integrals::overlap_element(fj, fi).unwrap());
        prop_assert_eq!(integrals::kinetic_element(fi, fj, mu_n()).unwrap(), integrals::kinetic_element(fj, fi, mu_n()).unwrap());
        prop_assert_eq!(integrals::potential_element(fi, fj, model).unwrap(), integrals::potential_element(fj, fi, model).unwrap());
    }

    #[test]
    fn imaginary_residue_is_roundoff((l, i, j) in pair()) {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        for e in [
            integrals::overlap_raw(fi, fj).unwrap(),
            integrals::kinetic_raw(fi, fj, mu_n()).unwrap(),
            integrals::potential_raw(fi, fj, &MODELS[1]).unwrap(),
        ] {
            prop_assert!(e.relative_residue() < 1e-13, "{:?}", e);
        }
    }
}

#[test]
fn complex_moment_matches_quadrature() {
    let z = Complex64::new(1.0, 1.0);
    let breaks = geometric_breaks(1e-3, cutoff(z.re), 40);
    let f = |r: f64| r * r * (-z * r * r).exp();
    let re = integrate(&|r| f(r).re, &breaks, 1e-16, 1e-14);
    let im = integrate(&|r| f(r).im, &breaks, 1e-16, 1e-14);
    let m = moment(2, z).unwrap();
    assert!((m.re - re).abs() < 1e-12, "{} vs {re}", m.re);
    assert!((m.im - im).abs() < 1e-12, "{} vs {im}", m.im);
}

#[test]
fn same_exponent_cos_sin_overlap() {
    for l in 0..3 {
        let functions = basis::build(&BasisSpec::new(4, 0.3, 6.0, l)).unwrap();
        for pair in functions.chunks(2) {
            let (c, s) = (&pair[0], &pair[1]);
            assert_eq!((c.kind, s.kind), (Kind::Cos, Kind::Sin));
            let analytic = integrals::overlap_element(c, s).unwrap();
            let (quad, magnitude) = overlap_quadrature(c, s);
            assert!(analytic.abs() > 0.01);
            assert!((analytic - quad).abs() < 1e-12 * magnitude, "l={l}: {analytic} vs {quad}");
        }
    }
}

#[test]
fn symmetrized_and_operator_kinetic_forms_agree() {
    let mu = mu_n();
    for (l, i, j) in [(0, 40, 47), (0, 101, 100), (1, 12, 30), (1, 220, 201), (0, 3, 150)] {
        let (fi, fj) = (&BASES[l][i], &BASES[l][j]);
        let (sym, sym_mag) = kinetic_quadrature(fi, fj, mu);
        let (op, op_mag) = kinetic_operator_quadrature(fi, fj, mu);
        assert!((sym - op).abs() < 1e-10 * sym_mag.max(op_mag), "({i},{j}) l={l}: {sym} vs {op}");
        let analytic = integrals::kinetic_element(fi, fj, mu).unwrap();
        assert!((analytic - op).abs() < 1e-10 * sym_mag.max(op_mag));
    }
}

#[test]
fn pure_gaussian_kinetic_energy() {
    // α = 0, l = 0: −g″/2μ − g′/(μR) on N e^{−νR²} gives ⟨T⟩ = 3ν/(2μ).
    let mu = mu_n();
    for nu in [1e4, 50.0, 0.25] {
        let norm = basis::normalization(Kind::Cos, nu, 0, 0.0).unwrap();
        let f = BasisFunction { kind: Kind::Cos, nu, l: 0, alpha_osc: 0.0, norm };
        let analytic = integrals::kinetic_element(&f, &f, mu).unwrap();
        let closed = 3.0 * f.nu / (2.0 * mu);
        let (quad, _) = kinetic_operator_quadrature(&f, &f, mu);
        assert!((analytic - closed).abs() < 1e-13 * closed);
        assert!((quad - closed).abs() < 1e-10 * closed);
    }
}

#[test]
fn tight_diagonal_potential_approaches_coulomb_reference() {
    let constants = PhysicalConstants::default();
    let model = &MODELS[0];
    for f in BASES[0].iter().take(20) {
        let v = integrals::potential_element(f, f, model).unwrap();
        let integrand = |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            let g = basis::evaluate(f, r);
            g * g * r * r * potential::short_range_reference(&constants, r, Flavor::BornOppenheimer).unwrap()
        };
        let (reference, magnitude) = pair_integral(f, f, &integrand, 1e-12);
        assert!((v - reference).abs() < 1e-3 * magnitude, "nu={}: {v} vs {reference}", f.nu);
    }
}

#[test]
fn assembled_matrices_match_pairwise_elements() {
    let functions = &BASES[1][100..140];
    let m = integrals::assemble(functions, &MODELS[1], mu_n()).unwrap();
    assert!(m.max_residue < 1e-13);
    for (i, fi) in functions.iter().enumerate() {
        for (j, fj) in functions.iter().enumerate() {
            assert_eq!(m.overlap[(i, j)], integrals::overlap_element(fi, fj).unwrap());
            assert_eq!(m.potential[(i, j)], integrals::potential_element(fi, fj, &MODELS[1]).unwrap());
        }
    }
    assert_eq!(m.kinetic, m.kinetic.transpose());
}
