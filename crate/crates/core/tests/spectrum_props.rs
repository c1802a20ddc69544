mod common;

use std::sync::LazyLock;

use common::{geometric_breaks, integrate};
use hhbar_core::basis::BasisSpec;
use hhbar_core::constants::PhysicalConstants;
use hhbar_core::potential::Flavor;
use hhbar_core::reference::LEVELS_L0;
use hhbar_core::spectrum::{self, SpectrumConfig, SpectrumResult};

fn reference_run(flavor: Flavor, l: u32) -> SpectrumResult {
    SpectrumConfig::builtin(flavor, BasisSpec::reference(l)).run().unwrap()
}

static BO_S: LazyLock<SpectrumResult> = LazyLock::new(|| reference_run(Flavor::BornOppenheimer, 0));
static BO_P: LazyLock<SpectrumResult> = LazyLock::new(|| reference_run(Flavor::BornOppenheimer, 1));
static SCALED_S: LazyLock<SpectrumResult> = LazyLock::new(|| reference_run(Flavor::MassScaled, 0));

#[test]
fn wavefunctions_are_normalized() {
    let breaks = geometric_breaks(1e-7, 60.0, 80);
    for nu in [1, 5, 17, 29] {
        let state = BO_S.state(nu).unwrap();
        let density = |r: f64| {
            let phi = BO_S.amplitude(state, r);
            phi * phi * r * r
        };
        let norm = integrate(&density, &breaks, 1e-12, 1e-10);
        assert!((norm - 1.0).abs() < 1e-6, "nu={nu}: {norm}");
    }
}

#[test]
fn ground_state_peaks_at_the_protonium_bohr_radius() {
    // u(R) ∝ R e^{−R/a} with a = 1/μ_n = 2/m_p.
    let bohr = 1.0 / PhysicalConstants::default().nuclear_reduced_mass;
    let grid = spectrum::log_grid(1e-5, 1e-2, 4000);
    let wf = spectrum::radial_wavefunction(&BO_S, 1, &grid).unwrap();
    let (peak, _) = wf
        .r
        .iter()
        .zip(&wf.u)
        .fold((0.0, f64::NEG_INFINITY), |best, (&r, &u)| if u > best.1 { (r, u) } else { best });
    assert!((peak / bohr - 1.0).abs() < 0.01, "peak at {peak}, Bohr radius {bohr}");
}

#[test]
fn p_wave_levels_lie_above_s_wave_levels() {
    for (p, s) in BO_P.bound_states().zip(BO_S.bound_states()) {
        assert!(p.energy >= s.energy, "nu={}: {} < {}", p.nu_index, p.energy, s.energy);
    }
}

#[test]
fn protonium_offsets() {
    let delta = spectrum::protonium_comparison(&BO_S, &PhysicalConstants::default()).unwrap();
    assert!((delta[0] - 0.250).abs() < 0.001);
    assert!((delta[19] - 0.252).abs() < 0.002);
    assert!((delta[28] - 0.454).abs() < 0.01, "{}", delta[28]);
}

#[test]
fn scaled_last_level() {
    let eps = spectrum::dissociation_energies(&SCALED_S);
    assert_eq!(eps.len(), 29);
    assert!((eps[28] / LEVELS_L0[28].6 - 1.0).abs() < 0.1);
}

#[test]
fn row_30_sits_above_threshold() {
    let state = BO_S.state(30).unwrap();
    assert!(!state.bound);
    assert!(state.energy > BO_S.threshold);
    assert!(BO_S.first_continuum().unwrap().nu_index == 30);
}

#[test]
fn text_basis_variant_keeps_the_last_level() {
    // The ground state of this variant is checked in the acceptance target.
    let result = SpectrumConfig::builtin(Flavor::BornOppenheimer, BasisSpec::new(120, 7e-5, 20.0, 0))
        .run()
        .unwrap();
    let eps = spectrum::dissociation_energies(&result);
    assert_eq!(eps.len(), 29);
    assert!((eps[28] / LEVELS_L0[28].5 - 1.0).abs() < 0.1, "{}", eps[28]);
}

#[test]
fn last_scaled_level_is_flat_in_r_max() {
    let base = SpectrumConfig::builtin(Flavor::MassScaled, BasisSpec::reference(0));
    let scan = spectrum::convergence_scan(&base, &[120], &[15.0, 17.0, 20.0, 22.0], &[29]).unwrap();
    let energies: Vec<f64> = scan.iter().map(|p| p.energies[0].unwrap()).collect();
    let spread = energies.iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e)) - energies.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    println!("E_29 over r_max 15..22: {energies:?}, spread {spread:e}");
    assert!(spread < 1e-6);
}

#[test]
fn short_box_loses_the_last_level() {
    let base = SpectrumConfig::builtin(Flavor::MassScaled, BasisSpec::reference(0));
    // With r_min = 3e-5 the last level survives down to r_max = 4.
    let scan = spectrum::convergence_scan(&base, &[120], &[3.0, 20.0], &[]).unwrap();
    assert!(scan[0].bound_count < 29, "{}", scan[0].bound_count);
    assert_eq!(scan[1].bound_count, 29);
}

#[test]
fn coarse_ladder_misses_the_ground_state() {
    let base = SpectrumConfig::builtin(Flavor::BornOppenheimer, BasisSpec::new(30, 7e-5, 20.0, 0));
    let scan = spectrum::convergence_scan(&base, &[30], &[20.0], &[1]).unwrap();
    let e1 = scan[0].energies[0].unwrap();
    assert!((e1 - LEVELS_L0[0].1).abs() > 1e-3, "{e1}");
}

#[test]
fn results_survive_json() {
    let text = serde_json::to_string(&*BO_P).unwrap();
    let back: SpectrumResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back.states.len(), BO_P.states.len());
    assert_eq!(back.states[3].energy, BO_P.states[3].energy);
}

#[test]
fn identical_configs_give_identical_results() {
    let again = reference_run(Flavor::BornOppenheimer, 0);
    assert_eq!(again, *BO_S);
}
