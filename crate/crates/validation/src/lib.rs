//! Helpers for the acceptance target in `tests/acceptance.rs`.
//!
//! The acceptance checks live in their own package so that `cargo test
//! --workspace` runs them after every other suite.

use hhbar_core::basis::BasisSpec;
use hhbar_core::potential::Flavor;
use hhbar_core::spectrum::{SpectrumConfig, SpectrumResult};

/// Reference-basis run (120 pairs, r_min 3e-5, r_max 20).
pub fn reference_run(flavor: Flavor, l: u32) -> SpectrumResult {
    SpectrumConfig::builtin(flavor, BasisSpec::reference(l)).run().expect("reference run")
}

/// Prints `PASS [id] detail` or `FAIL [id] detail`, then asserts `pass`.
pub fn report(id: &str, pass: bool, detail: String) {
    println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id}: {detail}");
}
