//! Proton–antiproton motion in the hydrogen–antihydrogen system.
//!
//! The crate solves the radial nuclear Schrödinger equation for two analytic
//! fits of the H–H̄ interaction (Born–Oppenheimer and mass-scaled) in a basis
//! of cosine/sine oscillating Gaussians. Every matrix element is closed form,
//! so a 240-function calculation assembles and diagonalizes in well under a
//! second.
//!
//! Module map:
//!
//! * [`potential`]: fitted curves, asymptotic references, mass scaling.
//! * [`basis`]: geometric exponent ladder and the oscillating Gaussians.
//! * [`integrals`]: complex Gaussian moments and the S, T, V elements.
//! * [`eigensolver`]: generalized symmetric eigenproblem with canonical
//!   orthogonalization.
//! * [`spectrum`]: end-to-end runs, bound/continuum classification,
//!   wavefunctions and convergence scans.
//! * [`scattering`]: tangent-line scattering length.
//! * [`wkb`]: semiclassical quantization function for a −C6/R⁶ tail.
//!
//! Atomic units (hartree, bohr, electron mass) are used throughout.

pub mod basis;
pub mod constants;
pub mod eigensolver;
mod error;
pub mod integrals;
pub mod io;
pub mod potential;
pub mod reference;
pub mod scattering;
pub mod spectrum;
pub mod wkb;

pub use error::Error;

pub use basis::{BasisFunction, BasisSpec, Kind};
pub use constants::PhysicalConstants;
pub use eigensolver::{ConditioningPolicy, GeneralizedEigenResult};
pub use potential::{Flavor, PotentialModel};
pub use scattering::TangentEstimate;
pub use spectrum::{SpectrumConfig, SpectrumResult};
pub use wkb::TailParams;
