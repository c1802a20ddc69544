//! Full runs: basis → matrices → eigenpairs → labelled states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{self, BasisError, BasisFunction, BasisSpec, Kind};
use crate::constants::PhysicalConstants;
use crate::eigensolver::{self, ConditioningPolicy, EigenError};
use crate::integrals::{self, IntegralError};
use crate::potential::{self, Flavor, PotentialError, PotentialModel};

/// States closer than this to threshold are treated as continuum and flagged.
pub const THRESHOLD_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("protonium comparison applies to l = 0 only, got l = {0}")]
    NotApplicable(u32),
    #[error("state {nu} requested but the run has {available} states")]
    StateIndex { nu: usize, available: usize },
    #[error("invalid scan: {0}")]
    Scan(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub model: PotentialModel,
    pub basis: BasisSpec,
    pub policy: ConditioningPolicy,
    pub constants: PhysicalConstants,
}

impl SpectrumConfig {
    /// Built-in curve with τ = 1e-12 and compensated products; plain
    /// products leave `cᵀSc` off the identity by ~1e-7 on 240 functions.
    pub fn builtin(flavor: Flavor, basis: BasisSpec) -> Self {
        let constants = PhysicalConstants::default();
        Self {
            model: PotentialModel::load_builtin_with(flavor, &constants),
            basis,
            policy: ConditioningPolicy { compensated: true, ..ConditioningPolicy::default() },
            constants,
        }
    }

    pub fn with_policy(mut self, policy: ConditioningPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn run(&self) -> Result<SpectrumResult, SpectrumError> {
        run(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// 1-based, ascending with energy.
    pub nu_index: usize,
    pub energy: f64,
    pub coefficients: Vec<f64>,
    pub bound: bool,
    pub near_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub retained_dimension: usize,
    pub dropped_count: usize,
    pub overlap_condition: f64,
    /// Largest relative imaginary roundoff dropped during assembly.
    pub integral_residue: f64,
    /// Result of [`eigensolver::residual_check`] on the assembled problem.
    pub eigen_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub flavor: Flavor,
    pub l: u32,
    pub basis: BasisSpec,
    pub functions: Vec<BasisFunction>,
    pub states: Vec<State>,
    pub threshold: f64,
    pub diagnostics: Diagnostics,
}

impl SpectrumResult {
    pub fn bound_states(&self) -> impl Iterator<Item = &State> {
        self.states.iter().filter(|s| s.bound)
    }

    pub fn bound_count(&self) -> usize {
        self.bound_states().count()
    }

    /// Lowest state at or above threshold.
    pub fn first_continuum(&self) -> Option<&State> {
        self.states.iter().find(|s| !s.bound)
    }

    pub fn state(&self, nu: usize) -> Result<&State, SpectrumError> {
        nu.checked_sub(1)
            .and_then(|i| self.states.get(i))
            .ok_or(SpectrumError::StateIndex { nu, available: self.states.len() })
    }

    /// `φ(R) = Σ c_i g_i(R)` for one state.
    pub fn amplitude(&self, state: &State, r: f64) -> f64 {
        self.functions
            .iter()
            .zip(&state.coefficients)
            .map(|(f, c)| c * basis::evaluate(f, r))
            .sum()
    }
}

pub fn run(config: &SpectrumConfig) -> Result<SpectrumResult, SpectrumError> {
    config.model.validate()?;
    let functions = basis::build(&config.basis)?;
    let mu_n = config.constants.nuclear_reduced_mass;
    let matrices = integrals::assemble(&functions, &config.model, mu_n)?;
    let h = matrices.hamiltonian();
    let solution = eigensolver::solve(&h, &matrices.overlap, config.policy)?;
    let eigen_residual = eigensolver::residual_check(&h, &matrices.overlap, &solution);

    let threshold = config.model.threshold;
    let states = solution
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &energy)| {
            let mut coefficients: Vec<f64> = solution.coefficients.column(k).iter().copied().collect();
            if leading_sign(&functions, &coefficients) < 0.0 {
                coefficients.iter_mut().for_each(|c| *c = -*c);
            }
            State {
                nu_index: k + 1,
                energy,
                coefficients,
                bound: energy < threshold - THRESHOLD_GUARD,
                near_threshold: (energy - threshold).abs() <= THRESHOLD_GUARD,
            }
        })
        .collect();

    Ok(SpectrumResult {
        flavor: config.model.flavor,
        l: config.basis.l,
        basis: config.basis,
        functions,
        states,
        threshold,
        diagnostics: Diagnostics {
            retained_dimension: solution.retained_dimension,
            dropped_count: solution.dropped_count,
            overlap_condition: solution.overlap_condition,
            integral_residue: matrices.max_residue,
            eigen_residual,
        },
    })
}

/// Sign of the first lobe. Near the origin `φ ≈ R^l Σ_cos c_i N_i`; when that
/// sum cancels to noise the first sizeable grid sample decides.
fn leading_sign(functions: &[BasisFunction], coefficients: &[f64]) -> f64 {
    let (sum, scale) = functions
        .iter()
        .zip(coefficients)
        .filter(|(f, _)| f.kind == Kind::Cos)
        .fold((0.0, 0.0), |(s, a), (f, c)| (s + c * f.norm, a + (c * f.norm).abs()));
    if sum.abs() > 1e-8 * scale {
        return sum.signum();
    }
    let grid = default_log_grid();
    let samples: Vec<f64> = grid
        .iter()
        .map(|&r| functions.iter().zip(coefficients).map(|(f, c)| c * basis::evaluate(f, r)).sum())
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    samples
        .iter()
        .find(|v| v.abs() > 1e-3 * peak)
        .map_or(1.0, |v| v.signum())
}

/// `threshold − E` for every bound state.
pub fn dissociation_energies(result: &SpectrumResult) -> Vec<f64> {
    result.bound_states().map(|s| result.threshold - s.energy).collect()
}

/// `δ_ν = E^Pn_ν − E_ν` for every bound state of an s-wave run.
pub fn protonium_comparison(result: &SpectrumResult, constants: &PhysicalConstants) -> Result<Vec<f64>, SpectrumError> {
    if result.l != 0 {
        return Err(SpectrumError::NotApplicable(result.l));
    }
    result
        .bound_states()
        .map(|s| Ok(potential::protonium_level(s.nu_index as u32, constants)? - s.energy))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    /// `u = R·φ`.
    pub u: Vec<f64>,
}

pub fn radial_wavefunction(result: &SpectrumResult, nu: usize, grid: &[f64]) -> Result<Wavefunction, SpectrumError> {
    let state = result.state(nu)?;
    let phi: Vec<f64> = grid.iter().map(|&r| result.amplitude(state, r)).collect();
    let u = grid.iter().zip(&phi).map(|(r, p)| r * p).collect();
    Ok(Wavefunction { r: grid.to_vec(), phi, u })
}

/// Sign changes between lobes of `values` whose extremum reaches
/// `relative_floor` times the global peak. Lobes below the floor (roundoff
/// wiggles in a decaying tail) are merged into their neighbours.
pub fn node_count(values: &[f64], relative_floor: f64) -> usize {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lobes: Vec<(f64, f64)> = Vec::new();
    for &v in values.iter().filter(|v| **v != 0.0) {
        match lobes.last_mut() {
            Some((sign, size)) if *sign == v.signum() => *size = size.max(v.abs()),
            _ => lobes.push((v.signum(), v.abs())),
        }
    }
    let significant: Vec<f64> = lobes
        .into_iter()
        .filter(|(_, size)| *size >= relative_floor * peak)
        .map(|(sign, _)| sign)
        .collect();
    significant.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Logarithmic grid from `lo` to `hi` (inclusive).
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (step * i as f64).exp()).collect()
}

/// 2000 points from 3e-5 to 30 bohr.
pub fn default_log_grid() -> Vec<f64> {
    log_grid(3e-5, 30.0, 2000)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub n_max: usize,
    pub r_max: f64,
    pub bound_count: usize,
    /// Energies of the requested states; `None` where the run has fewer states.
    pub energies: Vec<Option<f64>>,
}

/// Runs every `(n_max, r_max)` combination of `base` and records the energies
/// of `states` (1-based indices).
pub fn convergence_scan(
    base: &SpectrumConfig,
    n_max_values: &[usize],
    r_max_values: &[f64],
    states: &[usize],
) -> Result<Vec<ScanPoint>, SpectrumError> {
    if n_max_values.is_empty() || r_max_values.is_empty() {
        return Err(SpectrumError::Scan("empty parameter list".into()));
    }
    if !n_max_values.windows(2).all(|w| w[0] < w[1]) || !r_max_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(SpectrumError::Scan("parameter lists must be strictly increasing".into()));
    }
    let grid: Vec<(usize, f64)> = n_max_values
        .iter()
        .flat_map(|&n| r_max_values.iter().map(move |&r| (n, r)))
        .collect();
    grid.par_iter()
        .map(|&(n_max, r_max)| {
            let mut config = base.clone();
            config.basis.n_max = n_max;
            config.basis.r_max = r_max;
            let result = config.run()?;
            Ok(ScanPoint {
                n_max,
                r_max,
                bound_count: result.bound_count(),
                energies: states.iter().map(|&nu| result.state(nu).ok().map(|s| s.energy)).collect(),
            })
        })
        .collect()
}
