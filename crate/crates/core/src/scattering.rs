//! Tangent-line scattering length from the lowest discretized continuum state.
//!
//! Just above threshold `u(R) = R·φ(R)` is close to the zero-energy form
//! `u ∝ R − a` outside the potential. A least-squares line through `u` on a
//! window gives `a` as its R-axis crossing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::{SpectrumConfig, SpectrumError, SpectrumResult};

pub const DEFAULT_WINDOW: (f64, f64) = (10.0, 14.0);

/// Samples used for the line fit across the window.
pub const WINDOW_SAMPLES: usize = 81;

/// Outer edge of the standard wavefunction grid; windows must end inside it.
pub const MAX_WINDOW_RADIUS: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("tangent construction needs an s-wave run, got l = {0}")]
    NotSWave(u32),
    #[error("run has no continuum state")]
    NoContinuum,
    #[error("window [{lo}, {hi}] must satisfy 0 < lo < hi <= {MAX_WINDOW_RADIUS}")]
    Domain { lo: f64, hi: f64 },
    #[error("need at least 2 samples with distinct R, got {0}")]
    TooFewSamples(usize),
    #[error("fitted line is flat on the window (slope {slope:e}); no axis crossing")]
    IllPosedWindow { slope: f64 },
    #[error("uncertainty scan has no configurations")]
    EmptyScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentEstimate {
    /// Scattering length (bohr).
    pub a: f64,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of `u` from the line, relative to the RMS of `u`.
    pub fit_residual: f64,
    /// Half-spread over a basis/window scan; 0 until a scan fills it.
    pub uncertainty: f64,
    /// Energy of the continuum state used, relative to threshold (hartree).
    pub continuum_energy: f64,
    pub warning: Option<String>,
}

/// Least-squares line through `(r, u)`; returns `(slope, intercept, relative rms)`.
pub fn fit_line(r: &[f64], u: &[f64]) -> Result<(f64, f64, f64), ScatteringError> {
    let n = r.len().min(u.len());
    if n < 2 {
        return Err(ScatteringError::TooFewSamples(n));
    }
    let nf = n as f64;
    let r_mean = r[..n].iter().sum::<f64>() / nf;
    let u_mean = u[..n].iter().sum::<f64>() / nf;
    let (mut srr, mut sru) = (0.0, 0.0);
    for (x, y) in r.iter().zip(u) {
        srr += (x - r_mean) * (x - r_mean);
        sru += (x - r_mean) * (y - u_mean);
    }
    if srr == 0.0 {
        return Err(ScatteringError::TooFewSamples(1));
    }
    let slope = sru / srr;
    let intercept = u_mean - slope * r_mean;
    let rms = |it: &mut dyn Iterator<Item = f64>| (it.map(|v| v * v).sum::<f64>() / nf).sqrt();
    let scale = rms(&mut u.iter().copied());
    let misfit = rms(&mut r.iter().zip(u).map(|(x, y)| y - (slope * x + intercept)));
    Ok((slope, intercept, if scale > 0.0 { misfit / scale } else { 0.0 }))
}

/// Axis crossing of the best line through `(r, u)`.
pub fn tangent_from_samples(r: &[f64], u: &[f64]) -> Result<(f64, f64, f64, f64), ScatteringError> {
    let (slope, intercept, residual) = fit_line(r, u)?;
    let span = r.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - r.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let size = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(slope.abs() * span > 1e-10 * size) || size == 0.0 {
        return Err(ScatteringError::IllPosedWindow { slope });
    }
    Ok((-intercept / slope, slope, intercept, residual))
}

fn check_window(window: (f64, f64)) -> Result<(), ScatteringError> {
    let (lo, hi) = window;
    if lo > 0.0 && lo < hi && hi <= MAX_WINDOW_RADIUS {
        Ok(())
    } else {
        Err(ScatteringError::Domain { lo, hi })
    }
}

pub fn tangent_scattering_length(result: &SpectrumResult, window: (f64, f64)) -> Result<TangentEstimate, ScatteringError> {
    if result.l != 0 {
        return Err(ScatteringError::NotSWave(result.l));
    }
    check_window(window)?;
    let state = result.first_continuum().ok_or(ScatteringError::NoContinuum)?;
    let (r, u) = window_samples(result, window)?;
    let (a, slope, intercept, fit_residual) = tangent_from_samples(&r, &u)?;
    Ok(TangentEstimate {
        a,
        window,
        slope,
        intercept,
        fit_residual,
        uncertainty: 0.0,
        continuum_energy: state.energy - result.threshold,
        warning: None,
    })
}

/// `(R, u)` of the lowest continuum state on [`WINDOW_SAMPLES`] evenly spaced points.
pub fn window_samples(result: &SpectrumResult, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>), ScatteringError> {
    check_window(window)?;
    let state = result.first_continuum().ok_or(ScatteringError::NoContinuum)?;
    let step = (window.1 - window.0) / (WINDOW_SAMPLES - 1) as f64;
    let r: Vec<f64> = (0..WINDOW_SAMPLES).map(|i| window.0 + step * i as f64).collect();
    let u = r.iter().map(|&x| x * result.amplitude(state, x)).collect();
    Ok((r, u))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub n_max: usize,
    pub r_max: f64,
    pub window: (f64, f64),
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyScan {
    /// Estimate at the base configuration, with `uncertainty` filled in.
    pub estimate: TangentEstimate,
    pub samples: Vec<ScanSample>,
}

/// Central value from `base` on `window`; uncertainty is half the spread of
/// `a` over every `(n_max, r_max, window)` combination.
pub fn uncertainty_scan(
    base: &SpectrumConfig,
    window: (f64, f64),
    n_max_values: &[usize],
    r_max_values: &[f64],
    windows: &[(f64, f64)],
) -> Result<UncertaintyScan, ScatteringError> {
    let combos: Vec<(usize, f64)> = n_max_values
        .iter()
        .flat_map(|&n| r_max_values.iter().map(move |&r| (n, r)))
        .collect();
    if combos.is_empty() || windows.is_empty() {
        return Err(ScatteringError::EmptyScan);
    }
    let mut estimate = tangent_scattering_length(&base.run()?, window)?;

    let per_basis: Vec<Vec<ScanSample>> = combos
        .par_iter()
        .map(|&(n_max, r_max)| {
            let mut config = base.clone();
            config.basis.n_max = n_max;
            config.basis.r_max = r_max;
            let result = config.run()?;
            windows
                .iter()
                .map(|&w| {
                    let a = tangent_scattering_length(&result, w)?.a;
                    Ok(ScanSample { n_max, r_max, window: w, a })
                })
                .collect()
        })
        .collect::<Result<_, ScatteringError>>()?;
    let samples: Vec<ScanSample> = per_basis.into_iter().flatten().collect();

    let lo = samples.iter().map(|s| s.a).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.a).fold(f64::NEG_INFINITY, f64::max);
    estimate.uncertainty = 0.5 * (hi - lo);
    if samples.len() < 3 {
        estimate.warning = Some(format!("uncertainty from only {} scan point(s)", samples.len()));
    }
    Ok(UncertaintyScan { estimate, samples })
}
