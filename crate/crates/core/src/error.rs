use thiserror::Error;

use crate::basis::BasisError;
use crate::eigensolver::EigenError;
use crate::integrals::IntegralError;
use crate::potential::PotentialError;
use crate::scattering::ScatteringError;
use crate::spectrum::SpectrumError;
use crate::wkb::WkbError;

/// Any failure raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Wkb(#[from] WkbError),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Eigen(e) => matches!(e, EigenError::BasisCollapse { .. }),
            Error::Wkb(e) => matches!(e, WkbError::Calibration(_) | WkbError::Pole { .. }),
            Error::Spectrum(SpectrumError::Eigen(e)) => {
                matches!(e, EigenError::BasisCollapse { .. })
            }
            Error::Scattering(ScatteringError::Spectrum(SpectrumError::Eigen(e))) => {
                matches!(e, EigenError::BasisCollapse { .. })
            }
            Error::Scattering(ScatteringError::IllPosedWindow { .. }) => true,
            _ => false,
        }
    }
}
