use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Library failures after validation: numerical breakdowns exit 3, anything
/// the library rejects as bad input exits 2.
impl From<hhbar_core::Error> for CliError {
    fn from(e: hhbar_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

macro_rules! via_core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                hhbar_core::Error::from(e).into()
            }
        }
    )*};
}

via_core_error!(
    hhbar_core::potential::PotentialError,
    hhbar_core::spectrum::SpectrumError,
    hhbar_core::scattering::ScatteringError,
    hhbar_core::wkb::WkbError
);
