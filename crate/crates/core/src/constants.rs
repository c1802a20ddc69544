use serde::{Deserialize, Serialize};

/// Proton mass in electron masses.
pub const PROTON_MASS: f64 = 1836.15267247;

/// Positronium ground-state energy (hartree).
pub const POSITRONIUM_GROUND: f64 = -0.25;

/// Internuclear distance below which the p–p̄ dipole cannot bind the leptons (bohr).
pub const CRITICAL_DISTANCE: f64 = 0.7427;

/// Dissociation threshold of the Born–Oppenheimer curve (hartree).
pub const BO_THRESHOLD: f64 = -1.0;

/// Mass-dependent constants of the H–H̄ problem.
///
/// Tests replace the proton mass to probe limits (for instance `m_p → ∞`,
/// where every mass correction vanishes).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub proton_mass: f64,
    /// Electron–proton reduced mass `m_p / (m_p + 1)`.
    pub mu: f64,
    /// Nuclear reduced mass `m_p / 2`.
    pub nuclear_reduced_mass: f64,
    pub positronium_ground: f64,
    pub critical_distance: f64,
    pub bo_threshold: f64,
    /// Threshold of the mass-scaled curve, `−mu`.
    pub scaled_threshold: f64,
}

impl PhysicalConstants {
    pub fn with_proton_mass(proton_mass: f64) -> Self {
        let mu = if proton_mass.is_finite() {
            proton_mass / (proton_mass + 1.0)
        } else {
            1.0
        };
        Self {
            proton_mass,
            mu,
            nuclear_reduced_mass: proton_mass / 2.0,
            positronium_ground: POSITRONIUM_GROUND,
            critical_distance: CRITICAL_DISTANCE,
            bo_threshold: BO_THRESHOLD,
            scaled_threshold: -mu,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::with_proton_mass(PROTON_MASS)
    }
}
