//! Physical constants (CODATA exact SI values).

use serde::{Deserialize, Serialize};

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in cm/s (spectroscopic wavenumbers are in cm⁻¹).
pub const C_CM: f64 = 2.997_924_58e10;
/// hc in J·cm: converts a wavenumber in cm⁻¹ to an energy in J.
pub const HC: f64 = PLANCK * C_CM;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a ¹H¹⁹F molecule, kg.
pub const HF_MASS: f64 = 20.006_229 * AMU;

/// Converts a wavenumber (cm⁻¹) into an energy (J).
pub fn wavenumber_to_joule(nu: f64) -> f64 {
    HC * nu
}

/// Converts an energy (J) into a wavenumber (cm⁻¹).
pub fn joule_to_wavenumber(e: f64) -> f64 {
    e / HC
}

/// Constants a thermodynamic or kinetic calculation depends on.
///
/// `k_b`, `h` and `c` default to SI; a scaled system (`k_b = 1`, `mass = 1`)
/// is convenient for dimensionless shock-tube problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub k_b: f64,
    pub h: f64,
    /// cm/s
    pub c: f64,
    /// Molecular mass, kg.
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn si(mass: f64) -> Self {
        assert!(mass > 0.0, "molecular mass must be positive, got {mass}");
        Self { k_b: K_B, h: PLANCK, c: C_CM, mass }
    }

    /// Dimensionless units with `k_B = 1` and the given molecular mass.
    pub fn scaled(mass: f64) -> Self {
        assert!(mass > 0.0, "molecular mass must be positive, got {mass}");
        Self { k_b: 1.0, h: 1.0, c: 1.0, mass }
    }

    pub fn is_valid(&self) -> bool {
        [self.k_b, self.h, self.c, self.mass]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hc_over_kb_matches_second_radiation_constant() {
        // 1.438777 cm·K
        assert!((HC / K_B - 1.438_777).abs() < 1e-6);
    }

    #[test]
    fn hf_vibrational_temperature() {
        let t_vib = wavenumber_to_joule(4138.39) / K_B;
        assert!((t_vib - 5954.2).abs() < 0.05, "{t_vib}");
    }
}
