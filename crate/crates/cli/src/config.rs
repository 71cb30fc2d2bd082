//! JSON model configuration.
//!
//! ```json
//! {
//!   "molecularMass": 20.006229,
//!   "units": "cm-1",
//!   "factors": [{ "type": "hf_variant", "variant": 1 }]
//! }
//! ```
//!
//! The molecular mass is in unified atomic mass units. `units` selects how
//! energies (levels, ground energies, power-law coefficients) are read:
//! `"cm-1"` (default) or `"J"`. Moments of inertia are always kg·m².

use anyhow::{bail, Context, Result};
use polygas::catalog::{build_hf_model, HfOptions, HfVariant, Level, DEFAULT_TRUNCATION_TEMPERATURE};
use polygas::constants::{AMU, HC};
use polygas::{DiscreteLevels, EnergyMeasure, InternalModel, SpectroscopicConstants};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Units {
    #[default]
    #[serde(rename = "cm-1")]
    Wavenumber,
    #[serde(rename = "J")]
    Joule,
}

impl Units {
    fn energy(self, e: f64) -> f64 {
        match self {
            Units::Wavenumber => e * HC,
            Units::Joule => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    Mono {
        #[serde(default)]
        epsilon0: f64,
    },
    /// Density `coefficient·I^alpha` in the configured energy unit.
    ContinuousPower {
        coefficient: f64,
        alpha: f64,
        #[serde(default)]
        epsilon0: f64,
    },
    /// `[energy, degeneracy]` pairs.
    DiscreteLevels { levels: Vec<(f64, f64)> },
    Quadratic {
        inertias: Vec<f64>,
        #[serde(default)]
        epsilon0: f64,
    },
    HfVariant {
        variant: u8,
        /// Spectroscopic constants in cm⁻¹; hydrogen fluoride if absent.
        #[serde(default)]
        constants: Option<SpectroscopicConstants>,
        /// Moment of inertia override, kg·m².
        #[serde(default)]
        inertia: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelConfig {
    pub molecular_mass: f64,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_temperature: Option<f64>,
    pub factors: Vec<Factor>,
}

impl ModelConfig {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let config: Self = serde_json::from_str(&text).with_context(|| format!("parsing model config {path}"))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.molecular_mass.is_finite() && self.molecular_mass > 0.0) {
            bail!("molecularMass must be > 0, got {}", self.molecular_mass);
        }
        if self.factors.is_empty() {
            bail!("model config needs at least one factor");
        }
        Ok(())
    }

    /// Molecular mass in kg.
    pub fn mass_kg(&self) -> f64 {
        self.molecular_mass * AMU
    }

    /// Internal model: the product of the factors.
    pub fn model(&self) -> Result<InternalModel> {
        let units = self.units;
        let options = HfOptions {
            truncation_temperature: self.truncation_temperature.unwrap_or(DEFAULT_TRUNCATION_TEMPERATURE),
            ..HfOptions::default()
        };
        let mut children = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| factor_model(f, units, &options).with_context(|| format!("factor {i}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(if children.len() == 1 { children.remove(0) } else { InternalModel::product(children)? })
    }

    /// Discrete model with the given levels, energies in J.
    pub fn from_levels(molecular_mass: f64, levels: &DiscreteLevels) -> Self {
        Self {
            molecular_mass,
            units: Units::Joule,
            truncation_temperature: None,
            factors: vec![Factor::DiscreteLevels {
                levels: levels.levels().iter().map(|l| (l.energy, l.degeneracy)).collect(),
            }],
        }
    }
}

fn factor_model(factor: &Factor, units: Units, options: &HfOptions) -> Result<InternalModel> {
    Ok(match factor {
        Factor::Mono { epsilon0 } => InternalModel::monoatomic(units.energy(*epsilon0)),
        Factor::ContinuousPower { coefficient, alpha, epsilon0 } => {
            // c·(I/u)^α d(I/u) = c·u^{−(α+1)}·I^α dI for I in J and unit size u
            let c = coefficient * units.energy(1.0).powf(-(alpha + 1.0));
            InternalModel::continuous_power(c, *alpha, units.energy(*epsilon0))?
        }
        Factor::DiscreteLevels { levels } => {
            let levels = levels.iter().map(|&(e, g)| Level { energy: units.energy(e), degeneracy: g }).collect();
            InternalModel::discrete(DiscreteLevels::new(levels)?)
        }
        Factor::Quadratic { inertias, epsilon0 } => InternalModel::quadratic(inertias.clone(), units.energy(*epsilon0))?,
        Factor::HfVariant { variant, constants, inertia } => {
            let constants = constants.unwrap_or(SpectroscopicConstants::HF);
            let inertia = inertia.unwrap_or_else(|| constants.moment_of_inertia());
            build_hf_model(HfVariant::try_from(*variant)?, &constants, inertia, options)?
        }
    })
}

/// Serialized reduced measure together with the molecular mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasureFile {
    pub molecular_mass: f64,
    #[serde(flatten)]
    pub measure: EnergyMeasure,
}

impl MeasureFile {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing measure file {path}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polygas::constants::K_B;
    use polygas::{reduce, PhysicalConstants, ThermoModel};

    fn parse(json: &str) -> Result<ModelConfig> {
        let c: ModelConfig = serde_json::from_str(json)?;
        c.validate()?;
        Ok(c)
    }

    #[test]
    fn wavenumber_levels_convert_to_joules() {
        let c = parse(r#"{"molecularMass": 2, "factors": [{"type": "discrete_levels", "levels": [[0, 1], [100, 3]]}]}"#)
            .unwrap();
        let m = reduce(&c.model().unwrap()).unwrap();
        assert!((m.atoms()[1].location - 100.0 * HC).abs() < 1e-35);
    }

    #[test]
    fn power_law_coefficient_is_unit_consistent() {
        let cm = parse(
            r#"{"molecularMass": 2, "factors": [{"type": "continuous_power", "coefficient": 2, "alpha": 1.5}]}"#,
        )
        .unwrap();
        let j = parse(&format!(
            r#"{{"molecularMass": 2, "units": "J", "factors": [{{"type": "continuous_power", "coefficient": {}, "alpha": 1.5}}]}}"#,
            2.0 * HC.powf(-2.5)
        ))
        .unwrap();
        let (a, b) = (reduce(&cm.model().unwrap()).unwrap(), reduce(&j.model().unwrap()).unwrap());
        let rel = (a.terms()[0].coefficient - b.terms()[0].coefficient).abs() / b.terms()[0].coefficient;
        assert!(rel < 1e-12);
    }

    #[test]
    fn hf_variant_factor() {
        let c = parse(r#"{"molecularMass": 20.006229, "factors": [{"type": "hf_variant", "variant": 1}]}"#).unwrap();
        let th = ThermoModel::from_model(&c.model().unwrap(), PhysicalConstants::si(c.mass_kg())).unwrap();
        let x = HC * 4138.39 / (K_B * 3000.0);
        let expect = 2.0 + 2.0 * x / x.exp_m1();
        assert!((th.delta_dof(3000.0).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn schema_violations_are_rejected() {
        assert!(parse(r#"{"molecularMass": 2, "factors": []}"#).is_err());
        assert!(parse(r#"{"molecularMass": -1, "factors": [{"type": "mono"}]}"#).is_err());
        assert!(parse(r#"{"molecularMass": 2, "factors": [{"type": "spinor"}]}"#).is_err());
        assert!(parse(r#"{"molecularMass": 2, "units": "eV", "factors": [{"type": "mono"}]}"#).is_err());
        let bad_variant = parse(r#"{"molecularMass": 2, "factors": [{"type": "hf_variant", "variant": 7}]}"#).unwrap();
        assert!(bad_variant.model().is_err());
    }

    #[test]
    fn levels_round_trip_through_config() {
        let levels = DiscreteLevels::from_pairs(&[(1e-21, 1.0), (3e-21, 2.5)]).unwrap();
        let c = ModelConfig::from_levels(4.0, &levels);
        let back: ModelConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        match back.model().unwrap() {
            InternalModel::DiscreteLevels(l) => assert_eq!(l, levels),
            other => panic!("unexpected {other:?}"),
        }
    }
}
