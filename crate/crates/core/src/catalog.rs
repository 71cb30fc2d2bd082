//! State-based descriptions of a molecule's internal structure.
//!
//! Constructors cover the structureless particle, a continuous power-law
//! weight, discrete quantum levels, classical quadratic (rotor) energies and
//! products of independent factors, plus four rotation–vibration models of
//! hydrogen fluoride built from spectroscopic constants.

use serde::{Deserialize, Serialize};

use crate::constants::{wavenumber_to_joule, C_CM, K_B, PLANCK};
use crate::error::{domain, Error, Result};

/// Gibbs tail mass left out when an infinite ladder is truncated.
pub const TRUNCATION_TAIL_MASS: f64 = 1e-14;
/// Temperature (K) at which truncated ladders certify [`TRUNCATION_TAIL_MASS`].
pub const DEFAULT_TRUNCATION_TEMPERATURE: f64 = 1e5;
pub const DEFAULT_J_CAP: u32 = 200;
pub const DEFAULT_BOUND_N_CAP: u32 = 100;

/// One energy level `(ε_q, r_q)`; the degeneracy is the μ-mass of the level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: f64,
}

/// Finite family of levels, `μ({q}) = r_q`, `ε(q) = ε_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLevels {
    levels: Vec<Level>,
    /// Set when the family is a truncation of an infinite ladder.
    truncation_temperature: Option<f64>,
}

impl DiscreteLevels {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("discrete model needs at least one level".into()));
        }
        for l in &levels {
            if !l.energy.is_finite() {
                return Err(Error::InvalidModel(format!("level energy must be finite, got {}", l.energy)));
            }
            if !(l.degeneracy.is_finite() && l.degeneracy > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "level degeneracy must be finite and > 0, got {}",
                    l.degeneracy
                )));
            }
        }
        Ok(Self { levels, truncation_temperature: None })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(energy, degeneracy)| Level { energy, degeneracy }).collect())
    }

    /// Harmonic ladder `zero_point + spacing·n`, unit degeneracy, truncated
    /// where the Gibbs tail at `truncation_temperature` drops below
    /// [`TRUNCATION_TAIL_MASS`].
    pub fn harmonic(spacing: f64, zero_point: f64, truncation_temperature: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(domain(format!("ladder spacing must be > 0, got {spacing}")));
        }
        check_truncation_temperature(truncation_temperature)?;
        // tail/Z = exp(-x (n_top + 1)) for the geometric ladder
        let x = spacing / (K_B * truncation_temperature);
        let n_top = ((-TRUNCATION_TAIL_MASS.ln()) / x).floor() as usize;
        let levels = (0..=n_top)
            .map(|n| Level { energy: zero_point + spacing * n as f64, degeneracy: 1.0 })
            .collect();
        Ok(Self { levels, truncation_temperature: Some(truncation_temperature) })
    }

    /// Rigid rotor `B·J(J+1)` with degeneracy `2J+1`, truncated by the Gibbs
    /// tail at `truncation_temperature` or at `j_cap`, whichever comes first.
    pub fn rigid_rotor(b: f64, truncation_temperature: f64, j_cap: u32) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(domain(format!("rotational constant must be > 0, got {b}")));
        }
        check_truncation_temperature(truncation_temperature)?;
        let theta = b / (K_B * truncation_temperature);
        let mut levels = Vec::new();
        let mut z = 0.0;
        for j in 0..=j_cap {
            let jf = j as f64;
            // Σ_{J≥j} (2J+1) e^{-θJ(J+1)} ≤ e^{-θ(j-1)j}/θ once past the peak
            if jf > (0.5 / theta).sqrt() && (-theta * (jf - 1.0) * jf).exp() / theta < TRUNCATION_TAIL_MASS * z {
                break;
            }
            let w = (2.0 * jf + 1.0) * (-theta * jf * (jf + 1.0)).exp();
            z += w;
            levels.push(Level { energy: b * jf * (jf + 1.0), degeneracy: 2.0 * jf + 1.0 });
        }
        Ok(Self { levels, truncation_temperature: Some(truncation_temperature) })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn truncation_temperature(&self) -> Option<f64> {
        self.truncation_temperature
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels.iter().map(|l| l.energy).fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy(&self) -> f64 {
        self.levels.iter().map(|l| l.energy).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_truncation_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("truncation temperature must be > 0, got {t}")))
    }
}

/// Description of the internal states `(E, A, μ)` and energy `ε` of a molecule.
#[derive(Debug, Clone, PartialEq)]
pub enum InternalModel {
    /// `E = {0}`, `μ({0}) = 1`.
    Monoatomic { epsilon0: f64 },
    /// `E = R₊`, `dμ = coefficient·I^α dI`, `ε(I) = ε⁰ + I`.
    ContinuousPower { coefficient: f64, alpha: f64, epsilon0: f64 },
    DiscreteLevels(DiscreteLevels),
    /// `E = R^d` with Lebesgue measure, `ε(z) = ε⁰ + ½ Σ 𝓘ᵢ zᵢ²`.
    QuadraticClassical { inertias: Vec<f64>, epsilon0: f64 },
    /// Independent factors: product space, product measure, summed energies.
    Product(Vec<InternalModel>),
}

impl InternalModel {
    pub fn monoatomic(epsilon0: f64) -> Self {
        Self::Monoatomic { epsilon0 }
    }

    pub fn continuous_power(coefficient: f64, alpha: f64, epsilon0: f64) -> Result<Self> {
        if !(coefficient.is_finite() && coefficient > 0.0) {
            return Err(Error::InvalidModel(format!("weight coefficient must be > 0, got {coefficient}")));
        }
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::InvalidModel(format!("weight exponent must be > -1, got {alpha}")));
        }
        Ok(Self::ContinuousPower { coefficient, alpha, epsilon0 })
    }

    pub fn discrete(levels: DiscreteLevels) -> Self {
        Self::DiscreteLevels(levels)
    }

    pub fn quadratic(inertias: Vec<f64>, epsilon0: f64) -> Result<Self> {
        if !(1..=3).contains(&inertias.len()) {
            return Err(Error::InvalidModel(format!(
                "quadratic model needs 1 to 3 inertias, got {}",
                inertias.len()
            )));
        }
        if let Some(bad) = inertias.iter().find(|i| !(i.is_finite() && **i > 0.0)) {
            return Err(Error::InvalidModel(format!("moments of inertia must be > 0, got {bad}")));
        }
        Ok(Self::QuadraticClassical { inertias, epsilon0 })
    }

    pub fn product(children: Vec<InternalModel>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidModel("product of zero factors".into()));
        }
        Ok(Self::Product(children))
    }

    /// Essential infimum `ε⁰` of the energy function.
    pub fn ground_energy(&self) -> f64 {
        match self {
            Self::Monoatomic { epsilon0 }
            | Self::ContinuousPower { epsilon0, .. }
            | Self::QuadraticClassical { epsilon0, .. } => *epsilon0,
            Self::DiscreteLevels(d) => d.ground_energy(),
            Self::Product(children) => children.iter().map(Self::ground_energy).sum(),
        }
    }

    /// Supremum of the energy function, when it is bounded above.
    pub fn energy_upper_bound(&self) -> Option<f64> {
        match self {
            Self::Monoatomic { epsilon0 } => Some(*epsilon0),
            Self::DiscreteLevels(d) if d.truncation_temperature.is_none() => Some(d.max_energy()),
            Self::Product(children) => children.iter().map(Self::energy_upper_bound).sum(),
            _ => None,
        }
    }
}

/// Spectroscopic constants of a diatomic molecule, all in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopicConstants {
    pub nu_e: f64,
    pub nu_e_x_e: f64,
    pub b_over_hc: f64,
    pub alpha_over_hc: f64,
    pub d_over_hc: f64,
}

impl SpectroscopicConstants {
    /// Handbook values for ¹H¹⁹F.
    pub const HF: Self = Self {
        nu_e: 4138.39,
        nu_e_x_e: 89.94,
        b_over_hc: 20.95,
        alpha_over_hc: 0.793,
        d_over_hc: 0.00215,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.nu_e, self.nu_e_x_e, self.b_over_hc, self.alpha_over_hc, self.d_over_hc];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidModel("spectroscopic constants must be positive".into()));
        }
        if self.nu_e_x_e >= 0.5 * self.nu_e {
            return Err(Error::InvalidModel(format!(
                "nu_e x_e = {} >= nu_e / 2 = {}: the Morse ladder has no bound states",
                self.nu_e_x_e,
                0.5 * self.nu_e
            )));
        }
        Ok(())
    }

    /// Anharmonicity `x_e`.
    pub fn x_e(&self) -> f64 {
        self.nu_e_x_e / self.nu_e
    }

    /// Highest bound vibrational quantum number of the Morse ladder,
    /// `⌊1/(2x_e)⌋ − 1`.
    pub fn n_max(&self) -> u32 {
        ((self.nu_e / (2.0 * self.nu_e_x_e)).floor() as i64 - 1).max(0) as u32
    }

    /// Moment of inertia `h/(8π²cB)` implied by the rotational constant, kg·m².
    pub fn moment_of_inertia(&self) -> f64 {
        PLANCK / (8.0 * std::f64::consts::PI.powi(2) * C_CM * self.b_over_hc)
    }

    /// Harmonic vibrational level `hcν_e(n + ½)`, J.
    pub fn harmonic_energy(&self, n: u32) -> f64 {
        wavenumber_to_joule(self.nu_e) * (n as f64 + 0.5)
    }

    /// Morse vibrational level `hcν_e(n + ½) − hcν_e x_e(n + ½)²`, J.
    pub fn morse_energy(&self, n: u32) -> f64 {
        let h = n as f64 + 0.5;
        wavenumber_to_joule(self.nu_e) * h - wavenumber_to_joule(self.nu_e_x_e) * h * h
    }

    /// Coupled rotation–vibration energy with centrifugal distortion and a
    /// Morse vibration, J.
    pub fn rovib_energy(&self, j: u32, n: u32) -> f64 {
        let h = n as f64 + 0.5;
        let jj = j as f64 * (j as f64 + 1.0);
        let b = wavenumber_to_joule(self.b_over_hc);
        let alpha = wavenumber_to_joule(self.alpha_over_hc);
        let d = wavenumber_to_joule(self.d_over_hc);
        (b - alpha * h) * jj - d * jj * jj + self.morse_energy(n)
    }
}

/// The four rotation–vibration models of a diatomic molecule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HfVariant {
    /// Classical rotor × harmonic oscillator.
    HarmonicSemiClassical = 1,
    /// Classical rotor × Morse oscillator (finite ladder).
    AnharmonicSemiClassical = 2,
    /// Quantum rigid rotor × harmonic oscillator.
    SimplifiedQuantum = 3,
    /// Coupled non-rigid rotor and Morse oscillator over the bound states.
    ImprovedQuantum = 4,
}

impl TryFrom<u8> for HfVariant {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::HarmonicSemiClassical),
            2 => Ok(Self::AnharmonicSemiClassical),
            3 => Ok(Self::SimplifiedQuantum),
            4 => Ok(Self::ImprovedQuantum),
            _ => Err(Error::InvalidModel(format!("HF variant must be 1..=4, got {v}"))),
        }
    }
}

/// Truncation settings for the infinite ladders and the bound-state scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfOptions {
    pub truncation_temperature: f64,
    pub j_cap: u32,
    pub bound_n_cap: u32,
}

impl Default for HfOptions {
    fn default() -> Self {
        Self {
            truncation_temperature: DEFAULT_TRUNCATION_TEMPERATURE,
            j_cap: DEFAULT_J_CAP,
            bound_n_cap: DEFAULT_BOUND_N_CAP,
        }
    }
}

pub fn build_hf_model(
    variant: HfVariant,
    constants: &SpectroscopicConstants,
    inertia: f64,
    options: &HfOptions,
) -> Result<InternalModel> {
    constants.validate()?;
    let rotor = || InternalModel::quadratic(vec![inertia, inertia], 0.0);
    let hc_nu = wavenumber_to_joule(constants.nu_e);
    let harmonic = || {
        DiscreteLevels::harmonic(hc_nu, 0.5 * hc_nu, options.truncation_temperature).map(InternalModel::DiscreteLevels)
    };
    match variant {
        HfVariant::HarmonicSemiClassical => InternalModel::product(vec![rotor()?, harmonic()?]),
        HfVariant::AnharmonicSemiClassical => {
            let levels = (0..=constants.n_max())
                .map(|n| Level { energy: constants.morse_energy(n), degeneracy: 1.0 })
                .collect();
            InternalModel::product(vec![rotor()?, InternalModel::DiscreteLevels(DiscreteLevels::new(levels)?)])
        }
        HfVariant::SimplifiedQuantum => {
            let rot = DiscreteLevels::rigid_rotor(
                wavenumber_to_joule(constants.b_over_hc),
                options.truncation_temperature,
                options.j_cap,
            )?;
            InternalModel::product(vec![InternalModel::DiscreteLevels(rot), harmonic()?])
        }
        HfVariant::ImprovedQuantum => {
            let states = bound_states(constants, options.j_cap, options.bound_n_cap)?;
            let levels = states
                .into_iter()
                .map(|(j, n)| Level { energy: constants.rovib_energy(j, n), degeneracy: 2.0 * j as f64 + 1.0 })
                .collect();
            Ok(InternalModel::DiscreteLevels(DiscreteLevels::new(levels)?))
        }
    }
}

/// Whether `(j, n)` is a bound state of the coupled rotation–vibration model:
/// energy nondecreasing in `J` at fixed `n`, nondecreasing in `n` at fixed
/// `J`, and `n` within the Morse ladder. The `J − 1` comparison is skipped at
/// `J = 0` and the `n − 1` comparison at `n = 0`.
pub fn is_bound_state(constants: &SpectroscopicConstants, j: u32, n: u32) -> bool {
    if n > constants.n_max() {
        return false;
    }
    let e = constants.rovib_energy(j, n);
    let rot_ok = j == 0 || e >= constants.rovib_energy(j - 1, n);
    let vib_ok = n == 0 || e >= constants.rovib_energy(j, n - 1);
    rot_ok && vib_ok
}

/// Enumerates the bound states within `[0, j_cap] × [0, n_cap]`. A member on
/// either cap means the scan did not close and is reported as an error.
pub fn bound_states(constants: &SpectroscopicConstants, j_cap: u32, n_cap: u32) -> Result<Vec<(u32, u32)>> {
    constants.validate()?;
    let mut states = Vec::new();
    for n in 0..=n_cap {
        for j in 0..=j_cap {
            if is_bound_state(constants, j, n) {
                if j == j_cap || n == n_cap {
                    return Err(Error::CapTooSmall { j, n, j_cap, n_cap });
                }
                states.push((j, n));
            }
        }
    }
    Ok(states)
}
