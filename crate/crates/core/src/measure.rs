//! Measures on the grounded energy half-line.
//!
//! An [`EnergyMeasure`] is a finite sum of Dirac atoms and shifted-power
//! densities `c·(I − s)^α·1{I ≥ s}`. The class is closed under convolution
//! and every exponential moment has a closed form, so partition functions
//! and their derivatives never need quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{ln_beta, ln_gamma, log_sum_exp, CompensatedSum};

/// Relative distance below which atoms are merged during convolution.
const ATOM_MERGE_RTOL: f64 = 1e-12;

/// Dirac mass `mass·δ(I − location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Result<Self> {
        if !(location.is_finite() && location >= 0.0) {
            return Err(domain(format!("atom location must be finite and >= 0, got {location}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(domain(format!("atom mass must be finite and > 0, got {mass}")));
        }
        Ok(Self { location, mass })
    }

    fn ln_weight(&self, beta: f64) -> f64 {
        self.mass.ln() - beta * self.location
    }
}

/// Density `coefficient·(I − shift)^exponent` on `I ≥ shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedPowerTerm {
    pub coefficient: f64,
    pub shift: f64,
    pub exponent: f64,
}

impl ShiftedPowerTerm {
    pub fn new(coefficient: f64, shift: f64, exponent: f64) -> Result<Self> {
        if !(coefficient.is_finite() && coefficient > 0.0) {
            return Err(domain(format!("term coefficient must be finite and > 0, got {coefficient}")));
        }
        if !(shift.is_finite() && shift >= 0.0) {
            return Err(domain(format!("term shift must be finite and >= 0, got {shift}")));
        }
        // exponent == -1 makes every Laplace moment diverge at the shift
        if !(exponent.is_finite() && exponent > -1.0) {
            return Err(domain(format!("term exponent must be > -1, got {exponent}")));
        }
        Ok(Self { coefficient, shift, exponent })
    }

    /// Density value at `energy`.
    pub fn density(&self, energy: f64) -> f64 {
        if energy < self.shift {
            0.0
        } else if self.exponent == 0.0 {
            self.coefficient
        } else {
            self.coefficient * (energy - self.shift).powf(self.exponent)
        }
    }

    /// `ln ∫ e^{−βI} c (I − s)^α dI`
    fn ln_weight(&self, beta: f64) -> f64 {
        let a1 = self.exponent + 1.0;
        self.coefficient.ln() - beta * self.shift + ln_gamma(a1) - a1 * beta.ln()
    }

    /// Antiderivative of the mass, `c·x^{α+1}/(α+1)` with `x = I − s`.
    pub(crate) fn mass_below(&self, energy: f64) -> f64 {
        let x = energy - self.shift;
        if x <= 0.0 {
            return 0.0;
        }
        let a1 = self.exponent + 1.0;
        self.coefficient * x.powf(a1) / a1
    }

    /// Antiderivative of the first moment, `c·(s·x^{α+1}/(α+1) + x^{α+2}/(α+2))`.
    pub(crate) fn first_moment_below(&self, energy: f64) -> f64 {
        let x = energy - self.shift;
        if x <= 0.0 {
            return 0.0;
        }
        let a1 = self.exponent + 1.0;
        let a2 = self.exponent + 2.0;
        self.coefficient * (self.shift * x.powf(a1) / a1 + x.powf(a2) / a2)
    }
}

/// Gibbs statistics of a measure at a fixed inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsMoments {
    /// `ln Z(β)`
    pub ln_z: f64,
    /// Gibbs mean of the grounded energy.
    pub mean: f64,
    /// Gibbs variance of the grounded energy.
    pub variance: f64,
}

/// Grounded measure `μ^ε̄` together with the ground energy `ε⁰` it was
/// shifted by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", rename_all = "camelCase")]
pub struct EnergyMeasure {
    ground_offset: f64,
    atoms: Vec<Atom>,
    terms: Vec<ShiftedPowerTerm>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawMeasure {
    #[serde(default)]
    ground_offset: f64,
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    terms: Vec<ShiftedPowerTerm>,
}

impl TryFrom<RawMeasure> for EnergyMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| Atom::new(a.location, a.mass))
            .collect::<Result<Vec<_>>>()?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| ShiftedPowerTerm::new(t.coefficient, t.shift, t.exponent))
            .collect::<Result<Vec<_>>>()?;
        EnergyMeasure::ground(raw.ground_offset, atoms, terms)
    }
}

impl EnergyMeasure {
    /// Shifts the raw measure so that the infimum of its support is zero,
    /// adding the shift to `offset`. Idempotent.
    pub fn ground(offset: f64, mut atoms: Vec<Atom>, mut terms: Vec<ShiftedPowerTerm>) -> Result<Self> {
        if atoms.is_empty() && terms.is_empty() {
            return Err(Error::InvalidModel("measure has no atoms and no terms".into()));
        }
        if !offset.is_finite() {
            return Err(domain(format!("ground offset must be finite, got {offset}")));
        }
        let infimum = atoms
            .iter()
            .map(|a| a.location)
            .chain(terms.iter().map(|t| t.shift))
            .fold(f64::INFINITY, f64::min);
        if infimum > 0.0 {
            for a in &mut atoms {
                a.location -= infimum;
            }
            for t in &mut terms {
                t.shift -= infimum;
            }
        }
        Ok(Self { ground_offset: offset + infimum, atoms, terms })
    }

    /// Single atom at zero: the reduced measure of a structureless particle.
    pub fn point(ground_offset: f64) -> Self {
        Self { ground_offset, atoms: vec![Atom { location: 0.0, mass: 1.0 }], terms: Vec::new() }
    }

    pub fn ground_offset(&self) -> f64 {
        self.ground_offset
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn terms(&self) -> &[ShiftedPowerTerm] {
        &self.terms
    }

    pub fn is_atomic(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same measure with a different ground energy.
    pub fn with_ground_offset(mut self, ground_offset: f64) -> Self {
        self.ground_offset = ground_offset;
        self
    }

    /// `∫ I^k e^{−βI} dμ(I) = (−1)^k Z^{(k)}(β)`.
    pub fn laplace_moment(&self, k: u32, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let mut sum = CompensatedSum::default();
        for a in &self.atoms {
            let v = if k == 0 {
                a.ln_weight(beta).exp()
            } else if a.location == 0.0 {
                0.0
            } else {
                (a.ln_weight(beta) + k as f64 * a.location.ln()).exp()
            };
            sum.add(v);
        }
        for t in &self.terms {
            // (s + x)^k expanded binomially; x carries the Gamma moment
            let base = t.coefficient.ln() - beta * t.shift;
            let mut ln_binom = 0.0_f64;
            for j in 0..=k {
                if j > 0 {
                    ln_binom += ((k - j + 1) as f64).ln() - (j as f64).ln();
                }
                let power_of_shift = k - j;
                if power_of_shift > 0 && t.shift == 0.0 {
                    continue;
                }
                let a = t.exponent + j as f64 + 1.0;
                let mut ln_v = base + ln_binom + ln_gamma(a) - a * beta.ln();
                if power_of_shift > 0 {
                    ln_v += power_of_shift as f64 * t.shift.ln();
                }
                sum.add(ln_v.exp());
            }
        }
        Ok(sum.value())
    }

    /// Logarithm of the partition function, `ln Z(β)`, without overflow.
    pub fn ln_partition(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        Ok(log_sum_exp(&self.component_ln_weights(beta)))
    }

    /// Log of each component's contribution to `Z(β)`: atoms first, then terms.
    pub fn component_ln_weights(&self, beta: f64) -> Vec<f64> {
        self.atoms
            .iter()
            .map(|a| a.ln_weight(beta))
            .chain(self.terms.iter().map(|t| t.ln_weight(beta)))
            .collect()
    }

    /// Gibbs mean and variance of the grounded energy, computed per component
    /// and combined around the global mean.
    pub fn gibbs_moments(&self, beta: f64) -> Result<GibbsMoments> {
        check_beta(beta)?;
        let ln_w = self.component_ln_weights(beta);
        let ln_z = log_sum_exp(&ln_w);
        let n_atoms = self.atoms.len();
        let component = |i: usize| -> (f64, f64) {
            if i < n_atoms {
                (self.atoms[i].location, 0.0)
            } else {
                let t = &self.terms[i - n_atoms];
                let a1 = t.exponent + 1.0;
                (t.shift + a1 / beta, a1 / (beta * beta))
            }
        };
        let probs: Vec<f64> = ln_w.iter().map(|w| (w - ln_z).exp()).collect();
        let mean: CompensatedSum = probs.iter().enumerate().map(|(i, p)| p * component(i).0).collect();
        let mean = mean.value();
        let variance: CompensatedSum = probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (m, v) = component(i);
                p * (v + (m - mean) * (m - mean))
            })
            .collect();
        Ok(GibbsMoments { ln_z, mean, variance: variance.value().max(0.0) })
    }

    /// Absolutely continuous part of the measure at `energy`.
    pub fn density_at(&self, energy: f64) -> Result<f64> {
        if !(energy >= 0.0) {
            return Err(domain(format!("energy must be >= 0, got {energy}")));
        }
        let s: CompensatedSum = self.terms.iter().map(|t| t.density(energy)).collect();
        Ok(s.value())
    }

    /// Convolution `self ∗ other`: the reduced measure of the product model.
    pub fn convolve(&self, other: &EnergyMeasure) -> EnergyMeasure {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom { location: a.location + b.location, mass: a.mass * b.mass });
            }
        }
        let mut terms = Vec::new();
        let atom_term = |atoms: &[Atom], terms_in: &[ShiftedPowerTerm], out: &mut Vec<ShiftedPowerTerm>| {
            for a in atoms {
                for t in terms_in {
                    out.push(ShiftedPowerTerm {
                        coefficient: a.mass * t.coefficient,
                        shift: a.location + t.shift,
                        exponent: t.exponent,
                    });
                }
            }
        };
        atom_term(&self.atoms, &other.terms, &mut terms);
        atom_term(&other.atoms, &self.terms, &mut terms);
        for s in &self.terms {
            for t in &other.terms {
                let (a1, a2) = (s.exponent + 1.0, t.exponent + 1.0);
                let ln_c = s.coefficient.ln() + t.coefficient.ln() + ln_beta(a1, a2);
                terms.push(ShiftedPowerTerm {
                    coefficient: ln_c.exp(),
                    shift: s.shift + t.shift,
                    exponent: s.exponent + t.exponent + 1.0,
                });
            }
        }
        EnergyMeasure {
            ground_offset: self.ground_offset + other.ground_offset,
            atoms: merge_atoms(atoms),
            terms: merge_terms(terms),
        }
    }

    /// Total mass of the atoms in `[lo, hi)` and of the densities on `[lo, hi)`.
    pub(crate) fn mass_and_first_moment(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut mass = CompensatedSum::default();
        let mut first = CompensatedSum::default();
        for a in self.atoms.iter().filter(|a| a.location >= lo && a.location < hi) {
            mass.add(a.mass);
            first.add(a.mass * a.location);
        }
        for t in &self.terms {
            if hi <= t.shift {
                continue;
            }
            let upper_mass = if hi.is_finite() { t.mass_below(hi) } else { f64::INFINITY };
            let upper_first = if hi.is_finite() { t.first_moment_below(hi) } else { f64::INFINITY };
            mass.add(upper_mass - t.mass_below(lo));
            first.add(upper_first - t.first_moment_below(lo));
        }
        (mass.value(), first.value())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("inverse temperature must be finite and > 0, got {beta}")))
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    if atoms.len() < 2 {
        return atoms;
    }
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    let scale = atoms.last().map_or(0.0, |a| a.location);
    let tol = ATOM_MERGE_RTOL * scale;
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last) if a.location - last.location <= tol => {
                let mass = last.mass + a.mass;
                // keep the atom at zero pinned so the result stays grounded
                if last.location != 0.0 {
                    last.location = (last.location * last.mass + a.location * a.mass) / mass;
                }
                last.mass = mass;
            }
            _ => merged.push(a),
        }
    }
    merged
}

fn merge_terms(mut terms: Vec<ShiftedPowerTerm>) -> Vec<ShiftedPowerTerm> {
    if terms.len() < 2 {
        return terms;
    }
    terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent).then(a.shift.total_cmp(&b.shift)));
    let mut merged: Vec<ShiftedPowerTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.last_mut() {
            Some(last) if last.exponent == t.exponent && last.shift == t.shift => {
                last.coefficient += t.coefficient;
            }
            _ => merged.push(t),
        }
    }
    merged
}
