//! Reduction of an internal-state model to its energy measure, and binning
//! of an energy measure into discrete levels.
//!
//! When the collision kernel sees internal states only through their energy,
//! the whole model is described by the image measure of μ under the grounded
//! energy. Binning then replaces that measure by finitely many atoms at the
//! bin-averaged energies, with the bin masses as degeneracies.

use std::f64::consts::PI;

use statrs::function::gamma::gamma_lr;

use crate::catalog::{DiscreteLevels, InternalModel, Level};
use crate::error::{domain, Error, Result};
use crate::measure::{Atom, EnergyMeasure, ShiftedPowerTerm};
use crate::special::ln_gamma;

/// Default number of uniform bins for a continuous factor.
pub const DEFAULT_BIN_COUNT: usize = 64;
/// Default binning range in units of `k_B·T_ref`.
pub const DEFAULT_RANGE_KT: f64 = 40.0;
/// Largest atomic mass beyond the last closed edge, relative to the binned mass.
const CLOSED_TAIL_RTOL: f64 = 1e-12;

/// Image measure of `model` under its grounded energy, with `ε⁰` recorded as
/// the ground offset.
pub fn reduce(model: &InternalModel) -> Result<EnergyMeasure> {
    match model {
        InternalModel::Monoatomic { epsilon0 } => Ok(EnergyMeasure::point(*epsilon0)),
        InternalModel::ContinuousPower { coefficient, alpha, epsilon0 } => {
            EnergyMeasure::ground(*epsilon0, vec![], vec![ShiftedPowerTerm::new(*coefficient, 0.0, *alpha)?])
        }
        InternalModel::DiscreteLevels(levels) => {
            let e0 = levels.ground_energy();
            let atoms = levels
                .levels()
                .iter()
                .map(|l| Atom::new(l.energy - e0, l.degeneracy))
                .collect::<Result<Vec<_>>>()?;
            EnergyMeasure::ground(e0, atoms, vec![])
        }
        InternalModel::QuadraticClassical { inertias, epsilon0 } => {
            let term = quadratic_density(inertias)?;
            EnergyMeasure::ground(*epsilon0, vec![], vec![term])
        }
        InternalModel::Product(children) => {
            let mut iter = children.iter();
            let first = iter
                .next()
                .ok_or_else(|| Error::InvalidModel("product of zero factors".into()))?;
            iter.try_fold(reduce(first)?, |acc, child| Ok(acc.convolve(&reduce(child)?)))
        }
    }
}

/// Density of the image of Lebesgue measure on `R^d` under `½ Σ 𝓘ᵢ zᵢ²`:
/// `C·I^{d/2−1}` with `C = 2^{d/2−1}·|S^{d−1}|/√(Π𝓘ᵢ)`.
fn quadratic_density(inertias: &[f64]) -> Result<ShiftedPowerTerm> {
    let d = inertias.len();
    if d == 3 && !(inertias[0] == inertias[1] && inertias[1] == inertias[2]) {
        return Err(Error::Unsupported(
            "reduction of a rotor with three distinct moments of inertia".into(),
        ));
    }
    let half_d = d as f64 / 2.0;
    let ln_sphere = 2f64.ln() + half_d * PI.ln() - ln_gamma(half_d);
    let ln_det: f64 = inertias.iter().map(|i| i.ln()).sum();
    let ln_c = (half_d - 1.0) * 2f64.ln() + ln_sphere - 0.5 * ln_det;
    ShiftedPowerTerm::new(ln_c.exp(), 0.0, half_d - 1.0)
}

/// Absolutely continuous part of `measure` at grounded energy `energy`.
pub fn density_at(measure: &EnergyMeasure, energy: f64) -> Result<f64> {
    measure.density_at(energy)
}

/// Bin edges on the grounded energy axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningSpec {
    edges: Vec<f64>,
    open_tail: bool,
}

impl BinningSpec {
    pub fn new(edges: Vec<f64>, open_tail: bool) -> Result<Self> {
        if edges.len() < 2 && !(open_tail && edges.len() == 1) {
            return Err(Error::InvalidBinning("need at least one bin".into()));
        }
        if edges[0] != 0.0 {
            return Err(Error::InvalidBinning(format!("first edge must be 0, got {}", edges[0])));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidBinning("edges must be finite and strictly increasing".into()));
        }
        Ok(Self { edges, open_tail })
    }

    /// `n` equal-width bins over `[0, e_cap)`.
    pub fn uniform(e_cap: f64, n: usize) -> Result<Self> {
        if !(e_cap.is_finite() && e_cap > 0.0) || n == 0 {
            return Err(Error::InvalidBinning(format!("uniform binning needs e_cap > 0 and n > 0, got {e_cap}, {n}")));
        }
        let edges = (0..=n).map(|i| e_cap * i as f64 / n as f64).collect();
        Self::new(edges, false)
    }

    /// [`DEFAULT_BIN_COUNT`] uniform bins over `[0, 40·k_B·T_ref)`.
    pub fn default_for(k_b: f64, t_ref: f64) -> Result<Self> {
        Self::uniform(DEFAULT_RANGE_KT * k_b * t_ref, DEFAULT_BIN_COUNT)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn open_tail(&self) -> bool {
        self.open_tail
    }

    fn bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let tail = self.open_tail.then(|| (*self.edges.last().unwrap(), f64::INFINITY));
        self.edges.windows(2).map(|w| (w[0], w[1])).chain(tail)
    }
}

/// Replaces `measure` by one level per nonempty bin, placed at the bin's
/// μ-average energy with the bin mass as degeneracy. Mass and first moment
/// over the binned range are conserved.
///
/// A closed binning truncates the densities at the last edge; atoms beyond
/// it must carry negligible mass. An open tail bin is only allowed for purely
/// atomic measures.
pub fn bin(measure: &EnergyMeasure, spec: &BinningSpec) -> Result<DiscreteLevels> {
    if spec.open_tail && !measure.is_atomic() {
        return Err(Error::InvalidBinning("open tail bin over a density has infinite mass".into()));
    }
    let mut levels = Vec::new();
    let mut total = 0.0;
    for (lo, hi) in spec.bins() {
        let (mass, first) = measure.mass_and_first_moment(lo, hi);
        if mass > 0.0 {
            total += mass;
            levels.push(Level { energy: measure.ground_offset() + first / mass, degeneracy: mass });
        }
    }
    if levels.is_empty() {
        return Err(Error::InvalidBinning("every bin is empty".into()));
    }
    if !spec.open_tail {
        let last = *spec.edges.last().unwrap();
        let dropped: f64 = measure.atoms().iter().filter(|a| a.location >= last).map(|a| a.mass).sum();
        if dropped > CLOSED_TAIL_RTOL * total {
            return Err(Error::InvalidBinning(format!(
                "atomic mass {dropped:e} lies beyond the last edge {last:e}"
            )));
        }
    }
    DiscreteLevels::new(levels)
}

/// Edges at equal-probability quantiles of the Gibbs measure at inverse
/// temperature `beta`: a greedy 1D placement that keeps each bin's Gibbs
/// weight comparable. Not an exact transport-distance optimizer.
pub fn gibbs_quantile_edges(measure: &EnergyMeasure, beta: f64, n_bins: usize) -> Result<BinningSpec> {
    if n_bins == 0 {
        return Err(Error::InvalidBinning("need at least one bin".into()));
    }
    let ln_z = measure.ln_partition(beta)?;
    let cdf = |x: f64| -> f64 {
        let atoms: f64 = measure
            .atoms()
            .iter()
            .filter(|a| a.location <= x)
            .map(|a| (a.mass.ln() - beta * a.location - ln_z).exp())
            .sum();
        let terms: f64 = measure
            .terms()
            .iter()
            .filter(|t| x > t.shift)
            .map(|t| {
                let a1 = t.exponent + 1.0;
                let w = (t.coefficient.ln() - beta * t.shift + ln_gamma(a1) - a1 * beta.ln() - ln_z).exp();
                w * gamma_lr(a1, beta * (x - t.shift))
            })
            .sum();
        atoms + terms
    };
    let mut hi = 1.0 / beta;
    while cdf(hi) < 1.0 - 1e-12 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(domain("Gibbs quantiles did not converge"));
        }
    }
    let upper = hi;
    let quantile = |p: f64| {
        let (mut a, mut b) = (0.0, upper);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        b
    };
    let mut edges = vec![0.0];
    for i in 1..n_bins {
        let e = quantile(i as f64 / n_bins as f64);
        if e > *edges.last().unwrap() {
            edges.push(e);
        }
    }
    if measure.is_atomic() {
        BinningSpec::new(edges, true)
    } else {
        let max_atom = measure.atoms().iter().map(|a| a.location).fold(0.0, f64::max);
        let last = upper.max(max_atom * (1.0 + 1e-9) + f64::MIN_POSITIVE);
        if last > *edges.last().unwrap() {
            edges.push(last);
        }
        BinningSpec::new(edges, false)
    }
}
