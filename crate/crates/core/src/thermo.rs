//! Equilibrium thermodynamics of a reduced model.
//!
//! Everything follows from the partition function `Z(β) = ∫ e^{−βε̄} dμ`:
//! the number of internal degrees of freedom `δ(T)` is twice the Gibbs mean
//! of `ε̄/k_BT`, `D(T)` twice its variance, `c_V = (3 + D)/2`, and the caloric
//! map `Θ(T) = ∫₀^T c_V k_B dT′ = (3/2)k_BT + (k_BT/2)δ(T)`, whose inverse
//! defines the temperature of a non-equilibrium state.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, weighted::WeightedIndex};

use crate::catalog::InternalModel;
use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::measure::{EnergyMeasure, GibbsMoments};
use crate::reduction::reduce;
use crate::Vec3;

/// Temperature range (K) covered by the cached `Θ` table.
pub const THETA_TABLE_RANGE: (f64, f64) = (1.0, 1e7);
const THETA_TABLE_POINTS: usize = 241;

/// `D(T)` and `c_V(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCapacity {
    pub d: f64,
    pub cv: f64,
}

/// A draw from the Gibbs measure: grounded energy, plus the atom index when
/// the measure is purely atomic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSample {
    pub energy: f64,
    pub level: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ThermoModel {
    measure: EnergyMeasure,
    constants: PhysicalConstants,
    /// `(T, Θ(T))`, log-spaced in T.
    theta_table: Vec<(f64, f64)>,
}

impl ThermoModel {
    pub fn new(measure: EnergyMeasure, constants: PhysicalConstants) -> Result<Self> {
        if !constants.is_valid() {
            return Err(domain("physical constants must be positive"));
        }
        let mut model = Self { measure, constants, theta_table: Vec::new() };
        let (lo, hi) = THETA_TABLE_RANGE;
        let ratio = (hi / lo).ln() / (THETA_TABLE_POINTS - 1) as f64;
        let table = (0..THETA_TABLE_POINTS)
            .map(|i| {
                let t = lo * (ratio * i as f64).exp();
                model.theta(t).map(|th| (t, th))
            })
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(table.windows(2).all(|w| w[1].1 > w[0].1), "Θ table not increasing");
        model.theta_table = table;
        Ok(model)
    }

    pub fn from_model(model: &InternalModel, constants: PhysicalConstants) -> Result<Self> {
        Self::new(reduce(model)?, constants)
    }

    pub fn measure(&self) -> &EnergyMeasure {
        &self.measure
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn mass(&self) -> f64 {
        self.constants.mass
    }

    pub fn epsilon0(&self) -> f64 {
        self.measure.ground_offset()
    }

    /// Same thermodynamics with a different ground energy.
    pub fn with_epsilon0(&self, epsilon0: f64) -> Self {
        Self {
            measure: self.measure.clone().with_ground_offset(epsilon0),
            constants: self.constants,
            theta_table: self.theta_table.clone(),
        }
    }

    fn kt(&self, t: f64) -> Result<f64> {
        if t.is_finite() && t > 0.0 {
            Ok(self.constants.k_b * t)
        } else {
            Err(domain(format!("temperature must be finite and > 0, got {t}")))
        }
    }

    fn moments(&self, t: f64) -> Result<(f64, GibbsMoments)> {
        let kt = self.kt(t)?;
        Ok((kt, self.measure.gibbs_moments(1.0 / kt)?))
    }

    pub fn partition_z(&self, beta: f64) -> Result<f64> {
        self.measure.laplace_moment(0, beta)
    }

    /// Number of internal degrees of freedom `δ(T)`.
    pub fn delta_dof(&self, t: f64) -> Result<f64> {
        let (kt, g) = self.moments(t)?;
        Ok(2.0 * g.mean / kt)
    }

    pub fn heat_capacity(&self, t: f64) -> Result<HeatCapacity> {
        let (kt, g) = self.moments(t)?;
        let d = 2.0 * g.variance / (kt * kt);
        Ok(HeatCapacity { d, cv: 0.5 * (3.0 + d) })
    }

    /// Mean energy per particle above `ε⁰` in the rest frame at temperature
    /// `t`: `Θ(T) = (3/2)k_BT + ⟨ε̄⟩_T`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let (kt, g) = self.moments(t)?;
        Ok(1.5 * kt + g.mean)
    }

    /// Inverse of [`theta`](Self::theta): bracketed bisection down to 1e-3
    /// relative width, then Newton with `Θ′ = k_B c_V`.
    pub fn theta_inv(&self, energy: f64) -> Result<f64> {
        if !(energy.is_finite() && energy >= 0.0) {
            return Err(domain(format!("energy must be finite and >= 0, got {energy}")));
        }
        if energy == 0.0 {
            return Ok(0.0);
        }
        // Θ(T) ≥ (3/2)k_BT
        let t_upper_bound = energy / (1.5 * self.constants.k_b);
        let idx = self.theta_table.partition_point(|&(_, th)| th < energy);
        let (mut lo, mut hi) = match idx {
            0 => (0.0, self.theta_table[0].0),
            i if i == self.theta_table.len() => (self.theta_table[i - 1].0, t_upper_bound),
            i => (self.theta_table[i - 1].0, self.theta_table[i].0),
        };
        hi = hi.min(t_upper_bound);
        lo = lo.min(hi);
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if self.theta(mid)? < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let residual = self.theta(t)? - energy;
            let slope = self.constants.k_b * self.heat_capacity(t)?.cv;
            let next = (t - residual / slope).clamp(lo, hi);
            let step = (next - t).abs();
            t = next;
            if step <= 1e-15 * t {
                break;
            }
        }
        Ok(t)
    }

    /// `e^{eq}[u, T] = ε⁰ + (m/2)|u|² + ((3 + δ(T))/2)k_BT`.
    pub fn equilibrium_energy(&self, u: &Vec3, t: f64) -> Result<f64> {
        let (kt, g) = self.moments(t)?;
        Ok(self.epsilon0() + 0.5 * self.constants.mass * u.norm_squared() + 1.5 * kt + g.mean)
    }

    /// Maxwellian `M[ρ, u, T](v, ε̄)`.
    pub fn maxwellian_density(&self, rho: f64, u: &Vec3, t: f64, v: &Vec3, eps_bar: f64) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(domain(format!("density must be > 0, got {rho}")));
        }
        let kt = self.kt(t)?;
        let m = self.constants.mass;
        let ln_z = self.measure.ln_partition(1.0 / kt)?;
        let ln_f = rho.ln() + 0.5 * m.ln() - 1.5 * (2.0 * PI * kt).ln() - ln_z
            - m * (v - u).norm_squared() / (2.0 * kt)
            - eps_bar / kt;
        Ok(ln_f.exp())
    }

    pub fn gibbs_sampler(&self, t: f64) -> Result<GibbsSampler> {
        let kt = self.kt(t)?;
        let ln_w = self.measure.component_ln_weights(1.0 / kt);
        let max = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = ln_w.iter().map(|w| (w - max).exp()).collect();
        let index = WeightedIndex::new(&weights).map_err(|e| Error::Domain(format!("Gibbs weights: {e}")))?;
        let terms = self
            .measure
            .terms()
            .iter()
            .map(|term| {
                Gamma::new(term.exponent + 1.0, kt)
                    .map(|g| (term.shift, g))
                    .map_err(|e| Error::Domain(format!("gamma variate: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GibbsSampler {
            index,
            atoms: self.measure.atoms().iter().map(|a| a.location).collect(),
            terms,
            atomic: self.measure.is_atomic(),
        })
    }

    /// One draw from the Gibbs measure `ν_T`.
    pub fn gibbs_sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<GibbsSample> {
        Ok(self.gibbs_sampler(t)?.sample(rng))
    }
}

/// Sampler for `ν_T` at a fixed temperature: a component is chosen with
/// probability proportional to its share of `Z`, then atoms return their
/// location and a term `(c, s, α)` returns `s + k_BT·Gamma(α + 1)`.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    index: WeightedIndex<f64>,
    atoms: Vec<f64>,
    terms: Vec<(f64, Gamma<f64>)>,
    atomic: bool,
}

impl GibbsSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GibbsSample {
        let i = self.index.sample(rng);
        if i < self.atoms.len() {
            GibbsSample { energy: self.atoms[i], level: self.atomic.then_some(i) }
        } else {
            let (shift, gamma) = &self.terms[i - self.atoms.len()];
            GibbsSample { energy: shift + gamma.sample(rng), level: None }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_hf_model, DiscreteLevels, HfOptions, HfVariant, SpectroscopicConstants};
    use crate::constants::{HC, HF_MASS, K_B};
    use crate::measure::{Atom, ShiftedPowerTerm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn si() -> PhysicalConstants {
        PhysicalConstants::si(HF_MASS)
    }

    fn thermo(model: &InternalModel) -> ThermoModel {
        ThermoModel::from_model(model, si()).unwrap()
    }

    fn two_level(e: f64) -> ThermoModel {
        let d = DiscreteLevels::from_pairs(&[(0.0, 1.0), (e, 1.0)]).unwrap();
        thermo(&InternalModel::discrete(d))
    }

    #[test]
    fn monoatomic_values() {
        let m = thermo(&InternalModel::monoatomic(0.0));
        for t in [10.0, 300.0, 1e4] {
            assert_eq!(m.delta_dof(t).unwrap(), 0.0);
            assert_eq!(m.heat_capacity(t).unwrap(), HeatCapacity { d: 0.0, cv: 1.5 });
            assert_eq!(m.partition_z(1.0 / (K_B * t)).unwrap(), 1.0);
            assert!(rel(m.theta(t).unwrap(), 1.5 * K_B * t) < 1e-15);
        }
    }

    #[test]
    fn harmonic_ladder_partition() {
        let spacing = HC * 4138.39;
        let d = DiscreteLevels::harmonic(spacing, 0.5 * spacing, 1e5).unwrap();
        let m = thermo(&InternalModel::discrete(d));
        for t in [300.0, 3000.0, 2e4] {
            let beta = 1.0 / (K_B * t);
            let z = m.partition_z(beta).unwrap();
            assert!(rel(z, 1.0 / (1.0 - (-beta * spacing).exp())) < 1e-13);
        }
    }

    #[test]
    fn power_law_closed_forms() {
        for alpha in [-0.5, 0.0, 1.0, 2.5] {
            let m = thermo(&InternalModel::continuous_power(3.0e40, alpha, 0.0).unwrap());
            for t in [10.0, 300.0, 1e4] {
                let delta = m.delta_dof(t).unwrap();
                let hc = m.heat_capacity(t).unwrap();
                assert!(rel(delta, 2.0 * (alpha + 1.0)) < 1e-12);
                assert!(rel(hc.d, 2.0 * (alpha + 1.0)) < 1e-12);
                assert!(rel(m.theta(t).unwrap(), (2.5 + alpha) * K_B * t) < 1e-12);
                let beta = 1.0 / (K_B * t);
                let z = m.partition_z(beta).unwrap();
                let exact = 3.0e40 * statrs::function::gamma::gamma(alpha + 1.0) / beta.powf(alpha + 1.0);
                assert!(rel(z, exact) < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_delta() {
        let e = 1e-21;
        let m = two_level(e);
        let t = e / K_B;
        let expected = 2.0 * (-1f64).exp() / (1.0 + (-1f64).exp());
        assert!(rel(m.delta_dof(t).unwrap(), expected) < 1e-14);
        assert!((expected - 0.5379).abs() < 1e-4);
    }

    #[test]
    fn nonpositive_temperature_rejected() {
        let m = two_level(1e-21);
        assert!(m.delta_dof(0.0).is_err());
        assert!(m.heat_capacity(-1.0).is_err());
        assert!(m.theta(-1.0).is_err());
        assert!(m.theta_inv(-1.0).is_err());
        assert!(m.equilibrium_energy(&Vec3::zeros(), 0.0).is_err());
        assert!(m.gibbs_sampler(0.0).is_err());
        assert!(m.partition_z(0.0).is_err());
        assert!(m.maxwellian_density(0.0, &Vec3::zeros(), 300.0, &Vec3::zeros(), 0.0).is_err());
    }

    #[test]
    fn theta_round_trip() {
        let c = SpectroscopicConstants::HF;
        for variant in 1..=4u8 {
            let model = build_hf_model(HfVariant::try_from(variant).unwrap(), &c, 1.35e-47, &HfOptions::default()).unwrap();
            let m = thermo(&model);
            for t in [0.5, 10.0, 300.0, 5000.0, 2e7] {
                let back = m.theta_inv(m.theta(t).unwrap()).unwrap();
                assert!(rel(back, t) < 1e-10, "variant {variant}, T = {t}: {back}");
            }
        }
        let mono = thermo(&InternalModel::monoatomic(0.0));
        assert_eq!(mono.theta_inv(0.0).unwrap(), 0.0);
        let e = 1.5 * K_B * 300.0;
        assert!(rel(mono.theta_inv(e).unwrap(), 300.0) < 1e-14);
    }

    #[test]
    fn equilibrium_energy_values() {
        let m = thermo(&InternalModel::monoatomic(1e-20));
        let e = m.equilibrium_energy(&Vec3::zeros(), 300.0).unwrap();
        assert!(rel(e, 1e-20 + 1.5 * K_B * 300.0) < 1e-15);

        let hf1 = build_hf_model(HfVariant::HarmonicSemiClassical, &SpectroscopicConstants::HF, 1.35e-47, &HfOptions::default())
            .unwrap();
        let m = thermo(&hf1);
        let u = Vec3::new(100.0, -20.0, 3.0);
        assert_eq!(m.equilibrium_energy(&u, 700.0).unwrap(), m.equilibrium_energy(&-u, 700.0).unwrap());
        let t_vib = HC * 4138.39 / K_B;
        let delta1 = 2.0 + 2.0 / (1f64.exp() - 1.0);
        assert!((delta1 - 3.1639).abs() < 1e-4);
        let e = m.equilibrium_energy(&Vec3::zeros(), t_vib).unwrap();
        let expected = m.epsilon0() + 0.5 * (3.0 + delta1) * K_B * t_vib;
        assert!(rel(e, expected) < 1e-12);
    }

    #[test]
    fn gibbs_two_level_frequency() {
        let e = 1e-21;
        let m = two_level(e);
        let sampler = m.gibbs_sampler(e / K_B).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let excited = (0..n).filter(|_| sampler.sample(&mut rng).level == Some(1)).count();
        let p = (-1f64).exp() / (1.0 + (-1f64).exp());
        assert!((p - 0.2689).abs() < 1e-4);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((excited as f64 / n as f64 - p).abs() < 4.0 * sigma);
    }

    #[test]
    fn gibbs_mean_matches_delta() {
        // mixed measure: atoms plus two densities
        let measure = EnergyMeasure::ground(
            0.0,
            vec![Atom::new(0.0, 1.0).unwrap(), Atom::new(2.0, 3.0).unwrap()],
            vec![ShiftedPowerTerm::new(0.4, 0.0, 0.5).unwrap(), ShiftedPowerTerm::new(1.0, 1.0, 0.0).unwrap()],
        )
        .unwrap();
        let m = ThermoModel::new(measure, PhysicalConstants::scaled(1.0)).unwrap();
        let t = 1.3;
        let sampler = m.gibbs_sampler(t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng).energy / t).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let delta = m.delta_dof(t).unwrap();
        assert!((mean - delta / 2.0).abs() < 4.0 * (var / n as f64).sqrt());
        // the sample variance estimates D/2
        let d = m.heat_capacity(t).unwrap().d;
        assert!(rel(var, d / 2.0) < 0.01);
    }

    #[test]
    fn gibbs_cold_limit_stays_in_ground_state() {
        let e1 = 1e-21;
        let m = two_level(e1);
        let t = e1 / (50.0 * K_B);
        // analytic excited probability e^{-50}/(1 + e^{-50}) < 1e-20
        assert!((-50f64).exp() < 1e-20);
        let sampler = m.gibbs_sampler(t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..10_000).all(|_| sampler.sample(&mut rng).level == Some(0)));
    }

    #[test]
    fn maxwellian_values() {
        let m = thermo(&InternalModel::quadratic(vec![1.35e-47, 1.35e-47], 0.0).unwrap());
        let (rho, t) = (0.8, 450.0);
        let u = Vec3::new(10.0, 0.0, -5.0);
        let kt = K_B * t;
        let z = m.partition_z(1.0 / kt).unwrap();
        let peak = m.maxwellian_density(rho, &u, t, &u, 0.0).unwrap();
        let expected = rho * HF_MASS.sqrt() * (2.0 * PI * kt).powf(-1.5) / z;
        assert!(rel(peak, expected) < 1e-12);
        let excited = m.maxwellian_density(rho, &u, t, &u, kt).unwrap();
        assert!(rel(excited / peak, (-1f64).exp()) < 1e-14);
    }

    #[test]
    fn delta_times_t_nondecreasing() {
        let c = SpectroscopicConstants::HF;
        for variant in 1..=4u8 {
            let m = thermo(&build_hf_model(HfVariant::try_from(variant).unwrap(), &c, 1.35e-47, &HfOptions::default()).unwrap());
            let mut prev = 0.0;
            for i in 0..60 {
                let t = 10f64.powf(1.0 + i as f64 * 0.1);
                let dt = m.delta_dof(t).unwrap() * t;
                assert!(dt >= prev * (1.0 - 1e-12), "variant {variant}, T = {t}");
                prev = dt;
                assert!(m.heat_capacity(t).unwrap().d >= 0.0);
            }
        }
    }

    #[test]
    fn cold_atomic_model_freezes() {
        let e1 = 2e-21;
        let m = two_level(e1);
        let t = e1 / (100.0 * K_B);
        assert!(m.delta_dof(t).unwrap() < 1e-8);
        assert!(m.heat_capacity(t).unwrap().d < 1e-8);
    }

    #[test]
    fn degeneracy_equals_unit_copies() {
        let e = 1.5e-21;
        let lumped = thermo(&InternalModel::discrete(DiscreteLevels::from_pairs(&[(0.0, 1.0), (e, 3.0), (2.0 * e, 2.0)]).unwrap()));
        let expanded = thermo(&InternalModel::discrete(
            DiscreteLevels::from_pairs(&[(0.0, 1.0), (e, 1.0), (e, 1.0), (e, 1.0), (2.0 * e, 1.0), (2.0 * e, 1.0)]).unwrap(),
        ));
        for t in [30.0, 100.0, 1000.0] {
            let beta = 1.0 / (K_B * t);
            assert!(rel(lumped.partition_z(beta).unwrap(), expanded.partition_z(beta).unwrap()) < 1e-14);
            assert!(rel(lumped.delta_dof(t).unwrap(), expanded.delta_dof(t).unwrap()) < 1e-13);
            assert!(rel(lumped.heat_capacity(t).unwrap().d, expanded.heat_capacity(t).unwrap().d) < 1e-12);
        }
    }
}
