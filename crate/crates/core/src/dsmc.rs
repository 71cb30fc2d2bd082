//! Space-homogeneous DSMC relaxation with discrete internal levels.
//!
//! Collisions are sampled with a no-time-counter scheme against a global
//! majorant of the per-pair collision rate. Each candidate pair proposes a
//! post-collision level pair with probability proportional to the product of
//! the (normalized) degeneracies and a uniform `ω ∈ S²`, and is accepted with
//! probability `√Δ / √Δ_max`. Accepted collisions are applied with
//! [`scatter`], so momentum and energy are conserved collision by collision.

use std::collections::BTreeMap;
use std::io::{self, Write};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, Normal};

use crate::catalog::{DiscreteLevels, InternalModel};
use crate::collision::{delta_energy, sample_omega, scatter, CollisionChannel, KernelSpec};
use crate::constants::PhysicalConstants;
use crate::error::{domain, Error, Result};
use crate::thermo::ThermoModel;
use crate::Vec3;

/// Default velocity bins per axis for the H estimator.
pub const DEFAULT_H_BINS: usize = 32;
/// Default half-width of the H grid in thermal speeds `√(k_BT/m)`.
pub const DEFAULT_H_HALF_WIDTH: f64 = 5.0;
/// Beam temperature relative to the target temperature in two-beam starts.
const BEAM_TEMPERATURE_RATIO: f64 = 0.1;

/// Random stream `worker` of the master seed.
pub fn rng_stream(master_seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(worker);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub v: Vec3,
    /// Index into the level list of the ensemble's model.
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// Maxwellian velocities, Gibbs level populations.
    Maxwellian,
    /// Two counter-streaming beams along x, Gibbs level populations.
    TwoBeam,
    /// Maxwellian velocities, Gibbs populations assigned in reverse energy order.
    Inverted,
    /// Two beams and inverted populations.
    TwoBeamInverted,
}

impl std::str::FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxwellian" => Ok(Self::Maxwellian),
            "twobeam" => Ok(Self::TwoBeam),
            "inverted" => Ok(Self::Inverted),
            "twobeam-inverted" => Ok(Self::TwoBeamInverted),
            _ => Err(domain(format!("unknown initial condition `{s}`"))),
        }
    }
}

/// Collision kernel and statistical weight of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsmcParams {
    pub kernel: KernelSpec,
    /// Physical molecules per simulated particle.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEstimate {
    pub rho: f64,
    pub u: Vec3,
    pub t_est: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HEstimate {
    pub h: f64,
    /// Particles outside the velocity grid (left out of the sum).
    pub overflow: usize,
}

/// Cubic velocity grid for the H estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    pub center: Vec3,
    pub half_width: f64,
    pub bins: usize,
}

impl VelocityGrid {
    pub fn new(center: Vec3, half_width: f64, bins: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) || bins == 0 {
            return Err(domain("velocity grid needs half_width > 0 and bins > 0"));
        }
        Ok(Self { center, half_width, bins })
    }

    /// 32³ bins spanning ±5 thermal speeds around `u`.
    pub fn thermal(u: Vec3, t: f64, constants: &PhysicalConstants) -> Result<Self> {
        let c = (constants.k_b * t / constants.mass).sqrt();
        Self::new(u, DEFAULT_H_HALF_WIDTH * c, DEFAULT_H_BINS)
    }

    fn cell_volume(&self) -> f64 {
        (2.0 * self.half_width / self.bins as f64).powi(3)
    }

    fn index(&self, v: &Vec3) -> Option<usize> {
        let n = self.bins;
        let mut idx = 0;
        for axis in 0..3 {
            let x = (v[axis] - self.center[axis] + self.half_width) / (2.0 * self.half_width);
            if !(0.0..1.0).contains(&x) {
                return None;
            }
            idx = idx * n + ((x * n as f64) as usize).min(n - 1);
        }
        Some(idx)
    }
}

/// Ordered pair of unordered level pairs: `(pre, post)`.
pub type TransitionKey = ((usize, usize), (usize, usize));

fn unordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    particles: Vec<Particle>,
    levels: DiscreteLevels,
    /// Grounded level energies `ε̄`.
    grounded: Vec<f64>,
    proposal: WeightedIndex<f64>,
    thermo: ThermoModel,
    params: DsmcParams,
    volume: f64,
    time: f64,
    transitions: BTreeMap<TransitionKey, u64>,
}

impl Ensemble {
    /// Builds an ensemble from explicit particles.
    pub fn from_particles(
        particles: Vec<Particle>,
        levels: DiscreteLevels,
        constants: PhysicalConstants,
        volume: f64,
        params: DsmcParams,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(domain("ensemble needs at least one particle"));
        }
        if let Some(p) = particles.iter().find(|p| p.level >= levels.len()) {
            return Err(domain(format!("particle level {} out of range ({} levels)", p.level, levels.len())));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(domain(format!("volume must be > 0, got {volume}")));
        }
        if !(params.weight.is_finite() && params.weight > 0.0) {
            return Err(domain(format!("particle weight must be > 0, got {}", params.weight)));
        }
        let thermo = ThermoModel::from_model(&InternalModel::DiscreteLevels(levels.clone()), constants)?;
        let e0 = levels.ground_energy();
        let grounded = levels.levels().iter().map(|l| l.energy - e0).collect();
        let proposal = WeightedIndex::new(levels.levels().iter().map(|l| l.degeneracy))
            .map_err(|e| Error::InvalidModel(format!("degeneracies: {e}")))?;
        Ok(Self {
            particles,
            levels,
            grounded,
            proposal,
            thermo,
            params,
            volume,
            time: 0.0,
            transitions: BTreeMap::new(),
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn levels(&self) -> &DiscreteLevels {
        &self.levels
    }

    /// Grounded energy of each level.
    pub fn grounded_energies(&self) -> &[f64] {
        &self.grounded
    }

    pub fn thermo(&self) -> &ThermoModel {
        &self.thermo
    }

    pub fn mass(&self) -> f64 {
        self.thermo.mass()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Accepted collisions per `(pre, post)` level pair since construction.
    pub fn transitions(&self) -> &BTreeMap<TransitionKey, u64> {
        &self.transitions
    }

    pub fn reset_transitions(&mut self) {
        self.transitions.clear();
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.mass() * self.particles.iter().fold(Vec3::zeros(), |acc, p| acc + p.v)
    }

    /// Sum of kinetic and grounded internal energies.
    pub fn total_energy(&self) -> f64 {
        let m = self.mass();
        self.particles.iter().map(|p| 0.5 * m * p.v.norm_squared() + self.grounded[p.level]).sum()
    }

    pub fn mean_velocity(&self) -> Vec3 {
        self.particles.iter().fold(Vec3::zeros(), |acc, p| acc + p.v) / self.len() as f64
    }

    pub fn mean_internal_energy(&self) -> f64 {
        self.particles.iter().map(|p| self.grounded[p.level]).sum::<f64>() / self.len() as f64
    }

    /// Fraction of particles in each level.
    pub fn level_histogram(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.levels.len()];
        for p in &self.particles {
            counts[p.level] += 1;
        }
        let n = self.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// Mass density, mean velocity and the temperature `Θ⁻¹` of the mean
    /// peculiar-plus-internal energy per particle.
    pub fn estimate_state(&self) -> Result<StateEstimate> {
        if self.len() < 2 {
            return Err(domain("state estimation needs at least two particles"));
        }
        let m = self.mass();
        let u = self.mean_velocity();
        let e = self
            .particles
            .iter()
            .map(|p| 0.5 * m * (p.v - u).norm_squared() + self.grounded[p.level])
            .sum::<f64>()
            / self.len() as f64;
        let rho = m * self.len() as f64 * self.params.weight / self.volume;
        Ok(StateEstimate { rho, u, t_est: self.thermo.theta_inv(e)? })
    }

    /// Histogram estimate of `∫∫ f ln f dv dμ`, with `f̂ = count/(N·Δv·r_level)`.
    pub fn estimate_h(&self, grid: &VelocityGrid) -> HEstimate {
        self.h_from_indices(grid, (0..self.len()).map(|i| &self.particles[i]))
    }

    /// H estimate plus the bootstrap standard error over `replicates`
    /// resamplings of the particles.
    pub fn estimate_h_bootstrap<R: Rng + ?Sized>(
        &self,
        grid: &VelocityGrid,
        replicates: usize,
        rng: &mut R,
    ) -> (HEstimate, f64) {
        let base = self.estimate_h(grid);
        if replicates < 2 {
            return (base, 0.0);
        }
        let n = self.len();
        let hs: Vec<f64> = (0..replicates)
            .map(|_| {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                self.h_from_indices(grid, idx.iter().map(|&i| &self.particles[i])).h
            })
            .collect();
        let mean = hs.iter().sum::<f64>() / replicates as f64;
        let var = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
        (base, var.sqrt())
    }

    fn h_from_indices<'a>(&'a self, grid: &VelocityGrid, particles: impl Iterator<Item = &'a Particle>) -> HEstimate {
        let n_levels = self.levels.len();
        let mut counts = vec![0u32; grid.bins.pow(3) * n_levels];
        let mut overflow = 0;
        let mut total = 0usize;
        for p in particles {
            total += 1;
            match grid.index(&p.v) {
                Some(i) => counts[i * n_levels + p.level] += 1,
                None => overflow += 1,
            }
        }
        if overflow > 0 {
            warn!("{overflow} particles outside the H velocity grid");
        }
        let dv = grid.cell_volume();
        let n = total as f64;
        let degeneracies: Vec<f64> = self.levels.levels().iter().map(|l| l.degeneracy).collect();
        let h = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| {
                let p = c as f64 / n;
                p * (p / (dv * degeneracies[i % n_levels])).ln()
            })
            .sum();
        HEstimate { h, overflow }
    }

    /// Advances the ensemble by `dt`; returns the number of accepted collisions.
    pub fn step<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Result<usize> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(domain(format!("time step must be > 0, got {dt}")));
        }
        let n = self.len();
        if n < 2 {
            self.time += dt;
            return Ok(0);
        }
        let m = self.mass();
        // |v_i − v_j| ≤ |v_i − ū| + |v_j − ū| ≤ d₁ + d₂ (two largest deviations).
        // ū is conserved, so the bound stays valid if refreshed after every
        // accepted collision with the deviations of the two new velocities.
        let u = self.mean_velocity();
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        let push = |d: f64, d1: &mut f64, d2: &mut f64| {
            if d > *d1 {
                *d2 = *d1;
                *d1 = d;
            } else if d > *d2 {
                *d2 = d;
            }
        };
        let mut top_level = 0.0f64;
        for p in &self.particles {
            push((p.v - u).norm(), &mut d1, &mut d2);
            top_level = top_level.max(self.grounded[p.level]);
        }
        let kernel = self.params.kernel;
        let pairs = 0.5 * n as f64 * (n - 1) as f64;
        let rate_scale = pairs * self.params.weight / self.volume;
        let mut accepted = 0;
        let mut remaining = dt;
        while remaining > 0.0 {
            // largest gap: both post states in the ground level
            let delta_max = 0.25 * (d1 + d2).powi(2) + 2.0 * top_level / m;
            let rate_max = kernel.sphere_majorant(delta_max);
            if rate_max == 0.0 {
                break;
            }
            // each candidate covers 1/(rate_scale·rate_max) of simulated time;
            // the last one is thinned by the fraction of its slot inside dt
            let slot = 1.0 / (rate_scale * rate_max);
            let fraction = (remaining / slot).min(1.0);
            remaining -= slot;

            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let k = self.proposal.sample(rng);
            let l = self.proposal.sample(rng);
            let (pi, pj) = (self.particles[i], self.particles[j]);
            let channel =
                CollisionChannel::new(self.grounded[pi.level], self.grounded[pj.level], self.grounded[k], self.grounded[l]);
            let delta = delta_energy(&pi.v, &pj.v, &channel, m);
            if delta < 0.0 {
                continue;
            }
            let probability = kernel.sphere_majorant(delta) / rate_max;
            if probability > 1.0 + 1e-12 {
                return Err(Error::MajorantViolation { probability });
            }
            if rng.random::<f64>() >= fraction * probability {
                continue;
            }
            let omega = sample_omega(rng);
            let (v1, v2) = match scatter(&pi.v, &pj.v, &channel, &omega, m) {
                Ok(out) => out,
                Err(Error::DegeneratePair) => continue,
                Err(e) => return Err(e),
            };
            self.particles[i] = Particle { v: v1, level: k };
            self.particles[j] = Particle { v: v2, level: l };
            push((v1 - u).norm(), &mut d1, &mut d2);
            push((v2 - u).norm(), &mut d1, &mut d2);
            top_level = top_level.max(self.grounded[k]).max(self.grounded[l]);
            *self
                .transitions
                .entry((unordered(pi.level, pj.level), unordered(k, l)))
                .or_insert(0) += 1;
            accepted += 1;
        }
        self.time += dt;
        Ok(accepted)
    }

    /// Runs `steps` steps, recording a report row initially, every
    /// `report_every` steps and after the last step.
    pub fn relax<R: Rng + ?Sized>(
        &mut self,
        steps: usize,
        dt: f64,
        report_every: usize,
        grid: &VelocityGrid,
        bootstrap: usize,
        rng: &mut R,
    ) -> Result<RelaxReport> {
        let report_every = report_every.max(1);
        let mut report = RelaxReport { rows: Vec::new(), bootstrap };
        report.rows.push(self.report_row(grid, bootstrap, rng)?);
        for s in 1..=steps {
            self.step(dt, rng)?;
            if s % report_every == 0 || s == steps {
                report.rows.push(self.report_row(grid, bootstrap, rng)?);
            }
        }
        Ok(report)
    }

    fn report_row<R: Rng + ?Sized>(&self, grid: &VelocityGrid, bootstrap: usize, rng: &mut R) -> Result<ReportRow> {
        let s = self.estimate_state()?;
        let (h, h_se) = self.estimate_h_bootstrap(grid, bootstrap, rng);
        Ok(ReportRow {
            t: self.time,
            rho: s.rho,
            u: s.u,
            t_est: s.t_est,
            h_est: h.h,
            h_se,
            levels: self.level_histogram(),
        })
    }
}

/// Samples `n` particles at density `rho`, drift `u` and temperature `t`.
/// The simulated volume is `m·n·weight/ρ`.
#[allow(clippy::too_many_arguments)]
pub fn init_ensemble<R: Rng + ?Sized>(
    levels: &DiscreteLevels,
    constants: PhysicalConstants,
    n: usize,
    rho: f64,
    u: Vec3,
    t: f64,
    init: InitialCondition,
    params: DsmcParams,
    rng: &mut R,
) -> Result<Ensemble> {
    if n < 2 {
        return Err(domain(format!("need at least two particles, got {n}")));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain(format!("density must be > 0, got {rho}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(domain(format!("temperature must be > 0, got {t}")));
    }
    let m = constants.mass;
    let thermo = ThermoModel::from_model(&InternalModel::DiscreteLevels(levels.clone()), constants)?;
    let gibbs = thermo.gibbs_sampler(t)?;
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels.levels()[a].energy.total_cmp(&levels.levels()[b].energy));
    let mut inverse_rank = vec![0; levels.len()];
    for (rank, &i) in order.iter().enumerate() {
        inverse_rank[i] = rank;
    }
    let inverted = matches!(init, InitialCondition::Inverted | InitialCondition::TwoBeamInverted);
    let beams = matches!(init, InitialCondition::TwoBeam | InitialCondition::TwoBeamInverted);

    let kt = constants.k_b * t;
    let (spread, beam_speed) = if beams {
        let t_beam = BEAM_TEMPERATURE_RATIO * t;
        ((constants.k_b * t_beam / m).sqrt(), (3.0 * constants.k_b * (t - t_beam) / m).sqrt())
    } else {
        ((kt / m).sqrt(), 0.0)
    };
    let normal = Normal::new(0.0, spread).map_err(|e| Error::Domain(e.to_string()))?;
    let particles = (0..n)
        .map(|i| {
            let level = gibbs.sample(rng).level.expect("discrete model has an atomic measure");
            let level = if inverted { order[order.len() - 1 - inverse_rank[level]] } else { level };
            let mut v = u + Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
            if beams {
                v.x += if i % 2 == 0 { beam_speed } else { -beam_speed };
            }
            Particle { v, level }
        })
        .collect();
    let volume = m * n as f64 * params.weight / rho;
    Ensemble::from_particles(particles, levels.clone(), constants, volume, params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub rho: f64,
    pub u: Vec3,
    pub t_est: f64,
    pub h_est: f64,
    /// Bootstrap standard error of `h_est` (0 when not computed).
    pub h_se: f64,
    pub levels: Vec<f64>,
}

/// Time series of a relaxation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelaxReport {
    pub rows: Vec<ReportRow>,
    /// Bootstrap replicates behind `h_se`; the CSV gains an `H_se` column when nonzero.
    pub bootstrap: usize,
}

impl RelaxReport {
    /// CSV with columns `t, rho, ux, uy, uz, T_est, H_est, [H_se,] level_0, …`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n_levels = self.rows.first().map_or(0, |r| r.levels.len());
        let mut header = vec!["t", "rho", "ux", "uy", "uz", "T_est", "H_est"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        if self.bootstrap > 0 {
            header.push("H_se".into());
        }
        header.extend((0..n_levels).map(|i| format!("level_{i}")));
        writeln!(out, "{}", header.join(","))?;
        for r in &self.rows {
            let mut fields = vec![r.t, r.rho, r.u.x, r.u.y, r.u.z, r.t_est, r.h_est];
            if self.bootstrap > 0 {
                fields.push(r.h_se);
            }
            fields.extend(&r.levels);
            let line: Vec<String> = fields.iter().map(|x| format_full(*x)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits.
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}
