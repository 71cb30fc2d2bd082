//! Binary collision rule between molecules with internal energy.
//!
//! A collision changes the internal states `(ζ, ζ*) → (ζ′, ζ′*)` and the
//! velocities `(v, v*) → (v′, v′*)` while conserving momentum and total
//! energy. The post-collision relative speed is fixed by the energy gap
//!
//! ```text
//! Δ = ¼|v − v*|² + (ε + ε* − ε′ − ε′*)/m,
//! ```
//!
//! and the collision is possible only when `Δ ≥ 0`. Its direction is the
//! reflection of the pre-collision relative direction through the plane
//! orthogonal to a unit vector `ω`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::error::{domain, Error, Result};
use crate::Vec3;

/// Internal energies (J, absolute scale) before and after a collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionChannel {
    pub eps_in1: f64,
    pub eps_in2: f64,
    pub eps_out1: f64,
    pub eps_out2: f64,
}

impl CollisionChannel {
    pub fn new(eps_in1: f64, eps_in2: f64, eps_out1: f64, eps_out2: f64) -> Self {
        Self { eps_in1, eps_in2, eps_out1, eps_out2 }
    }

    /// Channel leaving both internal energies unchanged.
    pub fn elastic(eps1: f64, eps2: f64) -> Self {
        Self::new(eps1, eps2, eps1, eps2)
    }

    /// The inverse channel `(ζ′, ζ′*) → (ζ, ζ*)`.
    pub fn reversed(&self) -> Self {
        Self::new(self.eps_out1, self.eps_out2, self.eps_in1, self.eps_in2)
    }

    /// Internal energy released into translation, `ε + ε* − ε′ − ε′*`.
    pub fn released_energy(&self) -> f64 {
        (self.eps_in1 + self.eps_in2) - (self.eps_out1 + self.eps_out2)
    }
}

/// Energy gap `Δ` (m²/s²).
pub fn delta_energy(v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, m: f64) -> f64 {
    0.25 * (v - v_star).norm_squared() + channel.released_energy() / m
}

pub fn is_admissible(v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, m: f64) -> bool {
    delta_energy(v, v_star, channel, m) >= 0.0
}

/// Reflection `T_ω[V] = V − 2(ω·V)ω`.
pub fn reflect(omega: &Vec3, w: &Vec3) -> Vec3 {
    w - 2.0 * omega.dot(w) * omega
}

/// Post-collision velocities
/// `v′ = (v + v*)/2 + √Δ·T_ω[ĝ]`, `v′* = (v + v*)/2 − √Δ·T_ω[ĝ]`,
/// with `ĝ` the unit pre-collision relative velocity.
///
/// Scattering the result through the reversed channel with the same `ω`
/// returns `(v, v*)`.
pub fn scatter(v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, omega: &Vec3, m: f64) -> Result<(Vec3, Vec3)> {
    let delta = delta_energy(v, v_star, channel, m);
    if !(delta >= 0.0) {
        return Err(Error::InadmissibleCollision { delta });
    }
    let g = v - v_star;
    let g_norm = g.norm();
    if g_norm == 0.0 {
        return Err(Error::DegeneratePair);
    }
    let center = 0.5 * (v + v_star);
    let half_g_post = delta.sqrt() * reflect(omega, &(g / g_norm));
    Ok((center + half_g_post, center - half_g_post))
}

/// Jacobian `|v′ − v′*|/|v − v*| = 2√Δ/|v − v*|` of the velocity transform.
pub fn jacobian(v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, m: f64) -> Result<f64> {
    let delta = delta_energy(v, v_star, channel, m);
    if !(delta > 0.0) {
        return Err(domain(format!("Jacobian needs Δ > 0, got {delta:e}")));
    }
    let g = (v - v_star).norm();
    if g == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(2.0 * delta.sqrt() / g)
}

/// Collision kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `b = C·√Δ·1{Δ ≥ 0} = (C/2)|v′ − v′*|`, independent of `ω`.
    ///
    /// Micro-reversible: `|v − v*|·b(pre → post) = |v′ − v′*|·b(post → pre)`,
    /// both sides being `(C/2)|v − v*||v′ − v′*|`.
    MaxwellPost { c: f64 },
}

impl KernelSpec {
    pub fn maxwell_post(c: f64) -> Result<Self> {
        if c.is_finite() && c > 0.0 {
            Ok(Self::MaxwellPost { c })
        } else {
            Err(domain(format!("kernel constant must be > 0, got {c}")))
        }
    }

    pub fn rate_constant(&self) -> f64 {
        match self {
            Self::MaxwellPost { c } => *c,
        }
    }

    /// Kernel value; zero on inadmissible channels.
    pub fn value(&self, v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, _omega: &Vec3, m: f64) -> f64 {
        match self {
            Self::MaxwellPost { c } => {
                let delta = delta_energy(v, v_star, channel, m);
                if delta >= 0.0 {
                    c * delta.sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound of `∫_{S²} b dω` for a given largest energy gap.
    pub fn sphere_majorant(&self, delta_max: f64) -> f64 {
        match self {
            Self::MaxwellPost { c } => 4.0 * PI * c * delta_max.max(0.0).sqrt(),
        }
    }
}

pub fn kernel_value(spec: &KernelSpec, v: &Vec3, v_star: &Vec3, channel: &CollisionChannel, omega: &Vec3, m: f64) -> f64 {
    spec.value(v, v_star, channel, omega, m)
}

/// Uniform direction on the unit sphere.
pub fn sample_omega<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    Vec3::new(x, y, z)
}
