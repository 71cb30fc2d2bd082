//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use polygas::{Atom, EnergyMeasure, ShiftedPowerTerm};
use rand::Rng;

/// Tanh-sinh quadrature of `f` over an interval of length `len`.
/// `f` receives the distances to the left and right endpoints, so endpoint
/// singularities are evaluated without cancellation.
pub fn tanh_sinh(len: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 32.0;
    let n = (4.5 / h) as i32;
    let mut sum = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        let dl = len / (1.0 + (-2.0 * u).exp());
        let dr = len / (1.0 + (2.0 * u).exp());
        if dl > 0.0 && dr > 0.0 && w > 0.0 {
            sum += w * f(dl, dr);
        }
    }
    sum * h * 0.5 * len
}

/// Random measure with up to two atoms and one or two power terms.
pub fn random_measure<R: Rng>(rng: &mut R, alpha_range: (f64, f64)) -> EnergyMeasure {
    let n_atoms = rng.random_range(0..=2);
    let n_terms = rng.random_range(1..=2);
    let atoms = (0..n_atoms)
        .map(|_| Atom::new(rng.random_range(0.0..1.0), rng.random_range(0.1..1.0)).unwrap())
        .collect();
    let terms = (0..n_terms)
        .map(|_| {
            ShiftedPowerTerm::new(
                rng.random_range(0.1..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(alpha_range.0..alpha_range.1),
            )
            .unwrap()
        })
        .collect();
    EnergyMeasure::ground(rng.random_range(0.0..0.5), atoms, terms).unwrap()
}

/// Exact solution of the Riemann problem for a γ-law gas, density only.
pub struct ExactRiemann {
    gamma: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    p_star: f64,
    u_star: f64,
}

impl ExactRiemann {
    /// States are `(ρ, u, p)`.
    pub fn new(gamma: f64, left: (f64, f64, f64), right: (f64, f64, f64)) -> Self {
        let g = gamma;
        let sound = |s: (f64, f64, f64)| (g * s.2 / s.0).sqrt();
        let (cl, cr) = (sound(left), sound(right));
        let f = |p: f64, s: (f64, f64, f64), c: f64| -> (f64, f64) {
            let (rho, _, pk) = s;
            if p > pk {
                let a = 2.0 / ((g + 1.0) * rho);
                let b = (g - 1.0) / (g + 1.0) * pk;
                let q = (a / (p + b)).sqrt();
                ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (b + p)))
            } else {
                let r = p / pk;
                (
                    2.0 * c / (g - 1.0) * (r.powf((g - 1.0) / (2.0 * g)) - 1.0),
                    r.powf(-(g + 1.0) / (2.0 * g)) / (rho * c),
                )
            }
        };
        let du = right.1 - left.1;
        let mut p = (0.5 * (left.2 + right.2)).max(1e-12);
        for _ in 0..100 {
            let (fl, dfl) = f(p, left, cl);
            let (fr, dfr) = f(p, right, cr);
            let next = (p - (fl + fr + du) / (dfl + dfr)).max(1e-14);
            let done = ((next - p) / (0.5 * (next + p))).abs() < 1e-15;
            p = next;
            if done {
                break;
            }
        }
        let (fl, _) = f(p, left, cl);
        let (fr, _) = f(p, right, cr);
        let u_star = 0.5 * (left.1 + right.1) + 0.5 * (fr - fl);
        Self { gamma, left, right, p_star: p, u_star }
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// Density at similarity coordinate `s = x/t`.
    pub fn density(&self, s: f64) -> f64 {
        let g = self.gamma;
        let gm = (g - 1.0) / (g + 1.0);
        let ps = self.p_star;
        if s <= self.u_star {
            let (rho, u, p) = self.left;
            let c = (g * p / rho).sqrt();
            let r = ps / p;
            if ps > p {
                let speed = u - c * ((g + 1.0) / (2.0 * g) * r + (g - 1.0) / (2.0 * g)).sqrt();
                if s <= speed {
                    rho
                } else {
                    rho * (r + gm) / (gm * r + 1.0)
                }
            } else if s <= u - c {
                rho
            } else if s > self.u_star - c * r.powf((g - 1.0) / (2.0 * g)) {
                rho * r.powf(1.0 / g)
            } else {
                rho * (2.0 / (g + 1.0) + gm / c * (u - s)).powf(2.0 / (g - 1.0))
            }
        } else {
            let (rho, u, p) = self.right;
            let c = (g * p / rho).sqrt();
            let r = ps / p;
            if ps > p {
                let speed = u + c * ((g + 1.0) / (2.0 * g) * r + (g - 1.0) / (2.0 * g)).sqrt();
                if s >= speed {
                    rho
                } else {
                    rho * (r + gm) / (gm * r + 1.0)
                }
            } else if s >= u + c {
                rho
            } else if s <= self.u_star + c * r.powf((g - 1.0) / (2.0 * g)) {
                rho * r.powf(1.0 / g)
            } else {
                rho * (2.0 / (g + 1.0) - gm / c * (u - s)).powf(2.0 / (g - 1.0))
            }
        }
    }
}
