//! One-dimensional compressible Euler equations with the caloric equation of
//! state of an internal-state model.
//!
//! The total energy density is `ρ/m·(ε⁰ + Θ(T)) + ½ρu²`, the pressure is
//! `ρk_BT/m`. Temperature is recovered from the specific internal energy
//! with [`ThermoModel::theta_inv`]. The update is first-order finite volume
//! with a Rusanov flux and wave speed `|u| + c`, `c² = Γ k_BT/m`,
//! `Γ = 1 + 2/(3 + D(T))`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::dsmc::format_full;
use crate::error::{domain, Error, Result};
use crate::thermo::ThermoModel;

/// Meshes at least this large use parallel flux evaluation.
const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub mass: f64,
    pub momentum: f64,
    /// Total energy density including the `ρε⁰/m` contribution.
    pub energy: f64,
}

impl ConservedState {
    fn axpy(self, a: f64, other: Self) -> Self {
        Self {
            mass: self.mass + a * other.mass,
            momentum: self.momentum + a * other.momentum,
            energy: self.energy + a * other.energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Zero-gradient ghost cells.
    Transmissive,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "transmissive" => Ok(Self::Transmissive),
            _ => Err(domain(format!("unknown boundary `{s}`"))),
        }
    }
}

/// Equation of state backed by a [`ThermoModel`].
#[derive(Debug, Clone)]
pub struct Eos {
    thermo: ThermoModel,
}

impl Eos {
    pub fn new(thermo: ThermoModel) -> Self {
        Self { thermo }
    }

    pub fn thermo(&self) -> &ThermoModel {
        &self.thermo
    }

    fn k_over_m(&self) -> f64 {
        let c = self.thermo.constants();
        c.k_b / c.mass
    }

    pub fn pressure(&self, s: &PrimitiveState) -> f64 {
        s.rho * self.k_over_m() * s.t
    }

    /// Temperature giving pressure `p` at density `rho`.
    pub fn temperature_from_pressure(&self, rho: f64, p: f64) -> f64 {
        p / (rho * self.k_over_m())
    }

    pub fn sound_speed(&self, t: f64) -> Result<f64> {
        let d = self.thermo.heat_capacity(t)?.d;
        let gamma = 1.0 + 2.0 / (3.0 + d);
        Ok((gamma * self.k_over_m() * t).sqrt())
    }

    pub fn to_conserved(&self, s: &PrimitiveState) -> Result<ConservedState> {
        if !(s.rho.is_finite() && s.rho > 0.0 && s.t.is_finite() && s.t > 0.0 && s.u.is_finite()) {
            return Err(domain(format!("invalid primitive state {s:?}")));
        }
        let n = s.rho / self.thermo.mass();
        let energy = n * (self.thermo.epsilon0() + self.thermo.theta(s.t)?) + 0.5 * s.rho * s.u * s.u;
        Ok(ConservedState { mass: s.rho, momentum: s.rho * s.u, energy })
    }

    pub fn to_primitive(&self, c: &ConservedState) -> Result<PrimitiveState> {
        if !(c.mass.is_finite() && c.mass > 0.0) {
            return Err(Error::Conversion(format!("mass density must be > 0, got {}", c.mass)));
        }
        let u = c.momentum / c.mass;
        let m = self.thermo.mass();
        let per_particle = (c.energy - 0.5 * c.mass * u * u) * m / c.mass - self.thermo.epsilon0();
        if !(per_particle.is_finite() && per_particle > 0.0) {
            return Err(Error::Conversion(format!("internal energy must be > 0, got {per_particle:e} J per particle")));
        }
        let t = self.thermo.theta_inv(per_particle)?;
        Ok(PrimitiveState { rho: c.mass, u, t })
    }

    fn flux(&self, c: &ConservedState, p: &PrimitiveState) -> ConservedState {
        let pressure = self.pressure(p);
        ConservedState {
            mass: c.momentum,
            momentum: c.momentum * p.u + pressure,
            energy: (c.energy + pressure) * p.u,
        }
    }
}

/// Uniform 1D mesh of conserved cell averages.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub x0: f64,
    pub dx: f64,
    pub cells: Vec<ConservedState>,
    pub boundary: Boundary,
    pub time: f64,
}

impl Mesh {
    /// Mesh on `[x0, x1]` initialized from `init(x_center)`.
    pub fn from_fn(
        eos: &Eos,
        x0: f64,
        x1: f64,
        cells: usize,
        boundary: Boundary,
        init: impl Fn(f64) -> PrimitiveState,
    ) -> Result<Self> {
        if cells < 2 || !(x1 > x0) {
            return Err(domain("mesh needs at least two cells and x1 > x0"));
        }
        let dx = (x1 - x0) / cells as f64;
        let cells = (0..cells)
            .map(|i| eos.to_conserved(&init(x0 + (i as f64 + 0.5) * dx)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x0, dx, cells, boundary, time: 0.0 })
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells.len()).map(|i| self.x0 + (i as f64 + 0.5) * self.dx)
    }

    pub fn primitives(&self, eos: &Eos) -> Result<Vec<PrimitiveState>> {
        if self.cells.len() >= PARALLEL_THRESHOLD {
            self.cells.par_iter().map(|c| eos.to_primitive(c)).collect()
        } else {
            self.cells.iter().map(|c| eos.to_primitive(c)).collect()
        }
    }

    /// Totals of mass, momentum and energy (cell sums times `dx`).
    pub fn totals(&self) -> ConservedState {
        let zero = ConservedState { mass: 0.0, momentum: 0.0, energy: 0.0 };
        self.cells.iter().fold(zero, |acc, c| acc.axpy(self.dx, *c))
    }

    /// CSV snapshot with columns `x, rho, u, T, p`.
    pub fn write_csv<W: Write>(&self, eos: &Eos, mut out: W) -> io::Result<()> {
        let prims = self.primitives(eos).map_err(io::Error::other)?;
        writeln!(out, "x,rho,u,T,p")?;
        for (x, s) in self.centers().zip(&prims) {
            let fields = [x, s.rho, s.u, s.t, eos.pressure(s)].map(format_full);
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// One Rusanov step of at most `max_dt`; returns the step taken.
pub fn step(mesh: &mut Mesh, eos: &Eos, cfl: f64, max_dt: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(domain(format!("CFL number must lie in (0, 1), got {cfl}")));
    }
    let n = mesh.cells.len();
    let prims = mesh.primitives(eos)?;
    let wave = |p: &PrimitiveState| eos.sound_speed(p.t).map(|c| p.u.abs() + c);
    let speeds = prims.iter().map(wave).collect::<Result<Vec<_>>>()?;
    let max_speed = speeds.iter().copied().fold(0.0, f64::max);
    let dt = (cfl * mesh.dx / max_speed).min(max_dt);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain(format!("non-positive time step {dt}")));
    }

    // interface i sits on the left face of cell i; interface n is the right boundary
    let neighbours = |i: usize| -> (usize, usize) {
        match mesh.boundary {
            Boundary::Periodic => ((i + n - 1) % n, i % n),
            Boundary::Transmissive => (i.saturating_sub(1), i.min(n - 1)),
        }
    };
    let interface = |i: usize| -> ConservedState {
        let (l, r) = neighbours(i);
        let (cl, cr) = (mesh.cells[l], mesh.cells[r]);
        let (fl, fr) = (eos.flux(&cl, &prims[l]), eos.flux(&cr, &prims[r]));
        let a = speeds[l].max(speeds[r]);
        ConservedState {
            mass: 0.5 * (fl.mass + fr.mass) - 0.5 * a * (cr.mass - cl.mass),
            momentum: 0.5 * (fl.momentum + fr.momentum) - 0.5 * a * (cr.momentum - cl.momentum),
            energy: 0.5 * (fl.energy + fr.energy) - 0.5 * a * (cr.energy - cl.energy),
        }
    };
    let fluxes: Vec<ConservedState> = if n >= PARALLEL_THRESHOLD {
        (0..=n).into_par_iter().map(interface).collect()
    } else {
        (0..=n).map(interface).collect()
    };
    let ratio = dt / mesh.dx;
    for (i, cell) in mesh.cells.iter_mut().enumerate() {
        let net = fluxes[i + 1].axpy(-1.0, fluxes[i]);
        *cell = cell.axpy(-ratio, net);
    }
    for (i, cell) in mesh.cells.iter().enumerate() {
        if let Err(e) = eos.to_primitive(cell) {
            return Err(Error::Positivity { cell: i, detail: e.to_string() });
        }
    }
    mesh.time += dt;
    Ok(dt)
}

/// Advances to `t_end`; returns the number of steps.
pub fn advance_1d(mesh: &mut Mesh, eos: &Eos, cfl: f64, t_end: f64) -> Result<usize> {
    if !(t_end.is_finite() && t_end >= mesh.time) {
        return Err(domain(format!("end time {t_end} precedes mesh time {}", mesh.time)));
    }
    let mut steps = 0;
    while mesh.time < t_end {
        let remaining = t_end - mesh.time;
        let dt = step(mesh, eos, cfl, remaining)?;
        steps += 1;
        if dt >= remaining {
            mesh.time = t_end;
        }
    }
    Ok(steps)
}
