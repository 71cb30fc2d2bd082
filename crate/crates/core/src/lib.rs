//! Kinetic-theory toolkit for polyatomic gases.
//!
//! The internal structure of a molecule is described by an [`InternalModel`]
//! (a measure space of internal states with an energy function). Any model
//! reduces to an [`EnergyMeasure`] on the grounded energy half-line, from
//! which the equilibrium thermodynamics ([`ThermoModel`]) follow in closed
//! form. On top of that sit the binary collision rule ([`collision`]), a
//! space-homogeneous DSMC relaxation simulator ([`dsmc`]) and a 1D Euler
//! solver closed by the model's equation of state ([`euler`]).

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod collision;
pub mod constants;
pub mod dsmc;
mod error;
pub mod euler;
pub mod measure;
pub mod reduction;
mod special;
pub mod thermo;

pub use catalog::{DiscreteLevels, HfVariant, InternalModel, SpectroscopicConstants};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use measure::{Atom, EnergyMeasure, ShiftedPowerTerm};
pub use reduction::{bin, density_at, reduce, BinningSpec};
pub use thermo::ThermoModel;

/// Velocity vector in m/s.
pub type Vec3 = nalgebra::Vector3<f64>;
