//! Axisymmetric electro-quasistatic field computation for HVDC gas-insulated
//! lines with cone-type spacers.
//!
//! The crate covers the full solver chain: parametric geometry and structured
//! triangular meshing of the coaxial annulus, linear-triangle finite-element
//! assembly of divergence-form operators in (r, z) with the axisymmetric
//! volume weight, nonlinear conductivity models for epoxy and SF6, graded
//! material (FGM) profiles, static capacitive/resistive and phasor solves,
//! an implicit transient electro-quasistatic solver, stationary heat
//! conduction with Joule sources, voltage waveforms (DC-on, polarity
//! reversal, lightning impulse) and scenario orchestration with probe and
//! peak-field postprocessing.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `gilsim` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod sparse;
pub mod fem;
pub mod materials;
pub mod waveform;
pub mod eqs;
pub mod thermal;
pub mod postproc;
pub mod scenario;

pub use error::Error;
pub type Result<T> = core::result::Result<T, Error>;
