//! Error type shared across the solver chain.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Geometry parameters violate an invariant (degenerate spacer, bad radii).
    InvalidGeometry(String),
    /// Mesh controls produced degenerate triangles (min angle below 10 deg).
    MeshFailure(String),
    /// Requested entity (triple point, node, tag) does not exist.
    NotFound(String),
    /// A conductivity evaluation overflowed to a non-finite value.
    NonFinite(String),
    /// Fractional power of a negative base in a material model.
    DomainError(String),
    /// Normalized coordinate outside [0, 1].
    OutOfRange { value: f64 },
    /// Missing or inconsistent material/scenario configuration.
    ConfigError(String),
    /// Zero-area triangle encountered during assembly.
    SingularElement { element: usize },
    /// Linear solver failed to reach the residual bound.
    SolverFailure { residual: f64 },
    /// Nonlinear (Picard / coupling) iteration did not converge.
    NoConvergence { iterations: usize, residual: f64 },
    /// Phasor assembly requested with f <= 0.
    InvalidFrequency { f: f64 },
    /// Two fields belong to different meshes.
    MeshMismatch,
    /// Double-exponential waveform fit failed to bracket.
    FitFailure(String),
    /// Probe point lies outside the mesh hull.
    OutOfDomain { r: f64, z: f64 },
    /// Region filter matched no elements.
    EmptyRegion,
    /// Reduction with a zero baseline.
    DivisionByZero,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::MeshFailure(msg) => write!(f, "mesh generation failed: {msg}"),
            Error::NotFound(msg) => write!(f, "not found: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite evaluation: {msg}"),
            Error::DomainError(msg) => write!(f, "domain error: {msg}"),
            Error::OutOfRange { value } => {
                write!(f, "normalized coordinate {value} outside [0, 1]")
            }
            Error::ConfigError(msg) => write!(f, "configuration error: {msg}"),
            Error::SingularElement { element } => {
                write!(f, "element {element} has zero area")
            }
            Error::SolverFailure { residual } => {
                write!(f, "linear solver failed, residual {residual:e}")
            }
            Error::NoConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations, residual {residual:e}")
            }
            Error::InvalidFrequency { f: freq } => write!(f, "invalid frequency {freq}"),
            Error::MeshMismatch => write!(f, "fields belong to different meshes"),
            Error::FitFailure(msg) => write!(f, "waveform fit failed: {msg}"),
            Error::OutOfDomain { r, z } => write!(f, "point ({r}, {z}) outside mesh"),
            Error::EmptyRegion => write!(f, "region filter matched no elements"),
            Error::DivisionByZero => write!(f, "zero baseline in reduction"),
        }
    }
}
