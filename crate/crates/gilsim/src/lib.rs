//! Host-side companion of `gilsim-core`: JSON configuration, file exports
//! (VTK / CSV / summary JSON / run manifest) and the command implementations
//! behind the `gilsim` binary.

pub mod config;
pub mod export;
pub mod runner;

use std::fmt;

/// Process-level error classification; the variants map 1:1 onto the
/// documented exit codes (2 config, 3 mesh, 4 solver, 5 io).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Mesh(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Mesh(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Mesh(m) => write!(f, "mesh error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gilsim_core::Error> for CliError {
    fn from(e: gilsim_core::Error) -> Self {
        use gilsim_core::Error as E;
        match &e {
            E::MeshFailure(_) => CliError::Mesh(e.to_string()),
            E::NoConvergence { .. }
            | E::SolverFailure { .. }
            | E::NonFinite(_)
            | E::SingularElement { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
