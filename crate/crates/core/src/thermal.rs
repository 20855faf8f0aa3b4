//! Stationary heat conduction div(lambda grad T) + kappa |E|^2 = 0 on the
//! same mesh, and the outer electrothermal fixed point with the resistive
//! solve: the field heats the insulation through Joule losses, the
//! temperature rise in turn shifts the thermally activated conductivity.

use crate::eqs::{solve_resistive_dc, FieldState, TransientControls};
use crate::error::Error;
use crate::fem::{
    apply_dirichlet, assemble, assemble_source, solve_with_guess, NodalField,
};
use crate::materials::MaterialAssignment;
use crate::mesh::{BoundaryTag, Mesh};
use crate::Result;
use alloc::vec::Vec;

/// Fixed electrode temperatures, K. The symmetry cuts stay adiabatic
/// (natural boundary condition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalBoundary {
    pub conductor_t: f64,
    pub enclosure_t: f64,
}

impl ThermalBoundary {
    pub fn validate(&self) -> Result<()> {
        if !(self.conductor_t > 0.0 && self.enclosure_t > 0.0) {
            return Err(Error::ConfigError(alloc::format!(
                "electrode temperatures must be positive kelvin: {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for ThermalBoundary {
    fn default() -> Self {
        ThermalBoundary { conductor_t: 340.0, enclosure_t: 300.0 }
    }
}

fn thermal_bc(mesh: &Mesh, bc: &ThermalBoundary) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut seen = alloc::collections::BTreeSet::new();
    for (edge, tag) in &mesh.boundary_edges {
        let t = match tag {
            BoundaryTag::Conductor => bc.conductor_t,
            BoundaryTag::Enclosure => bc.enclosure_t,
            BoundaryTag::SymmetryCut => continue,
        };
        for &n in edge {
            if seen.insert(n) {
                out.push((n, t));
            }
        }
    }
    out
}

/// Solve the stationary heat equation with elementwise conductivity
/// `lambda` and volumetric source `q` (W/m^3), warm-started from `guess`.
pub fn solve_heat(
    mesh: &Mesh,
    lambda: &[f64],
    q: &[f64],
    bc: &ThermalBoundary,
    guess: Option<&[f64]>,
) -> Result<NodalField> {
    bc.validate()?;
    let mut sys = assemble(mesh, lambda)?;
    sys.rhs = assemble_source(mesh, q)?;
    let sys = apply_dirichlet(sys, &thermal_bc(mesh, bc));
    solve_with_guess(&sys, guess)
}

/// Result of the coupled electrothermal fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub field: FieldState,
    pub temp: NodalField,
    pub outer_iterations: usize,
}

/// Outer fixed point between the nonlinear resistive solve and the heat
/// equation: T -> solve_resistive_dc -> q = kappa |E|^2 -> solve_heat -> T.
/// Converged when the nodal temperature changes by less than `coupling_tol`
/// kelvin in the L-inf norm.
pub fn couple_electrothermal(
    mesh: &Mesh,
    materials: &MaterialAssignment,
    v: f64,
    bc: &ThermalBoundary,
    controls: &TransientControls,
    coupling_tol: f64,
    max_outer: usize,
) -> Result<CoupledState> {
    bc.validate()?;
    if !(coupling_tol > 0.0 && max_outer >= 1) {
        return Err(Error::ConfigError(alloc::format!(
            "invalid coupling controls: tol {coupling_tol}, max_outer {max_outer}"
        )));
    }
    // Start from the conduction-only temperature field (no Joule source).
    let zero_q = alloc::vec![0.0; mesh.n_triangles()];
    let mut temp = solve_heat(mesh, &materials.lambda, &zero_q, bc, None)?;
    let mut last_change = f64::MAX;
    for outer in 1..=max_outer {
        let field = solve_resistive_dc(mesh, materials, v, &temp, controls)?;
        let sigma = materials.sigma_field(mesh, &field.e.magnitude, &temp)?;
        let q: Vec<f64> = (0..mesh.n_triangles())
            .map(|t| sigma[t] * field.e.magnitude[t] * field.e.magnitude[t])
            .collect();
        let temp_new = solve_heat(mesh, &materials.lambda, &q, bc, Some(&temp.values))?;
        let change = temp
            .values
            .iter()
            .zip(&temp_new.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        temp = temp_new;
        if change <= coupling_tol {
            // Re-solve the field on the converged temperature so the two
            // returned fields are mutually consistent.
            let field = solve_resistive_dc(mesh, materials, v, &temp, controls)?;
            return Ok(CoupledState { field, temp, outer_iterations: outer });
        }
        last_change = change;
    }
    Err(Error::NoConvergence { iterations: max_outer, residual: last_change })
}
