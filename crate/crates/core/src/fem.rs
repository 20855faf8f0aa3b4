//! Axisymmetric linear-triangle finite elements for divergence-form
//! operators div(k grad phi).
//!
//! Element matrices are the standard P1 stiffness scaled by the
//! axisymmetric volume weight rbar * Area with rbar the centroid radius
//! (the global factor 2*pi is dropped). For P1 gradients this weight is the
//! exact integral of r over the element, so no radial quadrature error is
//! introduced. Dirichlet constraints are eliminated symmetrically.

use crate::error::Error;
use crate::mesh::Mesh;
use crate::sparse::{solve_complex_symmetric, solve_spd, CsrMatrix, CsrMatrixC};
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use num_complex::Complex64;

/// Relative residual bound honoured by `solve`.
pub const SOLVE_TOL: f64 = 1e-12;

/// One scalar per mesh node (potential in V, temperature in K).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(n: usize) -> Self {
        NodalField { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, v: f64) -> Self {
        NodalField { values: vec![v; n] }
    }
}

/// Per-element field vector (E_r, E_z) and magnitude, constant per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField {
    pub e_r: Vec<f64>,
    pub e_z: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl ElementField {
    pub fn zeros(n: usize) -> Self {
        ElementField { e_r: vec![0.0; n], e_z: vec![0.0; n], magnitude: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }
}

/// Assembled sparse system with pending or eliminated Dirichlet data.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// node -> prescribed value, None for free nodes.
    pub dirichlet: Vec<Option<f64>>,
    pub constrained: bool,
}

/// Symmetric sparsity pattern of the P1 node adjacency (incl. diagonal).
pub fn build_pattern(mesh: &Mesh) -> (Vec<usize>, Vec<usize>) {
    let n = mesh.n_nodes();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        adj[i].push(i);
    }
    for tri in &mesh.triangles {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    adj[tri[a]].push(tri[b]);
                }
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
        col_idx.extend_from_slice(list);
        row_ptr.push(col_idx.len());
    }
    (row_ptr, col_idx)
}

/// P1 geometric factors of a triangle: (area, rbar, b[3], c[3]) with
/// grad(phi_i) = (b_i, c_i) / (2 area).
fn element_geometry(mesh: &Mesh, t: usize) -> Result<(f64, f64, [f64; 3], [f64; 3])> {
    let [i, j, k] = mesh.triangles[t];
    let p = mesh.nodes[i];
    let q = mesh.nodes[j];
    let s = mesh.nodes[k];
    let area = 0.5 * ((q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]));
    if area <= 0.0 {
        return Err(Error::SingularElement { element: t });
    }
    let rbar = (p[0] + q[0] + s[0]) / 3.0;
    let b = [q[1] - s[1], s[1] - p[1], p[1] - q[1]];
    let c = [s[0] - q[0], p[0] - s[0], q[0] - p[0]];
    Ok((area, rbar, b, c))
}

/// Assemble the stiffness matrix of div(k grad phi) with per-element k.
pub fn assemble(mesh: &Mesh, coeff: &[f64]) -> Result<SparseSystem> {
    assert_eq!(coeff.len(), mesh.n_triangles());
    for (t, &k) in coeff.iter().enumerate() {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::ConfigError(alloc::format!(
                "coefficient {k} on element {t} must be finite and positive"
            )));
        }
    }
    let (row_ptr, col_idx) = build_pattern(mesh);
    let mut matrix = CsrMatrix::from_pattern(mesh.n_nodes(), row_ptr, col_idx);
    assemble_into(mesh, coeff, &mut matrix)?;
    Ok(SparseSystem {
        rhs: vec![0.0; mesh.n_nodes()],
        dirichlet: vec![None; mesh.n_nodes()],
        constrained: false,
        matrix,
    })
}

/// Add the stiffness contributions into an existing matrix with the mesh
/// pattern (used to combine operators in the transient stepper).
pub fn assemble_into(mesh: &Mesh, coeff: &[f64], matrix: &mut CsrMatrix) -> Result<()> {
    for t in 0..mesh.n_triangles() {
        let (area, rbar, b, c) = element_geometry(mesh, t)?;
        let w = coeff[t] * rbar / (4.0 * area);
        let tri = mesh.triangles[t];
        for a in 0..3 {
            for d in 0..3 {
                matrix.add(tri[a], tri[d], w * (b[a] * b[d] + c[a] * c[d]));
            }
        }
    }
    Ok(())
}

/// Consistent load vector of a per-element source density q (units X/m^3
/// before the dropped 2*pi): rhs_i += q * rbar * area / 3 per vertex.
pub fn assemble_source(mesh: &Mesh, q: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(q.len(), mesh.n_triangles());
    let mut rhs = vec![0.0; mesh.n_nodes()];
    for t in 0..mesh.n_triangles() {
        let (area, rbar, _, _) = element_geometry(mesh, t)?;
        let load = q[t] * rbar * area / 3.0;
        for &node in &mesh.triangles[t] {
            rhs[node] += load;
        }
    }
    Ok(rhs)
}

/// Eliminate Dirichlet constraints symmetrically. Solving the result
/// reproduces the prescribed values exactly at constrained nodes.
pub fn apply_dirichlet(mut sys: SparseSystem, bc: &[(usize, f64)]) -> SparseSystem {
    for &(node, value) in bc {
        sys.dirichlet[node] = Some(value);
    }
    let m = &mut sys.matrix;
    // Constrained rows keep their original diagonal as the pivot so the
    // eliminated system stays uniformly scaled (the operator coefficients
    // can be ~1e-12; a unit pivot would wreck the residual norm).
    let diag = m.diagonal();
    for i in 0..m.n {
        let row_constrained = sys.dirichlet[i].is_some();
        let pivot = if diag[i] > 0.0 { diag[i] } else { 1.0 };
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            let j = m.col_idx[k];
            match (row_constrained, sys.dirichlet[j]) {
                (true, _) => {
                    m.vals[k] = if i == j { pivot } else { 0.0 };
                }
                (false, Some(v)) => {
                    sys.rhs[i] -= m.vals[k] * v;
                    m.vals[k] = 0.0;
                }
                (false, None) => {}
            }
        }
    }
    for i in 0..m.n {
        if let Some(v) = sys.dirichlet[i] {
            let pivot = if diag[i] > 0.0 { diag[i] } else { 1.0 };
            sys.rhs[i] = pivot * v;
        }
    }
    sys.constrained = true;
    sys
}

/// Solve the constrained system to the residual bound `SOLVE_TOL`.
pub fn solve(sys: &SparseSystem) -> Result<NodalField> {
    solve_with_guess(sys, None)
}

/// Same as `solve` but seeded with an initial guess (transient warm starts).
pub fn solve_with_guess(sys: &SparseSystem, guess: Option<&[f64]>) -> Result<NodalField> {
    assert!(sys.constrained, "solve requires a constrained system");
    let (mut values, _) = solve_spd(&sys.matrix, &sys.rhs, guess, SOLVE_TOL)?;
    // Constrained nodes are decoupled; pin them to the prescribed values.
    for (i, d) in sys.dirichlet.iter().enumerate() {
        if let Some(v) = d {
            values[i] = *v;
        }
    }
    Ok(NodalField { values })
}

/// Per-element E = -grad(phi), exact for the linear interpolant.
pub fn gradient(mesh: &Mesh, phi: &NodalField) -> ElementField {
    assert_eq!(phi.values.len(), mesh.n_nodes());
    let nt = mesh.n_triangles();
    let mut field = ElementField::zeros(nt);
    for t in 0..nt {
        let (area, _, b, c) = element_geometry(mesh, t).expect("mesh validated at generation");
        let tri = mesh.triangles[t];
        let mut er = 0.0;
        let mut ez = 0.0;
        for a in 0..3 {
            let v = phi.values[tri[a]];
            er -= v * b[a];
            ez -= v * c[a];
        }
        er /= 2.0 * area;
        ez /= 2.0 * area;
        field.e_r[t] = er;
        field.e_z[t] = ez;
        field.magnitude[t] = sqrt(er * er + ez * ez);
    }
    field
}

/// Complex system for the phasor equation with k = eps - j sigma / (2 pi f).
#[derive(Debug, Clone)]
pub struct SparseSystemC {
    pub matrix: CsrMatrixC,
    pub rhs: Vec<Complex64>,
    pub dirichlet: Vec<Option<Complex64>>,
    pub constrained: bool,
}

/// Assemble the complex-coefficient phasor operator.
pub fn assemble_complex(mesh: &Mesh, eps: &[f64], sigma: &[f64], f: f64) -> Result<SparseSystemC> {
    if !(f > 0.0) {
        return Err(Error::InvalidFrequency { f });
    }
    assert_eq!(eps.len(), mesh.n_triangles());
    assert_eq!(sigma.len(), mesh.n_triangles());
    let omega = 2.0 * core::f64::consts::PI * f;
    let (row_ptr, col_idx) = build_pattern(mesh);
    let mut matrix = CsrMatrixC::from_pattern(mesh.n_nodes(), row_ptr, col_idx);
    for t in 0..mesh.n_triangles() {
        let (area, rbar, b, c) = element_geometry(mesh, t)?;
        let k = Complex64::new(eps[t], -sigma[t] / omega);
        let w = k * rbar / (4.0 * area);
        let tri = mesh.triangles[t];
        for a in 0..3 {
            for d in 0..3 {
                matrix.add(tri[a], tri[d], w * (b[a] * b[d] + c[a] * c[d]));
            }
        }
    }
    Ok(SparseSystemC {
        rhs: vec![Complex64::new(0.0, 0.0); mesh.n_nodes()],
        dirichlet: vec![None; mesh.n_nodes()],
        constrained: false,
        matrix,
    })
}

pub fn apply_dirichlet_complex(mut sys: SparseSystemC, bc: &[(usize, Complex64)]) -> SparseSystemC {
    for &(node, value) in bc {
        sys.dirichlet[node] = Some(value);
    }
    let m = &mut sys.matrix;
    let zero = Complex64::new(0.0, 0.0);
    let diag: Vec<Complex64> = (0..m.n)
        .map(|i| m.find(i, i).map(|k| m.vals[k]).unwrap_or(Complex64::new(1.0, 0.0)))
        .collect();
    let pivot = |i: usize| {
        if diag[i].norm_sqr() > 0.0 {
            diag[i]
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    for i in 0..m.n {
        let row_constrained = sys.dirichlet[i].is_some();
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            let j = m.col_idx[k];
            match (row_constrained, sys.dirichlet[j]) {
                (true, _) => {
                    m.vals[k] = if i == j { pivot(i) } else { zero };
                }
                (false, Some(v)) => {
                    sys.rhs[i] -= m.vals[k] * v;
                    m.vals[k] = zero;
                }
                (false, None) => {}
            }
        }
    }
    for i in 0..m.n {
        if let Some(v) = sys.dirichlet[i] {
            sys.rhs[i] = pivot(i) * v;
        }
    }
    sys.constrained = true;
    sys
}

pub fn solve_complex(sys: &SparseSystemC) -> Result<Vec<Complex64>> {
    assert!(sys.constrained, "solve requires a constrained system");
    let (mut values, _) = solve_complex_symmetric(&sys.matrix, &sys.rhs, SOLVE_TOL)?;
    for (i, d) in sys.dirichlet.iter().enumerate() {
        if let Some(v) = d {
            values[i] = *v;
        }
    }
    Ok(values)
}

/// Dirichlet pairs for (conductor at `v`, enclosure at 0).
pub fn electrode_bc(mesh: &Mesh, conductor: f64, enclosure: f64) -> Vec<(usize, f64)> {
    use crate::mesh::BoundaryTag;
    let mut bc = Vec::new();
    let mut seen = vec![false; mesh.n_nodes()];
    for (edge, tag) in &mesh.boundary_edges {
        let v = match tag {
            BoundaryTag::Conductor => conductor,
            BoundaryTag::Enclosure => enclosure,
            BoundaryTag::SymmetryCut => continue,
        };
        for &node in edge {
            if !seen[node] {
                seen[node] = true;
                bc.push((node, v));
            }
        }
    }
    bc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryDescription;
    use crate::mesh::{generate_mesh, MeshControls};

    fn annulus_mesh(h: f64) -> Mesh {
        let g = GeometryDescription::annulus(0.05, 0.125, 0.2).unwrap();
        generate_mesh(&g, &MeshControls { h_max: h, triple_point_h: h, grading_ratio: 0.5 }).unwrap()
    }

    #[test]
    fn row_sums_vanish_before_constraints() {
        let mesh = annulus_mesh(0.01);
        let sys = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        assert!(sys.matrix.max_abs_row_sum() < 1e-12);
    }

    #[test]
    fn assembly_is_linear_in_coefficient() {
        let mesh = annulus_mesh(0.015);
        let s1 = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        let s3 = assemble(&mesh, &vec![3.0; mesh.n_triangles()]).unwrap();
        for (a, b) in s1.matrix.vals.iter().zip(&s3.matrix.vals) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-30));
        }
    }

    #[test]
    fn galerkin_symmetry_is_exact() {
        let mesh = annulus_mesh(0.015);
        let coeff: Vec<f64> = (0..mesh.n_triangles()).map(|t| 1.0 + 0.1 * (t % 7) as f64).collect();
        let sys = assemble(&mesh, &coeff).unwrap();
        let m = &sys.matrix;
        for i in 0..m.n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                let j = m.col_idx[k];
                let k_t = m.find(j, i).unwrap();
                assert_eq!(m.vals[k], m.vals[k_t]);
            }
        }
    }

    #[test]
    fn all_nodes_constrained_reproduces_bc() {
        let mesh = annulus_mesh(0.02);
        let sys = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        let bc: Vec<(usize, f64)> = (0..mesh.n_nodes()).map(|i| (i, i as f64 * 0.5)).collect();
        let sys = apply_dirichlet(sys, &bc);
        let phi = solve(&sys).unwrap();
        for (i, v) in bc {
            assert_eq!(phi.values[i], v);
        }
    }

    #[test]
    fn zero_bc_gives_zero_solution() {
        let mesh = annulus_mesh(0.02);
        let sys = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        let sys = apply_dirichlet(sys, &electrode_bc(&mesh, 0.0, 0.0));
        let phi = solve(&sys).unwrap();
        assert!(phi.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn discrete_maximum_principle_on_electrode_bc() {
        let mesh = annulus_mesh(0.01);
        let sys = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        let sys = apply_dirichlet(sys, &electrode_bc(&mesh, 320e3, 0.0));
        let phi = solve(&sys).unwrap();
        let max = phi.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = phi.values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min >= -1e-6 && max <= 320e3 + 1e-6);
        assert!((max - 320e3).abs() < 1e-6);
    }

    #[test]
    fn gradient_of_linear_potential_is_exact() {
        let mesh = annulus_mesh(0.02);
        // phi = 7 - 3 z  ->  E_z = 3, E_r = 0.
        let phi = NodalField {
            values: mesh.nodes.iter().map(|n| 7.0 - 3.0 * n[1]).collect(),
        };
        let e = gradient(&mesh, &phi);
        for t in 0..mesh.n_triangles() {
            assert!((e.e_z[t] - 3.0).abs() < 1e-9);
            assert!(e.e_r[t].abs() < 1e-9);
            assert!((e.magnitude[t] - 3.0).abs() < 1e-9);
        }
        // Constant potential -> zero field.
        let c = NodalField::constant(mesh.n_nodes(), 42.0);
        let e0 = gradient(&mesh, &c);
        assert!(e0.magnitude.iter().all(|&m| m < 1e-10));
    }

    #[test]
    fn coax_solution_matches_log_profile() {
        let mesh = annulus_mesh(0.004);
        let v = 320e3;
        let sys = assemble(&mesh, &vec![1.0; mesh.n_triangles()]).unwrap();
        let sys = apply_dirichlet(sys, &electrode_bc(&mesh, v, 0.0));
        let phi = solve(&sys).unwrap();
        let lograt = (0.125_f64 / 0.05).ln();
        let mut max_err = 0.0_f64;
        for (i, node) in mesh.nodes.iter().enumerate() {
            let exact = v * (0.125 / node[0]).ln() / lograt;
            max_err = max_err.max((phi.values[i] - exact).abs());
        }
        assert!(max_err / v < 2e-4, "relative L-inf error {}", max_err / v);
    }

    #[test]
    fn complex_assembly_reduces_to_real_limits() {
        let mesh = annulus_mesh(0.015);
        let v = 1000.0;
        let eps = vec![3.0e-11; mesh.n_triangles()];
        // sigma = 0: phasor solution equals the capacitive solution, zero
        // imaginary part.
        let sys_c = assemble_complex(&mesh, &eps, &vec![0.0; mesh.n_triangles()], 50.0).unwrap();
        let sys_c = apply_dirichlet_complex(
            sys_c,
            &electrode_bc(&mesh, v, 0.0)
                .into_iter()
                .map(|(n, val)| (n, Complex64::new(val, 0.0)))
                .collect::<Vec<_>>(),
        );
        let phasor = solve_complex(&sys_c).unwrap();
        let sys_r = assemble(&mesh, &eps).unwrap();
        let sys_r = apply_dirichlet(sys_r, &electrode_bc(&mesh, v, 0.0));
        let real = solve(&sys_r).unwrap();
        let mut max_re = 0.0_f64;
        let mut max_im = 0.0_f64;
        for i in 0..mesh.n_nodes() {
            max_re = max_re.max((phasor[i].re - real.values[i]).abs());
            max_im = max_im.max(phasor[i].im.abs());
        }
        assert!(max_re < 1e-6 * v, "max real diff {max_re}");
        assert!(max_im < 1e-6 * v, "max imag part {max_im}");
    }

    #[test]
    fn invalid_frequency_is_rejected() {
        let mesh = annulus_mesh(0.02);
        let eps = vec![1e-11; mesh.n_triangles()];
        let sig = vec![1e-15; mesh.n_triangles()];
        assert!(matches!(
            assemble_complex(&mesh, &eps, &sig, 0.0),
            Err(Error::InvalidFrequency { .. })
        ));
    }
}
