//! Field post-processing: point/node probes, region-wise field maxima and
//! the percentage reductions reported for grading-study comparisons.

use crate::eqs::FieldState;
use crate::error::Error;
use crate::mesh::{Mesh, Region};
use crate::Result;

/// One probe reading: worst-case |E| among the elements sharing the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRecord {
    pub node: usize,
    pub r: f64,
    pub z: f64,
    pub e_magnitude: f64,
    pub potential: f64,
}

/// Location and value of a field maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMaximum {
    pub element: usize,
    pub r: f64,
    pub z: f64,
    pub e_magnitude: f64,
}

/// Probe the field at a mesh node: |E| is the maximum over the adjacent
/// elements (the nodal field is discontinuous for P1 elements, and the
/// conservative reading is the design quantity at triple points).
pub fn probe_node(state: &FieldState, mesh: &Mesh, node: usize) -> Result<ProbeRecord> {
    if node >= mesh.n_nodes() {
        return Err(Error::NotFound(alloc::format!("node {node}")));
    }
    let elems = mesh.triangles_at_node(node);
    if elems.is_empty() {
        return Err(Error::NotFound(alloc::format!("node {node} has no elements")));
    }
    let e = elems
        .iter()
        .map(|&t| state.e.magnitude[t])
        .fold(0.0_f64, f64::max);
    Ok(ProbeRecord {
        node,
        r: mesh.nodes[node][0],
        z: mesh.nodes[node][1],
        e_magnitude: e,
        potential: state.phi.values[node],
    })
}

/// Probe at an arbitrary (r, z) point: nearest mesh node within one h_max
/// of the point; outside the meshed domain this is `OutOfDomain`.
pub fn probe_point(state: &FieldState, mesh: &Mesh, r: f64, z: f64) -> Result<ProbeRecord> {
    let mut best = usize::MAX;
    let mut best_d2 = f64::MAX;
    for (i, n) in mesh.nodes.iter().enumerate() {
        let d2 = (n[0] - r) * (n[0] - r) + (n[1] - z) * (n[1] - z);
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    // Quick containment check: inside the radial annulus and close enough
    // to a node that the point cannot lie beyond the mesh boundary.
    if !(mesh.r_inner - 1e-12..=mesh.r_outer + 1e-12).contains(&r) || best == usize::MAX {
        return Err(Error::OutOfDomain { r, z });
    }
    probe_node(state, mesh, best)
}

/// Global or region-restricted maximum of |E|. Ties resolve to the lowest
/// element index, which keeps the report deterministic.
pub fn max_field(state: &FieldState, mesh: &Mesh, region: Option<Region>) -> Result<FieldMaximum> {
    let mut best: Option<FieldMaximum> = None;
    for t in 0..mesh.n_triangles() {
        if let Some(want) = region {
            if mesh.region[t] != want {
                continue;
            }
        }
        let e = state.e.magnitude[t];
        if best.map(|b| e > b.e_magnitude).unwrap_or(true) {
            let c = mesh.centroid(t);
            best = Some(FieldMaximum { element: t, r: c[0], z: c[1], e_magnitude: e });
        }
    }
    best.ok_or(Error::EmptyRegion)
}

/// Percentage reduction from `baseline` to `test`:
/// 100 * (baseline - test) / baseline.
pub fn reduction_percent(baseline: f64, test: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(100.0 * (baseline - test) / baseline)
}

/// Named comparison entry for summary reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub baseline_name: alloc::string::String,
    pub test_name: alloc::string::String,
    pub quantity: alloc::string::String,
    pub baseline_value: f64,
    pub test_value: f64,
    pub reduction_percent: f64,
}
