//! Conforming triangular meshing of the annulus cross-section.
//!
//! The mesh is a structured sheared grid: radial stations r_i times axial
//! reference stations zeta_j, with physical z = zeta + (r - r_inner) * slope
//! so that the two gas-spacer interfaces coincide exactly with grid lines.
//! Both 1D point distributions are graded towards the triple points with a
//! size function h(d) = min(h_max, triple_point_h + grading_ratio * d) and
//! placed by equidistributing the integral of 1/h. Quads are split along
//! their shorter diagonal. The construction is fully deterministic:
//! identical parameters and controls give a bitwise identical node list.

use crate::error::Error;
use crate::geometry::GeometryDescription;
use crate::Result;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use libm::{acos, sqrt};

/// Region tag of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Gas,
    Spacer,
}

/// Tag of an exterior boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Inner electrode, r = r_inner.
    Conductor,
    /// Outer (grounded) electrode, r = r_outer.
    Enclosure,
    /// Axial truncation cuts, z-extremes (natural / Neumann).
    SymmetryCut,
}

/// Mesh sizing controls (metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshControls {
    /// Background element size.
    pub h_max: f64,
    /// Target size near the triple points.
    pub triple_point_h: f64,
    /// Growth rate of the size function away from the triple points.
    pub grading_ratio: f64,
}

impl MeshControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_max > 0.0 && self.triple_point_h > 0.0 && self.grading_ratio > 0.0) {
            return Err(Error::MeshFailure(format!(
                "controls must be positive (h_max={}, triple_point_h={}, grading_ratio={})",
                self.h_max, self.triple_point_h, self.grading_ratio
            )));
        }
        if self.triple_point_h > self.h_max {
            return Err(Error::MeshFailure(format!(
                "triple_point_h ({}) must not exceed h_max ({})",
                self.triple_point_h, self.h_max
            )));
        }
        Ok(())
    }

    /// Controls with both target sizes divided by `factor`.
    pub fn refined(&self, factor: f64) -> MeshControls {
        MeshControls {
            h_max: self.h_max / factor,
            triple_point_h: self.triple_point_h / factor,
            grading_ratio: self.grading_ratio,
        }
    }
}

/// Immutable tagged triangulation of the cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Node coordinates (r, z) in metres.
    pub nodes: Vec<[f64; 2]>,
    /// Node index triples, counter-clockwise (positive signed area).
    pub triangles: Vec<[usize; 3]>,
    /// Region tag per triangle.
    pub region: Vec<Region>,
    /// Exterior edges with their boundary tag.
    pub boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    /// Conductor-side triple point node (conductor / gas / spacer).
    pub triple_point_a: Option<usize>,
    /// Enclosure-side triple point node (enclosure / gas / spacer).
    pub triple_point_b: Option<usize>,
    /// Copied from the geometry; used for normalized radial coordinates.
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Signed area of triangle `t` (positive for CCW orientation).
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let p = self.nodes[a];
        let q = self.nodes[b];
        let s = self.nodes[c];
        0.5 * ((q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]))
    }

    /// Centroid (r, z) of triangle `t`.
    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let p = self.nodes[a];
        let q = self.nodes[b];
        let s = self.nodes[c];
        [(p[0] + q[0] + s[0]) / 3.0, (p[1] + q[1] + s[1]) / 3.0]
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = 180.0_f64;
        for tri in &self.triangles {
            let p = [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]];
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let nu = sqrt(u[0] * u[0] + u[1] * u[1]);
                let nv = sqrt(v[0] * v[0] + v[1] * v[1]);
                let mut cosang = (u[0] * v[0] + u[1] * v[1]) / (nu * nv);
                cosang = cosang.clamp(-1.0, 1.0);
                let ang = acos(cosang).to_degrees();
                if ang < min {
                    min = ang;
                }
            }
        }
        min
    }

    /// Total in-plane area of all triangles with the given tag.
    pub fn region_area(&self, tag: Region) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| self.region[t] == tag)
            .map(|t| self.area(t))
            .sum()
    }

    /// Triangles adjacent to a node (sorted by element id).
    pub fn triangles_at_node(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.contains(&node) {
                out.push(t);
            }
        }
        out
    }
}

/// Graded 1D point distribution on [a, b].
///
/// The size function is h(x) = min(h_max, h_min + g * dist(x, refine_at));
/// points equidistribute the integral of 1/h, so spacing near a refinement
/// point is ~h_min and grows towards h_max. Endpoints are exact.
fn graded_points(a: f64, b: f64, refine_at: &[f64], h_max: f64, h_min: f64, g: f64) -> Vec<f64> {
    debug_assert!(b > a);
    let size = |x: f64| -> f64 {
        let mut h = h_max;
        for &p in refine_at {
            let d = (x - p).abs();
            let hp = h_min + g * d;
            if hp < h {
                h = hp;
            }
        }
        h
    };
    // Dense sampling of the cumulative density integral(1/h).
    let m = 8 * libm::ceil((b - a) / h_min).max(16.0) as usize;
    let dx = (b - a) / m as f64;
    let mut cum = vec![0.0_f64; m + 1];
    let mut prev = 1.0 / size(a);
    for k in 1..=m {
        let x = a + k as f64 * dx;
        let cur = 1.0 / size(x);
        cum[k] = cum[k - 1] + 0.5 * (prev + cur) * dx;
        prev = cur;
    }
    let total = cum[m];
    let n = libm::ceil(total).max(1.0) as usize;
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(a);
    let mut k = 0usize;
    for i in 1..n {
        let target = total * i as f64 / n as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
        pts.push(a + (k as f64 + frac) * dx);
    }
    pts.push(b);
    pts
}

/// Generate the tagged triangulation of a geometry description.
pub fn generate_mesh(geom: &GeometryDescription, controls: &MeshControls) -> Result<Mesh> {
    controls.validate()?;
    let h = controls.h_max;
    let h_tp = controls.triple_point_h;
    let g = controls.grading_ratio;

    // Radial stations, refined at both electrodes when a spacer is present
    // (the triple points sit on the electrodes).
    let r_pts = match geom.spacer {
        Some(_) => graded_points(geom.r_inner, geom.r_outer, &[geom.r_inner, geom.r_outer], h, h_tp, g),
        None => graded_points(geom.r_inner, geom.r_outer, &[], h, h_tp, g),
    };

    // Axial reference stations. With a spacer the interval splits at the two
    // interface lines so that interfaces are exact grid lines; each interval
    // carries a region tag.
    let (zeta_pts, spacer_band): (Vec<f64>, Option<(usize, usize)>) = match geom.spacer {
        Some(s) => {
            let z1 = s.z_lower_at_inner;
            let z2 = z1 + s.thickness;
            let mut pts = graded_points(0.0, z1, &[z1], h, h_tp, g);
            let lo = pts.len() - 1;
            let mid = graded_points(z1, z2, &[z1, z2], h, h_tp, g);
            pts.extend_from_slice(&mid[1..]);
            let hi = pts.len() - 1;
            let top = graded_points(z2, geom.axial_length, &[z2], h, h_tp, g);
            pts.extend_from_slice(&top[1..]);
            (pts, Some((lo, hi)))
        }
        None => (graded_points(0.0, geom.axial_length, &[], h, h_tp, g), None),
    };

    let slope = geom.spacer.map(|s| s.slope).unwrap_or(0.0);
    let nr = r_pts.len();
    let nz = zeta_pts.len();
    let node_id = |i: usize, j: usize| j * nr + i;

    let mut nodes = Vec::with_capacity(nr * nz);
    for &zeta in &zeta_pts {
        for &r in &r_pts {
            nodes.push([r, zeta + (r - geom.r_inner) * slope]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * (nr - 1) * (nz - 1));
    let mut region = Vec::with_capacity(2 * (nr - 1) * (nz - 1));
    for j in 0..nz - 1 {
        let tag = match spacer_band {
            Some((lo, hi)) if j >= lo && j < hi => Region::Spacer,
            _ => Region::Gas,
        };
        for i in 0..nr - 1 {
            let n00 = node_id(i, j);
            let n10 = node_id(i + 1, j);
            let n11 = node_id(i + 1, j + 1);
            let n01 = node_id(i, j + 1);
            let d2 = |a: [f64; 2], b: [f64; 2]| {
                let dr = a[0] - b[0];
                let dz = a[1] - b[1];
                dr * dr + dz * dz
            };
            // Split along the shorter diagonal.
            if d2(nodes[n00], nodes[n11]) <= d2(nodes[n10], nodes[n01]) {
                triangles.push([n00, n10, n11]);
                triangles.push([n00, n11, n01]);
            } else {
                triangles.push([n00, n10, n01]);
                triangles.push([n10, n11, n01]);
            }
            region.push(tag);
            region.push(tag);
        }
    }

    let mut boundary_edges = Vec::new();
    for j in 0..nz - 1 {
        boundary_edges.push(([node_id(0, j), node_id(0, j + 1)], BoundaryTag::Conductor));
        boundary_edges.push(([node_id(nr - 1, j), node_id(nr - 1, j + 1)], BoundaryTag::Enclosure));
    }
    for i in 0..nr - 1 {
        boundary_edges.push(([node_id(i, 0), node_id(i + 1, 0)], BoundaryTag::SymmetryCut));
        boundary_edges.push(([node_id(i, nz - 1), node_id(i + 1, nz - 1)], BoundaryTag::SymmetryCut));
    }

    let (triple_point_a, triple_point_b) = match spacer_band {
        Some((lo, _)) => (Some(node_id(0, lo)), Some(node_id(nr - 1, lo))),
        None => (None, None),
    };

    let mesh = Mesh {
        nodes,
        triangles,
        region,
        boundary_edges,
        triple_point_a,
        triple_point_b,
        r_inner: geom.r_inner,
        r_outer: geom.r_outer,
    };

    for t in 0..mesh.n_triangles() {
        if mesh.area(t) <= 0.0 {
            return Err(Error::MeshFailure(format!("non-positive area in element {t}")));
        }
    }
    let min_angle = mesh.min_angle_deg();
    if min_angle < 10.0 {
        return Err(Error::MeshFailure(format!(
            "min triangle angle {min_angle:.2} deg below 10 deg; relax sizing controls"
        )));
    }
    Ok(mesh)
}

/// Recover the two triple-point nodes from tags alone: the nodes shared by
/// the conductor (resp. enclosure) boundary and the gas-spacer interface.
/// When both interfaces touch the electrode, the lower-z junction is
/// returned, matching `GeometryDescription::triple_point_a/b`.
pub fn locate_triple_points(mesh: &Mesh) -> Result<(usize, usize)> {
    use alloc::collections::BTreeMap;
    // Edge -> regions of the adjacent triangles.
    let mut edge_regions: BTreeMap<(usize, usize), (bool, bool)> = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = if a < b { (a, b) } else { (b, a) };
            let entry = edge_regions.entry(key).or_insert((false, false));
            match mesh.region[t] {
                Region::Gas => entry.0 = true,
                Region::Spacer => entry.1 = true,
            }
        }
    }
    let mut interface_nodes: Vec<usize> = Vec::new();
    for (&(a, b), &(gas, spacer)) in &edge_regions {
        if gas && spacer {
            interface_nodes.push(a);
            interface_nodes.push(b);
        }
    }
    interface_nodes.sort_unstable();
    interface_nodes.dedup();
    if interface_nodes.is_empty() {
        return Err(Error::NotFound("no gas-spacer interface in mesh".into()));
    }
    let pick = |tag: BoundaryTag| -> Result<usize> {
        let mut candidates: Vec<usize> = mesh
            .boundary_edges
            .iter()
            .filter(|(_, t)| *t == tag)
            .flat_map(|(e, _)| e.iter().copied())
            .filter(|n| interface_nodes.binary_search(n).is_ok())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates
            .into_iter()
            .min_by(|&a, &b| {
                mesh.nodes[a][1]
                    .partial_cmp(&mesh.nodes[b][1])
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::NotFound(format!("no triple point on {tag:?} boundary")))
    };
    Ok((pick(BoundaryTag::Conductor)?, pick(BoundaryTag::Enclosure)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryParams};

    pub(crate) fn default_geometry() -> GeometryDescription {
        build_geometry(&GeometryParams {
            r_inner: 0.05,
            r_outer: 0.125,
            spacer_axial_center: 0.25,
            spacer_thickness_axial: 0.04,
            cone_angle_deg: 30.0,
            domain_axial_length: 0.5,
        })
        .unwrap()
    }

    pub(crate) fn default_controls() -> MeshControls {
        MeshControls { h_max: 0.012, triple_point_h: 0.004, grading_ratio: 0.5 }
    }

    #[test]
    fn annulus_mesh_is_all_gas() {
        let g = GeometryDescription::annulus(0.05, 0.125, 0.3).unwrap();
        let m = generate_mesh(&g, &MeshControls { h_max: 0.01, triple_point_h: 0.01, grading_ratio: 0.5 }).unwrap();
        assert!(m.region.iter().all(|&r| r == Region::Gas));
        assert!(m.triple_point_a.is_none());
        assert!(locate_triple_points(&m).is_err());
    }

    #[test]
    fn region_areas_match_analytic() {
        let g = default_geometry();
        let m = generate_mesh(&g, &default_controls()).unwrap();
        let gas = m.region_area(Region::Gas);
        let spacer = m.region_area(Region::Spacer);
        assert!((gas - g.gas_area()).abs() / g.gas_area() < 1e-6);
        assert!((spacer - g.spacer_area()).abs() / g.spacer_area() < 1e-6);
    }

    #[test]
    fn triple_point_nodes_match_closed_form() {
        let g = default_geometry();
        let m = generate_mesh(&g, &default_controls()).unwrap();
        let (a, b) = locate_triple_points(&m).unwrap();
        assert_eq!(Some(a), m.triple_point_a);
        assert_eq!(Some(b), m.triple_point_b);
        let (ra, za) = g.triple_point_a().unwrap();
        let (rb, zb) = g.triple_point_b().unwrap();
        assert!((m.nodes[a][0] - ra).abs() < 1e-9);
        assert!((m.nodes[a][1] - za).abs() < 1e-9);
        assert!((m.nodes[b][0] - rb).abs() < 1e-9);
        assert!((m.nodes[b][1] - zb).abs() < 1e-9);
    }

    #[test]
    fn mirrored_geometry_mirrors_junction_coordinates() {
        let g = default_geometry();
        // Mirror in z about the domain centre: same frustum reflected, which
        // maps the lower interface onto the upper one of the mirrored model.
        let l = g.axial_length;
        let s = g.spacer.unwrap();
        let mirrored = build_geometry(&GeometryParams {
            r_inner: g.r_inner,
            r_outer: g.r_outer,
            spacer_axial_center: l - 0.25,
            spacer_thickness_axial: s.thickness,
            cone_angle_deg: 30.0,
            domain_axial_length: l,
        })
        .unwrap();
        let (_, za) = g.triple_point_a().unwrap();
        let (_, za_m) = mirrored.triple_point_a().unwrap();
        // Lower interface of the mirrored model corresponds to the mirrored
        // upper interface of the original.
        let z_upper = za + s.thickness;
        assert!((za_m - (l - z_upper)).abs() < 1e-12);
    }

    #[test]
    fn refinement_grows_node_count_quadratically() {
        let g = default_geometry();
        let c = default_controls();
        let m1 = generate_mesh(&g, &c).unwrap();
        let m2 = generate_mesh(&g, &c.refined(2.0)).unwrap();
        let factor = m2.n_nodes() as f64 / m1.n_nodes() as f64;
        assert!(factor >= 3.0 && factor <= 5.0, "factor {factor}");
    }

    #[test]
    fn mesh_is_conforming_and_partitioned() {
        use std::collections::HashMap;
        let g = default_geometry();
        let m = generate_mesh(&g, &default_controls()).unwrap();
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &m.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = if a < b { (a, b) } else { (b, a) };
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        // Interior edges shared by exactly two triangles, boundary by one.
        let boundary: std::collections::HashSet<(usize, usize)> = m
            .boundary_edges
            .iter()
            .map(|(e, _)| if e[0] < e[1] { (e[0], e[1]) } else { (e[1], e[0]) })
            .collect();
        for (edge, count) in &edge_count {
            if boundary.contains(edge) {
                assert_eq!(*count, 1, "boundary edge {edge:?} shared by {count}");
            } else {
                assert_eq!(*count, 2, "interior edge {edge:?} shared by {count}");
            }
        }
        assert_eq!(m.region.len(), m.n_triangles());
        assert!(m.min_angle_deg() >= 10.0);
    }

    #[test]
    fn mesh_generation_is_deterministic() {
        let g = default_geometry();
        let c = default_controls();
        let m1 = generate_mesh(&g, &c).unwrap();
        let m2 = generate_mesh(&g, &c).unwrap();
        assert_eq!(m1.nodes, m2.nodes);
        assert_eq!(m1.triangles, m2.triangles);
    }

    #[test]
    fn element_size_near_triple_points_respects_control() {
        let g = default_geometry();
        let c = default_controls();
        let m = generate_mesh(&g, &c).unwrap();
        let a = m.triple_point_a.unwrap();
        for t in m.triangles_at_node(a) {
            let tri = m.triangles[t];
            for k in 0..3 {
                let p = m.nodes[tri[k]];
                let q = m.nodes[tri[(k + 1) % 3]];
                let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                // Sheared edges may exceed the axial spacing by 1/cos(angle).
                assert!(len <= 1.5 * c.triple_point_h, "edge length {len}");
            }
        }
    }

    #[test]
    fn degenerate_controls_are_rejected() {
        let g = default_geometry();
        let bad = MeshControls { h_max: 0.004, triple_point_h: 0.012, grading_ratio: 0.5 };
        assert!(matches!(generate_mesh(&g, &bad), Err(Error::MeshFailure(_))));
    }
}
