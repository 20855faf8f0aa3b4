//! File exports: VTK legacy ASCII snapshots, probe/profile/sweep CSVs, the
//! summary JSON and the run manifest. All numeric text uses 17 significant
//! digits so every finite double round-trips bitwise; line endings are LF.

use crate::CliError;
use gilsim_core::eqs::{FieldState, ProbeSample};
use gilsim_core::materials::{grading_multiplier, GradingProfile};
use gilsim_core::mesh::{Mesh, Region};
use gilsim_core::postproc::ReductionReport;
use gilsim_core::scenario::VariantResult;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// 17 significant digits: lossless for every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn vtk_header(title: &str, mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for n in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", fmt_f64(n[0]), fmt_f64(n[1]));
    }
    let m = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("5\n");
    }
    s
}

fn region_scalars(mesh: &Mesh, s: &mut String) {
    s.push_str("SCALARS region int 1\nLOOKUP_TABLE default\n");
    for &r in &mesh.region {
        s.push_str(if r == Region::Spacer { "1\n" } else { "0\n" });
    }
}

/// Mesh-only VTK (region as cell data), used by `gilsim mesh`.
pub fn export_mesh_vtk(mesh: &Mesh, path: &Path) -> Result<(), CliError> {
    let mut s = vtk_header("gilsim mesh", mesh);
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_triangles());
    region_scalars(mesh, &mut s);
    write_file(path, &s)
}

/// Full field snapshot: potential and temperature on points, |E| and
/// region on cells.
pub fn export_vtk(state: &FieldState, mesh: &Mesh, path: &Path) -> Result<(), CliError> {
    let mut s = vtk_header(&format!("gilsim snapshot t={} s", fmt_f64(state.time)), mesh);
    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
    s.push_str("SCALARS potential_V double 1\nLOOKUP_TABLE default\n");
    for &v in &state.phi.values {
        let _ = writeln!(s, "{}", fmt_f64(v));
    }
    s.push_str("SCALARS temperature_K double 1\nLOOKUP_TABLE default\n");
    for &v in &state.temp.values {
        let _ = writeln!(s, "{}", fmt_f64(v));
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_triangles());
    s.push_str("SCALARS e_magnitude_V_per_m double 1\nLOOKUP_TABLE default\n");
    for &v in &state.e.magnitude {
        let _ = writeln!(s, "{}", fmt_f64(v));
    }
    region_scalars(mesh, &mut s);
    write_file(path, &s)
}

/// Snapshot series filename: zero-padded index first so a lexicographic
/// sort is a time sort.
pub fn snapshot_filename(index: usize, time_s: f64) -> String {
    format!("snapshot_{index:06}_{time_s:.6e}.vtk")
}

/// Probe time series CSV with the documented header.
pub fn export_probe_csv(probes: &[ProbeSample], path: &Path) -> Result<(), CliError> {
    let mut s = String::from("time_s, E_A_V_per_m, E_B_V_per_m, V_conductor_V\n");
    for p in probes {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(p.time),
            fmt_f64(p.e_a),
            fmt_f64(p.e_b),
            fmt_f64(p.conductor_voltage)
        );
    }
    write_file(path, &s)
}

/// Grading profile sampled on a uniform parameter grid, for plotting.
pub fn export_profile_csv(profile: &GradingProfile, path: &Path) -> Result<(), CliError> {
    let mut s = String::from("u, multiplier\n");
    let n = 200;
    for i in 0..=n {
        let u = i as f64 / n as f64;
        let m = grading_multiplier(profile, u).map_err(CliError::from)?;
        let _ = writeln!(s, "{},{}", fmt_f64(u), fmt_f64(m));
    }
    write_file(path, &s)
}

#[derive(Debug, Serialize)]
pub struct SummaryVariant {
    pub name: String,
    #[serde(rename = "max_E_V_per_m")]
    pub max_e_v_per_m: f64,
    pub location_r_m: f64,
    pub location_z_m: f64,
    pub probe_files: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SummaryReduction {
    pub baseline: String,
    pub test: String,
    pub quantity: String,
    #[serde(rename = "baseline_V_per_m")]
    pub baseline_v_per_m: f64,
    #[serde(rename = "test_V_per_m")]
    pub test_v_per_m: f64,
    pub reduction_percent: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub variants: Vec<SummaryVariant>,
    pub reductions: Vec<SummaryReduction>,
}

pub fn build_summary(
    scenario: &str,
    variants: &[(&VariantResult, Vec<String>)],
    reductions: &[ReductionReport],
) -> Summary {
    Summary {
        scenario: scenario.to_string(),
        variants: variants
            .iter()
            .map(|(v, probe_files)| SummaryVariant {
                name: v.name.clone(),
                max_e_v_per_m: v.max_e.e_magnitude,
                location_r_m: v.max_e.r,
                location_z_m: v.max_e.z,
                probe_files: probe_files.clone(),
            })
            .collect(),
        reductions: reductions
            .iter()
            .map(|r| SummaryReduction {
                baseline: r.baseline_name.clone(),
                test: r.test_name.clone(),
                quantity: r.quantity.clone(),
                baseline_v_per_m: r.baseline_value,
                test_v_per_m: r.test_value,
                reduction_percent: r.reduction_percent,
            })
            .collect(),
    }
}

pub fn export_summary(summary: &Summary, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

/// Run provenance: inputs hash, timing, artifact list, variant status.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub config_sha256: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub tool_version: String,
    pub artifacts: Vec<String>,
    pub variants: Vec<ManifestVariant>,
}

#[derive(Debug, Serialize)]
pub struct ManifestVariant {
    pub name: String,
    /// "ok" or the error text of a failed variant.
    pub status: String,
}

pub fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn export_manifest(manifest: &RunManifest, path: &Path) -> Result<(), CliError> {
    // Atomic at run end: write to a sibling temp file, then rename.
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(e.to_string()))?;
    let tmp: PathBuf = path.with_extension("json.tmp");
    write_file(&tmp, &(text + "\n"))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming {}: {e}", path.display())))
}
