//! Scenario orchestration: one shared mesh, several material variants, the
//! transient run per variant (with electrothermal pre-coupling for DC
//! plateaus), triple-point probe series, field-maximum records, the
//! polarity-reversal superposition estimate and the reduction table.

use crate::eqs::{
    run_transient, solve_capacitive, solve_resistive_dc, FieldState, TransientControls,
    TransientResult,
};
use crate::error::Error;
use crate::fem::NodalField;
use crate::geometry::{build_geometry, GeometryParams};
use crate::materials::{assign_materials, GradingProfile, MaterialConfig};
use crate::mesh::{generate_mesh, locate_triple_points, Mesh, MeshControls, Region};
use crate::postproc::{max_field, reduction_percent, FieldMaximum, ReductionReport};
use crate::thermal::{couple_electrothermal, ThermalBoundary};
use crate::waveform::Waveform;
use crate::Result;
use alloc::string::String;
use alloc::vec::Vec;

/// One compared material variant: a material set plus optional grading
/// profiles over the spacer.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub materials: MaterialConfig,
    pub profiles: Vec<GradingProfile>,
}

/// Full scenario description. The first variant is the comparison baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub geometry: GeometryParams,
    pub mesh: MeshControls,
    pub variants: Vec<Variant>,
    pub waveform: Waveform,
    pub transient: TransientControls,
    pub thermal: ThermalBoundary,
    /// Run the electrothermal fixed point on the DC plateau before the
    /// transient (resolved on the plateau voltage).
    pub thermal_coupling: bool,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::ConfigError("scenario needs at least one variant".into()));
        }
        let mut names = alloc::collections::BTreeSet::new();
        for v in &self.variants {
            if !names.insert(v.name.clone()) {
                return Err(Error::ConfigError(alloc::format!(
                    "duplicate variant name '{}'",
                    v.name
                )));
            }
            v.materials.validate()?;
            for p in &v.profiles {
                p.validate()?;
            }
        }
        self.geometry.validate()?;
        self.mesh.validate()?;
        self.transient.validate()?;
        self.thermal.validate()?;
        Ok(())
    }

    /// Plateau voltage of the waveform's DC operating point.
    pub fn plateau_voltage(&self) -> f64 {
        match self.waveform {
            Waveform::DcOn { v_dc, .. } => v_dc,
            Waveform::PolarityReversal { v_dc, .. } => v_dc,
            Waveform::LightningOnDc { v_dc, .. } => v_dc,
        }
    }
}

/// Per-variant outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub name: String,
    pub transient: TransientResult,
    /// Global max |E| over all snapshots, with its location.
    pub max_e: FieldMaximum,
    /// Spacer max at the end of the waveform transition and at run end
    /// (DC scenarios; None without a spacer).
    pub spacer_max_at_transition: Option<FieldMaximum>,
    pub spacer_max_at_end: Option<FieldMaximum>,
    /// Probe-B inversion check for DC plateaus: steady |E| at B stays
    /// within 20% of the transition-end value.
    pub inversion_prevented: Option<bool>,
    /// Per-element polarity-reversal superposition estimate and its max
    /// (reversal scenarios only).
    pub reversal_estimate: Option<Vec<f64>>,
    pub reversal_estimate_max: Option<f64>,
    /// Nodal temperature used during the run.
    pub temperature: NodalField,
}

/// Scenario outcome: the shared mesh, per-variant results (failures kept
/// per variant so one diverging variant does not abort the others), and the
/// reduction table versus the first successful variant.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub mesh: Mesh,
    pub variants: Vec<VariantResult>,
    pub failures: Vec<(String, Error)>,
    pub reductions: Vec<ReductionReport>,
}

/// Per-element polarity-reversal magnitude estimate |2 |E_ac| - |E_dc||
/// from the capacitive (AC-like) and resistive DC steady-state fields.
pub fn estimate_polarity_reversal(e_ac: &[f64], e_dc: &[f64]) -> Result<Vec<f64>> {
    if e_ac.len() != e_dc.len() {
        return Err(Error::MeshMismatch);
    }
    Ok(e_ac
        .iter()
        .zip(e_dc)
        .map(|(&a, &d)| (2.0 * a - d).abs())
        .collect())
}

fn snapshot_max(mesh: &Mesh, snapshots: &[FieldState]) -> Result<FieldMaximum> {
    let mut best: Option<FieldMaximum> = None;
    for s in snapshots {
        let m = max_field(s, mesh, None)?;
        if best.map(|b| m.e_magnitude > b.e_magnitude).unwrap_or(true) {
            best = Some(m);
        }
    }
    best.ok_or(Error::EmptyRegion)
}

fn run_variant(
    spec: &ScenarioSpec,
    mesh: &Mesh,
    variant: &Variant,
) -> Result<VariantResult> {
    let materials = assign_materials(mesh, &variant.materials, &variant.profiles)?;
    let v_plateau = spec.plateau_voltage();

    // Temperature on the DC plateau: electrothermal fixed point when
    // requested, otherwise the conduction-only profile boundary conditions.
    let temp = if spec.thermal_coupling {
        couple_electrothermal(mesh, &materials, v_plateau, &spec.thermal, &spec.transient, 1e-5, 50)?
            .temp
    } else {
        crate::thermal::solve_heat(
            mesh,
            &materials.lambda,
            &alloc::vec![0.0; mesh.n_triangles()],
            &spec.thermal,
            None,
        )?
    };

    let (transient, reversal_estimate) = match &spec.waveform {
        Waveform::LightningOnDc { v_dc, t_apply, .. } => {
            // Impulse rides on the converged DC steady state: solve the
            // resistive problem, place it at t_apply and restart stepping
            // at the impulse dt_initial.
            let mut dc = solve_resistive_dc(mesh, &materials, *v_dc, &temp, &spec.transient)?;
            dc.time = *t_apply;
            let res = run_transient(
                mesh,
                &materials,
                &spec.waveform,
                &temp,
                &spec.transient,
                Some(dc),
                |_, _, _| {},
            )?;
            (res, None)
        }
        Waveform::PolarityReversal { v_dc, .. } => {
            // Start from the converged +DC steady state (long pre-hold).
            let dc = solve_resistive_dc(mesh, &materials, *v_dc, &temp, &spec.transient)?;
            let cap = solve_capacitive(mesh, &materials, *v_dc)?;
            let estimate = estimate_polarity_reversal(&cap.e.magnitude, &dc.e.magnitude)?;
            let res = run_transient(
                mesh,
                &materials,
                &spec.waveform,
                &temp,
                &spec.transient,
                Some(dc),
                |_, _, _| {},
            )?;
            (res, Some(estimate))
        }
        Waveform::DcOn { .. } => {
            let res = run_transient(
                mesh,
                &materials,
                &spec.waveform,
                &temp,
                &spec.transient,
                None,
                |_, _, _| {},
            )?;
            (res, None)
        }
    };

    let has_spacer = mesh.region.iter().any(|&r| r == Region::Spacer);
    let spacer_max_at_transition = match (&transient.transition_end_state, has_spacer) {
        (Some(s), true) => Some(max_field(s, mesh, Some(Region::Spacer))?),
        _ => None,
    };
    let spacer_max_at_end = if has_spacer {
        Some(max_field(
            transient.snapshots.last().expect("at least the initial snapshot"),
            mesh,
            Some(Region::Spacer),
        )?)
    } else {
        None
    };

    // Probe-B inversion check on DC plateaus: the steady-state stress at
    // the ground-side triple point must not grow past 20% above its value
    // right after the voltage transition.
    let inversion_prevented = match (&spec.waveform, transient.probes.last()) {
        (Waveform::DcOn { .. }, Some(last)) => transient
            .probes
            .iter()
            .find(|p| p.time >= spec.waveform.transition_end())
            .map(|at_ramp| last.e_b <= 1.2 * at_ramp.e_b),
        _ => None,
    };

    let reversal_estimate_max = reversal_estimate
        .as_ref()
        .map(|e| e.iter().cloned().fold(0.0_f64, f64::max));

    Ok(VariantResult {
        name: variant.name.clone(),
        max_e: snapshot_max(mesh, &transient.snapshots)?,
        spacer_max_at_transition,
        spacer_max_at_end,
        inversion_prevented,
        reversal_estimate,
        reversal_estimate_max,
        temperature: temp,
        transient,
    })
}

/// Run the full scenario: one shared mesh, all variants, reduction table
/// against the first successful variant (the baseline).
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    spec.validate()?;
    let geometry = build_geometry(&spec.geometry)?;
    let mut mesh = generate_mesh(&geometry, &spec.mesh)?;
    locate_triple_points(&mut mesh)?;

    let mut variants = Vec::new();
    let mut failures = Vec::new();
    for v in &spec.variants {
        match run_variant(spec, &mesh, v) {
            Ok(r) => variants.push(r),
            Err(e) => failures.push((v.name.clone(), e)),
        }
    }
    if variants.is_empty() {
        // Every variant failed: propagate the first error.
        let (name, err) = failures.into_iter().next().expect("non-empty variants");
        return Err(Error::ConfigError(alloc::format!(
            "all variants failed; first failure '{name}': {err}"
        )));
    }

    let baseline = &variants[0];
    let mut reductions = Vec::new();
    for test in variants.iter().skip(1) {
        reductions.push(ReductionReport {
            baseline_name: baseline.name.clone(),
            test_name: test.name.clone(),
            quantity: "max_E_V_per_m".into(),
            baseline_value: baseline.max_e.e_magnitude,
            test_value: test.max_e.e_magnitude,
            reduction_percent: reduction_percent(baseline.max_e.e_magnitude, test.max_e.e_magnitude)?,
        });
        if let (Some(b), Some(t)) = (baseline.spacer_max_at_end, test.spacer_max_at_end) {
            reductions.push(ReductionReport {
                baseline_name: baseline.name.clone(),
                test_name: test.name.clone(),
                quantity: "spacer_steady_max_E_V_per_m".into(),
                baseline_value: b.e_magnitude,
                test_value: t.e_magnitude,
                reduction_percent: reduction_percent(b.e_magnitude, t.e_magnitude)?,
            });
        }
        if let (Some(b), Some(t)) = (baseline.reversal_estimate_max, test.reversal_estimate_max) {
            reductions.push(ReductionReport {
                baseline_name: baseline.name.clone(),
                test_name: test.name.clone(),
                quantity: "reversal_estimate_max_E_V_per_m".into(),
                baseline_value: b,
                test_value: t,
                reduction_percent: reduction_percent(b, t)?,
            });
        }
    }

    Ok(ScenarioResult { mesh, variants, failures, reductions })
}
