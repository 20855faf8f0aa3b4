//! JSON scenario configuration. All physical quantities are SI
//! (metres, seconds, volts, kelvin, pascal, S/m, W/(m K)); the schema
//! mirrors the core domain types field for field so a config diff reads
//! like a parameter-study log.

use crate::CliError;
use gilsim_core::eqs::TransientControls;
use gilsim_core::geometry::GeometryParams;
use gilsim_core::materials::{
    EpoxyConductivityParams, GradingProfile, MaterialConfig, ProfileKind, ProfileScope,
    RegionMaterial, Sf6ConductivityParams, SigmaModel,
};
use gilsim_core::mesh::MeshControls;
use gilsim_core::scenario::{ScenarioSpec, Variant};
use gilsim_core::thermal::ThermalBoundary;
use gilsim_core::waveform::Waveform;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    DcOn,
    PolarityReversal,
    Lightning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub r_inner: f64,
    pub r_outer: f64,
    pub spacer_axial_center: f64,
    pub spacer_thickness_axial: f64,
    pub cone_angle_deg: f64,
    pub domain_axial_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub h_max: f64,
    pub triple_point_h: f64,
    pub grading_ratio: f64,
}

/// Waveform parameters; which fields are required depends on `scenario`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    pub v_dc: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_ramp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_hold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_switch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub front: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_apply: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSection {
    pub dt_initial: f64,
    pub dt_max: f64,
    pub dt_growth: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub steady_state_tol: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    pub conductor_t: f64,
    pub enclosure_t: f64,
    pub coupling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SigmaSection {
    Constant {
        value: f64,
    },
    Epoxy {
        kappa0: f64,
        w_a: f64,
        theta: f64,
    },
    Sf6 {
        kappa_sf6: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        e_x: f64,
        zeta_exp: f64,
        rho_shape: f64,
        eps_shape: f64,
        e_y: f64,
        t_exp: f64,
        zeta_press: f64,
        nu: f64,
    },
}

impl From<&SigmaSection> for SigmaModel {
    fn from(s: &SigmaSection) -> SigmaModel {
        match *s {
            SigmaSection::Constant { value } => SigmaModel::Constant(value),
            SigmaSection::Epoxy { kappa0, w_a, theta } => {
                SigmaModel::Epoxy(EpoxyConductivityParams { kappa0, w_a, theta })
            }
            SigmaSection::Sf6 {
                kappa_sf6,
                alpha,
                beta,
                gamma,
                e_x,
                zeta_exp,
                rho_shape,
                eps_shape,
                e_y,
                t_exp,
                zeta_press,
                nu,
            } => SigmaModel::Sf6(Sf6ConductivityParams {
                kappa_sf6,
                alpha,
                beta,
                gamma,
                e_x,
                zeta_exp,
                rho_shape,
                eps_shape,
                e_y,
                t_exp,
                zeta_press,
                nu,
            }),
        }
    }
}

impl From<&SigmaModel> for SigmaSection {
    fn from(s: &SigmaModel) -> SigmaSection {
        match *s {
            SigmaModel::Constant(value) => SigmaSection::Constant { value },
            SigmaModel::Epoxy(p) => SigmaSection::Epoxy { kappa0: p.kappa0, w_a: p.w_a, theta: p.theta },
            SigmaModel::Sf6(p) => SigmaSection::Sf6 {
                kappa_sf6: p.kappa_sf6,
                alpha: p.alpha,
                beta: p.beta,
                gamma: p.gamma,
                e_x: p.e_x,
                zeta_exp: p.zeta_exp,
                rho_shape: p.rho_shape,
                eps_shape: p.eps_shape,
                e_y: p.e_y,
                t_exp: p.t_exp,
                zeta_press: p.zeta_press,
                nu: p.nu,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMaterialSection {
    pub eps_r: f64,
    pub lambda: f64,
    pub sigma: SigmaSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsSection {
    pub gas: RegionMaterialSection,
    pub spacer: RegionMaterialSection,
    pub gas_pressure: f64,
}

impl MaterialsSection {
    fn to_core(&self) -> MaterialConfig {
        MaterialConfig {
            gas: RegionMaterial {
                eps_r: self.gas.eps_r,
                sigma: (&self.gas.sigma).into(),
                lambda: self.gas.lambda,
            },
            spacer: RegionMaterial {
                eps_r: self.spacer.eps_r,
                sigma: (&self.spacer.sigma).into(),
                lambda: self.spacer.lambda,
            },
            gas_pressure: self.gas_pressure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileKindSection {
    Uniform,
    Saddle,
    Linear,
    Piecewise { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    /// "conductivity" or "permittivity".
    pub scope: String,
    pub kind: ProfileKindSection,
    pub min_multiplier: f64,
    pub max_multiplier: f64,
}

impl ProfileSection {
    fn to_core(&self) -> Result<GradingProfile, CliError> {
        let scope = match self.scope.as_str() {
            "conductivity" => ProfileScope::Conductivity,
            "permittivity" => ProfileScope::Permittivity,
            other => {
                return Err(CliError::Config(format!(
                    "profile scope '{other}' must be 'conductivity' or 'permittivity'"
                )))
            }
        };
        let kind = match &self.kind {
            ProfileKindSection::Uniform => ProfileKind::Uniform,
            ProfileKindSection::Saddle => ProfileKind::Saddle,
            ProfileKindSection::Linear => ProfileKind::Linear,
            ProfileKindSection::Piecewise { points } => ProfileKind::Piecewise(points.clone()),
        };
        Ok(GradingProfile {
            kind,
            scope,
            min_multiplier: self.min_multiplier,
            max_multiplier: self.max_multiplier,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    pub name: String,
    pub materials: MaterialsSection,
    #[serde(default)]
    pub profiles: Vec<ProfileSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Write the VTK snapshot series (probe CSVs are always written).
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { snapshots: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path into this config, e.g.
    /// "variants.1.profiles.0.max_multiplier".
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Free-form comment, carried through verbatim.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    pub scenario: ScenarioKind,
    pub geometry: GeometrySection,
    pub mesh: MeshSection,
    pub waveform: WaveformSection,
    pub transient: TransientSection,
    pub thermal: ThermalSection,
    pub variants: Vec<VariantSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepSection>,
}

fn require(field: Option<f64>, name: &str, scenario: &str) -> Result<f64, CliError> {
    field.ok_or_else(|| {
        CliError::Config(format!("waveform.{name} (number) is required for the {scenario} scenario"))
    })
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Config, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn waveform(&self) -> Result<Waveform, CliError> {
        let w = &self.waveform;
        Ok(match self.scenario {
            ScenarioKind::DcOn => {
                Waveform::dc_on(w.v_dc, require(w.t_ramp, "t_ramp", "dc-on")?)?
            }
            ScenarioKind::PolarityReversal => Waveform::polarity_reversal(
                w.v_dc,
                require(w.t_hold, "t_hold", "polarity-reversal")?,
                require(w.t_switch, "t_switch", "polarity-reversal")?,
            )?,
            ScenarioKind::Lightning => Waveform::lightning_on_dc(
                w.v_dc,
                require(w.v_peak, "v_peak", "lightning")?,
                require(w.front, "front", "lightning")?,
                require(w.tail, "tail", "lightning")?,
                require(w.t_apply, "t_apply", "lightning")?,
            )?,
        })
    }

    /// Convert to the core scenario description; `refine > 1` scales the
    /// mesh size controls down uniformly.
    pub fn to_spec(&self, refine: f64) -> Result<ScenarioSpec, CliError> {
        if !(refine > 0.0) {
            return Err(CliError::Config(format!("refine factor {refine} must be > 0")));
        }
        let mut variants = Vec::new();
        for v in &self.variants {
            let profiles = v
                .profiles
                .iter()
                .map(|p| p.to_core())
                .collect::<Result<Vec<_>, _>>()?;
            variants.push(Variant {
                name: v.name.clone(),
                materials: v.materials.to_core(),
                profiles,
            });
        }
        let mesh = MeshControls {
            h_max: self.mesh.h_max,
            triple_point_h: self.mesh.triple_point_h,
            grading_ratio: self.mesh.grading_ratio,
        }
        .refined(refine);
        let spec = ScenarioSpec {
            geometry: GeometryParams {
                r_inner: self.geometry.r_inner,
                r_outer: self.geometry.r_outer,
                spacer_axial_center: self.geometry.spacer_axial_center,
                spacer_thickness_axial: self.geometry.spacer_thickness_axial,
                cone_angle_deg: self.geometry.cone_angle_deg,
                domain_axial_length: self.geometry.domain_axial_length,
            },
            mesh,
            variants,
            waveform: self.waveform()?,
            transient: TransientControls {
                dt_initial: self.transient.dt_initial,
                dt_max: self.transient.dt_max,
                dt_growth: self.transient.dt_growth,
                picard_tol: self.transient.picard_tol,
                picard_max_iters: self.transient.picard_max_iters,
                steady_state_tol: self.transient.steady_state_tol,
                t_end: self.transient.t_end,
            },
            thermal: ThermalBoundary {
                conductor_t: self.thermal.conductor_t,
                enclosure_t: self.thermal.enclosure_t,
            },
            thermal_coupling: self.thermal.coupling,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn default_materials() -> MaterialsSection {
    let core = gilsim_core::materials::defaults::material_config();
    MaterialsSection {
        gas: RegionMaterialSection {
            eps_r: core.gas.eps_r,
            lambda: core.gas.lambda,
            sigma: (&core.gas.sigma).into(),
        },
        spacer: RegionMaterialSection {
            eps_r: core.spacer.eps_r,
            lambda: core.spacer.lambda,
            sigma: (&core.spacer.sigma).into(),
        },
        gas_pressure: core.gas_pressure,
    }
}

/// The shipped DC energization default: uniform epoxy baseline versus a
/// saddle-shaped conductivity grading, 320 kV, 0.6 MPa, 40 K gradient.
pub fn default_config() -> Config {
    Config {
        note: Some(
            "Reference configuration. Material constants are plausible published-order values, \
             not measurements; replace them with characterized data for design work."
                .into(),
        ),
        scenario: ScenarioKind::DcOn,
        geometry: GeometrySection {
            r_inner: 0.05,
            r_outer: 0.125,
            spacer_axial_center: 0.25,
            spacer_thickness_axial: 0.04,
            cone_angle_deg: 30.0,
            domain_axial_length: 0.5,
        },
        mesh: MeshSection { h_max: 0.012, triple_point_h: 0.003, grading_ratio: 0.5 },
        waveform: WaveformSection {
            v_dc: 320e3,
            t_ramp: Some(0.01),
            t_hold: None,
            t_switch: None,
            v_peak: None,
            front: None,
            tail: None,
            t_apply: None,
        },
        transient: TransientSection {
            dt_initial: 1e-4,
            dt_max: 5e6,
            dt_growth: 1.3,
            picard_tol: 1e-4,
            picard_max_iters: 60,
            steady_state_tol: 1e-4,
            t_end: 1e8,
        },
        thermal: ThermalSection { conductor_t: 340.0, enclosure_t: 300.0, coupling: true },
        variants: vec![
            VariantSection {
                name: "uniform".into(),
                materials: default_materials(),
                profiles: Vec::new(),
            },
            VariantSection {
                name: "saddle-sigma".into(),
                materials: default_materials(),
                profiles: vec![ProfileSection {
                    scope: "conductivity".into(),
                    kind: ProfileKindSection::Saddle,
                    min_multiplier: 1.0,
                    max_multiplier: 4.0,
                }],
            },
        ],
        output: OutputSection::default(),
        sweep: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_and_validates() {
        let cfg = default_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = Config::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        back.to_spec(1.0).unwrap();
    }

    #[test]
    fn unknown_keys_are_named_in_the_error() {
        let mut v: serde_json::Value =
            serde_json::to_value(default_config()).unwrap();
        v["geometry"]["typo_field"] = 1.0.into();
        let err = Config::from_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("typo_field"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_waveform_field_names_the_key() {
        let mut cfg = default_config();
        cfg.scenario = ScenarioKind::PolarityReversal;
        let err = cfg.to_spec(1.0).unwrap_err();
        assert!(err.to_string().contains("t_hold"), "{err}");
    }

    #[test]
    fn refine_scales_mesh_controls() {
        let cfg = default_config();
        let s1 = cfg.to_spec(1.0).unwrap();
        let s2 = cfg.to_spec(2.0).unwrap();
        assert!((s2.mesh.h_max - s1.mesh.h_max / 2.0).abs() < 1e-18);
    }
}
