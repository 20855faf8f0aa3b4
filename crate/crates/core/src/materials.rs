//! Material models: nonlinear epoxy and SF6 conductivity, permittivities,
//! thermal conductivities and the spatial grading (FGM) profiles applied to
//! the spacer.
//!
//! The epoxy conductivity is Arrhenius in temperature with an exponential
//! field term; the SF6 conductivity is a product of a field-shape factor, an
//! inverse field factor and exponential pressure/temperature factors. The
//! model constants are configuration inputs; shipped defaults are plausible
//! values placing the relaxation times in the 1e4..1e7 s range, not
//! published data.

use crate::error::Error;
use crate::fem::NodalField;
use crate::mesh::{Mesh, Region};
use crate::Result;
use alloc::format;
use alloc::vec::Vec;
use libm::{exp, pow};

/// Vacuum permittivity, As/Vm.
pub const EPS0: f64 = 8.854e-12;
/// Boltzmann constant, eV/K.
pub const K_B_EV: f64 = 8.617e-5;

/// Constants of the epoxy conductivity
/// kappa(T, E) = kappa0 * exp(-W_A / (k_B T)) * exp(theta * |E|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpoxyConductivityParams {
    /// Prefactor, S/m.
    pub kappa0: f64,
    /// Activation energy, eV.
    pub w_a: f64,
    /// Field coefficient, m/V.
    pub theta: f64,
}

impl EpoxyConductivityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa0 > 0.0 && self.w_a >= 0.0 && self.theta >= 0.0) {
            return Err(Error::ConfigError(format!(
                "epoxy params out of range: kappa0={}, w_a={}, theta={}",
                self.kappa0, self.w_a, self.theta
            )));
        }
        Ok(())
    }
}

/// Constants of the SF6 conductivity
/// kappa(E, P, T) = kappa_sf6 * (alpha + beta * (gamma + |E|/E_x)^zeta_exp)
///               * (rho + eps * |E|/E_y)^(-t_exp) * exp(zeta_press * P)
///               * exp(nu * T).
///
/// The published form reuses one symbol for the field exponent and the
/// pressure coefficient and writes both a shape epsilon and the
/// permittivity; the fields here keep them apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sf6ConductivityParams {
    pub kappa_sf6: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Field normalization of the shape factor, V/m.
    pub e_x: f64,
    /// Exponent on the (gamma + |E|/E_x) factor.
    pub zeta_exp: f64,
    pub rho_shape: f64,
    pub eps_shape: f64,
    /// Field normalization of the inverse factor, V/m.
    pub e_y: f64,
    /// Exponent of the inverse factor.
    pub t_exp: f64,
    /// Pressure coefficient, 1/Pa.
    pub zeta_press: f64,
    /// Temperature coefficient, 1/K.
    pub nu: f64,
}

impl Sf6ConductivityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_sf6 > 0.0 && self.e_x > 0.0 && self.e_y > 0.0) {
            return Err(Error::ConfigError(format!(
                "sf6 params out of range: kappa_sf6={}, e_x={}, e_y={}",
                self.kappa_sf6, self.e_x, self.e_y
            )));
        }
        Ok(())
    }
}

/// kappa0 * exp(-W_A/(k_B T)) * exp(theta |E|); strictly increasing in both
/// T and |E| for non-negative W_A and theta.
pub fn epoxy_conductivity(t_kelvin: f64, e_mag: f64, p: &EpoxyConductivityParams) -> Result<f64> {
    debug_assert!(t_kelvin > 0.0);
    let kappa = p.kappa0 * exp(-p.w_a / (K_B_EV * t_kelvin)) * exp(p.theta * e_mag);
    if !kappa.is_finite() {
        return Err(Error::NonFinite(format!(
            "epoxy conductivity overflow at T={t_kelvin} K, |E|={e_mag} V/m (kappa0={}, w_a={}, theta={})",
            p.kappa0, p.w_a, p.theta
        )));
    }
    Ok(kappa)
}

/// Product of the four SF6 factors exactly as modelled; continuous in all
/// arguments over the admissible parameter range.
pub fn sf6_conductivity(e_mag: f64, pressure: f64, t_kelvin: f64, p: &Sf6ConductivityParams) -> Result<f64> {
    debug_assert!(t_kelvin > 0.0 && pressure > 0.0);
    let shape_base = p.gamma + e_mag / p.e_x;
    if shape_base < 0.0 && p.zeta_exp != libm::floor(p.zeta_exp) {
        return Err(Error::DomainError(format!(
            "fractional power of negative base {shape_base} in SF6 shape factor"
        )));
    }
    let inv_base = p.rho_shape + p.eps_shape * e_mag / p.e_y;
    if inv_base <= 0.0 {
        return Err(Error::DomainError(format!(
            "non-positive base {inv_base} in SF6 inverse factor"
        )));
    }
    let kappa = p.kappa_sf6
        * (p.alpha + p.beta * pow(shape_base, p.zeta_exp))
        * (1.0 / pow(inv_base, p.t_exp))
        * exp(p.zeta_press * pressure)
        * exp(p.nu * t_kelvin);
    if !kappa.is_finite() {
        return Err(Error::NonFinite(format!(
            "SF6 conductivity overflow at |E|={e_mag}, P={pressure}, T={t_kelvin}"
        )));
    }
    Ok(kappa)
}

/// Conductivity model attached to an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaModel {
    Epoxy(EpoxyConductivityParams),
    Sf6(Sf6ConductivityParams),
    /// Fixed conductivity for verification runs and linear-media checks.
    Constant(f64),
}

/// Shape of a radial grading profile over the normalized coordinate
/// u = (r - r_inner) / (r_outer - r_inner).
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Uniform,
    /// Parabola with maxima at both electrodes, minimum at mid-gap.
    Saddle,
    /// Linear interpolation from min (u=0) to max (u=1).
    Linear,
    /// Piecewise-linear through (u, multiplier) control points covering
    /// u = 0 and u = 1 with strictly increasing u.
    Piecewise(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileScope {
    Permittivity,
    Conductivity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradingProfile {
    pub kind: ProfileKind,
    pub scope: ProfileScope,
    pub min_multiplier: f64,
    pub max_multiplier: f64,
}

impl GradingProfile {
    pub fn uniform(scope: ProfileScope) -> Self {
        GradingProfile { kind: ProfileKind::Uniform, scope, min_multiplier: 1.0, max_multiplier: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_multiplier > 0.0 && self.max_multiplier > 0.0) {
            return Err(Error::ConfigError(format!(
                "profile multipliers must be positive ({}, {})",
                self.min_multiplier, self.max_multiplier
            )));
        }
        if let ProfileKind::Piecewise(points) = &self.kind {
            if points.len() < 2 {
                return Err(Error::ConfigError("piecewise profile needs >= 2 control points".into()));
            }
            if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
                return Err(Error::ConfigError("piecewise profile must cover u=0 and u=1".into()));
            }
            for w in points.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::ConfigError("piecewise control points must be strictly increasing in u".into()));
                }
            }
            if points.iter().any(|&(_, m)| m <= 0.0) {
                return Err(Error::ConfigError("piecewise multipliers must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Evaluate a grading profile at the normalized radial coordinate u.
pub fn grading_multiplier(profile: &GradingProfile, u: f64) -> Result<f64> {
    if u < -1e-12 || u > 1.0 + 1e-12 {
        return Err(Error::OutOfRange { value: u });
    }
    let u = u.clamp(0.0, 1.0);
    let value = match &profile.kind {
        ProfileKind::Uniform => 1.0,
        ProfileKind::Saddle => {
            let s = 2.0 * u - 1.0;
            profile.min_multiplier + (profile.max_multiplier - profile.min_multiplier) * s * s
        }
        ProfileKind::Linear => {
            profile.min_multiplier + (profile.max_multiplier - profile.min_multiplier) * u
        }
        ProfileKind::Piecewise(points) => {
            let mut seg = &points[points.len() - 2..];
            for w in points.windows(2) {
                if u <= w[1].0 {
                    seg = w;
                    break;
                }
            }
            let (u0, m0) = seg[0];
            let (u1, m1) = seg[1];
            m0 + (m1 - m0) * (u - u0) / (u1 - u0)
        }
    };
    Ok(value)
}

/// Per-region material inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMaterial {
    pub eps_r: f64,
    pub sigma: SigmaModel,
    /// Thermal conductivity, W/(m K).
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConfig {
    pub gas: RegionMaterial,
    pub spacer: RegionMaterial,
    /// Gas pressure, Pa.
    pub gas_pressure: f64,
}

impl MaterialConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("gas", &self.gas), ("spacer", &self.spacer)] {
            if !(m.eps_r >= 1.0) {
                return Err(Error::ConfigError(format!("{name} eps_r {} must be >= 1", m.eps_r)));
            }
            if !(m.lambda > 0.0) {
                return Err(Error::ConfigError(format!("{name} lambda {} must be > 0", m.lambda)));
            }
            match &m.sigma {
                SigmaModel::Epoxy(p) => p.validate()?,
                SigmaModel::Sf6(p) => p.validate()?,
                SigmaModel::Constant(v) => {
                    if !(*v > 0.0) {
                        return Err(Error::ConfigError(format!("{name} constant sigma {v} must be > 0")));
                    }
                }
            }
        }
        if !(self.gas_pressure > 0.0) {
            return Err(Error::ConfigError(format!(
                "gas pressure {} must be > 0",
                self.gas_pressure
            )));
        }
        Ok(())
    }
}

/// Immutable per-element material data, grading multipliers precomputed at
/// element centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialAssignment {
    /// Absolute permittivity eps0 * eps_r * grading, per element.
    pub eps: Vec<f64>,
    pub sigma_model: Vec<SigmaModel>,
    /// Multiplier applied to the conductivity prefactor, per element.
    pub sigma_mult: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gas_pressure: f64,
}

impl MaterialAssignment {
    pub fn n_elements(&self) -> usize {
        self.eps.len()
    }

    /// Evaluate the conductivity of element `t` at field magnitude `e_mag`
    /// and temperature `t_kelvin`, including the grading multiplier.
    pub fn sigma(&self, t: usize, e_mag: f64, t_kelvin: f64) -> Result<f64> {
        let base = match &self.sigma_model[t] {
            SigmaModel::Epoxy(p) => epoxy_conductivity(t_kelvin, e_mag, p)?,
            SigmaModel::Sf6(p) => sf6_conductivity(e_mag, self.gas_pressure, t_kelvin, p)?,
            SigmaModel::Constant(v) => *v,
        };
        Ok(base * self.sigma_mult[t])
    }

    /// All element conductivities for a given element field magnitude and
    /// nodal temperature (interpolated to centroids by vertex averaging).
    pub fn sigma_field(&self, mesh: &Mesh, e_mag: &[f64], temp: &NodalField) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_elements());
        for t in 0..self.n_elements() {
            let tri = mesh.triangles[t];
            let t_c = (temp.values[tri[0]] + temp.values[tri[1]] + temp.values[tri[2]]) / 3.0;
            out.push(self.sigma(t, e_mag[t], t_c)?);
        }
        Ok(out)
    }

    /// Build an assignment directly from a per-element closure over the
    /// element centroid (verification meshes, layered oracles).
    pub fn from_fn<F>(mesh: &Mesh, gas_pressure: f64, f: F) -> Self
    where
        F: Fn([f64; 2]) -> RegionMaterial,
    {
        let nt = mesh.n_triangles();
        let mut eps = Vec::with_capacity(nt);
        let mut sigma_model = Vec::with_capacity(nt);
        let mut lambda = Vec::with_capacity(nt);
        for t in 0..nt {
            let m = f(mesh.centroid(t));
            eps.push(EPS0 * m.eps_r);
            sigma_model.push(m.sigma);
            lambda.push(m.lambda);
        }
        MaterialAssignment {
            eps,
            sigma_model,
            sigma_mult: alloc::vec![1.0; nt],
            lambda,
            gas_pressure,
        }
    }
}

/// Apply the material config and grading profiles to a mesh.
///
/// Spacer elements receive the graded permittivity and conductivity
/// multiplier evaluated at their centroid's normalized radius; gas elements
/// carry the ungraded SF6 (or configured) model. At most one profile per
/// scope is accepted.
pub fn assign_materials(
    mesh: &Mesh,
    config: &MaterialConfig,
    profiles: &[GradingProfile],
) -> Result<MaterialAssignment> {
    config.validate()?;
    let mut eps_profile: Option<&GradingProfile> = None;
    let mut sigma_profile: Option<&GradingProfile> = None;
    for p in profiles {
        p.validate()?;
        let slot = match p.scope {
            ProfileScope::Permittivity => &mut eps_profile,
            ProfileScope::Conductivity => &mut sigma_profile,
        };
        if slot.is_some() {
            return Err(Error::ConfigError("duplicate grading profile scope".into()));
        }
        *slot = Some(p);
    }
    let gap = mesh.r_outer - mesh.r_inner;
    let nt = mesh.n_triangles();
    let mut eps = Vec::with_capacity(nt);
    let mut sigma_model = Vec::with_capacity(nt);
    let mut sigma_mult = Vec::with_capacity(nt);
    let mut lambda = Vec::with_capacity(nt);
    for t in 0..nt {
        match mesh.region[t] {
            Region::Gas => {
                eps.push(EPS0 * config.gas.eps_r);
                sigma_model.push(config.gas.sigma);
                sigma_mult.push(1.0);
                lambda.push(config.gas.lambda);
            }
            Region::Spacer => {
                let u = ((mesh.centroid(t)[0] - mesh.r_inner) / gap).clamp(0.0, 1.0);
                let me = match eps_profile {
                    Some(p) => grading_multiplier(p, u)?,
                    None => 1.0,
                };
                let ms = match sigma_profile {
                    Some(p) => grading_multiplier(p, u)?,
                    None => 1.0,
                };
                eps.push(EPS0 * config.spacer.eps_r * me);
                sigma_model.push(config.spacer.sigma);
                sigma_mult.push(ms);
                lambda.push(config.spacer.lambda);
            }
        }
    }
    Ok(MaterialAssignment { eps, sigma_model, sigma_mult, lambda, gas_pressure: config.gas_pressure })
}

/// Reference (non-published) defaults used by the shipped configurations.
pub mod defaults {
    use super::*;

    /// Epoxy: kappa(300 K, 0) = 1e-16 S/m.
    pub fn epoxy() -> EpoxyConductivityParams {
        EpoxyConductivityParams { kappa0: 3.94e-15, w_a: 0.095, theta: 1e-7 }
    }

    /// SF6: kappa ~ 1e-18 S/m at 1 kV/mm, 0.6 MPa, 300 K with mild field
    /// dependence.
    pub fn sf6() -> Sf6ConductivityParams {
        Sf6ConductivityParams {
            kappa_sf6: 1.5e-19,
            alpha: 0.5,
            beta: 0.5,
            gamma: 1.0,
            e_x: 1.0e6,
            zeta_exp: 0.7,
            rho_shape: 1.0,
            eps_shape: 0.5,
            e_y: 1.0e7,
            t_exp: 0.3,
            zeta_press: 2.0e-7,
            nu: 5.0e-3,
        }
    }

    pub fn material_config() -> MaterialConfig {
        MaterialConfig {
            gas: RegionMaterial { eps_r: 1.002, sigma: SigmaModel::Sf6(sf6()), lambda: 0.014 },
            spacer: RegionMaterial { eps_r: 5.0, sigma: SigmaModel::Epoxy(epoxy()), lambda: 0.6 },
            gas_pressure: 0.6e6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryParams};
    use crate::mesh::{generate_mesh, MeshControls};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn epoxy_constant_when_exponents_vanish() {
        let p = EpoxyConductivityParams { kappa0: 2.5e-16, w_a: 0.0, theta: 0.0 };
        for (t, e) in [(200.0, 0.0), (300.0, 1e6), (400.0, 5e6)] {
            assert_eq!(epoxy_conductivity(t, e, &p).unwrap(), 2.5e-16);
        }
    }

    #[test]
    fn epoxy_matches_scalar_oracle_at_300k() {
        let p = EpoxyConductivityParams { kappa0: 1.0, w_a: 0.095, theta: 0.0 };
        let kappa = epoxy_conductivity(300.0, 0.0, &p).unwrap();
        // Independent scalar evaluation of the Arrhenius exponent.
        let expected = exp(-0.095 / (8.617e-5 * 300.0));
        assert!((kappa - expected).abs() < 1e-18);
        assert!((kappa / 0.02538 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn epoxy_arrhenius_ratio_340_over_300() {
        let p = EpoxyConductivityParams { kappa0: 7.7e-15, w_a: 0.095, theta: 0.0 };
        let ratio = epoxy_conductivity(340.0, 0.0, &p).unwrap() / epoxy_conductivity(300.0, 0.0, &p).unwrap();
        let expected = exp(-(0.095 / K_B_EV) * (1.0 / 340.0 - 1.0 / 300.0));
        assert!((ratio - expected).abs() < 1e-12);
        assert!((ratio / 1.541 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn epoxy_overflow_reports_non_finite() {
        let p = EpoxyConductivityParams { kappa0: 1.0, w_a: 0.0, theta: 1.0 };
        assert!(matches!(
            epoxy_conductivity(300.0, 1e6, &p),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn sf6_constant_when_modulations_off() {
        let p = Sf6ConductivityParams {
            alpha: 1.0,
            beta: 0.0,
            t_exp: 0.0,
            zeta_press: 0.0,
            nu: 0.0,
            ..defaults::sf6()
        };
        for e in [0.0, 1e5, 5e6] {
            let k = sf6_conductivity(e, 0.6e6, 300.0, &p).unwrap();
            assert!((k - p.kappa_sf6).abs() < 1e-30);
        }
    }

    #[test]
    fn sf6_pressure_factor_is_exponential() {
        let p = defaults::sf6();
        let k1 = sf6_conductivity(1e6, 0.6e6, 300.0, &p).unwrap();
        let k2 = sf6_conductivity(1e6, 1.2e6, 300.0, &p).unwrap();
        let expected = exp(p.zeta_press * 0.6e6);
        assert!((k2 / k1 - expected).abs() < 1e-12);
    }

    #[test]
    fn sf6_matches_independent_scalar_evaluation() {
        let p = defaults::sf6();
        let (e, pr, t) = (1.0e6, 0.6e6, 300.0);
        let k = sf6_conductivity(e, pr, t, &p).unwrap();
        // Term-by-term evaluation, written out separately from the
        // implementation path.
        let f1 = p.alpha + p.beta * pow(p.gamma + e / p.e_x, p.zeta_exp);
        let f2 = 1.0 / pow(p.rho_shape + p.eps_shape * e / p.e_y, p.t_exp);
        let f3 = exp(p.zeta_press * pr);
        let f4 = exp(p.nu * t);
        let expected = p.kappa_sf6 * f1 * f2 * f3 * f4;
        assert!((k - expected).abs() / expected < 1e-12);
        // Operating-point magnitude sanity for the shipped defaults.
        assert!(k > 1e-19 && k < 1e-17);
    }

    #[test]
    fn sf6_rejects_invalid_bases() {
        let p = Sf6ConductivityParams { rho_shape: -1.0, eps_shape: 0.0, ..defaults::sf6() };
        assert!(matches!(
            sf6_conductivity(1e6, 0.6e6, 300.0, &p),
            Err(Error::DomainError(_))
        ));
        let p2 = Sf6ConductivityParams { gamma: -5.0, ..defaults::sf6() };
        assert!(matches!(
            sf6_conductivity(1e5, 0.6e6, 300.0, &p2),
            Err(Error::DomainError(_))
        ));
    }

    fn saddle(min: f64, max: f64) -> GradingProfile {
        GradingProfile {
            kind: ProfileKind::Saddle,
            scope: ProfileScope::Conductivity,
            min_multiplier: min,
            max_multiplier: max,
        }
    }

    #[test]
    fn saddle_profile_vertex_and_endpoints() {
        let p = saddle(1.0, 4.0);
        assert_eq!(grading_multiplier(&p, 0.5).unwrap(), 1.0);
        assert_eq!(grading_multiplier(&p, 0.0).unwrap(), 4.0);
        assert_eq!(grading_multiplier(&p, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn piecewise_interpolates_linearly() {
        let p = GradingProfile {
            kind: ProfileKind::Piecewise(vec![(0.0, 3.0), (0.5, 1.0), (1.0, 3.0)]),
            scope: ProfileScope::Permittivity,
            min_multiplier: 1.0,
            max_multiplier: 3.0,
        };
        p.validate().unwrap();
        assert!((grading_multiplier(&p, 0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!((grading_multiplier(&p, 0.75).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_u_is_rejected() {
        let p = saddle(1.0, 2.0);
        assert!(matches!(grading_multiplier(&p, -0.01), Err(Error::OutOfRange { .. })));
        assert!(matches!(grading_multiplier(&p, 1.01), Err(Error::OutOfRange { .. })));
        // Within the 1e-12 slack the value is clamped.
        assert!(grading_multiplier(&p, 1.0 + 1e-13).is_ok());
    }

    fn spacer_mesh() -> Mesh {
        let g = build_geometry(&GeometryParams {
            r_inner: 0.05,
            r_outer: 0.125,
            spacer_axial_center: 0.25,
            spacer_thickness_axial: 0.04,
            cone_angle_deg: 30.0,
            domain_axial_length: 0.5,
        })
        .unwrap();
        generate_mesh(&g, &MeshControls { h_max: 0.012, triple_point_h: 0.005, grading_ratio: 0.5 }).unwrap()
    }

    #[test]
    fn uniform_profiles_give_identical_spacer_elements() {
        let mesh = spacer_mesh();
        let cfg = defaults::material_config();
        let a = assign_materials(&mesh, &cfg, &[]).unwrap();
        for t in 0..mesh.n_triangles() {
            if mesh.region[t] == Region::Spacer {
                assert_eq!(a.eps[t], EPS0 * cfg.spacer.eps_r);
                assert_eq!(a.sigma_mult[t], 1.0);
            } else {
                assert_eq!(a.eps[t], EPS0 * cfg.gas.eps_r);
            }
        }
    }

    #[test]
    fn saddle_sigma_profile_has_minimum_at_mid_gap() {
        let mesh = spacer_mesh();
        let cfg = defaults::material_config();
        let a = assign_materials(&mesh, &cfg, &[saddle(1.0, 4.0)]).unwrap();
        let mid = 0.5 * (mesh.r_inner + mesh.r_outer);
        let mut closest = (f64::MAX, 0usize);
        for t in 0..mesh.n_triangles() {
            if mesh.region[t] == Region::Spacer {
                let d = (mesh.centroid(t)[0] - mid).abs();
                if d < closest.0 {
                    closest = (d, t);
                }
            }
        }
        let min_mult = (0..mesh.n_triangles())
            .filter(|&t| mesh.region[t] == Region::Spacer)
            .map(|t| a.sigma_mult[t])
            .fold(f64::MAX, f64::min);
        assert_eq!(a.sigma_mult[closest.1], min_mult);
    }

    #[test]
    fn multipliers_converge_to_continuous_profile_under_refinement() {
        let g = build_geometry(&GeometryParams {
            r_inner: 0.05,
            r_outer: 0.125,
            spacer_axial_center: 0.25,
            spacer_thickness_axial: 0.04,
            cone_angle_deg: 30.0,
            domain_axial_length: 0.5,
        })
        .unwrap();
        let cfg = defaults::material_config();
        let profile = saddle(1.0, 4.0);
        let mut errs = Vec::new();
        for factor in [1.0, 2.0] {
            let c = MeshControls { h_max: 0.012 / factor, triple_point_h: 0.005 / factor, grading_ratio: 0.5 };
            let mesh = generate_mesh(&g, &c).unwrap();
            let a = assign_materials(&mesh, &cfg, &[core::clone::Clone::clone(&profile)]).unwrap();
            // The assigned multiplier must equal the profile at the centroid
            // exactly; refinement only sharpens the sampling.
            let mut max_err = 0.0_f64;
            for t in 0..mesh.n_triangles() {
                if mesh.region[t] == Region::Spacer {
                    let u = (mesh.centroid(t)[0] - mesh.r_inner) / (mesh.r_outer - mesh.r_inner);
                    let direct = grading_multiplier(&profile, u.clamp(0.0, 1.0)).unwrap();
                    max_err = max_err.max((a.sigma_mult[t] - direct).abs());
                }
            }
            errs.push(max_err);
        }
        assert!(errs.iter().all(|&e| e < 1e-14));
    }

    proptest! {
        #[test]
        fn epoxy_is_monotone_in_t_and_e(
            kappa0 in 1e-18_f64..1e-12,
            w_a in 0.0_f64..0.3,
            theta in 0.0_f64..5e-7,
            t in 250.0_f64..400.0,
            e in 0.0_f64..1e7,
        ) {
            let p = EpoxyConductivityParams { kappa0, w_a, theta };
            let k = epoxy_conductivity(t, e, &p).unwrap();
            let k_t = epoxy_conductivity(t + 10.0, e, &p).unwrap();
            let k_e = epoxy_conductivity(t, e + 1e5, &p).unwrap();
            prop_assert!(k_t >= k);
            prop_assert!(k_e >= k);
        }

        #[test]
        fn sf6_factorizes_in_pressure_and_temperature(
            e in 0.0_f64..1e7,
            p1 in 1e5_f64..1e6,
            p2 in 1e5_f64..1e6,
            t1 in 280.0_f64..350.0,
            t2 in 280.0_f64..350.0,
        ) {
            let p = defaults::sf6();
            let base = sf6_conductivity(e, p1, t1, &p).unwrap();
            let kp = sf6_conductivity(e, p2, t1, &p).unwrap();
            let kt = sf6_conductivity(e, p1, t2, &p).unwrap();
            // Ratios depend only on the changed variable.
            prop_assert!((kp / base - exp(p.zeta_press * (p2 - p1))).abs() < 1e-9);
            prop_assert!((kt / base - exp(p.nu * (t2 - t1))).abs() < 1e-9);
        }

        #[test]
        fn saddle_profile_is_symmetric(u in 0.0_f64..1.0) {
            let p = saddle(1.3, 3.7);
            let a = grading_multiplier(&p, u).unwrap();
            let b = grading_multiplier(&p, 1.0 - u).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn conductivities_finite_over_scenario_envelope(
            e in 0.0_f64..1e7,
            t in 280.0_f64..350.0,
            pr in 1e5_f64..1e6,
        ) {
            let ep = defaults::epoxy();
            let sf = defaults::sf6();
            let k1 = epoxy_conductivity(t, e, &ep).unwrap();
            let k2 = sf6_conductivity(e, pr, t, &sf).unwrap();
            prop_assert!(k1.is_finite() && k1 > 0.0);
            prop_assert!(k2.is_finite() && k2 > 0.0);
        }
    }
}
