//! Parametric cross-section of the coaxial line with an optional cone-type
//! spacer.
//!
//! The model is the (r, z) half-plane section of a coaxial annulus
//! `r_inner <= r <= r_outer`, `0 <= z <= domain_axial_length`. The spacer is
//! a straight-sided frustum: at radius r it occupies the axial interval
//! `[z_lower(r), z_lower(r) + thickness]` with
//! `z_lower(r) = z_lower(r_inner) + (r - r_inner) * tan(cone_angle)`, i.e.
//! both gas-spacer interfaces are parallel straight lines inclined by the
//! cone angle against the radial direction.

use crate::error::Error;
use crate::Result;
use alloc::format;
use libm::tan;

/// Maximum admissible cone angle in degrees. At 90 deg the frustum
/// degenerates into an axial sheet; the admissible range is capped at 89.
pub const MAX_CONE_ANGLE_DEG: f64 = 89.0;

/// User-facing geometry parameters (all lengths in metres, angle in degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    /// Conductor outer radius.
    pub r_inner: f64,
    /// Enclosure inner radius.
    pub r_outer: f64,
    /// Axial centre of the spacer at the inner radius.
    pub spacer_axial_center: f64,
    /// Axial thickness of the spacer (constant over radius).
    pub spacer_thickness_axial: f64,
    /// Inclination of the gas-spacer interfaces against the radial direction.
    pub cone_angle_deg: f64,
    /// Total axial extent of the modelled domain.
    pub domain_axial_length: f64,
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.r_inner > 0.0 && p.r_outer > 0.0 && p.spacer_thickness_axial > 0.0
            && p.domain_axial_length > 0.0)
        {
            return Err(Error::InvalidGeometry(format!(
                "all lengths must be strictly positive (r_inner={}, r_outer={}, t={}, L={})",
                p.r_inner, p.r_outer, p.spacer_thickness_axial, p.domain_axial_length
            )));
        }
        if p.r_inner >= p.r_outer {
            return Err(Error::InvalidGeometry(format!(
                "r_inner ({}) must be < r_outer ({})",
                p.r_inner, p.r_outer
            )));
        }
        if !(p.cone_angle_deg > 0.0 && p.cone_angle_deg <= MAX_CONE_ANGLE_DEG) {
            return Err(Error::InvalidGeometry(format!(
                "cone angle {} deg outside (0, {}]",
                p.cone_angle_deg, MAX_CONE_ANGLE_DEG
            )));
        }
        Ok(())
    }
}

/// Gas-spacer interface description: the frustum in interface-line form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacerFrustum {
    /// z of the lower interface at r = r_inner.
    pub z_lower_at_inner: f64,
    /// Axial thickness (distance between the two parallel interfaces).
    pub thickness: f64,
    /// tan(cone_angle): slope dz/dr of both interfaces.
    pub slope: f64,
}

impl SpacerFrustum {
    /// z of the lower gas-spacer interface at radius r.
    pub fn z_lower(&self, r: f64, r_inner: f64) -> f64 {
        self.z_lower_at_inner + (r - r_inner) * self.slope
    }

    /// z of the upper gas-spacer interface at radius r.
    pub fn z_upper(&self, r: f64, r_inner: f64) -> f64 {
        self.z_lower(r, r_inner) + self.thickness
    }
}

/// Validated region decomposition: the gas annulus minus the spacer frustum,
/// and the frustum itself. Deterministic in the input parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryDescription {
    pub r_inner: f64,
    pub r_outer: f64,
    pub axial_length: f64,
    pub spacer: Option<SpacerFrustum>,
}

impl GeometryDescription {
    /// Pure annulus without a spacer (verification geometries).
    pub fn annulus(r_inner: f64, r_outer: f64, axial_length: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer && axial_length > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "annulus needs 0 < r_inner < r_outer and L > 0 (got {r_inner}, {r_outer}, {axial_length})"
            )));
        }
        Ok(GeometryDescription { r_inner, r_outer, axial_length, spacer: None })
    }

    /// Closed-form coordinates of the conductor-side triple point
    /// (conductor / gas / spacer junction on the lower interface).
    pub fn triple_point_a(&self) -> Option<(f64, f64)> {
        self.spacer.map(|s| (self.r_inner, s.z_lower(self.r_inner, self.r_inner)))
    }

    /// Closed-form coordinates of the enclosure-side triple point
    /// (enclosure / gas / spacer junction on the lower interface).
    pub fn triple_point_b(&self) -> Option<(f64, f64)> {
        self.spacer.map(|s| (self.r_outer, s.z_lower(self.r_outer, self.r_inner)))
    }

    /// Analytic in-plane area of the spacer region (thickness x radial gap;
    /// the shear does not change the area).
    pub fn spacer_area(&self) -> f64 {
        match self.spacer {
            Some(s) => s.thickness * (self.r_outer - self.r_inner),
            None => 0.0,
        }
    }

    /// Analytic in-plane area of the gas region.
    pub fn gas_area(&self) -> f64 {
        (self.r_outer - self.r_inner) * self.axial_length - self.spacer_area()
    }
}

/// Build the region decomposition from user parameters.
///
/// Fails with `InvalidGeometry` when the frustum does not fit strictly inside
/// the axial domain at every radius (the spacer must span the full gap
/// r_inner..r_outer without leaving the model).
pub fn build_geometry(params: &GeometryParams) -> Result<GeometryDescription> {
    params.validate()?;
    let slope = tan(params.cone_angle_deg.to_radians());
    let z_lower_at_inner = params.spacer_axial_center - 0.5 * params.spacer_thickness_axial;
    let frustum = SpacerFrustum {
        z_lower_at_inner,
        thickness: params.spacer_thickness_axial,
        slope,
    };
    // The lowest interface point is at r_inner, the highest at r_outer.
    let z_min = frustum.z_lower(params.r_inner, params.r_inner);
    let z_max = frustum.z_upper(params.r_outer, params.r_inner);
    if !(z_min > 0.0 && z_max < params.domain_axial_length) {
        return Err(Error::InvalidGeometry(format!(
            "spacer [{z_min}, {z_max}] not strictly inside axial domain [0, {}]",
            params.domain_axial_length
        )));
    }
    Ok(GeometryDescription {
        r_inner: params.r_inner,
        r_outer: params.r_outer,
        axial_length: params.domain_axial_length,
        spacer: Some(frustum),
    })
}
