//! Energy-time and Landau-Peierls relations and the group-velocity bound.
//!
//! Per axis, `|u_i| Δp_i Δt ≥ ħ`. Squaring and summing gives
//! `u²·(ΔP)² Δt² ≥ 3ħ²`, i.e. `‖u²‖ ‖(ΔP)²‖ Δt² ≥ 3ħ² / cos щ_u`. Combined
//! with the position/momentum relation and `(ΔE)²(Δt)² ≥ δ²ħ²` this gives the
//! order-of-magnitude estimate
//!
//! ```text
//! ‖u²‖ ~ A (ΔE)² / ‖(ΔP)²‖,    A = 3 / (δ² cos щ_u)
//! ```
//!
//! and, through Cauchy-Schwarz, the upper bound `‖u‖ ≤ √(3‖u²‖)`.

use crate::error::{Error, Result};
use crate::hidden_angle::{angle, CHECK_TOLERANCE};
use crate::moments::VarianceVector;
use crate::units::HBar;

/// Default free constant of the energy-time relation.
pub const DEFAULT_DELTA: f64 = 0.5;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfDomain { name, value })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfDomain { name, value })
    }
}

/// Group velocity `(u_x, u_y, u_z)` with `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupVelocity([f64; 3]);

impl GroupVelocity {
    pub fn new(components: [f64; 3]) -> Result<Self> {
        if components.iter().all(|c| c.is_finite()) {
            Ok(GroupVelocity(components))
        } else {
            Err(Error::NonFiniteValue)
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        let [a, b, c] = self.0;
        libm::sqrt(a * a + b * b + c * c)
    }

    /// `u² = (u_x², u_y², u_z²)`.
    pub fn squared(&self) -> VarianceVector {
        VarianceVector::squares_of(self.0).expect("squares of finite values are finite")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTimeParams {
    pub delta: f64,
    /// `(ΔE)²`
    pub var_e: f64,
    /// `(Δt)²`
    pub var_t: f64,
}

impl EnergyTimeParams {
    pub fn new(delta: f64, var_e: f64, var_t: f64) -> Result<Self> {
        Ok(EnergyTimeParams {
            delta: positive("delta", delta)?,
            var_e: nonnegative("var_E", var_e)?,
            var_t: nonnegative("var_t", var_t)?,
        })
    }
}

/// Outcome of one inequality: whether it holds and by how much.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub holds: bool,
    pub slack: f64,
}

/// `(ΔE)²(Δt)² ≥ δ²ħ²`; slack `(ΔE)²(Δt)² − δ²ħ²`.
pub fn energy_time_check(p: &EnergyTimeParams, hbar: HBar) -> Check {
    let lhs = p.var_e * p.var_t;
    let rhs = p.delta * p.delta * hbar.squared();
    Check {
        holds: lhs >= rhs * (1.0 - CHECK_TOLERANCE),
        slack: lhs - rhs,
    }
}

/// `|u_i| Δp_i Δt ≥ ħ` for each axis; slack `|u_i| Δp_i Δt − ħ`.
pub fn lp_per_axis_check(
    u: &GroupVelocity,
    p2: &VarianceVector,
    dt: f64,
    hbar: HBar,
) -> Result<[Check; 3]> {
    let dt = positive("dt", dt)?;
    let h = hbar.get();
    let p = p2.components();
    Ok(core::array::from_fn(|i| {
        let lhs = libm::fabs(u.0[i]) * libm::sqrt(p[i]) * dt;
        Check {
            holds: lhs >= h * (1.0 - CHECK_TOLERANCE),
            slack: lhs - h,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpAggregatedReport {
    pub cos_u_geometric: f64,
    pub cos_u_saturation: f64,
    pub angle_u_geometric: Option<f64>,
    pub angle_u_saturation: Option<f64>,
    pub holds: bool,
    /// `‖u²‖ ‖P2‖ Δt² cos_u_geometric − 3ħ²`.
    pub slack: f64,
}

/// The aggregated relation `‖u²‖ ‖(ΔP)²‖ Δt² ≥ 3ħ² / cos щ_u`.
pub fn lp_aggregated_report(
    u: &GroupVelocity,
    p2: &VarianceVector,
    dt: f64,
    hbar: HBar,
) -> Result<LpAggregatedReport> {
    let dt = positive("dt", dt)?;
    let u2 = u.squared();
    let (nu, np) = (u2.norm(), p2.norm());
    if nu == 0.0 || np == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let cos_geo = (u2.dot(p2) / (nu * np)).min(1.0);
    let lhs = nu * np * dt * dt;
    let rhs = 3.0 * hbar.squared();
    let cos_sat = rhs / lhs;
    Ok(LpAggregatedReport {
        cos_u_geometric: cos_geo,
        cos_u_saturation: cos_sat,
        angle_u_geometric: angle(cos_geo),
        angle_u_saturation: angle(cos_sat),
        holds: lhs * cos_geo >= rhs * (1.0 - CHECK_TOLERANCE),
        slack: lhs * cos_geo - rhs,
    })
}

/// `A = 3 / (δ² cos щ_u)` for `δ > 0`, `0 < cos щ_u ≤ 1`.
pub fn normalization_a(delta: f64, cos_u: f64) -> Result<f64> {
    let delta = positive("delta", delta)?;
    if !(cos_u > 0.0 && cos_u <= 1.0) {
        return Err(Error::OutOfDomain {
            name: "cos_u",
            value: cos_u,
        });
    }
    Ok(3.0 / (delta * delta * cos_u))
}

/// Order-of-magnitude estimate `‖u²‖ ~ A (ΔE)² / ‖(ΔP)²‖`.
pub fn estimate_u2_norm(var_e: f64, p2_norm: f64, a: f64) -> Result<f64> {
    let var_e = nonnegative("var_E", var_e)?;
    let p2_norm = positive("P2_norm", p2_norm)?;
    let a = positive("A", a)?;
    Ok(a * var_e / p2_norm)
}

/// Upper bound `‖u‖ ≤ √(3 A (ΔE)² / ‖(ΔP)²‖)`.
pub fn velocity_bound(var_e: f64, p2_norm: f64, a: f64) -> Result<f64> {
    Ok(libm::sqrt(3.0 * estimate_u2_norm(var_e, p2_norm, a)?))
}

/// The `A` for which [`velocity_bound`] on the reference moments equals
/// `u_ref`: `A = u_ref² ‖(ΔP)²‖ / (3 (ΔE)²)`.
pub fn calibrate_a(var_e_ref: f64, p2_norm_ref: f64, u_ref: f64) -> Result<f64> {
    let var_e = positive("var_E_ref", var_e_ref)?;
    let p2_norm = positive("P2_norm_ref", p2_norm_ref)?;
    let u = positive("u_ref", u_ref)?;
    Ok(u * u * p2_norm / (3.0 * var_e))
}

/// `(‖u‖, √(3‖u²‖))`; the first never exceeds the second.
pub fn cauchy_schwarz_gap(u: &GroupVelocity) -> (f64, f64) {
    (u.norm(), libm::sqrt(3.0 * u.squared().norm()))
}

/// Normalization, estimate and bound for one set of moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityEstimate {
    pub a: f64,
    /// Order-of-magnitude value of `‖u²‖`.
    pub u2_norm: f64,
    /// Upper bound on `‖u‖`, `√(3 u2_norm)`.
    pub u_bound: f64,
    /// `cos щ_u` when `A` was built from parameters.
    pub cos_u: Option<f64>,
    /// `δ` when `A` was built from parameters.
    pub delta: Option<f64>,
}

impl VelocityEstimate {
    pub fn with_a(var_e: f64, p2_norm: f64, a: f64) -> Result<Self> {
        let u2_norm = estimate_u2_norm(var_e, p2_norm, a)?;
        Ok(VelocityEstimate {
            a,
            u2_norm,
            u_bound: libm::sqrt(3.0 * u2_norm),
            cos_u: None,
            delta: None,
        })
    }

    pub fn from_parameters(var_e: f64, p2_norm: f64, delta: f64, cos_u: f64) -> Result<Self> {
        let a = normalization_a(delta, cos_u)?;
        Ok(VelocityEstimate {
            cos_u: Some(cos_u),
            delta: Some(delta),
            ..Self::with_a(var_e, p2_norm, a)?
        })
    }
}
