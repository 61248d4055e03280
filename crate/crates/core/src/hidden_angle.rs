//! The aggregated position/momentum relation and its angular variable.
//!
//! Summing the per-axis relations `(Δp_i)²(Δx_i)² ≥ ħ²/4` gives the scalar
//! product `(ΔP)²·(ΔR)² ≥ 3ħ²/4`. Writing the product through the angle `щ`
//! between the vectors yields
//!
//! ```text
//! ‖(ΔP)²‖ ‖(ΔR)²‖ ≥ 3ħ² / (4 cos щ)
//! ```
//!
//! Two readings of `cos щ` are reported side by side:
//!
//! * geometric: the literal dot-product angle `dot / (‖P2‖ ‖R2‖)`;
//! * saturation: the value that turns the relation into an equality,
//!   `3ħ² / (4 ‖P2‖ ‖R2‖)`.
//!
//! For an isotropic oscillator level `(n, n, n)` the saturation cosine is
//! `1/(2n+1)²` and for the isotropic box level it is `3/(n²π²−6)`, while the
//! geometric cosine of every oscillator state is exactly 1.

use crate::axis_states::SeparableState3D;
use crate::error::{Error, Result};
use crate::moments::{variance_vectors, QuadratureConfig, VarianceVector};
use crate::units::HBar;
use core::f64::consts::PI;

/// Relative slack granted to every inequality check.
pub const CHECK_TOLERANCE: f64 = 1e-10;
/// Floating drift above 1 that [`cos_geometric`] still clamps.
pub const COSINE_CLAMP: f64 = 1e-12;

pub fn dot(v: &VarianceVector, w: &VarianceVector) -> f64 {
    v.dot(w)
}

pub fn norm(v: &VarianceVector) -> f64 {
    v.norm()
}

fn norms(p2: &VarianceVector, r2: &VarianceVector) -> Result<(f64, f64)> {
    let (np, nr) = (p2.norm(), r2.norm());
    if np == 0.0 || nr == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok((np, nr))
}

/// Cosine of the angle between two nonnegative vectors.
pub fn cos_geometric(p2: &VarianceVector, r2: &VarianceVector) -> Result<f64> {
    let (np, nr) = norms(p2, r2)?;
    let c = p2.dot(r2) / (np * nr);
    if c > 1.0 && c <= 1.0 + COSINE_CLAMP {
        Ok(1.0)
    } else {
        Ok(c)
    }
}

/// `3ħ² / (4 ‖P2‖ ‖R2‖)`. Not clamped: a value above 1 means the per-axis
/// relations cannot all hold.
pub fn cos_saturation(p2: &VarianceVector, r2: &VarianceVector, hbar: HBar) -> Result<f64> {
    let (np, nr) = norms(p2, r2)?;
    Ok(3.0 * hbar.squared() / (4.0 * np * nr))
}

/// `1/(2n+1)²`, the saturation cosine of the isotropic oscillator level.
pub fn ho_cos_closed(n: u32) -> f64 {
    let k = 2.0 * n as f64 + 1.0;
    1.0 / (k * k)
}

/// `3/(n²π²−6)`, the saturation cosine of the isotropic box level.
pub fn box_cos_closed(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidQuantumNumber {
            family: "infinite well",
            n,
        });
    }
    let k = n as f64 * PI;
    Ok(3.0 / (k * k - 6.0))
}

/// Angle in radians for a cosine in `[−1, 1]` (drift up to
/// [`CHECK_TOLERANCE`] past the ends is clamped), `None` otherwise.
pub fn angle(cos: f64) -> Option<f64> {
    let edge = 1.0 + CHECK_TOLERANCE;
    (-edge..=edge)
        .contains(&cos)
        .then(|| libm::acos(cos.clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub hbar: f64,
    pub position_variances: VarianceVector,
    pub momentum_variances: VarianceVector,
    /// `(Δp_i)²(Δx_i)²` for `i = x, y, z`.
    pub per_axis_products: [f64; 3],
    pub dot_product: f64,
    pub norm_p2: f64,
    pub norm_r2: f64,
    pub cos_geometric: f64,
    pub cos_saturation: f64,
    /// Set when `cos_saturation` exceeds 1 by more than [`CHECK_TOLERANCE`].
    pub saturation_exceeds_unity: bool,
    pub angle_geometric: Option<f64>,
    pub angle_saturation: Option<f64>,
    pub per_axis_holds: [bool; 3],
    pub aggregated_holds: bool,
    /// `‖P2‖‖R2‖ − 3ħ²/(4 cos_geometric)`.
    pub slack: f64,
}

impl UncertaintyReport {
    /// Builds the report from already computed vectors.
    pub fn from_vectors(r2: VarianceVector, p2: VarianceVector, hbar: HBar) -> Result<Self> {
        let (np, nr) = norms(&p2, &r2)?;
        let h2 = hbar.squared();
        let per_axis_products = p2.hadamard(&r2);
        let per_axis_bound = 0.25 * h2 * (1.0 - CHECK_TOLERANCE);
        let per_axis_holds = per_axis_products.map(|p| p >= per_axis_bound);
        let dot_product = per_axis_products.iter().sum::<f64>();
        let cos_geo = cos_geometric(&p2, &r2)?;
        let cos_sat = cos_saturation(&p2, &r2, hbar)?;
        let aggregated_holds = np * nr * cos_geo >= 0.75 * h2 * (1.0 - CHECK_TOLERANCE);
        Ok(UncertaintyReport {
            hbar: hbar.get(),
            position_variances: r2,
            momentum_variances: p2,
            per_axis_products,
            dot_product,
            norm_p2: np,
            norm_r2: nr,
            cos_geometric: cos_geo,
            cos_saturation: cos_sat,
            saturation_exceeds_unity: cos_sat > 1.0 + CHECK_TOLERANCE,
            angle_geometric: angle(cos_geo),
            angle_saturation: angle(cos_sat),
            per_axis_holds,
            aggregated_holds,
            slack: np * nr - 0.75 * h2 / cos_geo,
        })
    }

    /// `‖P2‖‖R2‖ − 3ħ²/(4 cos_saturation)`, zero up to rounding by construction.
    pub fn saturation_slack(&self) -> f64 {
        self.norm_p2 * self.norm_r2 - 0.75 * self.hbar * self.hbar / self.cos_saturation
    }
}

/// Variance vectors of `state` and every quantity of the aggregated relation.
pub fn hur_report(
    state: &SeparableState3D,
    cfg: &QuadratureConfig,
    hbar: HBar,
) -> Result<UncertaintyReport> {
    if state.hbar() != hbar {
        return Err(Error::HbarMismatch {
            state: state.hbar().get(),
            context: hbar.get(),
        });
    }
    let (r2, p2) = variance_vectors(state, cfg)?;
    UncertaintyReport::from_vectors(r2, p2, hbar)
}
