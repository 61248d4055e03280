//! Hermite functions by the orthonormal three-term recurrence.
//!
//! The normalized oscillator eigenfunction is
//! `φₙ(ξ) = (2ⁿ n! √π)^(-1/2) Hₙ(ξ) e^(-ξ²/2)`. Running the recurrence on
//! the normalized functions never forms `n!` or `2ⁿ`, and the polynomial
//! part is carried as a mantissa plus a natural-log scale so that the
//! result neither overflows for large `n` nor underflows before the
//! Gaussian factor is applied.

const RESCALE_ABOVE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_107; // ln(1e150)

/// `π^(-1/4)`
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Polynomial parts `pₖ(ξ) = φₖ(ξ) e^(ξ²/2)` for `k = n-1, n, n+1`, sharing
/// one scale: the true value of each field is `field * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteTriple {
    pub prev: f64,
    pub curr: f64,
    pub next: f64,
    pub log_scale: f64,
}

impl HermiteTriple {
    /// `p'ₙ`-like combination giving `φₙ'(ξ) e^(ξ²/2)`, in the same scale:
    /// `φₙ' = √(n/2) φₙ₋₁ − √((n+1)/2) φₙ₊₁`.
    pub fn derivative(&self, n: u32) -> f64 {
        let n = n as f64;
        libm::sqrt(n / 2.0) * self.prev - libm::sqrt((n + 1.0) / 2.0) * self.next
    }
}

/// Scaled polynomial parts of `φₙ₋₁`, `φₙ`, `φₙ₊₁` at `xi`. `prev` is 0 for `n = 0`.
pub fn reduced_triple(n: u32, xi: f64) -> HermiteTriple {
    let mut log_scale = 0.0;
    let mut prev = 0.0; // p_{-1}
    let mut curr = PI_POW_NEG_QUARTER; // p_0
    let mut out_prev = 0.0;
    let mut out_curr = 0.0;
    for k in 0..=n + 1 {
        if k == n {
            out_prev = prev;
            out_curr = curr;
        }
        if k == n + 1 {
            return HermiteTriple {
                prev: out_prev,
                curr: out_curr,
                next: curr,
                log_scale,
            };
        }
        let kf = k as f64;
        let next = libm::sqrt(2.0 / (kf + 1.0)) * xi * curr - libm::sqrt(kf / (kf + 1.0)) * prev;
        prev = curr;
        curr = next;
        if libm::fabs(curr) > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            curr /= RESCALE_ABOVE;
            if k + 1 > n {
                // `out_*` were captured at the old scale.
                out_prev /= RESCALE_ABOVE;
                out_curr /= RESCALE_ABOVE;
            }
            log_scale += LN_RESCALE;
        }
    }
    unreachable!()
}

/// Normalized Hermite function `φₙ(ξ)`.
pub fn hermite_function(n: u32, xi: f64) -> f64 {
    let t = reduced_triple(n, xi);
    t.curr * libm::exp(t.log_scale - 0.5 * xi * xi)
}

/// Derivative `φₙ'(ξ)`.
pub fn hermite_function_derivative(n: u32, xi: f64) -> f64 {
    let t = reduced_triple(n, xi);
    t.derivative(n) * libm::exp(t.log_scale - 0.5 * xi * xi)
}
