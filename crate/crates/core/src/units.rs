use crate::error::{Error, Result};

/// Reduced Planck constant in the caller's unit system. Natural units
/// (`hbar = 1`) are the default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HBar(f64);

impl HBar {
    pub const NATURAL: HBar = HBar(1.0);

    pub fn new(hbar: f64) -> Result<Self> {
        if hbar.is_finite() && hbar > 0.0 {
            Ok(HBar(hbar))
        } else {
            Err(Error::NonPositiveParameter {
                name: "hbar",
                value: hbar,
            })
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn squared(self) -> f64 {
        self.0 * self.0
    }
}

impl Default for HBar {
    fn default() -> Self {
        HBar::NATURAL
    }
}
