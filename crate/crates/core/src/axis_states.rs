//! Normalized one-dimensional bound states, one per Cartesian axis.
//!
//! Analytic families are normalized by formula. Tabulated states are
//! renormalized at construction with the trapezoid rule on their own grid and
//! interpolated with a natural cubic spline.
//!
//! Momentum variances use `⟨p²⟩ = ħ² ∫ |ψ'|² dx`. Every state here is real,
//! so `⟨p⟩ = 0` and this is the central second moment.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Axis, Error, Result};
use crate::hermite;
use crate::quadrature::trapezoid;
use crate::units::HBar;

/// Minimum number of samples in a tabulated state.
pub const MIN_TABLE_POINTS: usize = 16;
/// Tabulated amplitudes must fall below this at both grid ends.
pub const TABLE_EDGE_AMPLITUDE: f64 = 1e-6;
const MIN_TABLE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    HarmonicOscillator,
    InfiniteWell,
    GaussianPacket,
    Tabulated,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::HarmonicOscillator => "harmonic oscillator",
            Family::InfiniteWell => "infinite well",
            Family::GaussianPacket => "gaussian packet",
            Family::Tabulated => "tabulated",
        }
    }
}

/// Construction parameters for an [`AxisState`].
#[derive(Debug, Clone, PartialEq)]
pub enum AxisParams {
    HarmonicOscillator {
        n: u32,
        mass: f64,
        omega: f64,
    },
    /// Well occupying `[0, width]`.
    InfiniteWell {
        n: u32,
        width: f64,
    },
    GaussianPacket {
        sigma: f64,
    },
    /// Samples of a real amplitude on a strictly increasing grid.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Position and momentum variances of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisVariances {
    pub position: f64,
    pub momentum: f64,
}

impl AxisVariances {
    pub fn product(&self) -> f64 {
        self.position * self.momentum
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Oscillator {
        n: u32,
        mass: f64,
        omega: f64,
        length: f64,
    },
    Well {
        n: u32,
        width: f64,
    },
    Gaussian {
        sigma: f64,
    },
    Table(Table),
}

/// A validated, normalized 1D bound state. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisState {
    kind: Kind,
    hbar: HBar,
}

/// Validates parameters and builds an [`AxisState`].
pub fn make_axis_state(params: AxisParams, hbar: HBar) -> Result<AxisState> {
    AxisState::new(params, hbar)
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

impl AxisState {
    pub fn new(params: AxisParams, hbar: HBar) -> Result<Self> {
        let kind = match params {
            AxisParams::HarmonicOscillator { n, mass, omega } => {
                let mass = positive("mass", mass)?;
                let omega = positive("omega", omega)?;
                let length = libm::sqrt(hbar.get() / (mass * omega));
                Kind::Oscillator {
                    n,
                    mass,
                    omega,
                    length,
                }
            }
            AxisParams::InfiniteWell { n, width } => {
                if n == 0 {
                    return Err(Error::InvalidQuantumNumber {
                        family: Family::InfiniteWell.name(),
                        n,
                    });
                }
                Kind::Well {
                    n,
                    width: positive("width", width)?,
                }
            }
            AxisParams::GaussianPacket { sigma } => Kind::Gaussian {
                sigma: positive("sigma", sigma)?,
            },
            AxisParams::Tabulated { grid, values } => Kind::Table(Table::new(grid, values)?),
        };
        Ok(AxisState { kind, hbar })
    }

    pub fn oscillator(n: u32, mass: f64, omega: f64, hbar: HBar) -> Result<Self> {
        Self::new(AxisParams::HarmonicOscillator { n, mass, omega }, hbar)
    }

    pub fn well(n: u32, width: f64, hbar: HBar) -> Result<Self> {
        Self::new(AxisParams::InfiniteWell { n, width }, hbar)
    }

    pub fn gaussian(sigma: f64, hbar: HBar) -> Result<Self> {
        Self::new(AxisParams::GaussianPacket { sigma }, hbar)
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>, hbar: HBar) -> Result<Self> {
        Self::new(AxisParams::Tabulated { grid, values }, hbar)
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Oscillator { .. } => Family::HarmonicOscillator,
            Kind::Well { .. } => Family::InfiniteWell,
            Kind::Gaussian { .. } => Family::GaussianPacket,
            Kind::Table(_) => Family::Tabulated,
        }
    }

    pub fn hbar(&self) -> HBar {
        self.hbar
    }

    /// Quantum number for the oscillator and well families.
    pub fn quantum_number(&self) -> Option<u32> {
        match self.kind {
            Kind::Oscillator { n, .. } | Kind::Well { n, .. } => Some(n),
            _ => None,
        }
    }

    /// Oscillator length `√(ħ/(mω))`.
    pub(crate) fn oscillator_length(&self) -> Option<f64> {
        match self.kind {
            Kind::Oscillator { length, .. } => Some(length),
            _ => None,
        }
    }

    pub(crate) fn sigma(&self) -> Option<f64> {
        match self.kind {
            Kind::Gaussian { sigma } => Some(sigma),
            _ => None,
        }
    }

    pub(crate) fn table(&self) -> Option<&Table> {
        match &self.kind {
            Kind::Table(t) => Some(t),
            _ => None,
        }
    }

    /// Interval carrying all but a negligible part of `|ψ|²`: exact for the
    /// well and tabulated states, a truncation window otherwise.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Oscillator { n, length, .. } => {
                let half = length * (libm::sqrt(2.0 * *n as f64 + 1.0) + 9.0);
                (-half, half)
            }
            Kind::Well { width, .. } => (0.0, *width),
            Kind::Gaussian { sigma } => (-13.0 * sigma, 13.0 * sigma),
            Kind::Table(t) => (t.grid[0], t.grid[t.grid.len() - 1]),
        }
    }

    /// Amplitude `ψ(x)`. Zero outside a well or a tabulated grid.
    pub fn eval_psi(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Oscillator { n, length, .. } => {
                hermite::hermite_function(*n, x / length) / libm::sqrt(*length)
            }
            Kind::Well { n, width } => {
                if !(0.0..=*width).contains(&x) {
                    return 0.0;
                }
                libm::sqrt(2.0 / width) * libm::sin(*n as f64 * PI * x / width)
            }
            Kind::Gaussian { sigma } => {
                libm::pow(2.0 * PI * sigma * sigma, -0.25)
                    * libm::exp(-x * x / (4.0 * sigma * sigma))
            }
            Kind::Table(t) => t.eval(x),
        }
    }

    /// Derivative `ψ'(x)`, analytic for every family except tabulated,
    /// where the spline derivative is returned.
    pub fn eval_psi_derivative(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Oscillator { n, length, .. } => {
                hermite::hermite_function_derivative(*n, x / length)
                    / (length * libm::sqrt(*length))
            }
            Kind::Well { n, width } => {
                if !(0.0..=*width).contains(&x) {
                    return 0.0;
                }
                let k = *n as f64 * PI / width;
                libm::sqrt(2.0 / width) * k * libm::cos(k * x)
            }
            Kind::Gaussian { sigma } => -x / (2.0 * sigma * sigma) * self.eval_psi(x),
            Kind::Table(t) => t.eval_derivative(x),
        }
    }

    /// Exact position and momentum variances.
    ///
    /// * oscillator: `(n+½)ħ/(mω)` and `(n+½)ħmω`
    /// * well: `L²(n²π²−6)/(12n²π²)` (about the centre `L/2`) and `ħ²n²π²/L²`
    /// * Gaussian packet: `σ²` and `ħ²/(4σ²)`
    pub fn closed_form_variances(&self) -> Result<AxisVariances> {
        let hbar = self.hbar.get();
        match &self.kind {
            Kind::Oscillator { n, mass, omega, .. } => {
                let level = *n as f64 + 0.5;
                Ok(AxisVariances {
                    position: level * hbar / (mass * omega),
                    momentum: level * hbar * mass * omega,
                })
            }
            Kind::Well { n, width } => {
                let k2 = libm::pow(*n as f64 * PI, 2.0);
                Ok(AxisVariances {
                    position: width * width * (k2 - 6.0) / (12.0 * k2),
                    momentum: hbar * hbar * k2 / (width * width),
                })
            }
            Kind::Gaussian { sigma } => Ok(AxisVariances {
                position: sigma * sigma,
                momentum: hbar * hbar / (4.0 * sigma * sigma),
            }),
            Kind::Table(_) => Err(Error::NoClosedForm),
        }
    }
}

/// Free-function form of [`AxisState::eval_psi`].
pub fn eval_psi(state: &AxisState, x: f64) -> f64 {
    state.eval_psi(x)
}

/// Free-function form of [`AxisState::closed_form_variances`].
pub fn closed_form_variances(state: &AxisState) -> Result<AxisVariances> {
    state.closed_form_variances()
}

/// Sampled wavefunction with a natural cubic spline through the samples.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Table {
    pub(crate) grid: Vec<f64>,
    pub(crate) values: Vec<f64>,
    second: Vec<f64>,
}

impl Table {
    fn new(grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidTable("grid and values differ in length"));
        }
        if grid.len() < MIN_TABLE_POINTS {
            return Err(Error::InvalidTable("fewer than 16 grid points"));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("non-finite grid point"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("grid is not strictly increasing"));
        }
        let density: Vec<f64> = values.iter().map(|v| v * v).collect();
        let norm = trapezoid(&grid, &density);
        if values.iter().any(|v| !v.is_finite()) || !norm.is_finite() || norm < MIN_TABLE_NORM {
            return Err(Error::UnnormalizableTable { norm });
        }
        let scale = 1.0 / libm::sqrt(norm);
        values.iter_mut().for_each(|v| *v *= scale);
        let last = values.len() - 1;
        if libm::fabs(values[0]) >= TABLE_EDGE_AMPLITUDE
            || libm::fabs(values[last]) >= TABLE_EDGE_AMPLITUDE
        {
            return Err(Error::InvalidTable(
                "amplitude does not decay below 1e-6 at the grid ends",
            ));
        }
        let second = natural_spline_second_derivatives(&grid, &values);
        Ok(Table {
            grid,
            values,
            second,
        })
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let last = self.grid.len() - 1;
        if !(self.grid[0]..=self.grid[last]).contains(&x) {
            return None;
        }
        let i = self.grid.partition_point(|g| *g <= x);
        Some(i.clamp(1, last) - 1)
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let Some(i) = self.locate(x) else { return 0.0 };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        let Some(i) = self.locate(x) else { return 0.0 };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (self.values[i + 1] - self.values[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.second[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.second[i + 1]
    }
}

// Thomas algorithm on the natural-spline system.
fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = alloc::vec![0.0; n];
    let mut u = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * m[i - 1] + 2.0;
        m[i] = (sig - 1.0) / p;
        let slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * slope / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    m[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        m[k] = m[k] * m[k + 1] + u[k];
    }
    m
}

/// Product of three axis states, `ψ(x)ψ(y)ψ(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableState3D {
    axes: [AxisState; 3],
}

impl SeparableState3D {
    /// All three axes must share one value of ħ.
    pub fn new(x: AxisState, y: AxisState, z: AxisState) -> Result<Self> {
        let h = x.hbar();
        for s in [&y, &z] {
            if s.hbar() != h {
                return Err(Error::HbarMismatch {
                    state: s.hbar().get(),
                    context: h.get(),
                });
            }
        }
        Ok(SeparableState3D { axes: [x, y, z] })
    }

    /// Builds one axis per parameter set, annotating failures with the axis.
    pub fn from_params(params: [AxisParams; 3], hbar: HBar) -> Result<Self> {
        let [px, py, pz] = params;
        let x = AxisState::new(px, hbar).map_err(|e| e.on_axis(Axis::X))?;
        let y = AxisState::new(py, hbar).map_err(|e| e.on_axis(Axis::Y))?;
        let z = AxisState::new(pz, hbar).map_err(|e| e.on_axis(Axis::Z))?;
        Ok(SeparableState3D { axes: [x, y, z] })
    }

    /// The same state on every axis, e.g. the `(n, n, n)` oscillator level.
    pub fn isotropic(axis: AxisState) -> Self {
        SeparableState3D {
            axes: [axis.clone(), axis.clone(), axis],
        }
    }

    pub fn axes(&self) -> &[AxisState; 3] {
        &self.axes
    }

    pub fn axis(&self, axis: Axis) -> &AxisState {
        &self.axes[axis as usize]
    }

    pub fn hbar(&self) -> HBar {
        self.axes[0].hbar()
    }

    /// Reorders axes: output axis `i` is input axis `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        SeparableState3D {
            axes: perm.map(|i| self.axes[i].clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const H: HBar = HBar::NATURAL;

    fn sampled_gaussian(points: usize, sigma: f64, half_width: f64) -> (Vec<f64>, Vec<f64>) {
        let grid: Vec<f64> = (0..points)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
            .collect();
        // deliberately unnormalized
        let values = grid
            .iter()
            .map(|x| 3.0 * libm::exp(-x * x / (4.0 * sigma * sigma)))
            .collect();
        (grid, values)
    }

    #[test]
    fn oscillator_ground_state_is_valid() {
        let s = AxisState::oscillator(0, 1.0, 1.0, H).unwrap();
        assert_eq!(s.family(), Family::HarmonicOscillator);
        assert_eq!(s.quantum_number(), Some(0));
    }

    #[test]
    fn well_level_zero_rejected() {
        let err = AxisState::well(0, 1.0, H).unwrap_err();
        assert!(matches!(err, Error::InvalidQuantumNumber { n: 0, .. }));
    }

    #[test]
    fn non_positive_parameters_rejected() {
        assert!(matches!(
            AxisState::oscillator(1, 0.0, 1.0, H),
            Err(Error::NonPositiveParameter { name: "mass", .. })
        ));
        assert!(matches!(
            AxisState::oscillator(1, 1.0, -2.0, H),
            Err(Error::NonPositiveParameter { name: "omega", .. })
        ));
        assert!(matches!(
            AxisState::well(1, f64::NAN, H),
            Err(Error::NonPositiveParameter { .. })
        ));
        assert!(matches!(
            AxisState::gaussian(0.0, H),
            Err(Error::NonPositiveParameter { .. })
        ));
    }

    #[test]
    fn tabulated_gaussian_renormalized() {
        let (grid, values) = sampled_gaussian(64, 1.0, 8.0);
        let s = AxisState::tabulated(grid.clone(), values, H).unwrap();
        // trapezoid oracle, computed independently of the stored table
        let dens: Vec<f64> = grid
            .iter()
            .map(|x| libm::pow(s.eval_psi(*x), 2.0))
            .collect();
        let h = grid[1] - grid[0];
        let norm = h * (dens.iter().sum::<f64>() - 0.5 * (dens[0] + dens[63]));
        assert!(libm::fabs(norm - 1.0) < 1e-8, "norm {norm}");
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        let (grid, values) = sampled_gaussian(10, 1.0, 8.0);
        assert!(matches!(
            AxisState::tabulated(grid, values, H),
            Err(Error::InvalidTable(_))
        ));

        let (mut grid, values) = sampled_gaussian(32, 1.0, 8.0);
        grid.swap(3, 4);
        assert!(matches!(
            AxisState::tabulated(grid, values, H),
            Err(Error::InvalidTable(_))
        ));

        let (grid, _) = sampled_gaussian(32, 1.0, 8.0);
        assert!(matches!(
            AxisState::tabulated(grid.clone(), alloc::vec![0.0; 32], H),
            Err(Error::UnnormalizableTable { .. })
        ));
        let mut vals = alloc::vec![1e-3; 32];
        vals[5] = f64::INFINITY;
        assert!(matches!(
            AxisState::tabulated(grid, vals, H),
            Err(Error::UnnormalizableTable { .. })
        ));

        // truncated too early: amplitude still large at the ends
        let (grid, values) = sampled_gaussian(32, 1.0, 2.0);
        assert!(matches!(
            AxisState::tabulated(grid, values, H),
            Err(Error::InvalidTable(_))
        ));
    }

    #[test]
    fn eval_psi_reference_values() {
        let ho = AxisState::oscillator(0, 1.0, 1.0, H).unwrap();
        assert_relative_eq!(ho.eval_psi(0.0), libm::pow(PI, -0.25), max_relative = 1e-15);
        assert_relative_eq!(ho.eval_psi(0.0), 0.7511255444649425, max_relative = 1e-15);

        let well = AxisState::well(1, 1.0, H).unwrap();
        assert_relative_eq!(
            well.eval_psi(0.5),
            core::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
        assert_eq!(well.eval_psi(-0.3), 0.0);
        assert_eq!(well.eval_psi(1.3), 0.0);
    }

    #[test]
    fn oscillator_scaling_with_mass_and_frequency() {
        // ψ(x) = (mω/πħ)^{1/4} exp(-mωx²/2ħ) for the ground state
        let hbar = HBar::new(0.7).unwrap();
        let s = AxisState::oscillator(0, 2.0, 3.0, hbar).unwrap();
        let a = 2.0 * 3.0 / 0.7;
        for &x in &[0.0, 0.2, -0.5] {
            let want = libm::pow(a / PI, 0.25) * libm::exp(-a * x * x / 2.0);
            assert_relative_eq!(s.eval_psi(x), want, max_relative = 1e-14);
        }
    }

    #[test]
    fn spline_reproduces_samples() {
        let (grid, values) = sampled_gaussian(40, 1.5, 11.0);
        let s = AxisState::tabulated(grid.clone(), values, H).unwrap();
        let t = s.table().unwrap();
        for (x, v) in grid.iter().zip(&t.values) {
            assert_relative_eq!(s.eval_psi(*x), *v, epsilon = 1e-15);
        }
        assert_eq!(s.eval_psi(grid[0] - 1.0), 0.0);
        assert_eq!(s.eval_psi(grid[39] + 1.0), 0.0);
    }

    #[test]
    fn closed_forms() {
        let v = AxisState::oscillator(0, 1.0, 1.0, H)
            .unwrap()
            .closed_form_variances()
            .unwrap();
        assert_eq!((v.position, v.momentum), (0.5, 0.5));

        let v = AxisState::well(1, 1.0, H)
            .unwrap()
            .closed_form_variances()
            .unwrap();
        assert_relative_eq!(
            v.position,
            1.0 / 12.0 - 1.0 / (2.0 * PI * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(v.position, 0.032_672_741_512_164, max_relative = 1e-12);
        assert_relative_eq!(v.momentum, PI * PI, max_relative = 1e-15);

        let v = AxisState::gaussian(1.0, H)
            .unwrap()
            .closed_form_variances()
            .unwrap();
        assert_eq!((v.position, v.momentum), (1.0, 0.25));
        assert_eq!(v.product(), 0.25);

        let (grid, values) = sampled_gaussian(64, 1.0, 8.0);
        let t = AxisState::tabulated(grid, values, H).unwrap();
        assert_eq!(t.closed_form_variances(), Err(Error::NoClosedForm));
    }

    #[test]
    fn separable_state_annotates_axis() {
        let params = [
            AxisParams::InfiniteWell { n: 1, width: 1.0 },
            AxisParams::InfiniteWell { n: 0, width: 1.0 },
            AxisParams::InfiniteWell { n: 1, width: 1.0 },
        ];
        let err = SeparableState3D::from_params(params, H).unwrap_err();
        assert!(matches!(err, Error::OnAxis { axis: Axis::Y, .. }));
        assert!(matches!(err.root(), Error::InvalidQuantumNumber { .. }));
    }

    #[test]
    fn separable_state_requires_common_hbar() {
        let a = AxisState::gaussian(1.0, H).unwrap();
        let b = AxisState::gaussian(1.0, HBar::new(2.0).unwrap()).unwrap();
        assert!(matches!(
            SeparableState3D::new(a.clone(), a, b),
            Err(Error::HbarMismatch { .. })
        ));
    }
}
