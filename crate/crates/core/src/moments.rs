//! Position and momentum variances by quadrature, by Monte-Carlo sampling,
//! and their assembly into per-axis 3-vectors.

use alloc::vec::Vec;
use core::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::axis_states::{AxisState, AxisVariances, Family, SeparableState3D, Table};
use crate::error::{Axis, Error, Result};
use crate::hermite;
use crate::quadrature::{adaptive_simpson, trapezoid, GaussHermite, GaussLegendre};

/// Evaluation budget of the adaptive rule.
pub const MAX_ADAPTIVE_EVALUATIONS: usize = 1_000_000;
/// Minimum Monte-Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 1_000;
/// Acceptance rate below which rejection sampling gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;
/// Proposal spread relative to the target's standard deviation.
pub const ENVELOPE_SPREAD: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    GaussHermite,
    GaussLegendre,
    AdaptiveSimpson,
}

impl QuadratureRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::GaussHermite => "gauss-hermite",
            QuadratureRule::GaussLegendre => "gauss-legendre",
            QuadratureRule::AdaptiveSimpson => "adaptive-simpson",
        }
    }

    /// Rule matching the integrand's natural weight: Gauss-Hermite for the
    /// oscillator and Gaussian packet, Gauss-Legendre on the well's exact domain.
    pub fn natural_for(family: Family) -> QuadratureRule {
        match family {
            Family::HarmonicOscillator | Family::GaussianPacket => QuadratureRule::GaussHermite,
            Family::InfiniteWell | Family::Tabulated => QuadratureRule::GaussLegendre,
        }
    }
}

/// Quadrature settings. `rule: None` picks [`QuadratureRule::natural_for`]
/// per axis. Tabulated states always integrate on their own grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rule: Option<QuadratureRule>,
    pub points: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rule: None,
            points: 256,
            rel_tol: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rule(rule: QuadratureRule) -> Self {
        QuadratureConfig {
            rule: Some(rule),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 8 {
            return Err(Error::InvalidConfig("quadrature points must be at least 8"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::InvalidConfig("rel_tol must lie in (0, 1e-2]"));
        }
        Ok(())
    }

    fn rule_for(&self, family: Family) -> QuadratureRule {
        self.rule
            .unwrap_or_else(|| QuadratureRule::natural_for(family))
    }
}

/// Three nonnegative, finite per-axis squared quantities: `(ΔR)²`, `(ΔP)²`
/// or `u²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceVector([f64; 3]);

impl VarianceVector {
    pub const ZERO: VarianceVector = VarianceVector([0.0; 3]);

    pub fn new(components: [f64; 3]) -> Result<Self> {
        for c in components {
            if !c.is_finite() {
                return Err(Error::NonFiniteValue);
            }
            if c < 0.0 {
                return Err(Error::OutOfDomain {
                    name: "variance component",
                    value: c,
                });
            }
        }
        Ok(VarianceVector(components))
    }

    /// Component-wise squares of an arbitrary finite vector.
    pub fn squares_of(v: [f64; 3]) -> Result<Self> {
        Self::new(v.map(|c| c * c))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &VarianceVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        let [a, b, c] = self.0;
        libm::sqrt(a * a + b * b + c * c)
    }

    /// Element-wise product, the per-axis `(Δp_i)²(Δx_i)²` terms.
    pub fn hadamard(&self, other: &VarianceVector) -> [f64; 3] {
        [
            self.0[0] * other.0[0],
            self.0[1] * other.0[1],
            self.0[2] * other.0[2],
        ]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.map(|c| c * factor))
    }

    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        VarianceVector(perm.map(|i| self.0[i]))
    }
}

impl Index<Axis> for VarianceVector {
    type Output = f64;

    fn index(&self, axis: Axis) -> &f64 {
        &self.0[axis as usize]
    }
}

#[derive(Debug, Clone, Copy)]
struct PositionMoments {
    mean: f64,
    second: f64,
}

fn composite_panels(state: &AxisState) -> usize {
    1 + state.quantum_number().unwrap_or(0) as usize / 8
}

fn simpson_panels(state: &AxisState) -> usize {
    16 + 4 * (state.quantum_number().unwrap_or(0) as usize + 1)
}

fn rule_not_applicable(rule: QuadratureRule, family: Family) -> Error {
    Error::RuleNotApplicable {
        rule: rule.name(),
        family: family.name(),
    }
}

fn position_moments(state: &AxisState, cfg: &QuadratureConfig) -> Result<PositionMoments> {
    cfg.validate()?;
    let family = state.family();
    if let Some(table) = state.table() {
        return Ok(table_position_moments(table));
    }
    let (a, b) = state.support();
    match cfg.rule_for(family) {
        QuadratureRule::GaussHermite => {
            if let (Some(n), Some(len)) = (state.quantum_number(), state.oscillator_length()) {
                // x = len·ξ, |ψ|² dx = p_n(ξ)² e^{-ξ²} dξ
                let gh = GaussHermite::new(cfg.points.max(n as usize + 2));
                let mut mean = 0.0;
                let mut second = 0.0;
                for (xi, w) in gh.nodes().iter().zip(gh.weights()) {
                    let t = hermite::reduced_triple(n, *xi);
                    let dens = w * t.curr * t.curr * libm::exp(2.0 * t.log_scale);
                    mean += dens * xi;
                    second += dens * xi * xi;
                }
                Ok(PositionMoments {
                    mean: len * mean,
                    second: len * len * second,
                })
            } else if let Some(sigma) = state.sigma() {
                // x = σ√2·ξ, |ψ|² dx = e^{-ξ²}/√π dξ
                let gh = GaussHermite::new(cfg.points);
                let s = sigma * core::f64::consts::SQRT_2;
                let inv_sqrt_pi = 1.0 / libm::sqrt(core::f64::consts::PI);
                let mean = gh.integrate(|xi| s * xi * inv_sqrt_pi);
                let second = gh.integrate(|xi| s * s * xi * xi * inv_sqrt_pi);
                Ok(PositionMoments { mean, second })
            } else {
                Err(rule_not_applicable(QuadratureRule::GaussHermite, family))
            }
        }
        QuadratureRule::GaussLegendre => {
            let gl = GaussLegendre::new(cfg.points);
            let panels = composite_panels(state);
            let dens = |x: f64| {
                let p = state.eval_psi(x);
                p * p
            };
            let mean = gl.integrate_composite(a, b, panels, |x| x * dens(x));
            let second = gl.integrate_composite(a, b, panels, |x| x * x * dens(x));
            Ok(PositionMoments { mean, second })
        }
        QuadratureRule::AdaptiveSimpson => {
            let panels = simpson_panels(state);
            let dens = |x: f64| {
                let p = state.eval_psi(x);
                p * p
            };
            let mean = adaptive_simpson(
                |x| x * dens(x),
                a,
                b,
                cfg.rel_tol,
                panels,
                MAX_ADAPTIVE_EVALUATIONS,
            );
            // ⟨x⟩ vanishes for symmetric states; a relative test on it would
            // chase rounding noise, so fall back to an absolute scale.
            let mean = match mean {
                Ok(m) => m,
                Err(_) => {
                    let scale = (b - a) * cfg.rel_tol;
                    adaptive_simpson(
                        |x| x * dens(x) + scale,
                        a,
                        b,
                        cfg.rel_tol,
                        panels,
                        MAX_ADAPTIVE_EVALUATIONS,
                    )? - scale * (b - a)
                }
            };
            let second = adaptive_simpson(
                |x| x * x * dens(x),
                a,
                b,
                cfg.rel_tol,
                panels,
                MAX_ADAPTIVE_EVALUATIONS,
            )?;
            Ok(PositionMoments { mean, second })
        }
    }
}

fn table_position_moments(table: &Table) -> PositionMoments {
    let g = &table.grid;
    let dens: Vec<f64> = table.values.iter().map(|v| v * v).collect();
    let first: Vec<f64> = g.iter().zip(&dens).map(|(x, d)| x * d).collect();
    let second: Vec<f64> = g.iter().zip(&dens).map(|(x, d)| x * x * d).collect();
    PositionMoments {
        mean: trapezoid(g, &first),
        second: trapezoid(g, &second),
    }
}

/// `⟨x²⟩ − ⟨x⟩²` by the configured rule.
pub fn position_variance_quad(state: &AxisState, cfg: &QuadratureConfig) -> Result<f64> {
    let m = position_moments(state, cfg)?;
    Ok((m.second - m.mean * m.mean).max(0.0))
}

/// `ħ² ∫ |ψ'|² dx`, the momentum variance of a real bound state.
pub fn momentum_variance_quad(state: &AxisState, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let hbar2 = state.hbar().squared();
    let family = state.family();
    if let Some(table) = state.table() {
        let deriv = table_derivative(table)?;
        let sq: Vec<f64> = deriv.iter().map(|d| d * d).collect();
        return Ok(hbar2 * trapezoid(&table.grid, &sq));
    }
    let (a, b) = state.support();
    let integral = match cfg.rule_for(family) {
        QuadratureRule::GaussHermite => {
            if let (Some(n), Some(len)) = (state.quantum_number(), state.oscillator_length()) {
                // ψ'(x) = φ_n'(ξ)/len^{3/2}, dx = len dξ
                let gh = GaussHermite::new(cfg.points.max(n as usize + 3));
                let sum: f64 = gh
                    .nodes()
                    .iter()
                    .zip(gh.weights())
                    .map(|(xi, w)| {
                        let t = hermite::reduced_triple(n, *xi);
                        let d = t.derivative(n);
                        w * d * d * libm::exp(2.0 * t.log_scale)
                    })
                    .sum();
                sum / (len * len)
            } else if let Some(sigma) = state.sigma() {
                // ψ' = −x/(2σ²) ψ
                let gh = GaussHermite::new(cfg.points);
                let s = sigma * core::f64::consts::SQRT_2;
                let inv_sqrt_pi = 1.0 / libm::sqrt(core::f64::consts::PI);
                gh.integrate(|xi| {
                    let x = s * xi;
                    let k = x / (2.0 * sigma * sigma);
                    k * k * inv_sqrt_pi
                })
            } else {
                return Err(rule_not_applicable(QuadratureRule::GaussHermite, family));
            }
        }
        QuadratureRule::GaussLegendre => {
            let gl = GaussLegendre::new(cfg.points);
            gl.integrate_composite(a, b, composite_panels(state), |x| {
                let d = state.eval_psi_derivative(x);
                d * d
            })
        }
        QuadratureRule::AdaptiveSimpson => adaptive_simpson(
            |x| {
                let d = state.eval_psi_derivative(x);
                d * d
            },
            a,
            b,
            cfg.rel_tol,
            simpson_panels(state),
            MAX_ADAPTIVE_EVALUATIONS,
        )?,
    };
    Ok(hbar2 * integral)
}

/// Both variances of one axis by quadrature.
pub fn axis_variances_quad(state: &AxisState, cfg: &QuadratureConfig) -> Result<AxisVariances> {
    Ok(AxisVariances {
        position: position_variance_quad(state, cfg)?,
        momentum: momentum_variance_quad(state, cfg)?,
    })
}

/// Closed form when the family has one, quadrature otherwise.
pub fn axis_variances(state: &AxisState, cfg: &QuadratureConfig) -> Result<AxisVariances> {
    match state.closed_form_variances() {
        Ok(v) => Ok(v),
        Err(Error::NoClosedForm) => axis_variances_quad(state, cfg),
        Err(e) => Err(e),
    }
}

fn assemble(
    state: &SeparableState3D,
    mut per_axis: impl FnMut(&AxisState) -> Result<AxisVariances>,
) -> Result<(VarianceVector, VarianceVector)> {
    let mut pos = [0.0; 3];
    let mut mom = [0.0; 3];
    for axis in Axis::ALL {
        let v = per_axis(state.axis(axis)).map_err(|e| e.on_axis(axis))?;
        pos[axis as usize] = v.position;
        mom[axis as usize] = v.momentum;
    }
    Ok((VarianceVector::new(pos)?, VarianceVector::new(mom)?))
}

/// `((Δx)², (Δy)², (Δz)²)` and `((Δp_x)², (Δp_y)², (Δp_z)²)`, in that order.
/// Closed forms are used where available.
pub fn variance_vectors(
    state: &SeparableState3D,
    cfg: &QuadratureConfig,
) -> Result<(VarianceVector, VarianceVector)> {
    assemble(state, |s| axis_variances(s, cfg))
}

/// As [`variance_vectors`], but every axis goes through quadrature.
pub fn variance_vectors_quad(
    state: &SeparableState3D,
    cfg: &QuadratureConfig,
) -> Result<(VarianceVector, VarianceVector)> {
    assemble(state, |s| axis_variances_quad(s, cfg))
}

// First-derivative weights at x0 for an arbitrary stencil (Fornberg).
fn fd_weights<const N: usize>(x0: f64, xs: &[f64; N]) -> [f64; N] {
    let mut c = [[0.0; 2]; N];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..N {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.map(|row| row[1])
}

fn stencil_derivative<const N: usize>(
    grid: &[f64],
    values: &[f64],
    start: usize,
    at: usize,
) -> f64 {
    let xs: [f64; N] = core::array::from_fn(|k| grid[start + k]);
    let w = fd_weights(grid[at], &xs);
    (0..N).map(|k| w[k] * values[start + k]).sum()
}

/// Samples per oscillation required for a finite-difference derivative.
pub const MIN_POINTS_PER_OSCILLATION: f64 = 8.0;

/// ψ' on the grid: the widest centred stencil that fits, 9-point (8th order)
/// inside, 5-point and then 3-point towards the ends.
fn table_derivative(table: &Table) -> Result<Vec<f64>> {
    let g = &table.grid;
    let v = &table.values;
    check_oscillation_resolution(v)?;
    let n = g.len();
    Ok((0..n)
        .map(|i| match i.min(n - 1 - i) {
            0 if i == 0 => stencil_derivative::<3>(g, v, 0, 0),
            0 => stencil_derivative::<3>(g, v, n - 3, i),
            1 => stencil_derivative::<3>(g, v, i - 1, i),
            2 | 3 => stencil_derivative::<5>(g, v, i - 2, i),
            _ => stencil_derivative::<9>(g, v, i - 4, i),
        })
        .collect())
}

// Every half-oscillation (between neighbouring sign changes of ψ, ignoring the
// near-zero tails) must hold at least half the required samples.
fn check_oscillation_resolution(values: &[f64]) -> Result<()> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let floor = 1e-3 * peak;
    let mut last_sign = 0i8;
    let mut last_change: Option<usize> = None;
    let mut min_half = usize::MAX;
    for (i, v) in values.iter().enumerate() {
        if libm::fabs(*v) < floor {
            continue;
        }
        let sign = if *v > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            if let Some(prev) = last_change {
                min_half = min_half.min(i - prev);
            }
            last_change = Some(i);
        }
        last_sign = sign;
    }
    if min_half != usize::MAX {
        let per_oscillation = 2.0 * min_half as f64;
        if per_oscillation < MIN_POINTS_PER_OSCILLATION {
            return Err(Error::DerivativeUnstable {
                points_per_oscillation: per_oscillation,
            });
        }
    }
    Ok(())
}

/// Monte-Carlo estimate of the position variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub variance: f64,
    /// Standard error of `variance`, `√((m₄ − m₂²)/N)`.
    pub stderr: f64,
    pub mean: f64,
    pub acceptance: f64,
}

enum Proposal {
    Normal { dist: Normal<f64>, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Proposal {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Proposal::Normal { dist, .. } => dist.sample(rng),
            Proposal::Uniform { lo, hi } => rng.gen_range(*lo..*hi),
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            Proposal::Normal { sd, .. } => {
                let z = x / sd;
                libm::exp(-0.5 * z * z) / (sd * libm::sqrt(2.0 * core::f64::consts::PI))
            }
            Proposal::Uniform { lo, hi } => 1.0 / (hi - lo),
        }
    }

    fn normal(sd: f64) -> Self {
        Proposal::Normal {
            dist: Normal::new(0.0, sd).expect("positive spread"),
            sd,
        }
    }
}

// Proposal density g and a bound M ≥ sup |ψ|²/g.
fn envelope(state: &AxisState) -> (Proposal, f64) {
    let (lo, hi) = state.support();
    match state.family() {
        // |ψ|²/g peaks at x = 0 with value exactly ENVELOPE_SPREAD
        Family::GaussianPacket => {
            let sigma = state.sigma().expect("gaussian family");
            (Proposal::normal(ENVELOPE_SPREAD * sigma), ENVELOPE_SPREAD)
        }
        // |ψ|² ≤ 2/L against the uniform density 1/L
        Family::InfiniteWell => (Proposal::Uniform { lo, hi }, 2.0),
        Family::HarmonicOscillator => {
            let n = state.quantum_number().expect("oscillator family");
            let len = state.oscillator_length().expect("oscillator family");
            let proposal = Proposal::normal(ENVELOPE_SPREAD * len * libm::sqrt(n as f64 + 0.5));
            // The proposal is wider than |ψ|² decays, so the ratio peaks
            // inside the support; scan it finely and pad the maximum.
            let step = len * (0.05 / libm::sqrt(2.0 * n as f64 + 1.0)).min(0.005);
            let bound = scan_max(lo, hi, step, |x| {
                let p = state.eval_psi(x);
                p * p / proposal.density(x)
            });
            (proposal, 1.02 * bound)
        }
        Family::Tabulated => {
            let proposal = Proposal::Uniform { lo, hi };
            let t = state.table().expect("tabulated family");
            let step = t
                .grid
                .windows(2)
                .fold(f64::INFINITY, |m, w| m.min(w[1] - w[0]))
                / 8.0;
            let peak = scan_max(lo, hi, step, |x| {
                let p = state.eval_psi(x);
                p * p
            });
            (proposal, 1.05 * peak * (hi - lo))
        }
    }
}

fn scan_max(lo: f64, hi: f64, step: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let count = libm::ceil((hi - lo) / step) as usize;
    (0..=count)
        .map(|k| f(lo + step * k as f64))
        .fold(0.0, f64::max)
}

/// Rejection-samples positions from `|ψ|²` and returns their sample variance
/// with its standard error. Deterministic for a fixed `seed`.
pub fn mc_variance_oracle(state: &AxisState, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidConfig(
            "Monte-Carlo oracle needs at least 1000 samples",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (proposal, bound) = envelope(state);
    let mut samples = Vec::with_capacity(n_samples);
    let mut attempts = 0usize;
    while samples.len() < n_samples {
        attempts += 1;
        let x = proposal.sample(&mut rng);
        let u: f64 = rng.gen();
        let p = state.eval_psi(x);
        if u * bound * proposal.density(x) < p * p {
            samples.push(x);
        }
        if attempts >= 10_000 && attempts % 10_000 == 0 {
            let rate = samples.len() as f64 / attempts as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::RejectionInefficient { acceptance: rate });
            }
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(s2, s4), x| {
        let d = (x - mean) * (x - mean);
        (s2 + d, s4 + d * d)
    });
    let variance = m2 / (n - 1.0);
    let (m2, m4) = (m2 / n, m4 / n);
    Ok(McEstimate {
        variance,
        stderr: libm::sqrt((m4 - m2 * m2).max(0.0) / n),
        mean,
        acceptance: n / attempts as f64,
    })
}
