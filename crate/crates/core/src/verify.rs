//! Randomized property checks over the relations implemented by the crate.
//!
//! Each property draws `cases` random inputs from a seeded generator, so a
//! run is reproducible from `(cases, seed)`. The first failing input of every
//! property is kept in a form that can be pasted back into a test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axis_states::{AxisParams, AxisState, SeparableState3D};
use crate::error::{Error, Result};
use crate::hidden_angle::{box_cos_closed, ho_cos_closed, UncertaintyReport, CHECK_TOLERANCE};
use crate::landau_peierls::{
    calibrate_a, cauchy_schwarz_gap, lp_aggregated_report, lp_per_axis_check, velocity_bound,
    GroupVelocity,
};
use crate::moments::{
    axis_variances, axis_variances_quad, variance_vectors, QuadratureConfig, VarianceVector,
};
use crate::units::HBar;

/// Constants the checks compare against. Only [`RelationConstants::default`]
/// is physical; other values exist to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationConstants {
    /// Per-axis lower bound on `(Δp)²(Δx)²`, in units of `ħ²`.
    pub per_axis_hur: f64,
}

impl Default for RelationConstants {
    fn default() -> Self {
        RelationConstants { per_axis_hur: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub cases: usize,
    pub seed: u64,
    pub hbar: HBar,
    pub quadrature: QuadratureConfig,
    pub constants: RelationConstants,
}

impl VerifyConfig {
    pub fn new(cases: usize, seed: u64) -> Self {
        VerifyConfig {
            cases,
            seed,
            hbar: HBar::NATURAL,
            quadrature: QuadratureConfig::default(),
            constants: RelationConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub seed: u64,
    pub cases: usize,
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn first_failure(&self) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|o| !o.passed())
    }
}

/// Random parameters for one of the three analytic families. Roughly a
/// fifth of oscillator draws are ground states and every third draw is a
/// Gaussian packet, so minimal-uncertainty states are well represented.
pub fn random_axis_params<R: Rng>(rng: &mut R) -> AxisParams {
    match rng.gen_range(0..3) {
        0 => AxisParams::HarmonicOscillator {
            n: if rng.gen_bool(0.2) {
                0
            } else {
                rng.gen_range(0..=20)
            },
            mass: log_uniform(rng, 0.1, 10.0),
            omega: log_uniform(rng, 0.1, 10.0),
        },
        1 => AxisParams::InfiniteWell {
            n: rng.gen_range(1..=20),
            width: log_uniform(rng, 0.1, 10.0),
        },
        _ => AxisParams::GaussianPacket {
            sigma: log_uniform(rng, 0.05, 20.0),
        },
    }
}

pub fn random_state<R: Rng>(rng: &mut R, hbar: HBar) -> Result<SeparableState3D> {
    SeparableState3D::from_params(
        [
            random_axis_params(rng),
            random_axis_params(rng),
            random_axis_params(rng),
        ],
        hbar,
    )
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    libm::exp(rng.gen_range(libm::log(lo)..libm::log(hi)))
}

struct Tally {
    outcome: PropertyOutcome,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            outcome: PropertyOutcome {
                name,
                cases: 0,
                failures: 0,
                first_failure: None,
            },
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.outcome.cases += 1;
        if !ok {
            self.outcome.failures += 1;
            if self.outcome.first_failure.is_none() {
                self.outcome.first_failure = Some(describe());
            }
        }
    }
}

/// Runs every property. Fails only on an invalid configuration; property
/// violations are reported in the summary.
pub fn run(cfg: &VerifyConfig) -> Result<VerifySummary> {
    if cfg.cases == 0 {
        return Err(Error::InvalidConfig("verify needs at least one case"));
    }
    cfg.quadrature.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hbar = cfg.hbar;
    let h2 = hbar.squared();

    let mut per_axis = Tally::new("per-axis position/momentum relation");
    let mut quad = Tally::new("quadrature agrees with closed form");
    let mut aggregate = Tally::new("per-axis relations imply aggregated relation");
    let mut identity = Tally::new("dot product equals norms times geometric cosine");
    let mut saturation = Tally::new("isotropic saturation cosine matches closed form");
    let mut lp = Tally::new("per-axis Landau-Peierls implies aggregated form");
    let mut cs = Tally::new("Cauchy-Schwarz velocity step");
    let mut calibration = Tally::new("calibration round trip");

    for case in 0..cfg.cases {
        let params = random_axis_params(&mut rng);
        let axis = AxisState::new(params.clone(), hbar)?;
        let v = axis_variances(&axis, &cfg.quadrature)?;
        let bound = cfg.constants.per_axis_hur * h2 * (1.0 - CHECK_TOLERANCE);
        per_axis.record(v.product() >= bound, || {
            format!(
                "case {case}: {params:?}, hbar={}, product={:e} < {bound:e}",
                hbar.get(),
                v.product()
            )
        });

        let q = axis_variances_quad(&axis, &cfg.quadrature)?;
        let rel = |a: f64, b: f64| libm::fabs(a - b) / libm::fabs(b);
        let worst = rel(q.position, v.position).max(rel(q.momentum, v.momentum));
        quad.record(worst <= 1e-8, || {
            format!("case {case}: {params:?}, relative error {worst:e}")
        });

        let state = random_state(&mut rng, hbar)?;
        let (r2, p2) = variance_vectors(&state, &cfg.quadrature)?;
        let report = UncertaintyReport::from_vectors(r2, p2, hbar)?;
        let all_axes = report.per_axis_products.iter().all(|p| *p >= bound);
        aggregate.record(!all_axes || report.aggregated_holds, || {
            format!(
                "case {case}: R2={:?} P2={:?} slack={:e}",
                r2.components(),
                p2.components(),
                report.slack
            )
        });
        let recon = report.norm_p2 * report.norm_r2 * report.cos_geometric;
        identity.record(rel(recon, report.dot_product) <= 1e-12, || {
            format!(
                "case {case}: dot={:e} reconstructed={recon:e}",
                report.dot_product
            )
        });

        let n = rng.gen_range(0..=30u32);
        let ho = SeparableState3D::isotropic(AxisState::oscillator(
            n,
            log_uniform(&mut rng, 0.1, 10.0),
            log_uniform(&mut rng, 0.1, 10.0),
            hbar,
        )?);
        let well = SeparableState3D::isotropic(AxisState::well(
            n + 1,
            log_uniform(&mut rng, 0.1, 10.0),
            hbar,
        )?);
        let ho_cos = saturation_cos(&ho, cfg)?;
        let well_cos = saturation_cos(&well, cfg)?;
        let well_closed = box_cos_closed(n + 1)?;
        saturation.record(
            rel(ho_cos, ho_cos_closed(n)) <= 1e-10 && rel(well_cos, well_closed) <= 1e-10,
            || format!("case {case}: n={n} oscillator {ho_cos:e} vs {:e}, well {well_cos:e} vs {well_closed:e}", ho_cos_closed(n)),
        );

        let u = GroupVelocity::new(core::array::from_fn(|_| rng.gen_range(-1.0..1.0)))?;
        let lp_p2 =
            VarianceVector::new(core::array::from_fn(|_| log_uniform(&mut rng, 0.01, 100.0)))?;
        let dt = log_uniform(&mut rng, 0.1, 10.0);
        let axes = lp_per_axis_check(&u, &lp_p2, dt, hbar)?;
        if u.squared().norm() > 0.0 {
            let agg = lp_aggregated_report(&u, &lp_p2, dt, hbar)?;
            lp.record(!axes.iter().all(|c| c.holds) || agg.holds, || {
                format!(
                    "case {case}: u={:?} P2={:?} dt={dt:e}",
                    u.components(),
                    lp_p2.components()
                )
            });
        }

        let (lhs, rhs) = cauchy_schwarz_gap(&u);
        let zero = u.components() == [0.0; 3];
        cs.record(lhs <= rhs && (zero || lhs < rhs), || {
            format!(
                "case {case}: u={:?} lhs={lhs:e} rhs={rhs:e}",
                u.components()
            )
        });

        let (var_e, p2n, u_ref) = (
            log_uniform(&mut rng, 1e-3, 1e3),
            log_uniform(&mut rng, 1e-3, 1e3),
            log_uniform(&mut rng, 1e-3, 1.0),
        );
        let back = velocity_bound(var_e, p2n, calibrate_a(var_e, p2n, u_ref)?)?;
        calibration.record(rel(back, u_ref) <= 1e-12, || {
            format!("case {case}: var_E={var_e:e} P2_norm={p2n:e} u_ref={u_ref:e} -> {back:e}")
        });
    }

    Ok(VerifySummary {
        seed: cfg.seed,
        cases: cfg.cases,
        outcomes: [
            per_axis,
            quad,
            aggregate,
            identity,
            saturation,
            lp,
            cs,
            calibration,
        ]
        .into_iter()
        .map(|t| t.outcome)
        .collect(),
    })
}

fn saturation_cos(state: &SeparableState3D, cfg: &VerifyConfig) -> Result<f64> {
    let (r2, p2) = variance_vectors(state, &cfg.quadrature)?;
    crate::hidden_angle::cos_saturation(&p2, &r2, cfg.hbar)
}
