//! Sample moments of measured events and the end-to-end velocity pipeline.
//!
//! `(ΔE)²` and `(ΔP)²` are taken as unbiased (`n − 1`) sample variances of
//! the energy and of each momentum component. Covariances between components
//! are not used.

use crate::error::{Error, Result};
use crate::landau_peierls::{calibrate_a, normalization_a, VelocityEstimate};
use crate::moments::VarianceVector;

/// One measured `(E, p_x, p_y, p_z)` tuple in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub e: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl EventRecord {
    pub fn new(e: f64, px: f64, py: f64, pz: f64) -> Result<Self> {
        if [e, px, py, pz].iter().all(|v| v.is_finite()) {
            Ok(EventRecord { e, px, py, pz })
        } else {
            Err(Error::NonFiniteValue)
        }
    }

    fn fields(&self) -> [f64; 4] {
        [self.e, self.px, self.py, self.pz]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n_events: usize,
    /// `(ΔE)²`
    pub var_e: f64,
    /// `((Δp_x)², (Δp_y)², (Δp_z)²)`
    pub p2: VarianceVector,
}

/// Running mean and sum of squared deviations for the four event fields.
/// Chunks can be accumulated independently and merged.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    count: usize,
    mean: [f64; 4],
    m2: [f64; 4],
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: &EventRecord) {
        self.count += 1;
        let n = self.count as f64;
        for (i, x) in record.fields().into_iter().enumerate() {
            let d = x - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x - self.mean[i]);
        }
    }

    /// Exact pairwise combination of two partial accumulations.
    pub fn merge(&self, other: &MomentAccumulator) -> MomentAccumulator {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut out = MomentAccumulator {
            count: self.count + other.count,
            ..Default::default()
        };
        for i in 0..4 {
            let d = other.mean[i] - self.mean[i];
            out.mean[i] = self.mean[i] + d * nb / n;
            out.m2[i] = self.m2[i] + other.m2[i] + d * d * na * nb / n;
        }
        out
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Result<SampleMoments> {
        if self.count < 2 {
            return Err(Error::TooFewEvents { n: self.count });
        }
        let denom = (self.count - 1) as f64;
        let var = self.m2.map(|m| (m / denom).max(0.0));
        Ok(SampleMoments {
            n_events: self.count,
            var_e: var[0],
            p2: VarianceVector::new([var[1], var[2], var[3]])?,
        })
    }
}

impl<'a> Extend<&'a EventRecord> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = &'a EventRecord>>(&mut self, iter: I) {
        iter.into_iter().for_each(|r| self.push(r));
    }
}

/// Unbiased sample variances of `E` and of each momentum component.
pub fn sample_moments(records: &[EventRecord]) -> Result<SampleMoments> {
    let mut acc = MomentAccumulator::new();
    acc.extend(records);
    acc.finish()
}

/// How the normalization `A` is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration<'a> {
    /// `A` given directly.
    Direct { a: f64 },
    /// `A = 3/(δ² cos щ_u)`.
    Parameters { delta: f64, cos_u: f64 },
    /// `A` chosen so the reference sample's bound equals `u_ref`, e.g. an
    /// on-shell sample with `u_ref = 1`.
    Reference {
        records: &'a [EventRecord],
        u_ref: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CalibrationMode {
    Direct,
    Parameters,
    Reference,
}

impl CalibrationMode {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationMode::Direct => "direct",
            CalibrationMode::Parameters => "parameters",
            CalibrationMode::Reference => "reference",
        }
    }
}

impl<'a> Calibration<'a> {
    /// Picks the single mode that was supplied.
    pub fn from_options(
        a: Option<f64>,
        parameters: Option<(f64, f64)>,
        reference: Option<(&'a [EventRecord], f64)>,
    ) -> Result<Self> {
        match (a, parameters, reference) {
            (Some(a), None, None) => Ok(Calibration::Direct { a }),
            (None, Some((delta, cos_u)), None) => Ok(Calibration::Parameters { delta, cos_u }),
            (None, None, Some((records, u_ref))) => Ok(Calibration::Reference { records, u_ref }),
            _ => Err(Error::ConflictingCalibration),
        }
    }

    pub fn mode(&self) -> CalibrationMode {
        match self {
            Calibration::Direct { .. } => CalibrationMode::Direct,
            Calibration::Parameters { .. } => CalibrationMode::Parameters,
            Calibration::Reference { .. } => CalibrationMode::Reference,
        }
    }
}

/// Pipeline output: the estimate plus every input it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityReport {
    pub moments: SampleMoments,
    pub p2_norm: f64,
    pub mode: CalibrationMode,
    pub reference: Option<SampleMoments>,
    pub u_ref: Option<f64>,
    pub estimate: VelocityEstimate,
}

/// Sample moments → `A` (per calibration mode) → `‖u²‖` estimate and `‖u‖` bound.
pub fn virtual_velocity_pipeline(
    records: &[EventRecord],
    calibration: Calibration<'_>,
) -> Result<VelocityReport> {
    let moments = sample_moments(records)?;
    let p2_norm = moments.p2.norm();
    if p2_norm <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "P2_norm",
            value: p2_norm,
        });
    }
    let mut reference = None;
    let mut u_ref = None;
    let estimate = match calibration {
        Calibration::Direct { a } => VelocityEstimate::with_a(moments.var_e, p2_norm, a)?,
        Calibration::Parameters { delta, cos_u } => {
            normalization_a(delta, cos_u)?;
            VelocityEstimate::from_parameters(moments.var_e, p2_norm, delta, cos_u)?
        }
        Calibration::Reference {
            records: reference_records,
            u_ref: u,
        } => {
            let r = sample_moments(reference_records)?;
            let a = calibrate_a(r.var_e, r.p2.norm(), u)?;
            reference = Some(r);
            u_ref = Some(u);
            VelocityEstimate::with_a(moments.var_e, p2_norm, a)?
        }
    };
    Ok(VelocityReport {
        moments,
        p2_norm,
        mode: calibration.mode(),
        reference,
        u_ref,
        estimate,
    })
}
