//! Squared-deviation vectors, hidden-angle uncertainty relations and
//! virtual-particle velocity bounds for separable 3D quantum states.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line front end and configuration handling live in the
//! `hidden-angle` crate.
//!
//! Layout, bottom up:
//!
//! * [`hermite`] and [`quadrature`]: special functions and integration rules.
//! * [`axis_states`]: normalized 1D bound states and their closed-form variances.
//! * [`moments`]: numerical and Monte-Carlo variances, 3-vector assembly.
//! * [`hidden_angle`]: the aggregated position/momentum relation and its cosines.
//! * [`landau_peierls`]: energy-time and Landau-Peierls relations, velocity bound.
//! * [`event_stats`]: sample moments of event records and the velocity pipeline.
//! * [`verify`]: randomized property checks used by the `verify` subcommand.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod axis_states;
pub mod error;
pub mod event_stats;
pub mod hermite;
pub mod hidden_angle;
pub mod landau_peierls;
pub mod moments;
pub mod quadrature;
pub mod units;
pub mod verify;

pub use axis_states::{AxisParams, AxisState, Family, SeparableState3D};
pub use error::{Axis, Error, Result};
pub use event_stats::{Calibration, EventRecord, SampleMoments};
pub use hidden_angle::UncertaintyReport;
pub use landau_peierls::{EnergyTimeParams, GroupVelocity, VelocityEstimate};
pub use moments::{QuadratureConfig, QuadratureRule, VarianceVector};
pub use units::HBar;
