use alloc::boxed::Box;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Cartesian axis label, used to annotate per-axis failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Quantum number outside the family's range (a well has no level 0).
    InvalidQuantumNumber {
        family: &'static str,
        n: u32,
    },
    /// A mass, frequency, width, spread or similar parameter was not > 0.
    NonPositiveParameter {
        name: &'static str,
        value: f64,
    },
    /// Tabulated amplitudes cannot be normalized.
    UnnormalizableTable {
        norm: f64,
    },
    /// Tabulated grid violates a structural requirement.
    InvalidTable(&'static str),
    /// Closed-form variances requested for a family that has none.
    NoClosedForm,
    /// The configured quadrature rule does not apply to this family.
    RuleNotApplicable {
        rule: &'static str,
        family: &'static str,
    },
    InvalidConfig(&'static str),
    QuadratureNotConverged {
        evaluations: usize,
    },
    /// Tabulated grid too coarse for a finite-difference derivative.
    DerivativeUnstable {
        points_per_oscillation: f64,
    },
    RejectionInefficient {
        acceptance: f64,
    },
    /// Vector with zero norm where an angle is required.
    DegenerateVector,
    OutOfDomain {
        name: &'static str,
        value: f64,
    },
    TooFewEvents {
        n: usize,
    },
    ConflictingCalibration,
    NonFiniteValue,
    HbarMismatch {
        state: f64,
        context: f64,
    },
    /// Failure on one axis of a 3D state.
    OnAxis {
        axis: Axis,
        source: Box<Error>,
    },
}

impl Error {
    pub fn on_axis(self, axis: Axis) -> Error {
        Error::OnAxis {
            axis,
            source: Box::new(self),
        }
    }

    /// Innermost error, with axis annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::OnAxis { source, .. } => source.root(),
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidQuantumNumber { family, n } => {
                write!(f, "invalid quantum number n={n} for {family}")
            }
            Error::NonPositiveParameter { name, value } => {
                write!(f, "parameter {name} must be positive, got {value}")
            }
            Error::UnnormalizableTable { norm } => {
                write!(f, "tabulated state cannot be normalized (norm {norm:e})")
            }
            Error::InvalidTable(why) => write!(f, "invalid tabulated state: {why}"),
            Error::NoClosedForm => f.write_str("no closed-form variances for tabulated states"),
            Error::RuleNotApplicable { rule, family } => {
                write!(f, "quadrature rule {rule} does not apply to {family}")
            }
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
            Error::QuadratureNotConverged { evaluations } => {
                write!(f, "quadrature did not converge after {evaluations} evaluations")
            }
            Error::DerivativeUnstable { points_per_oscillation } => write!(
                f,
                "grid too coarse for derivative ({points_per_oscillation:.1} points per oscillation, need 8)"
            ),
            Error::RejectionInefficient { acceptance } => {
                write!(f, "rejection sampling acceptance rate {acceptance:e} below 1e-4")
            }
            Error::DegenerateVector => f.write_str("vector has zero norm"),
            Error::OutOfDomain { name, value } => write!(f, "{name}={value} is out of domain"),
            Error::TooFewEvents { n } => write!(f, "need at least 2 events, got {n}"),
            Error::ConflictingCalibration => {
                f.write_str("exactly one calibration mode must be given")
            }
            Error::NonFiniteValue => f.write_str("non-finite value"),
            Error::HbarMismatch { state, context } => {
                write!(f, "state built with hbar={state} but context has hbar={context}")
            }
            Error::OnAxis { axis, source } => write!(f, "axis {axis}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::OnAxis { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
