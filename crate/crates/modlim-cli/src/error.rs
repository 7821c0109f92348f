//! Central error type mapping every failure onto the stable exit-code
//! contract: 0 success, 1 I/O or parse, 2 invalid domain, 3 solver
//! failure, 4 quadrature failure, 64 usage.

use modlim::{AnalyticError, DiscreteError, DomainError, HarnessError, VerticalError};

#[derive(Debug)]
pub enum CliError {
    /// Exit 1: filesystem errors and malformed input files.
    Io(String),
    /// Exit 2: a structurally valid file describing an invalid domain,
    /// profile, or boundary-arc configuration.
    InvalidDomain(String),
    /// Exit 3: the solver failed to certify a result, or a verified
    /// property (relative-error bound, sandwich, monotonicity,
    /// extremality, defect decay) was violated.
    Solver(String),
    /// Exit 4: adaptive quadrature could not reach its tolerance.
    Quadrature(String),
    /// Exit 64: bad command-line arguments or experiment parameters.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::InvalidDomain(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Quadrature(_) => 4,
            CliError::Usage(_) => 64,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Io(m)
            | CliError::InvalidDomain(m)
            | CliError::Solver(m)
            | CliError::Quadrature(m)
            | CliError::Usage(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            // Wire-format problems are parse failures, not domain semantics.
            DomainError::Spec(_) => CliError::Io(e.to_string()),
            other => CliError::InvalidDomain(other.to_string()),
        }
    }
}

impl From<VerticalError> for CliError {
    fn from(e: VerticalError) -> Self {
        match e {
            VerticalError::QuadratureFailure { .. } => CliError::Quadrature(e.to_string()),
            // Empty or overlapping families are arc-configuration problems.
            VerticalError::EmptyFamily | VerticalError::OverlappingComponents { .. } => {
                CliError::InvalidDomain(e.to_string())
            }
        }
    }
}

impl From<DiscreteError> for CliError {
    fn from(e: DiscreteError) -> Self {
        match e {
            DiscreteError::ResolutionTooCoarse { .. }
            | DiscreteError::InfeasibleEta { .. }
            | DiscreteError::BadOptions { .. } => CliError::Usage(e.to_string()),
            DiscreteError::Disconnected | DiscreteError::IterationLimit(_) => {
                CliError::Solver(e.to_string())
            }
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::BadArguments { .. }
            | HarnessError::ScheduleTooCoarse { .. }
            | HarnessError::UnsupportedKind { .. } => CliError::Usage(e.to_string()),
            HarnessError::Domain(d) => d.into(),
            HarnessError::Vertical(v) => v.into(),
            HarnessError::Discrete(d) => d.into(),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        CliError::Usage(e.to_string())
    }
}
