use std::fmt;

/// Where a failure happened: the module and the operation within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub module: &'static str,
    pub operation: &'static str,
}

impl Site {
    pub const fn new(module: &'static str, operation: &'static str) -> Self {
        Self { module, operation }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.module, self.operation)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{site}: invalid input: {reason}")]
    InvalidInput { site: Site, reason: String },

    #[error("{site}: time step {dt:e} s is too coarse, at most {required:e} s is required")]
    StepTooCoarse { site: Site, dt: f64, required: f64 },

    #[error("{site}: grid violation: {reason}")]
    Grid { site: Site, reason: String },

    #[error("{site}: domain error: {reason}")]
    Domain { site: Site, reason: String },

    #[error("{site}: did not converge after {iterations} iterations: {reason}")]
    NoConvergence {
        site: Site,
        iterations: usize,
        reason: String,
        last_iterate: Vec<f64>,
    },

    #[error("{site}: ambiguous result: {reason}")]
    Ambiguous { site: Site, reason: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// The module/operation that raised the error, if it came from a numerical
    /// routine rather than from i/o.
    pub fn site(&self) -> Option<Site> {
        match self {
            Error::InvalidInput { site, .. }
            | Error::StepTooCoarse { site, .. }
            | Error::Grid { site, .. }
            | Error::Domain { site, .. }
            | Error::NoConvergence { site, .. }
            | Error::Ambiguous { site, .. } => Some(*site),
            Error::Io(_) | Error::Csv(_) => None,
        }
    }

    pub(crate) fn invalid(site: Site, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            site,
            reason: reason.into(),
        }
    }

    pub(crate) fn grid(site: Site, reason: impl Into<String>) -> Self {
        Error::Grid {
            site,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(site: Site, reason: impl Into<String>) -> Self {
        Error::Domain {
            site,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
