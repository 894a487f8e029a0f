use std::fmt;

use thiserror::Error;

use crate::grid::MomentRecord;

/// Which monitored inequality an evolution run violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Norm,
    SecondMoment,
    Sigma,
    ConservedE,
    Boundary,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BoundKind::Norm => "norm drift",
            BoundKind::SecondMoment => "second-moment ceiling",
            BoundKind::Sigma => "sigma ceiling",
            BoundKind::ConservedE => "<E> conservation",
            BoundKind::Boundary => "boundary probability",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration blew up at t = {time}: {detail}")]
    Blowup { time: f64, detail: String },

    #[error("banded solve failed: {0}")]
    Solver(String),

    #[error("eigensolver did not converge for eigenvalue {index} of a {size}x{size} matrix (max |offdiag| = {offdiag:e})")]
    NoConvergence { index: usize, size: usize, offdiag: f64 },

    #[error("{kind} violated at t = {time}: observed {observed:e}, limit {limit:e}")]
    BoundViolation {
        kind: BoundKind,
        time: f64,
        observed: f64,
        limit: f64,
        record: Box<MomentRecord<f64>>,
    },

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}
