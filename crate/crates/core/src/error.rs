use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("particle {particle} blew up at t = {time} (|x| = {value:e})")]
    BlowUp {
        particle: usize,
        time: f64,
        value: f64,
    },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {residual:e}); the model may be past a phase transition")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no sign change on bracket [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("operation is not supported on the {0} domain")]
    UnsupportedDomain(&'static str),
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("density became negative beyond tolerance (min {min:e}) at t = {time}")]
    NegativeMass { min: f64, time: f64 },
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("estimation failed: {message}")]
    Estimation {
        message: String,
        /// `(theta, objective)` pairs visited before failing.
        trace: Vec<(f64, f64)>,
    },
    #[error("equilibrium solve failed at theta = {theta}: {source}")]
    Equilibrium { theta: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
