use thiserror::Error;

/// Failures reported by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value while evaluating at x = {x}")]
    Evaluation { x: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("step size underflow at t = {t} (h = {h:e}); problem looks stiff")]
    Stiffness { t: f64, h: f64 },

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi} have no sign change")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("could not bracket level n = {n} from seed E = {seed}")]
    Search { n: u32, seed: f64 },

    #[error("trajectory reached the boundary guard at t = {t} (last valid q = {q}, p = {p})")]
    BoundaryEscape { t: f64, q: f64, p: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
