//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while sampling symbols, factorizing them, or
/// evaluating determinant formulas.
///
/// Numerical routines in this crate never regularize their way past a failed
/// hypothesis (a symbol vanishing on the circle, a singular Toeplitz minor,
/// an unresolved operator tail, ...); they surface one of these variants and
/// let the caller decide.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Sampling grids must be powers of two with at least two points.
    #[error("invalid sampling grid size {m}: want a power of two >= 2")]
    InvalidGrid { m: usize },

    /// A sampled value had modulus below the zero tolerance, so winding
    /// numbers and logarithms are undefined.
    #[error("symbol vanishes on the unit circle (sample {index}, modulus {modulus:.3e})")]
    ZeroOnCircle { index: usize, modulus: f64 },

    /// Phase increments between adjacent samples were too large to unwrap
    /// reliably; the grid does not resolve the symbol.
    #[error("sampling grid too coarse: max phase step {step:.3} rad exceeds pi/2")]
    GridTooCoarse { step: f64 },

    /// Logarithms (and Wiener-Hopf factorization) require winding number zero.
    #[error("symbol has nonzero winding number {winding}")]
    NonzeroWinding { winding: i64 },

    /// After a full loop around the circle the unwrapped phase failed to
    /// close; this indicates an internal inconsistency, not bad input.
    #[error("internal error: unwrapped phase fails to close (gap {gap:.3e})")]
    PhaseClosure { gap: f64 },

    /// Preset or configuration parameters out of range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A matrix that a formula needs to invert is numerically singular.
    #[error("matrix numerically singular (rcond estimate {rcond:.3e})")]
    NearSingular { rcond: f64 },

    /// Coefficient tails do not fall below the requested tolerance within the
    /// hard cap on inner truncation dimensions.
    #[error("operator tail not resolved: bound {bound:.3e} at inner level {inner}")]
    TailNotResolved { bound: f64, inner: usize },

    /// An index or projection level is outside the ambient matrix.
    #[error("index {k} out of range for level {level}")]
    IndexOutOfRange { k: usize, level: usize },

    /// A minor specification is malformed (not strictly increasing, empty,
    /// or outside the ambient dimension).
    #[error("bad minor specification: {0}")]
    BadSpec(String),

    /// The Neumann series for a resolvent has norm >= 1 at the working level.
    #[error("resolvent series diverges: section norm {norm:.3e} >= 1")]
    SeriesDiverges { norm: f64 },

    /// Doubling the lattice window changed the answer; the window is too
    /// small for the requested indices.
    #[error("lattice window {window} too small: doubling check moved the result by {gap:.3e}")]
    WindowTooSmall { window: usize, gap: f64 },

    /// Not enough data points for a least-squares rate fit.
    #[error("insufficient data: need {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}
