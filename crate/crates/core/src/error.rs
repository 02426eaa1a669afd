//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by algebra, group, representation and solver operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// Mixing scalar kinds with no common algebra (double with complex/dual).
    #[error("incompatible scalar algebras: {0} and {1}")]
    IncompatibleAlgebra(&'static str, &'static str),

    /// Operation is not defined for this scalar kind.
    #[error("unsupported scalar kind for {op}: {kind}")]
    UnsupportedKind { op: &'static str, kind: &'static str },

    /// Vector or group dimensions do not agree.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A representation was called with the wrong character unit.
    #[error("wrong character unit: expected {expected}, got {got}")]
    WrongUnit { expected: &'static str, got: &'static str },

    /// Function value kind does not match the representation's scalar algebra.
    #[error("value kind mismatch: representation needs {expected}, function is {got}")]
    ValueKindMismatch { expected: &'static str, got: &'static str },

    /// The commutative representation requires hbar = 0.
    #[error("commutative representation requires hbar = 0, got {0}")]
    HbarNotZero(f64),

    /// A derivative was required but the function handle provides none.
    #[error("function handle provides no derivative (enable finite differences explicitly)")]
    MissingDerivative,

    /// A partial Fourier transform was required but unavailable.
    #[error("state provides no partial transform p -> x")]
    MissingTransform,

    /// Two kernels live on different grids.
    #[error("grid mismatch between kernel operands")]
    GridMismatch,

    /// A parameter is outside its valid range.
    #[error("invalid parameter {0}: {1}")]
    InvalidParameter(&'static str, f64),

    /// Polynomial degree outside the validated range.
    #[error("polynomial degree {0} exceeds supported maximum {1}")]
    DegreeTooHigh(usize, usize),

    /// The exact harmonic flow needs lambda = 0.
    #[error("harmonic flow requires lambda = 0, got {0}")]
    LambdaNonzero(f64),

    /// Time stepping blew up.
    #[error("solver instability at t = {t}: field norm grew {growth:.3e}x over the initial norm")]
    Instability { t: f64, growth: f64 },

    /// Interference coefficient needs positive kernel values.
    #[error("nonpositive kernel value {0:.3e} in interference coefficient")]
    NonpositiveKernel(f64),

    /// Imaginary residue of a measurement exceeded its bound.
    #[error("imaginary residue {0:.3e} exceeds bound {1:.3e}")]
    ResidueTooLarge(f64, f64),
}

pub type Result<T> = std::result::Result<T, CoreError>;
