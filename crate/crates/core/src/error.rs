//! Error type shared by all analysis modules.

use thiserror::Error;

/// Errors surfaced by the atlas operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Construction rejected: `c = 0` or a non-finite field.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The cubic solver residual exceeded tolerance.
    #[error("root finding failed: residual {residual:e} at x = {x}")]
    RootFindingFailure { x: f64, residual: f64 },
    /// A closed form was requested outside its domain of validity.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The point handed to the classifier is not an equilibrium.
    #[error("not an equilibrium: field residual {0:e}")]
    NotAnEquilibrium(f64),
    /// The equilibrium does not carry a pure-imaginary eigenvalue pair.
    #[error("not on a Hopf curve: eigenvalues {0:?}")]
    NotOnHopfCurve([(f64, f64); 2]),
    /// Center-manifold reduction degenerates at `c^2 = 1`.
    #[error("degenerate center manifold: |c^2 - 1| = {0:e}")]
    DegenerateCenterManifold(f64),
    /// The cycle probe exhausted its integration budget.
    #[error("cycle probe timed out: {0}")]
    CycleProbeTimeout(String),
    /// Adaptive step size shrank below the representable minimum.
    #[error("step size underflow at t = {t} (h = {h:e}); consider the slow-fast integrator")]
    StepSizeUnderflow { t: f64, h: f64 },
    /// No periodic orbit was found from the given seed.
    #[error("no cycle found: {0}")]
    NoCycleFound(String),
    /// A separatrix branch left the escape radius before reaching the section.
    #[error("separatrix escaped the integration radius")]
    SeparatrixEscaped,
    /// Stiff integration exceeded its step budget.
    #[error("stiffness budget exceeded: {0}")]
    StiffnessBudgetExceeded(String),
    /// A blow-down step failed its substitution cross-check.
    #[error("blow-down chain mismatch at step {step}: residual {residual:e}")]
    ChainMismatch { step: usize, residual: f64 },
    /// The restricted center-manifold dynamics vanish to the computed order.
    #[error("center manifold leading term beyond degree {0}")]
    CenterManifoldOrderTooHigh(usize),
    /// Exact division of a polynomial by a monomial left a remainder.
    #[error("polynomial is not divisible by the requested monomial")]
    InexactDivision,
}

pub type Result<T> = std::result::Result<T, Error>;
