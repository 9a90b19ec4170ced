//! Numerical atlas for the three-parameter FitzHugh-Nagumo planar family.
//!
//! The crate locates and classifies finite equilibria, evaluates the
//! bifurcation/transition curves organising the parameter space, computes
//! first Lyapunov coefficients and slow-fast canard asymptotics, performs the
//! Poincare compactification with the directional blow-down of the degenerate
//! equator point, and renders global phase portraits on the Poincare disc.
//!
//! Everything is a pure function of its inputs; values are freely shareable
//! across threads.

pub mod atlas;
pub mod compactification;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fhn;
pub mod poly;
pub mod portrait;
pub mod slowfast;

pub use error::{Error, Result};
pub use fhn::{kappa, Params, State};
pub use poly::{Poly2, PolyField2, RatField2, RatPoly2};
