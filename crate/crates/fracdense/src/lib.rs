//! Numerical workbench for s-harmonic extension and approximation in 1-D.
//!
//! The central object is [`kernel::SHarmonicFn`]: exterior data on the
//! complement of a ball, extended into the ball by the fractional
//! Poisson kernel so the extension has vanishing fractional Laplacian
//! of order s inside. On top of that sit routines that probe how rich
//! this class is: spanning prescribed derivative jets at a point,
//! approximating polynomials in C^k on compact sets, boundary growth
//! asymptotics of the extension, and the blow-up family that links the
//! two regimes.
//!
//! Everything is plain f64. Quadrature tolerances and budgets are
//! explicit ([`quadrature::QuadSettings`]); routines return
//! [`enum@Error`] instead of silently degrading when a budget is
//! exhausted or an input leaves the supported range.

pub mod density;
pub mod error;
mod exec;
pub mod fraclap;
mod jet;
pub mod kernel;
pub mod polyapprox;
pub mod quadrature;
mod stencil;

pub use error::{Error, Result};
