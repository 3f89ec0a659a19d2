//! Derivative spanning, boundary growth, blow-up family, and the
//! polynomial approximation pipeline built on s-harmonic extensions.

pub mod approx;
pub mod growth;
pub mod span;

pub use approx::{
    approximate, approximate_smooth, ck_error, ck_profile, rescale_for_monomial, residual_grid,
    ApproxMethod, Approximant, ApproximationReport, RescaledMonomial,
};
pub use growth::{
    blowup_l1_error, blowup_member, boundary_growth_constant, fit_boundary_growth, growth_profile,
};
pub use span::{
    build_dictionary, derivative_matrix, span_solve, Dictionary, Placement, SpanSolution,
};

use serde::Serialize;

/// Derivatives D^k u at one point, k = 0..=order (1-D multi-indices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeVector {
    values: Vec<f64>,
}

impl DerivativeVector {
    pub(crate) fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "derivative vector needs order >= 0");
        Self { values }
    }

    /// Highest derivative order stored.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// D^k u; panics when k exceeds the stored order.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// All derivatives in graded order [u, u', u'', ...].
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
