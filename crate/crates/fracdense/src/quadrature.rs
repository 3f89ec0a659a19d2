//! Adaptive Gauss–Legendre quadrature.
//!
//! Panels carry a nested pair of rules (order n and 2n+1); the
//! difference of the two estimates drives global bisection of the
//! worst panel until the summed error estimate meets the tolerance.
//! Endpoint singularities of the form (t−a)^{−σ} are removed exactly
//! by the substitution t = a + τ^{1/(1−σ)} rather than resolved by
//! subdivision.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;
pub const DEFAULT_BASE_RULE_ORDER: usize = 15;

/// Tolerances and budgets for one quadrature evaluation.
///
/// The converged estimate I satisfies |I − ∫f| ≤ abs_tol + rel_tol·|I|
/// whenever the error estimator is trustworthy for the integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub base_rule_order: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
            base_rule_order: DEFAULT_BASE_RULE_ORDER,
        }
    }
}

impl QuadSettings {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        base_rule_order: usize,
    ) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) || !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive and finite, got abs {abs_tol}, rel {rel_tol}"
            )));
        }
        if base_rule_order < 2 {
            return Err(Error::InvalidInput(format!(
                "base rule order must be at least 2, got {base_rule_order}"
            )));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidInput(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            base_rule_order,
        })
    }

    /// Same budgets with both tolerances replaced by `tol`.
    pub fn with_tol(&self, tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..self.clone()
        }
    }
}

/// Legendre nodes and weights on [−1, 1].
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&n) {
        return Arc::clone(r);
    }
    let rule = Arc::new(compute_legendre_rule(n));
    cache.write().unwrap().insert(n, Arc::clone(&rule));
    rule
}

/// Newton iteration on P_n from the Chebyshev initial guess; weights
/// 2/((1−x²) P′_n(x)²). Symmetric nodes are mirrored.
fn compute_legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d2) = legendre_eval(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// (P_n(x), P′_n(x)) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn estimate_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    low: &Rule,
    high: &Rule,
) -> Result<Panel> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum_low = 0.0;
    for (x, w) in low.nodes.iter().zip(&low.weights) {
        let t = mid + half * x;
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFinite { at: t });
        }
        sum_low += w * v;
    }
    let mut sum_high = 0.0;
    for (x, w) in high.nodes.iter().zip(&high.weights) {
        let t = mid + half * x;
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFinite { at: t });
        }
        sum_high += w * v;
    }
    let value = half * sum_high;
    let error = (half * (sum_high - sum_low)).abs();
    Ok(Panel { a, b, value, error })
}

/// ∫_a^b f(t) dt by global adaptive bisection.
///
/// Orientation follows the usual convention: swapping the endpoints
/// negates the result. Non-finite integrand values abort immediately;
/// exhausting the subdivision budget reports the live error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, settings).map(|v| -v);
    }
    let low = legendre_rule(settings.base_rule_order);
    let high = legendre_rule(2 * settings.base_rule_order + 1);

    let mut heap = BinaryHeap::new();
    let first = estimate_panel(&f, a, b, &low, &high)?;
    let mut value_sum = first.value;
    let mut error_sum = first.error;
    heap.push(first);
    // Panels too narrow to bisect park here; their error is irreducible.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;

    for _ in 0..settings.max_subdivisions {
        let target = settings.abs_tol + settings.rel_tol * (value_sum + frozen_value).abs();
        if error_sum + frozen_error <= target {
            return Ok(value_sum + frozen_value);
        }
        if frozen_error > target {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let width_floor = 8.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1.0);
        if worst.b - worst.a <= width_floor {
            value_sum -= worst.value;
            error_sum -= worst.error;
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let left = estimate_panel(&f, worst.a, mid, &low, &high)?;
        let right = estimate_panel(&f, mid, worst.b, &low, &high)?;
        value_sum += left.value + right.value - worst.value;
        error_sum += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let target = settings.abs_tol + settings.rel_tol * (value_sum + frozen_value).abs();
    if error_sum + frozen_error <= target {
        Ok(value_sum + frozen_value)
    } else {
        Err(Error::NonConvergence {
            context: "adaptive quadrature",
            detail: format!(
                "estimated error {:.3e} > tolerance {:.3e} after {} subdivisions",
                error_sum + frozen_error,
                target,
                settings.max_subdivisions
            ),
        })
    }
}

/// ∫_a^b (t−a)^{−σ} f(t) dt for σ ∈ (0, 1) and f smooth up to the
/// endpoint. The weight is removed exactly by t = a + τ^{1/(1−σ)}.
pub fn integrate_endpoint_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    sigma: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::BadExponent(sigma));
    }
    integrate_power_weight(f, a, b, -sigma, settings)
}

/// ∫_a^b (t−a)^λ f(t) dt for λ > −1.
///
/// λ is reduced to (−1, 0] by moving integer powers of (t−a) into the
/// integrand, then the fractional remainder is removed by substitution,
/// so the transformed integrand is at worst mildly kinked at τ = 0.
pub(crate) fn integrate_power_weight<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    lambda: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    if !(lambda > -1.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "power weight exponent must exceed -1, got {lambda}"
        )));
    }
    if b <= a {
        if b == a {
            return Ok(0.0);
        }
        return Err(Error::InvalidInput(format!(
            "power weight requires a < b, got [{a}, {b}]"
        )));
    }
    let shift = lambda.max(0.0).ceil();
    let frac = lambda - shift; // in (-1, 0]
    if frac == 0.0 && shift == 0.0 {
        return integrate(f, a, b, settings);
    }
    let q = 1.0 / (1.0 + frac);
    let upper = (b - a).powf(1.0 + frac);
    let scaled = integrate(
        |tau| {
            let dt = if tau <= 0.0 { 0.0 } else { tau.powf(q) };
            f(a + dt) * dt.powf(shift)
        },
        0.0,
        upper,
        settings,
    )?;
    Ok(scaled * q)
}
