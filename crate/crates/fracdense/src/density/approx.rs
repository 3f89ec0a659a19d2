//! C^k gap measurement, monomial rescaling, and the end-to-end pipeline
//! assembling rescaled span solutions into a near-s-harmonic
//! approximant of a target function on the unit ball.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::density::span::{build_dictionary, span_solve, Placement, SpanSolution};
use crate::error::{Error, Result};
use crate::exec;
use crate::fraclap::{self, ResidualReport};
use crate::kernel::{FracParams, SHarmonicFn};
use crate::polyapprox::{self, weierstrass_approx, MultiIndex, Polynomial};
use crate::quadrature::QuadSettings;
use crate::stencil;

/// Default measurement grid across [−1, 1].
pub const DEFAULT_GRID: usize = 41;

/// Interior points at which the pipeline certifies s-harmonicity.
pub const RESIDUAL_POINTS: usize = 9;

/// Highest C^k order the pipeline measures against.
pub const PIPELINE_CK_MAX: usize = 3;

/// Rescaling stops once η reaches 2^−ETA_FLOOR_EXP.
const ETA_FLOOR_EXP: i32 = 20;

/// Per-monomial budgets below this cannot beat quadrature noise.
const BUDGET_FLOOR: f64 = 1e-12;

/// Fraction of the requested tolerance handed to the rescaling steps;
/// the remainder absorbs measurement noise in the final certification.
const BUDGET_MARGIN: f64 = 0.9;

/// Members in the fixed dictionary used by the global least-squares fit.
const LSQ_DICT_COUNT: usize = 10;

/// Tikhonov weight relative to the largest singular value.
const RIDGE_FACTOR: f64 = 1e-6;

/// The certification grid: evenly spaced interior points of B_{0.9}.
pub fn residual_grid() -> Vec<f64> {
    let n = RESIDUAL_POINTS;
    (0..n)
        .map(|i| -0.9 + 1.8 * i as f64 / (n - 1) as f64)
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

/// Per-order maxima of |D^m(u − f)| for m = 0..=k over an evenly spaced
/// grid on [−1, 1], fourth-order central differences with the step tied
/// to the grid spacing. Each offset is evaluated once and shared by all
/// orders.
pub fn ck_profile<U, F>(u: U, f: F, k: usize, grid: usize) -> Result<Vec<f64>>
where
    U: Fn(f64) -> Result<f64> + Sync,
    F: Fn(f64) -> Result<f64> + Sync,
{
    if k > stencil::MAX_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: stencil::MAX_ORDER });
    }
    if grid < 2 {
        return Err(Error::InvalidInput(format!(
            "measurement grid needs at least 2 points, got {grid}"
        )));
    }
    let h = 2.0 / (grid - 1) as f64;
    let reach: i64 = match k {
        0 => 0,
        1 | 2 => 2,
        _ => 3,
    };
    let xs: Vec<f64> = (0..grid).map(|i| -1.0 + i as f64 * h).collect();
    let per_point = exec::try_map(&xs, |&x| {
        let mut diffs = [0.0f64; stencil::WIDTH];
        for (slot, off) in (-reach..=reach).enumerate() {
            let y = x + off as f64 * h;
            diffs[(3 + off) as usize] = u(y)? - f(y)?;
            let _ = slot;
        }
        let mut maxima = vec![0.0f64; k + 1];
        for (m, entry) in maxima.iter_mut().enumerate() {
            let (w, div) = stencil::order4(m);
            let mut sum = 0.0;
            for (j, &wj) in w.iter().enumerate() {
                if wj != 0.0 {
                    sum += wj * diffs[j];
                }
            }
            *entry = (sum / (div * h.powi(m as i32))).abs();
        }
        Ok(maxima)
    })?;
    let mut profile = vec![0.0f64; k + 1];
    for maxima in &per_point {
        for (p, &m) in profile.iter_mut().zip(maxima) {
            *p = p.max(m);
        }
    }
    Ok(profile)
}

/// max_m ‖D^m(u − f)‖∞ over the grid, m = 0..=k.
pub fn ck_error<U, F>(u: U, f: F, k: usize, grid: usize) -> Result<f64>
where
    U: Fn(f64) -> Result<f64> + Sync,
    F: Fn(f64) -> Result<f64> + Sync,
{
    Ok(ck_profile(u, f, k, grid)?.into_iter().fold(0.0, f64::max))
}

/// A span solution rescaled until it shadows x^β/β! on the unit ball.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledMonomial {
    pub u: SHarmonicFn,
    pub eta: f64,
    pub measured_error: f64,
}

/// Shrinks η geometrically from 1/2 until the C^k gap between
/// η^{−|β|}v(ηx) and x^β/β! meets the budget. The gap falls linearly in
/// η until the amplified span defect takes over; past that minimum the
/// scan aborts rather than walking to the floor.
pub fn rescale_for_monomial(
    sol: &SpanSolution,
    k: usize,
    budget: f64,
    grid: usize,
) -> Result<RescaledMonomial> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidInput(format!("rescale budget must be positive, got {budget}")));
    }
    let beta = sol.target.order();
    let fact = factorial(beta);
    let centre = sol.v.ball().p;
    let mut best: Option<RescaledMonomial> = None;
    for i in 1..=ETA_FLOOR_EXP {
        let eta = 2f64.powi(-i);
        let u_eta = sol.v.transform(eta, centre, beta)?;
        let gap = ck_error(
            |x| u_eta.extend(x),
            |x| Ok(x.powi(beta as i32) / fact),
            k,
            grid,
        )?;
        if gap <= budget {
            return Ok(RescaledMonomial { u: u_eta, eta, measured_error: gap });
        }
        match &best {
            Some(b) if gap > 10.0 * b.measured_error => break,
            Some(b) if gap >= b.measured_error => {}
            _ => best = Some(RescaledMonomial { u: u_eta, eta, measured_error: gap }),
        }
    }
    let floor = best.map(|b| (b.eta, b.measured_error));
    Err(Error::NonConvergence {
        context: "monomial rescale",
        detail: match floor {
            Some((eta, gap)) => format!(
                "budget {budget:.3e} unreachable; best C^{k} gap {gap:.3e} at eta {eta:.3e}"
            ),
            None => format!("budget {budget:.3e} unreachable at the first scale"),
        },
    })
}

/// How the pipeline turns monomials into s-harmonic pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMethod {
    /// One span solve per monomial, each rescaled to its own budget.
    TaylorRescale,
    /// One ridge-regularized least-squares fit over a fixed dictionary.
    GlobalLsq,
}

impl ApproxMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            ApproxMethod::TaylorRescale => "taylor-rescale",
            ApproxMethod::GlobalLsq => "global-lsq",
        }
    }
}

impl FromStr for ApproxMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor-rescale" => Ok(ApproxMethod::TaylorRescale),
            "global-lsq" => Ok(ApproxMethod::GlobalLsq),
            other => Err(Error::InvalidInput(format!(
                "unknown method {other:?}; expected taylor-rescale or global-lsq"
            ))),
        }
    }
}

/// Weighted sum of s-harmonic extensions; s-harmonic on the smallest of
/// the pieces' balls, identically zero beyond the largest support.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Approximant {
    pieces: Vec<(f64, SHarmonicFn)>,
}

impl Approximant {
    pub fn pieces(&self) -> &[(f64, SHarmonicFn)] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.pieces.len());
        for (w, piece) in &self.pieces {
            terms.push(w * piece.extend(x)?);
        }
        Ok(polyapprox::neumaier_sum(&terms))
    }

    pub fn support_radius(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(_, p)| p.support_radius())
            .fold(0.0, f64::max)
    }
}

/// What the pipeline measured about the approximant it emitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub method: String,
    /// (monomial degree, final η) per rescaled piece; empty for the
    /// least-squares route.
    pub monomial_etas: Vec<(usize, f64)>,
    /// Radius beyond which the approximant vanishes identically.
    pub r_total: f64,
    /// ‖D^m(u − f)‖∞ over the measurement grid, m = 0..=k.
    pub errors: Vec<f64>,
    pub residual: ResidualReport,
    pub wall_time_s: f64,
}

fn residual_of_pieces(u: &Approximant, quad: &QuadSettings) -> Result<ResidualReport> {
    let grid = residual_grid();
    if u.pieces.is_empty() {
        return Ok(ResidualReport {
            points: grid.into_iter().map(|x| (x, 0.0)).collect(),
            max_abs_residual: 0.0,
            scale: 0.0,
            relative_max: 0.0,
        });
    }
    let params = *u.pieces[0].1.params();
    let support = u.support_radius();
    let points = exec::try_map(&grid, |&x| {
        let y_max = support + x.abs() + 1.0;
        let v = fraclap::frac_laplacian(
            |t| u.eval(t).unwrap_or(f64::NAN),
            x,
            &params,
            fraclap::DEFAULT_H,
            y_max,
            quad,
        )?;
        Ok((x, v))
    })?;
    let mut scale = 0.0f64;
    for i in 0..=100 {
        let x = -0.95 + 1.9 * i as f64 / 100.0;
        scale = scale.max(u.eval(x)?.abs());
    }
    let max_abs_residual = points.iter().map(|(_, r)| r.abs()).fold(0.0f64, f64::max);
    let relative_max = if scale > 0.0 { max_abs_residual / scale } else { 0.0 };
    Ok(ResidualReport { points, max_abs_residual, scale, relative_max })
}

fn validated(k: usize, epsilon: f64) -> Result<()> {
    if k > PIPELINE_CK_MAX {
        return Err(Error::InvalidInput(format!(
            "pipeline measures C^k only up to k = {PIPELINE_CK_MAX}, got {k}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Builds a function that is a finite sum of s-harmonic extensions and
/// stays within ε of the polynomial target in C^k(B_1), then certifies
/// both the gap and the residual of the sum.
pub fn approximate(
    f: &Polynomial,
    k: usize,
    epsilon: f64,
    method: ApproxMethod,
    params: &FracParams,
    placement: &Placement,
    quad: &QuadSettings,
) -> Result<(Approximant, ApproximationReport)> {
    validated(k, epsilon)?;
    let start = Instant::now();
    let monomials: Vec<(usize, f64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(d, &c)| (d, c))
        .collect();
    for &(deg, _) in &monomials {
        if deg > crate::density::span::SPAN_ORDER_MAX {
            return Err(Error::OrderTooHigh {
                order: deg,
                max: crate::density::span::SPAN_ORDER_MAX,
            });
        }
    }

    let (pieces, monomial_etas) = match method {
        ApproxMethod::TaylorRescale => {
            let m = monomials.len().max(1) as f64;
            let mut pieces = Vec::new();
            let mut etas = Vec::new();
            for &(deg, coeff) in &monomials {
                let weight = coeff * factorial(deg);
                let budget = BUDGET_MARGIN * epsilon / (m * weight.abs());
                if budget < BUDGET_FLOOR {
                    return Err(Error::NonConvergence {
                        context: "budget allocation",
                        detail: format!(
                            "degree-{deg} piece would get budget {budget:.3e}, below the \
                             quadrature floor {BUDGET_FLOOR:.0e}"
                        ),
                    });
                }
                let dict =
                    build_dictionary(params, 2 * (deg + 1) + 4, placement, quad)?;
                let sol = span_solve(&dict, &MultiIndex::d1(deg), 0.0)?;
                let resc = rescale_for_monomial(&sol, k, budget, DEFAULT_GRID)?;
                etas.push((deg, resc.eta));
                pieces.push((weight, resc.u));
            }
            (pieces, etas)
        }
        ApproxMethod::GlobalLsq => {
            if monomials.is_empty() {
                (Vec::new(), Vec::new())
            } else {
                let dict = build_dictionary(params, LSQ_DICT_COUNT, placement, quad)?;
                // fit nodes stay clear of the boundary margin required
                // by the jet evaluator
                let nodes: Vec<f64> = (0..DEFAULT_GRID)
                    .map(|i| -0.95 + 1.9 * i as f64 / (DEFAULT_GRID - 1) as f64)
                    .collect();
                let jets = exec::try_map(dict.members(), |mem| {
                    nodes
                        .iter()
                        .map(|&x| mem.extend_derivatives(x, k))
                        .collect::<Result<Vec<_>>>()
                })?;
                let mut derivs = Vec::with_capacity(k + 1);
                derivs.push(f.clone());
                for _ in 0..k {
                    derivs.push(derivs.last().unwrap().derivative());
                }
                let rows = nodes.len() * (k + 1);
                let a = nalgebra::DMatrix::from_fn(rows, dict.len(), |r, c| {
                    let (m, i) = (r / nodes.len(), r % nodes.len());
                    jets[c][i].get(m)
                });
                let b = nalgebra::DVector::from_fn(rows, |r, _| {
                    let (m, i) = (r / nodes.len(), r % nodes.len());
                    derivs[m].eval(nodes[i])
                });
                let svd = a.svd(true, true);
                let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
                let lambda = RIDGE_FACTOR * sigma_max;
                let ut_b = svd.u.as_ref().expect("svd with u").transpose() * &b;
                let filtered = nalgebra::DVector::from_fn(ut_b.nrows(), |i, _| {
                    let s = svd.singular_values[i];
                    ut_b[i] * s / (s * s + lambda * lambda)
                });
                let coeffs = svd.v_t.as_ref().expect("svd with v_t").transpose() * filtered;
                let pieces = coeffs
                    .iter()
                    .zip(dict.members())
                    .map(|(&c, mem)| (c, mem.clone()))
                    .collect();
                (pieces, Vec::new())
            }
        }
    };

    let u = Approximant { pieces };
    let errors = ck_profile(|x| u.eval(x), |x| Ok(f.eval(x)), k, DEFAULT_GRID)?;
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    if worst > epsilon {
        return Err(Error::NonConvergence {
            context: "approximation",
            detail: format!(
                "measured C^{k} gap {worst:.3e} exceeds the requested tolerance {epsilon:.3e}"
            ),
        });
    }
    let residual = residual_of_pieces(&u, quad)?;
    let report = ApproximationReport {
        method: method.tag().to_string(),
        monomial_etas,
        r_total: u.support_radius(),
        errors,
        residual,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((u, report))
}

/// Smooth targets go through the polynomial approximation stage first:
/// a third of the tolerance buys a polynomial, a third covers its
/// truncation to the degree the span engine accepts, and the rest pays
/// for the s-harmonic assembly. The returned report measures against
/// the original target.
pub fn approximate_smooth<F>(
    f: F,
    k: usize,
    epsilon: f64,
    method: ApproxMethod,
    params: &FracParams,
    placement: &Placement,
    quad: &QuadSettings,
) -> Result<(Approximant, ApproximationReport, Polynomial)>
where
    F: Fn(f64) -> f64 + Sync,
{
    validated(k, epsilon)?;
    let start = Instant::now();
    let stage = epsilon / 3.0;
    let poly = weierstrass_approx(&f, k, stage)?.polynomial;
    let truncated = poly.truncated(crate::density::span::SPAN_ORDER_MAX);

    // the discarded tail, measured exactly through derivative chains
    let mut tail_coeffs = poly.coeffs().to_vec();
    for c in tail_coeffs.iter_mut().take(truncated.coeffs().len()) {
        *c = 0.0;
    }
    let mut tail = Polynomial::new(tail_coeffs);
    let mut tail_gap = 0.0f64;
    for _ in 0..=k {
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            tail_gap = tail_gap.max(tail.eval(x).abs());
        }
        tail = tail.derivative();
    }
    if tail_gap > stage {
        return Err(Error::NonConvergence {
            context: "polynomial truncation",
            detail: format!(
                "degree cap leaves a C^{k} tail of {tail_gap:.3e}, above the stage budget \
                 {stage:.3e}; the target is too rough for the span engine at this tolerance"
            ),
        });
    }

    let (u, mut report) = approximate(&truncated, k, stage, method, params, placement, quad)?;
    report.errors = ck_profile(|x| u.eval(x), |x| Ok(f(x)), k, DEFAULT_GRID)?;
    let worst = report.errors.iter().cloned().fold(0.0, f64::max);
    if worst > epsilon {
        return Err(Error::NonConvergence {
            context: "approximation",
            detail: format!(
                "measured C^{k} gap {worst:.3e} against the smooth target exceeds {epsilon:.3e}"
            ),
        });
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((u, report, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::span::{build_dictionary, span_solve, Placement, SPAN_TOL};

    fn params() -> FracParams {
        FracParams::new(0.5, 1).unwrap()
    }

    fn solution(order: usize) -> SpanSolution {
        let dict = build_dictionary(
            &params(),
            2 * (order + 1) + 4,
            &Placement::default(),
            &QuadSettings::default(),
        )
        .unwrap();
        span_solve(&dict, &MultiIndex::d1(order), 0.0).unwrap()
    }

    #[test]
    fn ck_gap_of_identical_functions_is_zero() {
        let gap = ck_error(|x: f64| Ok(x.sin()), |x: f64| Ok(x.sin()), 3, 41).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn constant_offset_shows_only_at_order_zero() {
        let profile =
            ck_profile(|x: f64| Ok(x.cos() + 0.25), |x: f64| Ok(x.cos()), 2, 41).unwrap();
        assert!((profile[0] - 0.25).abs() <= 1e-14);
        assert!(profile[1].abs() <= 1e-12);
        assert!(profile[2].abs() <= 1e-10);
    }

    #[test]
    fn profile_matches_exact_derivatives_of_a_cubic() {
        // stencils of order four are exact on cubics, so the profile
        // equals the grid maxima of the closed-form derivatives
        let p = Polynomial::new(vec![0.0, -1.0, 0.0, 1.0]);
        let profile = ck_profile(|x| Ok(p.eval(x)), |_| Ok(0.0), 2, 41).unwrap();
        let h = 2.0 / 40.0;
        let mut want = [0.0f64; 3];
        for i in 0..41 {
            let x = -1.0 + i as f64 * h;
            want[0] = want[0].max((x.powi(3) - x).abs());
            want[1] = want[1].max((3.0 * x * x - 1.0).abs());
            want[2] = want[2].max((6.0 * x).abs());
        }
        for (got, want) in profile.iter().zip(&want) {
            assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn measurement_arguments_are_validated() {
        assert!(matches!(
            ck_error(|_| Ok(0.0), |_| Ok(0.0), 5, 41),
            Err(Error::OrderTooHigh { order: 5, .. })
        ));
        assert!(matches!(
            ck_error(|_| Ok(0.0), |_| Ok(0.0), 1, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rescaling_preserves_the_target_jet() {
        let sol = solution(2);
        for i in [2, 3] {
            let eta = 2f64.powi(-i);
            let u = sol.v.transform(eta, 0.0, 2).unwrap();
            let jet = u.extend_derivatives(0.0, 3).unwrap();
            assert!((jet.get(2) - 1.0).abs() <= 1e-5, "eta {eta}: {}", jet.get(2));
            assert!(jet.get(0).abs() <= 32.0 * SPAN_TOL);
            assert!(jet.get(1).abs() <= 16.0 * SPAN_TOL);
        }
        // the first uncontrolled order shrinks linearly in η
        let j3 = |i: i32| {
            let u = sol.v.transform(2f64.powi(-i), 0.0, 2).unwrap();
            u.extend_derivatives(0.0, 3).unwrap().get(3)
        };
        let ratio = j3(3) / j3(2);
        assert!((ratio - 0.5).abs() <= 1e-6, "ratio {ratio}");
    }

    #[test]
    fn rescale_meets_a_generous_budget() {
        let sol = solution(1);
        let out = rescale_for_monomial(&sol, 1, 0.2, DEFAULT_GRID).unwrap();
        assert!(out.measured_error <= 0.2);
        assert!(out.eta >= 2f64.powi(-9), "eta {}", out.eta);
        let jet = out.u.extend_derivatives(0.0, 1).unwrap();
        assert!((jet.get(1) - 1.0).abs() <= 1e-5);
    }

    #[test]
    fn rescale_gap_halves_in_the_settled_regime() {
        // the near-mirror placement leaves D³v(0) small, so the gap
        // decays like η² at first; by η = 2^−7 the halving ratio sits
        // inside the certification window and stays there
        let sol = solution(2);
        let gap = |i: i32| {
            let u = sol.v.transform(2f64.powi(-i), 0.0, 2).unwrap();
            ck_error(|x| u.extend(x), |x: f64| Ok(x * x / 2.0), 1, DEFAULT_GRID).unwrap()
        };
        let (g7, g8, g9) = (gap(7), gap(8), gap(9));
        assert!(g8 < g7 && g9 < g8);
        for ratio in [g8 / g7, g9 / g8] {
            assert!(ratio > 0.3 && ratio < 0.7, "ratio {ratio}");
        }
    }

    #[test]
    fn rescale_reports_its_floor() {
        let sol = solution(2);
        match rescale_for_monomial(&sol, 0, 1e-9, DEFAULT_GRID) {
            Err(Error::NonConvergence { context, detail }) => {
                assert_eq!(context, "monomial rescale");
                assert!(detail.contains("best"), "{detail}");
            }
            other => panic!("expected the floor, got {other:?}"),
        }
    }

    #[test]
    fn zero_target_yields_the_empty_sum() {
        let (u, report) = approximate(
            &Polynomial::zero(),
            1,
            0.1,
            ApproxMethod::TaylorRescale,
            &params(),
            &Placement::default(),
            &QuadSettings::default(),
        )
        .unwrap();
        assert!(u.pieces().is_empty());
        assert_eq!(u.eval(0.3).unwrap(), 0.0);
        assert_eq!(report.r_total, 0.0);
        assert!(report.errors.iter().all(|&e| e == 0.0));
        assert_eq!(report.residual.relative_max, 0.0);
    }

    #[test]
    fn square_target_is_certified_end_to_end() {
        let f = Polynomial::new(vec![1.0, 0.0, -1.0]);
        let (u, report) = approximate(
            &f,
            0,
            0.1,
            ApproxMethod::TaylorRescale,
            &params(),
            &Placement::default(),
            &QuadSettings::default(),
        )
        .unwrap();
        assert!(report.errors[0] <= 0.1, "error {}", report.errors[0]);
        assert!(
            report.residual.relative_max <= 1e-3,
            "residual {}",
            report.residual.relative_max
        );
        assert_eq!(report.monomial_etas.len(), 2);
        let r = report.r_total;
        assert!(r > 0.0);
        for i in 1..=10 {
            let x = r * (1.0 + 0.3 * i as f64);
            assert_eq!(u.eval(x).unwrap(), 0.0, "x {x}");
            assert_eq!(u.eval(-x).unwrap(), 0.0);
        }
    }

    #[test]
    fn pipeline_validates_inputs() {
        let f = Polynomial::new(vec![1.0]);
        let p = params();
        let pl = Placement::default();
        let q = QuadSettings::default();
        assert!(matches!(
            approximate(&f, 4, 0.1, ApproxMethod::TaylorRescale, &p, &pl, &q),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            approximate(&f, 0, 0.0, ApproxMethod::TaylorRescale, &p, &pl, &q),
            Err(Error::InvalidInput(_))
        ));
        let quintic = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            approximate(&quintic, 0, 0.1, ApproxMethod::TaylorRescale, &p, &pl, &q),
            Err(Error::OrderTooHigh { order: 5, .. })
        ));
        assert!("nonsense".parse::<ApproxMethod>().is_err());
        assert_eq!("global-lsq".parse::<ApproxMethod>().unwrap(), ApproxMethod::GlobalLsq);
    }

    #[test]
    fn global_lsq_fits_the_square_tightly() {
        // the ridge fit over ten fixed members lands near 2e−3; the
        // budget below leaves a 5x margin while keeping the support
        // bound sharp
        let f = Polynomial::new(vec![1.0, 0.0, -1.0]);
        let (u, report) = approximate(
            &f,
            0,
            0.01,
            ApproxMethod::GlobalLsq,
            &params(),
            &Placement::default(),
            &QuadSettings::default(),
        )
        .unwrap();
        assert!(report.errors[0] <= 0.01, "error {}", report.errors[0]);
        assert!(report.residual.relative_max <= 1e-3);
        assert!(report.monomial_etas.is_empty());
        assert_eq!(report.method, "global-lsq");
        assert!(report.r_total <= 6.0, "r_total {}", report.r_total);
        assert_eq!(u.pieces().len(), 10);
    }

    #[test]
    fn smooth_target_goes_through_the_polynomial_stage() {
        let (u, report, poly) = approximate_smooth(
            |x: f64| x.cos(),
            0,
            0.5,
            ApproxMethod::TaylorRescale,
            &params(),
            &Placement::default(),
            &QuadSettings::default(),
        )
        .unwrap();
        assert!(poly.degree() <= 4);
        assert!(!poly.is_zero());
        assert!(report.errors[0] <= 0.5, "error {}", report.errors[0]);
        assert!(report.residual.relative_max <= 1e-3);
        assert!(u.support_radius() > 0.0);
    }

    #[test]
    fn infeasible_budget_is_reported_before_any_solve() {
        let f = Polynomial::new(vec![1.0, 0.0, -1.0]);
        match approximate(
            &f,
            0,
            1e-13,
            ApproxMethod::TaylorRescale,
            &params(),
            &Placement::default(),
            &QuadSettings::default(),
        ) {
            Err(Error::NonConvergence { context, .. }) => {
                assert_eq!(context, "budget allocation")
            }
            other => panic!("expected a budget failure, got {other:?}"),
        }
    }
}
