//! Fractional Poisson kernel for the ball and the s-harmonic
//! extension of compactly supported bump data.
//!
//! The kernel on B_r(p) in dimension n is
//!
//!   P(x, y) = c(n,s) · ((r² − |x−p|²)/(|y−p|² − r²))^s · |x−y|^{−n},
//!
//! with c(n,s) = Γ(n/2)·sin(πs)·π^{−(n/2+1)}. Convolving exterior data
//! against P produces the unique function that matches the data outside
//! the ball and has vanishing fractional Laplacian of order s inside.
//! The normalization is pinned down operationally: the extension of
//! g ≡ 1 must again be 1, which [`kernel_mass`] verifies by direct
//! integration of the kernel over the exterior.
//!
//! Evaluation is 1-D throughout (`n = 1` is enforced where a quadrature
//! runs); the constant and kernel formulas keep `n` generic.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::density::DerivativeVector;
use crate::error::{Error, Result};
use crate::jet;
use crate::quadrature::{self, QuadSettings};

/// Minimal gap between a bump support and the closed extension ball,
/// as a fraction of the radius. Keeps the (|y−p|²−r²)^{−s} weight
/// bounded on the support of the data.
pub const CLEARANCE_MIN: f64 = 0.05;

/// Interior evaluation of derivatives stays this fraction of r away
/// from the boundary; kernel x-derivatives blow up at ∂B.
pub const DERIVATIVE_BOUNDARY_MARGIN: f64 = 1e-3;

/// Highest derivative order served by [`SHarmonicFn::extend_derivatives`].
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Fractional order s ∈ (0,1) and ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    s: f64,
    n: usize,
}

impl FracParams {
    /// Strictly fractional order only: s = 0 and s = 1 are rejected.
    pub fn new(s: f64, n: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidInput(format!(
                "fractional order must lie strictly in (0,1), got {s}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self { s, n })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn require_1d(&self, what: &str) -> Result<()> {
        if self.n != 1 {
            return Err(Error::InvalidInput(format!(
                "{what} is implemented for n = 1 only, got n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// The extension ball B_r(p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub p: f64,
    pub r: f64,
}

impl Ball {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && p.is_finite()) {
            return Err(Error::Geometry(format!(
                "ball needs finite center and positive radius, got p = {p}, r = {r}"
            )));
        }
        Ok(Self { p, r })
    }
}

/// The standard C^∞ profile exp(1 − 1/(1−t²)) on |t| < 1, zero
/// elsewhere. Range is [0,1] with the maximum at t = 0.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 || !t.is_finite() {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - t * t)).exp()
}

/// One scaled translate of the profile: amplitude·profile((x−center)/half_width).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64, amplitude: f64) -> Result<Self> {
        let b = Self {
            center,
            half_width,
            amplitude,
        };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0)
            || !self.half_width.is_finite()
            || !self.center.is_finite()
            || !self.amplitude.is_finite()
        {
            return Err(Error::InvalidInput(format!(
                "bump needs finite center/amplitude and positive half-width, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * bump_profile((x - self.center) / self.half_width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Finite sum of bumps; the exterior datum g.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExteriorData {
    bumps: Vec<Bump>,
}

impl ExteriorData {
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        for b in &bumps {
            b.validate()?;
        }
        Ok(Self { bumps })
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }

    /// Smallest R with every bump support inside B_R(0); 0 when empty.
    pub fn support_radius(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.center.abs() + b.half_width)
            .fold(0.0, f64::max)
    }
}

/// Normalization constant c(n,s) = Γ(n/2)·sin(πs)·π^{−(n/2+1)}.
pub fn poisson_constant(params: &FracParams) -> f64 {
    let half_n = params.n as f64 / 2.0;
    gamma(half_n) * (std::f64::consts::PI * params.s).sin()
        * std::f64::consts::PI.powf(-(half_n + 1.0))
}

/// Kernel value P(x,y) for x strictly inside and y strictly outside
/// the closed ball.
pub fn poisson_kernel(params: &FracParams, ball: &Ball, x: f64, y: f64) -> Result<f64> {
    params.require_1d("poisson_kernel")?;
    let dx = x - ball.p;
    let dy = y - ball.p;
    if dx.abs() >= ball.r {
        return Err(Error::Geometry(format!(
            "kernel point x = {x} is not interior to the ball"
        )));
    }
    if dy.abs() <= ball.r {
        return Err(Error::Geometry(format!(
            "kernel point y = {y} is not exterior to the closed ball"
        )));
    }
    let ratio = (ball.r * ball.r - dx * dx) / (dy * dy - ball.r * ball.r);
    Ok(poisson_constant(params) * ratio.powf(params.s) / (x - y).abs())
}

/// ∫_{exterior} P(x,y) dy for x strictly inside the ball.
///
/// The (|y−p|²−r²)^{−s} factor is singular at the boundary and the
/// domain is unbounded; the integral is split at |y−p| = 2r, the inner
/// part handled by the endpoint-singular rule and the tail mapped to a
/// bounded power-weight integral by t = 1/(y−p). The result must be 1:
/// this is the operational check of the kernel normalization.
pub fn kernel_mass(params: &FracParams, ball: &Ball, x: f64, quad: &QuadSettings) -> Result<f64> {
    params.require_1d("kernel_mass")?;
    let d = x - ball.p;
    if d.abs() >= ball.r {
        return Err(Error::Geometry(format!(
            "mass point x = {x} is not interior to the ball"
        )));
    }
    Ok(one_sided_mass(params, ball.r, d, quad)? + one_sided_mass(params, ball.r, -d, quad)?)
}

/// Mass from the right exterior component (ŷ = y−p ∈ (r, ∞)) at
/// centered abscissa d = x−p.
fn one_sided_mass(params: &FracParams, r: f64, d: f64, quad: &QuadSettings) -> Result<f64> {
    let s = params.s;
    let amp = poisson_constant(params) * (r * r - d * d).powf(s);
    // (ŷ²−r²)^{−s} = (ŷ−r)^{−s}·(ŷ+r)^{−s}, first factor removed by the rule
    let near = quadrature::integrate_endpoint_singular(
        |y| amp * (y + r).powf(-s) / (y - d),
        r,
        2.0 * r,
        s,
        quad,
    )?;
    // t = 1/ŷ turns the tail into ∫₀^{1/(2r)} t^{2s−1}·ψ(t) dt with ψ smooth
    let tail = quadrature::integrate_power_weight(
        |t| amp * (1.0 - r * r * t * t).powf(-s) / (1.0 - t * d),
        0.0,
        1.0 / (2.0 * r),
        2.0 * s - 1.0,
        quad,
    )?;
    Ok(near + tail)
}

/// Wire format for an s-harmonic function: parameters, ball, bumps.
/// Quadrature settings are runtime configuration, not data.
#[derive(Serialize, Deserialize)]
struct Wire {
    s: f64,
    n: usize,
    ball: Ball,
    bumps: Vec<Bump>,
}

/// Exterior bump data together with its s-harmonic extension into a
/// ball. Evaluation returns the data itself outside the closed ball
/// and the Poisson integral inside. Immutable after construction; all
/// evaluations are pure and may run concurrently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Wire", into = "Wire")]
pub struct SHarmonicFn {
    params: FracParams,
    ball: Ball,
    exterior: ExteriorData,
    quad: QuadSettings,
}

impl SHarmonicFn {
    /// Validates the geometry: every bump support must be disjoint
    /// from the closed ball with gap at least [`CLEARANCE_MIN`]·r.
    pub fn new(
        params: FracParams,
        ball: Ball,
        exterior: ExteriorData,
        quad: QuadSettings,
    ) -> Result<Self> {
        params.require_1d("SHarmonicFn")?;
        Ball::new(ball.p, ball.r)?;
        for b in exterior.bumps() {
            b.validate()?;
            let gap = (b.center - ball.p).abs() - b.half_width - ball.r;
            if gap < CLEARANCE_MIN * ball.r {
                return Err(Error::Geometry(format!(
                    "bump support {:?} too close to ball B_{}({}): clearance {gap:.3e} < {:.3e}",
                    b.support(),
                    ball.r,
                    ball.p,
                    CLEARANCE_MIN * ball.r
                )));
            }
        }
        Ok(Self {
            params,
            ball,
            exterior,
            quad,
        })
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn exterior(&self) -> &ExteriorData {
        &self.exterior
    }

    pub fn quad(&self) -> &QuadSettings {
        &self.quad
    }

    /// Same function, different quadrature budget.
    pub fn with_quad(mut self, quad: QuadSettings) -> Self {
        self.quad = quad;
        self
    }

    /// Smallest R with the ball and every bump support inside B_R(0);
    /// the represented function vanishes outside B_R.
    pub fn support_radius(&self) -> f64 {
        (self.ball.p.abs() + self.ball.r).max(self.exterior.support_radius())
    }

    /// Pointwise value: exterior data outside the open ball, Poisson
    /// integral of the data inside.
    pub fn extend(&self, x: f64) -> Result<f64> {
        let dx = x - self.ball.p;
        if dx.abs() >= self.ball.r {
            return Ok(self.exterior.eval(x));
        }
        let s = self.params.s;
        let c = poisson_constant(&self.params);
        let amp = c * (self.ball.r * self.ball.r - dx * dx).powf(s);
        let mut total = 0.0;
        for b in self.exterior.bumps() {
            let (lo, hi) = b.support();
            // clearance keeps both factors smooth on [lo, hi]
            let v = quadrature::integrate(
                |y| {
                    let dy = y - self.ball.p;
                    let w = (dy * dy - self.ball.r * self.ball.r).powf(-s);
                    amp * w * b.eval(y) / (x - y).abs()
                },
                lo,
                hi,
                &self.quad,
            )?;
            total += v;
        }
        Ok(total)
    }

    /// All derivatives D^k u(x), k ≤ order, by differentiating the
    /// kernel in x under the integral sign. The x-dependence
    /// (r²−(x−p)²)^s·|x−y|^{−1} is expanded as a Taylor jet about x,
    /// giving every order in one pass per bump; each jet component is
    /// then integrated against the data.
    pub fn extend_derivatives(&self, x: f64, order: usize) -> Result<DerivativeVector> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let dx = x - self.ball.p;
        let dist = self.ball.r - dx.abs();
        let min = DERIVATIVE_BOUNDARY_MARGIN * self.ball.r;
        if dist < min {
            return Err(Error::TooCloseToBoundary { dist, min });
        }
        let s = self.params.s;
        let r = self.ball.r;
        let c = poisson_constant(&self.params);
        let len = order + 1;

        // jet of (r² − (·−p)²)^s about x, shared across bumps
        let mut base_ball = vec![0.0; len];
        base_ball[0] = r * r - dx * dx;
        if len > 1 {
            base_ball[1] = -2.0 * dx;
        }
        if len > 2 {
            base_ball[2] = -1.0;
        }
        let jet_ball = jet::pow(&base_ball, s);

        let mut deriv = vec![0.0; len];
        for b in self.exterior.bumps() {
            let (lo, hi) = b.support();
            let right_side = b.center > self.ball.p;
            for k in 0..len {
                let v = quadrature::integrate(
                    |y| {
                        let dy = y - self.ball.p;
                        let w = c * (dy * dy - r * r).powf(-s) * b.eval(y);
                        let mut base_dist = vec![0.0; k + 1];
                        // |·−y| jet about x; the bump sits on one side so the sign is fixed
                        if right_side {
                            base_dist[0] = y - x;
                            if k >= 1 {
                                base_dist[1] = -1.0;
                            }
                        } else {
                            base_dist[0] = x - y;
                            if k >= 1 {
                                base_dist[1] = 1.0;
                            }
                        }
                        let jet_dist = jet::pow(&base_dist, -1.0);
                        w * jet::mul(&jet_ball[..k + 1], &jet_dist)[k]
                    },
                    lo,
                    hi,
                    &self.quad,
                )?;
                deriv[k] += v;
            }
        }
        // Taylor coefficient -> derivative
        let mut fact = 1.0;
        for (k, d) in deriv.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *d *= fact;
        }
        Ok(DerivativeVector::new(deriv))
    }

    /// The function x ↦ η^{−power}·u(ηx + p), represented exactly by
    /// the affine action on the ball and bumps. With p at the ball
    /// center the new ball is B_{r/η}(0). No quadrature is involved.
    pub fn transform(&self, eta: f64, p: f64, power: usize) -> Result<SHarmonicFn> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::BadEta(eta));
        }
        self.affine_rescaled(eta, p, eta.powi(-(power as i32)))
    }

    /// w(x) = amp·u(λx + shift) as a new SHarmonicFn; exact algebra on
    /// the representation, valid for any λ > 0.
    pub(crate) fn affine_rescaled(&self, lambda: f64, shift: f64, amp: f64) -> Result<SHarmonicFn> {
        if !(lambda > 0.0) || !lambda.is_finite() || !shift.is_finite() || !amp.is_finite() {
            return Err(Error::InvalidInput(format!(
                "affine rescale needs positive finite scale, got lambda = {lambda}, shift = {shift}, amp = {amp}"
            )));
        }
        let ball = Ball::new((self.ball.p - shift) / lambda, self.ball.r / lambda)?;
        let bumps = self
            .exterior
            .bumps()
            .iter()
            .map(|b| Bump {
                center: (b.center - shift) / lambda,
                half_width: b.half_width / lambda,
                amplitude: amp * b.amplitude,
            })
            .collect();
        SHarmonicFn::new(self.params, ball, ExteriorData::new(bumps)?, self.quad.clone())
    }
}

impl TryFrom<Wire> for SHarmonicFn {
    type Error = Error;

    fn try_from(w: Wire) -> Result<Self> {
        SHarmonicFn::new(
            FracParams::new(w.s, w.n)?,
            w.ball,
            ExteriorData::new(w.bumps)?,
            QuadSettings::default(),
        )
    }
}

impl From<SHarmonicFn> for Wire {
    fn from(f: SHarmonicFn) -> Wire {
        Wire {
            s: f.params.s,
            n: f.params.n,
            ball: f.ball,
            bumps: f.exterior.bumps,
        }
    }
}
