//! Truncated Taylor-jet arithmetic.
//!
//! A jet is the coefficient slice [f(x0), f'(x0), f''(x0)/2!, ...] of
//! a Taylor expansion, truncated at a fixed length. Products truncate
//! to the shorter operand's length; powers use the standard recurrence
//! k·b0·w_k = Σ_{j=1..k} (α·j − (k−j))·b_j·w_{k−j}, which needs a
//! strictly positive leading coefficient.

/// Cauchy product truncated to `a.len().min(b.len())` coefficients.
pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..=k {
            acc += a[i] * b[k - i];
        }
        *slot = acc;
    }
    out
}

/// Jet of b(t)^alpha. Requires b[0] > 0 so the branch is unambiguous.
pub(crate) fn pow(b: &[f64], alpha: f64) -> Vec<f64> {
    assert!(
        b[0] > 0.0,
        "jet power needs a positive leading coefficient, got {}",
        b[0]
    );
    let n = b.len();
    let mut w = vec![0.0; n];
    w[0] = b[0].powf(alpha);
    for k in 1..n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += (alpha * j as f64 - (k - j) as f64) * b[j] * w[k - j];
        }
        w[k] = acc / (k as f64 * b[0]);
    }
    w
}
