//! Order-4 central difference stencils on the offsets -3..=3, shared by
//! every module that measures derivatives numerically.

/// Number of stencil offsets; offset i corresponds to x + (i-3)h.
pub(crate) const WIDTH: usize = 7;

/// Highest derivative order provided.
pub(crate) const MAX_ORDER: usize = 4;

/// Weights and divisor for D^m: Σ_i w_i·f(x + (i-3)h) / (div·h^m).
pub(crate) fn order4(m: usize) -> (&'static [f64; WIDTH], f64) {
    match m {
        0 => (&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1.0),
        1 => (&[0.0, 1.0, -8.0, 0.0, 8.0, -1.0, 0.0], 12.0),
        2 => (&[0.0, -1.0, 16.0, -30.0, 16.0, -1.0, 0.0], 12.0),
        3 => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
        4 => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
        _ => unreachable!("stencil order is validated by callers"),
    }
}

/// D^m f(x) from the order-4 stencil at step h.
pub(crate) fn apply<F: Fn(f64) -> f64>(f: &F, x: f64, m: usize, h: f64) -> f64 {
    let (w, div) = order4(m);
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0.0 {
            acc += wi * f(x + (i as f64 - 3.0) * h);
        }
    }
    acc / (div * h.powi(m as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartic() {
        // p(x) = x⁴ + 2x³ - x; order-4 stencils reproduce every
        // derivative of a quartic exactly up to rounding
        let p = |x: f64| x.powi(4) + 2.0 * x.powi(3) - x;
        let d = [
            |x: f64| x.powi(4) + 2.0 * x.powi(3) - x,
            |x: f64| 4.0 * x.powi(3) + 6.0 * x.powi(2) - 1.0,
            |x: f64| 12.0 * x.powi(2) + 12.0 * x,
            |x: f64| 24.0 * x + 12.0,
            |_: f64| 24.0,
        ];
        for m in 0..=MAX_ORDER {
            let got = apply(&p, 0.3, m, 0.05);
            assert!(
                (got - d[m](0.3)).abs() <= 1e-9,
                "order {m}: {got} vs {}",
                d[m](0.3)
            );
        }
    }

    #[test]
    fn weights_sum_to_zero_for_derivatives() {
        for m in 1..=MAX_ORDER {
            let (w, _) = order4(m);
            let sum: f64 = w.iter().sum();
            assert_eq!(sum, 0.0, "order {m}");
        }
    }
}
