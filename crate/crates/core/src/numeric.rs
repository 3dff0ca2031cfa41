//! Reduction helpers with a fixed summation order.
//!
//! All quadratures in the crate go through [`pairwise_sum`] so that results
//! do not depend on how a parallel map was scheduled: values are first
//! collected in index order, then reduced by the same binary tree.

const BLOCK: usize = 16;

/// Pairwise (cascade) summation. Error grows as O(log n) instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(x)` over `xs`, without an intermediate allocation for
/// short inputs.
pub fn pairwise_sum_by<T>(xs: &[T], f: &impl Fn(&T) -> f64) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for x in xs {
            acc += f(x);
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum_by(&xs[..mid], f) + pairwise_sum_by(&xs[mid..], f)
}

/// Gregory end corrections (ten differences), in units of the step, for
/// the first eleven samples of a trapezoid rule started at the left end.
pub fn gregory_end_weights() -> [f64; 11] {
    const C: [f64; 10] = [
        1.0 / 12.0,
        1.0 / 24.0,
        19.0 / 720.0,
        3.0 / 160.0,
        863.0 / 60480.0,
        275.0 / 24192.0,
        33953.0 / 3628800.0,
        8183.0 / 1036800.0,
        3250433.0 / 479001600.0,
        4671.0 / 788480.0,
    ];
    let mut w = [0.0; 11];
    for (k, c) in C.iter().enumerate() {
        let m = k + 1;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let mut binom = 1.0;
        for (i, wi) in w.iter_mut().enumerate().take(m + 1) {
            let alt = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
            *wi += sign * c * alt * binom;
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
    }
    w
}

/// Maximum of a slice, ignoring NaN; `0.0` for an empty slice.
pub fn max_or_zero(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

/// `(Σ |x|^p)^{1/p}` with `p = ∞` meaning the maximum, scaled by `step`
/// (the quadrature weight) when finite.
pub fn lp_sum(xs: &[f64], p: f64, step: f64) -> f64 {
    if p.is_infinite() {
        return xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    // Normalise by the maximum so that large p cannot overflow.
    let s = pairwise_sum_by(xs, &|x: &f64| (x.abs() / scale).powf(p));
    scale * (s * step).powf(1.0 / p)
}
