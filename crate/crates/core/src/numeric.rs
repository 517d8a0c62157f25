//! Scalar helpers shared across modules.

/// x·log₂x with the 0·log0 ≡ 0 convention (also absorbs tiny negative
/// eigenvalues produced by rounding).
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits. Caller guarantees p ∈ [0, 1].
pub(crate) fn binary_entropy_raw(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Outcome of a monotone bisection solve.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Bisection {
    pub value: f64,
    pub iterations: u32,
    pub residual: f64,
}

/// Bisects a monotone `f` on [lo, hi] for `f(x) = target`, assuming the
/// target is bracketed. `increasing` states the monotonicity. Runs until the
/// interval collapses to adjacent floats (or the iteration cap), then keeps
/// the endpoint with the smaller residual; the caller decides whether that
/// residual counts as converged.
pub(crate) fn bisect_monotone(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    increasing: bool,
    max_iter: u32,
) -> Bisection {
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let fm = f(mid);
        if fm == target {
            lo = mid;
            hi = mid;
            break;
        }
        let go_right = if increasing { fm < target } else { fm > target };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (r_lo, r_hi) = ((f(lo) - target).abs(), (f(hi) - target).abs());
    let (value, residual) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    Bisection { value, iterations, residual }
}
