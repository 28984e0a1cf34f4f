//! Scalar root bracketing and one-dimensional maximization.

/// Bisects a sign-changing bracket down to adjacent floating-point numbers
/// and returns whichever endpoint has the smaller residual.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    let mut best_hi = (hi, f_hi);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            best_hi = (mid, f_mid);
        }
    }
    if f_lo.abs() <= best_hi.1.abs() {
        lo
    } else {
        best_hi.0
    }
}

/// Finds every root of `f` on `[lo, hi]` visible on a uniform grid of
/// `subintervals` cells: exact zeros at grid points plus one bisected root
/// per cell whose endpoints differ in sign. Roots come back in increasing order.
pub fn scan_roots<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, subintervals: usize) -> Vec<f64> {
    let width = (hi - lo) / subintervals as f64;
    let points: Vec<f64> = (0..=subintervals)
        .map(|i| if i == subintervals { hi } else { lo + width * i as f64 })
        .collect();
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..=subintervals {
        if values[i] == 0.0 {
            roots.push(points[i]);
        }
        if i < subintervals && values[i] * values[i + 1] < 0.0 {
            roots.push(bisect(f, points[i], points[i + 1]));
        }
    }
    roots
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if x1 >= x2 {
            break;
        }
    }
    0.5 * (lo + hi)
}
