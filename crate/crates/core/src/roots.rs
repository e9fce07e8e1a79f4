//! Real-root isolation and extrema for univariate polynomials given by
//! ascending coefficients.

use alloc::vec::Vec;

/// Horner evaluation of `Σ c[k] t^k`.
#[inline]
pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck * k as f64)
        .collect()
}

fn trim(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

/// Refines a root bracketed by `[lo, hi]` (sign change or exact zero) by
/// bisection down to `tol`.
fn refine(c: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = eval(c, lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = eval(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of the polynomial in the closed interval `[lo, hi]`, in
/// increasing order. The zero polynomial yields no roots.
///
/// Roots of the derivative split the interval into monotone pieces; each piece
/// holds at most one root, located by bisection to relative tolerance `tol`.
pub fn real_roots_in(c: &[f64], lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let c = trim(c);
    let mut out = Vec::new();
    match c.len() {
        0 | 1 => return out,
        2 => {
            let r = -c[0] / c[1];
            if r >= lo && r <= hi {
                out.push(r);
            }
            return out;
        }
        _ => {}
    }
    let crit = real_roots_in(&derivative(c), lo, hi, tol);
    let mut knots = Vec::with_capacity(crit.len() + 2);
    knots.push(lo);
    knots.extend(crit.into_iter().filter(|&r| r > lo && r < hi));
    knots.push(hi);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            out.push(a);
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            out.push(refine(c, a, b, tol));
        }
    }
    if eval(c, hi) == 0.0 {
        out.push(hi);
    }
    out.dedup_by(|a, b| (*a - *b).abs() <= tol * (1.0 + a.abs()));
    out
}

/// Maximum of `|p|` over `[lo, hi]` and a maximizer. Candidates are the
/// endpoints and the critical points of `p²`.
pub fn max_abs_on(c: &[f64], lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mut best = (eval(c, lo).abs(), lo);
    let fhi = eval(c, hi).abs();
    if fhi > best.0 {
        best = (fhi, hi);
    }
    for r in real_roots_in(&derivative(c), lo, hi, tol) {
        let v = eval(c, r).abs();
        if v > best.0 {
            best = (v, r);
        }
    }
    best
}
