//! The middle-thirds Cantor set on an interval, its devil's-staircase
//! function, and integration against its self-similar probability measure.

use crate::math;
use crate::Error;

/// Affine image of the standard middle-thirds Cantor set on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CantorSet {
    pub lo: f64,
    pub hi: f64,
}

/// Evaluations of the self-similar recursion never go below this depth, so a
/// symmetric integrand cannot stop the refinement early.
const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 48;

impl CantorSet {
    pub fn new(lo: f64, hi: f64) -> Self {
        CantorSet { lo, hi }
    }

    pub fn standard() -> Self {
        CantorSet { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// The Cantor function `C((x − lo)/(hi − lo))`, extended by 0 on the left
    /// and 1 on the right.
    pub fn function(&self, x: f64) -> f64 {
        let mut s = (x - self.lo) / self.width();
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let mut acc = 0.0;
        let mut bit = 0.5;
        for _ in 0..64 {
            s *= 3.0;
            if s < 1.0 {
                // ternary digit 0
            } else if s < 2.0 {
                return acc + bit;
            } else {
                acc += bit;
                s -= 2.0;
            }
            bit *= 0.5;
        }
        acc
    }

    /// Cantor-measure mass of `(a, b)`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            self.function(b) - self.function(a)
        }
    }

    /// `∫ f dC` over the window `(wa, wb)` for the unit-mass Cantor measure.
    ///
    /// Level-`k` intervals carry mass `2^-k`; an interval is accepted once its
    /// midpoint value agrees with the average over its two children to within
    /// `tol` per unit mass. Both estimates are exact for integrands that are
    /// affine on the interval, by symmetry of the measure.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, wa: f64, wb: f64, tol: f64) -> Result<f64, Error> {
        let mut ok = true;
        let v = self.rec(&f, self.lo, self.hi, 1.0, wa, wb, tol, 0, None, &mut ok);
        if ok {
            Ok(v)
        } else {
            Err(Error::numeric("Cantor-measure recursion did not converge", v))
        }
    }

    /// Same recursion stopped uniformly at `depth`; used to study convergence.
    pub fn integrate_at_depth<F: Fn(f64) -> f64>(&self, f: F, depth: u32) -> f64 {
        let mut ok = true;
        self.rec(&f, self.lo, self.hi, 1.0, f64::NEG_INFINITY, f64::INFINITY, 0.0, 0, Some(depth), &mut ok)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        mass: f64,
        wa: f64,
        wb: f64,
        tol: f64,
        depth: u32,
        fixed: Option<u32>,
        ok: &mut bool,
    ) -> f64 {
        if hi <= wa || lo >= wb {
            return 0.0;
        }
        let third = (hi - lo) / 3.0;
        let mid = 0.5 * (lo + hi);
        let inside = lo >= wa && hi <= wb;
        if let Some(d) = fixed {
            if depth >= d {
                return mass * f(mid);
            }
        } else if inside && depth >= MIN_DEPTH {
            let coarse = mass * f(mid);
            let fine = 0.5 * mass * (f(lo + 0.5 * third) + f(hi - 0.5 * third));
            if (coarse - fine).abs() <= tol * mass {
                return fine;
            }
        }
        if depth >= MAX_DEPTH {
            if !inside {
                let (a, b) = (lo.max(wa), hi.min(wb));
                return self.mass_between(a, b) * f(0.5 * (a + b));
            }
            *ok = false;
            return mass * f(mid);
        }
        self.rec(f, lo, lo + third, 0.5 * mass, wa, wb, tol, depth + 1, fixed, ok)
            + self.rec(f, hi - third, hi, 0.5 * mass, wa, wb, tol, depth + 1, fixed, ok)
    }

    /// True when `[lo, hi]` lies in the open interval `(a, b)`.
    pub fn inside(&self, a: f64, b: f64) -> bool {
        self.lo > a && self.hi < b
    }

    /// Level needed so that `3^-k · width` drops below `length`.
    pub fn level_for(&self, length: f64) -> u32 {
        if length <= 0.0 {
            return MAX_DEPTH;
        }
        let k = math::ln(self.width() / length) / math::ln(3.0);
        (math::ceil(k).max(0.0) as u32).min(MAX_DEPTH)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_values() {
        let c = CantorSet::standard();
        assert_eq!(c.function(-1.0), 0.0);
        assert_eq!(c.function(2.0), 1.0);
        assert!((c.function(0.5) - 0.5).abs() < 1e-15);
        assert!((c.function(0.25) - 1.0 / 3.0).abs() < 1e-12);
        assert!((c.function(0.8) - 0.75).abs() < 1e-15);
        // self-similarity: C(x/3) = C(x)/2
        for &x in &[0.1, 0.37, 0.71, 0.93] {
            assert!((c.function(x / 3.0) - 0.5 * c.function(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn moments_of_standard_measure() {
        let c = CantorSet::standard();
        let m0 = c.integrate(|_| 1.0, f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        let m1 = c.integrate(|x| x, f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        // second moment 3/8 from the self-similar recursion
        let m2 = c.integrate(|x| x * x, f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        assert!((m0 - 1.0).abs() < 1e-14);
        assert!((m1 - 0.5).abs() < 1e-14);
        assert!((m2 - 0.375).abs() < 1e-10);
    }

    #[test]
    fn windowed_mass_matches_staircase() {
        let c = CantorSet::new(2.0, 5.0);
        let m = c.integrate(|_| 1.0, 2.5, 4.1, 1e-12).unwrap();
        // window ends with non-terminating ternary expansions: the staircase is
        // only Hölder-continuous, so rounding of x limits agreement to ~1e-10
        assert!((m - c.mass_between(2.5, 4.1)).abs() < 1e-9);
        let exact = c.integrate(|_| 1.0, 3.0, 5.0, 1e-12).unwrap();
        assert!((exact - 0.5).abs() < 1e-15);
    }
}
