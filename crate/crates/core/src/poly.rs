//! Dense polynomials in the space variables `(x, y)` and the state variable `t`.

use alloc::vec;
use alloc::vec::Vec;

use crate::vec2::Vec2;

/// Variable selector for differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

/// `Σ c[i][j][k] x^i y^j t^k`, stored densely. Each extent is `degree + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nx: usize,
    ny: usize,
    nt: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Poly {
            nx: 1,
            ny: 1,
            nt: 1,
            coeffs: vec![c],
        }
    }

    /// Builds from a dense coefficient block; `coeffs[(i * ny + j) * nt + k]`
    /// multiplies `x^i y^j t^k`.
    pub fn from_dense(nx: usize, ny: usize, nt: usize, coeffs: Vec<f64>) -> Option<Self> {
        if nx == 0 || ny == 0 || nt == 0 || coeffs.len() != nx * ny * nt {
            return None;
        }
        Some(Poly { nx, ny, nt, coeffs }.trimmed())
    }

    /// `c · x^i y^j t^k`.
    pub fn monomial(c: f64, i: usize, j: usize, k: usize) -> Self {
        let mut p = Poly {
            nx: i + 1,
            ny: j + 1,
            nt: k + 1,
            coeffs: vec![0.0; (i + 1) * (j + 1) * (k + 1)],
        };
        let idx = p.index(i, j, k);
        p.coeffs[idx] = c;
        p
    }

    /// Builds from `(coefficient, i, j, k)` terms.
    pub fn from_terms(terms: &[(f64, usize, usize, usize)]) -> Self {
        terms
            .iter()
            .fold(Poly::zero(), |acc, &(c, i, j, k)| acc.add(&Poly::monomial(c, i, j, k)))
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.nt + k
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        if i < self.nx && j < self.ny && k < self.nt {
            self.coeffs[self.index(i, j, k)]
        } else {
            0.0
        }
    }

    pub fn extents(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn degree_t(&self) -> usize {
        self.nt - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// True when no coefficient multiplies a positive power of `t`.
    pub fn is_t_free(&self) -> bool {
        self.nt == 1
    }

    pub fn is_y_free(&self) -> bool {
        self.ny == 1
    }

    /// Drops trailing all-zero slabs in every variable.
    fn trimmed(mut self) -> Self {
        let (mut nx, mut ny, mut nt) = (self.nx, self.ny, self.nt);
        while nx > 1 && (0..ny).all(|j| (0..nt).all(|k| self.coeff(nx - 1, j, k) == 0.0)) {
            nx -= 1;
        }
        while ny > 1 && (0..nx).all(|i| (0..nt).all(|k| self.coeff(i, ny - 1, k) == 0.0)) {
            ny -= 1;
        }
        while nt > 1 && (0..nx).all(|i| (0..ny).all(|j| self.coeff(i, j, nt - 1) == 0.0)) {
            nt -= 1;
        }
        if (nx, ny, nt) != (self.nx, self.ny, self.nt) {
            let mut out = vec![0.0; nx * ny * nt];
            for i in 0..nx {
                for j in 0..ny {
                    for k in 0..nt {
                        out[(i * ny + j) * nt + k] = self.coeff(i, j, k);
                    }
                }
            }
            self.nx = nx;
            self.ny = ny;
            self.nt = nt;
            self.coeffs = out;
        }
        self
    }

    fn map_extents(&self, nx: usize, ny: usize, nt: usize) -> Poly {
        let mut out = Poly {
            nx,
            ny,
            nt,
            coeffs: vec![0.0; nx * ny * nt],
        };
        for i in 0..self.nx.min(nx) {
            for j in 0..self.ny.min(ny) {
                for k in 0..self.nt.min(nt) {
                    let idx = out.index(i, j, k);
                    out.coeffs[idx] = self.coeff(i, j, k);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.map_extents(
            self.nx.max(other.nx),
            self.ny.max(other.ny),
            self.nt.max(other.nt),
        );
        for i in 0..other.nx {
            for j in 0..other.ny {
                for k in 0..other.nt {
                    let idx = out.index(i, j, k);
                    out.coeffs[idx] += other.coeff(i, j, k);
                }
            }
        }
        out.trimmed()
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            nx: self.nx,
            ny: self.ny,
            nt: self.nt,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
        .trimmed()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly {
            nx: self.nx + other.nx - 1,
            ny: self.ny + other.ny - 1,
            nt: self.nt + other.nt - 1,
            coeffs: vec![0.0; (self.nx + other.nx - 1) * (self.ny + other.ny - 1) * (self.nt + other.nt - 1)],
        };
        for i in 0..self.nx {
            for j in 0..self.ny {
                for k in 0..self.nt {
                    let a = self.coeff(i, j, k);
                    if a == 0.0 {
                        continue;
                    }
                    for p in 0..other.nx {
                        for q in 0..other.ny {
                            for r in 0..other.nt {
                                let idx = out.index(i + p, j + q, k + r);
                                out.coeffs[idx] += a * other.coeff(p, q, r);
                            }
                        }
                    }
                }
            }
        }
        out.trimmed()
    }

    pub fn eval(&self, p: Vec2, t: f64) -> f64 {
        let mut acc_x = 0.0;
        for i in (0..self.nx).rev() {
            let mut acc_y = 0.0;
            for j in (0..self.ny).rev() {
                let base = (i * self.ny + j) * self.nt;
                let mut acc_t = 0.0;
                for k in (0..self.nt).rev() {
                    acc_t = acc_t * t + self.coeffs[base + k];
                }
                acc_y = acc_y * p.y + acc_t;
            }
            acc_x = acc_x * p.x + acc_y;
        }
        acc_x
    }

    pub fn derivative(&self, var: Var) -> Poly {
        let (nx, ny, nt) = match var {
            Var::X => (self.nx.saturating_sub(1).max(1), self.ny, self.nt),
            Var::Y => (self.nx, self.ny.saturating_sub(1).max(1), self.nt),
            Var::T => (self.nx, self.ny, self.nt.saturating_sub(1).max(1)),
        };
        let mut out = Poly {
            nx,
            ny,
            nt,
            coeffs: vec![0.0; nx * ny * nt],
        };
        for i in 0..self.nx {
            for j in 0..self.ny {
                for k in 0..self.nt {
                    let c = self.coeff(i, j, k);
                    let (e, ti, tj, tk) = match var {
                        Var::X => (i, i.wrapping_sub(1), j, k),
                        Var::Y => (j, i, j.wrapping_sub(1), k),
                        Var::T => (k, i, j, k.wrapping_sub(1)),
                    };
                    if e == 0 {
                        continue;
                    }
                    let idx = out.index(ti, tj, tk);
                    out.coeffs[idx] += c * e as f64;
                }
            }
        }
        out.trimmed()
    }

    /// Antiderivative in `t` vanishing at `t = 0`.
    pub fn integrate_t(&self) -> Poly {
        let nt = self.nt + 1;
        let mut out = Poly {
            nx: self.nx,
            ny: self.ny,
            nt,
            coeffs: vec![0.0; self.nx * self.ny * nt],
        };
        for i in 0..self.nx {
            for j in 0..self.ny {
                for k in 0..self.nt {
                    let idx = out.index(i, j, k + 1);
                    out.coeffs[idx] = self.coeff(i, j, k) / (k + 1) as f64;
                }
            }
        }
        out.trimmed()
    }

    /// Coefficients in `t` (ascending) after fixing the space point.
    pub fn t_coefficients(&self, p: Vec2) -> Vec<f64> {
        (0..self.nt)
            .map(|k| {
                let mut acc_x = 0.0;
                for i in (0..self.nx).rev() {
                    let mut acc_y = 0.0;
                    for j in (0..self.ny).rev() {
                        acc_y = acc_y * p.y + self.coeff(i, j, k);
                    }
                    acc_x = acc_x * p.x + acc_y;
                }
                acc_x
            })
            .collect()
    }

    /// Largest absolute coefficient; used for scale estimates.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Sum of the x- and y-degrees of the highest nonzero monomial.
    pub fn total_degree_xy(&self) -> usize {
        let mut d = 0;
        for i in 0..self.nx {
            for j in 0..self.ny {
                if (0..self.nt).any(|k| self.coeff(i, j, k) != 0.0) {
                    d = d.max(i + j);
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Poly {
        // 1 + 2x - y t + 3 x^2 t^2
        Poly::from_terms(&[(1.0, 0, 0, 0), (2.0, 1, 0, 0), (-1.0, 0, 1, 1), (3.0, 2, 0, 2)])
    }

    #[test]
    fn eval_matches_hand_expansion() {
        let p = sample();
        let (x, y, t) = (0.7, -1.3, 0.4);
        let want = 1.0 + 2.0 * x - y * t + 3.0 * x * x * t * t;
        assert!((p.eval(Vec2::new(x, y), t) - want).abs() < 1e-14);
    }

    #[test]
    fn derivatives() {
        let p = sample();
        let q = Vec2::new(0.3, 0.9);
        let t = -0.6;
        let dx = 2.0 + 6.0 * q.x * t * t;
        let dy = -t;
        let dt = -q.y + 6.0 * q.x * q.x * t;
        assert!((p.derivative(Var::X).eval(q, t) - dx).abs() < 1e-14);
        assert!((p.derivative(Var::Y).eval(q, t) - dy).abs() < 1e-14);
        assert!((p.derivative(Var::T).eval(q, t) - dt).abs() < 1e-14);
    }

    #[test]
    fn integrate_t_vanishes_at_zero_and_differentiates_back() {
        let p = sample();
        let big = p.integrate_t();
        let q = Vec2::new(-0.2, 0.5);
        assert_eq!(big.eval(q, 0.0), 0.0);
        let back = big.derivative(Var::T);
        for &t in &[-1.0, 0.3, 2.0] {
            assert!((back.eval(q, t) - p.eval(q, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn product_and_t_coefficients() {
        let a = Poly::from_terms(&[(1.0, 1, 0, 0), (1.0, 0, 0, 1)]);
        let b = Poly::from_terms(&[(2.0, 0, 1, 0), (-1.0, 0, 0, 1)]);
        let c = a.mul(&b);
        let q = Vec2::new(0.4, -0.8);
        for &t in &[-0.5, 0.0, 1.5] {
            assert!((c.eval(q, t) - a.eval(q, t) * b.eval(q, t)).abs() < 1e-14);
        }
        let tc = c.t_coefficients(q);
        let t = 0.37;
        let horner = tc.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        assert!((horner - c.eval(q, t)).abs() < 1e-14);
    }

    #[test]
    fn trimming_keeps_constant_free_of_t() {
        let p = Poly::monomial(3.0, 0, 0, 2).derivative(Var::T).derivative(Var::T);
        assert!(p.is_t_free());
        assert_eq!(p.eval(Vec2::ZERO, 9.0), 6.0);
    }
}
