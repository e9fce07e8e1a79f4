//! Piecewise-polynomial fields `b(x, t)` on a polygonal partition, their
//! antiderivatives `B(x, t) = ∫₀^t b(x, s) ds`, the divergence measures
//! `Div_x b(·, t)`, the least upper bound `σ` over `t ∈ [−T, T]`, and the
//! Radon–Nikodým densities `f` and `F`.

use alloc::format;
use alloc::vec::Vec;

use crate::geometry::{Cell, Dimension, Location, PolygonalDomain};
use crate::measure::{density, HybridMeasure, Region};
use crate::poly::{Poly, Var};
use crate::roots;
use crate::vec2::Vec2;
use crate::{Error, Result, GEOM_TOL};

/// `σ`-densities at or below this value are treated as zero.
pub const SIGMA_FLOOR: f64 = 1e-14;

/// A point of the support of `σ`, tagged with its part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Cell(usize, Vec2),
    Edge(usize, Vec2),
}

impl Support {
    pub fn point(&self) -> Vec2 {
        match *self {
            Support::Cell(_, x) | Support::Edge(_, x) => x,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseField {
    domain: PolygonalDomain,
    b: Vec<[Poly; 2]>,
    big_b: Vec<[Poly; 2]>,
    div: Vec<Poly>,
    div_big: Vec<Poly>,
    jump: Vec<Poly>,
    jump_big: Vec<Poly>,
    t_max: f64,
    norm_b: f64,
}

fn normal_component(p: &[Poly; 2], n: Vec2) -> Poly {
    p[0].scale(n.x).add(&p[1].scale(n.y))
}

impl PiecewiseField {
    /// Builds the field from per-cell component polynomials in `(x, y, t)`.
    pub fn new(domain: PolygonalDomain, b: Vec<[Poly; 2]>, t_max: f64) -> Result<Self> {
        if b.len() != domain.cells().len() {
            return Err(Error::domain(format!(
                "field has {} cell pieces, partition has {} cells",
                b.len(),
                domain.cells().len()
            )));
        }
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::domain("t range [-T, T] needs T > 0"));
        }
        if domain.dimension() == Dimension::One {
            for (i, p) in b.iter().enumerate() {
                if !p[1].is_zero() || !p[0].is_y_free() {
                    return Err(Error::domain(format!("1D field piece {i} must be (b(x, t), 0)")));
                }
            }
        }
        let big_b: Vec<[Poly; 2]> = b.iter().map(|p| [p[0].integrate_t(), p[1].integrate_t()]).collect();
        let div: Vec<Poly> = b.iter().map(|p| p[0].derivative(Var::X).add(&p[1].derivative(Var::Y))).collect();
        let div_big: Vec<Poly> = div.iter().map(Poly::integrate_t).collect();
        let mut jump = Vec::new();
        let mut jump_big = Vec::new();
        for e in domain.skeleton() {
            jump.push(normal_component(&b[e.plus], e.normal).sub(&normal_component(&b[e.minus], e.normal)));
            jump_big.push(normal_component(&big_b[e.plus], e.normal).sub(&normal_component(&big_b[e.minus], e.normal)));
        }
        let mut field = PiecewiseField {
            domain,
            b,
            big_b,
            div,
            div_big,
            jump,
            jump_big,
            t_max,
            norm_b: 0.0,
        };
        field.norm_b = field.compute_norm_b();
        Ok(field)
    }

    /// `b(x, t) = A(x)` for a `t`-independent field `A`, so `B = t·A`.
    pub fn t_independent(domain: PolygonalDomain, a: Vec<[Poly; 2]>, t_max: f64) -> Result<Self> {
        if a.iter().any(|p| !p[0].is_t_free() || !p[1].is_t_free()) {
            return Err(Error::domain("t-independent field pieces must not depend on t"));
        }
        PiecewiseField::new(domain, a, t_max)
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn cell_b(&self, cell: usize) -> &[Poly; 2] {
        &self.b[cell]
    }

    pub fn cell_big_b(&self, cell: usize) -> &[Poly; 2] {
        &self.big_b[cell]
    }

    /// `div_x b_i(x, t)` on cell `i`.
    pub fn cell_div(&self, cell: usize) -> &Poly {
        &self.div[cell]
    }

    /// `div_x B_i(x, t) = ∫₀^t div_x b_i(x, s) ds` on cell `i`.
    pub fn cell_div_big(&self, cell: usize) -> &Poly {
        &self.div_big[cell]
    }

    /// `(b⁺ − b⁻)·ν` on skeleton edge `e`.
    pub fn edge_jump(&self, e: usize) -> &Poly {
        &self.jump[e]
    }

    /// `(B⁺ − B⁻)·ν = β⁺ − β⁻` on skeleton edge `e`.
    pub fn edge_jump_big(&self, e: usize) -> &Poly {
        &self.jump_big[e]
    }

    /// True when no piece depends on `t`.
    pub fn is_t_independent(&self) -> bool {
        self.b.iter().all(|p| p[0].is_t_free() && p[1].is_t_free())
    }

    pub fn check_t(&self, t: f64) -> Result<()> {
        if t.is_finite() && t.abs() <= self.t_max * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::domain(format!("t = {t} lies outside [-{T}, {T}]", T = self.t_max)))
        }
    }

    fn cell_for(&self, x: Vec2) -> Result<usize> {
        self.domain
            .cell_of(x)
            .ok_or_else(|| Error::domain(format!("point ({}, {}) lies outside the domain", x.x, x.y)))
    }

    /// `b(x, t)`; on skeleton points the `cell⁻` value.
    pub fn eval_b(&self, x: Vec2, t: f64) -> Result<Vec2> {
        self.check_t(t)?;
        Ok(self.eval_b_in(self.cell_for(x)?, x, t))
    }

    /// `B(x, t)`; on skeleton points the `cell⁻` value.
    pub fn eval_big_b(&self, x: Vec2, t: f64) -> Result<Vec2> {
        self.check_t(t)?;
        Ok(self.eval_big_b_in(self.cell_for(x)?, x, t))
    }

    /// Polynomial of `cell` evaluated at `x` (valid on the closed cell).
    pub fn eval_b_in(&self, cell: usize, x: Vec2, t: f64) -> Vec2 {
        let p = &self.b[cell];
        Vec2::new(p[0].eval(x, t), p[1].eval(x, t))
    }

    pub fn eval_big_b_in(&self, cell: usize, x: Vec2, t: f64) -> Vec2 {
        let p = &self.big_b[cell];
        Vec2::new(p[0].eval(x, t), p[1].eval(x, t))
    }

    /// `Div_x b(·, t)` as a measure.
    pub fn div_b(&self, t: f64) -> Result<HybridMeasure> {
        self.check_t(t)?;
        let mut m = HybridMeasure::zero(self.domain.dimension());
        for (i, cell) in self.domain.cells().iter().enumerate() {
            if self.div[i].is_zero() {
                continue;
            }
            let p = self.div[i].clone();
            m.push_ac(cell_region(cell), Some(i), density(move |x| p.eval(x, t)));
        }
        for (e, edge) in self.domain.skeleton().iter().enumerate() {
            if self.jump[e].is_zero() {
                continue;
            }
            let p = self.jump[e].clone();
            m.push_edge(edge.a, edge.b, Some(e), density(move |x| p.eval(x, t)));
        }
        Ok(m)
    }

    /// `Div_x B(·, t)` as a measure.
    pub fn div_big_b(&self, t: f64) -> Result<HybridMeasure> {
        self.check_t(t)?;
        let mut m = HybridMeasure::zero(self.domain.dimension());
        for (i, cell) in self.domain.cells().iter().enumerate() {
            if self.div_big[i].is_zero() {
                continue;
            }
            let p = self.div_big[i].clone();
            m.push_ac(cell_region(cell), Some(i), density(move |x| p.eval(x, t)));
        }
        for (e, edge) in self.domain.skeleton().iter().enumerate() {
            if self.jump_big[e].is_zero() {
                continue;
            }
            let p = self.jump_big[e].clone();
            m.push_edge(edge.a, edge.b, Some(e), density(move |x| p.eval(x, t)));
        }
        Ok(m)
    }

    /// `sup_{|t| ≤ T} |p(x, t)|`.
    pub fn sup_over_t(&self, p: &Poly, x: Vec2) -> f64 {
        if p.is_t_free() {
            return p.eval(x, 0.0).abs();
        }
        roots::max_abs_on(&p.t_coefficients(x), -self.t_max, self.t_max, 1e-12).0
    }

    /// `σ = ⋁_{|t| ≤ T} |Div_x b(·, t)|`, computed pointwise per part.
    pub fn sigma(&self) -> HybridMeasure {
        let mut m = HybridMeasure::zero(self.domain.dimension());
        for (i, cell) in self.domain.cells().iter().enumerate() {
            if self.div[i].is_zero() {
                continue;
            }
            let p = self.div[i].clone();
            let t_max = self.t_max;
            m.push_ac(cell_region(cell), Some(i), density(move |x| sup_abs(&p, x, t_max)));
        }
        for (e, edge) in self.domain.skeleton().iter().enumerate() {
            if self.jump[e].is_zero() {
                continue;
            }
            let p = self.jump[e].clone();
            let t_max = self.t_max;
            m.push_edge(edge.a, edge.b, Some(e), density(move |x| sup_abs(&p, x, t_max)));
        }
        m
    }

    /// Classifies `x` as a point of a cell or of a skeleton edge.
    pub fn support_at(&self, x: Vec2) -> Result<Support> {
        match self.domain.locate(x) {
            Location::Cell(i) => Ok(Support::Cell(i, x)),
            Location::Edge(e) => Ok(Support::Edge(e, x)),
            Location::Vertex => Err(Error::domain("vertices carry no σ mass")),
            Location::Outside => Err(Error::domain("point lies outside the domain")),
        }
    }

    fn part_polys(&self, s: &Support) -> (&Poly, &Poly) {
        match *s {
            Support::Cell(i, _) => (&self.div[i], &self.div_big[i]),
            Support::Edge(e, _) => (&self.jump[e], &self.jump_big[e]),
        }
    }

    /// Density of `σ` at the support point.
    pub fn sigma_density(&self, s: &Support) -> f64 {
        self.sup_over_t(self.part_polys(s).0, s.point())
    }

    /// `f(x, t) = d Div_x b(·, t) / dσ`, zero off the support of `σ`.
    pub fn f_density(&self, s: &Support, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let sig = self.sigma_density(s);
        if sig <= SIGMA_FLOOR {
            return Ok(0.0);
        }
        Ok(self.part_polys(s).0.eval(s.point(), t) / sig)
    }

    /// `F(x, t) = ∫₀^t f(x, s) ds`. Since `σ` does not depend on `t`, the
    /// integral is the exact antiderivative of the divergence density over
    /// the `σ`-density.
    #[allow(non_snake_case)]
    pub fn F_potential(&self, s: &Support, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let sig = self.sigma_density(s);
        if sig <= SIGMA_FLOOR {
            return Ok(0.0);
        }
        Ok(self.part_polys(s).1.eval(s.point(), t) / sig)
    }

    /// `F(x, t)·σ-density`, i.e. the density of `Div_x B(·, t)` on the part.
    pub fn f_sigma(&self, s: &Support, t: f64) -> f64 {
        self.part_polys(s).1.eval(s.point(), t)
    }

    /// `‖b‖_∞` on `Ω × [−T, T]`.
    pub fn norm_b_inf(&self) -> f64 {
        self.norm_b
    }

    /// `sup_t |b_i(x, t)|` for cell `i`, exact in `t`.
    pub fn sup_norm_at(&self, cell: usize, x: Vec2) -> f64 {
        let p = &self.b[cell];
        let c0 = p[0].t_coefficients(x);
        let c1 = p[1].t_coefficients(x);
        let sq = add_coeffs(&mul_coeffs(&c0, &c0), &mul_coeffs(&c1, &c1));
        crate::math::sqrt(roots::max_abs_on(&sq, -self.t_max, self.t_max, 1e-13).0)
    }

    /// Grid sampling of every closed cell, its vertices and edges (including
    /// the points used by trace sampling), polished by compass search.
    fn compute_norm_b(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, cell) in self.domain.cells().iter().enumerate() {
            let mut cand: (f64, Vec2) = (0.0, Vec2::ZERO);
            let consider = |x: Vec2, cand: &mut (f64, Vec2)| {
                let v = self.sup_norm_at(i, x);
                if v > cand.0 {
                    *cand = (v, x);
                }
            };
            match cell {
                Cell::Interval { lo, hi } => {
                    for k in 0..=512 {
                        consider(Vec2::on_line(lo + (hi - lo) * k as f64 / 512.0), &mut cand);
                    }
                }
                Cell::Polygon(p) => {
                    for (a, b) in p.edges() {
                        for k in 0..=64 {
                            consider(a.lerp(b, k as f64 / 64.0), &mut cand);
                        }
                    }
                    let (lo, hi) = p.bounds();
                    let n = 48;
                    for ix in 0..=n {
                        for iy in 0..=n {
                            let x = Vec2::new(
                                lo.x + (hi.x - lo.x) * ix as f64 / n as f64,
                                lo.y + (hi.y - lo.y) * iy as f64 / n as f64,
                            );
                            if cell.contains_closed(x) {
                                consider(x, &mut cand);
                            }
                        }
                    }
                }
            }
            for edge in self.domain.skeleton() {
                if edge.minus == i || edge.plus == i {
                    for k in 0..=64 {
                        consider(edge.point_at(k as f64 / 64.0), &mut cand);
                    }
                }
            }
            // compass search from the best sample
            let (lo, hi) = cell.bounds();
            let mut h = (hi.x - lo.x).max(hi.y - lo.y) / 48.0;
            let dirs: &[Vec2] = match cell {
                Cell::Interval { .. } => &[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)],
                Cell::Polygon(_) => &[
                    Vec2::new(1.0, 0.0),
                    Vec2::new(-1.0, 0.0),
                    Vec2::new(0.0, 1.0),
                    Vec2::new(0.0, -1.0),
                    Vec2::new(0.7071067811865476, 0.7071067811865476),
                    Vec2::new(-0.7071067811865476, 0.7071067811865476),
                    Vec2::new(0.7071067811865476, -0.7071067811865476),
                    Vec2::new(-0.7071067811865476, -0.7071067811865476),
                ],
            };
            for _ in 0..60 {
                let mut moved = false;
                for d in dirs {
                    let y = cand.1 + d.scale(h);
                    if cell.contains_closed(y) {
                        let v = self.sup_norm_at(i, y);
                        if v > cand.0 {
                            cand = (v, y);
                            moved = true;
                        }
                    }
                }
                if !moved {
                    h *= 0.5;
                }
            }
            best = best.max(cand.0);
        }
        best
    }
}

fn sup_abs(p: &Poly, x: Vec2, t_max: f64) -> f64 {
    if p.is_t_free() {
        return p.eval(x, 0.0).abs();
    }
    roots::max_abs_on(&p.t_coefficients(x), -t_max, t_max, 1e-12).0
}

pub(crate) fn mul_coeffs(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn add_coeffs(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

/// The region of a partition cell.
pub fn cell_region(cell: &Cell) -> Region {
    match cell {
        Cell::Interval { lo, hi } => Region::Interval { lo: *lo, hi: *hi },
        Cell::Polygon(p) => Region::polygon(p.vertices().to_vec()),
    }
}

/// Rejects points on the domain boundary or outside it.
pub fn check_inside(domain: &PolygonalDomain, x: Vec2) -> Result<()> {
    if domain.boundary_margin(x) > GEOM_TOL {
        Ok(())
    } else {
        Err(Error::domain("point is not inside the open domain"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::TestFunction;
    use alloc::vec;

    fn sign_field(t_dep: bool) -> PiecewiseField {
        let d = PolygonalDomain::line(-2.0, 2.0, &[0.0]).unwrap();
        let (neg, pos) = if t_dep {
            (Poly::monomial(-1.0, 0, 0, 1), Poly::monomial(1.0, 0, 0, 1))
        } else {
            (Poly::constant(-1.0), Poly::constant(1.0))
        };
        PiecewiseField::new(d, vec![[neg, Poly::zero()], [pos, Poly::zero()]], 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = sign_field(false);
        assert!(matches!(f.eval_b(Vec2::on_line(0.5), 7.0), Err(Error::Domain(_))));
        assert_eq!(f.eval_b(Vec2::on_line(0.5), 0.3).unwrap(), Vec2::new(1.0, 0.0));
        assert_eq!(f.eval_big_b(Vec2::on_line(-0.2), 0.5).unwrap(), Vec2::new(-0.5, 0.0));
        let sq = PolygonalDomain::planar(
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 3.0),
            vec![vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(3.0, 3.0), Vec2::new(0.0, 3.0)]],
        )
        .unwrap();
        let radial = PiecewiseField::new(sq.clone(), vec![[Poly::monomial(1.0, 1, 0, 1), Poly::monomial(1.0, 0, 1, 1)]], 1.0).unwrap();
        assert_eq!(radial.eval_b(Vec2::new(1.0, 2.0), 0.5).unwrap(), Vec2::new(0.5, 1.0));
        let lin = PiecewiseField::new(sq, vec![[Poly::monomial(2.0, 0, 0, 1), Poly::zero()]], 3.0).unwrap();
        assert_eq!(lin.eval_big_b(Vec2::new(1.0, 1.0), 3.0).unwrap(), Vec2::new(9.0, 0.0));
        assert_eq!(lin.eval_big_b(Vec2::new(1.0, 1.0), 0.0).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn sigma_and_densities() {
        let f = sign_field(true);
        let phi = TestFunction::normalized(Dimension::One, Vec2::ZERO, 1.0).unwrap();
        assert!((f.sigma().apply(&phi).unwrap() - 2.0).abs() < 1e-15);
        let s = f.support_at(Vec2::ZERO).unwrap();
        assert!((f.f_density(&s, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((f.F_potential(&s, 0.6).unwrap() - 0.18).abs() < 1e-15);
        let g = sign_field(false);
        assert_eq!(g.f_density(&s, -0.7).unwrap(), 1.0);
        assert_eq!(g.F_potential(&s, -0.7).unwrap(), -0.7);
        let off = g.support_at(Vec2::on_line(1.0)).unwrap();
        assert_eq!(g.f_density(&off, 0.5).unwrap(), 0.0);
        assert_eq!(f.norm_b_inf(), 1.0);
    }

    #[test]
    fn div_of_sign_is_twice_delta() {
        let f = sign_field(false);
        let phi = TestFunction::normalized(Dimension::One, Vec2::on_line(0.2), 0.5).unwrap();
        let m = f.div_b(0.4).unwrap().apply(&phi).unwrap();
        assert!((m - 2.0 * phi.eval(Vec2::ZERO)).abs() < 1e-15);
    }
}
