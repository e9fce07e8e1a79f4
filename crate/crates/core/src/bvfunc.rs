//! Piecewise-polynomial BV functions with jumps on the partition skeleton and,
//! in one dimension, an optional Cantor-function summand.

use alloc::format;
use alloc::vec::Vec;

use crate::cantor::CantorSet;
use crate::field::cell_region;
use crate::geometry::{Cell, Dimension, Location, PolygonalDomain};
use crate::measure::{constant_density, density, HybridMeasure, VectorMeasure};
use crate::poly::{Poly, Var};
use crate::roots;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// The summand `c · C((x − a)/(b − a))` of a 1D BV function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CantorComponent {
    pub coefficient: f64,
    pub set: CantorSet,
}

/// `D^a u`, `D^j u` and `D^c u`.
#[derive(Clone, Debug)]
pub struct DerivativeParts {
    pub absolutely_continuous: VectorMeasure,
    pub jump: VectorMeasure,
    pub cantor: VectorMeasure,
}

impl DerivativeParts {
    pub fn total(&self) -> VectorMeasure {
        self.absolutely_continuous.add(&self.jump).add(&self.cantor)
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseBV {
    domain: PolygonalDomain,
    cells: Vec<Poly>,
    grads: Vec<[Poly; 2]>,
    cantor: Option<CantorComponent>,
    cantor_cell: Option<usize>,
    in_jump_set: Vec<bool>,
    norm: f64,
}

impl PiecewiseBV {
    pub fn new(domain: PolygonalDomain, cells: Vec<Poly>, cantor: Option<CantorComponent>) -> Result<Self> {
        if cells.len() != domain.cells().len() {
            return Err(Error::domain(format!(
                "function has {} cell pieces, partition has {} cells",
                cells.len(),
                domain.cells().len()
            )));
        }
        for (i, p) in cells.iter().enumerate() {
            if !p.is_t_free() || (domain.dimension() == Dimension::One && !p.is_y_free()) {
                return Err(Error::domain(format!("piece {i} must depend on the space variables only")));
            }
        }
        let mut cantor_cell = None;
        if let Some(c) = cantor {
            if domain.dimension() != Dimension::One {
                return Err(Error::domain("Cantor components are supported in dimension 1 only"));
            }
            if !(c.set.hi > c.set.lo) {
                return Err(Error::domain("Cantor interval is empty"));
            }
            cantor_cell = domain.cells().iter().position(|cell| match cell {
                Cell::Interval { lo, hi } => c.set.inside(*lo, *hi),
                Cell::Polygon(_) => false,
            });
            if cantor_cell.is_none() {
                return Err(Error::domain("the Cantor set must lie inside a single cell, away from the skeleton"));
            }
        }
        let grads = cells.iter().map(|p| [p.derivative(Var::X), p.derivative(Var::Y)]).collect();
        let mut u = PiecewiseBV {
            domain,
            cells,
            grads,
            cantor,
            cantor_cell,
            in_jump_set: Vec::new(),
            norm: 0.0,
        };
        u.in_jump_set = u
            .domain
            .skeleton()
            .iter()
            .map(|e| {
                let n = if e.is_point() { 0 } else { 16 };
                (0..=n).any(|k| {
                    let x = e.point_at(if n == 0 { 0.0 } else { k as f64 / n as f64 });
                    let (up, um) = (u.cells[e.plus].eval(x, 0.0), u.cells[e.minus].eval(x, 0.0));
                    (up - um).abs() > 1e-13 * (1.0 + up.abs().max(um.abs()))
                })
            })
            .collect();
        u.norm = u.compute_norm();
        Ok(u)
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn cell_poly(&self, cell: usize) -> &Poly {
        &self.cells[cell]
    }

    pub fn cell_grad(&self, cell: usize) -> &[Poly; 2] {
        &self.grads[cell]
    }

    pub fn cantor(&self) -> Option<&CantorComponent> {
        self.cantor.as_ref()
    }

    /// True when skeleton edge `e` belongs to `J_u`.
    pub fn edge_in_jump_set(&self, e: usize) -> bool {
        self.in_jump_set[e]
    }

    /// The Cantor-function summand at `x` (zero without a Cantor part).
    pub fn cantor_value(&self, x: Vec2) -> f64 {
        match &self.cantor {
            Some(c) => c.coefficient * c.set.function(x.x),
            None => 0.0,
        }
    }

    /// Value of the piece of `cell` at `x`, valid on the closed cell.
    pub fn eval_in(&self, cell: usize, x: Vec2) -> f64 {
        self.cells[cell].eval(x, 0.0) + self.cantor_value(x)
    }

    /// Gradient of the piece of `cell` (the Cantor summand has zero gradient
    /// almost everywhere).
    pub fn grad_in(&self, cell: usize, x: Vec2) -> Vec2 {
        let g = &self.grads[cell];
        Vec2::new(g[0].eval(x, 0.0), g[1].eval(x, 0.0))
    }

    /// `u⁺` and `u⁻` on skeleton edge `e`.
    pub fn one_sided(&self, e: usize, x: Vec2) -> (f64, f64) {
        let edge = &self.domain.skeleton()[e];
        (self.eval_in(edge.plus, x), self.eval_in(edge.minus, x))
    }

    /// `ũ(x)` off `J_u`, `u*` on it; vertices use the first closed cell.
    pub fn value(&self, x: Vec2) -> Result<f64> {
        match self.domain.locate(x) {
            Location::Cell(i) => Ok(self.eval_in(i, x)),
            Location::Edge(e) => {
                let (p, m) = self.one_sided(e, x);
                Ok(0.5 * (p + m))
            }
            Location::Vertex => self
                .domain
                .cell_of(x)
                .map(|i| self.eval_in(i, x))
                .ok_or_else(|| Error::domain("point lies outside the domain")),
            Location::Outside => Err(Error::domain("point lies outside the domain")),
        }
    }

    /// `(u⁺, u⁻, ν_u)` at a skeleton point.
    pub fn approximate_limits(&self, x: Vec2) -> Result<(f64, f64, Vec2)> {
        match self.domain.locate(x) {
            Location::Edge(e) => {
                let (p, m) = self.one_sided(e, x);
                Ok((p, m, self.domain.skeleton()[e].normal))
            }
            Location::Vertex => Err(Error::domain("approximate limits are not defined at vertices")),
            Location::Cell(_) => Err(Error::domain("point is not on the skeleton")),
            Location::Outside => Err(Error::domain("point lies outside the domain")),
        }
    }

    /// `u*(x)`: the jump average on `J_u`, `ũ(x)` elsewhere.
    pub fn precise_representative(&self, x: Vec2) -> Result<f64> {
        if self.domain.locate(x) == Location::Vertex {
            return Err(Error::domain("precise representative is not evaluated at vertices"));
        }
        self.value(x)
    }

    /// `‖u‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        self.norm
    }

    fn compute_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, cell) in self.domain.cells().iter().enumerate() {
            match cell {
                Cell::Interval { lo, hi } => {
                    if self.cantor_cell == Some(i) {
                        let c = self.cantor.expect("cantor cell implies component");
                        let coeffs: Vec<f64> = (0..self.cells[i].extents().0).map(|k| self.cells[i].coeff(k, 0, 0)).collect();
                        let shifted = {
                            let mut s = coeffs.clone();
                            s[0] += c.coefficient;
                            s
                        };
                        best = best.max(roots::max_abs_on(&coeffs, *lo, c.set.lo, 1e-14).0);
                        best = best.max(roots::max_abs_on(&shifted, c.set.hi, *hi, 1e-14).0);
                        for k in 0..=4096 {
                            let x = Vec2::on_line(c.set.lo + c.set.width() * k as f64 / 4096.0);
                            best = best.max(self.eval_in(i, x).abs());
                        }
                    } else {
                        let mut coeffs: Vec<f64> = (0..self.cells[i].extents().0).map(|k| self.cells[i].coeff(k, 0, 0)).collect();
                        if let Some(c) = &self.cantor {
                            if c.set.hi <= *lo {
                                coeffs[0] += c.coefficient;
                            }
                        }
                        best = best.max(roots::max_abs_on(&coeffs, *lo, *hi, 1e-14).0);
                    }
                }
                Cell::Polygon(p) => {
                    let mut cand = (0.0, p.vertices()[0]);
                    let consider = |x: Vec2, cand: &mut (f64, Vec2)| {
                        let v = self.cells[i].eval(x, 0.0).abs();
                        if v > cand.0 {
                            *cand = (v, x);
                        }
                    };
                    for (a, b) in p.edges() {
                        for k in 0..=64 {
                            consider(a.lerp(b, k as f64 / 64.0), &mut cand);
                        }
                    }
                    let (lo, hi) = p.bounds();
                    for ix in 0..=48 {
                        for iy in 0..=48 {
                            let x = Vec2::new(lo.x + (hi.x - lo.x) * ix as f64 / 48.0, lo.y + (hi.y - lo.y) * iy as f64 / 48.0);
                            if cell.contains_closed(x) {
                                consider(x, &mut cand);
                            }
                        }
                    }
                    let mut h = (hi.x - lo.x).max(hi.y - lo.y) / 48.0;
                    for _ in 0..60 {
                        let mut moved = false;
                        for d in [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)] {
                            let y = cand.1 + d.scale(h);
                            if cell.contains_closed(y) {
                                let v = self.cells[i].eval(y, 0.0).abs();
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
            }
        }
        best
    }

    /// `D^a u`, `D^j u`, `D^c u` as vector measures with their variations.
    pub fn derivative_parts(&self) -> DerivativeParts {
        let dim = self.domain.dimension();
        let mut ac = VectorMeasure::zero(dim);
        for (i, cell) in self.domain.cells().iter().enumerate() {
            let g = self.grads[i].clone();
            if g[0].is_zero() && g[1].is_zero() {
                continue;
            }
            let region = cell_region(cell);
            for k in 0..2 {
                if !g[k].is_zero() {
                    let p = g[k].clone();
                    ac.components[k].push_ac(region.clone(), Some(i), density(move |x| p.eval(x, 0.0)));
                }
            }
            let g2 = g.clone();
            ac.variation.push_ac(
                region,
                Some(i),
                density(move |x| crate::math::hypot(g2[0].eval(x, 0.0), g2[1].eval(x, 0.0))),
            );
        }
        let mut jump = VectorMeasure::zero(dim);
        for (e, edge) in self.domain.skeleton().iter().enumerate() {
            if !self.in_jump_set[e] {
                continue;
            }
            let diff = self.cells[edge.plus].sub(&self.cells[edge.minus]);
            let n = edge.normal;
            for k in 0..2 {
                let nk = if k == 0 { n.x } else { n.y };
                if nk != 0.0 {
                    let d = diff.clone();
                    jump.components[k].push_edge(edge.a, edge.b, Some(e), density(move |x| d.eval(x, 0.0) * nk));
                }
            }
            let d = diff.clone();
            jump.variation.push_edge(edge.a, edge.b, Some(e), density(move |x| d.eval(x, 0.0).abs()));
        }
        let mut cantor = VectorMeasure::zero(dim);
        if let (Some(c), Some(cell)) = (self.cantor, self.cantor_cell) {
            cantor.components[0].push_cantor(c.set, Some(cell), c.coefficient, constant_density(1.0));
            cantor.variation.push_cantor(c.set, Some(cell), c.coefficient.abs(), constant_density(1.0));
        }
        DerivativeParts {
            absolutely_continuous: ac,
            jump,
            cantor,
        }
    }

    /// `|Du|`.
    pub fn variation(&self) -> HybridMeasure {
        self.derivative_parts().total().variation
    }
}
