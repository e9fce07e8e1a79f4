//! Gauss–Green balances for `v(x) = B(x, u(x))` on sets of finite perimeter,
//! and the gluing of two composite fields across a polygonal interface.
//!
//! Traces on `∂*E` are taken from the cell entered along the interior normal
//! (inner trace) or against it (outer trace). Where `∂*E` crosses a cell
//! interior both coincide.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bvfunc::PiecewiseBV;
use crate::field::PiecewiseField;
use crate::geometry::{Cell, FinitePerimeterSet, PolygonalDomain, SegmentClass};
use crate::measure::{density, HybridMeasure, SetPart};
use crate::oracle::PiecewiseVectorField;
use crate::pairing::composite_divergence;
use crate::quad::Integrator;
use crate::traces::check_compatible;
use crate::vec2::Vec2;
use crate::{Error, Result, GEOM_TOL};

/// Both Gauss–Green formulas evaluated side by side. The interior normal
/// of `E` orients `∂*E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceReport {
    /// `Div v(E^1)`.
    pub lhs_interior: f64,
    /// `Div v(E^1 ∪ ∂*E)`.
    pub lhs_closure: f64,
    /// `−∫_{∂*E} Tr(v) · ν_int` with the trace from inside `E`.
    pub rhs_interior: f64,
    /// Same with the trace from outside `E`.
    pub rhs_closure: f64,
    pub residual_interior: f64,
    pub residual_closure: f64,
}

impl BalanceReport {
    fn new(lhs_interior: f64, lhs_closure: f64, rhs_interior: f64, rhs_closure: f64) -> Self {
        BalanceReport {
            lhs_interior,
            lhs_closure,
            rhs_interior,
            rhs_closure,
            residual_interior: lhs_interior - rhs_interior,
            residual_closure: lhs_closure - rhs_closure,
        }
    }

    /// `(lhs_closure − lhs_interior) − (rhs_closure − rhs_interior)`: both
    /// brackets equal the mass of `Div v` on `∂*E`.
    pub fn consistency(&self) -> f64 {
        (self.lhs_closure - self.lhs_interior) - (self.rhs_closure - self.rhs_interior)
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_interior.abs().max(self.residual_closure.abs())
    }
}

/// A piece of `∂*E` on which the cells on either side do not change.
#[derive(Clone, Copy, Debug)]
struct Interface {
    a: Vec2,
    b: Vec2,
    normal: Vec2,
    inner: usize,
    outer: usize,
}

fn interfaces(domain: &PolygonalDomain, set: &FinitePerimeterSet) -> Result<Vec<Interface>> {
    let mut out = Vec::new();
    for piece in set.reduced_boundary() {
        let mut cuts: Vec<f64> = alloc::vec![0.0, 1.0];
        if piece.a != piece.b {
            for cell in domain.cells() {
                if let Cell::Polygon(p) = cell {
                    for (s0, s1, _) in p.split_segment(piece.a, piece.b) {
                        cuts.push(s0);
                        cuts.push(s1);
                    }
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        let len = piece.measure();
        cuts.dedup_by(|x, y| (*x - *y).abs() * len <= GEOM_TOL);
        for w in cuts.windows(2) {
            let mid = piece.a.lerp(piece.b, 0.5 * (w[0] + w[1]));
            let side = |dir: Vec2| {
                domain
                    .cell_towards(mid, dir)
                    .ok_or_else(|| Error::domain("boundary of the set leaves the domain"))
            };
            out.push(Interface {
                a: piece.a.lerp(piece.b, w[0]),
                b: piece.a.lerp(piece.b, w[1]),
                normal: piece.normal,
                inner: side(piece.normal)?,
                outer: side(-piece.normal)?,
            });
            if piece.a == piece.b {
                break;
            }
        }
    }
    Ok(out)
}

fn flux(field: &PiecewiseField, u: &PiecewiseBV, cell: usize, x: Vec2, n: Vec2) -> f64 {
    field.eval_big_b_in(cell, x, u.eval_in(cell, x)).dot(n)
}

fn interface_integral<F: Fn(Vec2) -> f64>(f: F, a: Vec2, b: Vec2, q: &Integrator) -> f64 {
    if a == b {
        return f(a);
    }
    let len = a.dist(b);
    q.smooth_interval(|s| f(a.lerp(b, s / len)), 0.0, len, q.step_2d(len))
}

fn check_set(domain: &PolygonalDomain, set: &FinitePerimeterSet) -> Result<()> {
    crate::geometry::check_contained(set, domain)
}

/// `Div v(E^1) = −∫_{∂*E} Tr_in(v)·ν` and `Div v(E^1 ∪ ∂*E) = −∫_{∂*E} Tr_out(v)·ν`.
pub fn gauss_green(field: &PiecewiseField, u: &PiecewiseBV, set: &FinitePerimeterSet, q: &Integrator) -> Result<BalanceReport> {
    check_compatible(field, u)?;
    check_set(field.domain(), set)?;
    let div = composite_divergence(field, u)?;
    let lhs_interior = div.restrict_to_set(set, SetPart::Interior)?.mass(q)?;
    let lhs_closure = div.restrict_to_set(set, SetPart::Closure)?.mass(q)?;
    let (mut rhs_interior, mut rhs_closure) = (0.0, 0.0);
    for f in interfaces(field.domain(), set)? {
        rhs_interior -= interface_integral(|x| flux(field, u, f.inner, x, f.normal), f.a, f.b, q);
        rhs_closure -= interface_integral(|x| flux(field, u, f.outer, x, f.normal), f.a, f.b, q);
    }
    Ok(BalanceReport::new(lhs_interior, lhs_closure, rhs_interior, rhs_closure))
}

/// The formula for a weakly regular open set `Ω_w`. The left side is
/// `Div v(Ω_w)`, the right side the inner-trace flux. The closure columns
/// hold the check done through gluing: `lhs_closure` is the total mass of
/// `Div(χ_{Ω_w} v)`, which must vanish, and `rhs_closure` is that zero.
pub fn gauss_green_weakly_regular(field: &PiecewiseField, u: &PiecewiseBV, set: &FinitePerimeterSet, q: &Integrator) -> Result<BalanceReport> {
    check_compatible(field, u)?;
    check_set(field.domain(), set)?;
    let div = composite_divergence(field, u)?;
    let lhs_interior = div.restrict_to_set(set, SetPart::Interior)?.mass(q)?;
    let mut rhs_interior = 0.0;
    for f in interfaces(field.domain(), set)? {
        rhs_interior -= interface_integral(|x| flux(field, u, f.inner, x, f.normal), f.a, f.b, q);
    }
    let glued = glue(Some((field, u)), None, set)?;
    let total = glued.div.mass(q)?;
    Ok(BalanceReport::new(lhs_interior, total, rhs_interior, 0.0))
}

/// Data of one side of a gluing; `None` stands for the zero field.
pub type GlueSide<'a> = Option<(&'a PiecewiseField, &'a PiecewiseBV)>;

/// `v = v₁` on `U`, `v₂` off `closure(U)`, and its divergence.
#[derive(Clone, Debug)]
pub struct Glued {
    pub v: PiecewiseVectorField,
    pub div: HybridMeasure,
}

fn side_domain<'a>(s: &GlueSide<'a>) -> Option<&'a PolygonalDomain> {
    s.map(|(f, _)| f.domain())
}

/// `Div v = χ_{U^1} Div v₁ + χ_{U^0} Div v₂ + [Tr_in(v₁) − Tr_out(v₂)]·ν H^{N−1}⌐∂*U`.
/// Both sides are given on the whole ambient box and only their restrictions
/// are used.
pub fn glue(inner: GlueSide<'_>, outer: GlueSide<'_>, set: &FinitePerimeterSet) -> Result<Glued> {
    for (f, u) in [inner, outer].into_iter().flatten() {
        check_compatible(f, u)?;
    }
    let domain = side_domain(&inner)
        .or(side_domain(&outer))
        .ok_or_else(|| Error::domain("gluing needs at least one nonzero side"))?;
    if let (Some(d1), Some(d2)) = (side_domain(&inner), side_domain(&outer)) {
        if d1.bounds() != d2.bounds() || d1.dimension() != d2.dimension() {
            return Err(Error::domain("glued sides live on different ambient domains"));
        }
    }
    check_set(domain, set)?;
    let dim = domain.dimension();
    let mut v = PiecewiseVectorField::zero(dim);
    let mut div = HybridMeasure::zero(dim);
    if let Some((f, u)) = inner {
        v = v.plus(&PiecewiseVectorField::composite(f, u).inside(set));
        div = div.add(&composite_divergence(f, u)?.restrict_to_set(set, SetPart::Interior)?);
    }
    if let Some((f, u)) = outer {
        v = v.plus(&PiecewiseVectorField::composite(f, u).outside(set));
        div = div.add(&composite_divergence(f, u)?.restrict_to_set(set, SetPart::Exterior)?);
    }
    let data = Arc::new((inner.map(|(f, u)| (f.clone(), u.clone())), outer.map(|(f, u)| (f.clone(), u.clone()))));
    for f in interfaces(domain, set)? {
        let inner_cell = interfaces_cell(inner, domain, &f, true)?;
        let outer_cell = interfaces_cell(outer, domain, &f, false)?;
        let d = data.clone();
        let n = f.normal;
        div.push_edge(
            f.a,
            f.b,
            None,
            density(move |x| {
                let tin = d.0.as_ref().map_or(0.0, |(fi, ui)| flux(fi, ui, inner_cell, x, n));
                let tout = d.1.as_ref().map_or(0.0, |(fo, uo)| flux(fo, uo, outer_cell, x, n));
                tin - tout
            }),
        );
    }
    Ok(Glued { v, div })
}

// Each side may carry its own partition; the side cell is looked up there.
fn interfaces_cell(side: GlueSide<'_>, shared: &PolygonalDomain, f: &Interface, inner: bool) -> Result<usize> {
    let Some((field, _)) = side else {
        return Ok(0);
    };
    let own = field.domain();
    if core::ptr::eq(own, shared) {
        return Ok(if inner { f.inner } else { f.outer });
    }
    let mid = f.a.lerp(f.b, 0.5);
    let dir = if inner { f.normal } else { -f.normal };
    own.cell_towards(mid, dir)
        .ok_or_else(|| Error::domain("boundary of the set leaves the domain"))
}

fn compactly_inside(a: &FinitePerimeterSet, b: &FinitePerimeterSet) -> bool {
    match (a, b) {
        (FinitePerimeterSet::Intervals(ia), FinitePerimeterSet::Intervals(ib)) => ia
            .iter()
            .all(|&(lo, hi)| ib.iter().any(|&(blo, bhi)| lo > blo + GEOM_TOL && hi < bhi - GEOM_TOL)),
        (FinitePerimeterSet::Polygon(pa), FinitePerimeterSet::Polygon(pb)) => pa.edges().all(|(p, q)| {
            pb.contains_open(p)
                && pb.boundary_distance(p) > GEOM_TOL
                && pb.split_segment(p, q).iter().all(|&(_, _, c)| c == SegmentClass::Inside)
        }),
        _ => false,
    }
}

/// The glued divergence for `W ⋐ int(E) ⊂ E ⋐ U`: `v₁` is only needed on
/// `U` and `v₂` only off `closure(W)`, and the interface is `∂*E`.
pub fn extend(
    inner: GlueSide<'_>,
    outer: GlueSide<'_>,
    e: &FinitePerimeterSet,
    w: Option<&FinitePerimeterSet>,
    u_set: &FinitePerimeterSet,
) -> Result<HybridMeasure> {
    if let Some(w) = w {
        if !compactly_inside(w, e) {
            return Err(Error::domain("W is not compactly contained in the interior of E"));
        }
    }
    if !compactly_inside(e, u_set) {
        return Err(Error::domain("E is not compactly contained in U"));
    }
    if let Some(d) = side_domain(&inner).or(side_domain(&outer)) {
        check_set(d, u_set)?;
    }
    Ok(glue(inner, outer, e)?.div)
}
