//! The pairing measure `μ = (b(·, u), Du)`, the divergence of the composite
//! field `v(x) = B(x, u(x))`, and three independent ways of evaluating `μ`:
//! exact densities, the distributional definition, and the mollified limit.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bvfunc::PiecewiseBV;
use crate::clip;
use crate::field::{cell_region, PiecewiseField};
use crate::geometry::Cell;
use crate::measure::{density, HybridMeasure, TestFunction};
use crate::mollify::{mollify_with_gradient, Kernel, Mollifier};
use crate::oracle::extrapolate_to_zero;
use crate::quad::{Integrator, Panel, Resolution};
use crate::traces::check_compatible;
use crate::vec2::Vec2;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PairingResult {
    pub mu_ac: HybridMeasure,
    pub mu_c: HybridMeasure,
    pub mu_j: HybridMeasure,
    pub mu_total: HybridMeasure,
    /// `Div v = F_term + μ`.
    pub composite_div: HybridMeasure,
    /// `½[F(x, u⁺) + F(x, u⁻)] σ`.
    pub f_term: HybridMeasure,
}

struct Data {
    field: PiecewiseField,
    u: PiecewiseBV,
}

fn shared(field: &PiecewiseField, u: &PiecewiseBV) -> Result<Arc<Data>> {
    check_compatible(field, u)?;
    Ok(Arc::new(Data {
        field: field.clone(),
        u: u.clone(),
    }))
}

/// Exact densities of every part of `μ`, `F_term` and `Div v`.
pub fn pairing_decomposition(field: &PiecewiseField, u: &PiecewiseBV) -> Result<PairingResult> {
    let data = shared(field, u)?;
    let dim = field.domain().dimension();
    let lebesgue = u.cantor().map(|c| c.set);
    let mut mu_ac = HybridMeasure::zero(dim);
    let mut f_term = HybridMeasure::zero(dim);
    mu_ac.set_lebesgue_cantor(lebesgue);
    f_term.set_lebesgue_cantor(lebesgue);
    for (i, cell) in field.domain().cells().iter().enumerate() {
        let g = u.cell_grad(i);
        if !(g[0].is_zero() && g[1].is_zero()) {
            let d = data.clone();
            mu_ac.push_ac(
                cell_region(cell),
                Some(i),
                density(move |x| {
                    let t = d.u.eval_in(i, x);
                    d.field.eval_b_in(i, x, t).dot(d.u.grad_in(i, x))
                }),
            );
        }
        if !field.cell_div_big(i).is_zero() {
            let d = data.clone();
            f_term.push_ac(cell_region(cell), Some(i), density(move |x| d.field.cell_div_big(i).eval(x, d.u.eval_in(i, x))));
        }
    }
    let mut mu_j = HybridMeasure::zero(dim);
    for (e, edge) in field.domain().skeleton().iter().enumerate() {
        if !field.edge_jump_big(e).is_zero() {
            let d = data.clone();
            f_term.push_edge(
                edge.a,
                edge.b,
                Some(e),
                density(move |x| {
                    let (up, um) = d.u.one_sided(e, x);
                    let j = d.field.edge_jump_big(e);
                    0.5 * (j.eval(x, up) + j.eval(x, um))
                }),
            );
        }
        if u.edge_in_jump_set(e) {
            let d = data.clone();
            mu_j.push_edge(
                edge.a,
                edge.b,
                Some(e),
                density(move |x| {
                    let (up, um) = d.u.one_sided(e, x);
                    let sk = &d.field.domain().skeleton()[e];
                    let star = |t: f64| 0.5 * (d.field.eval_big_b_in(sk.plus, x, t) + d.field.eval_big_b_in(sk.minus, x, t)).dot(sk.normal);
                    star(up) - star(um)
                }),
            );
        }
    }
    let mut mu_c = HybridMeasure::zero(dim);
    if let Some(c) = u.cantor() {
        let cell = field
            .domain()
            .cells()
            .iter()
            .position(|cell| matches!(cell, Cell::Interval { lo, hi } if c.set.inside(*lo, *hi)))
            .ok_or_else(|| Error::domain("Cantor set crosses the skeleton"))?;
        let d = data.clone();
        mu_c.push_cantor(c.set, Some(cell), c.coefficient, density(move |x| d.field.eval_b_in(cell, x, d.u.eval_in(cell, x)).x));
    }
    let mu_total = mu_ac.add(&mu_j).add(&mu_c);
    let composite_div = f_term.add(&mu_total);
    Ok(PairingResult {
        mu_ac,
        mu_c,
        mu_j,
        mu_total,
        composite_div,
        f_term,
    })
}

/// `Div[B(x, u(x))] = F_term + μ`.
pub fn composite_divergence(field: &PiecewiseField, u: &PiecewiseBV) -> Result<HybridMeasure> {
    Ok(pairing_decomposition(field, u)?.composite_div)
}

fn check_support(field: &PiecewiseField, phi: &TestFunction, margin: f64) -> Result<()> {
    let m = field.domain().boundary_margin(phi.center());
    if m <= phi.radius() + margin {
        return Err(Error::domain(format!(
            "test function support (radius {}) plus {} leaves the domain",
            phi.radius(),
            margin
        )));
    }
    Ok(())
}

/// `∫ B(x, u(x))·∇φ dx` with cell-aligned panels.
pub fn composite_flux_integral(field: &PiecewiseField, u: &PiecewiseBV, phi: &TestFunction, q: &Integrator) -> Result<f64> {
    check_compatible(field, u)?;
    let bbox = phi.support_box();
    let mut acc = 0.0;
    for (i, cell) in field.domain().cells().iter().enumerate() {
        let f = |x: Vec2| field.eval_big_b_in(i, x, u.eval_in(i, x)).dot(phi.gradient(x));
        match cell {
            Cell::Interval { lo, hi } => {
                let (a, b) = (lo.max(bbox.0.x), hi.min(bbox.1.x));
                acc += q.interval(|s| f(Vec2::on_line(s)), a, b, q.step_1d(2.0 * phi.radius()), u.cantor().map(|c| &c.set));
            }
            Cell::Polygon(p) => {
                acc += q.polygon(f, p.vertices(), &[], Some(bbox), q.step_2d(2.0 * phi.radius()));
            }
        }
    }
    Ok(acc)
}

/// `−∫ ½[F(x, u⁺) + F(x, u⁻)] φ dσ − ∫ B(x, u(x))·∇φ dx`.
pub fn pairing_by_definition(field: &PiecewiseField, u: &PiecewiseBV, phi: &TestFunction, q: &Integrator) -> Result<f64> {
    check_support(field, phi, 0.0)?;
    let r = pairing_decomposition(field, u)?;
    Ok(-r.f_term.apply_with(phi, q)? - composite_flux_integral(field, u, phi, q)?)
}

/// Gauss–Legendre order of the planar mollified quadrature. The extrapolated
/// limit is far less sensitive to panel error than the individual values, and
/// order 4 on `ε/2` panels keeps it within `1e-4` of the exact pairing.
const PLANAR_ORDER: usize = 4;

/// Mollified pairings along an `ε` sequence and their extrapolated limit.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifiedPairing {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
}

/// `∫ φ b(x, u_ε(x))·∇u_ε(x) dx` for each `ε`, extrapolated to `ε = 0` by
/// polynomial (Richardson–Neville) extrapolation.
pub fn pairing_by_mollification(
    field: &PiecewiseField,
    u: &PiecewiseBV,
    phi: &TestFunction,
    eps: &[f64],
    q: &Integrator,
) -> Result<MollifiedPairing> {
    Ok(pairing_by_mollification_many(field, u, core::slice::from_ref(phi), eps, q)?.remove(0))
}

/// As [`pairing_by_mollification`] for several test functions sharing one
/// set of quadrature nodes.
pub fn pairing_by_mollification_many(
    field: &PiecewiseField,
    u: &PiecewiseBV,
    phis: &[TestFunction],
    eps: &[f64],
    q: &Integrator,
) -> Result<Vec<MollifiedPairing>> {
    check_compatible(field, u)?;
    if eps.is_empty() {
        return Err(Error::domain("empty ε sequence"));
    }
    let kernel = Arc::new(Kernel::new(field.domain().dimension()));
    let mut table = vec![Vec::with_capacity(eps.len()); phis.len()];
    for &e in eps {
        let m = Mollifier::with_kernel(kernel.clone(), e)?;
        for (row, v) in table.iter_mut().zip(mollified_values(field, u, phis, &m, q)?) {
            row.push(v);
        }
    }
    Ok(table
        .into_iter()
        .map(|values| MollifiedPairing {
            limit: extrapolate_to_zero(eps, &values),
            eps: eps.to_vec(),
            values,
        })
        .collect())
}

/// Mollified pairings of all `phis` at one radius.
pub fn mollified_values(field: &PiecewiseField, u: &PiecewiseBV, phis: &[TestFunction], m: &Mollifier, q: &Integrator) -> Result<Vec<f64>> {
    check_compatible(field, u)?;
    if phis.is_empty() {
        return Ok(Vec::new());
    }
    let eps = m.eps();
    for phi in phis {
        check_support(field, phi, eps).map_err(|_| Error::domain(format!("ε = {eps} is too large: supp φ + B_ε leaves the domain")))?;
    }
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut min_width = f64::INFINITY;
    for phi in phis {
        let (a, b) = phi.support_box();
        lo = Vec2::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Vec2::new(hi.x.max(b.x), hi.y.max(b.y));
        min_width = min_width.min(2.0 * phi.radius());
    }
    let mut acc = vec![0.0; phis.len()];
    let mut err = None;
    let domain = field.domain();
    let planar = Integrator::new(Resolution {
        order: PLANAR_ORDER,
        ..q.resolution().clone()
    });
    for (i, cell) in domain.cells().iter().enumerate() {
        let mut visit = |x: Vec2, w: f64| {
            if err.is_some() {
                return;
            }
            match mollify_with_gradient(u, m, x) {
                Ok((v, g)) => {
                    let val = field.eval_b_in(i, x, v).dot(g) * w;
                    if val != 0.0 {
                        for (a, phi) in acc.iter_mut().zip(phis) {
                            *a += phi.eval(x) * val;
                        }
                    }
                }
                Err(e) => err = Some(e),
            }
        };
        let flat = {
            let g = u.cell_grad(i);
            g[0].is_zero() && g[1].is_zero()
        };
        match cell {
            Cell::Interval { lo: a, hi: b } => {
                let (a, b) = (a.max(lo.x), b.min(hi.x));
                if b <= a {
                    continue;
                }
                let mut marks: Vec<f64> = vec![a, b];
                let mut tubes: Vec<(f64, f64)> = Vec::new();
                for e in domain.skeleton() {
                    tubes.push((e.a.x - eps, e.a.x + eps));
                }
                if let Some(c) = u.cantor() {
                    tubes.push((c.set.lo - eps, c.set.hi + eps));
                }
                for &(s, t) in &tubes {
                    marks.extend([s, t]);
                }
                marks.retain(|&x| x >= a && x <= b);
                marks.sort_by(f64::total_cmp);
                marks.dedup();
                for w in marks.windows(2) {
                    let (s, t) = (w[0], w[1]);
                    let mid = 0.5 * (s + t);
                    let near = tubes.iter().any(|&(p, r)| mid > p && mid < r);
                    if !near && flat {
                        continue;
                    }
                    let step = if near { eps / 8.0 } else { q.step_1d(min_width) };
                    let panels = crate::math::ceil((t - s) / step).max(1.0) as usize;
                    let h = (t - s) / panels as f64;
                    for k in 0..panels {
                        let p0 = s + h * k as f64;
                        for (z, wz) in q.rule().unit_pairs() {
                            visit(Vec2::on_line(p0 + h * z), wz * h);
                        }
                    }
                }
            }
            Cell::Polygon(p) => {
                let edges: Vec<(Vec2, Vec2)> = domain.skeleton().iter().map(|e| (e.a, e.b)).collect();
                let classify = |a: Vec2, b: Vec2| {
                    let c = a.lerp(b, 0.5);
                    let half_diag = 0.5 * a.dist(b);
                    let near = edges.iter().any(|&(s, t)| clip::point_segment_distance(c, s, t).0 < eps + half_diag);
                    if near {
                        Panel::Refine
                    } else if flat {
                        Panel::Skip
                    } else {
                        Panel::Keep
                    }
                };
                planar.polygon_graded(p.vertices(), (lo, hi), q.step_2d(min_width), eps / 2.0, &classify, &mut visit);
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(acc)
}

/// Classical pairing `(A, Du) = Div(uA) − u* Div A` for a `t`-independent
/// field, assembled from its own closed form: `A·∇u` on cells,
/// `½(u⁺ − u⁻)(A⁺ + A⁻)·ν` on edges and `A₁ dD^c u` on the Cantor part.
pub fn anzellotti_pairing(field: &PiecewiseField, u: &PiecewiseBV) -> Result<HybridMeasure> {
    if !field.is_t_independent() {
        return Err(Error::domain("the classical pairing needs a t-independent field b(x, t) = A(x)"));
    }
    let data = shared(field, u)?;
    let dim = field.domain().dimension();
    let mut m = HybridMeasure::zero(dim);
    m.set_lebesgue_cantor(u.cantor().map(|c| c.set));
    for (i, cell) in field.domain().cells().iter().enumerate() {
        let g = u.cell_grad(i);
        if g[0].is_zero() && g[1].is_zero() {
            continue;
        }
        let d = data.clone();
        m.push_ac(cell_region(cell), Some(i), density(move |x| d.field.eval_b_in(i, x, 0.0).dot(d.u.grad_in(i, x))));
    }
    for (e, edge) in field.domain().skeleton().iter().enumerate() {
        if !u.edge_in_jump_set(e) {
            continue;
        }
        let d = data.clone();
        m.push_edge(
            edge.a,
            edge.b,
            Some(e),
            density(move |x| {
                let sk = &d.field.domain().skeleton()[e];
                let (up, um) = d.u.one_sided(e, x);
                let avg = (d.field.eval_b_in(sk.plus, x, 0.0) + d.field.eval_b_in(sk.minus, x, 0.0)).scale(0.5);
                (up - um) * avg.dot(sk.normal)
            }),
        );
    }
    if let Some(c) = u.cantor() {
        let cell = field.domain().cell_of(Vec2::on_line(0.5 * (c.set.lo + c.set.hi))).ok_or_else(|| Error::domain("Cantor set outside the domain"))?;
        let d = data.clone();
        m.push_cantor(c.set, Some(cell), c.coefficient, density(move |x| d.field.eval_b_in(cell, x, 0.0).x));
    }
    Ok(m)
}

/// `‖b‖_∞ |Du|(E)`, the bound on `|μ|(E)`.
pub fn pairing_bound(field: &PiecewiseField, u: &PiecewiseBV, set: &crate::geometry::FinitePerimeterSet, q: &Integrator) -> Result<f64> {
    Ok(field.norm_b_inf() * u.variation().total_variation(set, q)?)
}
