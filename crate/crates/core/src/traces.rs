//! Weak normal traces `β±(·, t)` of `B(·, t)` on skeleton edges and the
//! traces of the composite field `v(x) = B(x, u(x))`.
//!
//! For piecewise polynomials the one-sided normal components of the cell
//! polynomials are the traces, so everything here is evaluated exactly.

use alloc::format;
use alloc::vec::Vec;

use crate::bvfunc::PiecewiseBV;
use crate::field::PiecewiseField;
use crate::measure::{density, HybridMeasure};
use crate::poly::Poly;
use crate::vec2::Vec2;
use crate::{Error, Result};

fn normal_poly(p: &[Poly; 2], n: Vec2) -> Poly {
    p[0].scale(n.x).add(&p[1].scale(n.y))
}

/// `B(x from cell⁻, t)·ν` and `B(x from cell⁺, t)·ν` on one edge, as
/// polynomials in `(x, y, t)`.
#[derive(Clone, Debug)]
pub struct EdgeTraces {
    pub edge: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub normal: Vec2,
    pub minus: Poly,
    pub plus: Poly,
}

impl EdgeTraces {
    fn new(field: &PiecewiseField, e: usize) -> Result<Self> {
        let edge = field
            .domain()
            .skeleton()
            .get(e)
            .ok_or_else(|| Error::domain(format!("edge {e} is not part of the skeleton")))?;
        Ok(EdgeTraces {
            edge: e,
            a: edge.a,
            b: edge.b,
            normal: edge.normal,
            minus: normal_poly(field.cell_big_b(edge.minus), edge.normal),
            plus: normal_poly(field.cell_big_b(edge.plus), edge.normal),
        })
    }

    /// Point at arc parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> Vec2 {
        self.a.lerp(self.b, s)
    }

    pub fn beta_minus(&self, x: Vec2, t: f64) -> f64 {
        self.minus.eval(x, t)
    }

    pub fn beta_plus(&self, x: Vec2, t: f64) -> f64 {
        self.plus.eval(x, t)
    }

    /// `β* = (β⁺ + β⁻)/2`.
    pub fn beta_star(&self, x: Vec2, t: f64) -> f64 {
        0.5 * (self.beta_plus(x, t) + self.beta_minus(x, t))
    }

    fn samples(&self) -> usize {
        if self.a == self.b {
            1
        } else {
            17
        }
    }

    fn sample_point(&self, k: usize) -> (f64, Vec2) {
        let n = self.samples();
        let s = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
        (s, self.point(s))
    }
}

/// One row of a trace report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub edge: usize,
    pub s: f64,
    pub t: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
}

/// `β±(·, t)` on a set of skeleton edges at a fixed `t`.
#[derive(Clone, Debug)]
pub struct TracePair {
    pub t: f64,
    pub edges: Vec<EdgeTraces>,
}

impl TracePair {
    /// Samples both traces along every edge (17 points per segment).
    pub fn rows(&self) -> Vec<TraceRow> {
        let mut out = Vec::new();
        for e in &self.edges {
            for k in 0..e.samples() {
                let (s, x) = e.sample_point(k);
                out.push(TraceRow {
                    edge: e.edge,
                    s,
                    t: self.t,
                    beta_minus: e.beta_minus(x, self.t),
                    beta_plus: e.beta_plus(x, self.t),
                });
            }
        }
        out
    }

    /// `(β⁺ − β⁻)(·, t) H^{N−1}⌐Σ`.
    pub fn jump_measure(&self, dim: crate::geometry::Dimension) -> HybridMeasure {
        let mut m = HybridMeasure::zero(dim);
        for e in &self.edges {
            let d = e.plus.sub(&e.minus);
            if d.is_zero() {
                continue;
            }
            let t = self.t;
            m.push_edge(e.a, e.b, Some(e.edge), density(move |x| d.eval(x, t)));
        }
        m
    }
}

fn edge_list(field: &PiecewiseField, edges: &[usize]) -> Result<Vec<EdgeTraces>> {
    edges.iter().map(|&e| EdgeTraces::new(field, e)).collect()
}

/// `β∓(x, t) = B(x from cell∓, t)·ν` on the given edges.
pub fn normal_traces(field: &PiecewiseField, edges: &[usize], t: f64) -> Result<TracePair> {
    field.check_t(t)?;
    Ok(TracePair {
        t,
        edges: edge_list(field, edges)?,
    })
}

/// All skeleton edge indices.
pub fn whole_skeleton(field: &PiecewiseField) -> Vec<usize> {
    (0..field.domain().skeleton().len()).collect()
}

/// Largest difference quotient `|β±(x, t) − β±(x, s)| / |t − s|` over sampled
/// edge points and all pairs of a 21-point grid in `[−T, T]`.
pub fn trace_lipschitz_bound(field: &PiecewiseField, edges: &[usize]) -> Result<f64> {
    let list = edge_list(field, edges)?;
    let n = 21;
    let tm = field.t_max();
    let ts: Vec<f64> = (0..n).map(|k| -tm + 2.0 * tm * k as f64 / (n - 1) as f64).collect();
    let mut best: f64 = 0.0;
    for e in &list {
        for k in 0..e.samples() {
            let (_, x) = e.sample_point(k);
            for p in [&e.minus, &e.plus] {
                let vals: Vec<f64> = ts.iter().map(|&t| p.eval(x, t)).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        best = best.max((vals[j] - vals[i]).abs() / (ts[j] - ts[i]));
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Traces of `v(x) = B(x, u(x))` on one edge.
#[derive(Clone, Debug)]
pub struct CompositeTrace {
    pub traces: EdgeTraces,
    pub u_minus: Poly,
    pub u_plus: Poly,
    /// Cantor summand at a point edge; zero in 2D.
    pub shift: f64,
    pub in_jump_set: bool,
}

impl CompositeTrace {
    pub fn u_limits(&self, x: Vec2) -> (f64, f64) {
        (self.u_plus.eval(x, 0.0) + self.shift, self.u_minus.eval(x, 0.0) + self.shift)
    }

    /// `Tr⁻(v, Σ)(x) = β⁻(x, u⁻(x))`.
    pub fn tr_minus(&self, x: Vec2) -> f64 {
        self.traces.beta_minus(x, self.u_limits(x).1)
    }

    /// `Tr⁺(v, Σ)(x) = β⁺(x, u⁺(x))`.
    pub fn tr_plus(&self, x: Vec2) -> f64 {
        self.traces.beta_plus(x, self.u_limits(x).0)
    }
}

/// Checks `‖u‖_∞ ≤ T` and that field and function share the partition.
pub fn check_compatible(field: &PiecewiseField, u: &PiecewiseBV) -> Result<()> {
    let (fd, ud) = (field.domain(), u.domain());
    if fd.dimension() != ud.dimension() || fd.cells().len() != ud.cells().len() || fd.skeleton().len() != ud.skeleton().len() {
        return Err(Error::domain("field and function live on different partitions"));
    }
    if u.norm_inf() > field.t_max() {
        return Err(Error::domain(format!(
            "‖u‖_∞ = {} exceeds T = {}; enlarge the t range",
            u.norm_inf(),
            field.t_max()
        )));
    }
    Ok(())
}

/// `Tr±(v, Σ) = β±(x, u^±(x))` on the given edges. Off `J_u` both limits
/// equal `ũ`, so the same formula covers `Σ ∖ J_u`.
pub fn composite_traces(field: &PiecewiseField, u: &PiecewiseBV, edges: &[usize]) -> Result<Vec<CompositeTrace>> {
    check_compatible(field, u)?;
    let mut out = Vec::new();
    for t in edge_list(field, edges)? {
        let edge = &field.domain().skeleton()[t.edge];
        let shift = if edge.is_point() { u.cantor_value(edge.a) } else { 0.0 };
        out.push(CompositeTrace {
            u_minus: u.cell_poly(edge.minus).clone(),
            u_plus: u.cell_poly(edge.plus).clone(),
            shift,
            in_jump_set: u.edge_in_jump_set(t.edge),
            traces: t,
        });
    }
    Ok(out)
}

/// `(Tr⁺ − Tr⁻) H^{N−1}⌐Σ`.
pub fn composite_jump_measure(dim: crate::geometry::Dimension, traces: &[CompositeTrace]) -> HybridMeasure {
    let mut m = HybridMeasure::zero(dim);
    for c in traces {
        let c2 = c.clone();
        m.push_edge(c.traces.a, c.traces.b, Some(c.traces.edge), density(move |x| c2.tr_plus(x) - c2.tr_minus(x)));
    }
    m
}
