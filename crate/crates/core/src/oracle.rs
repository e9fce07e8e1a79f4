//! The brute-force referee: weak divergences by quadrature, one-sided
//! fluxes by shrinking half-ball averages, and convergence studies.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bvfunc::PiecewiseBV;
use crate::cantor::CantorSet;
use crate::clip;
use crate::field::{cell_region, PiecewiseField};
use crate::geometry::{Dimension, FinitePerimeterSet};
use crate::math;
use crate::measure::{Region, TestFunction};
use crate::quad::{GaussLegendre, Integrator};
use crate::vec2::Vec2;
use crate::{Error, Result};

pub type VectorEval = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// One summand of a piecewise vector field: `sign · v` on a region, where
/// `v` is smooth on the whole region.
#[derive(Clone)]
pub struct FieldPiece {
    pub region: Region,
    pub sign: f64,
    pub eval: VectorEval,
}

impl core::fmt::Debug for FieldPiece {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FieldPiece").field("region", &self.region).field("sign", &self.sign).finish()
    }
}

/// A bounded vector field given as a signed sum of smooth pieces.
#[derive(Clone, Debug)]
pub struct PiecewiseVectorField {
    pub dim: Dimension,
    pub pieces: Vec<FieldPiece>,
    /// Cantor set entering the pieces through a Cantor function (1D).
    pub cantor: Option<CantorSet>,
}

fn region_contains(r: &Region, x: Vec2) -> bool {
    match r {
        Region::Interval { lo, hi } => x.x > *lo && x.x < *hi,
        Region::Polygon { subject, windows } => {
            clip::winding_contains(subject, x)
                && windows.iter().all(|w| {
                    let n = w.len();
                    (0..n).all(|i| (w[(i + 1) % n] - w[i]).cross(x - w[i]) >= 0.0)
                })
        }
    }
}

impl PiecewiseVectorField {
    pub fn zero(dim: Dimension) -> Self {
        PiecewiseVectorField {
            dim,
            pieces: Vec::new(),
            cantor: None,
        }
    }

    /// `v(x) = B(x, u(x))`, one piece per cell.
    pub fn composite(field: &PiecewiseField, u: &PiecewiseBV) -> Self {
        let shared = Arc::new((field.clone(), u.clone()));
        let pieces = field
            .domain()
            .cells()
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let d = shared.clone();
                FieldPiece {
                    region: cell_region(cell),
                    sign: 1.0,
                    eval: Arc::new(move |x| d.0.eval_big_b_in(i, x, d.1.eval_in(i, x))),
                }
            })
            .collect();
        PiecewiseVectorField {
            dim: field.domain().dimension(),
            pieces,
            cantor: u.cantor().map(|c| c.set),
        }
    }

    /// `B(·, t)` at a fixed `t`.
    pub fn at_level(field: &PiecewiseField, t: f64) -> Self {
        let shared = Arc::new(field.clone());
        let pieces = field
            .domain()
            .cells()
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let d = shared.clone();
                FieldPiece {
                    region: cell_region(cell),
                    sign: 1.0,
                    eval: Arc::new(move |x| d.eval_big_b_in(i, x, t)),
                }
            })
            .collect();
        PiecewiseVectorField {
            dim: field.domain().dimension(),
            pieces,
            cantor: None,
        }
    }

    /// A single smooth field on a region.
    pub fn smooth(dim: Dimension, region: Region, eval: VectorEval) -> Self {
        PiecewiseVectorField {
            dim,
            pieces: vec![FieldPiece { region, sign: 1.0, eval }],
            cantor: None,
        }
    }

    /// `χ_E v`.
    pub fn inside(&self, set: &FinitePerimeterSet) -> Self {
        let mut out = PiecewiseVectorField { pieces: Vec::new(), ..self.clone() };
        for p in &self.pieces {
            for r in p.region.inside(set) {
                out.pieces.push(FieldPiece { region: r, ..p.clone() });
            }
        }
        out
    }

    /// `χ_{Ω∖closure(E)} v`.
    pub fn outside(&self, set: &FinitePerimeterSet) -> Self {
        let mut out = PiecewiseVectorField { pieces: Vec::new(), ..self.clone() };
        for p in &self.pieces {
            for (r, s) in p.region.outside(set) {
                out.pieces.push(FieldPiece {
                    region: r,
                    sign: p.sign * s,
                    eval: p.eval.clone(),
                });
            }
        }
        out
    }

    /// Sum of two fields.
    pub fn plus(&self, other: &PiecewiseVectorField) -> Self {
        let mut out = self.clone();
        out.pieces.extend(other.pieces.iter().cloned());
        out.cantor = self.cantor.or(other.cantor);
        out
    }

    /// Pointwise value off the piece boundaries.
    pub fn eval(&self, x: Vec2) -> Vec2 {
        let mut v = Vec2::ZERO;
        for p in &self.pieces {
            if region_contains(&p.region, x) {
                v += (p.eval)(x).scale(p.sign);
            }
        }
        v
    }
}

/// `⟨Div v, φ⟩ = −∫ v·∇φ dx` with panels aligned to every piece.
pub fn weak_divergence(v: &PiecewiseVectorField, phi: &TestFunction, q: &Integrator) -> Result<f64> {
    if phi.dimension() != v.dim {
        return Err(Error::domain("test function and field dimensions differ"));
    }
    let bbox = phi.support_box();
    let width = 2.0 * phi.radius();
    let step = match v.dim {
        Dimension::One => q.step_1d(width),
        Dimension::Two => q.step_2d(width),
    };
    let mut acc = 0.0;
    for p in &v.pieces {
        let f = |x: Vec2| (p.eval)(x).dot(phi.gradient(x));
        acc += p.sign * p.region.integrate(q, &f, Some(bbox), step, v.cantor.as_ref());
    }
    Ok(-acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Against the normal.
    Minus,
    /// Along the normal.
    Plus,
}

/// Half-ball averages of `v·ν` and their extrapolated limit.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxEstimate {
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
    pub limit: f64,
}

/// Average of `v·ν` over the half ball of radius `r` at `x` on the given side.
pub fn half_ball_average(v: &PiecewiseVectorField, x: Vec2, normal: Vec2, side: Side, r: f64) -> f64 {
    let gl = GaussLegendre::new(12);
    let sgn = if side == Side::Plus { 1.0 } else { -1.0 };
    match v.dim {
        Dimension::One => {
            let d = sgn * normal.x.signum();
            let mut acc = 0.0;
            for (s, w) in gl.unit_pairs() {
                acc += w * v.eval(Vec2::on_line(x.x + d * r * s)).dot(normal);
            }
            acc
        }
        Dimension::Two => {
            let n = normal.normalized().scale(sgn);
            let t = n.perp();
            let mut acc = 0.0;
            for (a, wa) in gl.unit_pairs() {
                let th = core::f64::consts::PI * (a - 0.5);
                let dir = n.scale(math::cos(th)) + t.scale(math::sin(th));
                for (s, ws) in gl.unit_pairs() {
                    let rho = r * s;
                    acc += wa * ws * rho * v.eval(x + dir.scale(rho)).dot(normal);
                }
            }
            // ∫∫ ρ dρ dθ over the half disc, divided by its area π r²/2
            acc * core::f64::consts::PI * r / (core::f64::consts::PI * r * r / 2.0)
        }
    }
}

/// One-sided normal trace of `v` at `x` from half-ball averages over the
/// radii, extrapolated to `r = 0`.
pub fn one_sided_flux(v: &PiecewiseVectorField, x: Vec2, normal: Vec2, side: Side, radii: &[f64]) -> Result<FluxEstimate> {
    if radii.len() < 2 {
        return Err(Error::domain("need at least two radii"));
    }
    let averages: Vec<f64> = radii.iter().map(|&r| half_ball_average(v, x, normal, side, r)).collect();
    let limit = extrapolate_to_zero(radii, &averages);
    let partial = extrapolate_to_zero(&radii[..radii.len() - 1], &averages[..radii.len() - 1]);
    let scale = 1.0f64.max(limit.abs());
    let spread = averages.iter().map(|a| (a - limit).abs()).fold(0.0, f64::max);
    if (partial - limit).abs() > 1e-3 * scale.max(spread) {
        return Err(Error::numeric(format!("half-ball averages at ({}, {}) do not settle", x.x, x.y), limit));
    }
    Ok(FluxEstimate {
        radii: radii.to_vec(),
        averages,
        limit,
    })
}

/// Value at 0 of the interpolating polynomial through `(h_k, v_k)`.
pub fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p: Vec<f64> = v.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p.first().copied().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    /// `(v_k − v_{k+1}) / (v_{k+1} − v_{k+2})`.
    pub ratios: Vec<f64>,
    pub limit: f64,
    pub order: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    /// False when the errors do not decrease monotonically.
    pub reliable: bool,
    pub note: String,
}

/// Evaluates along a strictly decreasing parameter sequence, extrapolates to
/// zero and fits the order by least squares on `log|v − limit|`.
pub fn convergence_study(eval: &mut dyn FnMut(f64) -> Result<f64>, params: &[f64]) -> Result<ConvergenceStudy> {
    let mut values = Vec::with_capacity(params.len());
    for &h in params {
        values.push(eval(h)?);
    }
    study_from_values(params, &values)
}

/// Same analysis on precomputed values.
pub fn study_from_values(params: &[f64], values: &[f64]) -> Result<ConvergenceStudy> {
    if params.len() < 4 || values.len() != params.len() {
        return Err(Error::domain("a convergence study needs at least four parameter values"));
    }
    if params.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 0.0) {
        return Err(Error::domain("parameter sequence must be positive and strictly decreasing"));
    }
    let limit = extrapolate_to_zero(params, values);
    let ratios = values
        .windows(3)
        .map(|w| (w[0] - w[1]) / (w[1] - w[2]))
        .collect();
    let errs: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let scale = 1.0f64.max(limit.abs());
    let mut reliable = errs.windows(2).all(|w| w[1] <= w[0]);
    let mut note = String::new();
    // the last point is pinned by the extrapolant, so fit the others
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(&errs)
        .take(params.len() - 1)
        .filter(|(_, &e)| e > 1e-15 * scale)
        .map(|(&h, &e)| (math::ln(h), math::ln(e)))
        .collect();
    let (order, fit_residual) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let res = math::sqrt(pts.iter().map(|p| { let r = p.1 - my - slope * (p.0 - mx); r * r }).sum::<f64>() / n);
        (slope, res)
    } else {
        reliable = false;
        note.push_str("errors at rounding level; order undetermined");
        (f64::NAN, 0.0)
    };
    if !reliable && note.is_empty() {
        note.push_str("error sequence is not monotone");
    }
    Ok(ConvergenceStudy {
        params: params.to_vec(),
        values: values.to_vec(),
        ratios,
        limit,
        order,
        fit_residual,
        reliable,
        note,
    })
}
