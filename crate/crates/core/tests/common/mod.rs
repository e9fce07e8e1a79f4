#![allow(dead_code)]

use dmpair_core::geometry::{Dimension, PolygonalDomain};
use dmpair_core::measure::TestFunction;
use dmpair_core::{PiecewiseBV, PiecewiseField, Poly, Vec2};
use proptest::prelude::*;

// Five-point Gauss rule on [-1, 1], written out so the brute-force sums below
// share nothing with the crate's own quadrature.
const NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss over `[a, b]` with `n` panels.
pub fn gauss1(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let c = a + (k as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            acc += w * f(c + 0.5 * h * x);
        }
    }
    acc * 0.5 * h
}

/// Piecewise composite rule: `breaks` must contain every discontinuity.
pub fn gauss1_breaks(f: impl Fn(f64) -> f64, breaks: &[f64], n: usize) -> f64 {
    breaks.windows(2).map(|w| gauss1(&f, w[0], w[1], n)).sum()
}

/// Tensor rule on the grid `xs × ys`; discontinuities must lie on grid lines.
pub fn gauss2(f: impl Fn(Vec2) -> f64, xs: &[f64], ys: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            acc += gauss1(|y| gauss1(|x| f(Vec2::new(x, y)), wx[0], wx[1], n), wy[0], wy[1], n);
        }
    }
    acc
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(b.abs())
}

pub fn bump1(c: f64, r: f64) -> TestFunction {
    TestFunction::normalized(Dimension::One, Vec2::on_line(c), r).unwrap()
}

pub fn bump2(c: Vec2, r: f64) -> TestFunction {
    TestFunction::normalized(Dimension::Two, c, r).unwrap()
}

pub fn x() -> Poly {
    Poly::monomial(1.0, 1, 0, 0)
}

pub fn y() -> Poly {
    Poly::monomial(1.0, 0, 1, 0)
}

pub fn t() -> Poly {
    Poly::monomial(1.0, 0, 0, 1)
}

pub fn c(v: f64) -> Poly {
    Poly::constant(v)
}

/// `(−2, 2)` cut at 0.
pub fn line2() -> PolygonalDomain {
    PolygonalDomain::line(-2.0, 2.0, &[0.0]).unwrap()
}

/// `A = sign(x)` as a t-independent field.
pub fn sign_field(t_max: f64) -> PiecewiseField {
    PiecewiseField::t_independent(line2(), vec![[c(-1.0), Poly::zero()], [c(1.0), Poly::zero()]], t_max).unwrap()
}

pub fn heaviside() -> PiecewiseBV {
    PiecewiseBV::new(line2(), vec![Poly::zero(), c(1.0)], None).unwrap()
}

/// Axis-aligned grid partition with cells ordered row by row from the bottom.
pub fn grid(xs: &[f64], ys: &[f64]) -> PolygonalDomain {
    let mut cells = Vec::new();
    for wy in ys.windows(2) {
        for wx in xs.windows(2) {
            cells.push(vec![
                Vec2::new(wx[0], wy[0]),
                Vec2::new(wx[1], wy[0]),
                Vec2::new(wx[1], wy[1]),
                Vec2::new(wx[0], wy[1]),
            ]);
        }
    }
    let lo = Vec2::new(xs[0], ys[0]);
    let hi = Vec2::new(*xs.last().unwrap(), *ys.last().unwrap());
    PolygonalDomain::planar(lo, hi, cells).unwrap()
}

/// Grid cell holding `p` for points off the grid lines.
pub fn grid_cell(xs: &[f64], ys: &[f64], p: Vec2) -> usize {
    let i = xs.windows(2).position(|w| p.x > w[0] && p.x < w[1]).unwrap();
    let j = ys.windows(2).position(|w| p.y > w[0] && p.y < w[1]).unwrap();
    j * (xs.len() - 1) + i
}

/// The unit square embedded in a 3×3 grid of `[-2, 3]²`.
pub const GX: [f64; 4] = [-2.0, 0.0, 1.0, 3.0];

pub fn square_grid() -> PolygonalDomain {
    grid(&GX, &GX)
}

pub const CENTER_CELL: usize = 4;

pub fn unit_square() -> dmpair_core::FinitePerimeterSet {
    dmpair_core::FinitePerimeterSet::polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]).unwrap()
}

/// Random polynomial in `(x, y, t)` with the given degree caps and
/// coefficients in `[-1, 1]`.
pub fn poly(dx: usize, dy: usize, dt: usize) -> impl Strategy<Value = Poly> {
    let n = (dx + 1) * (dy + 1) * (dt + 1);
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |v| Poly::from_dense(dx + 1, dy + 1, dt + 1, v).unwrap())
}

/// Scales `p` so that its coefficient sum, a bound for `|p|` on the unit
/// box, is at most `cap`.
pub fn cap(p: Poly, cap: f64) -> Poly {
    let (nx, ny, nt) = p.extents();
    let mut s = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nt {
                s += p.coeff(i, j, k).abs();
            }
        }
    }
    if s > cap {
        p.scale(cap / s)
    } else {
        p
    }
}

/// Random convex polygon: sorted angles on an ellipse-ish ring around `c`.
pub fn convex_polygon(c: Vec2, rmin: f64, rmax: f64) -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((0.0f64..1.0, rmin..rmax), 3..7).prop_map(move |mut v| {
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v.dedup_by(|a, b| (a.0 - b.0).abs() < 0.05);
        let n = v.len();
        let r = v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let mut pts: Vec<Vec2> = v
            .iter()
            .enumerate()
            .map(|(k, &(a, _))| {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.8 * a) / n as f64;
                c + Vec2::new(th.cos(), th.sin()).scale(r)
            })
            .collect();
        if pts.len() < 3 {
            pts = vec![c + Vec2::new(r, 0.0), c + Vec2::new(-0.5 * r, 0.8 * r), c + Vec2::new(-0.5 * r, -0.8 * r)];
        }
        pts
    })
}
