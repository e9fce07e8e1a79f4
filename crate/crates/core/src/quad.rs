//! Gauss–Legendre rules, adaptive refinement, and panelized integration over
//! clipped polygons, segments, and intervals that may contain a Cantor set.

use alloc::vec;
use alloc::vec::Vec;

use crate::cantor::CantorSet;
use crate::clip;
use crate::math;
use crate::vec2::Vec2;
use crate::Error;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and its derivative.
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if n == 1 {
                x = 0.0;
                dp = 1.0;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n == 1 {
            weights[0] = 2.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[0, 1]`.
    pub fn unit_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule on `panels` equal subintervals.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(&f, lo, lo + h)
            })
            .sum()
    }
}

/// Globally adaptive bisection driven by the difference between a panel and
/// its two halves. Returns a numeric error carrying the best estimate when the
/// depth limit is hit before `abs_tol` is met.
pub fn adaptive<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64, Error> {
    fn rec<F: Fn(f64) -> f64>(
        rule: &GaussLegendre,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        ok: &mut bool,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = rule.integrate(f, a, m);
        let right = rule.integrate(f, m, b);
        let refined = left + right;
        if (refined - whole).abs() <= tol || depth == 0 {
            if depth == 0 && (refined - whole).abs() > tol {
                *ok = false;
            }
            return refined;
        }
        rec(rule, f, a, m, left, 0.5 * tol, depth - 1, ok)
            + rec(rule, f, m, b, right, 0.5 * tol, depth - 1, ok)
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = rule.integrate(&f, a, b);
    let mut ok = true;
    let value = rec(rule, &f, a, b, whole, abs_tol, max_depth, &mut ok);
    if ok {
        Ok(value)
    } else {
        Err(Error::numeric("adaptive quadrature hit its depth limit", value))
    }
}

/// What a graded quadrature does with a panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Panel {
    Skip,
    Keep,
    Refine,
}

/// Resolution knobs shared by every integrator in the crate.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    /// Panels spanning the characteristic length of a 1D integration window.
    pub panels_1d: usize,
    /// Panels per side spanning the characteristic length of a 2D window.
    pub panels_2d: usize,
    /// Gauss–Legendre order per panel (per direction in 2D).
    pub order: usize,
    /// Self-similar depth used when a Lebesgue integrand involves a Cantor
    /// function.
    pub cantor_depth: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            panels_1d: 4096,
            panels_2d: 48,
            order: 8,
            cantor_depth: 14,
        }
    }
}

/// Panelized Gauss–Legendre integration with fixed resolution.
#[derive(Clone, Debug)]
pub struct Integrator {
    resolution: Resolution,
    rule: GaussLegendre,
    low: GaussLegendre,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::new(Resolution::default())
    }
}

impl Integrator {
    pub fn new(resolution: Resolution) -> Self {
        let rule = GaussLegendre::new(resolution.order.max(1));
        let low = GaussLegendre::new(3);
        Integrator {
            resolution,
            rule,
            low,
        }
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Panel width for a 1D window of characteristic length `extent`.
    pub fn step_1d(&self, extent: f64) -> f64 {
        extent / self.resolution.panels_1d as f64
    }

    /// Panel width for a 2D window of characteristic length `extent`.
    pub fn step_2d(&self, extent: f64) -> f64 {
        extent / self.resolution.panels_2d as f64
    }

    /// Smooth integrand on `[a, b]` with panels no wider than `step`.
    pub fn smooth_interval<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, step: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = math::ceil((b - a) / step).max(1.0) as usize;
        self.rule.composite(f, a, b, panels)
    }

    /// Lebesgue integral over `[a, b]` of an integrand that is smooth except
    /// through a Cantor function supported on `cantor`. Removed middle thirds
    /// are integrated as smooth panels; surviving intervals at the configured
    /// depth use their midpoint, where the Cantor function equals its mean.
    pub fn interval<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        step: f64,
        cantor: Option<&CantorSet>,
    ) -> f64 {
        if b <= a {
            return 0.0;
        }
        let Some(cs) = cantor.filter(|cs| cs.hi > a && cs.lo < b) else {
            return self.smooth_interval(&f, a, b, step);
        };
        let mut acc = self.smooth_interval(&f, a, cs.lo.max(a), step);
        acc += self.smooth_interval(&f, cs.hi.min(b), b, step);
        acc += self.cantor_lebesgue(&f, cs.lo, cs.hi, a, b, step, 0);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn cantor_lebesgue<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        wa: f64,
        wb: f64,
        step: f64,
        depth: u32,
    ) -> f64 {
        if hi <= wa || lo >= wb {
            return 0.0;
        }
        let inside = lo >= wa && hi <= wb;
        let target = self.resolution.cantor_depth;
        if (inside && depth >= target) || depth >= target + 24 {
            let (ca, cb) = (lo.max(wa), hi.min(wb));
            return (cb - ca) * f(0.5 * (ca + cb));
        }
        let third = (hi - lo) / 3.0;
        let (m1, m2) = (lo + third, hi - third);
        let (ra, rb) = (m1.max(wa), m2.min(wb));
        let middle = if rb > ra {
            if rb - ra <= step {
                let rule = if rb - ra < 1e-3 * step { &self.low } else { &self.rule };
                rule.integrate(f, ra, rb)
            } else {
                self.smooth_interval(f, ra, rb, step)
            }
        } else {
            0.0
        };
        middle
            + self.cantor_lebesgue(f, lo, m1, wa, wb, step, depth + 1)
            + self.cantor_lebesgue(f, m2, hi, wa, wb, step, depth + 1)
    }

    /// Integral of a smooth integrand over `subject ∩ windows[0] ∩ … ∩ box`,
    /// where each window is convex and counterclockwise. The subject may be
    /// any simple polygon; the clipped region is gridded into square panels of
    /// width at most `step`, and panels cut by the region boundary are
    /// fan-triangulated with signed areas.
    pub fn polygon<F: Fn(Vec2) -> f64>(
        &self,
        f: F,
        subject: &[Vec2],
        windows: &[&[Vec2]],
        bbox: Option<(Vec2, Vec2)>,
        step: f64,
    ) -> f64 {
        let mut region: Vec<Vec2> = subject.to_vec();
        for w in windows {
            region = clip::clip_convex(&region, w);
            if region.len() < 3 {
                return 0.0;
            }
        }
        if let Some((lo, hi)) = bbox {
            region = clip::clip_box(&region, lo, hi);
        }
        if region.len() < 3 {
            return 0.0;
        }
        let (lo, hi) = clip::bounds(&region);
        let nx = math::ceil((hi.x - lo.x) / step).max(1.0) as usize;
        let ny = math::ceil((hi.y - lo.y) / step).max(1.0) as usize;
        let hx = (hi.x - lo.x) / nx as f64;
        let hy = (hi.y - lo.y) / ny as f64;
        if hx <= 0.0 || hy <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let a = Vec2::new(lo.x + hx * i as f64, lo.y + hy * j as f64);
                let b = Vec2::new(a.x + hx, a.y + hy);
                let piece = clip::clip_box(&region, a, b);
                if piece.len() < 3 {
                    continue;
                }
                let area = clip::signed_area(&piece);
                let full = hx * hy;
                if (area - full).abs() <= 1e-12 * full {
                    acc += self.square(&f, a, b);
                } else if area.abs() > 1e-15 * full {
                    let p0 = piece[0];
                    for k in 1..piece.len() - 1 {
                        acc += self.triangle(&f, p0, piece[k], piece[k + 1]);
                    }
                }
            }
        }
        acc
    }

    /// Visits quadrature nodes `(x, weight)` covering `subject ∩ box` with a
    /// quadtree of square panels: panels start at width `coarse` and are split
    /// while `classify` asks for refinement and they are wider than `fine`.
    #[allow(clippy::too_many_arguments)]
    pub fn polygon_graded(
        &self,
        subject: &[Vec2],
        bbox: (Vec2, Vec2),
        coarse: f64,
        fine: f64,
        classify: &dyn Fn(Vec2, Vec2) -> Panel,
        visit: &mut dyn FnMut(Vec2, f64),
    ) {
        let region = clip::clip_box(subject, bbox.0, bbox.1);
        if region.len() < 3 {
            return;
        }
        let (lo, hi) = clip::bounds(&region);
        let nx = math::ceil((hi.x - lo.x) / coarse).max(1.0) as usize;
        let ny = math::ceil((hi.y - lo.y) / coarse).max(1.0) as usize;
        let hx = (hi.x - lo.x) / nx as f64;
        let hy = (hi.y - lo.y) / ny as f64;
        if hx <= 0.0 || hy <= 0.0 {
            return;
        }
        for i in 0..nx {
            for j in 0..ny {
                let a = Vec2::new(lo.x + hx * i as f64, lo.y + hy * j as f64);
                let b = Vec2::new(a.x + hx, a.y + hy);
                let piece = clip::clip_box(&region, a, b);
                if piece.len() >= 3 {
                    self.graded_panel(&piece, a, b, fine, classify, visit);
                }
            }
        }
    }

    fn graded_panel(
        &self,
        piece: &[Vec2],
        a: Vec2,
        b: Vec2,
        fine: f64,
        classify: &dyn Fn(Vec2, Vec2) -> Panel,
        visit: &mut dyn FnMut(Vec2, f64),
    ) {
        let kind = classify(a, b);
        if kind == Panel::Skip {
            return;
        }
        if kind == Panel::Refine && (b.x - a.x).max(b.y - a.y) > fine {
            let m = Vec2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
            for (qa, qb) in [
                (a, m),
                (Vec2::new(m.x, a.y), Vec2::new(b.x, m.y)),
                (Vec2::new(a.x, m.y), Vec2::new(m.x, b.y)),
                (m, b),
            ] {
                let sub = clip::clip_box(piece, qa, qb);
                if sub.len() >= 3 {
                    self.graded_panel(&sub, qa, qb, fine, classify, visit);
                }
            }
            return;
        }
        let full = (b.x - a.x) * (b.y - a.y);
        let area = clip::signed_area(piece);
        if (area - full).abs() <= 1e-12 * full {
            let (wx, wy) = (b.x - a.x, b.y - a.y);
            for (u, wu) in self.rule.unit_pairs() {
                for (v, wv) in self.rule.unit_pairs() {
                    visit(Vec2::new(a.x + wx * u, a.y + wy * v), wu * wv * wx * wy);
                }
            }
        } else if area.abs() > 1e-15 * full {
            let p0 = piece[0];
            for k in 1..piece.len() - 1 {
                let (p1, p2) = (piece[k], piece[k + 1]);
                let jac = (p1 - p0).cross(p2 - p1);
                for (xi, wx) in self.rule.unit_pairs() {
                    let base = p0 + (p1 - p0).scale(xi);
                    let dir = (p2 - p1).scale(xi);
                    for (eta, we) in self.rule.unit_pairs() {
                        visit(base + dir.scale(eta), wx * we * xi * jac);
                    }
                }
            }
        }
    }

    /// Tensor rule on an axis-aligned rectangle.
    pub fn square<F: Fn(Vec2) -> f64>(&self, f: &F, a: Vec2, b: Vec2) -> f64 {
        let (wx, wy) = (b.x - a.x, b.y - a.y);
        let mut acc = 0.0;
        for (u, wu) in self.rule.unit_pairs() {
            let x = a.x + wx * u;
            let mut row = 0.0;
            for (v, wv) in self.rule.unit_pairs() {
                row += wv * f(Vec2::new(x, a.y + wy * v));
            }
            acc += wu * row;
        }
        acc * wx * wy
    }

    /// Collapsed-coordinate rule on the triangle `(a, b, c)`; negative for
    /// clockwise triangles.
    pub fn triangle<F: Fn(Vec2) -> f64>(&self, f: &F, a: Vec2, b: Vec2, c: Vec2) -> f64 {
        let jac = (b - a).cross(c - b);
        if jac == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (xi, wx) in self.rule.unit_pairs() {
            let base = a + (b - a).scale(xi);
            let dir = (c - b).scale(xi);
            let mut row = 0.0;
            for (eta, we) in self.rule.unit_pairs() {
                row += we * f(base + dir.scale(eta));
            }
            acc += wx * xi * row;
        }
        acc * jac
    }

    /// Arc-length integral of a smooth integrand over the segment `a → b`
    /// clipped to the convex windows and the optional box.
    pub fn segment<F: Fn(Vec2) -> f64>(
        &self,
        f: F,
        a: Vec2,
        b: Vec2,
        windows: &[&[Vec2]],
        bbox: Option<(Vec2, Vec2)>,
        step: f64,
    ) -> f64 {
        let Some((s0, s1)) = clip::segment_window(a, b, windows, bbox) else {
            return 0.0;
        };
        let len = a.dist(b);
        let span = (s1 - s0) * len;
        if span <= 0.0 {
            return 0.0;
        }
        self.smooth_interval(|s| f(a.lerp(b, s / len)), s0 * len, s1 * len, step)
    }
}
