//! The standard bump kernel `ρ_ε` and convolutions of piecewise-polynomial
//! data with it.
//!
//! Convolutions are evaluated through exact kernel moments: on every cell the
//! polynomial is re-expanded around `x` in the scaled variable `z = (y − x)/ε`,
//! and `∫_{cell ∩ B_1} ρ(z) z^α dz` is assembled from a fan of triangles with
//! apex `x`. Each triangle reduces to a one-dimensional integral along its
//! outer edge of a tabulated radial profile, so jumps across cell boundaries
//! never fall inside a quadrature panel.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bvfunc::PiecewiseBV;
use crate::field::PiecewiseField;
use crate::geometry::{Cell, Dimension, PolygonalDomain};
use crate::math;
use crate::poly::Poly;
use crate::quad::GaussLegendre;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Highest total polynomial degree the moment tables support.
pub const MAX_DEGREE: usize = 12;

const TABLE_NODES: usize = 4096;
/// Below this radius the 2D profile is tabulated from its direct integral.
const SMALL_RADIUS: f64 = 0.125;
/// Longest chord piece per Gauss–Legendre panel inside the unit ball.
const INNER_PIECE: f64 = 1.0;

fn bump(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        math::exp(-1.0 / (1.0 - s2))
    }
}

/// Kernel normalization and moment tables for one dimension.
#[derive(Debug)]
pub struct Kernel {
    dim: Dimension,
    norm: f64,
    /// 1D: `S_m(s) = ∫_{-1}^s ρ z^m dz`; 2D: `Q_m(r) = ∫_0^1 ρ(r v) v^{m+1} dv`.
    values: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
    /// 2D: `∫_{B_1} ρ z^α dz`, indexed `a * (MAX_DEGREE + 1) + b`.
    ball: Vec<f64>,
    /// 2D: Fourier coefficients `(c_0, c_1, s_1, …, c_M, s_M)` of
    /// `cos^a θ sin^b θ`, indexed like `ball`.
    fourier: Vec<[f64; 2 * MAX_DEGREE + 1]>,
    gl: GaussLegendre,
}

impl Kernel {
    pub fn new(dim: Dimension) -> Self {
        let gl = GaussLegendre::new(16);
        match dim {
            Dimension::One => Kernel::one_d(gl),
            Dimension::Two => Kernel::two_d(gl),
        }
    }

    fn one_d(gl: GaussLegendre) -> Self {
        let total = gl.composite(|z| bump(z * z), -1.0, 1.0, 512);
        let norm = 1.0 / total;
        let h = 2.0 / TABLE_NODES as f64;
        let mut values = vec![vec![0.0; TABLE_NODES + 1]; MAX_DEGREE + 1];
        let mut slopes = vec![vec![0.0; TABLE_NODES + 1]; MAX_DEGREE + 1];
        for m in 0..=MAX_DEGREE {
            let mut acc = 0.0;
            for k in 0..=TABLE_NODES {
                let z = -1.0 + h * k as f64;
                if k > 0 {
                    acc += gl.integrate(|s| norm * bump(s * s) * math::powi(s, m as u32), z - h, z);
                }
                values[m][k] = acc;
                slopes[m][k] = norm * bump(z * z) * math::powi(z, m as u32);
            }
        }
        Kernel {
            dim: Dimension::One,
            norm,
            values,
            slopes,
            ball: Vec::new(),
            fourier: Vec::new(),
            gl,
        }
    }

    fn two_d(gl: GaussLegendre) -> Self {
        let radial = gl.composite(|r| r * bump(r * r), 0.0, 1.0, 512);
        let norm = 1.0 / (2.0 * core::f64::consts::PI * radial);
        let rho = |r: f64| norm * bump(r * r);
        let drho = |r: f64| {
            let s = 1.0 - r * r;
            if s <= 0.0 {
                0.0
            } else {
                rho(r) * (-2.0 * r / (s * s))
            }
        };
        let h = 1.0 / TABLE_NODES as f64;
        let mut values = vec![vec![0.0; TABLE_NODES + 1]; MAX_DEGREE + 1];
        let mut slopes = vec![vec![0.0; TABLE_NODES + 1]; MAX_DEGREE + 1];
        for m in 0..=MAX_DEGREE {
            let e = m as u32;
            let mut cumulative = 0.0;
            for k in 0..=TABLE_NODES {
                let r = h * k as f64;
                if k > 0 {
                    cumulative += gl.integrate(|s| rho(s) * math::powi(s, e + 1), r - h, r);
                }
                if r < SMALL_RADIUS {
                    values[m][k] = gl.composite(|v| rho(r * v) * math::powi(v, e + 1), 0.0, 1.0, 2);
                    slopes[m][k] = gl.composite(|v| drho(r * v) * math::powi(v, e + 2), 0.0, 1.0, 2);
                } else {
                    let q = cumulative / math::powi(r, e + 2);
                    values[m][k] = q;
                    slopes[m][k] = rho(r) / r - (m as f64 + 2.0) * q / r;
                }
            }
        }
        let n = MAX_DEGREE + 1;
        let mut ball = vec![0.0; n * n];
        let mut fourier = vec![[0.0; 2 * MAX_DEGREE + 1]; n * n];
        // a 64-point DFT is exact for these trigonometric degrees
        let steps = 64;
        let two_pi = 2.0 * core::f64::consts::PI;
        for a in 0..n {
            for b in 0..n - a {
                let mut c = [0.0; 2 * MAX_DEGREE + 1];
                for j in 0..steps {
                    let th = two_pi * j as f64 / steps as f64;
                    let f = math::powi(math::cos(th), a as u32) * math::powi(math::sin(th), b as u32);
                    c[0] += f / steps as f64;
                    for k in 1..=MAX_DEGREE {
                        let kt = k as f64 * th;
                        c[2 * k - 1] += 2.0 * f * math::cos(kt) / steps as f64;
                        c[2 * k] += 2.0 * f * math::sin(kt) / steps as f64;
                    }
                }
                ball[a * n + b] = values[a + b][TABLE_NODES] * two_pi * c[0];
                fourier[a * n + b] = c;
            }
        }
        Kernel {
            dim: Dimension::Two,
            norm,
            values,
            slopes,
            ball,
            fourier,
            gl,
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// `ρ(z)` on the unit ball.
    pub fn rho(&self, z: Vec2) -> f64 {
        let r2 = match self.dim {
            Dimension::One => z.x * z.x,
            Dimension::Two => z.norm_sq(),
        };
        self.norm * bump(r2)
    }

    fn table(&self, m: usize, s: f64) -> f64 {
        let (lo, width) = match self.dim {
            Dimension::One => (-1.0, 2.0),
            Dimension::Two => (0.0, 1.0),
        };
        let h = width / TABLE_NODES as f64;
        let u = ((s - lo) / h).clamp(0.0, TABLE_NODES as f64);
        let k = (math::floor(u) as usize).min(TABLE_NODES - 1);
        let tau = u - k as f64;
        let (v0, v1) = (self.values[m][k], self.values[m][k + 1]);
        let (d0, d1) = (self.slopes[m][k] * h, self.slopes[m][k + 1] * h);
        let t2 = tau * tau;
        let t3 = t2 * tau;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + tau) * d0 + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * d1
    }

    /// 1D: `∫_{lo}^{hi} ρ(z) z^m dz` with the limits clamped to `[-1, 1]`.
    pub fn interval_moment(&self, m: usize, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.clamp(-1.0, 1.0), hi.clamp(-1.0, 1.0));
        if hi <= lo {
            return 0.0;
        }
        self.table(m, hi) - self.table(m, lo)
    }

    /// 2D: adds `∫_{P ∩ B_1} ρ(z) z1^a z2^b dz` for `a + b ≤ deg` into `out`
    /// (indexed `a * (deg + 1) + b`), where `P` has the given vertices in
    /// scaled coordinates centered at the evaluation point.
    pub fn polygon_moments(&self, verts: &[Vec2], deg: usize, out: &mut [f64]) {
        let n = verts.len();
        for i in 0..n {
            self.edge_fan(verts[i], verts[(i + 1) % n], deg, out);
        }
    }

    /// Signed contribution of the triangle `(0, A, B)` cut by the unit ball.
    fn edge_fan(&self, a: Vec2, b: Vec2, deg: usize, out: &mut [f64]) {
        let e = b - a;
        let len = e.norm();
        if len == 0.0 {
            return;
        }
        let t = e.scale(1.0 / len);
        let mut nrm = t.perp();
        if a.dot(nrm) < 0.0 {
            nrm = -nrm;
        }
        let d = a.dot(nrm);
        let orient = nrm.cross(t);
        let (sa, sb) = (a.dot(t), b.dot(t));
        let stride = deg + 1;
        let mut pw1 = [0.0; MAX_DEGREE + 1];
        let mut pw2 = [0.0; MAX_DEGREE + 1];
        let mut radial = [0.0; MAX_DEGREE + 1];
        let mut accumulate = |z: Vec2, weight: &[f64], out: &mut [f64]| {
            pw1[0] = 1.0;
            pw2[0] = 1.0;
            for k in 1..=deg {
                pw1[k] = pw1[k - 1] * z.x;
                pw2[k] = pw2[k - 1] * z.y;
            }
            for ai in 0..=deg {
                for bi in 0..=deg - ai {
                    out[ai * stride + bi] += weight[ai + bi] * pw1[ai] * pw2[bi];
                }
            }
        };
        // inside the ball: |s| < w
        let w = if d < 1.0 { math::sqrt(1.0 - d * d) } else { 0.0 };
        let (ia, ib) = (sa.max(-w), sb.min(w));
        if ib > ia && d > 0.0 {
            let pieces = math::ceil((ib - ia) / INNER_PIECE).max(1.0) as usize;
            let hp = (ib - ia) / pieces as f64;
            for p in 0..pieces {
                let lo = ia + hp * p as f64;
                for (u, wu) in self.gl.unit_pairs() {
                    let s = lo + hp * u;
                    let r = math::sqrt(d * d + s * s);
                    let base = orient * d * hp * wu;
                    for m in 0..=deg {
                        radial[m] = base * self.table(m, r);
                    }
                    accumulate(nrm.scale(d) + t.scale(s), &radial, out);
                }
            }
        }
        // outside the ball: exact angular integral times the full radial moment
        let sweep = |s0: f64, s1: f64, out: &mut [f64]| {
            if s1 <= s0 {
                return;
            }
            let (p0, p1) = (nrm.scale(d) + t.scale(s0), nrm.scale(d) + t.scale(s1));
            let span = math::atan2(p0.cross(p1), p0.dot(p1));
            self.angular(p0.normalized(), p1.normalized(), span, deg, out);
        };
        if d >= 1.0 {
            sweep(sa, sb, out);
        } else {
            sweep(sa, sb.min(-w), out);
            sweep(sa.max(w), sb, out);
        }
    }

    /// Adds `R_{a+b}(1) ∫ cos^a θ sin^b θ dθ` over the signed sweep of
    /// angle `span` from direction `e0` to direction `e1`.
    fn angular(&self, e0: Vec2, e1: Vec2, span: f64, deg: usize, out: &mut [f64]) {
        let mut basis = [0.0; 2 * MAX_DEGREE + 1];
        basis[0] = span;
        let (c0, s0, c1, s1) = (e0.x, e0.y, e1.x, e1.y);
        let (mut ck0, mut sk0, mut ck1, mut sk1) = (1.0, 0.0, 1.0, 0.0);
        for k in 1..=deg {
            (ck0, sk0) = (ck0 * c0 - sk0 * s0, sk0 * c0 + ck0 * s0);
            (ck1, sk1) = (ck1 * c1 - sk1 * s1, sk1 * c1 + ck1 * s1);
            let kf = k as f64;
            basis[2 * k - 1] = (sk1 - sk0) / kf;
            basis[2 * k] = (ck0 - ck1) / kf;
        }
        let n = MAX_DEGREE + 1;
        let stride = deg + 1;
        for a in 0..=deg {
            for b in 0..=deg - a {
                let c = &self.fourier[a * n + b];
                let mut v = c[0] * basis[0];
                for k in 1..=a + b {
                    v += c[2 * k - 1] * basis[2 * k - 1] + c[2 * k] * basis[2 * k];
                }
                out[a * stride + b] += self.values[a + b][TABLE_NODES] * v;
            }
        }
    }

    /// 2D: `∫_{B_1} ρ z1^a z2^b dz` into `out` (indexed as above).
    pub fn ball_moments(&self, deg: usize, out: &mut [f64]) {
        let n = MAX_DEGREE + 1;
        for a in 0..=deg {
            for b in 0..=deg - a {
                out[a * (deg + 1) + b] += self.ball[a * n + b];
            }
        }
    }
}

/// `ρ_ε` with a shared kernel.
#[derive(Clone, Debug)]
pub struct Mollifier {
    kernel: Arc<Kernel>,
    eps: f64,
}

/// Kernel moments of every cell meeting `B_ε(x)`.
#[derive(Clone, Debug)]
pub struct LocalMoments {
    pub x: Vec2,
    pub eps: f64,
    pub deg: usize,
    /// `(cell, moments)` with moments indexed `a * (deg + 1) + b`.
    pub cells: Vec<(usize, Vec<f64>)>,
}

impl LocalMoments {
    /// `∫ ρ_ε(y − x) p(y) dy` over the cell, for a polynomial of total degree
    /// at most `deg` frozen at `t`.
    pub fn apply(&self, moments: &[f64], p: &Poly, t: f64) -> f64 {
        let c = local_coefficients(p, self.x, self.eps, t, self.deg);
        c.iter().zip(moments).map(|(a, b)| a * b).sum()
    }
}

/// Coefficients of `z ↦ p(x + ε z, t)`, indexed `a * (deg + 1) + b`.
pub fn local_coefficients(p: &Poly, x: Vec2, eps: f64, t: f64, deg: usize) -> Vec<f64> {
    let (nx, ny, _) = p.extents();
    let stride = deg + 1;
    let mut out = vec![0.0; stride * stride];
    let mut binom = [[0.0f64; MAX_DEGREE + 2]; MAX_DEGREE + 2];
    for n in 0..=MAX_DEGREE + 1 {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
        }
    }
    let mut px = [0.0; MAX_DEGREE + 1];
    let mut py = [0.0; MAX_DEGREE + 1];
    let mut pe = [0.0; 2 * MAX_DEGREE + 1];
    px[0] = 1.0;
    py[0] = 1.0;
    pe[0] = 1.0;
    for k in 1..=MAX_DEGREE {
        px[k] = px[k - 1] * x.x;
        py[k] = py[k - 1] * x.y;
    }
    for k in 1..=2 * MAX_DEGREE {
        pe[k] = pe[k - 1] * eps;
    }
    let tc: Vec<f64> = {
        let (_, _, nt) = p.extents();
        (0..nt).map(|k| math::powi(t, k as u32)).collect()
    };
    for i in 0..nx {
        for j in 0..ny {
            let cij: f64 = tc.iter().enumerate().map(|(k, tk)| p.coeff(i, j, k) * tk).sum();
            if cij == 0.0 {
                continue;
            }
            for a in 0..=i {
                for b in 0..=j {
                    if a + b > deg {
                        continue;
                    }
                    out[a * stride + b] += cij * binom[i][a] * binom[j][b] * px[i - a] * py[j - b] * pe[a + b];
                }
            }
        }
    }
    out
}

impl Mollifier {
    pub fn new(dim: Dimension, eps: f64) -> Result<Self> {
        Mollifier::with_kernel(Arc::new(Kernel::new(dim)), eps)
    }

    pub fn with_kernel(kernel: Arc<Kernel>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain("mollification radius must be positive"));
        }
        Ok(Mollifier { kernel, eps })
    }

    /// Same kernel at another radius.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Mollifier::with_kernel(self.kernel.clone(), eps)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `ρ_ε(z) = ε^{-N} ρ(z/ε)`.
    pub fn rho_eps(&self, z: Vec2) -> f64 {
        let scale = match self.kernel.dim {
            Dimension::One => self.eps,
            Dimension::Two => self.eps * self.eps,
        };
        self.kernel.rho(z.scale(1.0 / self.eps)) / scale
    }

    fn check_ball(&self, domain: &PolygonalDomain, x: Vec2) -> Result<()> {
        if domain.dimension() != self.kernel.dim {
            return Err(Error::domain("kernel and domain dimensions differ"));
        }
        if domain.boundary_margin(x) <= self.eps {
            return Err(Error::domain("the mollification ball leaves the domain"));
        }
        Ok(())
    }

    /// Kernel moments over every cell meeting `B_ε(x)`.
    pub fn local_moments(&self, domain: &PolygonalDomain, x: Vec2, deg: usize) -> Result<LocalMoments> {
        self.check_ball(domain, x)?;
        if deg > MAX_DEGREE {
            return Err(Error::domain("polynomial degree exceeds the kernel moment tables"));
        }
        let eps = self.eps;
        let mut cells = Vec::new();
        match domain.dimension() {
            Dimension::One => {
                for (i, cell) in domain.cells().iter().enumerate() {
                    let Cell::Interval { lo, hi } = cell else { continue };
                    let (a, b) = ((lo - x.x) / eps, (hi - x.x) / eps);
                    if b <= -1.0 || a >= 1.0 {
                        continue;
                    }
                    // same layout as the 2D tables, with b = 0
                    let mut m = vec![0.0; (deg + 1) * (deg + 1)];
                    for k in 0..=deg {
                        m[k * (deg + 1)] = self.kernel.interval_moment(k, a, b);
                    }
                    cells.push((i, m));
                }
            }
            Dimension::Two => {
                let stride = deg + 1;
                if let Some(i) = domain.cell_of(x) {
                    if let Cell::Polygon(p) = &domain.cells()[i] {
                        if p.contains_open(x) && p.boundary_distance(x) >= eps {
                            let mut m = vec![0.0; stride * stride];
                            self.kernel.ball_moments(deg, &mut m);
                            cells.push((i, m));
                            return Ok(LocalMoments { x, eps, deg, cells });
                        }
                    }
                }
                for (i, cell) in domain.cells().iter().enumerate() {
                    let Cell::Polygon(p) = cell else { continue };
                    let (lo, hi) = p.bounds();
                    if lo.x >= x.x + eps || hi.x <= x.x - eps || lo.y >= x.y + eps || hi.y <= x.y - eps {
                        continue;
                    }
                    if p.boundary_distance(x) >= eps && !p.contains_open(x) {
                        continue;
                    }
                    let verts: Vec<Vec2> = p.vertices().iter().map(|&v| (v - x).scale(1.0 / eps)).collect();
                    let mut m = vec![0.0; stride * stride];
                    self.kernel.polygon_moments(&verts, deg, &mut m);
                    cells.push((i, m));
                }
            }
        }
        Ok(LocalMoments { x, eps, deg, cells })
    }

    /// `∫ ρ_ε(y − x) dC(y)` for the Cantor measure on `set`.
    fn cantor_kernel(&self, set: &crate::cantor::CantorSet, x: f64) -> Result<f64> {
        let eps = self.eps;
        let tol = 1e-11 / eps;
        set.integrate(|y| self.rho_eps(Vec2::on_line(y - x)), x - eps, x + eps, tol)
    }

    /// `∫ ρ_ε(y − x) C(y) dy` through integration by parts against `dC`.
    fn cantor_value(&self, set: &crate::cantor::CantorSet, x: f64) -> Result<f64> {
        let eps = self.eps;
        let k = &self.kernel;
        let cumulative = |y: f64| k.interval_moment(0, -1.0, (y - x) / eps);
        let tail = set.integrate(cumulative, x - eps, x + eps, 1e-12)?;
        Ok(set.function(x + eps) - tail)
    }
}

fn u_degree(u: &PiecewiseBV) -> usize {
    (0..u.domain().cells().len()).map(|i| u.cell_poly(i).total_degree_xy()).max().unwrap_or(0)
}

fn field_degree(field: &PiecewiseField, big: bool) -> usize {
    (0..field.domain().cells().len())
        .map(|i| {
            let p = if big { field.cell_big_b(i) } else { field.cell_b(i) };
            p[0].total_degree_xy().max(p[1].total_degree_xy())
        })
        .max()
        .unwrap_or(0)
}

/// `u_ε(x) = (ρ_ε ∗ u)(x)`.
pub fn mollify_scalar(u: &PiecewiseBV, m: &Mollifier, x: Vec2) -> Result<f64> {
    Ok(mollify_with_gradient(u, m, x)?.0)
}

/// `∇u_ε(x) = (ρ_ε ∗ Du)(x)`.
pub fn mollify_gradient(u: &PiecewiseBV, m: &Mollifier, x: Vec2) -> Result<Vec2> {
    Ok(mollify_with_gradient(u, m, x)?.1)
}

/// `u_ε(x)` and `∇u_ε(x)` sharing one moment computation.
pub fn mollify_with_gradient(u: &PiecewiseBV, m: &Mollifier, x: Vec2) -> Result<(f64, Vec2)> {
    let domain = u.domain();
    let lm = m.local_moments(domain, x, u_degree(u))?;
    let mut value = 0.0;
    let mut grad = Vec2::ZERO;
    for (cell, mom) in &lm.cells {
        value += lm.apply(mom, u.cell_poly(*cell), 0.0);
        let g = u.cell_grad(*cell);
        grad += Vec2::new(lm.apply(mom, &g[0], 0.0), lm.apply(mom, &g[1], 0.0));
    }
    let eps = m.eps;
    for (e, edge) in domain.skeleton().iter().enumerate() {
        if !u.edge_in_jump_set(e) {
            continue;
        }
        let (up, um) = (u.cell_poly(edge.plus), u.cell_poly(edge.minus));
        let jump = |y: Vec2| up.eval(y, 0.0) - um.eval(y, 0.0);
        let w = if edge.is_point() {
            let y = edge.a;
            if (y.x - x.x).abs() >= eps {
                continue;
            }
            m.rho_eps(y - x) * jump(y)
        } else {
            chord_integral(m, edge.a, edge.b, x, &jump)
        };
        grad += edge.normal.scale(w);
    }
    if let Some(c) = u.cantor() {
        let lo = x.x - eps;
        let hi = x.x + eps;
        if hi > c.set.lo && lo < c.set.hi {
            value += c.coefficient * m.cantor_value(&c.set, x.x)?;
            grad += Vec2::new(c.coefficient * m.cantor_kernel(&c.set, x.x)?, 0.0);
        } else if lo >= c.set.hi {
            value += c.coefficient;
        }
    }
    Ok((value, grad))
}

/// `∫_{[a,b] ∩ B_ε(x)} ρ_ε(y − x) g(y) dH¹(y)`.
fn chord_integral(m: &Mollifier, a: Vec2, b: Vec2, x: Vec2, g: &dyn Fn(Vec2) -> f64) -> f64 {
    let e = b - a;
    let len = e.norm();
    let t = e.scale(1.0 / len);
    let foot = (x - a).dot(t);
    let d2 = (x - a).norm_sq() - foot * foot;
    let eps = m.eps;
    if d2 >= eps * eps {
        return 0.0;
    }
    let half = math::sqrt(eps * eps - d2);
    let (lo, hi) = ((foot - half).max(0.0), (foot + half).min(len));
    if hi <= lo {
        return 0.0;
    }
    let gl = &m.kernel.gl;
    let pieces = 2;
    let h = (hi - lo) / pieces as f64;
    let mut acc = 0.0;
    for p in 0..pieces {
        let s0 = lo + h * p as f64;
        for (u, w) in gl.unit_pairs() {
            let y = a + t.scale(s0 + h * u);
            acc += w * m.rho_eps(y - x) * g(y);
        }
    }
    acc * h
}

fn mollify_pieces(field: &PiecewiseField, t: f64, m: &Mollifier, x: Vec2, big: bool) -> Result<Vec2> {
    field.check_t(t)?;
    let lm = m.local_moments(field.domain(), x, field_degree(field, big))?;
    let mut out = Vec2::ZERO;
    for (cell, mom) in &lm.cells {
        let p = if big { field.cell_big_b(*cell) } else { field.cell_b(*cell) };
        out += Vec2::new(lm.apply(mom, &p[0], t), lm.apply(mom, &p[1], t));
    }
    Ok(out)
}

/// `b_ε(x, t) = (ρ_ε ∗ b(·, t))(x)`.
pub fn mollify_field(field: &PiecewiseField, t: f64, m: &Mollifier, x: Vec2) -> Result<Vec2> {
    mollify_pieces(field, t, m, x, false)
}

/// `B_ε(x, t) = (ρ_ε ∗ B(·, t))(x)`.
pub fn mollify_big_b(field: &PiecewiseField, t: f64, m: &Mollifier, x: Vec2) -> Result<Vec2> {
    mollify_pieces(field, t, m, x, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::quad::Integrator;

    #[test]
    fn kernel_has_unit_mass() {
        let k1 = Kernel::new(Dimension::One);
        assert!((k1.interval_moment(0, -1.0, 1.0) - 1.0).abs() < 1e-12);
        assert!(k1.interval_moment(1, -1.0, 1.0).abs() < 1e-14);
        let k2 = Kernel::new(Dimension::Two);
        let mut m = vec![0.0; 9];
        k2.ball_moments(2, &mut m);
        assert!((m[0] - 1.0).abs() < 1e-12);
        // the square [-2, 2]^2 covers the ball: fan moments equal ball moments
        let sq = [Vec2::new(-2.0, -2.0), Vec2::new(2.0, -2.0), Vec2::new(2.0, 2.0), Vec2::new(-2.0, 2.0)];
        let mut f = vec![0.0; 9];
        k2.polygon_moments(&sq, 2, &mut f);
        for (a, b) in m.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn half_plane_and_quadrant_moments() {
        let k2 = Kernel::new(Dimension::Two);
        let half = [Vec2::new(0.0, -2.0), Vec2::new(2.0, -2.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)];
        let mut m = vec![0.0; 4];
        k2.polygon_moments(&half, 1, &mut m);
        assert!((m[0] - 0.5).abs() < 1e-12);
        // first moment in x against brute force
        let q = Integrator::default();
        let brute = q.polygon(|z| k2.rho(z) * z.x, &half, &[], None, 0.02);
        assert!((m[2] - brute).abs() < 1e-9, "{} {}", m[2], brute);
        let quad = [Vec2::new(0.3, 0.2), Vec2::new(2.0, 0.2), Vec2::new(2.0, 2.0), Vec2::new(0.3, 2.0)];
        let mut mq = vec![0.0; 9];
        k2.polygon_moments(&quad, 2, &mut mq);
        let brute = q.polygon(|z| k2.rho(z) * z.x * z.y, &quad, &[], None, 0.01);
        assert!((mq[4] - brute).abs() < 1e-9, "{} {}", mq[4], brute);
    }

    fn heaviside() -> PiecewiseBV {
        let d = PolygonalDomain::line(-2.0, 2.0, &[0.0]).unwrap();
        PiecewiseBV::new(d, vec![Poly::zero(), Poly::constant(1.0)], None).unwrap()
    }

    #[test]
    fn one_dimensional_examples() {
        let m = Mollifier::new(Dimension::One, 0.3).unwrap();
        let u = heaviside();
        assert!((mollify_scalar(&u, &m, Vec2::ZERO).unwrap() - 0.5).abs() < 1e-13);
        let d = PolygonalDomain::line(-2.0, 2.0, &[]).unwrap();
        let c = PiecewiseBV::new(d.clone(), vec![Poly::constant(3.5)], None).unwrap();
        assert!((mollify_scalar(&c, &m, Vec2::on_line(0.7)).unwrap() - 3.5).abs() < 1e-12);
        let lin = PiecewiseBV::new(d, vec![Poly::monomial(1.0, 1, 0, 0)], None).unwrap();
        assert!((mollify_scalar(&lin, &m, Vec2::on_line(0.4)).unwrap() - 0.4).abs() < 1e-10);
        assert!(mollify_scalar(&u, &m, Vec2::on_line(1.8)).is_err());
    }

    #[test]
    fn heaviside_gradient_is_the_kernel() {
        let m = Mollifier::new(Dimension::One, 0.25).unwrap();
        let u = heaviside();
        for &x in &[-0.2, -0.05, 0.0, 0.1] {
            let g = mollify_gradient(&u, &m, Vec2::on_line(x)).unwrap();
            assert!((g.x - m.rho_eps(Vec2::on_line(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn cantor_convolution_matches_brute_force() {
        let d = PolygonalDomain::line(-2.0, 2.0, &[-0.5]).unwrap();
        let set = crate::cantor::CantorSet::standard();
        let c = crate::bvfunc::CantorComponent { coefficient: 1.0, set: set.clone() };
        let u = PiecewiseBV::new(d, vec![Poly::zero(), Poly::zero()], Some(c)).unwrap();
        let m = Mollifier::new(Dimension::One, 0.2).unwrap();
        let h = 1e-5;
        for &x in &[0.1, 0.5, 0.93] {
            let (v, g) = mollify_with_gradient(&u, &m, Vec2::on_line(x)).unwrap();
            let brute = GaussLegendre::new(8).composite(|y| m.rho_eps(Vec2::on_line(y - x)) * set.function(y), x - 0.2, x + 0.2, 40_000);
            // the staircase is only Hölder, so the panel rule converges slowly
            assert!((v - brute).abs() < 1e-7, "{v} {brute}");
            let vp = mollify_scalar(&u, &m, Vec2::on_line(x + h)).unwrap();
            let vm = mollify_scalar(&u, &m, Vec2::on_line(x - h)).unwrap();
            assert!((g.x - (vp - vm) / (2.0 * h)).abs() < 1e-5);
        }
    }

    fn quadrant_jump() -> PiecewiseBV {
        let q = |a: (f64, f64), b: (f64, f64)| Polygon::rect(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)).unwrap().vertices().to_vec();
        let d = PolygonalDomain::planar(
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, 1.0),
            vec![q((-1.0, -1.0), (0.0, 0.0)), q((0.0, -1.0), (1.0, 0.0)), q((0.0, 0.0), (1.0, 1.0)), q((-1.0, 0.0), (0.0, 1.0))],
        )
        .unwrap();
        let cells = vec![
            Poly::constant(0.5),
            Poly::from_terms(&[(1.0, 1, 0, 0), (0.3, 0, 2, 0)]),
            Poly::from_terms(&[(-1.0, 0, 0, 0), (0.7, 1, 1, 0)]),
            Poly::monomial(2.0, 0, 1, 0),
        ];
        PiecewiseBV::new(d, cells, None).unwrap()
    }

    #[test]
    fn planar_convolution_matches_brute_force() {
        let u = quadrant_jump();
        let m = Mollifier::new(Dimension::Two, 0.3).unwrap();
        let q = Integrator::default();
        for &x in &[Vec2::new(0.05, -0.1), Vec2::new(0.2, 0.25), Vec2::new(-0.5, 0.5), Vec2::new(0.0, 0.0)] {
            let v = mollify_scalar(&u, &m, x).unwrap();
            let mut brute = 0.0;
            for (i, cell) in u.domain().cells().iter().enumerate() {
                let Cell::Polygon(p) = cell else { unreachable!() };
                brute += q.polygon(|y| m.rho_eps(y - x) * u.eval_in(i, y), p.vertices(), &[], None, 0.01);
            }
            assert!((v - brute).abs() < 1e-9, "{x:?}: {v} {brute}");
        }
    }

    #[test]
    fn planar_gradient_matches_finite_differences() {
        let u = quadrant_jump();
        let m = Mollifier::new(Dimension::Two, 0.3).unwrap();
        let h = 1e-5;
        for &x in &[Vec2::new(0.05, -0.1), Vec2::new(0.2, 0.25), Vec2::new(0.01, 0.02)] {
            let g = mollify_gradient(&u, &m, x).unwrap();
            let dx = (mollify_scalar(&u, &m, x + Vec2::new(h, 0.0)).unwrap() - mollify_scalar(&u, &m, x - Vec2::new(h, 0.0)).unwrap()) / (2.0 * h);
            let dy = (mollify_scalar(&u, &m, x + Vec2::new(0.0, h)).unwrap() - mollify_scalar(&u, &m, x - Vec2::new(0.0, h)).unwrap()) / (2.0 * h);
            assert!((g.x - dx).abs() < 1e-6 && (g.y - dy).abs() < 1e-6, "{x:?}: {g:?} vs ({dx}, {dy})");
        }
    }

    #[test]
    fn field_examples() {
        let d = PolygonalDomain::line(-2.0, 2.0, &[0.0]).unwrap();
        let sign = vec![[Poly::constant(-1.0), Poly::zero()], [Poly::constant(1.0), Poly::zero()]];
        let f = PiecewiseField::t_independent(d, sign, 1.0).unwrap();
        let m = Mollifier::new(Dimension::One, 0.4).unwrap();
        assert!(mollify_field(&f, 0.5, &m, Vec2::ZERO).unwrap().x.abs() < 1e-14);
        // ∂_t B_ε = b_ε
        let h = 1e-4;
        let x = Vec2::on_line(0.1);
        let fd = (mollify_big_b(&f, 0.5 + h, &m, x).unwrap().x - mollify_big_b(&f, 0.5 - h, &m, x).unwrap().x) / (2.0 * h);
        assert!((fd - mollify_field(&f, 0.5, &m, x).unwrap().x).abs() < 1e-8);
    }
}
