//! Polygonal domains, partitions with an oriented skeleton, and polygonal sets
//! of finite perimeter in dimensions one and two.
//!
//! Everything here is exact up to floating point: reduced boundaries are the
//! polygon edges, interior normals are the left normals of counterclockwise
//! boundaries, and Lebesgue densities are `1`, `1/2`, `0`, or the interior angle
//! over `2π` at vertices.

use alloc::format;
use alloc::vec::Vec;

use crate::clip;
use crate::math;
use crate::vec2::Vec2;
use crate::{Error, Result, GEOM_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

/// A simple polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    triangles: Vec<[Vec2; 3]>,
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Vec2, q: Vec2, x: Vec2| clip::point_segment_distance(x, p, q).0 <= GEOM_TOL;
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

impl Polygon {
    /// Validates simplicity and nonzero area; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self> {
        vertices.dedup_by(|a, b| a.dist(*b) <= GEOM_TOL);
        while vertices.len() > 1 && vertices[0].dist(vertices[vertices.len() - 1]) <= GEOM_TOL {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::domain("polygon needs at least three distinct vertices"));
        }
        let area = clip::signed_area(&vertices);
        if area.abs() <= GEOM_TOL {
            return Err(Error::domain("degenerate polygon with zero area"));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return Err(Error::domain(format!("polygon is not simple: edges {i} and {j} meet")));
                }
            }
        }
        let triangles = clip::triangulate(&vertices);
        Ok(Polygon { vertices, triangles })
    }

    /// Axis-aligned rectangle `[lo, hi]`.
    pub fn rect(lo: Vec2, hi: Vec2) -> Result<Self> {
        Polygon::new(alloc::vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Convex counterclockwise triangles covering the polygon.
    pub fn triangles(&self) -> &[[Vec2; 3]] {
        &self.triangles
    }

    pub fn area(&self) -> f64 {
        clip::signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        clip::bounds(&self.vertices)
    }

    pub fn boundary_distance(&self, x: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| clip::point_segment_distance(x, a, b).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Strict interior membership (boundary points excluded).
    pub fn contains_open(&self, x: Vec2) -> bool {
        self.boundary_distance(x) > GEOM_TOL && clip::winding_contains(&self.vertices, x)
    }

    /// Lebesgue density of the polygon at `x`.
    pub fn density_at(&self, x: Vec2) -> f64 {
        let n = self.vertices.len();
        for i in 0..n {
            let v = self.vertices[i];
            if v.dist(x) <= GEOM_TOL {
                let next = self.vertices[(i + 1) % n] - v;
                let prev = self.vertices[(i + n - 1) % n] - v;
                let mut ang = math::atan2(next.cross(prev), next.dot(prev));
                if ang < 0.0 {
                    ang += 2.0 * core::f64::consts::PI;
                }
                return ang / (2.0 * core::f64::consts::PI);
            }
        }
        if self.boundary_distance(x) <= GEOM_TOL {
            0.5
        } else if clip::winding_contains(&self.vertices, x) {
            1.0
        } else {
            0.0
        }
    }

    /// Splits the segment `a → b` into parameter ranges lying inside, outside,
    /// or on the boundary of the polygon.
    pub fn split_segment(&self, a: Vec2, b: Vec2) -> Vec<(f64, f64, SegmentClass)> {
        let d = b - a;
        let len = d.norm();
        let mut cuts: Vec<f64> = alloc::vec![0.0, 1.0];
        if len == 0.0 {
            return Vec::new();
        }
        for (p, q) in self.edges() {
            let e = q - p;
            let denom = d.cross(e);
            if denom.abs() > 1e-14 * len * e.norm() {
                let s = (p - a).cross(e) / denom;
                let r = (p - a).cross(d) / denom;
                if (-1e-12..=1.0 + 1e-12).contains(&r) && s > 0.0 && s < 1.0 {
                    cuts.push(s);
                }
            } else {
                // parallel: project the edge endpoints when collinear
                for v in [p, q] {
                    let (dist, s) = clip::point_segment_distance(v, a, b);
                    if dist <= GEOM_TOL && s > 0.0 && s < 1.0 {
                        cuts.push(s);
                    }
                }
            }
        }
        for v in &self.vertices {
            let (dist, s) = clip::point_segment_distance(*v, a, b);
            if dist <= GEOM_TOL && s > 0.0 && s < 1.0 {
                cuts.push(s);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        cuts.dedup_by(|x, y| (*x - *y).abs() * len <= GEOM_TOL);
        let mut out: Vec<(f64, f64, SegmentClass)> = Vec::new();
        for w in cuts.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            if (s1 - s0) * len <= GEOM_TOL {
                continue;
            }
            let mid = a.lerp(b, 0.5 * (s0 + s1));
            let class = if self.boundary_distance(mid) <= GEOM_TOL {
                SegmentClass::Boundary
            } else if clip::winding_contains(&self.vertices, mid) {
                SegmentClass::Inside
            } else {
                SegmentClass::Outside
            };
            match out.last_mut() {
                Some(last) if last.2 == class => last.1 = s1,
                _ => out.push((s0, s1, class)),
            }
        }
        out
    }
}

/// Position of a piece of segment relative to a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentClass {
    Inside,
    Outside,
    Boundary,
}

/// A cell of the partition.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Interval { lo: f64, hi: f64 },
    Polygon(Polygon),
}

impl Cell {
    pub fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            Cell::Interval { lo, hi } => (Vec2::on_line(*lo), Vec2::on_line(*hi)),
            Cell::Polygon(p) => p.bounds(),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Cell::Interval { lo, hi } => hi - lo,
            Cell::Polygon(p) => p.area(),
        }
    }

    /// Strict interior membership.
    pub fn contains_open(&self, x: Vec2) -> bool {
        match self {
            Cell::Interval { lo, hi } => x.x > lo + GEOM_TOL && x.x < hi - GEOM_TOL,
            Cell::Polygon(p) => p.contains_open(x),
        }
    }

    /// Closed membership with the geometric tolerance.
    pub fn contains_closed(&self, x: Vec2) -> bool {
        match self {
            Cell::Interval { lo, hi } => x.x >= lo - GEOM_TOL && x.x <= hi + GEOM_TOL,
            Cell::Polygon(p) => p.boundary_distance(x) <= GEOM_TOL || clip::winding_contains(p.vertices(), x),
        }
    }
}

/// An internal interface shared by two cells. In one dimension `a == b` is a
/// point. `normal` has unit length and points from `minus` into `plus`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeletonEdge {
    pub a: Vec2,
    pub b: Vec2,
    pub normal: Vec2,
    pub minus: usize,
    pub plus: usize,
}

impl SkeletonEdge {
    /// `H^{N-1}` measure: length in 2D, one in 1D.
    pub fn measure(&self) -> f64 {
        if self.a == self.b {
            1.0
        } else {
            self.a.dist(self.b)
        }
    }

    pub fn is_point(&self) -> bool {
        self.a == self.b
    }

    pub fn midpoint(&self) -> Vec2 {
        self.a.lerp(self.b, 0.5)
    }

    /// Point at arc-length fraction `s ∈ [0, 1]`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.a.lerp(self.b, s)
    }

    /// The same interface with sides exchanged and the normal flipped.
    pub fn flipped(&self) -> SkeletonEdge {
        SkeletonEdge {
            a: self.b,
            b: self.a,
            normal: -self.normal,
            minus: self.plus,
            plus: self.minus,
        }
    }
}

/// Where a point sits relative to the partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Cell(usize),
    Edge(usize),
    Vertex,
    Outside,
}

/// The box `Ω` with a partition into intervals (1D) or simple polygons (2D).
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalDomain {
    dim: Dimension,
    lo: Vec2,
    hi: Vec2,
    cells: Vec<Cell>,
    skeleton: Vec<SkeletonEdge>,
}

impl PolygonalDomain {
    /// One-dimensional domain `(lo, hi)` split at the given interior points.
    pub fn line(lo: f64, hi: f64, breaks: &[f64]) -> Result<Self> {
        let mut pts: Vec<f64> = breaks.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        let mut cells = Vec::new();
        let mut prev = lo;
        for &p in pts.iter().chain(core::iter::once(&hi)) {
            cells.push((prev, p));
            prev = p;
        }
        PolygonalDomain::from_intervals(lo, hi, &cells)
    }

    /// One-dimensional domain from explicit cells, in any order.
    pub fn from_intervals(lo: f64, hi: f64, cells: &[(f64, f64)]) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::domain("empty domain"));
        }
        let mut sorted: Vec<(usize, f64, f64)> = cells.iter().enumerate().map(|(i, &(a, b))| (i, a, b)).collect();
        for &(i, a, b) in &sorted {
            if !(b > a) {
                return Err(Error::domain(format!("cell {i} is empty")));
            }
        }
        sorted.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(core::cmp::Ordering::Equal));
        if (sorted[0].1 - lo).abs() > GEOM_TOL || (sorted[sorted.len() - 1].2 - hi).abs() > GEOM_TOL {
            return Err(Error::domain("cells do not cover the domain"));
        }
        let mut skeleton = Vec::new();
        for w in sorted.windows(2) {
            let (i, _, b) = w[0];
            let (j, a, _) = w[1];
            if (a - b).abs() > GEOM_TOL {
                return Err(Error::domain(format!("cells {i} and {j} leave a gap or overlap")));
            }
            let (minus, plus) = (i.min(j), i.max(j));
            let normal = if minus == i { Vec2::new(1.0, 0.0) } else { Vec2::new(-1.0, 0.0) };
            let p = Vec2::on_line(a);
            skeleton.push(SkeletonEdge {
                a: p,
                b: p,
                normal,
                minus,
                plus,
            });
        }
        Ok(PolygonalDomain {
            dim: Dimension::One,
            lo: Vec2::on_line(lo),
            hi: Vec2::on_line(hi),
            cells: cells.iter().map(|&(lo, hi)| Cell::Interval { lo, hi }).collect(),
            skeleton,
        })
    }

    /// Two-dimensional box `[lo, hi]` partitioned by simple polygons. Shared
    /// edges may be subdivided differently on the two sides.
    pub fn planar(lo: Vec2, hi: Vec2, polygons: Vec<Vec<Vec2>>) -> Result<Self> {
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err(Error::domain("empty domain"));
        }
        let polys: Vec<Polygon> = polygons.into_iter().map(Polygon::new).collect::<Result<_>>()?;
        let box_area = (hi.x - lo.x) * (hi.y - lo.y);
        let total: f64 = polys.iter().map(Polygon::area).sum();
        if (total - box_area).abs() > 1e-10 * box_area {
            return Err(Error::domain(format!("cell areas sum to {total}, box area is {box_area}")));
        }
        for (i, p) in polys.iter().enumerate() {
            let (a, b) = p.bounds();
            if a.x < lo.x - GEOM_TOL || a.y < lo.y - GEOM_TOL || b.x > hi.x + GEOM_TOL || b.y > hi.y + GEOM_TOL {
                return Err(Error::domain(format!("cell {i} leaves the domain box")));
            }
        }
        let mut skeleton = Vec::new();
        let mut covered: Vec<Vec<f64>> = polys.iter().map(|p| alloc::vec![0.0; p.vertices().len()]).collect();
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                for (ei, (p, q)) in polys[i].edges().enumerate() {
                    for (ej, (r, s)) in polys[j].edges().enumerate() {
                        if let Some((a, b)) = shared_part(p, q, r, s) {
                            let len = a.dist(b);
                            covered[i][ei] += len;
                            covered[j][ej] += len;
                            let t = (q - p).normalized();
                            skeleton.push(SkeletonEdge {
                                a,
                                b,
                                normal: Vec2::new(t.y, -t.x),
                                minus: i,
                                plus: j,
                            });
                        }
                    }
                }
            }
        }
        for (i, p) in polys.iter().enumerate() {
            for (e, (a, b)) in p.edges().enumerate() {
                let on_box = |v: Vec2| {
                    (v.x - lo.x).abs() <= GEOM_TOL
                        || (v.x - hi.x).abs() <= GEOM_TOL
                        || (v.y - lo.y).abs() <= GEOM_TOL
                        || (v.y - hi.y).abs() <= GEOM_TOL
                };
                let boundary = on_box(a) && on_box(b) && on_box(a.lerp(b, 0.5));
                if !boundary && (covered[i][e] - a.dist(b)).abs() > 1e-9 {
                    return Err(Error::domain(format!(
                        "edge {e} of cell {i} is neither on the box boundary nor shared"
                    )));
                }
            }
        }
        Ok(PolygonalDomain {
            dim: Dimension::Two,
            lo,
            hi,
            cells: polys.into_iter().map(Cell::Polygon).collect(),
            skeleton,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn skeleton(&self) -> &[SkeletonEdge] {
        &self.skeleton
    }

    /// Characteristic length of the box.
    pub fn diameter(&self) -> f64 {
        self.lo.dist(self.hi)
    }

    /// Strictly inside the open box.
    pub fn contains_open(&self, x: Vec2) -> bool {
        match self.dim {
            Dimension::One => x.x > self.lo.x && x.x < self.hi.x,
            Dimension::Two => x.x > self.lo.x && x.x < self.hi.x && x.y > self.lo.y && x.y < self.hi.y,
        }
    }

    /// Distance from `x` to the box boundary (negative outside).
    pub fn boundary_margin(&self, x: Vec2) -> f64 {
        let mx = (x.x - self.lo.x).min(self.hi.x - x.x);
        match self.dim {
            Dimension::One => mx,
            Dimension::Two => mx.min(x.y - self.lo.y).min(self.hi.y - x.y),
        }
    }

    pub fn locate(&self, x: Vec2) -> Location {
        if self.boundary_margin(x) < -GEOM_TOL {
            return Location::Outside;
        }
        for (e, edge) in self.skeleton.iter().enumerate() {
            if edge.is_point() {
                if (x.x - edge.a.x).abs() <= GEOM_TOL {
                    return Location::Edge(e);
                }
            } else {
                let (d, _) = clip::point_segment_distance(x, edge.a, edge.b);
                if d <= GEOM_TOL {
                    if x.dist(edge.a) <= GEOM_TOL || x.dist(edge.b) <= GEOM_TOL {
                        return Location::Vertex;
                    }
                    return Location::Edge(e);
                }
            }
        }
        if let Some(i) = self.cells.iter().position(|c| c.contains_open(x)) {
            return Location::Cell(i);
        }
        match self.cells.iter().position(|c| c.contains_closed(x)) {
            Some(i) => Location::Cell(i),
            None => Location::Outside,
        }
    }

    /// The cell holding `x` for evaluation purposes: the `minus` cell on a
    /// skeleton edge, the first closed cell at a vertex.
    pub fn cell_of(&self, x: Vec2) -> Option<usize> {
        match self.locate(x) {
            Location::Cell(i) => Some(i),
            Location::Edge(e) => Some(self.skeleton[e].minus),
            Location::Vertex => self.cells.iter().position(|c| c.contains_closed(x)),
            Location::Outside => None,
        }
    }

    /// The cell entered from `x` when moving infinitesimally along `dir`.
    pub fn cell_towards(&self, x: Vec2, dir: Vec2) -> Option<usize> {
        let scale = 1.0 + self.diameter();
        for k in 0..6 {
            let delta = 1e-9 * scale * math::powi(10.0, k);
            let y = x + dir.normalized().scale(delta);
            if let Location::Cell(i) = self.locate(y) {
                return Some(i);
            }
        }
        None
    }

    /// Index of the skeleton edge joining cells `i` and `j`, if any.
    pub fn edges_between(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.skeleton
            .iter()
            .enumerate()
            .filter(move |(_, e)| (e.minus == i && e.plus == j) || (e.minus == j && e.plus == i))
            .map(|(k, _)| k)
    }

    /// True when the closure of `set` lies in the open box.
    pub fn compactly_contains(&self, set: &FinitePerimeterSet) -> bool {
        match set {
            FinitePerimeterSet::Intervals(iv) => iv.iter().all(|&(a, b)| a > self.lo.x + GEOM_TOL && b < self.hi.x - GEOM_TOL),
            FinitePerimeterSet::Polygon(p) => p.vertices().iter().all(|&v| self.boundary_margin(v) > GEOM_TOL),
        }
    }
}

/// Overlap of edge `p → q` with the reversed edge `r → s` when they are
/// collinear with opposite directions; returned oriented along `p → q`.
fn shared_part(p: Vec2, q: Vec2, r: Vec2, s: Vec2) -> Option<(Vec2, Vec2)> {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return None;
    }
    let t = d.scale(1.0 / len);
    if (s - r).dot(t) >= 0.0 {
        return None;
    }
    if t.cross(r - p).abs() > GEOM_TOL || t.cross(s - p).abs() > GEOM_TOL {
        return None;
    }
    let (sr, ss) = ((r - p).dot(t), (s - p).dot(t));
    let lo = ss.min(sr).max(0.0);
    let hi = ss.max(sr).min(len);
    if hi - lo > GEOM_TOL {
        Some((p + t.scale(lo), p + t.scale(hi)))
    } else {
        None
    }
}

/// A polygon `E` (2D) or finite union of open intervals (1D).
#[derive(Clone, Debug, PartialEq)]
pub enum FinitePerimeterSet {
    Intervals(Vec<(f64, f64)>),
    Polygon(Polygon),
}

/// A piece of the reduced boundary with the interior unit normal. In 1D the
/// piece is a point (`a == b`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPiece {
    pub a: Vec2,
    pub b: Vec2,
    pub normal: Vec2,
}

impl BoundaryPiece {
    pub fn measure(&self) -> f64 {
        if self.a == self.b {
            1.0
        } else {
            self.a.dist(self.b)
        }
    }
}

/// Density label of a point relative to `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityLabel {
    /// density 0
    Exterior,
    /// density 1
    Interior,
    /// any other density
    EssentialBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointClass {
    pub density: f64,
    pub label: DensityLabel,
}

impl FinitePerimeterSet {
    /// Union of open intervals; touching or overlapping pieces are merged.
    pub fn intervals(mut pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("empty set"));
        }
        if pieces.iter().any(|&(a, b)| !(b > a)) {
            return Err(Error::domain("degenerate interval"));
        }
        pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in pieces {
            match merged.last_mut() {
                Some(last) if a <= last.1 + GEOM_TOL => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(FinitePerimeterSet::Intervals(merged))
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        Polygon::new(vertices).map(FinitePerimeterSet::Polygon)
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            FinitePerimeterSet::Intervals(_) => Dimension::One,
            FinitePerimeterSet::Polygon(_) => Dimension::Two,
        }
    }

    /// Lebesgue measure of `E`.
    pub fn volume(&self) -> f64 {
        match self {
            FinitePerimeterSet::Intervals(iv) => iv.iter().map(|(a, b)| b - a).sum(),
            FinitePerimeterSet::Polygon(p) => p.area(),
        }
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            FinitePerimeterSet::Intervals(iv) => (Vec2::on_line(iv[0].0), Vec2::on_line(iv[iv.len() - 1].1)),
            FinitePerimeterSet::Polygon(p) => p.bounds(),
        }
    }

    pub fn reduced_boundary(&self) -> Vec<BoundaryPiece> {
        match self {
            FinitePerimeterSet::Intervals(iv) => iv
                .iter()
                .flat_map(|&(a, b)| {
                    [
                        BoundaryPiece {
                            a: Vec2::on_line(a),
                            b: Vec2::on_line(a),
                            normal: Vec2::new(1.0, 0.0),
                        },
                        BoundaryPiece {
                            a: Vec2::on_line(b),
                            b: Vec2::on_line(b),
                            normal: Vec2::new(-1.0, 0.0),
                        },
                    ]
                })
                .collect(),
            FinitePerimeterSet::Polygon(p) => p
                .edges()
                .map(|(a, b)| BoundaryPiece {
                    a,
                    b,
                    normal: (b - a).normalized().perp(),
                })
                .collect(),
        }
    }

    /// `H^{N-1}(∂*E)`.
    pub fn perimeter_len(&self) -> f64 {
        self.reduced_boundary().iter().map(BoundaryPiece::measure).sum()
    }

    pub fn density_at(&self, x: Vec2) -> f64 {
        match self {
            FinitePerimeterSet::Intervals(iv) => {
                for &(a, b) in iv {
                    if (x.x - a).abs() <= GEOM_TOL || (x.x - b).abs() <= GEOM_TOL {
                        return 0.5;
                    }
                    if x.x > a && x.x < b {
                        return 1.0;
                    }
                }
                0.0
            }
            FinitePerimeterSet::Polygon(p) => p.density_at(x),
        }
    }

    /// Open-interior membership (the set `E^1` minus vertices, which are
    /// `H^{N-1}`-null).
    pub fn contains_open(&self, x: Vec2) -> bool {
        self.density_at(x) == 1.0
    }

    pub fn on_boundary(&self, x: Vec2) -> bool {
        let d = self.density_at(x);
        d > 0.0 && d < 1.0
    }
}

/// `P(E, Ω) = H^{N-1}(∂*E ∩ Ω)`; requires `E ⋐ Ω`.
pub fn perimeter(set: &FinitePerimeterSet, domain: &PolygonalDomain) -> Result<f64> {
    check_contained(set, domain)?;
    Ok(set.perimeter_len())
}

/// Reduced boundary pieces with interior normals.
pub fn reduced_boundary(set: &FinitePerimeterSet) -> Result<Vec<BoundaryPiece>> {
    if set.volume() <= GEOM_TOL {
        return Err(Error::domain("degenerate set with zero volume"));
    }
    Ok(set.reduced_boundary())
}

/// Density of `E` at `x` and the matching `E^0` / `E^1` / `∂^e E` label.
pub fn classify_point(set: &FinitePerimeterSet, x: Vec2) -> PointClass {
    let density = set.density_at(x);
    let label = if density == 1.0 {
        DensityLabel::Interior
    } else if density == 0.0 {
        DensityLabel::Exterior
    } else {
        DensityLabel::EssentialBoundary
    };
    PointClass { density, label }
}

pub fn check_contained(set: &FinitePerimeterSet, domain: &PolygonalDomain) -> Result<()> {
    if set.dimension() != domain.dimension() {
        return Err(Error::domain("set and domain dimensions differ"));
    }
    if !domain.compactly_contains(set) {
        return Err(Error::domain("set is not compactly contained in the domain"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_square() -> FinitePerimeterSet {
        FinitePerimeterSet::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn big_box() -> PolygonalDomain {
        PolygonalDomain::planar(
            Vec2::new(-2.0, -2.0),
            Vec2::new(2.0, 2.0),
            vec![vec![
                Vec2::new(-2.0, -2.0),
                Vec2::new(2.0, -2.0),
                Vec2::new(2.0, 2.0),
                Vec2::new(-2.0, 2.0),
            ]],
        )
        .unwrap()
    }

    #[test]
    fn perimeter_examples() {
        assert_eq!(perimeter(&unit_square(), &big_box()).unwrap(), 4.0);
        let tri = FinitePerimeterSet::polygon(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        assert!((perimeter(&tri, &big_box()).unwrap() - (2.0 + 2f64.sqrt())).abs() < 1e-15);
        let line = PolygonalDomain::line(-1.0, 4.0, &[]).unwrap();
        let iv = FinitePerimeterSet::intervals(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(perimeter(&iv, &line).unwrap(), 4.0);
    }

    #[test]
    fn perimeter_requires_containment() {
        let line = PolygonalDomain::line(0.5, 4.0, &[]).unwrap();
        let iv = FinitePerimeterSet::intervals(vec![(0.0, 1.0)]).unwrap();
        assert!(matches!(perimeter(&iv, &line), Err(Error::Domain(_))));
    }

    #[test]
    fn classify_examples() {
        let sq = unit_square();
        let c = classify_point(&sq, Vec2::new(0.5, 0.5));
        assert_eq!((c.density, c.label), (1.0, DensityLabel::Interior));
        let e = classify_point(&sq, Vec2::new(0.5, 0.0));
        assert_eq!((e.density, e.label), (0.5, DensityLabel::EssentialBoundary));
        let v = classify_point(&sq, Vec2::new(1.0, 1.0));
        assert!((v.density - 0.25).abs() < 1e-15);
        assert_eq!(v.label, DensityLabel::EssentialBoundary);
        assert_eq!(classify_point(&sq, Vec2::new(3.0, 0.5)).label, DensityLabel::Exterior);
    }

    #[test]
    fn reduced_boundary_normals_point_inward() {
        let rb = reduced_boundary(&unit_square()).unwrap();
        let normals: Vec<Vec2> = rb.iter().map(|p| p.normal).collect();
        assert_eq!(
            normals,
            vec![Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), Vec2::new(0.0, -1.0), Vec2::new(1.0, 0.0)]
        );
        let tri = FinitePerimeterSet::polygon(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        let hyp = reduced_boundary(&tri).unwrap()[1];
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((hyp.normal - Vec2::new(-s, -s)).norm() < 1e-15);
        let iv = FinitePerimeterSet::intervals(vec![(0.5, 2.0)]).unwrap();
        let pts = reduced_boundary(&iv).unwrap();
        assert_eq!(pts[0].normal, Vec2::new(1.0, 0.0));
        assert_eq!(pts[1].normal, Vec2::new(-1.0, 0.0));
        for p in &rb {
            assert!(unit_square().contains_open(p.a.lerp(p.b, 0.5) + p.normal.scale(1e-6)));
        }
    }

    #[test]
    fn skeleton_of_two_squares() {
        let d = PolygonalDomain::planar(
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 1.0),
            vec![
                vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)],
                vec![Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(1.0, 1.0)],
            ],
        )
        .unwrap();
        assert_eq!(d.skeleton().len(), 1);
        let e = d.skeleton()[0];
        assert_eq!(e.normal, Vec2::new(1.0, 0.0));
        assert_eq!((e.minus, e.plus), (0, 1));
        assert_eq!(d.locate(Vec2::new(1.0, 0.5)), Location::Edge(0));
        assert_eq!(d.cell_towards(Vec2::new(1.0, 0.5), e.normal), Some(1));
        assert_eq!(d.cell_towards(Vec2::new(1.0, 0.5), -e.normal), Some(0));
    }

    #[test]
    fn gaps_are_rejected() {
        let r = PolygonalDomain::planar(
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 1.0),
            vec![vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn segment_split_classes() {
        let sq = match unit_square() {
            FinitePerimeterSet::Polygon(p) => p,
            _ => unreachable!(),
        };
        let parts = sq.split_segment(Vec2::new(-1.0, 0.5), Vec2::new(2.0, 0.5));
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[1].2, SegmentClass::Inside);
        let along = sq.split_segment(Vec2::new(-1.0, 0.0), Vec2::new(2.0, 0.0));
        assert_eq!(along.iter().map(|p| p.2).collect::<Vec<_>>(), vec![SegmentClass::Outside, SegmentClass::Boundary, SegmentClass::Outside]);
    }
}
