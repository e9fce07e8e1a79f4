//! Signed Radon measures as sums of absolutely continuous parts on polygonal
//! regions, densities on segments (atoms in 1D), and a Cantor component;
//! smooth bump test functions; vector measures.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cantor::CantorSet;
use crate::geometry::{Dimension, FinitePerimeterSet, SegmentClass};
use crate::math;
use crate::poly::{Poly, Var};
use crate::quad::{self, Integrator};
use crate::vec2::Vec2;
use crate::{Error, Result, GEOM_TOL};

/// A scalar density evaluated at points of its part.
pub type Density = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

pub fn density<F: Fn(Vec2) -> f64 + Send + Sync + 'static>(f: F) -> Density {
    Arc::new(f)
}

pub fn constant_density(c: f64) -> Density {
    Arc::new(move |_| c)
}

/// Support of an absolutely continuous part.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Interval { lo: f64, hi: f64 },
    /// `subject ∩ windows[0] ∩ …` with convex counterclockwise windows.
    Polygon { subject: Vec<Vec2>, windows: Vec<Vec<Vec2>> },
}

impl Region {
    pub fn polygon(subject: Vec<Vec2>) -> Region {
        Region::Polygon {
            subject,
            windows: Vec::new(),
        }
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            Region::Interval { lo, hi } => (Vec2::on_line(*lo), Vec2::on_line(*hi)),
            Region::Polygon { subject, windows } => {
                let (mut lo, mut hi) = crate::clip::bounds(subject);
                for w in windows {
                    let (a, b) = crate::clip::bounds(w);
                    lo = Vec2::new(lo.x.max(a.x), lo.y.max(a.y));
                    hi = Vec2::new(hi.x.min(b.x), hi.y.min(b.y));
                }
                (lo, hi)
            }
        }
    }

    /// Characteristic length used to size panels.
    pub fn extent(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (hi.x - lo.x).max(hi.y - lo.y).max(0.0)
    }

    /// Integral of `f` over the region clipped to `bbox`.
    pub fn integrate(
        &self,
        q: &Integrator,
        f: &dyn Fn(Vec2) -> f64,
        bbox: Option<(Vec2, Vec2)>,
        step: f64,
        cantor: Option<&CantorSet>,
    ) -> f64 {
        match self {
            Region::Interval { lo, hi } => {
                let (mut a, mut b) = (*lo, *hi);
                if let Some((blo, bhi)) = bbox {
                    a = a.max(blo.x);
                    b = b.min(bhi.x);
                }
                q.interval(|s| f(Vec2::on_line(s)), a, b, step, cantor)
            }
            Region::Polygon { subject, windows } => {
                let refs: Vec<&[Vec2]> = windows.iter().map(|w| w.as_slice()).collect();
                q.polygon(f, subject, &refs, bbox, step)
            }
        }
    }

    /// Pieces of the region inside the open set `E` (up to null sets).
    pub fn inside(&self, set: &FinitePerimeterSet) -> Vec<Region> {
        match (self, set) {
            (Region::Interval { lo, hi }, FinitePerimeterSet::Intervals(iv)) => iv
                .iter()
                .filter_map(|&(a, b)| {
                    let (l, h) = (lo.max(a), hi.min(b));
                    (h - l > GEOM_TOL).then_some(Region::Interval { lo: l, hi: h })
                })
                .collect(),
            (Region::Polygon { subject, windows }, FinitePerimeterSet::Polygon(p)) => p
                .triangles()
                .iter()
                .map(|tri| {
                    let mut w = windows.clone();
                    w.push(tri.to_vec());
                    Region::Polygon {
                        subject: subject.clone(),
                        windows: w,
                    }
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Signed pieces whose combination is the region outside the closure of
    /// `E`.
    pub fn outside(&self, set: &FinitePerimeterSet) -> Vec<(Region, f64)> {
        match (self, set) {
            (Region::Interval { lo, hi }, FinitePerimeterSet::Intervals(iv)) => {
                let mut out = Vec::new();
                let mut cur = *lo;
                for &(a, b) in iv {
                    if a > cur && a.min(*hi) - cur > GEOM_TOL {
                        out.push((Region::Interval { lo: cur, hi: a.min(*hi) }, 1.0));
                    }
                    cur = cur.max(b);
                }
                if *hi - cur > GEOM_TOL {
                    out.push((Region::Interval { lo: cur, hi: *hi }, 1.0));
                }
                out
            }
            (Region::Polygon { .. }, FinitePerimeterSet::Polygon(_)) => {
                let mut out = vec![(self.clone(), 1.0)];
                out.extend(self.inside(set).into_iter().map(|r| (r, -1.0)));
                out
            }
            _ => vec![(self.clone(), 1.0)],
        }
    }
}

#[derive(Clone)]
pub struct AcPart {
    pub region: Region,
    /// Partition cell the part belongs to, when known.
    pub cell: Option<usize>,
    pub weight: f64,
    pub density: Density,
}

/// Density against `H^{N-1}` on the segment `a → b`; an atom when `a == b`.
#[derive(Clone)]
pub struct EdgePart {
    pub a: Vec2,
    pub b: Vec2,
    /// Skeleton edge the part belongs to, when known.
    pub edge: Option<usize>,
    pub weight: f64,
    pub density: Density,
}

impl EdgePart {
    pub fn is_atom(&self) -> bool {
        self.a == self.b
    }
}

/// `weight · g(x) dC(x)` restricted to the union of `windows`.
#[derive(Clone)]
pub struct CantorPart {
    pub set: CantorSet,
    pub windows: Vec<(f64, f64)>,
    pub cell: Option<usize>,
    pub weight: f64,
    pub density: Density,
}

/// Which side of a finite-perimeter set to keep when restricting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetPart {
    /// `E^1`
    Interior,
    /// `E^1 ∪ ∂*E`
    Closure,
    /// `∂*E`
    Boundary,
    /// `E^0`
    Exterior,
}

/// Cell and edge indices of the partition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Selector {
    pub cells: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Mass of one part, for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct PartMass {
    pub part: &'static str,
    pub support: String,
    pub value: f64,
}

/// A signed Radon measure on a 1D or 2D polygonal domain.
#[derive(Clone)]
pub struct HybridMeasure {
    dim: Dimension,
    ac: Vec<AcPart>,
    edges: Vec<EdgePart>,
    cantor: Vec<CantorPart>,
    /// Cantor set carried by the absolutely continuous densities (through a
    /// Cantor function), so quadrature can respect it.
    lebesgue_cantor: Option<CantorSet>,
    signed_regions: bool,
}

impl core::fmt::Debug for HybridMeasure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HybridMeasure")
            .field("dim", &self.dim)
            .field("ac_parts", &self.ac.len())
            .field("edge_parts", &self.edges.len())
            .field("cantor_parts", &self.cantor.len())
            .finish()
    }
}

impl HybridMeasure {
    pub fn zero(dim: Dimension) -> Self {
        HybridMeasure {
            dim,
            ac: Vec::new(),
            edges: Vec::new(),
            cantor: Vec::new(),
            lebesgue_cantor: None,
            signed_regions: false,
        }
    }

    /// Weighted atom at `x` (1D).
    pub fn atom(x: f64, weight: f64) -> Self {
        let mut m = HybridMeasure::zero(Dimension::One);
        m.push_edge(Vec2::on_line(x), Vec2::on_line(x), None, constant_density(weight));
        m
    }

    /// `L^1` restricted to `(lo, hi)` with the given density.
    pub fn interval(lo: f64, hi: f64, dens: Density) -> Self {
        let mut m = HybridMeasure::zero(Dimension::One);
        m.push_ac(Region::Interval { lo, hi }, None, dens);
        m
    }

    /// The Cantor measure on `set` times `g`.
    pub fn cantor_measure(set: CantorSet, weight: f64, g: Density) -> Self {
        let mut m = HybridMeasure::zero(Dimension::One);
        m.push_cantor(set, None, weight, g);
        m
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn ac_parts(&self) -> &[AcPart] {
        &self.ac
    }

    pub fn edge_parts(&self) -> &[EdgePart] {
        &self.edges
    }

    pub fn cantor_parts(&self) -> &[CantorPart] {
        &self.cantor
    }

    pub fn is_zero(&self) -> bool {
        self.ac.is_empty() && self.edges.is_empty() && self.cantor.is_empty()
    }

    pub fn push_ac(&mut self, region: Region, cell: Option<usize>, density: Density) {
        self.ac.push(AcPart {
            region,
            cell,
            weight: 1.0,
            density,
        });
    }

    pub fn push_edge(&mut self, a: Vec2, b: Vec2, edge: Option<usize>, density: Density) {
        self.edges.push(EdgePart {
            a,
            b,
            edge,
            weight: 1.0,
            density,
        });
    }

    pub fn push_cantor(&mut self, set: CantorSet, cell: Option<usize>, weight: f64, density: Density) {
        self.cantor.push(CantorPart {
            set,
            windows: vec![(set.lo, set.hi)],
            cell,
            weight,
            density,
        });
    }

    /// Declares that absolutely continuous densities involve the Cantor
    /// function on `set`.
    pub fn set_lebesgue_cantor(&mut self, set: Option<CantorSet>) {
        self.lebesgue_cantor = set;
    }

    pub fn lebesgue_cantor(&self) -> Option<&CantorSet> {
        self.lebesgue_cantor.as_ref()
    }

    /// The absolutely continuous part alone.
    pub fn ac_part(&self) -> HybridMeasure {
        HybridMeasure {
            edges: Vec::new(),
            cantor: Vec::new(),
            ..self.clone()
        }
    }

    /// The part carried by segments and atoms.
    pub fn edge_part(&self) -> HybridMeasure {
        HybridMeasure {
            ac: Vec::new(),
            cantor: Vec::new(),
            signed_regions: false,
            ..self.clone()
        }
    }

    pub fn cantor_part(&self) -> HybridMeasure {
        HybridMeasure {
            ac: Vec::new(),
            edges: Vec::new(),
            signed_regions: false,
            ..self.clone()
        }
    }

    pub fn scale(&self, s: f64) -> HybridMeasure {
        let mut m = self.clone();
        m.ac.iter_mut().for_each(|p| p.weight *= s);
        m.edges.iter_mut().for_each(|p| p.weight *= s);
        m.cantor.iter_mut().for_each(|p| p.weight *= s);
        m
    }

    pub fn add(&self, other: &HybridMeasure) -> HybridMeasure {
        let mut m = self.clone();
        m.ac.extend(other.ac.iter().cloned());
        m.edges.extend(other.edges.iter().cloned());
        m.cantor.extend(other.cantor.iter().cloned());
        m.lebesgue_cantor = self.lebesgue_cantor.or(other.lebesgue_cantor);
        m.signed_regions |= other.signed_regions;
        m
    }

    pub fn sub(&self, other: &HybridMeasure) -> HybridMeasure {
        self.add(&other.scale(-1.0))
    }

    /// `∫ φ dμ` at the default resolution.
    pub fn apply(&self, phi: &TestFunction) -> Result<f64> {
        self.apply_with(phi, &Integrator::default())
    }

    pub fn apply_with(&self, phi: &TestFunction, q: &Integrator) -> Result<f64> {
        let bbox = phi.support_box();
        let width = 2.0 * phi.radius();
        let f = |x: Vec2| phi.eval(x);
        self.integrate_against(&f, Some(bbox), width, q)
    }

    /// `μ(Ω)`: the integral of the constant 1.
    pub fn mass(&self, q: &Integrator) -> Result<f64> {
        self.integrate_against(&|_| 1.0, None, 0.0, q)
    }

    /// `∫ g dμ` for a smooth `g`; `width` sizes panels relative to the
    /// support box of `g` (0 means size by each part's own extent).
    pub fn integrate_against(
        &self,
        g: &dyn Fn(Vec2) -> f64,
        bbox: Option<(Vec2, Vec2)>,
        width: f64,
        q: &Integrator,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for part in &self.ac {
            let extent = if width > 0.0 { width.min(part.region.extent().max(1e-300)) } else { part.region.extent() };
            let step = match self.dim {
                Dimension::One => q.step_1d(extent),
                Dimension::Two => q.step_2d(extent),
            };
            let d = &part.density;
            let h = |x: Vec2| g(x) * d(x);
            acc += part.weight * part.region.integrate(q, &h, bbox, step, self.lebesgue_cantor.as_ref());
        }
        for part in &self.edges {
            acc += part.weight * edge_integral(part, g, bbox, width, q);
        }
        for part in &self.cantor {
            acc += part.weight * cantor_integral(part, g, bbox)?;
        }
        Ok(acc)
    }

    /// Restriction to whole cells and skeleton edges.
    pub fn restrict(&self, sel: &Selector) -> Result<HybridMeasure> {
        let mut m = HybridMeasure::zero(self.dim);
        m.lebesgue_cantor = self.lebesgue_cantor;
        m.signed_regions = self.signed_regions;
        for p in &self.ac {
            match p.cell {
                Some(c) if sel.cells.contains(&c) => m.ac.push(p.clone()),
                Some(_) => {}
                None => return Err(Error::domain("measure part is not aligned with the partition")),
            }
        }
        for p in &self.edges {
            match p.edge {
                Some(e) if sel.edges.contains(&e) => m.edges.push(p.clone()),
                Some(_) => {}
                None => return Err(Error::domain("measure part is not aligned with the skeleton")),
            }
        }
        for p in &self.cantor {
            match p.cell {
                Some(c) if sel.cells.contains(&c) => m.cantor.push(p.clone()),
                Some(_) => {}
                None => return Err(Error::domain("Cantor part is not aligned with the partition")),
            }
        }
        Ok(m)
    }

    /// Restriction to `E^1`, `E^1 ∪ ∂*E`, `∂*E`, or `E^0`.
    pub fn restrict_to_set(&self, set: &FinitePerimeterSet, which: SetPart) -> Result<HybridMeasure> {
        if set.dimension() != self.dim {
            return Err(Error::domain("set and measure dimensions differ"));
        }
        let mut m = HybridMeasure::zero(self.dim);
        m.lebesgue_cantor = self.lebesgue_cantor;
        m.signed_regions = self.signed_regions;
        match which {
            SetPart::Interior | SetPart::Closure => {
                for p in &self.ac {
                    for r in p.region.inside(set) {
                        m.ac.push(AcPart { region: r, ..p.clone() });
                    }
                }
            }
            SetPart::Exterior => {
                for p in &self.ac {
                    for (r, s) in p.region.outside(set) {
                        if s < 0.0 {
                            m.signed_regions = true;
                        }
                        m.ac.push(AcPart {
                            region: r,
                            weight: p.weight * s,
                            ..p.clone()
                        });
                    }
                }
            }
            SetPart::Boundary => {}
        }
        for p in &self.edges {
            for (a, b, class) in split_edge(p, set) {
                let keep = match which {
                    SetPart::Interior => class == SegmentClass::Inside,
                    SetPart::Closure => class != SegmentClass::Outside,
                    SetPart::Boundary => class == SegmentClass::Boundary,
                    SetPart::Exterior => class == SegmentClass::Outside,
                };
                if keep {
                    m.edges.push(EdgePart { a, b, ..p.clone() });
                }
            }
        }
        if which != SetPart::Boundary {
            for p in &self.cantor {
                let windows = match (set, which) {
                    (FinitePerimeterSet::Intervals(iv), SetPart::Exterior) => complement_windows(&p.windows, iv),
                    (FinitePerimeterSet::Intervals(iv), _) => intersect_windows(&p.windows, iv),
                    _ => p.windows.clone(),
                };
                if !windows.is_empty() {
                    m.cantor.push(CantorPart { windows, ..p.clone() });
                }
            }
        }
        Ok(m)
    }

    /// `|μ|(E^1)`.
    pub fn total_variation(&self, set: &FinitePerimeterSet, q: &Integrator) -> Result<f64> {
        self.restrict_to_set(set, SetPart::Interior)?.total_mass_abs(q)
    }

    /// `|μ|(E^1 ∪ ∂*E)`.
    pub fn total_variation_closure(&self, set: &FinitePerimeterSet, q: &Integrator) -> Result<f64> {
        self.restrict_to_set(set, SetPart::Closure)?.total_mass_abs(q)
    }

    /// `|μ|(Ω)`. Parts on identical supports are merged first; parts on
    /// distinct supports must be disjoint, which holds for every measure built
    /// by this crate except exterior restrictions of 2D measures.
    pub fn total_mass_abs(&self, q: &Integrator) -> Result<f64> {
        if self.signed_regions {
            return Err(Error::domain("total variation of a signed-region combination is not supported"));
        }
        let canon = self.canonical();
        let mut acc = 0.0;
        for p in &canon.ac {
            let d = &p.density;
            let w = p.weight;
            let f = |x: Vec2| (w * d(x)).abs();
            acc += match (&p.region, canon.lebesgue_cantor.as_ref()) {
                (Region::Interval { lo, hi }, None) => abs_integral_1d(q, &|s| f(Vec2::on_line(s)), *lo, *hi)?,
                (region, cs) => {
                    let ext = region.extent();
                    let step = match canon.dim {
                        Dimension::One => q.step_1d(ext),
                        Dimension::Two => q.step_2d(ext) / 2.0,
                    };
                    region.integrate(q, &f, None, step, cs)
                }
            };
        }
        for p in &canon.edges {
            let d = &p.density;
            let w = p.weight;
            if p.is_atom() {
                acc += (w * d(p.a)).abs();
            } else {
                let len = p.a.dist(p.b);
                acc += abs_integral_1d(q, &|s| (w * d(p.a.lerp(p.b, s / len))).abs(), 0.0, len)?;
            }
        }
        for p in &canon.cantor {
            let d = &p.density;
            let g = |x: f64| d(Vec2::on_line(x)).abs();
            for &(a, b) in &p.windows {
                acc += p.weight.abs() * p.set.integrate(g, a, b, 1e-13)?;
            }
        }
        Ok(acc)
    }

    /// Merges parts with identical supports by summing their densities.
    fn canonical(&self) -> HybridMeasure {
        let mut out = HybridMeasure::zero(self.dim);
        out.lebesgue_cantor = self.lebesgue_cantor;
        let mut groups: Vec<(Region, Option<usize>, Vec<(f64, Density)>)> = Vec::new();
        for p in &self.ac {
            match groups.iter_mut().find(|g| g.0 == p.region) {
                Some(g) => g.2.push((p.weight, p.density.clone())),
                None => groups.push((p.region.clone(), p.cell, vec![(p.weight, p.density.clone())])),
            }
        }
        for (region, cell, terms) in groups {
            out.push_ac(region, cell, sum_densities(terms));
        }
        let mut egroups: Vec<(Vec2, Vec2, Option<usize>, Vec<(f64, Density)>)> = Vec::new();
        for p in &self.edges {
            let same = |g: &(Vec2, Vec2, Option<usize>, Vec<(f64, Density)>)| {
                (g.0.dist(p.a) <= GEOM_TOL && g.1.dist(p.b) <= GEOM_TOL) || (g.0.dist(p.b) <= GEOM_TOL && g.1.dist(p.a) <= GEOM_TOL)
            };
            match egroups.iter_mut().find(|g| same(g)) {
                Some(g) => g.3.push((p.weight, p.density.clone())),
                None => egroups.push((p.a, p.b, p.edge, vec![(p.weight, p.density.clone())])),
            }
        }
        for (a, b, edge, terms) in egroups {
            out.push_edge(a, b, edge, sum_densities(terms));
        }
        let mut cgroups: Vec<(CantorSet, Vec<(f64, f64)>, Option<usize>, Vec<(f64, Density)>)> = Vec::new();
        for p in &self.cantor {
            match cgroups.iter_mut().find(|g| g.0 == p.set && g.1 == p.windows) {
                Some(g) => g.3.push((p.weight, p.density.clone())),
                None => cgroups.push((p.set, p.windows.clone(), p.cell, vec![(p.weight, p.density.clone())])),
            }
        }
        for (set, windows, cell, terms) in cgroups {
            out.cantor.push(CantorPart {
                set,
                windows,
                cell,
                weight: 1.0,
                density: sum_densities(terms),
            });
        }
        out
    }

    /// Mass of every part, in storage order.
    pub fn part_masses(&self, q: &Integrator) -> Result<Vec<PartMass>> {
        let mut rows = Vec::new();
        for (i, p) in self.ac.iter().enumerate() {
            let single = HybridMeasure {
                ac: vec![p.clone()],
                edges: Vec::new(),
                cantor: Vec::new(),
                ..self.clone()
            };
            rows.push(PartMass {
                part: "ac",
                support: match p.cell {
                    Some(c) => format!("cell{c}"),
                    None => format!("region{i}"),
                },
                value: single.mass(q)?,
            });
        }
        for (i, p) in self.edges.iter().enumerate() {
            let single = HybridMeasure {
                ac: Vec::new(),
                edges: vec![p.clone()],
                cantor: Vec::new(),
                signed_regions: false,
                ..self.clone()
            };
            rows.push(PartMass {
                part: if p.is_atom() { "atom" } else { "edge" },
                support: match p.edge {
                    Some(e) => format!("edge{e}"),
                    None => format!("segment{i}"),
                },
                value: single.mass(q)?,
            });
        }
        for (i, p) in self.cantor.iter().enumerate() {
            let single = HybridMeasure {
                ac: Vec::new(),
                edges: Vec::new(),
                cantor: vec![p.clone()],
                signed_regions: false,
                ..self.clone()
            };
            rows.push(PartMass {
                part: "cantor",
                support: format!("cantor{i}"),
                value: single.mass(q)?,
            });
        }
        Ok(rows)
    }
}

fn sum_densities(terms: Vec<(f64, Density)>) -> Density {
    if terms.len() == 1 && terms[0].0 == 1.0 {
        return terms[0].1.clone();
    }
    density(move |x| terms.iter().map(|(w, d)| w * d(x)).sum())
}

fn abs_integral_1d(q: &Integrator, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let rough = q.rule().composite(f, a, b, 16);
    let tol = 1e-13 * rough.abs().max(1e-300) + 1e-300;
    quad::adaptive(q.rule(), f, a, b, tol, 40).or_else(|e| match e {
        Error::Numeric { estimate, .. } if (estimate - rough).abs() <= 1e-9 * rough.abs().max(1.0) => Ok(estimate),
        other => Err(other),
    })
}

fn edge_integral(part: &EdgePart, g: &dyn Fn(Vec2) -> f64, bbox: Option<(Vec2, Vec2)>, width: f64, q: &Integrator) -> f64 {
    let d = &part.density;
    if part.is_atom() {
        let x = part.a;
        if let Some((lo, hi)) = bbox {
            if x.x < lo.x || x.x > hi.x || x.y < lo.y || x.y > hi.y {
                return 0.0;
            }
        }
        return g(x) * d(x);
    }
    let len = part.a.dist(part.b);
    let extent = if width > 0.0 { width.min(len) } else { len };
    let step = q.step_1d(extent);
    q.segment(|x| g(x) * d(x), part.a, part.b, &[], bbox, step)
}

fn cantor_integral(part: &CantorPart, g: &dyn Fn(Vec2) -> f64, bbox: Option<(Vec2, Vec2)>) -> Result<f64> {
    let d = &part.density;
    let h = |x: f64| {
        let p = Vec2::on_line(x);
        g(p) * d(p)
    };
    let mut acc = 0.0;
    for &(mut a, mut b) in &part.windows {
        if let Some((lo, hi)) = bbox {
            a = a.max(lo.x);
            b = b.min(hi.x);
        }
        if b > a {
            acc += part.set.integrate(h, a, b, 1e-13)?;
        }
    }
    Ok(acc)
}

fn split_edge(p: &EdgePart, set: &FinitePerimeterSet) -> Vec<(Vec2, Vec2, SegmentClass)> {
    if p.is_atom() {
        let d = set.density_at(p.a);
        let class = if d >= 1.0 {
            SegmentClass::Inside
        } else if d <= 0.0 {
            SegmentClass::Outside
        } else {
            SegmentClass::Boundary
        };
        return vec![(p.a, p.b, class)];
    }
    match set {
        FinitePerimeterSet::Polygon(poly) => poly
            .split_segment(p.a, p.b)
            .into_iter()
            .map(|(s0, s1, c)| (p.a.lerp(p.b, s0), p.a.lerp(p.b, s1), c))
            .collect(),
        FinitePerimeterSet::Intervals(_) => vec![(p.a, p.b, SegmentClass::Outside)],
    }
}

fn intersect_windows(windows: &[(f64, f64)], iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in windows {
        for &(c, d) in iv {
            let (l, h) = (a.max(c), b.min(d));
            if h > l {
                out.push((l, h));
            }
        }
    }
    out
}

fn complement_windows(windows: &[(f64, f64)], iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in windows {
        let mut cur = a;
        for &(c, d) in iv {
            if c > cur && c.min(b) > cur {
                out.push((cur, c.min(b)));
            }
            cur = cur.max(d);
        }
        if b > cur {
            out.push((cur, b));
        }
    }
    out
}

/// `φ(x) = p(x)·exp(−1/(1 − |x − c|²/R²))` inside the ball, 0 outside.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    dim: Dimension,
    center: Vec2,
    radius: f64,
    prefactor: Poly,
    grad_prefactor: [Poly; 2],
}

impl TestFunction {
    pub fn new(dim: Dimension, center: Vec2, radius: f64, prefactor: Poly) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain("test function radius must be positive"));
        }
        if !prefactor.is_t_free() || (dim == Dimension::One && !prefactor.is_y_free()) {
            return Err(Error::domain("test function prefactor must depend on the space variables only"));
        }
        let center = match dim {
            Dimension::One => Vec2::on_line(center.x),
            Dimension::Two => center,
        };
        let grad_prefactor = [prefactor.derivative(Var::X), prefactor.derivative(Var::Y)];
        Ok(TestFunction {
            dim,
            center,
            radius,
            prefactor,
            grad_prefactor,
        })
    }

    /// Bump with prefactor `e`, so that `φ(center) = 1`.
    pub fn normalized(dim: Dimension, center: Vec2, radius: f64) -> Result<Self> {
        TestFunction::new(dim, center, radius, Poly::constant(core::f64::consts::E))
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn prefactor(&self) -> &Poly {
        &self.prefactor
    }

    fn offset(&self, x: Vec2) -> Vec2 {
        match self.dim {
            Dimension::One => Vec2::new(x.x - self.center.x, 0.0),
            Dimension::Two => x - self.center,
        }
    }

    pub fn support_box(&self) -> (Vec2, Vec2) {
        let r = self.radius;
        match self.dim {
            Dimension::One => (Vec2::on_line(self.center.x - r), Vec2::on_line(self.center.x + r)),
            Dimension::Two => (self.center - Vec2::new(r, r), self.center + Vec2::new(r, r)),
        }
    }

    fn bump(&self, x: Vec2) -> Option<(f64, f64, Vec2)> {
        let z = self.offset(x);
        let s = z.norm_sq() / (self.radius * self.radius);
        if s >= 1.0 {
            return None;
        }
        let one_minus = 1.0 - s;
        Some((math::exp(-1.0 / one_minus), one_minus, z))
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        match self.bump(x) {
            Some((e, _, _)) => self.prefactor.eval(x, 0.0) * e,
            None => 0.0,
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let Some((e, one_minus, z)) = self.bump(x) else {
            return Vec2::ZERO;
        };
        let p = self.prefactor.eval(x, 0.0);
        let gp = Vec2::new(self.grad_prefactor[0].eval(x, 0.0), self.grad_prefactor[1].eval(x, 0.0));
        let factor = -2.0 / (self.radius * self.radius * one_minus * one_minus);
        let g = gp.scale(e) + z.scale(p * e * factor);
        match self.dim {
            Dimension::One => Vec2::new(g.x, 0.0),
            Dimension::Two => g,
        }
    }

    /// Upper bound for `‖φ‖_∞` sampled on a grid of the support.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.support_box();
        let n = 64;
        let mut m: f64 = 0.0;
        for i in 0..=n {
            let x = lo.x + (hi.x - lo.x) * i as f64 / n as f64;
            match self.dim {
                Dimension::One => m = m.max(self.eval(Vec2::on_line(x)).abs()),
                Dimension::Two => {
                    for j in 0..=n {
                        let y = lo.y + (hi.y - lo.y) * j as f64 / n as f64;
                        m = m.max(self.eval(Vec2::new(x, y)).abs());
                    }
                }
            }
        }
        m
    }

    /// Sampled `‖∇φ‖_∞`.
    pub fn grad_sup_norm(&self) -> f64 {
        let (lo, hi) = self.support_box();
        let n = 64;
        let mut m: f64 = 0.0;
        for i in 0..=n {
            let x = lo.x + (hi.x - lo.x) * i as f64 / n as f64;
            match self.dim {
                Dimension::One => m = m.max(self.gradient(Vec2::on_line(x)).norm()),
                Dimension::Two => {
                    for j in 0..=n {
                        let y = lo.y + (hi.y - lo.y) * j as f64 / n as f64;
                        m = m.max(self.gradient(Vec2::new(x, y)).norm());
                    }
                }
            }
        }
        m
    }
}

/// A vector-valued measure stored by components, with its variation measure.
#[derive(Clone, Debug)]
pub struct VectorMeasure {
    pub components: [HybridMeasure; 2],
    pub variation: HybridMeasure,
}

impl VectorMeasure {
    pub fn zero(dim: Dimension) -> Self {
        VectorMeasure {
            components: [HybridMeasure::zero(dim), HybridMeasure::zero(dim)],
            variation: HybridMeasure::zero(dim),
        }
    }

    /// `⟨μ_k, φ⟩` for component `k ∈ {0, 1}`.
    pub fn apply_component(&self, k: usize, phi: &TestFunction, q: &Integrator) -> Result<f64> {
        self.components[k].apply_with(phi, q)
    }

    pub fn add(&self, other: &VectorMeasure) -> VectorMeasure {
        VectorMeasure {
            components: [self.components[0].add(&other.components[0]), self.components[1].add(&other.components[1])],
            variation: self.variation.add(&other.variation),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Integrator {
        Integrator::default()
    }

    #[test]
    fn atom_and_lebesgue() {
        let phi = TestFunction::normalized(Dimension::One, Vec2::ZERO, 0.5).unwrap();
        assert!((HybridMeasure::atom(0.0, 1.0).apply(&phi).unwrap() - 1.0).abs() < 1e-15);
        // wide bump, renormalized so that it is 1 on (0, 1) up to 1e-12
        let wide = TestFunction::normalized(Dimension::One, Vec2::on_line(0.5), 1e6).unwrap();
        let leb = HybridMeasure::interval(0.0, 1.0, constant_density(1.0));
        assert!((leb.apply(&wide).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cantor_mean_is_half() {
        let m = HybridMeasure::cantor_measure(CantorSet::standard(), 1.0, density(|x| x.x));
        let wide = TestFunction::new(Dimension::One, Vec2::on_line(0.5), 1e6, Poly::constant(core::f64::consts::E)).unwrap();
        assert!((m.apply(&wide).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn total_variation_examples() {
        let e = FinitePerimeterSet::intervals(vec![(-1.0, 1.0)]).unwrap();
        assert_eq!(HybridMeasure::atom(0.0, -3.0).total_variation(&e, &q()).unwrap(), 3.0);
        let odd = HybridMeasure::interval(-1.0, 1.0, density(|x| x.x));
        assert!((odd.total_variation(&e, &q()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(HybridMeasure::zero(Dimension::One).total_variation(&e, &q()).unwrap(), 0.0);
    }

    #[test]
    fn restrict_examples() {
        let mut leb = HybridMeasure::zero(Dimension::One);
        leb.push_ac(Region::Interval { lo: 0.0, hi: 1.0 }, Some(0), constant_density(1.0));
        leb.push_ac(Region::Interval { lo: 1.0, hi: 2.0 }, Some(1), constant_density(1.0));
        let r = leb.restrict(&Selector { cells: vec![0], edges: vec![] }).unwrap();
        assert!((r.mass(&q()).unwrap() - 1.0).abs() < 1e-14);
        let empty = leb.restrict(&Selector::default()).unwrap();
        assert!(empty.is_zero());
        let mut delta = HybridMeasure::zero(Dimension::One);
        delta.push_edge(Vec2::ZERO, Vec2::ZERO, Some(0), constant_density(1.0));
        let kept = delta.restrict(&Selector { cells: vec![], edges: vec![0] }).unwrap();
        assert_eq!(kept.mass(&q()).unwrap(), 1.0);
        let untagged = HybridMeasure::atom(0.0, 1.0);
        assert!(untagged.restrict(&Selector::default()).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = Poly::from_terms(&[(1.0, 0, 0, 0), (0.3, 1, 0, 0), (-0.2, 0, 2, 0)]);
        let phi = TestFunction::new(Dimension::Two, Vec2::new(0.1, -0.2), 0.8, p).unwrap();
        let x = Vec2::new(0.3, 0.1);
        let h = 1e-5;
        let fd = Vec2::new(
            (phi.eval(x + Vec2::new(h, 0.0)) - phi.eval(x - Vec2::new(h, 0.0))) / (2.0 * h),
            (phi.eval(x + Vec2::new(0.0, h)) - phi.eval(x - Vec2::new(0.0, h))) / (2.0 * h),
        );
        assert!((fd - phi.gradient(x)).norm() < 1e-8);
    }

    #[test]
    fn set_restriction_splits_edges() {
        let sq = FinitePerimeterSet::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let mut m = HybridMeasure::zero(Dimension::Two);
        m.push_edge(Vec2::new(-1.0, 0.5), Vec2::new(2.0, 0.5), None, constant_density(1.0));
        m.push_edge(Vec2::new(-1.0, 0.0), Vec2::new(2.0, 0.0), None, constant_density(1.0));
        m.push_ac(Region::polygon(vec![Vec2::new(-1.0, -1.0), Vec2::new(2.0, -1.0), Vec2::new(2.0, 2.0), Vec2::new(-1.0, 2.0)]), None, constant_density(1.0));
        let inner = m.restrict_to_set(&sq, SetPart::Interior).unwrap().mass(&q()).unwrap();
        assert!((inner - 2.0).abs() < 1e-12);
        let closed = m.restrict_to_set(&sq, SetPart::Closure).unwrap().mass(&q()).unwrap();
        assert!((closed - 3.0).abs() < 1e-12);
        let outer = m.restrict_to_set(&sq, SetPart::Exterior).unwrap().mass(&q()).unwrap();
        assert!((outer - (8.0 + 2.0 + 2.0)).abs() < 1e-12);
    }
}
