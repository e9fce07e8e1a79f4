//! Scenario files: the JSON schema, its validation, and the built objects.

use std::fmt;
use std::path::Path;

use dmpair_core::bvfunc::CantorComponent;
use dmpair_core::geometry::{check_contained, Dimension, PolygonalDomain};
use dmpair_core::{CantorSet, FinitePerimeterSet, PiecewiseBV, PiecewiseField, Poly, TestFunction, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// A scenario that failed to load. `pointer` is a JSON pointer into the
/// scenario document (empty for the document root).
#[derive(Clone, Debug, PartialEq)]
pub struct LoadError {
    pub pointer: String,
    pub message: String,
}

impl LoadError {
    fn at(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        LoadError {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "scenario error at {p}: {}", self.message)
    }
}

impl std::error::Error for LoadError {}

/// A polynomial in `(x, y, t)`: a bare number, or `[coef, i, j, k]` terms
/// for `coef · x^i y^j t^k`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Const(f64),
    Terms(Vec<(f64, usize, usize, usize)>),
}

impl PolySpec {
    pub fn to_poly(&self) -> Poly {
        match self {
            PolySpec::Const(c) => Poly::constant(*c),
            PolySpec::Terms(ts) => Poly::from_terms(ts),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Line {
        lo: f64,
        hi: f64,
        #[serde(default)]
        breaks: Vec<f64>,
    },
    /// Rectangles `xs[i]..xs[i+1] × ys[j]..ys[j+1]`, numbered row by row
    /// from the bottom.
    Grid { xs: Vec<f64>, ys: Vec<f64> },
    Planar {
        lo: [f64; 2],
        hi: [f64; 2],
        cells: Vec<Vec<[f64; 2]>>,
    },
}

/// Exactly one of `b` (cellwise `b`, `B` is derived) and `a` (`b = A`, so
/// `B = tA`). A single entry is used for every cell.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub t_max: f64,
    #[serde(default)]
    pub b: Option<Vec<[PolySpec; 2]>>,
    #[serde(default)]
    pub a: Option<Vec<[PolySpec; 2]>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorSpec {
    pub coefficient: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvSpec {
    pub cells: Vec<PolySpec>,
    #[serde(default)]
    pub cantor: Option<CantorSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Polygon(Vec<[f64; 2]>),
    Intervals(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Defaults to the constant `e`, which makes `φ(center) = 1`.
    #[serde(default)]
    pub prefactor: Option<PolySpec>,
}

/// Normalized bumps with centers uniform in the box and radii uniform in
/// `radius`, drawn from the run seed.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPhis {
    pub count: usize,
    pub center_lo: Vec<f64>,
    pub center_hi: Vec<f64>,
    pub radius: [f64; 2],
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    #[serde(default)]
    pub explicit: Vec<PhiSpec>,
    #[serde(default)]
    pub random: Option<RandomPhis>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    ChainRule,
    PairingRoutes,
    Anzellotti,
    Mubdd,
    #[serde(rename = "lipF")]
    LipF,
    Traces,
    GaussGreen,
    Gluing,
    Convergence,
    Golden,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::ChainRule => "chain-rule",
            CheckKind::PairingRoutes => "pairing-routes",
            CheckKind::Anzellotti => "anzellotti",
            CheckKind::Mubdd => "mubdd",
            CheckKind::LipF => "lipF",
            CheckKind::Traces => "traces",
            CheckKind::GaussGreen => "gauss-green",
            CheckKind::Gluing => "gluing",
            CheckKind::Convergence => "convergence",
            CheckKind::Golden => "golden",
        }
    }
}

/// Tolerance classes. `quadrature` is the one `--tol` overrides.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Identities checked against brute-force quadrature.
    pub quadrature: f64,
    /// Limits extrapolated from `ε` or radius sequences.
    pub mollified: f64,
    /// Identities between exact densities.
    pub exact: f64,
    /// Slack on inequalities.
    pub bound: f64,
    pub gauss_green: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-6,
            mollified: 1e-3,
            exact: 1e-8,
            bound: 1e-9,
            gauss_green: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `μ(φ)`.
    Mu,
    /// `μ^c(φ)`.
    MuCantor,
    /// Extrapolated mollified pairing.
    Route3,
    GgLhsInterior,
    GgRhsInterior,
    GgLhsClosure,
    GgRhsClosure,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Mu => "mu",
            Quantity::MuCantor => "mu-cantor",
            Quantity::Route3 => "route3",
            Quantity::GgLhsInterior => "gg-lhs-interior",
            Quantity::GgRhsInterior => "gg-rhs-interior",
            Quantity::GgLhsClosure => "gg-lhs-closure",
            Quantity::GgRhsClosure => "gg-rhs-closure",
        }
    }

    pub fn per_set(self) -> bool {
        !matches!(self, Quantity::Mu | Quantity::MuCantor | Quantity::Route3)
    }
}

/// A closed-form value. `phi` names a test function (`"*"` for all of
/// them) for pairing quantities, `set` indexes `sets` for balance terms.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub quantity: Quantity,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub set: Option<usize>,
    pub value: f64,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_eps() -> Vec<f64> {
    vec![0.16, 0.08, 0.04, 0.02]
}

fn default_radii() -> Vec<f64> {
    vec![0.04, 0.03, 0.02, 0.01]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub u: BvSpec,
    #[serde(default)]
    pub sets: Vec<SetSpec>,
    #[serde(default)]
    pub test_functions: TestFunctionSpec,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_radii")]
    pub trace_radii: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub glue_set: usize,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug)]
pub struct NamedSet {
    pub id: String,
    pub set: FinitePerimeterSet,
}

#[derive(Clone, Debug)]
pub struct NamedPhi {
    pub id: String,
    pub phi: TestFunction,
}

/// A validated scenario with all core objects built.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub field: PiecewiseField,
    pub u: PiecewiseBV,
    pub sets: Vec<NamedSet>,
    pub phis: Vec<NamedPhi>,
    pub eps: Vec<f64>,
    pub trace_radii: Vec<f64>,
    pub tol: Tolerances,
    pub glue_set: usize,
    pub checks: Vec<CheckKind>,
    pub expect: Vec<Expectation>,
}

impl Scenario {
    pub fn dimension(&self) -> Dimension {
        self.field.domain().dimension()
    }
}

/// Parses a scenario document. Schema violations report the JSON pointer
/// of the offending value.
pub fn parse(text: &str) -> Result<ScenarioFile, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        LoadError::at(pointer, e.into_inner())
    })
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Reads, parses and builds a scenario. `seed` overrides the file's seed.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::at("", format!("cannot read {}: {e}", path.display())))?;
    build(parse(&text)?, seed)
}

fn broadcast<T: Clone>(items: &[T], n: usize, pointer: &str) -> Result<Vec<T>, LoadError> {
    match items.len() {
        1 => Ok(vec![items[0].clone(); n]),
        k if k == n => Ok(items.to_vec()),
        k => Err(LoadError::at(pointer, format!("{k} cell entries for {n} cells"))),
    }
}

fn point(v: &[f64], dim: Dimension, pointer: &str) -> Result<Vec2, LoadError> {
    match (dim, v) {
        (Dimension::One, [x]) => Ok(Vec2::on_line(*x)),
        (Dimension::Two, [x, y]) => Ok(Vec2::new(*x, *y)),
        _ => Err(LoadError::at(pointer, format!("expected {} coordinate(s)", dim.as_usize()))),
    }
}

fn build_domain(spec: &DomainSpec) -> Result<PolygonalDomain, LoadError> {
    let d = match spec {
        DomainSpec::Line { lo, hi, breaks } => PolygonalDomain::line(*lo, *hi, breaks),
        DomainSpec::Grid { xs, ys } => {
            if xs.len() < 2 || ys.len() < 2 {
                return Err(LoadError::at("/domain/grid", "a grid needs at least two lines per axis"));
            }
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
            let hi = Vec2::new(xs[xs.len() - 1], ys[ys.len() - 1]);
            PolygonalDomain::planar(lo, hi, cells)
        }
        DomainSpec::Planar { lo, hi, cells } => PolygonalDomain::planar(
            Vec2::new(lo[0], lo[1]),
            Vec2::new(hi[0], hi[1]),
            cells.iter().map(|c| c.iter().map(|p| Vec2::new(p[0], p[1])).collect()).collect(),
        ),
    };
    let tag = match spec {
        DomainSpec::Line { .. } => "line",
        DomainSpec::Grid { .. } => "grid",
        DomainSpec::Planar { .. } => "planar",
    };
    d.map_err(|e| LoadError::at(format!("/domain/{tag}"), e))
}

fn build_field(spec: &FieldSpec, domain: &PolygonalDomain) -> Result<PiecewiseField, LoadError> {
    let n = domain.cells().len();
    let polys = |cells: &[[PolySpec; 2]], key: &str| -> Result<Vec<[Poly; 2]>, LoadError> {
        let cells = broadcast(cells, n, &format!("/field/{key}"))?;
        Ok(cells.iter().map(|[p, q]| [p.to_poly(), q.to_poly()]).collect())
    };
    let built = match (&spec.b, &spec.a) {
        (Some(b), None) => PiecewiseField::new(domain.clone(), polys(b, "b")?, spec.t_max),
        (None, Some(a)) => PiecewiseField::t_independent(domain.clone(), polys(a, "a")?, spec.t_max),
        _ => return Err(LoadError::at("/field", "exactly one of `b` and `a` must be given")),
    };
    built.map_err(|e| LoadError::at("/field", e))
}

fn build_u(spec: &BvSpec, domain: &PolygonalDomain, t_max: f64) -> Result<PiecewiseBV, LoadError> {
    let cells = broadcast(&spec.cells, domain.cells().len(), "/u/cells")?;
    let cantor = spec.cantor.as_ref().map(|c| CantorComponent {
        coefficient: c.coefficient,
        set: CantorSet::new(c.lo, c.hi),
    });
    let u = PiecewiseBV::new(domain.clone(), cells.iter().map(PolySpec::to_poly).collect(), cantor).map_err(|e| LoadError::at("/u", e))?;
    let norm = u.norm_inf();
    if norm > t_max {
        return Err(LoadError::at("/u", format!("‖u‖∞ = {norm} exceeds the field's t range T = {t_max}")));
    }
    Ok(u)
}

fn support_inside(domain: &PolygonalDomain, phi: &TestFunction, margin: f64) -> bool {
    let (lo, hi) = phi.support_box();
    let (dlo, dhi) = domain.bounds();
    let ok_x = lo.x - margin > dlo.x && hi.x + margin < dhi.x;
    match domain.dimension() {
        Dimension::One => ok_x,
        Dimension::Two => ok_x && lo.y - margin > dlo.y && hi.y + margin < dhi.y,
    }
}

fn build_phis(spec: &TestFunctionSpec, domain: &PolygonalDomain, margin: f64, seed: u64) -> Result<Vec<NamedPhi>, LoadError> {
    let dim = domain.dimension();
    let mut out: Vec<NamedPhi> = Vec::new();
    for (k, p) in spec.explicit.iter().enumerate() {
        let at = format!("/test_functions/explicit/{k}");
        let c = point(&p.center, dim, &format!("{at}/center"))?;
        let pre = p.prefactor.as_ref().map_or(Poly::constant(std::f64::consts::E), PolySpec::to_poly);
        let phi = TestFunction::new(dim, c, p.radius, pre).map_err(|e| LoadError::at(&at, e))?;
        if !support_inside(domain, &phi, margin) {
            return Err(LoadError::at(&at, "support, widened by the largest ε, leaves the domain"));
        }
        let id = p.id.clone().unwrap_or_else(|| format!("phi{k:02}"));
        if out.iter().any(|q| q.id == id) {
            return Err(LoadError::at(format!("{at}/id"), format!("duplicate test function id `{id}`")));
        }
        out.push(NamedPhi { id, phi });
    }
    if let Some(r) = &spec.random {
        let at = "/test_functions/random";
        let lo = point(&r.center_lo, dim, &format!("{at}/center_lo"))?;
        let hi = point(&r.center_hi, dim, &format!("{at}/center_hi"))?;
        let [rmin, rmax] = r.radius;
        if !(rmin > 0.0 && rmin <= rmax) || lo.x > hi.x || lo.y > hi.y {
            return Err(LoadError::at(at, "empty sampling box or radius range"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |a: f64, b: f64| if a < b { rng.gen_range(a..b) } else { a };
        for k in 0..r.count {
            let cx = draw(lo.x, hi.x);
            let cy = draw(lo.y, hi.y);
            let rad = draw(rmin, rmax);
            let c = match dim {
                Dimension::One => Vec2::on_line(cx),
                Dimension::Two => Vec2::new(cx, cy),
            };
            let phi = TestFunction::normalized(dim, c, rad).map_err(|e| LoadError::at(at, e))?;
            if !support_inside(domain, &phi, margin) {
                return Err(LoadError::at(at, format!("random bump {k} leaves the domain; shrink the box or radii")));
            }
            out.push(NamedPhi { id: format!("rand{k:02}"), phi });
        }
    }
    Ok(out)
}

fn build_sets(specs: &[SetSpec], domain: &PolygonalDomain) -> Result<Vec<NamedSet>, LoadError> {
    let mut out = Vec::new();
    for (k, s) in specs.iter().enumerate() {
        let at = format!("/sets/{k}");
        let set = match (s, domain.dimension()) {
            (SetSpec::Polygon(v), Dimension::Two) => FinitePerimeterSet::polygon(v.iter().map(|p| Vec2::new(p[0], p[1])).collect()),
            (SetSpec::Intervals(v), Dimension::One) => FinitePerimeterSet::intervals(v.iter().map(|p| (p[0], p[1])).collect()),
            _ => return Err(LoadError::at(at, "set kind does not match the domain dimension")),
        }
        .map_err(|e| LoadError::at(&at, e))?;
        check_contained(&set, domain).map_err(|e| LoadError::at(&at, e))?;
        out.push(NamedSet { id: format!("set{k}"), set });
    }
    Ok(out)
}

/// Validates a parsed scenario and builds the core objects.
pub fn build(file: ScenarioFile, seed: Option<u64>) -> Result<Scenario, LoadError> {
    let seed = seed.or(file.seed).unwrap_or(0);
    let domain = build_domain(&file.domain)?;
    let field = build_field(&file.field, &domain)?;
    let u = build_u(&file.u, &domain, file.field.t_max)?;

    if file.eps.is_empty() || file.eps.iter().any(|e| !(*e > 0.0)) || file.eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LoadError::at("/eps", "ε must be positive and strictly decreasing"));
    }
    let needs_study = file.checks.iter().any(|c| matches!(c, CheckKind::Convergence));
    if needs_study && file.eps.len() < 4 {
        return Err(LoadError::at("/eps", "the convergence check needs at least four ε values"));
    }
    if file.trace_radii.len() < 2 || file.trace_radii.iter().any(|r| !(*r > 0.0)) || file.trace_radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LoadError::at("/trace_radii", "need at least two positive, strictly decreasing radii"));
    }

    let margin = file.eps[0];
    let phis = build_phis(&file.test_functions, &domain, margin, seed)?;
    let sets = build_sets(&file.sets, &domain)?;

    for (k, c) in file.checks.iter().enumerate() {
        let at = format!("/checks/{k}");
        match c {
            CheckKind::Anzellotti if !field.is_t_independent() => {
                return Err(LoadError::at(at, "the anzellotti check needs a t-independent field (`a`)"));
            }
            CheckKind::Mubdd | CheckKind::GaussGreen | CheckKind::Gluing if sets.is_empty() => {
                return Err(LoadError::at(at, format!("`{}` needs at least one set", c.label())));
            }
            CheckKind::ChainRule | CheckKind::PairingRoutes | CheckKind::Anzellotti | CheckKind::Convergence | CheckKind::Gluing | CheckKind::Traces
                if phis.is_empty() =>
            {
                return Err(LoadError::at(at, format!("`{}` needs test functions", c.label())));
            }
            _ => {}
        }
    }
    if file.checks.contains(&CheckKind::Gluing) && file.glue_set >= sets.len() {
        return Err(LoadError::at("/glue_set", format!("no set with index {}", file.glue_set)));
    }
    for (k, e) in file.expect.iter().enumerate() {
        let at = format!("/expect/{k}");
        if e.quantity.per_set() {
            match e.set {
                Some(s) if s < sets.len() => {}
                _ => return Err(LoadError::at(format!("{at}/set"), "balance quantities need a valid set index")),
            }
        } else {
            match e.phi.as_deref() {
                Some("*") => {}
                Some(id) if phis.iter().any(|p| p.id == id) => {}
                Some(id) => return Err(LoadError::at(format!("{at}/phi"), format!("unknown test function `{id}`"))),
                None => return Err(LoadError::at(format!("{at}/phi"), "pairing quantities need a test function id or \"*\"")),
            }
        }
        if e.quantity == Quantity::MuCantor && u.cantor().is_none() {
            return Err(LoadError::at(format!("{at}/quantity"), "u has no Cantor part"));
        }
    }

    Ok(Scenario {
        name: file.name,
        seed,
        field,
        u,
        sets,
        phis,
        eps: file.eps,
        trace_radii: file.trace_radii,
        tol: file.tolerances,
        glue_set: file.glue_set,
        checks: file.checks,
        expect: file.expect,
    })
}
