//! The checks a scenario can request, each producing report rows.

use std::sync::{Arc, OnceLock};

use dmpair_core::geometry::Cell;
use dmpair_core::gaussgreen::{gauss_green, gauss_green_weakly_regular, glue};
use dmpair_core::mollify::{Kernel, Mollifier};
use dmpair_core::oracle::{extrapolate_to_zero, one_sided_flux, study_from_values, weak_divergence, PiecewiseVectorField, Side};
use dmpair_core::pairing::{anzellotti_pairing, pairing_by_definition, mollified_values, pairing_decomposition, MollifiedPairing};
use dmpair_core::traces::{composite_jump_measure, composite_traces, trace_lipschitz_bound, whole_skeleton};
use dmpair_core::{Error, HybridMeasure, Integrator, PairingResult, TestFunction, Vec2};
use rayon::prelude::*;

use crate::scenario::{CheckKind, Expectation, NamedPhi, Quantity, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// `|value − reference| ≤ tolerance · max(1, |reference|)`.
    Close,
    /// `value − reference ≤ tolerance`.
    AtMost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when the value could not be computed.
    pub error: Option<String>,
}

impl Row {
    pub fn compare(name: impl Into<String>, value: f64, reference: f64, tolerance: f64, how: Comparison) -> Row {
        let (residual, pass) = match how {
            Comparison::Close => {
                let r = (value - reference).abs();
                (r, r <= tolerance * reference.abs().max(1.0))
            }
            Comparison::AtMost => {
                let r = value - reference;
                (r, r <= tolerance)
            }
        };
        Row {
            name: name.into(),
            value,
            reference,
            residual,
            tolerance,
            pass,
            error: None,
        }
    }

    fn from(name: String, tolerance: f64, how: Comparison, r: Result<(f64, f64), Error>) -> Row {
        match r {
            Ok((v, reference)) => Row::compare(name, v, reference, tolerance, how),
            Err(e) => Row {
                name,
                value: f64::NAN,
                reference: f64::NAN,
                residual: f64::NAN,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

/// One step of an `ε` study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub study: String,
    pub param: f64,
    pub value: f64,
    pub limit: f64,
    pub order: f64,
    pub reliable: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub convergence: Vec<ConvergenceRow>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Quantities shared between checks, computed on first use.
pub struct Context<'a> {
    pub sc: &'a Scenario,
    pub q: Integrator,
    decomposition: OnceLock<Result<PairingResult, Error>>,
    mollified: OnceLock<Result<Vec<MollifiedPairing>, Error>>,
    mu: OnceLock<Result<Vec<f64>, Error>>,
}

fn first_err<T: Clone>(r: &Result<T, Error>) -> Result<T, Error> {
    r.clone()
}

impl<'a> Context<'a> {
    pub fn new(sc: &'a Scenario, q: Integrator) -> Self {
        Context {
            sc,
            q,
            decomposition: OnceLock::new(),
            mollified: OnceLock::new(),
            mu: OnceLock::new(),
        }
    }

    pub fn decomposition(&self) -> Result<PairingResult, Error> {
        first_err(self.decomposition.get_or_init(|| pairing_decomposition(&self.sc.field, &self.sc.u)))
    }

    /// `μ(φ)` for every scenario test function.
    pub fn mu(&self) -> Result<Vec<f64>, Error> {
        first_err(self.mu.get_or_init(|| {
            let r = self.decomposition()?;
            self.sc.phis.par_iter().map(|p| r.mu_total.apply_with(&p.phi, &self.q)).collect()
        }))
    }

    /// Route-3 sequences for every test function. All test functions share
    /// one set of quadrature nodes and the `ε` values run in parallel, so
    /// the thread count never changes a value.
    pub fn mollified(&self) -> Result<Vec<MollifiedPairing>, Error> {
        first_err(self.mollified.get_or_init(|| {
            let sc = self.sc;
            let phis: Vec<TestFunction> = sc.phis.iter().map(|p| p.phi.clone()).collect();
            let kernel = Arc::new(Kernel::new(sc.dimension()));
            let columns: Vec<Vec<f64>> = sc
                .eps
                .par_iter()
                .map(|&e| {
                    let m = Mollifier::with_kernel(kernel.clone(), e)?;
                    mollified_values(&sc.field, &sc.u, &phis, &m, &self.q)
                })
                .collect::<Result<_, Error>>()?;
            Ok((0..phis.len())
                .map(|k| {
                    let values: Vec<f64> = columns.iter().map(|c| c[k]).collect();
                    MollifiedPairing {
                        limit: extrapolate_to_zero(&sc.eps, &values),
                        eps: sc.eps.clone(),
                        values,
                    }
                })
                .collect())
        }))
    }

    fn phi_ids(&self) -> impl Iterator<Item = &NamedPhi> {
        self.sc.phis.iter()
    }
}

fn per_phi<F>(ctx: &Context<'_>, prefix: &str, tol: f64, how: Comparison, f: F) -> Vec<Row>
where
    F: Fn(usize, &TestFunction) -> Result<(f64, f64), Error> + Sync,
{
    ctx.sc
        .phis
        .par_iter()
        .enumerate()
        .map(|(k, p)| Row::from(format!("{prefix}/{}", p.id), tol, how, f(k, &p.phi)))
        .collect()
}

fn mu_at(ctx: &Context<'_>, k: usize) -> Result<f64, Error> {
    Ok(ctx.mu()?[k])
}

fn chain_rule(ctx: &Context<'_>) -> Vec<Row> {
    let v = PiecewiseVectorField::composite(&ctx.sc.field, &ctx.sc.u);
    per_phi(ctx, "chain-rule", ctx.sc.tol.quadrature, Comparison::Close, |k, phi| {
        let r = ctx.decomposition()?;
        let lhs = r.f_term.apply_with(phi, &ctx.q)? + mu_at(ctx, k)?;
        Ok((lhs, weak_divergence(&v, phi, &ctx.q)?))
    })
}

fn pairing_routes(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let mut rows = per_phi(ctx, "pairing-routes/definition", sc.tol.quadrature, Comparison::Close, |k, phi| {
        Ok((pairing_by_definition(&sc.field, &sc.u, phi, &ctx.q)?, mu_at(ctx, k)?))
    });
    rows.extend(ctx.phi_ids().enumerate().map(|(k, p)| {
        let r = ctx.mollified().and_then(|m| Ok((m[k].limit, mu_at(ctx, k)?)));
        Row::from(format!("pairing-routes/mollified/{}", p.id), sc.tol.mollified, Comparison::Close, r)
    }));
    rows
}

fn anzellotti(ctx: &Context<'_>) -> Vec<Row> {
    let classical = anzellotti_pairing(&ctx.sc.field, &ctx.sc.u);
    per_phi(ctx, "anzellotti", ctx.sc.tol.exact, Comparison::Close, |k, phi| {
        let m = classical.clone()?;
        Ok((m.apply_with(phi, &ctx.q)?, mu_at(ctx, k)?))
    })
}

fn mubdd(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let b = sc.field.norm_b_inf();
    let variation = sc.u.variation();
    sc.sets
        .par_iter()
        .map(|s| {
            let r = ctx.decomposition().and_then(|d| {
                let lhs = d.mu_total.total_variation(&s.set, &ctx.q)?;
                Ok((lhs, b * variation.total_variation(&s.set, &ctx.q)?))
            });
            Row::from(format!("mubdd/{}", s.id), sc.tol.bound, Comparison::AtMost, r)
        })
        .collect()
}

/// Up to `n` sample points spread over edges and cells, alternating.
pub fn sample_points(sc: &Scenario, n: usize) -> Vec<Vec2> {
    let domain = sc.field.domain();
    let mut edge_pts = Vec::new();
    for s in [0.37, 0.71, 0.19, 0.53] {
        for e in domain.skeleton() {
            edge_pts.push(e.point_at(s));
        }
    }
    let mut cell_pts = Vec::new();
    for s in [0.5, 0.23, 0.81] {
        for c in domain.cells() {
            match c {
                Cell::Interval { lo, hi } => cell_pts.push(Vec2::on_line(lo + s * (hi - lo))),
                Cell::Polygon(p) => {
                    let tri = p.triangles();
                    let t = &tri[((s * 10.0) as usize) % tri.len()];
                    let w = [s, 0.5 * (1.0 - s), 0.5 * (1.0 - s)];
                    cell_pts.push(t[0].scale(w[0]) + t[1].scale(w[1]) + t[2].scale(w[2]));
                }
            }
        }
    }
    let mut out: Vec<Vec2> = Vec::new();
    let (mut a, mut b) = (edge_pts.into_iter(), cell_pts.into_iter());
    while out.len() < n {
        let (x, y) = (a.next(), b.next());
        if x.is_none() && y.is_none() {
            break;
        }
        for p in [x, y].into_iter().flatten() {
            if out.len() < n && !out.iter().any(|q| q.dist(p) < 1e-12) {
                out.push(p);
            }
        }
    }
    out
}

fn lip_f(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let f = &sc.field;
    let tmax = f.t_max();
    let ts: Vec<f64> = (0..10).map(|k| -tmax + 2.0 * tmax * k as f64 / 9.0).collect();
    let sampled = || -> Result<(f64, f64), Error> {
        let (mut fmax, mut lip) = (0.0f64, 0.0f64);
        for x in sample_points(sc, 10) {
            let s = f.support_at(x)?;
            let big: Vec<f64> = ts.iter().map(|&t| f.F_potential(&s, t)).collect::<Result<_, _>>()?;
            for (i, &t) in ts.iter().enumerate() {
                fmax = fmax.max(f.f_density(&s, t)?.abs());
                for j in 0..i {
                    lip = lip.max((big[i] - big[j]).abs() / (t - ts[j]).abs());
                }
            }
        }
        Ok((fmax, lip))
    };
    let tol = sc.tol.bound;
    match sampled() {
        Ok((fmax, lip)) => {
            let trace = trace_lipschitz_bound(f, &whole_skeleton(f)).map(|l| (l, f.norm_b_inf()));
            vec![
                Row::compare("lipF/f-bound", fmax, 1.0, tol, Comparison::AtMost),
                Row::compare("lipF/F-lipschitz", lip, 1.0, tol, Comparison::AtMost),
                Row::from("lipF/trace-lipschitz".into(), tol, Comparison::AtMost, trace),
            ]
        }
        Err(e) => vec![Row::from("lipF/sampling".into(), tol, Comparison::AtMost, Err(e))],
    }
}

fn traces(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let f = &sc.field;
    let cts = match composite_traces(f, &sc.u, &whole_skeleton(f)) {
        Ok(c) => c,
        Err(e) => return vec![Row::from("traces/composite".into(), sc.tol.mollified, Comparison::Close, Err(e))],
    };
    let v = PiecewiseVectorField::composite(f, &sc.u);
    let mut points = Vec::new();
    for ct in &cts {
        let fracs: &[f64] = if ct.traces.a == ct.traces.b { &[0.5] } else { &[0.3, 0.5, 0.7] };
        for &s in fracs {
            points.push((ct, s));
        }
    }
    points.truncate(12);
    let mut rows: Vec<Row> = points
        .par_iter()
        .flat_map_iter(|&(ct, s)| {
            let x = ct.traces.point(s);
            let n = ct.traces.normal;
            let tag = format!("e{}@{s:.2}", ct.traces.edge);
            [(Side::Minus, "minus", ct.tr_minus(x)), (Side::Plus, "plus", ct.tr_plus(x))].map(|(side, label, tr)| {
                let r = one_sided_flux(&v, x, n, side, &sc.trace_radii).map(|est| (est.limit, tr));
                Row::from(format!("traces/{label}/{tag}"), sc.tol.mollified, Comparison::Close, r)
            })
        })
        .collect();
    let jump = composite_jump_measure(sc.dimension(), &cts);
    rows.extend(per_phi(ctx, "traces/jump", sc.tol.exact, Comparison::Close, |_, phi| {
        let edge = ctx.decomposition()?.composite_div.edge_part();
        Ok((jump.apply_with(phi, &ctx.q)?, edge.apply_with(phi, &ctx.q)?))
    }));
    rows
}

fn gauss_green_rows(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let tol = sc.tol.gauss_green;
    sc.sets
        .par_iter()
        .flat_map_iter(|s| {
            let id = &s.id;
            let named = |suffix: &str| format!("gauss-green/{suffix}/{id}");
            match (gauss_green(&sc.field, &sc.u, &s.set, &ctx.q), gauss_green_weakly_regular(&sc.field, &sc.u, &s.set, &ctx.q)) {
                (Ok(g), Ok(w)) => vec![
                    Row::compare(named("interior"), g.lhs_interior, g.rhs_interior, tol, Comparison::Close),
                    Row::compare(named("closure"), g.lhs_closure, g.rhs_closure, tol, Comparison::Close),
                    Row::compare(named("consistency"), g.consistency(), 0.0, tol, Comparison::Close),
                    Row::compare(named("weak-interior"), w.lhs_interior, w.rhs_interior, tol, Comparison::Close),
                    Row::compare(named("weak-glued"), w.lhs_closure, w.rhs_closure, tol, Comparison::Close),
                ],
                (Err(e), _) | (_, Err(e)) => vec![Row::from(named("balance"), tol, Comparison::Close, Err(e))],
            }
        })
        .collect()
}

fn gluing(ctx: &Context<'_>) -> Vec<Row> {
    let sc = ctx.sc;
    let set = &sc.sets[sc.glue_set];
    let both = Some((&sc.field, &sc.u));
    let matching = glue(both, both, &set.set);
    let zero = glue(both, None, &set.set);
    let mut rows = per_phi(ctx, &format!("gluing/matching/{}", set.id), sc.tol.exact, Comparison::Close, |_, phi| {
        let g = matching.clone()?;
        Ok((g.div.apply_with(phi, &ctx.q)?, ctx.decomposition()?.composite_div.apply_with(phi, &ctx.q)?))
    });
    rows.extend(per_phi(ctx, &format!("gluing/zero-extension/{}", set.id), sc.tol.quadrature, Comparison::Close, |_, phi| {
        let g = zero.clone()?;
        Ok((g.div.apply_with(phi, &ctx.q)?, weak_divergence(&g.v, phi, &ctx.q)?))
    }));
    rows
}

fn convergence(ctx: &Context<'_>, out: &mut Vec<ConvergenceRow>) -> Vec<Row> {
    let mut rows = Vec::new();
    for (k, p) in ctx.phi_ids().enumerate() {
        let name = format!("convergence/{}", p.id);
        let r = ctx.mollified().and_then(|m| {
            let m = &m[k];
            let mu = mu_at(ctx, k)?;
            let study = study_from_values(&m.eps, &m.values)?;
            for (e, v) in m.eps.iter().zip(&m.values) {
                out.push(ConvergenceRow {
                    study: format!("route3/{}", p.id),
                    param: *e,
                    value: *v,
                    limit: study.limit,
                    order: study.order,
                    reliable: study.reliable,
                });
            }
            let first = (m.values[0] - mu).abs();
            let last = (m.values[m.values.len() - 1] - mu).abs();
            Ok((last, first))
        });
        // the error at the smallest ε must not exceed the error at the largest
        rows.push(Row::from(name, 1e-12, Comparison::AtMost, r));
    }
    rows
}

fn golden(ctx: &Context<'_>, e: &Expectation) -> Vec<Row> {
    let sc = ctx.sc;
    let tol = e.tol.unwrap_or(sc.tol.exact);
    let label = e.quantity.label();
    if e.quantity.per_set() {
        let s = e.set.expect("validated at load");
        let r = gauss_green(&sc.field, &sc.u, &sc.sets[s].set, &ctx.q).map(|g| {
            let v = match e.quantity {
                Quantity::GgLhsInterior => g.lhs_interior,
                Quantity::GgRhsInterior => g.rhs_interior,
                Quantity::GgLhsClosure => g.lhs_closure,
                _ => g.rhs_closure,
            };
            (v, e.value)
        });
        return vec![Row::from(format!("golden/{label}/{}", sc.sets[s].id), tol, Comparison::Close, r)];
    }
    let wanted = e.phi.as_deref().expect("validated at load");
    ctx.phi_ids()
        .enumerate()
        .filter(|(_, p)| wanted == "*" || p.id == wanted)
        .map(|(k, p)| {
            let r = match e.quantity {
                Quantity::Mu => mu_at(ctx, k),
                Quantity::MuCantor => ctx.decomposition().and_then(|d| d.mu_c.apply_with(&p.phi, &ctx.q)),
                _ => ctx.mollified().map(|m| m[k].limit),
            };
            Row::from(format!("golden/{label}/{}", p.id), tol, Comparison::Close, r.map(|v| (v, e.value)))
        })
        .collect()
}

/// Runs the scenario's checks in declared order.
pub fn run_checks(sc: &Scenario, q: Integrator) -> Outcome {
    let ctx = Context::new(sc, q);
    let mut out = Outcome::default();
    for check in &sc.checks {
        let rows = match check {
            CheckKind::ChainRule => chain_rule(&ctx),
            CheckKind::PairingRoutes => pairing_routes(&ctx),
            CheckKind::Anzellotti => anzellotti(&ctx),
            CheckKind::Mubdd => mubdd(&ctx),
            CheckKind::LipF => lip_f(&ctx),
            CheckKind::Traces => traces(&ctx),
            CheckKind::GaussGreen => gauss_green_rows(&ctx),
            CheckKind::Gluing => gluing(&ctx),
            CheckKind::Convergence => convergence(&ctx, &mut out.convergence),
            CheckKind::Golden => sc.expect.iter().flat_map(|e| golden(&ctx, e)).collect(),
        };
        out.rows.extend(rows);
    }
    out
}

/// `μ` as a measure, exposed for the `pair` subcommand.
pub fn mu_measure(ctx: &Context<'_>) -> Result<HybridMeasure, Error> {
    Ok(ctx.decomposition()?.mu_total)
}
