mod common;

use std::sync::Arc;

use common::*;
use dmpair_core::geometry::Dimension;
use dmpair_core::measure::Region;
use dmpair_core::oracle::{convergence_study, one_sided_flux, study_from_values, weak_divergence, PiecewiseVectorField, Side};
use dmpair_core::pairing::pairing_by_mollification;
use dmpair_core::{Error, Integrator, PiecewiseBV, PiecewiseField, Poly, Vec2};
use proptest::prelude::*;

fn q() -> Integrator {
    Integrator::default()
}

fn step_1d() -> PiecewiseVectorField {
    PiecewiseVectorField::smooth(Dimension::One, Region::Interval { lo: 0.0, hi: 2.0 }, Arc::new(|_| Vec2::new(1.0, 0.0)))
}

fn square(h: f64) -> Region {
    Region::polygon(vec![Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)])
}

#[test]
fn weak_divergence_examples() {
    let phi = bump1(0.0, 0.9);
    assert_eq!(phi.eval(Vec2::ZERO), 1.0);
    assert!((weak_divergence(&step_1d(), &phi, &q()).unwrap() - 1.0).abs() < 1e-10);
    let off = bump1(0.3, 0.5);
    assert!((weak_divergence(&step_1d(), &off, &q()).unwrap() - off.eval(Vec2::ZERO)).abs() < 1e-10);

    let cst = PiecewiseVectorField::smooth(Dimension::Two, square(2.0), Arc::new(|_| Vec2::new(0.3, -1.1)));
    assert!(weak_divergence(&cst, &bump2(Vec2::new(0.1, 0.2), 0.8), &q()).unwrap().abs() < 1e-12);

    let radial = PiecewiseVectorField::smooth(Dimension::Two, square(2.0), Arc::new(|p| p));
    let phi2 = bump2(Vec2::new(0.2, -0.3), 0.7);
    let want = 2.0 * gauss2(|p| phi2.eval(p), &[-0.5, 0.2, 0.9], &[-1.0, -0.3, 0.4], 40);
    assert!((weak_divergence(&radial, &phi2, &q()).unwrap() - want).abs() < 1e-10);

    assert!(matches!(weak_divergence(&radial, &phi, &q()), Err(Error::Domain(_))));
}

#[test]
fn one_sided_flux_examples() {
    let radii = [0.1, 0.05, 0.025, 0.0125];
    let n = Vec2::new(1.0, 0.0);
    let v = step_1d();
    assert!(one_sided_flux(&v, Vec2::ZERO, n, Side::Minus, &radii).unwrap().limit.abs() < 1e-12);
    assert!((one_sided_flux(&v, Vec2::ZERO, n, Side::Plus, &radii).unwrap().limit - 1.0).abs() < 1e-12);

    let a = Vec2::new(0.6, -0.8);
    let cst = PiecewiseVectorField::smooth(Dimension::Two, square(2.0), Arc::new(move |_| a));
    let nu = Vec2::new(1.0, 1.0).normalized();
    for side in [Side::Minus, Side::Plus] {
        let f = one_sided_flux(&cst, Vec2::new(0.2, 0.1), nu, side, &radii).unwrap();
        assert!((f.limit - a.dot(nu)).abs() < 1e-12);
    }
    // smooth field: both sides recover v(x)·ν
    let smooth = PiecewiseVectorField::smooth(Dimension::Two, square(2.0), Arc::new(|p: Vec2| Vec2::new(p.x * p.y + 1.0, p.x.sin())));
    let x0 = Vec2::new(0.3, -0.4);
    let exact = Vec2::new(x0.x * x0.y + 1.0, x0.x.sin()).dot(nu);
    for side in [Side::Minus, Side::Plus] {
        let f = one_sided_flux(&smooth, x0, nu, side, &radii).unwrap();
        assert!((f.limit - exact).abs() < 1e-6, "{} {exact}", f.limit);
    }
    assert!(one_sided_flux(&v, Vec2::ZERO, n, Side::Plus, &[0.1]).is_err());
}

#[test]
fn one_sided_flux_converges_at_first_order_or_better() {
    // polynomial data on one side of the line x = 0
    let v = PiecewiseVectorField::smooth(
        Dimension::Two,
        Region::polygon(vec![Vec2::new(0.0, -2.0), Vec2::new(2.0, -2.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)]),
        Arc::new(|p: Vec2| Vec2::new(1.0 + 2.0 * p.x - p.y * p.y, p.x * p.y)),
    );
    let n = Vec2::new(1.0, 0.0);
    let x0 = Vec2::new(0.0, 0.5);
    let exact = 1.0 - 0.25;
    let radii = [0.2, 0.1, 0.05, 0.025];
    let est = one_sided_flux(&v, x0, n, Side::Plus, &radii).unwrap();
    let errs: Vec<f64> = est.averages.iter().map(|a| (a - exact).abs()).collect();
    // radii halve, so log2 of successive error ratios is the observed order
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 0.95, "{errs:?}");
    }
    assert!((est.limit - exact).abs() < 1e-10);
}

#[test]
fn convergence_study_examples() {
    let hs = [0.4, 0.2, 0.1, 0.05, 0.025];
    let lin = convergence_study(&mut |h| Ok(3.0 + 0.7 * h), &hs).unwrap();
    assert!((lin.limit - 3.0).abs() < 1e-12 && (lin.order - 1.0).abs() < 1e-6);
    assert!(lin.reliable);
    let quad = convergence_study(&mut |h| Ok(-1.0 + 2.0 * h * h), &hs).unwrap();
    assert!((quad.limit + 1.0).abs() < 1e-12 && (quad.order - 2.0).abs() < 1e-6);
    for r in &quad.ratios {
        assert!((r - 4.0).abs() < 1e-9);
    }
    assert!(matches!(study_from_values(&hs[..3], &[1.0, 2.0, 3.0]), Err(Error::Domain(_))));
    assert!(study_from_values(&[0.1, 0.2, 0.05, 0.01], &[1.0; 4]).is_err());
    let wobbly = study_from_values(&hs, &[1.0, 1.3, 0.9, 1.05, 1.0]).unwrap();
    assert!(!wobbly.reliable);
}

#[test]
fn mollified_sign_pairing_tends_to_zero() {
    let phi = bump1(0.1, 0.8);
    let eps = [0.16, 0.08, 0.04, 0.02];
    let r = pairing_by_mollification(&sign_field(1.0), &heaviside(), &phi, &eps, &q()).unwrap();
    let study = study_from_values(&eps, &r.values).unwrap();
    assert!(study.limit.abs() < 1e-3, "{:?}", r.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthetic_orders_are_recovered(l in -5.0f64..5.0, c in 0.1f64..3.0, p in 1u32..4, sgn in prop::bool::ANY) {
        let c = if sgn { c } else { -c };
        let hs = [0.2, 0.1, 0.05, 0.025, 0.0125];
        let s = convergence_study(&mut |h| Ok(l + c * h.powi(p as i32)), &hs).unwrap();
        prop_assert!((s.limit - l).abs() < 1e-9 * (1.0 + l.abs()));
        prop_assert!((s.order - p as f64).abs() < 1e-3, "{}", s.order);
        prop_assert!(s.reliable);
    }

    #[test]
    fn weak_divergence_matches_analytic_divergence(b in prop::collection::vec((poly(2, 2, 2), poly(2, 2, 2)), 4), cx in -0.3f64..0.3, cy in -0.3f64..0.3, k in 0usize..9) {
        let g = [-1.0, 0.0, 1.0];
        let cells = b.into_iter().map(|(a, b)| [cap(a, 0.8), cap(b, 0.8)]).collect();
        let f = PiecewiseField::new(grid(&g, &g), cells, 1.0).unwrap();
        let tt = -1.0 + 0.25 * k as f64;
        let phi = bump2(Vec2::new(cx, cy), 0.6);
        let brute = weak_divergence(&PiecewiseVectorField::at_level(&f, tt), &phi, &q()).unwrap();
        let exact = f.div_big_b(tt).unwrap().apply(&phi).unwrap();
        prop_assert!((brute - exact).abs() < 1e-10, "{} {}", brute, exact);
    }

    #[test]
    fn weak_divergence_matches_analytic_divergence_1d(us in prop::collection::vec(poly(3, 0, 0), 2), cc in -0.5f64..0.5, r in 0.4f64..1.2) {
        let f = PiecewiseField::new(line2(), vec![[c(1.0), Poly::zero()], [c(-0.5), Poly::zero()]], 1.0).unwrap();
        let us: Vec<Poly> = us.into_iter().map(|p| cap(p, 1.0)).collect();
        let u = PiecewiseBV::new(line2(), us, None).unwrap();
        let v = PiecewiseVectorField::composite(&f, &u);
        let phi = bump1(cc, r);
        let brute = weak_divergence(&v, &phi, &q()).unwrap();
        // v = b u cellwise: Div v = b u′ on cells plus the jump of b u at 0
        let (um, up) = (u.cell_poly(0).eval(Vec2::ZERO, 0.0), u.cell_poly(1).eval(Vec2::ZERO, 0.0));
        let du = |i: usize| u.cell_grad(i)[0].clone();
        let lo = (cc - r).max(-2.0);
        let hi = (cc + r).min(2.0);
        let mut exact = (-0.5 * up - um) * phi.eval(Vec2::ZERO);
        exact += gauss1(|s| du(0).eval(Vec2::on_line(s), 0.0) * phi.eval(Vec2::on_line(s)), lo, 0.0f64.max(lo), 80);
        exact += gauss1(|s| -0.5 * du(1).eval(Vec2::on_line(s), 0.0) * phi.eval(Vec2::on_line(s)), 0.0f64.min(hi), hi, 80);
        prop_assert!((brute - exact).abs() < 1e-10, "{} {}", brute, exact);
    }
}
