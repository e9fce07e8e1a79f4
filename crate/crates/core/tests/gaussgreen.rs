mod common;

use common::*;
use dmpair_core::gaussgreen::{extend, gauss_green, gauss_green_weakly_regular, glue};
use dmpair_core::oracle::weak_divergence;
use dmpair_core::pairing::composite_divergence;
use dmpair_core::{Error, FinitePerimeterSet, Integrator, PiecewiseBV, PiecewiseField, Poly, Vec2};
use proptest::prelude::*;

fn q() -> Integrator {
    Integrator::default()
}

fn square(lo: f64, hi: f64) -> FinitePerimeterSet {
    FinitePerimeterSet::polygon(vec![Vec2::new(lo, lo), Vec2::new(hi, lo), Vec2::new(hi, hi), Vec2::new(lo, hi)]).unwrap()
}

fn radial() -> (PiecewiseField, PiecewiseBV) {
    let f = PiecewiseField::t_independent(square_grid(), vec![[x(), y()]; 9], 1.0).unwrap();
    (f, PiecewiseBV::new(square_grid(), vec![c(1.0); 9], None).unwrap())
}

/// Flux of `(x, y)` through the unit square against the interior normal,
/// edge by edge: bottom and left vanish, top and right give −1 each.
fn radial_flux() -> f64 {
    let edges = [
        (Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
        (Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(-1.0, 0.0)),
        (Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)),
        (Vec2::new(0.0, 1.0), Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)),
    ];
    edges.iter().map(|&(a, b, n)| gauss1(|s| a.lerp(b, s).dot(n), 0.0, 1.0, 4)).sum()
}

#[test]
fn gauss_green_examples() {
    let (f, u) = radial();
    assert!((radial_flux() + 2.0).abs() < 1e-14);
    let r = gauss_green(&f, &u, &unit_square(), &q()).unwrap();
    for v in [r.lhs_interior, r.lhs_closure, r.rhs_interior, r.rhs_closure] {
        assert!((v + radial_flux()).abs() < 1e-12, "{r:?}");
    }
    assert!(r.max_residual() < 1e-12);

    let a = PiecewiseField::t_independent(square_grid(), vec![[c(0.4), c(-1.2)]; 9], 1.0).unwrap();
    let uc = PiecewiseBV::new(square_grid(), vec![c(0.6); 9], None).unwrap();
    let tri = FinitePerimeterSet::polygon(vec![Vec2::new(-0.5, -0.3), Vec2::new(1.7, 0.2), Vec2::new(0.1, 1.9)]).unwrap();
    let r = gauss_green(&a, &uc, &tri, &q()).unwrap();
    for v in [r.lhs_interior, r.lhs_closure, r.rhs_interior, r.rhs_closure] {
        assert!(v.abs() < 1e-12, "{r:?}");
    }

    let e = FinitePerimeterSet::intervals(vec![(-1.0, 1.0)]).unwrap();
    let r = gauss_green(&sign_field(1.0), &heaviside(), &e, &q()).unwrap();
    // v = χ_{x>0}: the flux difference v(1) − v(−1)
    assert!((r.lhs_interior - 1.0).abs() < 1e-14 && (r.rhs_interior - 1.0).abs() < 1e-14);
    assert!(r.max_residual() < 1e-14);

    let far = square(2.5, 3.5);
    assert!(matches!(gauss_green(&f, &u, &far, &q()), Err(Error::Domain(_))));
}

#[test]
fn weakly_regular_examples() {
    let (f, u) = radial();
    let r = gauss_green_weakly_regular(&f, &u, &unit_square(), &q()).unwrap();
    assert!(r.max_residual() < 1e-12 && (r.lhs_interior - 2.0).abs() < 1e-12);

    let zero = PiecewiseBV::new(square_grid(), vec![Poly::zero(); 9], None).unwrap();
    let r = gauss_green_weakly_regular(&f, &zero, &unit_square(), &q()).unwrap();
    for v in [r.lhs_interior, r.lhs_closure, r.rhs_interior, r.rhs_closure] {
        assert!(v.abs() < 1e-14);
    }

    // b = t A: B(x, 1) = A/2, divergence free with no σ
    let ta = PiecewiseField::new(square_grid(), vec![[t().scale(0.7), t().scale(0.2)]; 9], 1.0).unwrap();
    let r = gauss_green_weakly_regular(&ta, &u, &unit_square(), &q()).unwrap();
    assert!(ta.sigma().is_zero());
    assert!(r.rhs_interior.abs() < 1e-14 && r.max_residual() < 1e-14);
}

#[test]
fn glue_with_matching_data_is_the_global_divergence() {
    let b = vec![[t().mul(&x()), y().add(&t().mul(&t()))], [c(0.3), t()], [x().mul(&y()), t().scale(-0.5)]]
        .into_iter()
        .cycle()
        .take(9)
        .collect();
    let f = PiecewiseField::new(square_grid(), b, 1.0).unwrap();
    let cells: Vec<Poly> = (0..9).map(|i| y().scale(0.1).add(&c(-0.5 + 0.11 * i as f64))).collect();
    let u = PiecewiseBV::new(square_grid(), cells, None).unwrap();
    let set = FinitePerimeterSet::polygon(vec![Vec2::new(-0.6, -0.4), Vec2::new(1.4, -0.2), Vec2::new(1.2, 1.5), Vec2::new(-0.3, 1.1)]).unwrap();
    let glued = glue(Some((&f, &u)), Some((&f, &u)), &set).unwrap();
    let global = composite_divergence(&f, &u).unwrap();
    for k in 0..20 {
        let th = k as f64 * 0.7;
        let phi = bump2(Vec2::new(0.5 + 0.9 * th.cos(), 0.5 + 0.9 * th.sin()), 0.5 + 0.03 * k as f64);
        let a = glued.div.apply(&phi).unwrap();
        let g = global.apply(&phi).unwrap();
        assert!((a - g).abs() < 1e-8 * (1.0 + g.abs()), "k={k} {a} {g}");
    }
}

#[test]
fn glue_with_zero_outside() {
    let f = PiecewiseField::new(square_grid(), vec![[t().mul(&x()).add(&c(0.3)), t().mul(&t()).add(&y())]; 9], 1.0).unwrap();
    let u = PiecewiseBV::new(square_grid(), (0..9).map(|i| x().scale(0.2).add(&c(0.04 * i as f64))).collect(), None).unwrap();
    let set = FinitePerimeterSet::polygon(vec![Vec2::new(-0.5, -0.5), Vec2::new(1.5, 0.2), Vec2::new(0.4, 1.4)]).unwrap();
    let glued = glue(Some((&f, &u)), None, &set).unwrap();
    for (cc, r) in [(Vec2::new(0.4, 0.3), 0.6), (Vec2::new(-0.4, -0.4), 0.5), (Vec2::new(1.2, 0.5), 0.7), (Vec2::new(0.5, 1.2), 0.5)] {
        let phi = bump2(cc, r);
        let a = glued.div.apply(&phi).unwrap();
        let w = weak_divergence(&glued.v, &phi, &q()).unwrap();
        assert!((a - w).abs() < 1e-8, "{a} {w}");
    }

    let zf = PiecewiseField::new(square_grid(), vec![[Poly::zero(), Poly::zero()]; 9], 1.0).unwrap();
    let glued = glue(Some((&zf, &u)), Some((&zf, &u)), &set).unwrap();
    assert_eq!(glued.div.apply(&bump2(Vec2::new(0.3, 0.3), 0.8)).unwrap(), 0.0);
    assert!(matches!(glue(Some((&f, &u)), None, &square(2.0, 4.0)), Err(Error::Domain(_))));
}

#[test]
fn extension_examples() {
    // v₂ = 0, v₁ = A on E = unit square: Div v = A·ν_int on ∂E
    let a = Vec2::new(0.8, -0.3);
    let fa = PiecewiseField::t_independent(square_grid(), vec![[c(a.x), c(a.y)]; 9], 1.0).unwrap();
    let one = PiecewiseBV::new(square_grid(), vec![c(1.0); 9], None).unwrap();
    let big = square(-1.0, 2.0);
    let w = square(0.3, 0.6);
    for w in [Some(&w), None] {
        let div = extend(Some((&fa, &one)), None, &unit_square(), w, &big).unwrap();
        for (cc, r) in [(Vec2::new(0.1, 0.1), 0.6), (Vec2::new(0.9, 0.5), 0.4)] {
            let phi = bump2(cc, r);
            let want = -gauss2(|p| a.dot(phi.gradient(p)), &[0.0, 0.5, 1.0], &[0.0, 0.5, 1.0], 60);
            assert!((div.apply(&phi).unwrap() - want).abs() < 1e-9);
        }
    }
    // v₁ = v₂ everywhere
    let (f, u) = radial();
    let div = extend(Some((&f, &u)), Some((&f, &u)), &unit_square(), None, &big).unwrap();
    let phi = bump2(Vec2::new(0.2, 0.9), 0.7);
    let g = composite_divergence(&f, &u).unwrap().apply(&phi).unwrap();
    assert!((div.apply(&phi).unwrap() - g).abs() < 1e-9);

    let bad_w = square(-0.5, 0.5);
    assert!(matches!(extend(Some((&f, &u)), None, &unit_square(), Some(&bad_w), &big), Err(Error::Domain(_))));
    assert!(matches!(extend(Some((&f, &u)), None, &unit_square(), None, &square(0.0, 1.5)), Err(Error::Domain(_))));
}

const G2: [f64; 3] = [-1.0, 0.0, 1.0];

fn field_cells() -> impl Strategy<Value = Vec<[Poly; 2]>> {
    prop::collection::vec((poly(1, 1, 2), poly(1, 1, 2)).prop_map(|(a, b)| [cap(a, 0.8), cap(b, 0.8)]), 4)
}

fn u_cells() -> impl Strategy<Value = Vec<Poly>> {
    prop::collection::vec(poly(1, 1, 0).prop_map(|p| cap(p, 0.9)), 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn both_formulas_balance_on_random_polygons(b in field_cells(), us in u_cells(), v in convex_polygon(Vec2::new(0.05, -0.05), 0.3, 0.85)) {
        let f = PiecewiseField::new(grid(&G2, &G2), b, 1.0).unwrap();
        let u = PiecewiseBV::new(grid(&G2, &G2), us, None).unwrap();
        let e = FinitePerimeterSet::polygon(v).unwrap();
        let r = gauss_green(&f, &u, &e, &q()).unwrap();
        let scale = 1.0 + r.lhs_interior.abs().max(r.lhs_closure.abs());
        prop_assert!(r.max_residual() <= 1e-8 * scale, "{:?}", r);
        prop_assert!(r.consistency().abs() <= 1e-8 * scale);
        let w = gauss_green_weakly_regular(&f, &u, &e, &q()).unwrap();
        prop_assert!(w.max_residual() <= 1e-8 * scale, "{:?}", w);
    }

    #[test]
    fn constant_fields_have_no_balance(ax in -1.0f64..1.0, ay in -1.0f64..1.0, cu in -1.0f64..1.0, v in convex_polygon(Vec2::ZERO, 0.3, 0.9)) {
        let f = PiecewiseField::t_independent(grid(&G2, &G2), vec![[c(ax), c(ay)]; 4], 1.0).unwrap();
        let u = PiecewiseBV::new(grid(&G2, &G2), vec![c(cu); 4], None).unwrap();
        let r = gauss_green(&f, &u, &FinitePerimeterSet::polygon(v).unwrap(), &q()).unwrap();
        for x in [r.lhs_interior, r.lhs_closure, r.rhs_interior, r.rhs_closure] {
            prop_assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn glued_divergence_matches_the_oracle(b in field_cells(), us in u_cells(), v in convex_polygon(Vec2::ZERO, 0.3, 0.7), cx in -0.3f64..0.3, cy in -0.3f64..0.3) {
        let f = PiecewiseField::new(grid(&G2, &G2), b, 1.0).unwrap();
        let u = PiecewiseBV::new(grid(&G2, &G2), us, None).unwrap();
        let set = FinitePerimeterSet::polygon(v).unwrap();
        let glued = glue(Some((&f, &u)), None, &set).unwrap();
        let phi = bump2(Vec2::new(cx, cy), 0.6);
        let a = glued.div.apply(&phi).unwrap();
        let w = weak_divergence(&glued.v, &phi, &q()).unwrap();
        prop_assert!((a - w).abs() <= 1e-6 * (1.0 + f.norm_b_inf() * phi.grad_sup_norm()), "{} {}", a, w);
    }
}
