mod common;

use common::*;
use dmpair_core::bvfunc::CantorComponent;
use dmpair_core::mollify::{mollify_scalar, Mollifier};
use dmpair_core::geometry::{Dimension, PolygonalDomain};
use dmpair_core::{CantorSet, Error, Integrator, PiecewiseBV, Poly, Vec2};
use proptest::prelude::*;

fn chi_square() -> PiecewiseBV {
    let mut cells = vec![Poly::zero(); 9];
    cells[CENTER_CELL] = c(1.0);
    PiecewiseBV::new(square_grid(), cells, None).unwrap()
}

#[test]
fn approximate_limit_examples() {
    assert_eq!(heaviside().approximate_limits(Vec2::on_line(0.0)).unwrap(), (1.0, 0.0, Vec2::new(1.0, 0.0)));
    let (up, um, nu) = chi_square().approximate_limits(Vec2::new(0.5, 0.0)).unwrap();
    assert_eq!((up, um), (1.0, 0.0));
    assert_eq!(nu, Vec2::new(0.0, 1.0));
    let smooth = PiecewiseBV::new(line2(), vec![x(), x()], None).unwrap();
    assert!(!smooth.edge_in_jump_set(0));
    let (a, b, _) = smooth.approximate_limits(Vec2::on_line(0.0)).unwrap();
    assert_eq!(a, b);
    assert!(matches!(chi_square().approximate_limits(Vec2::new(0.0, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn derivative_part_examples() {
    let q = Integrator::default();
    let d = PolygonalDomain::line(-1.0, 2.0, &[0.0, 1.0]).unwrap();
    let chi = PiecewiseBV::new(d, vec![Poly::zero(), c(1.0), Poly::zero()], None).unwrap();
    let parts = chi.derivative_parts();
    let phi = bump1(0.4, 0.9);
    assert!(parts.absolutely_continuous.components[0].apply(&phi).unwrap().abs() < 1e-15);
    assert!(parts.cantor.components[0].is_zero());
    let jump = parts.jump.components[0].apply(&phi).unwrap();
    assert!((jump - (phi.eval(Vec2::on_line(0.0)) - phi.eval(Vec2::on_line(1.0)))).abs() < 1e-15);
    // against ⟨Du, φ⟩ = −∫u φ′
    let brute = -gauss1(|s| phi.gradient(Vec2::on_line(s)).x, 0.0, 1.0, 200);
    assert!((jump - brute).abs() < 1e-12);

    let lin = PiecewiseBV::new(PolygonalDomain::line(-1.0, 2.0, &[]).unwrap(), vec![x()], None).unwrap();
    let p = lin.derivative_parts();
    assert!(p.jump.components[0].is_zero() && p.cantor.components[0].is_zero());
    let mass = p.absolutely_continuous.components[0].mass(&q).unwrap();
    assert!((mass - 3.0).abs() < 1e-13);

    let cantor = PiecewiseBV::new(
        PolygonalDomain::line(-1.0, 2.0, &[]).unwrap(),
        vec![Poly::zero()],
        Some(CantorComponent { coefficient: 1.0, set: CantorSet::standard() }),
    )
    .unwrap();
    let p = cantor.derivative_parts();
    assert!(p.absolutely_continuous.components[0].is_zero() && p.jump.components[0].is_zero());
    assert!((p.cantor.components[0].mass(&q).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn precise_representative_examples() {
    assert_eq!(heaviside().precise_representative(Vec2::on_line(0.0)).unwrap(), 0.5);
    let smooth = PiecewiseBV::new(line2(), vec![x(), x()], None).unwrap();
    assert_eq!(smooth.precise_representative(Vec2::on_line(0.7)).unwrap(), 0.7);
    assert_eq!(chi_square().precise_representative(Vec2::new(1.0, 0.25)).unwrap(), 0.5);
    assert!(matches!(chi_square().precise_representative(Vec2::new(1.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn mollified_values_approach_precise_representative() {
    let u = PiecewiseBV::new(line2(), vec![x().add(&c(-0.3)), x().mul(&x()).add(&c(0.8))], None).unwrap();
    for p in [0.0, 0.35] {
        let x0 = Vec2::on_line(p);
        let star = u.precise_representative(x0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..8 {
            let eps = 0.5f64.powi(k);
            let m = Mollifier::new(Dimension::One, eps).unwrap();
            let err = (mollify_scalar(&u, &m, x0).unwrap() - star).abs();
            assert!(err < prev || err < 1e-13, "x={p} k={k} err={err}");
            prev = err;
            if p == 0.0 {
                // left slope 1, right slope 0: error is ε∫₀¹ρ(z)z dz + O(ε²)
                let bump = |z: f64| if z.abs() < 1.0 { (-1.0 / (1.0 - z * z)).exp() } else { 0.0 };
                let m1 = gauss1(|z| bump(z) * z, 0.0, 1.0, 200) / gauss1(bump, -1.0, 1.0, 400);
                assert!((err / eps - m1).abs() <= eps, "{} {m1}", err / eps);
            }
        }
        assert!(prev < 1e-4 || p == 0.0);
    }
}

fn cells(n: usize) -> impl Strategy<Value = Vec<Poly>> {
    prop::collection::vec(poly(2, 2, 0), n)
}

const G2: [f64; 3] = [-1.0, 0.0, 1.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distributional_derivative_1d(us in prop::collection::vec(poly(3, 0, 0), 3), cc in -0.4f64..0.4, r in 0.5f64..1.2, coef in -1.0f64..1.0) {
        let d = PolygonalDomain::line(-2.0, 2.0, &[-0.6, 0.5]).unwrap();
        let cantor = CantorComponent { coefficient: coef, set: CantorSet::new(-0.4, 0.3) };
        let u = PiecewiseBV::new(d, us, Some(cantor)).unwrap();
        let phi = bump1(cc, r);
        let q = Integrator::default();
        let got = u.derivative_parts().total().apply_component(0, &phi, &q).unwrap();
        let lo = (cc - r).max(-1.9);
        let hi = (cc + r).min(1.9);
        let mut br = vec![lo, hi];
        br.extend([-0.6, 0.5].into_iter().filter(|&z| z > lo && z < hi));
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // the staircase makes the integrand only Hölder-continuous; 4000 panels per piece
        let want = -gauss1_breaks(|s| u.value(Vec2::on_line(s)).unwrap() * phi.gradient(Vec2::on_line(s)).x, &br, 4000);
        prop_assert!(close(got, want, 1e-6), "{} {}", got, want);
    }

    #[test]
    fn distributional_derivative_2d(us in cells(4), cx in -0.3f64..0.3, cy in -0.3f64..0.3, k in 0usize..2) {
        let u = PiecewiseBV::new(grid(&G2, &G2), us, None).unwrap();
        let phi = bump2(Vec2::new(cx, cy), 0.6);
        let q = Integrator::default();
        let got = u.derivative_parts().total().apply_component(k, &phi, &q).unwrap();
        let want = -gauss2(|p| {
            let g = phi.gradient(p);
            u.eval_in(grid_cell(&G2, &G2, p), p) * if k == 0 { g.x } else { g.y }
        }, &G2, &G2, 24);
        prop_assert!(close(got, want, 1e-6), "{} {}", got, want);
    }

    #[test]
    fn variation_density_is_nonnegative(us in cells(4), cx in -0.3f64..0.3, cy in -0.3f64..0.3) {
        let u = PiecewiseBV::new(grid(&G2, &G2), us, None).unwrap();
        let var = u.variation();
        for part in var.ac_parts() {
            for (i, j) in [(0.1, 0.2), (-0.5, 0.7), (cx, cy)] {
                let p = Vec2::new(i, j);
                prop_assert!((part.density)(p) >= 0.0);
            }
        }
        for part in var.edge_parts() {
            let m = part.a.lerp(part.b, 0.5);
            prop_assert!((part.density)(m) >= 0.0);
        }
    }
}
