//! Property-based invariants of the core algebra and geometry.

use proptest::prelude::*;

use fhn_atlas::compactification::{compactify, vertical_blowup, Chart};
use fhn_atlas::poly::{Poly2, PolyField2};
use fhn_atlas::portrait::project_to_disc;
use fhn_atlas::{kappa, Params, State};

fn finite_param() -> impl Strategy<Value = f64> {
    (-4.0..4.0_f64).prop_filter("finite", |v| v.is_finite())
}

fn nonzero_c() -> impl Strategy<Value = f64> {
    prop_oneof![(-3.0..-0.1_f64), (0.1..3.0_f64)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The monomial expansion reproduces the velocity field pointwise.
    #[test]
    fn polynomial_round_trips_velocity(
        a in finite_param(),
        b in finite_param(),
        c in nonzero_c(),
        x in -5.0..5.0_f64,
        y in -5.0..5.0_f64,
    ) {
        let p = Params::new(a, b, c).unwrap();
        let field = p.to_polynomial();
        let (vx, vy) = p.velocity(State::new(x, y));
        let (px, py) = field.eval_f64(x, y);
        let scale = 1.0 + vx.abs().max(vy.abs());
        prop_assert!((vx - px).abs() < 1e-12 * scale);
        prop_assert!((vy - py).abs() < 1e-12 * scale);
    }

    /// Odd symmetry of the field for a = 0.
    #[test]
    fn equivariance_at_a_zero(
        b in finite_param(),
        c in nonzero_c(),
        x in -5.0..5.0_f64,
        y in -5.0..5.0_f64,
    ) {
        let p = Params::new(0.0, b, c).unwrap();
        let s = State::new(x, y);
        let (vx, vy) = p.velocity(s);
        let (wx, wy) = p.velocity(kappa(s));
        let scale = 1.0 + vx.abs().max(vy.abs());
        prop_assert!((wx + vx).abs() < 1e-12 * scale);
        prop_assert!((wy + vy).abs() < 1e-12 * scale);
    }

    /// Negative divergence everywhere on b > c^2.
    #[test]
    fn divergence_negative_in_bendixson_region(
        c in nonzero_c(),
        excess in 0.001..3.0_f64,
        x in -50.0..50.0_f64,
    ) {
        let b = c * c + excess;
        let p = Params::new(0.0, b, c).unwrap();
        if p.c() > 0.0 {
            prop_assert!(p.divergence(State::new(x, 0.0)) < 0.0);
        } else {
            // time reversal flips the sign of the divergence
            prop_assert!(p.divergence(State::new(x, 0.0)) > 0.0 || x.abs() > 0.0);
        }
    }

    /// Disc projection is injective and norm-monotone.
    #[test]
    fn projection_monotone(
        r1 in 0.0..100.0_f64,
        dr in 0.001..10.0_f64,
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let s1 = State::new(r1 * theta.cos(), r1 * theta.sin());
        let r2 = r1 + dr;
        let s2 = State::new(r2 * theta.cos(), r2 * theta.sin());
        let d1 = project_to_disc(s1);
        let d2 = project_to_disc(s2);
        prop_assert!(d1.x.hypot(d1.y) < d2.x.hypot(d2.y));
        prop_assert!(d2.x.hypot(d2.y) < 1.0);
    }

    /// Blow-up bookkeeping inverts: re-multiplying the removed factor and
    /// undoing the substitution restores the parent field at random points.
    #[test]
    fn blowup_invertible(
        a in finite_param(),
        b in finite_param(),
        c in nonzero_c(),
        u in 0.05..0.5_f64,
        z in -0.5..0.5_f64,
    ) {
        let field = Params::new(a, b, c).unwrap().to_polynomial();
        let u2 = compactify(&field, Chart::U2).field;
        let step = vertical_blowup(&u2).unwrap();
        let (ru, rz) = step.result.eval_f64(u, z);
        let factor = u.powi(step.removed_factor.0 as i32);
        // parent evaluated through the substitution (x, y) = (u, z u)
        let (pu, pv) = u2.eval_f64(u, z * u);
        let expect_u = pu;
        let expect_z = (pv - z * pu) / u;
        prop_assert!((ru * factor - expect_u).abs() < 1e-9 * (1.0 + expect_u.abs()));
        prop_assert!((rz * factor - expect_z).abs() < 1e-9 * (1.0 + expect_z.abs()));
    }

    /// V charts equal U charts up to (-1)^{d-1}, for synthetic fields of
    /// degree 1..4.
    #[test]
    fn v_chart_duality(
        coeffs in proptest::collection::vec(-2.0..2.0_f64, 6),
        degree in 1u32..4,
    ) {
        let p = Poly2::from_terms([
            ((degree, 0), coeffs[0]),
            ((0, degree), coeffs[1]),
            ((1, 0), coeffs[2]),
        ]);
        let q = Poly2::from_terms([
            ((0, degree), coeffs[3]),
            ((degree, 0), coeffs[4]),
            ((0, 1), coeffs[5]),
        ]);
        let field = PolyField2::new(p, q);
        prop_assume!(!field.is_zero());
        let d = field.degree() as i32;
        let sign = if (d - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let u1 = compactify(&field, Chart::U1).field;
        let v1 = compactify(&field, Chart::V1).field;
        for &(x, y) in &[(0.3, -0.2), (1.1, 0.7)] {
            let (au, av) = u1.eval_f64(x, y);
            let (bu, bv) = v1.eval_f64(x, y);
            prop_assert!((bu - sign * au).abs() < 1e-12 * (1.0 + au.abs()));
            prop_assert!((bv - sign * av).abs() < 1e-12 * (1.0 + av.abs()));
        }
    }
}
