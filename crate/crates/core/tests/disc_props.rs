use std::f64::consts::{FRAC_PI_2, PI};

use loewner_lab::disc::{DiscFunction, Membership};
use loewner_lab::C;
use proptest::prelude::*;

fn family(k: usize, alpha: f64) -> DiscFunction {
    match k {
        0 => DiscFunction::Moebius,
        1 => DiscFunction::starlike_order(alpha).unwrap(),
        2 => DiscFunction::almost_starlike(alpha).unwrap(),
        _ => DiscFunction::strongly_starlike(alpha).unwrap(),
    }
}

fn closed_form_d1(k: usize, alpha: f64) -> f64 {
    match k {
        0 => 1.0,
        1 if alpha <= 0.5 => 1.0,
        1 => (1.0 - alpha) / alpha,
        2 => 1.0 - alpha,
        _ => (alpha * FRAC_PI_2).sin(),
    }
}

fn grid_alpha() -> impl Strategy<Value = f64> {
    (1usize..=19).prop_map(|k| k as f64 * 0.05)
}

fn disc_point(max_r: f64) -> impl Strategy<Value = C> {
    (0.0..max_r, 0.0..2.0 * PI).prop_map(|(r, t)| C::from_polar(r, t))
}

#[test]
fn a0_dominates_d1_on_grid() {
    for k in 0..4 {
        for step in 1..=19 {
            let alpha = step as f64 * 0.05;
            let g = family(k, alpha);
            assert!(g.a0() >= g.d1().unwrap() - 1e-9, "{} alpha={alpha}", g.family_name());
        }
    }
}

#[test]
fn zero_order_starlike_is_moebius() {
    let g = DiscFunction::starlike_order(0.0).unwrap();
    for z in [C::new(0.3, 0.1), C::new(-0.7, 0.2), C::new(0.0, -0.95)] {
        let a = g.eval(z).unwrap();
        let b = DiscFunction::Moebius.eval(z).unwrap();
        assert!((a - b).norm() < 1e-15);
    }
    assert_eq!(g.d1().unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numeric_d1_matches_closed_form(k in 0usize..4, alpha in grid_alpha()) {
        let g = family(k, alpha);
        let numeric = g.to_custom().d1().unwrap();
        prop_assert!((numeric - closed_form_d1(k, alpha)).abs() < 1e-9);
        prop_assert!((g.d1().unwrap() - closed_form_d1(k, alpha)).abs() < 1e-15);
    }

    #[test]
    fn real_symmetry(k in 0usize..4, alpha in 0.05f64..0.95, z in disc_point(0.99)) {
        let g = family(k, alpha);
        let a = g.eval(z.conj()).unwrap();
        let b = g.eval(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        prop_assert!(g.is_real_symmetric());
    }

    #[test]
    fn image_points_are_inside(k in 0usize..4, alpha in 0.05f64..0.95, z in disc_point(1.0 - 1e-8)) {
        let g = family(k, alpha);
        let w = g.eval(z).unwrap();
        prop_assert_eq!(g.contains(w, 1e-9), Membership::Inside);
    }

    #[test]
    fn image_is_convex(
        k in 0usize..4,
        alpha in 0.05f64..0.95,
        pairs in prop::collection::vec((disc_point(0.999), disc_point(0.999), 0.0f64..1.0), 200),
    ) {
        let g = family(k, alpha);
        for (a, b, lam) in pairs {
            let w = g.eval(a).unwrap() * lam + g.eval(b).unwrap() * (1.0 - lam);
            prop_assert_ne!(g.contains(w, 1e-9), Membership::Outside);
        }
    }

    #[test]
    fn disc_of_radius_d1_around_one_is_inside(k in 0usize..4, alpha in 0.05f64..0.95, u in disc_point(1.0)) {
        let g = family(k, alpha);
        let w = 1.0 + u * g.d1().unwrap() * (1.0 - 1e-6);
        prop_assert_ne!(g.contains(w, 1e-9), Membership::Outside);
        prop_assert!(g.signed_distance(w) >= -1e-9);
    }
}
