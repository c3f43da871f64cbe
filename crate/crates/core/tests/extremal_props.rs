use loewner_lab::carath::canonical_field;
use loewner_lab::disc::DiscFunction;
use loewner_lab::extremal::{functional_l, scan_support, verify_gprime_bounds};
use loewner_lab::geometry::BallGeometry;
use loewner_lab::seeded_rng;
use proptest::prelude::*;

fn family(k: usize, alpha: f64) -> DiscFunction {
    match k {
        0 => DiscFunction::Moebius,
        1 => DiscFunction::starlike_order(alpha).unwrap(),
        2 => DiscFunction::almost_starlike(alpha).unwrap(),
        _ => DiscFunction::strongly_starlike(alpha).unwrap(),
    }
}

fn geometry(k: usize) -> BallGeometry {
    match k {
        0 => BallGeometry::polydisc(2).unwrap(),
        1 => BallGeometry::spectral2(),
        2 => BallGeometry::polydisc(3).unwrap(),
        _ => BallGeometry::euclidean(2).unwrap(),
    }
}

#[test]
fn starlike_order_bound_follows_d1_kink() {
    let dom = BallGeometry::polydisc(2).unwrap();
    for step in 1..=19 {
        let alpha = step as f64 * 0.05;
        let g = DiscFunction::starlike_order(alpha).unwrap();
        let report = scan_support(&g, &dom, 0, 1, 1, &mut seeded_rng(step)).unwrap();
        let expected = if alpha <= 0.5 { 1.0 } else { (1.0 - alpha) / alpha };
        assert!((report.theoretical_bound - expected).abs() < 1e-12, "alpha={alpha}");
        assert!(report.pass(), "alpha={alpha}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn small_scans_find_no_violations(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..4,
    ) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let (i, j) = dom.admissible_pairs()[0];
        let report = scan_support(&g, &dom, i, j, 6, &mut seeded_rng(seed)).unwrap();
        prop_assert!(report.violations.is_empty());
        prop_assert!(report.empirical_max <= report.theoretical_bound + report.tolerance);
        prop_assert!(report.attained);
    }

    #[test]
    fn canonical_maps_attain_with_both_signs(gk in 0usize..4, alpha in 0.05f64..0.95, dk in 0usize..4) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let bound = dom.shear_factor() * g.d1().unwrap();
        for (i, j) in dom.admissible_pairs() {
            let plus = functional_l(i, j, &canonical_field(&g, &dom, i, j, 1).unwrap()).unwrap();
            let minus = functional_l(i, j, &canonical_field(&g, &dom, i, j, -1).unwrap()).unwrap();
            prop_assert!((plus.re - bound).abs() < 1e-8);
            prop_assert!((plus.norm() - minus.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn gprime_scans_stay_below_bound(seed in any::<u64>(), gk in 0usize..4, alpha in 0.05f64..0.95, dk in 0usize..3) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let report = verify_gprime_bounds(&g, &dom, 3, &mut seeded_rng(seed)).unwrap();
        prop_assert!(report.violations.is_empty());
        prop_assert!((report.theoretical_bound - g.g_prime0().norm()).abs() < 1e-12);
    }
}
