use loewner_lab::carath::{
    certify_mg, mixed_pair, random_mg_member, second_coeff, shear, CoeffKind, HolMap, Polynomial,
    DEFAULT_EPS,
};
use loewner_lab::disc::DiscFunction;
use loewner_lab::geometry::BallGeometry;
use loewner_lab::{seeded_rng, CVec, C};
use proptest::prelude::*;
use rand::Rng;

const N_CERT: usize = 10_000;

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
        1 => BallGeometry::polydisc(3).unwrap(),
        2 => BallGeometry::spectral2(),
        _ => BallGeometry::euclidean(2).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_members_obey_coefficient_bounds(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..4,
        blocks in 1usize..4,
    ) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let mut rng = seeded_rng(seed);
        let h = random_mg_member(&g, &dom, &mut rng, blocks).unwrap();
        let cert = certify_mg(&h, &g, &dom, N_CERT, DEFAULT_EPS, &mut rng).unwrap();
        prop_assert!(cert.pass, "margin {}", cert.worst_margin);
        prop_assert!(cert.worst_margin >= -DEFAULT_EPS);
        let bound = dom.shear_factor() * g.d1().unwrap() + 1e-6;
        let gp = g.g_prime0().norm() + 1e-6;
        for (i, j) in dom.admissible_pairs() {
            let a = second_coeff(&h, i, j, CoeffKind::Pure).unwrap();
            prop_assert!(a.value.norm() <= bound, "({i},{j}): {} > {bound}", a.value.norm());
            let sheared = shear(&h, i, j).unwrap();
            prop_assert!(certify_mg(&sheared, &g, &dom, N_CERT, DEFAULT_EPS, &mut rng).unwrap().pass);
        }
        let frame = dom.frame_coords();
        for &i in &frame {
            prop_assert!(second_coeff(&h, i, i, CoeffKind::Pure).unwrap().value.norm() <= gp);
            for &j in &frame {
                if i != j {
                    let (m1, m2) = mixed_pair(&h, i, j).unwrap();
                    prop_assert!(m1.value.norm() <= gp && m2.value.norm() <= gp);
                }
            }
        }
    }

    #[test]
    fn convex_combinations_stay_certified(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..4,
        lam in 0.0f64..=1.0,
    ) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let mut rng = seeded_rng(seed);
        let a = random_mg_member(&g, &dom, &mut rng, 2).unwrap();
        let b = random_mg_member(&g, &dom, &mut rng, 3).unwrap();
        let mix = HolMap::convex_combination(&[(lam, a), (1.0 - lam, b)]).unwrap();
        prop_assert!(certify_mg(&mix, &g, &dom, N_CERT, DEFAULT_EPS, &mut rng).unwrap().pass);
    }

    #[test]
    fn polynomial_coefficients_are_exact(seed in any::<u64>(), dk in 0usize..4) {
        let dom = geometry(dk);
        let n = dom.dim();
        let mut rng = seeded_rng(seed);
        let mut p = Polynomial::identity(n);
        let mut draw = || C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut pure = vec![vec![C::new(0.0, 0.0); n]; n];
        let mut mixed = vec![vec![C::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                pure[i][j] = draw();
                p.push_square(n, i, j, pure[i][j]);
                if j != i {
                    let mut e = vec![0u32; n];
                    e[i] = 1;
                    e[j] = 1;
                    mixed[i][j] = draw();
                    p.push(i, e, mixed[i][j]);
                }
            }
            let mut cubic = vec![0u32; n];
            cubic[i] = 3;
            p.push(i, cubic, draw());
        }
        let f = HolMap::polynomial(dom, p, "random quadratic").unwrap();
        for i in 0..n {
            for j in 0..n {
                let a = second_coeff(&f, i, j, CoeffKind::Pure).unwrap();
                prop_assert!((a.value - pure[i][j]).norm() < 1e-10);
                if j != i {
                    let m = second_coeff(&f, i, j, CoeffKind::Mixed).unwrap();
                    prop_assert!((m.value - mixed[i][j]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn composite_coefficients_match_finite_differences(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..4,
    ) {
        let g = family(gk, alpha);
        let dom = geometry(dk);
        let mut rng = seeded_rng(seed);
        let h = random_mg_member(&g, &dom, &mut rng, 3).unwrap();
        let n = dom.dim();
        let step = 1e-4;
        for j in 0..n {
            let at = |s: f64| -> CVec {
                let mut z: CVec = dom.zero();
                z[j] = C::new(s, 0.0);
                h.eval_raw(&z)
            };
            let (fp, fm, f0) = (at(step), at(-step), at(0.0));
            for i in 0..n {
                let fd = (fp[i] + fm[i] - 2.0 * f0[i]) / (2.0 * step * step);
                let a = second_coeff(&h, i, j, CoeffKind::Pure).unwrap();
                prop_assert!((a.value - fd).norm() < 1e-6, "{} vs {}", a.value, fd);
            }
        }
    }
}
