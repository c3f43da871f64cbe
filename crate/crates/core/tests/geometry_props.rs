use loewner_lab::geometry::{spectral_values, BallGeometry};
use loewner_lab::{seeded_rng, CVec, C};
use proptest::prelude::*;
use rand::Rng;

fn geometries() -> Vec<BallGeometry> {
    vec![
        BallGeometry::euclidean(2).unwrap(),
        BallGeometry::euclidean(3).unwrap(),
        BallGeometry::polydisc(2).unwrap(),
        BallGeometry::polydisc(3).unwrap(),
        BallGeometry::spectral2(),
    ]
}

fn random_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CVec {
    (0..n)
        .map(|_| C::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_axioms(seed in any::<u64>(), which in 0usize..5) {
        let dom = geometries()[which];
        let mut rng = seeded_rng(seed);
        for _ in 0..10_000 / 32 {
            let a = random_vec(&mut rng, dom.dim(), 2.0);
            let b = random_vec(&mut rng, dom.dim(), 2.0);
            let lam = C::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let sum: CVec = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let (na, nb) = (dom.norm(&a).unwrap(), dom.norm(&b).unwrap());
            prop_assert!(dom.norm(&sum).unwrap() <= (na + nb) * (1.0 + 1e-12));
            let scaled: CVec = a.iter().map(|x| x * lam).collect();
            prop_assert!((dom.norm(&scaled).unwrap() - lam.norm() * na).abs() <= 1e-12 * (1.0 + lam.norm() * na));
        }
    }

    #[test]
    fn support_functional_contract(seed in any::<u64>(), which in 0usize..5) {
        let dom = geometries()[which];
        let mut rng = seeded_rng(seed);
        let z = dom.sample_ball(&mut rng, 0.99);
        let nz = dom.norm(&z).unwrap();
        for l in dom.support_functionals(&z).unwrap() {
            prop_assert!((l.apply(&z) - nz).norm() < 1e-12);
            for _ in 0..1000 {
                let w = random_vec(&mut rng, dom.dim(), 1.0);
                prop_assert!(l.apply(&w).norm() <= dom.norm(&w).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn spectral_norm_is_variational_max(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let z = random_vec(&mut rng, 4, 1.0);
        let m = [[z[0], z[2]], [z[3], z[1]]];
        let unit = |rng: &mut loewner_lab::LabRng| {
            let v = random_vec(rng, 2, 1.0);
            let r = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / r, v[1] / r]
        };
        let mut best: f64 = 0.0;
        for _ in 0..1000 {
            let (u, v) = (unit(&mut rng), unit(&mut rng));
            let mut acc = C::new(0.0, 0.0);
            for r in 0..2 {
                for c in 0..2 {
                    acc += u[r].conj() * m[r][c] * v[c];
                }
            }
            best = best.max(acc.norm());
        }
        let s1 = spectral_values(&z).0;
        prop_assert!(best <= s1 * (1.0 + 1e-9));
        // right singular vector attains the maximum
        let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        let g11 = a.norm_sqr() + c.norm_sqr();
        let g22 = b.norm_sqr() + d.norm_sqr();
        let g12 = a.conj() * b + c.conj() * d;
        let v = if g12.norm() < 1e-300 {
            if g11 >= g22 { [C::new(1.0, 0.0), C::new(0.0, 0.0)] } else { [C::new(0.0, 0.0), C::new(1.0, 0.0)] }
        } else {
            let v = [g12, C::new(s1 * s1 - g11, 0.0)];
            let r = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / r, v[1] / r]
        };
        let mv = [a * v[0] + b * v[1], c * v[0] + d * v[1]];
        let attained = (mv[0].norm_sqr() + mv[1].norm_sqr()).sqrt();
        prop_assert!((attained - s1).abs() < 1e-9 * s1.max(1.0));
        prop_assert!((dom_norm(&z) - s1).abs() < 1e-15);
    }

    #[test]
    fn frame_coordinates_bounded_by_norm(seed in any::<u64>(), which in 0usize..5) {
        let dom = geometries()[which];
        let mut rng = seeded_rng(seed);
        for _ in 0..200 {
            let z = random_vec(&mut rng, dom.dim(), 1.0);
            let nz = dom.norm(&z).unwrap();
            for k in dom.frame_coords() {
                prop_assert!(z[k].norm() <= nz * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn samplers_respect_radius(seed in any::<u64>(), which in 0usize..5, radius in 0.01f64..1.0) {
        let dom = geometries()[which];
        let mut rng = seeded_rng(seed);
        prop_assert!((dom.norm(&dom.sample_sphere(&mut rng)).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((dom.norm(&dom.sample_edge(&mut rng)).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(dom.norm(&dom.sample_ball(&mut rng, radius)).unwrap() <= radius * (1.0 + 1e-12));
    }
}

fn dom_norm(z: &[C]) -> f64 {
    BallGeometry::spectral2().norm(z).unwrap()
}

#[test]
fn same_seed_same_samples() {
    for dom in geometries() {
        let a = dom.sample_ball(&mut seeded_rng(11), 0.7);
        let b = dom.sample_ball(&mut seeded_rng(11), 0.7);
        assert_eq!(a, b);
    }
}
