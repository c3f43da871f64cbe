use std::f64::consts::PI;
use std::sync::Arc;

use loewner_lab::carath::canonical_field;
use loewner_lab::disc::DiscFunction;
use loewner_lab::extremal::{limit_map, random_field, Sg0Options};
use loewner_lab::geometry::BallGeometry;
use loewner_lab::loewner::{flow, flow_with, FlowOptions, HerglotzField, KoebeRatio};
use loewner_lab::{seeded_rng, CVec, C};
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
        _ => BallGeometry::euclidean(2).unwrap(),
    }
}

fn field(seed: u64, gk: usize, alpha: f64, dk: usize, pieces: usize) -> (HerglotzField, loewner_lab::LabRng) {
    let mut rng = seeded_rng(seed);
    let f = random_field(&family(gk, alpha), &geometry(dk), &mut rng, pieces, &Sg0Options::default()).unwrap();
    (f, rng)
}

/// `b'(zeta)` as a Cauchy integral on a circle of radius `r` around `zeta`.
fn cauchy_derivative(k: &KoebeRatio, zeta: C, r: f64) -> C {
    const M: usize = 64;
    (0..M)
        .map(|m| {
            let e = C::from_polar(1.0, 2.0 * PI * m as f64 / M as f64);
            k.b(zeta + e * r) / e
        })
        .sum::<C>()
        / (M as f64 * r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norm_decreases_along_trajectories(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..3,
        pieces in 1usize..4,
    ) {
        let (f, mut rng) = field(seed, gk, alpha, dk, pieces);
        let dom = f.domain();
        let z = dom.sample_ball(&mut rng, 0.95);
        let opts = FlowOptions { tol: 1e-10, record_trajectory: true };
        let r = flow_with(&f, &z, 0.0, 4.0, &opts).unwrap();
        let norms: Vec<f64> = r.trajectory.unwrap().iter().map(|(_, v)| dom.norm(v).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] < w[0], "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn flow_linearizes_to_scalar_at_origin(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..3,
        s in 0.0f64..1.5,
        dt in 0.1f64..3.0,
    ) {
        let (f, _) = field(seed, gk, alpha, dk, 3);
        let dom = f.domain();
        let n = dom.dim();
        let delta = 1e-5;
        let expected = (-dt).exp();
        for k in 0..n {
            let e: CVec = dom.basis(k);
            let plus: CVec = e.iter().map(|x| x * delta).collect();
            let minus: CVec = e.iter().map(|x| x * -delta).collect();
            let vp = flow(&f, &plus, s, s + dt, 1e-12).unwrap().endpoint;
            let vm = flow(&f, &minus, s, s + dt, 1e-12).unwrap().endpoint;
            for m in 0..n {
                let d = (vp[m] - vm[m]) / (2.0 * delta);
                let target = if m == k { expected } else { 0.0 };
                prop_assert!((d - target).norm() < 1e-8, "D[{m},{k}] = {d}, expected {target}");
            }
        }
    }

    #[test]
    fn parametric_maps_are_normalized(
        seed in any::<u64>(),
        gk in 0usize..4,
        alpha in 0.05f64..0.95,
        dk in 0usize..3,
    ) {
        let (f, _) = field(seed, gk, alpha, dk, 2);
        let dom = f.domain();
        let lim = limit_map(Arc::new(f), 1e-10, "lim");
        let zero = dom.zero();
        prop_assert!(lim.eval_raw(&zero).iter().all(|v| v.norm() == 0.0));
        let jac = lim.jacobian(&zero).unwrap();
        for (r, row) in jac.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let target = if r == c { 1.0 } else { 0.0 };
                prop_assert!((v - target).norm() < 1e-7, "J[{r},{c}] = {v}");
            }
        }
    }

    #[test]
    fn koebe_log_derivative_residual(gk in 0usize..4, alpha in 0.05f64..0.95, r in 0.05f64..0.9, ray in 0usize..16) {
        let g = family(gk, alpha);
        let k = KoebeRatio::new(&g, 64).unwrap();
        let zeta = C::from_polar(r, 2.0 * PI * ray as f64 / 16.0);
        let rad = 0.5 * (1.0 - r).min(0.1);
        let d1 = cauchy_derivative(&k, zeta, rad);
        let d2 = cauchy_derivative(&k, zeta, rad / 2.0);
        let scale = d1.norm().max(1.0);
        prop_assert!((d1 - d2).norm() < 1e-8 * scale);
        let residual = zeta * d1 / k.b(zeta) - 1.0 / g.eval(zeta).unwrap();
        prop_assert!(residual.norm() < 1e-8, "residual {}", residual.norm());
    }
}

#[test]
fn tighter_tolerance_shrinks_error() {
    let g = DiscFunction::Moebius;
    let dom = BallGeometry::polydisc(2).unwrap();
    let f = HerglotzField::autonomous(g.clone(), canonical_field(&g, &dom, 0, 1, 1).unwrap()).unwrap();
    let z = [C::new(0.5, 0.3), C::new(-0.6, 0.7)];
    let exact = |t: f64| {
        let e = (-t).exp();
        [e * (z[0] + z[1] * z[1] * (e - 1.0)), e * z[1]]
    };
    let error = |tol: f64| {
        let v = flow(&f, &z, 0.0, 5.0, tol).unwrap().endpoint;
        let w = exact(5.0);
        (v[0] - w[0]).norm().max((v[1] - w[1]).norm())
    };
    let coarse = error(1e-4);
    let fine = error(1e-7);
    assert!(coarse < 1e-4 * 10.0, "coarse {coarse}");
    assert!(fine < coarse / 10.0, "coarse {coarse}, fine {fine}");
}
