//! Loewner ODE for piecewise-constant Herglotz fields, g-starlikeness and the
//! Loewner PDE residual, and the unbounded support map built from the
//! `b`-transform.

mod field;
mod flow;
mod koebe;

pub use field::{FieldRecord, FieldSegment, HerglotzField, SegmentRecord};
pub use flow::{
    flow, flow_with, limit_integrator_tol, parametric_map, FlowOptions, FlowResult, DEFAULT_FLOW_TOL,
    DEFAULT_LIMIT_TOL, LIMIT_CHECKPOINT, LIMIT_HORIZON,
};
pub use koebe::{growth_constant, koebe_transform, KoebeRatio, DEFAULT_QUAD_POINTS};

use rand::Rng;

use crate::carath::certify::certify_values;
use crate::carath::{CertifyOptions, Expr, HolMap, MgCertificate, ScalarFactor, DEFAULT_EPS};
use crate::disc::DiscFunction;
use crate::geometry::{BallGeometry, LinearFunctional};
use crate::numeric::{l2_norm, solve_linear};
use crate::{CVec, LabError, Result, C};

/// `h(z) = [DF(z)]^{-1} F(z)`, or `None` where `DF` is singular.
pub fn starlike_generator(f: &HolMap, z: &[C]) -> Option<CVec> {
    let jac = f.jacobian_raw(z);
    solve_linear(&jac, &f.eval_raw(z))
}

/// Certifies `[DF]^{-1} F in M_g` on `n` samples (g-starlikeness of `F`).
pub fn check_starlike_chain<R: Rng>(
    f: &HolMap,
    g: &DiscFunction,
    dom: &BallGeometry,
    n: usize,
    rng: &mut R,
) -> Result<MgCertificate> {
    check_starlike_chain_with(f, g, dom, &CertifyOptions::new(n, DEFAULT_EPS), rng)
}

pub fn check_starlike_chain_with<R: Rng>(
    f: &HolMap,
    g: &DiscFunction,
    dom: &BallGeometry,
    opts: &CertifyOptions,
    rng: &mut R,
) -> Result<MgCertificate> {
    if f.domain() != *dom {
        return Err(LabError::InvalidParameter("map and certificate domains differ".into()));
    }
    f.check_normalized()?;
    Ok(certify_values(|z| starlike_generator(f, z), g, dom, opts, rng))
}

/// Largest residual `|| df/dt - Df h ||` of the chain `f(z, t) = e^t F(z)`
/// against `field`, over `samples` points `z` in the ball of radius 0.9 and
/// times `t in [0, 1]`.
pub fn check_pde<R: Rng>(f: &HolMap, field: &HerglotzField, samples: usize, rng: &mut R) -> Result<f64> {
    let dom = f.domain();
    if field.domain() != dom {
        return Err(LabError::InvalidParameter("map and field domains differ".into()));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = dom.sample_ball(rng, 0.9);
        let t: f64 = rng.random::<f64>();
        let fz = f.eval_raw(&z);
        let jac = f.jacobian_raw(&z);
        let h = field.map_at(t).eval_raw(&z);
        let r: CVec = (0..z.len())
            .map(|i| {
                let dfh: C = jac[i].iter().zip(&h).map(|(a, b)| a * b).sum();
                (fz[i] - dfh) * t.exp()
            })
            .collect();
        worst = worst.max(l2_norm(&r));
    }
    Ok(worst)
}

/// `f(z) = (b(z_1) / z_1) z` for `g` real-symmetric with `g(r) = O(1 - r)`.
pub fn unbounded_support_map(g: &DiscFunction, dom: &BallGeometry) -> Result<HolMap> {
    if !g.is_real_symmetric() || !g.decays_linearly_at_one() {
        return Err(LabError::Precondition(format!(
            "{} violates the hypothesis g(r) = O(1 - r) as r -> 1-0 for a real-symmetric g",
            g.family_name()
        )));
    }
    let n = dom.dim();
    Ok(HolMap::composite(
        *dom,
        Expr::Factor {
            factor: ScalarFactor::KoebeRatio(KoebeRatio::new(g, DEFAULT_QUAD_POINTS)?),
            functional: LinearFunctional::coordinate(n, 0, C::new(1.0, 0.0)),
        },
        true,
        format!("f^e1[{}]", g.family_name()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carath::{canonical_field, factor_block, second_coeff, CoeffKind, Polynomial};
    use crate::numeric::max_abs_diff;
    use crate::seeded_rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn shear_map(dom: BallGeometry, coeff: f64) -> HolMap {
        let mut p = Polynomial::identity(dom.dim());
        p.push_square(dom.dim(), 0, 1, c(coeff, 0.0));
        HolMap::polynomial(dom, p, "F").unwrap()
    }

    #[test]
    fn starlike_chain_examples() {
        let d = BallGeometry::polydisc(2).unwrap();
        let g = DiscFunction::Moebius;
        let mut rng = seeded_rng(5);
        assert!(check_starlike_chain(&HolMap::identity(d), &g, &d, 200, &mut rng).unwrap().pass);
        assert!(check_starlike_chain(&shear_map(d, 1.0), &g, &d, 500, &mut rng).unwrap().pass);
        assert!(check_starlike_chain(&shear_map(d, -1.0), &g, &d, 500, &mut rng).unwrap().pass);
        let bad = check_starlike_chain(&shear_map(d, 2.0), &g, &d, 500, &mut rng).unwrap();
        assert!(!bad.pass);
        assert!(bad.witness.is_some());
    }

    #[test]
    fn generator_of_shear_map() {
        let d = BallGeometry::polydisc(2).unwrap();
        let z = [c(0.2, 0.1), c(-0.4, 0.3)];
        let h = starlike_generator(&shear_map(d, -0.7), &z).unwrap();
        assert!((h[0] - (z[0] + 0.7 * z[1] * z[1])).norm() < 1e-14);
    }

    #[test]
    fn pde_residuals() {
        let d = BallGeometry::polydisc(2).unwrap();
        let g = DiscFunction::Moebius;
        let mut rng = seeded_rng(8);
        let id_field = HerglotzField::autonomous(g.clone(), HolMap::identity(d)).unwrap();
        assert_eq!(check_pde(&HolMap::identity(d), &id_field, 50, &mut rng).unwrap(), 0.0);
        let field = HerglotzField::autonomous(g.clone(), canonical_field(&g, &d, 0, 1, 1).unwrap()).unwrap();
        let chain = shear_map(d, -1.0);
        assert!(check_pde(&chain, &field, 50, &mut rng).unwrap() < 1e-12);
        assert!(check_pde(&chain, &id_field, 50, &mut rng).unwrap() > 0.1);
    }

    #[test]
    fn unbounded_map_examples() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::euclidean(2).unwrap();
        let f = unbounded_support_map(&g, &d).unwrap();
        f.check_normalized().unwrap();
        let v = f.evaluate(&[c(0.99, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((d.norm(&v).unwrap() / 9900.0 - 1.0).abs() < 1e-10);
        let a = second_coeff(&f, 0, 0, CoeffKind::Pure).unwrap();
        assert!((a.value - c(2.0, 0.0)).norm() < 1e-9);
        assert!(unbounded_support_map(&DiscFunction::strongly_starlike(0.5).unwrap(), &d).is_err());
        assert!(unbounded_support_map(&DiscFunction::starlike_order(0.3).unwrap(), &d).is_ok());
    }

    #[test]
    fn parametric_map_of_factor_field_is_b_map() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::polydisc(2).unwrap();
        let h = factor_block(&g, &d, LinearFunctional::coordinate(2, 0, c(1.0, 0.0)));
        let field = HerglotzField::autonomous(g.clone(), h).unwrap();
        let f = unbounded_support_map(&g, &d).unwrap();
        for z in [[c(0.5, 0.2), c(-0.3, 0.4)], [c(-0.6, -0.3), c(0.1, 0.0)]] {
            let p = parametric_map(&field, &z, 1e-10).unwrap();
            assert!(p.converged);
            assert!(max_abs_diff(&p.endpoint, &f.eval_raw(&z)) < 1e-6);
        }
    }
}
