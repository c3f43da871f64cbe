//! Explicit members of `M_g`: the canonical shear fields and random convex
//! combinations of the basic blocks.

use rand::Rng;

use super::holmap::{Expr, HolMap, Polynomial, ScalarFactor};
use crate::disc::DiscFunction;
use crate::geometry::{BallGeometry, LinearFunctional};
use crate::{LabError, Result, C};

/// Coefficient `sign * shear_factor * d1(g)` of the canonical field.
pub fn canonical_coefficient(g: &DiscFunction, dom: &BallGeometry, sign: i8) -> Result<f64> {
    if sign != 1 && sign != -1 {
        return Err(LabError::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
    }
    Ok(f64::from(sign) * dom.shear_factor() * g.d1()?)
}

/// `h(z) = z + sign * shear_factor * d1(g) * z_j^2 e_i`.
pub fn canonical_field(g: &DiscFunction, dom: &BallGeometry, i: usize, j: usize, sign: i8) -> Result<HolMap> {
    dom.check_pair(i, j)?;
    let c = canonical_coefficient(g, dom, sign)?;
    let n = dom.dim();
    let mut p = Polynomial::identity(n);
    p.push_square(n, i, j, C::new(c, 0.0));
    let s = if sign > 0 { '+' } else { '-' };
    HolMap::polynomial(*dom, p, format!("h[{i},{j}]{s}"))
}

/// `z -> g(l(z)) z`.
pub fn factor_block(g: &DiscFunction, dom: &BallGeometry, functional: LinearFunctional) -> HolMap {
    HolMap::composite(
        *dom,
        Expr::Factor {
            factor: ScalarFactor::Disc(g.clone()),
            functional,
        },
        true,
        "g(l(z))z",
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Identity,
    Factor,
    Canonical,
}

/// Random convex combination of `k` blocks drawn uniformly from identity,
/// `g(l_u(z)) z` for a random unit `u`, and canonical fields with random
/// admissible `(i, j)` and sign. Weights are uniform on the simplex.
pub fn random_mg_member<R: Rng + ?Sized>(g: &DiscFunction, dom: &BallGeometry, rng: &mut R, k: usize) -> Result<HolMap> {
    if k == 0 {
        return Err(LabError::InvalidParameter("random member needs k >= 1 blocks".into()));
    }
    let d1 = g.d1()?;
    let pairs = dom.admissible_pairs();
    let mut parts = Vec::with_capacity(k);
    let mut names = Vec::with_capacity(k);
    for _ in 0..k {
        let mut kind = match rng.random_range(0..3) {
            0 => Block::Identity,
            1 => Block::Factor,
            _ => Block::Canonical,
        };
        if kind == Block::Canonical && pairs.is_empty() {
            kind = Block::Identity;
        }
        let expr = match kind {
            Block::Identity => {
                names.push("id".to_string());
                Expr::Identity
            }
            Block::Factor => {
                let l = loop {
                    let u = dom.sample_sphere(rng);
                    if let Ok(mut ls) = dom.support_functionals(&u) {
                        break ls.swap_remove(0);
                    }
                };
                names.push("g(l_u)z".to_string());
                Expr::Factor {
                    factor: ScalarFactor::Disc(g.clone()),
                    functional: l,
                }
            }
            Block::Canonical => {
                let (i, j) = pairs[rng.random_range(0..pairs.len())];
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                names.push(format!("h[{i},{j}]{}", if sign > 0.0 { '+' } else { '-' }));
                Expr::Sum(vec![
                    Expr::Identity,
                    Expr::Square {
                        component: i,
                        var: j,
                        coeff: C::new(sign * dom.shear_factor() * d1, 0.0),
                    },
                ])
            }
        };
        parts.push(expr);
    }
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let label = weights
        .iter()
        .zip(&names)
        .map(|(w, s)| format!("{w:.3}*{s}"))
        .collect::<Vec<_>>()
        .join(" + ");
    let expr = if k == 1 {
        parts.pop().expect("one block")
    } else {
        Expr::Convex(weights.into_iter().zip(parts).collect())
    };
    Ok(HolMap::composite(*dom, expr, true, label))
}
