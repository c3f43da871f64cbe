//! Second-order Taylor coefficients by discrete Cauchy integrals, and the
//! shearing operator built on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::holmap::{HolMap, Polynomial};
use crate::{CVec, LabError, Result, C};

/// Radius of the primary Cauchy circle.
pub const COEFF_RADIUS: f64 = 0.4;
/// Radius of the consistency circle.
pub const CHECK_RADIUS: f64 = 0.2;
/// Nodes on a coordinate circle for pure coefficients.
pub const PURE_NODES: usize = 64;
/// Nodes per axis on the 2-torus for mixed coefficients.
pub const MIXED_NODES: usize = 32;
/// Agreement between the two radii required for full precision.
pub const FULL_PRECISION: f64 = 1e-8;
/// Disagreement beyond which extraction is rejected.
pub const INSTABILITY: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    /// `(1/2) d^2 f_i / dz_j^2 (0)`.
    Pure,
    /// `d^2 f_i / dz_i dz_j (0)`.
    Mixed,
}

/// Coefficient estimate with the two-radius discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffEstimate {
    pub value: C,
    pub discrepancy: f64,
}

impl CoeffEstimate {
    pub fn reduced_precision(&self) -> bool {
        self.discrepancy > FULL_PRECISION
    }
}

fn check_index(f: &HolMap, i: usize) -> Result<()> {
    if i < f.dim() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!(
            "index {i} out of range for dimension {}",
            f.dim()
        )))
    }
}

/// Coefficient of `z_j^2` in every component, from the circle
/// `rho e^{i theta} e_j`.
pub(crate) fn pure_on_circle(f: &HolMap, j: usize, rho: f64, m: usize) -> CVec {
    let n = f.dim();
    let mut acc: CVec = smallvec::smallvec![C::new(0.0, 0.0); n];
    let mut z = f.domain().zero();
    for k in 0..m {
        let theta = 2.0 * PI * k as f64 / m as f64;
        z[j] = C::from_polar(rho, theta);
        let v = f.eval_raw(&z);
        let w = C::from_polar(rho.powi(-2), -2.0 * theta);
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x * w;
        }
    }
    acc.iter_mut().for_each(|a| *a /= m as f64);
    acc
}

/// Coefficient of `z_i z_j` in every component, from the torus
/// `rho (e^{i a} e_i + e^{i b} e_j)`.
pub(crate) fn mixed_on_torus(f: &HolMap, i: usize, j: usize, rho: f64, m: usize) -> CVec {
    let n = f.dim();
    let mut acc: CVec = smallvec::smallvec![C::new(0.0, 0.0); n];
    let mut z = f.domain().zero();
    for ka in 0..m {
        let a = 2.0 * PI * ka as f64 / m as f64;
        z[i] = C::from_polar(rho, a);
        for kb in 0..m {
            let b = 2.0 * PI * kb as f64 / m as f64;
            z[j] = C::from_polar(rho, b);
            let v = f.eval_raw(&z);
            let w = C::from_polar(rho.powi(-2), -(a + b));
            for (s, x) in acc.iter_mut().zip(v) {
                *s += x * w;
            }
        }
    }
    let mm = (m * m) as f64;
    acc.iter_mut().for_each(|s| *s /= mm);
    acc
}

fn dual_radius<F: Fn(f64) -> CVec>(extract: F, comps: &[usize]) -> Result<Vec<CoeffEstimate>> {
    let main = extract(COEFF_RADIUS);
    let check = extract(CHECK_RADIUS);
    comps
        .iter()
        .map(|&c| {
            let value = main[c];
            let discrepancy = (value - check[c]).norm();
            if !(discrepancy <= INSTABILITY) {
                Err(LabError::NumericalInstability(format!(
                    "coefficient extraction radii disagree by {discrepancy:e} in component {c}"
                )))
            } else {
                Ok(CoeffEstimate { value, discrepancy })
            }
        })
        .collect()
}

/// Second-order coefficient of `f_i`: the `z_j^2` coefficient (`Pure`,
/// which equals `(1/2) d^2 f_i / dz_j^2 (0)`) or the `z_i z_j` coefficient
/// (`Mixed`, equal to `d^2 f_i / dz_i dz_j (0)`).
pub fn second_coeff(f: &HolMap, i: usize, j: usize, kind: CoeffKind) -> Result<CoeffEstimate> {
    check_index(f, i)?;
    check_index(f, j)?;
    match kind {
        CoeffKind::Pure => {
            Ok(dual_radius(|rho| pure_on_circle(f, j, rho, PURE_NODES), &[i])?[0])
        }
        CoeffKind::Mixed => {
            if i == j {
                return Err(LabError::InvalidParameter(
                    "mixed coefficient needs i != j".into(),
                ));
            }
            Ok(dual_radius(|rho| mixed_on_torus(f, i, j, rho, MIXED_NODES), &[i])?[0])
        }
    }
}

/// Mixed coefficients of `f_i` and `f_j` at `z_i z_j` from one torus pass:
/// `(d^2 f_i / dz_i dz_j (0), d^2 f_j / dz_i dz_j (0))`.
pub fn mixed_pair(f: &HolMap, i: usize, j: usize) -> Result<(CoeffEstimate, CoeffEstimate)> {
    check_index(f, i)?;
    check_index(f, j)?;
    if i == j {
        return Err(LabError::InvalidParameter("mixed coefficient needs i != j".into()));
    }
    let v = dual_radius(|rho| mixed_on_torus(f, i, j, rho, MIXED_NODES), &[i, j])?;
    Ok((v[0], v[1]))
}

/// Shearing `h -> Dh(0) z + (1/2) d^2 h_i / dz_j^2 (0) z_j^2 e_i`.
pub fn shear(h: &HolMap, i: usize, j: usize) -> Result<HolMap> {
    let dom = h.domain();
    dom.check_pair(i, j)?;
    let zero = dom.zero();
    let h0 = h.eval_raw(&zero);
    let h0n = h0.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if h0n >= 1e-12 {
        return Err(LabError::Precondition(format!(
            "shearing needs h(0) = 0, got |h(0)| = {h0n:e}"
        )));
    }
    let n = dom.dim();
    let mut poly = if h.is_normalized() {
        Polynomial::identity(n)
    } else {
        let jac = h.jacobian_raw(&zero);
        let mut p = Polynomial { terms: vec![] };
        for (r, row) in jac.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if *v != C::new(0.0, 0.0) {
                    let mut e = vec![0; n];
                    e[k] = 1;
                    p.push(r, e, *v);
                }
            }
        }
        p
    };
    let c = second_coeff(h, i, j, CoeffKind::Pure)?.value;
    poly.push_square(n, i, j, c);
    HolMap::polynomial(dom, poly, format!("shear[{i},{j}]({})", h.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carath::holmap::{Expr, ScalarFactor};
    use crate::disc::DiscFunction;
    use crate::geometry::{BallGeometry, LinearFunctional};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn g_z2_z(dom: BallGeometry) -> HolMap {
        HolMap::composite(
            dom,
            Expr::Factor {
                factor: ScalarFactor::Disc(DiscFunction::Moebius),
                functional: LinearFunctional::coordinate(dom.dim(), 1, c(1.0, 0.0)),
            },
            true,
            "g(z2)z",
        )
    }

    #[test]
    fn polynomial_coefficients_are_exact() {
        let d = BallGeometry::polydisc(3).unwrap();
        let mut p = Polynomial::identity(3);
        p.push_square(3, 0, 1, c(0.7, -0.2));
        p.push(2, vec![1, 0, 1], c(-0.4, 0.3));
        p.push(2, vec![0, 3, 0], c(0.9, 0.0));
        let f = HolMap::polynomial(d, p, "poly").unwrap();
        let pure = second_coeff(&f, 0, 1, CoeffKind::Pure).unwrap();
        assert!((pure.value - c(0.7, -0.2)).norm() < 1e-10);
        assert!(!pure.reduced_precision());
        let mixed = second_coeff(&f, 2, 0, CoeffKind::Mixed).unwrap();
        assert!((mixed.value - c(-0.4, 0.3)).norm() < 1e-10);
        let zero = second_coeff(&HolMap::identity(d), 0, 1, CoeffKind::Pure).unwrap();
        assert!(zero.value.norm() < 1e-14);
    }

    #[test]
    fn mixed_coefficient_of_factor_block_is_g_prime0() {
        let d = BallGeometry::polydisc(2).unwrap();
        let h = g_z2_z(d);
        let m = second_coeff(&h, 0, 1, CoeffKind::Mixed).unwrap();
        assert!((m.value - c(-2.0, 0.0)).norm() < 1e-10);
        let (a, b) = mixed_pair(&h, 0, 1).unwrap();
        assert_eq!(a.value, m.value);
        // h_2 = g(z2) z2 has no z1 z2 term
        assert!(b.value.norm() < 1e-12);
    }

    #[test]
    fn mixed_needs_distinct_indices() {
        let d = BallGeometry::polydisc(2).unwrap();
        assert!(second_coeff(&HolMap::identity(d), 0, 0, CoeffKind::Mixed).is_err());
        assert!(second_coeff(&HolMap::identity(d), 0, 5, CoeffKind::Pure).is_err());
    }

    #[test]
    fn shear_examples() {
        let d = BallGeometry::polydisc(2).unwrap();
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let sid = shear(&HolMap::identity(d), 0, 1).unwrap();
        assert!(crate::numeric::max_abs_diff(&sid.eval_raw(&z), &z) < 1e-14);

        let mut p = Polynomial::identity(2);
        p.push_square(2, 0, 1, c(1.0, 0.0));
        let h12 = HolMap::polynomial(d, p, "h12").unwrap();
        let s = shear(&h12, 0, 1).unwrap();
        assert!(crate::numeric::max_abs_diff(&s.eval_raw(&z), &h12.eval_raw(&z)) < 1e-12);

        let s = shear(&g_z2_z(d), 0, 1).unwrap();
        assert!(crate::numeric::max_abs_diff(&s.eval_raw(&z), &z) < 1e-12);
    }

    #[test]
    fn shear_rejects_non_frame_pairs() {
        let d = BallGeometry::spectral2();
        assert!(shear(&HolMap::identity(d), 0, 2).is_err());
        assert!(shear(&HolMap::identity(d), 1, 1).is_err());
    }

    #[test]
    fn shear_keeps_nonidentity_linear_part() {
        let d = BallGeometry::polydisc(2).unwrap();
        let mut p = Polynomial { terms: vec![] };
        p.push(0, vec![1, 0], c(2.0, 0.0));
        p.push(0, vec![0, 1], c(0.5, 0.0));
        p.push(1, vec![0, 1], c(1.0, 0.0));
        p.push(0, vec![0, 2], c(0.25, 0.0));
        p.push(0, vec![1, 1], c(0.5, 0.0));
        let h = HolMap::polynomial(d, p, "lin").unwrap();
        assert!(!h.is_normalized());
        let s = shear(&h, 0, 1).unwrap();
        let z = [c(0.1, 0.2), c(0.3, -0.1)];
        let expect0 = 2.0 * z[0] + 0.5 * z[1] + 0.25 * z[1] * z[1];
        let v = s.eval_raw(&z);
        assert!((v[0] - expect0).norm() < 1e-12);
        assert!((v[1] - z[1]).norm() < 1e-12);
    }
}
