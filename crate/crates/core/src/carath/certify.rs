//! Sampling certificate for membership in `M_g`: for each sampled `z` and
//! each extreme support functional `l` at `z`, the value `l(h(z)) / |z|`
//! must lie in `g(U)`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::holmap::HolMap;
use crate::disc::{DiscFunction, Membership};
use crate::geometry::{BallGeometry, GeometryKind, LinearFunctional};
use crate::{CVec, LabError, Result, C};

/// Default relative tolerance handed to [`DiscFunction::contains`].
pub const DEFAULT_EPS: f64 = 1e-9;

/// Sampling plan of the certifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Random sphere samples.
    pub n_random: usize,
    pub eps: f64,
    /// Radii cycled over the random sphere samples.
    pub radii: Vec<f64>,
    /// Radii of the structured frame tori.
    pub torus_radii: Vec<f64>,
    /// Phases per axis on each torus.
    pub torus_phases: usize,
    /// Modulus splits per coordinate pair on the Euclidean ball (the
    /// maximizer of `|z_i| |z_j|^2` is always added).
    pub euclid_moduli: usize,
}

impl CertifyOptions {
    pub fn new(n_random: usize, eps: f64) -> Self {
        Self {
            n_random,
            eps,
            radii: vec![0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999],
            torus_radii: vec![0.9, 0.99, 0.999],
            torus_phases: 64,
            euclid_moduli: 16,
        }
    }

    /// Cheaper plan used when certifying many generated field pieces.
    pub fn light(n_random: usize) -> Self {
        Self {
            torus_phases: 16,
            euclid_moduli: 4,
            ..Self::new(n_random, DEFAULT_EPS)
        }
    }
}

/// Offending sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: CVec,
    pub functional: LinearFunctional,
    pub value: C,
    pub margin: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgCertificate {
    pub pass: bool,
    pub samples_used: usize,
    /// Minimum signed distance of `l(h(z)) / |z|` to the boundary of
    /// `g(U)`; negative means a violation.
    pub worst_margin: f64,
    /// Sample attaining `worst_margin`.
    pub worst_point: Option<CVec>,
    pub witness: Option<Witness>,
    pub indeterminate: usize,
    pub eps: f64,
}

struct Outcome {
    margin: f64,
    value: C,
    functional: LinearFunctional,
    verdict: Membership,
    singular: bool,
}

/// Builds the sample list: random sphere points scaled by cycling radii,
/// polydisc edge points, and the structured frame tori.
pub(crate) fn sample_points<R: Rng + ?Sized>(
    dom: &BallGeometry,
    opts: &CertifyOptions,
    rng: &mut R,
) -> Vec<(CVec, Vec<LinearFunctional>)> {
    let mut pts = Vec::new();
    let push = |z: CVec, pts: &mut Vec<(CVec, Vec<LinearFunctional>)>| -> bool {
        match dom.support_functionals(&z) {
            Ok(ls) => {
                pts.push((z, ls));
                true
            }
            Err(_) => false,
        }
    };
    let radii = if opts.radii.is_empty() { vec![0.9] } else { opts.radii.clone() };
    let mut k = 0;
    while k < opts.n_random {
        let r = radii[k % radii.len()];
        let z: CVec = dom.sample_sphere(rng).into_iter().map(|v| v * r).collect();
        // degenerate spectral points are redrawn
        if push(z, &mut pts) {
            k += 1;
        }
    }
    if dom.kind() == GeometryKind::Polydisc {
        for k in 0..opts.n_random / 10 {
            let r = radii[k % radii.len()];
            let z: CVec = dom.sample_edge(rng).into_iter().map(|v| v * r).collect();
            push(z, &mut pts);
        }
    }
    let m = opts.torus_phases.max(1);
    let phases: Vec<C> = (0..m)
        .map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
        .collect();
    let pairs: Vec<(usize, usize)> = match dom.kind() {
        GeometryKind::Euclidean => (0..dom.dim())
            .flat_map(|i| (i + 1..dom.dim()).map(move |j| (i, j)))
            .collect(),
        _ => {
            let f = dom.frame_coords();
            f.iter()
                .enumerate()
                .flat_map(|(a, &i)| f[a + 1..].iter().map(move |&j| (i, j)))
                .collect()
        }
    };
    let moduli: Vec<(f64, f64)> = match dom.kind() {
        GeometryKind::Euclidean => {
            let q = opts.euclid_moduli.max(1);
            let mut v: Vec<(f64, f64)> = (1..=q)
                .map(|k| {
                    let tau = 0.5 * PI * k as f64 / (q + 1) as f64;
                    (tau.cos(), tau.sin())
                })
                .collect();
            // maximizer of |z_i| |z_j|^2 on the sphere, in both orientations
            let (a, b) = (1.0 / 3f64.sqrt(), (2.0f64 / 3.0).sqrt());
            v.push((a, b));
            v.push((b, a));
            v
        }
        _ => vec![(1.0, 1.0)],
    };
    for &(i, j) in &pairs {
        for &rho in &opts.torus_radii {
            for &(mi, mj) in &moduli {
                for pa in &phases {
                    for pb in &phases {
                        let mut z = dom.zero();
                        z[i] = pa * (rho * mi);
                        z[j] = pb * (rho * mj);
                        push(z, &mut pts);
                    }
                }
            }
        }
    }
    pts
}

/// Runs the certifier on an arbitrary value map `z -> h(z)`. `None` values
/// (e.g. singular Jacobians) are failures with a witness.
pub(crate) fn certify_values<F>(
    hfn: F,
    g: &DiscFunction,
    dom: &BallGeometry,
    opts: &CertifyOptions,
    rng: &mut dyn rand::RngCore,
) -> MgCertificate
where
    F: Fn(&[C]) -> Option<CVec> + Sync,
{
    let pts = sample_points(dom, opts, rng);
    let outcomes: Vec<Outcome> = pts
        .par_iter()
        .map(|(z, ls)| {
            let nz = dom.norm_unchecked(z);
            let Some(hz) = hfn(z).filter(|v| v.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
            else {
                return Outcome {
                    margin: -f64::MAX,
                    value: C::new(f64::NAN, f64::NAN),
                    functional: ls[0].clone(),
                    verdict: Membership::Outside,
                    singular: true,
                };
            };
            let mut worst: Option<Outcome> = None;
            for l in ls {
                let w = l.apply(&hz) / nz;
                let margin = g.signed_distance(w);
                let verdict = g.contains(w, opts.eps);
                let replace = match &worst {
                    None => true,
                    Some(o) => {
                        (verdict == Membership::Outside && o.verdict != Membership::Outside)
                            || (verdict == o.verdict && margin < o.margin)
                            || (o.verdict == Membership::Inside
                                && verdict == Membership::Indeterminate)
                    }
                };
                if replace {
                    worst = Some(Outcome {
                        margin,
                        value: w,
                        functional: l.clone(),
                        verdict,
                        singular: false,
                    });
                }
            }
            worst.expect("support functional list is non-empty")
        })
        .collect();

    let mut cert = MgCertificate {
        pass: true,
        samples_used: pts.len(),
        worst_margin: f64::INFINITY,
        worst_point: None,
        witness: None,
        indeterminate: 0,
        eps: opts.eps,
    };
    let mut witness_margin = f64::INFINITY;
    for ((z, _), o) in pts.iter().zip(outcomes) {
        if o.verdict == Membership::Indeterminate {
            cert.indeterminate += 1;
        }
        if o.margin < cert.worst_margin {
            cert.worst_margin = o.margin;
            cert.worst_point = Some(z.clone());
        }
        if o.verdict == Membership::Outside {
            cert.pass = false;
            if o.margin < witness_margin {
                witness_margin = o.margin;
                cert.witness = Some(Witness {
                    z: z.clone(),
                    functional: o.functional,
                    value: o.value,
                    margin: o.margin,
                    reason: if o.singular {
                        "map value undefined (singular Jacobian)".into()
                    } else {
                        "value outside g(U)".into()
                    },
                });
            }
        }
    }
    cert
}

/// Certifies `h in M_g` on `n` random samples plus structured tori.
pub fn certify_mg<R: Rng>(
    h: &HolMap,
    g: &DiscFunction,
    dom: &BallGeometry,
    n: usize,
    eps: f64,
    rng: &mut R,
) -> Result<MgCertificate> {
    certify_mg_with(h, g, dom, &CertifyOptions::new(n, eps), rng)
}

pub fn certify_mg_with<R: Rng>(
    h: &HolMap,
    g: &DiscFunction,
    dom: &BallGeometry,
    opts: &CertifyOptions,
    rng: &mut R,
) -> Result<MgCertificate> {
    if h.domain() != *dom {
        return Err(LabError::InvalidParameter(
            "map and certificate domains differ".into(),
        ));
    }
    if !(opts.eps > 0.0) {
        return Err(LabError::InvalidParameter("certification needs eps > 0".into()));
    }
    h.check_normalized()?;
    Ok(certify_values(|z| Some(h.eval_raw(z)), g, dom, opts, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carath::holmap::Polynomial;
    use crate::seeded_rng;

    fn inflated(dom: BallGeometry, c: f64) -> HolMap {
        let mut p = Polynomial::identity(dom.dim());
        p.push_square(dom.dim(), 0, 1, C::new(c, 0.0));
        HolMap::polynomial(dom, p, "inflated").unwrap()
    }

    #[test]
    fn identity_passes_with_margin_d1() {
        let dom = BallGeometry::polydisc(2).unwrap();
        let g = DiscFunction::starlike_order(0.75).unwrap();
        let cert = certify_mg(&HolMap::identity(dom), &g, &dom, 500, DEFAULT_EPS, &mut seeded_rng(1)).unwrap();
        assert!(cert.pass);
        assert!((cert.worst_margin - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn inflated_map_fails_on_torus() {
        let dom = BallGeometry::polydisc(2).unwrap();
        let g = DiscFunction::Moebius;
        let cert = certify_mg(&inflated(dom, 1.1), &g, &dom, 500, DEFAULT_EPS, &mut seeded_rng(2)).unwrap();
        assert!(!cert.pass);
        let w = cert.witness.unwrap();
        assert!(w.margin < 0.0);
        assert!(w.value.re < 0.0);
    }

    #[test]
    fn unnormalized_map_is_rejected() {
        let dom = BallGeometry::polydisc(2).unwrap();
        let mut p = Polynomial::identity(2);
        p.push(0, vec![0, 0], C::new(0.1, 0.0));
        let h = HolMap::polynomial(dom, p, "shifted").unwrap();
        assert!(certify_mg(&h, &DiscFunction::Moebius, &dom, 10, DEFAULT_EPS, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn certificate_is_seed_reproducible() {
        let dom = BallGeometry::spectral2();
        let g = DiscFunction::strongly_starlike(0.5).unwrap();
        let h = inflated(dom, 0.6);
        let a = certify_mg(&h, &g, &dom, 300, DEFAULT_EPS, &mut seeded_rng(9)).unwrap();
        let b = certify_mg(&h, &g, &dom, 300, DEFAULT_EPS, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn certificate_serializes_witness() {
        let dom = BallGeometry::polydisc(2).unwrap();
        let cert = certify_mg(&inflated(dom, 1.2), &DiscFunction::Moebius, &dom, 100, DEFAULT_EPS, &mut seeded_rng(4)).unwrap();
        let json = serde_json::to_value(&cert).unwrap();
        assert_eq!(json["pass"], false);
        assert!(json["witness"]["z"].is_array());
    }
}
