//! Coefficient functionals on maps with g-parametric representation, the
//! sampler for `S_g^0`, and the bound and support-point scans.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carath::{
    canonical_coefficient, canonical_field, factor_block, mixed_pair, random_mg_member, second_coeff, shear,
    BlackBox, CertifyOptions, CoeffKind, HolMap, Polynomial,
};
use crate::disc::DiscFunction;
use crate::geometry::{BallGeometry, GeometryKind, LinearFunctional};
use crate::loewner::{parametric_map, HerglotzField};
use crate::numeric::max_abs_diff;
use crate::{seeded_rng, CVec, LabError, Result, C};

/// Default tolerance of bound checks.
pub const BOUND_TOL: f64 = 1e-6;
/// Required agreement of the canonical map with the bound.
pub const ATTAIN_TOL: f64 = 1e-8;
/// Spacing of the breakpoints of sampled fields.
pub const PIECE_LENGTH: f64 = 0.5;
/// Seed of the evaluation points in [`verify_shear_commutes`].
pub const SHEAR_COMMUTE_SEED: u64 = 0x5eed_0041;

/// `L_{i,j}(f) = (1/2) d^2 f_i / dz_j^2 (0)`.
pub fn functional_l(i: usize, j: usize, f: &HolMap) -> Result<C> {
    if i == j {
        return Err(LabError::InvalidParameter("L_{i,j} needs i != j".into()));
    }
    Ok(second_coeff(f, i, j, CoeffKind::Pure)?.value)
}

/// Knobs of the `S_g^0` sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sg0Options {
    /// Maximum number of blocks in each random `M_g` member.
    pub max_blocks: usize,
    pub certify: CertifyOptions,
    pub limit_tol: f64,
    pub max_retries: usize,
}

impl Default for Sg0Options {
    fn default() -> Self {
        Self {
            max_blocks: 3,
            certify: CertifyOptions::light(500),
            limit_tol: 1e-10,
            max_retries: 5,
        }
    }
}

/// A sampled map together with the field that generated it.
#[derive(Debug, Clone)]
pub struct Sg0Sample {
    pub map: HolMap,
    pub field: Arc<HerglotzField>,
}

/// Certified field with `pieces` random segments starting at
/// `0, 0.5, 1, ...`.
pub fn random_field<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    rng: &mut R,
    pieces: usize,
    opts: &Sg0Options,
) -> Result<HerglotzField> {
    if pieces == 0 {
        return Err(LabError::InvalidParameter("a field needs at least one piece".into()));
    }
    let schedule = (0..pieces)
        .map(|k| {
            let blocks = rng.random_range(1..=opts.max_blocks.max(1));
            Ok((PIECE_LENGTH * k as f64, random_mg_member(g, dom, rng, blocks)?))
        })
        .collect::<Result<Vec<_>>>()?;
    HerglotzField::certified(g.clone(), *dom, schedule, &opts.certify, rng)
}

/// Black-box map `z -> lim e^t v(z, t)`; failed limits evaluate to NaN.
pub fn limit_map(field: Arc<HerglotzField>, tol: f64, tag: impl Into<String>) -> HolMap {
    let dom = field.domain();
    let f = Arc::clone(&field);
    let bb = BlackBox::new(tag, move |z: &[C]| match parametric_map(&f, z, tol) {
        Ok(r) => r.endpoint,
        Err(_) => z.iter().map(|_| C::new(f64::NAN, f64::NAN)).collect(),
    });
    HolMap::black_box(dom, bb, true)
}

fn limit_converges(field: &HerglotzField, tol: f64) -> bool {
    let dom = field.domain();
    (0..dom.dim()).all(|k| {
        let z: CVec = dom.basis(k).into_iter().map(|v| v * 0.4).collect();
        parametric_map(field, &z, tol).is_ok_and(|r| r.converged)
    })
}

/// One map of `S_g^0`.
pub fn sample_sg0<R: Rng>(g: &DiscFunction, dom: &BallGeometry, rng: &mut R, pieces: usize) -> Result<Sg0Sample> {
    sample_sg0_with(g, dom, rng, pieces, &Sg0Options::default())
}

pub fn sample_sg0_with<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    rng: &mut R,
    pieces: usize,
    opts: &Sg0Options,
) -> Result<Sg0Sample> {
    for _ in 0..=opts.max_retries {
        let field = random_field(g, dom, rng, pieces, opts)?;
        if !limit_converges(&field, opts.limit_tol) {
            continue;
        }
        let label = field
            .segments()
            .iter()
            .map(|s| format!("[{}] {}", s.start, s.map.label()))
            .collect::<Vec<_>>()
            .join("; ");
        let field = Arc::new(field);
        let map = limit_map(Arc::clone(&field), opts.limit_tol, format!("sg0{{{label}}}"));
        return Ok(Sg0Sample { map, field });
    }
    Err(LabError::NumericalInstability(format!(
        "parametric limit failed to converge in {} attempts",
        opts.max_retries + 1
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `L_{i,j}`.
    Pure,
    /// All diagonal `(1/2) d^2 f_i / dz_i^2 (0)` and mixed
    /// `d^2 f_i / dz_i dz_j (0)` coefficients.
    DiagonalAndMixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalId {
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub kind: FunctionalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub map: String,
    pub coefficient: String,
    pub value: f64,
}

/// Value of the functional on a named candidate map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateValue {
    pub map: String,
    pub coefficient: String,
    pub value: C,
    pub expected: Option<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub functional_id: FunctionalId,
    pub theoretical_bound: f64,
    pub empirical_max: f64,
    pub attaining_map_id: String,
    pub n_samples: usize,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
    /// Whether the extremal candidates reach the bound.
    pub attained: bool,
    pub candidates: Vec<CandidateValue>,
    /// Largest modulus among the random samples only.
    pub sample_max: f64,
    pub note: String,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.attained
    }
}

fn draw_samples<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    n: usize,
    rng: &mut R,
    opts: &Sg0Options,
) -> Result<Vec<Sg0Sample>> {
    (0..n)
        .map(|_| {
            let pieces = rng.random_range(1..=3);
            sample_sg0_with(g, dom, rng, pieces, opts)
        })
        .collect()
}

fn note(n: usize) -> String {
    format!("no counterexample among {n} samples is evidence, not proof")
}

/// Scans `Re L_{i,j}` over `n` samples of `S_g^0` plus the canonical
/// candidates: `F_{i,j}[g]` with both signs, the identity and the
/// parametric limit of the canonical field `h_{i,j}[g]` with minus sign.
pub fn scan_support<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    i: usize,
    j: usize,
    n: usize,
    rng: &mut R,
) -> Result<BoundReport> {
    scan_support_with(g, dom, i, j, n, rng, &Sg0Options::default())
}

pub fn scan_support_with<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    i: usize,
    j: usize,
    n: usize,
    rng: &mut R,
    opts: &Sg0Options,
) -> Result<BoundReport> {
    dom.check_pair(i, j)?;
    let bound = dom.shear_factor() * g.d1()?;
    let coeff_name = format!("L[{i},{j}]");

    let f_plus = canonical_field(g, dom, i, j, 1)?.with_label(format!("F[{i},{j}]+"));
    let f_minus = canonical_field(g, dom, i, j, -1)?.with_label(format!("F[{i},{j}]-"));
    let h_minus = canonical_field(g, dom, i, j, -1)?;
    let chain = limit_map(
        Arc::new(HerglotzField::autonomous(g.clone(), h_minus)?),
        opts.limit_tol,
        format!("lim h[{i},{j}]-"),
    );
    let c = canonical_coefficient(g, dom, 1)?;
    let candidates = vec![
        (f_plus, Some(C::new(c, 0.0))),
        (f_minus, Some(C::new(-c, 0.0))),
        (HolMap::identity(*dom), Some(C::new(0.0, 0.0))),
        (chain, Some(C::new(c, 0.0))),
    ];
    let samples = draw_samples(g, dom, n, rng, opts)?;

    let cand_values = candidates
        .par_iter()
        .map(|(m, _)| functional_l(i, j, m))
        .collect::<Vec<_>>();
    let sample_values = samples
        .par_iter()
        .map(|s| functional_l(i, j, &s.map))
        .collect::<Vec<_>>();

    let mut report = BoundReport {
        functional_id: FunctionalId {
            i: Some(i),
            j: Some(j),
            kind: FunctionalKind::Pure,
        },
        theoretical_bound: bound,
        empirical_max: f64::NEG_INFINITY,
        attaining_map_id: String::new(),
        n_samples: n,
        violations: Vec::new(),
        tolerance: BOUND_TOL,
        attained: true,
        candidates: Vec::new(),
        sample_max: 0.0,
        note: note(n),
    };
    let consider = |label: &str, v: C, report: &mut BoundReport| {
        if v.re > report.empirical_max {
            report.empirical_max = v.re;
            report.attaining_map_id = label.to_string();
        }
        if !(v.norm() <= bound + BOUND_TOL) {
            report.violations.push(Violation {
                map: label.to_string(),
                coefficient: coeff_name.clone(),
                value: v.norm(),
            });
        }
    };
    for ((m, expected), v) in candidates.iter().zip(cand_values) {
        let v = v?;
        consider(m.label(), v, &mut report);
        if let Some(e) = expected {
            // the limit map carries integrator error on top of extraction
            let tol = if matches!(m.repr(), crate::carath::MapRepr::BlackBox(_)) {
                BOUND_TOL
            } else {
                ATTAIN_TOL
            };
            if (v - e).norm() > tol {
                report.attained = false;
            }
        }
        report.candidates.push(CandidateValue {
            map: m.label().to_string(),
            coefficient: coeff_name.clone(),
            value: v,
            expected: *expected,
        });
    }
    for (s, v) in samples.iter().zip(sample_values) {
        let v = v?;
        report.sample_max = report.sample_max.max(v.norm());
        consider(s.map.label(), v, &mut report);
    }
    Ok(report)
}

/// Coefficients covered by [`verify_gprime_bounds`]: diagonal entries for
/// the frame (every coordinate on the rank-1 ball) and mixed pairs of frame
/// coordinates.
fn gprime_coefficients(f: &HolMap, dom: &BallGeometry) -> Result<Vec<(String, C)>> {
    let idx: Vec<usize> = match dom.kind() {
        GeometryKind::Euclidean => (0..dom.dim()).collect(),
        _ => dom.frame_coords(),
    };
    let mut out = Vec::new();
    for &i in &idx {
        out.push((format!("diag[{i}]"), second_coeff(f, i, i, CoeffKind::Pure)?.value));
    }
    if dom.rank() >= 2 {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let (ci, cj) = mixed_pair(f, i, j)?;
                out.push((format!("mixed[{i},{j}]"), ci.value));
                out.push((format!("mixed[{j},{i}]"), cj.value));
            }
        }
    }
    Ok(out)
}

/// Checks `|(1/2) d^2 f_i / dz_i^2 (0)| <= |g'(0)|` and
/// `|d^2 f_i / dz_i dz_j (0)| <= |g'(0)|` over `n` samples, with the
/// sharpness maps: parametric limits of `g(z_1) z` (diagonal) and
/// `g(z_2) z` (mixed), whose coefficients equal `-g'(0)`.
pub fn verify_gprime_bounds<R: Rng>(g: &DiscFunction, dom: &BallGeometry, n: usize, rng: &mut R) -> Result<BoundReport> {
    verify_gprime_bounds_with(g, dom, n, rng, &Sg0Options::default())
}

pub fn verify_gprime_bounds_with<R: Rng>(
    g: &DiscFunction,
    dom: &BallGeometry,
    n: usize,
    rng: &mut R,
    opts: &Sg0Options,
) -> Result<BoundReport> {
    let gp = g.g_prime0();
    let bound = gp.norm();
    let target = -gp;
    let nd = dom.dim();
    let (a, b) = match dom.kind() {
        GeometryKind::Euclidean => (0, 1.min(nd - 1)),
        _ => {
            let f = dom.frame_coords();
            (f[0], f[1])
        }
    };

    let mut sharp: Vec<(HolMap, String)> = Vec::new();
    let block = |k: usize| factor_block(g, dom, LinearFunctional::coordinate(nd, k, C::new(1.0, 0.0)));
    let fa = Arc::new(HerglotzField::autonomous(g.clone(), block(a))?);
    sharp.push((limit_map(fa, opts.limit_tol, format!("lim g(z{a})z")), format!("diag[{a}]")));
    if dom.rank() >= 2 {
        let fb = Arc::new(HerglotzField::autonomous(g.clone(), block(b))?);
        sharp.push((limit_map(fb, opts.limit_tol, format!("lim g(z{b})z")), format!("mixed[{a},{b}]")));
    }

    let samples = draw_samples(g, dom, n, rng, opts)?;
    let mut maps: Vec<&HolMap> = vec![];
    let id = HolMap::identity(*dom);
    maps.push(&id);
    maps.extend(sharp.iter().map(|(m, _)| m));
    maps.extend(samples.iter().map(|s| &s.map));
    let values = maps
        .par_iter()
        .map(|m| gprime_coefficients(m, dom))
        .collect::<Vec<_>>();

    let mut report = BoundReport {
        functional_id: FunctionalId {
            i: None,
            j: None,
            kind: FunctionalKind::DiagonalAndMixed,
        },
        theoretical_bound: bound,
        empirical_max: f64::NEG_INFINITY,
        attaining_map_id: String::new(),
        n_samples: n,
        violations: Vec::new(),
        tolerance: BOUND_TOL,
        attained: true,
        candidates: Vec::new(),
        sample_max: 0.0,
        note: note(n),
    };
    let n_fixed = 1 + sharp.len();
    for (k, (m, v)) in maps.iter().zip(values).enumerate() {
        for (name, c) in v? {
            let modulus = c.norm();
            if modulus > report.empirical_max {
                report.empirical_max = modulus;
                report.attaining_map_id = format!("{} {name}", m.label());
            }
            if !(modulus <= bound + BOUND_TOL) {
                report.violations.push(Violation {
                    map: m.label().to_string(),
                    coefficient: name.clone(),
                    value: modulus,
                });
            }
            if k >= n_fixed {
                report.sample_max = report.sample_max.max(modulus);
            }
            let expected = if k == 0 {
                Some(C::new(0.0, 0.0))
            } else if k < n_fixed && name == sharp[k - 1].1 {
                Some(target)
            } else {
                None
            };
            if let Some(e) = expected {
                if (c - e).norm() > BOUND_TOL {
                    report.attained = false;
                }
                report.candidates.push(CandidateValue {
                    map: m.label().to_string(),
                    coefficient: name,
                    value: c,
                    expected: Some(e),
                });
            }
        }
    }
    Ok(report)
}

/// `max || shear(lim field) - lim(sheared field) ||` over `samples` points
/// with `||z|| <= 0.5`, shearing in the first admissible pair.
pub fn verify_shear_commutes(
    g: &DiscFunction,
    dom: &BallGeometry,
    field: &HerglotzField,
    samples: usize,
) -> Result<f64> {
    let (i, j) = *dom
        .admissible_pairs()
        .first()
        .ok_or_else(|| LabError::Unsupported("shearing needs dimension >= 2".into()))?;
    verify_shear_commutes_pair(g, dom, field, samples, i, j, crate::loewner::DEFAULT_LIMIT_TOL * 1e-2)
}

pub fn verify_shear_commutes_pair(
    g: &DiscFunction,
    dom: &BallGeometry,
    field: &HerglotzField,
    samples: usize,
    i: usize,
    j: usize,
    limit_tol: f64,
) -> Result<f64> {
    if field.domain() != *dom {
        return Err(LabError::InvalidParameter("field lives on another domain".into()));
    }
    if field.g().family_name() != g.family_name() || field.g().alpha() != g.alpha() {
        return Err(LabError::InvalidParameter("field was built for another disc function".into()));
    }
    dom.check_pair(i, j)?;
    let sheared = field.map_segments(|h| shear(h, i, j))?;
    let lim = limit_map(Arc::new(field.clone()), limit_tol, "lim field");
    let lhs = shear(&lim, i, j)?;
    let mut rng = seeded_rng(SHEAR_COMMUTE_SEED);
    let points: Vec<CVec> = (0..samples).map(|_| dom.sample_ball(&mut rng, 0.5)).collect();
    let diffs = points
        .par_iter()
        .map(|z| {
            let r = parametric_map(&sheared, z, limit_tol)?;
            Ok(max_abs_diff(&lhs.eval_raw(z), &r.endpoint))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

/// `z + c z_j^2 e_i` with `c = -int_0^inf e^{-t} c(t) dt` for a field whose
/// segments are all shear polynomials `z + c_k z_j^2 e_i`: the closed-form
/// limit used as an oracle.
pub fn shear_field_limit(field: &HerglotzField, i: usize, j: usize) -> Result<HolMap> {
    let n = field.domain().dim();
    let mut exps = vec![0u32; n];
    exps[j] = 2;
    let segs = field.segments();
    let mut total = C::new(0.0, 0.0);
    for (k, s) in segs.iter().enumerate() {
        let p = s.map.as_polynomial().ok_or_else(|| {
            LabError::Unsupported("closed-form limit needs polynomial segments".into())
        })?;
        let c = p.coefficient(i, &exps);
        let a = (-s.start).exp();
        let b = segs.get(k + 1).map_or(0.0, |t| (-t.start).exp());
        total += c * (a - b);
    }
    let mut p = Polynomial::identity(n);
    p.push_square(n, i, j, -total);
    HolMap::polynomial(field.domain(), p, "shear limit")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn functional_l_examples() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::polydisc(2).unwrap();
        let f = canonical_field(&g, &d, 0, 1, 1).unwrap();
        assert!((functional_l(0, 1, &f).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!(functional_l(0, 1, &HolMap::identity(d)).unwrap().norm() < 1e-14);
        assert!(functional_l(1, 1, &f).is_err());
    }

    #[test]
    fn identity_only_field_gives_identity() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::polydisc(2).unwrap();
        let field = Arc::new(HerglotzField::autonomous(g, HolMap::identity(d)).unwrap());
        let m = limit_map(field, 1e-10, "id");
        let z = [c(0.3, 0.2), c(-0.1, 0.5)];
        assert!(max_abs_diff(&m.eval_raw(&z), &z) < 1e-15);
    }

    #[test]
    fn sampled_map_is_normalized_and_deterministic() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::polydisc(2).unwrap();
        let a = sample_sg0(&g, &d, &mut seeded_rng(11), 2).unwrap();
        let b = sample_sg0(&g, &d, &mut seeded_rng(11), 2).unwrap();
        assert_eq!(a.field.record(), b.field.record());
        let z = [c(0.2, -0.1), c(0.3, 0.3)];
        assert_eq!(a.map.eval_raw(&z), b.map.eval_raw(&z));
        let v = a.map.eval_raw(&[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(v.iter().all(|x| x.norm() < 1e-12));
        let l = functional_l(0, 1, &a.map).unwrap();
        assert!(l.norm() <= 1.0 + BOUND_TOL);
    }

    #[test]
    fn shear_limit_oracle_matches_commutation() {
        let g = DiscFunction::Moebius;
        let d = BallGeometry::polydisc(2).unwrap();
        let h = canonical_field(&g, &d, 0, 1, 1).unwrap();
        let field = HerglotzField::new(g.clone(), d, vec![(0.0, HolMap::identity(d)), (0.5, h)]).unwrap();
        let lim = shear_field_limit(&field, 0, 1).unwrap();
        let want = -(-0.5f64).exp();
        let got = lim.as_polynomial().unwrap().coefficient(0, &[0, 2]);
        assert!((got - c(want, 0.0)).norm() < 1e-15);
        let z = [c(0.2, 0.1), c(0.3, -0.2)];
        let p = parametric_map(&field, &z, 1e-10).unwrap();
        assert!(max_abs_diff(&p.endpoint, &lim.eval_raw(&z)) < 1e-9);
        assert!(verify_shear_commutes(&g, &d, &field, 5).unwrap() < 1e-7);
    }
}
