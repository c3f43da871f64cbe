//! Unit balls of the three concrete bounded symmetric domains: the Euclidean
//! ball `B^n` (rank 1), the polydisc `U^n` (rank `n`) and the spectral ball
//! of 2x2 matrices (rank 2, coordinates `(E11, E22, E12, E21)`).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use crate::numeric::l2_norm;
use crate::{CVec, LabError, Result, C};

/// Ties between maximal coordinates are resolved within this tolerance.
const TIE_TOL: f64 = 1e-12;
/// Spectral gap below which the top singular value counts as repeated.
const SPECTRAL_GAP_TOL: f64 = 1e-10;
/// Modulus cap for the non-maximal polydisc coordinates in the sampler.
const POLYDISC_CAP: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Euclidean,
    Polydisc,
    Spectral2,
}

/// JSON descriptor `{"kind": ..., "n": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GeometrySpec", into = "GeometrySpec")]
pub struct BallGeometry {
    kind: GeometryKind,
    n: usize,
}

impl TryFrom<GeometrySpec> for BallGeometry {
    type Error = LabError;

    fn try_from(spec: GeometrySpec) -> Result<Self> {
        match spec.kind {
            GeometryKind::Euclidean => BallGeometry::euclidean(spec.n),
            GeometryKind::Polydisc => BallGeometry::polydisc(spec.n),
            GeometryKind::Spectral2 if spec.n == 4 => Ok(BallGeometry::spectral2()),
            GeometryKind::Spectral2 => Err(LabError::InvalidParameter(format!(
                "spectral2 has dimension 4, got n = {}",
                spec.n
            ))),
        }
    }
}

impl From<BallGeometry> for GeometrySpec {
    fn from(g: BallGeometry) -> Self {
        GeometrySpec {
            kind: g.kind,
            n: g.n,
        }
    }
}

/// `l(w) = sum_k c_k w_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub coeffs: CVec,
}

impl LinearFunctional {
    pub fn new(coeffs: CVec) -> Self {
        Self { coeffs }
    }

    /// `w -> phase * w_k` on `C^n`.
    pub fn coordinate(n: usize, k: usize, phase: C) -> Self {
        let mut coeffs: CVec = smallvec![C::new(0.0, 0.0); n];
        coeffs[k] = phase;
        Self { coeffs }
    }

    #[inline]
    pub fn apply(&self, w: &[C]) -> C {
        self.coeffs.iter().zip(w).map(|(c, x)| c * x).sum()
    }
}

impl BallGeometry {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidParameter("euclidean ball needs n >= 1".into()));
        }
        Ok(Self {
            kind: GeometryKind::Euclidean,
            n,
        })
    }

    pub fn polydisc(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(LabError::InvalidParameter("polydisc needs n >= 2".into()));
        }
        Ok(Self {
            kind: GeometryKind::Polydisc,
            n,
        })
    }

    pub fn spectral2() -> Self {
        Self {
            kind: GeometryKind::Spectral2,
            n: 4,
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            GeometryKind::Euclidean => 1,
            GeometryKind::Polydisc => self.n,
            GeometryKind::Spectral2 => 2,
        }
    }

    /// Coordinates carrying the frame `e_1..e_r` (empty for the rank-1 ball).
    pub fn frame_coords(&self) -> Vec<usize> {
        match self.kind {
            GeometryKind::Euclidean => Vec::new(),
            GeometryKind::Polydisc => (0..self.n).collect(),
            GeometryKind::Spectral2 => vec![0, 1],
        }
    }

    /// Sharp constant multiplying `d1(g)` in the second-coefficient bounds.
    pub fn shear_factor(&self) -> f64 {
        match self.kind {
            GeometryKind::Euclidean => 1.5 * 3f64.sqrt(),
            _ => 1.0,
        }
    }

    /// Index pairs `(i, j)`, `i != j`, for which shearing and the canonical
    /// fields are defined.
    pub fn admissible_pairs(&self) -> Vec<(usize, usize)> {
        let idx: Vec<usize> = match self.kind {
            GeometryKind::Euclidean => (0..self.n).collect(),
            _ => self.frame_coords(),
        };
        let mut pairs = Vec::new();
        for &i in &idx {
            for &j in &idx {
                if i != j {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    pub fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if self.admissible_pairs().contains(&(i, j)) {
            Ok(())
        } else {
            Err(LabError::InvalidParameter(format!(
                "index pair ({i}, {j}) is not admissible for {:?} (frame {:?})",
                self.kind,
                self.frame_coords()
            )))
        }
    }

    pub fn check_dim(&self, z: &[C]) -> Result<()> {
        if z.len() == self.n {
            Ok(())
        } else {
            Err(LabError::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            })
        }
    }

    pub fn norm(&self, z: &[C]) -> Result<f64> {
        self.check_dim(z)?;
        Ok(self.norm_unchecked(z))
    }

    #[inline]
    pub(crate) fn norm_unchecked(&self, z: &[C]) -> f64 {
        match self.kind {
            GeometryKind::Euclidean => l2_norm(z),
            GeometryKind::Polydisc => z.iter().map(|v| v.norm()).fold(0.0, f64::max),
            GeometryKind::Spectral2 => spectral_values(z).0,
        }
    }

    /// Extreme points of `T(z)` used for `M_g` testing.
    pub fn support_functionals(&self, z: &[C]) -> Result<Vec<LinearFunctional>> {
        self.check_dim(z)?;
        let nz = self.norm_unchecked(z);
        if nz == 0.0 {
            return Err(LabError::Domain("support functional of z = 0".into()));
        }
        match self.kind {
            GeometryKind::Euclidean => Ok(vec![LinearFunctional::new(
                z.iter().map(|v| v.conj() / nz).collect(),
            )]),
            GeometryKind::Polydisc => Ok(maximal_coordinates(z, &(0..self.n).collect::<Vec<_>>())
                .into_iter()
                .map(|k| LinearFunctional::coordinate(self.n, k, phase_conj(z[k])))
                .collect()),
            GeometryKind::Spectral2 => spectral_support(z),
        }
    }

    /// A point with `norm(z) = 1`.
    pub fn sample_sphere<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        match self.kind {
            GeometryKind::Euclidean => {
                let z = gaussian_vec(rng, self.n);
                let r = l2_norm(&z);
                z.into_iter().map(|v| v / r).collect()
            }
            GeometryKind::Polydisc => {
                let k = rng.random_range(0..self.n);
                (0..self.n)
                    .map(|m| {
                        if m == k {
                            unit_phase(rng)
                        } else {
                            disc_point(rng, POLYDISC_CAP)
                        }
                    })
                    .collect()
            }
            GeometryKind::Spectral2 => {
                let z = gaussian_vec(rng, 4);
                let s = spectral_values(&z).0;
                z.into_iter().map(|v| v / s).collect()
            }
        }
    }

    /// Polydisc sphere point with two coordinates of modulus one; other
    /// geometries fall back to [`Self::sample_sphere`].
    pub fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        if self.kind != GeometryKind::Polydisc {
            return self.sample_sphere(rng);
        }
        let a = rng.random_range(0..self.n);
        let mut b = rng.random_range(0..self.n - 1);
        if b >= a {
            b += 1;
        }
        (0..self.n)
            .map(|m| {
                if m == a || m == b {
                    unit_phase(rng)
                } else {
                    disc_point(rng, POLYDISC_CAP)
                }
            })
            .collect()
    }

    /// Point in the open ball: sphere sample scaled by `radius * U^(1/2n)`.
    pub fn sample_ball<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> CVec {
        let s = self.sample_sphere(rng);
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / (2.0 * self.n as f64));
        s.into_iter().map(|v| v * r).collect()
    }

    pub fn zero(&self) -> CVec {
        smallvec![C::new(0.0, 0.0); self.n]
    }

    pub fn basis(&self, k: usize) -> CVec {
        let mut e = self.zero();
        e[k] = C::new(1.0, 0.0);
        e
    }
}

fn phase_conj(v: C) -> C {
    // |v| / v
    v.conj() / v.norm()
}

fn maximal_coordinates(z: &[C], coords: &[usize]) -> Vec<usize> {
    let m = coords.iter().map(|&k| z[k].norm()).fold(0.0, f64::max);
    coords
        .iter()
        .copied()
        .filter(|&k| z[k].norm() >= m - TIE_TOL)
        .collect()
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C::new(re, im)
        })
        .collect()
}

fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> C {
    C::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

fn disc_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C {
    let u: f64 = rng.random();
    C::from_polar(radius * u.sqrt(), rng.random_range(0.0..2.0 * PI))
}

/// `[[z1, z3], [z4, z2]]` as `(a, b, c, d)`.
#[inline]
fn matrix_entries(z: &[C]) -> (C, C, C, C) {
    (z[0], z[2], z[3], z[1])
}

/// Singular values `(s1, s2)`, `s1 >= s2`, of the 2x2 matrix of `z`.
pub fn spectral_values(z: &[C]) -> (f64, f64) {
    let (a, b, c, d) = matrix_entries(z);
    let fro2 = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
    let det = (a * d - b * c).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let s1sq = 0.5 * (fro2 + disc);
    let s1 = s1sq.sqrt();
    // s1 * s2 = |det| is better conditioned than the difference formula
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    (s1, s2)
}

fn spectral_support(z: &[C]) -> Result<Vec<LinearFunctional>> {
    let (s1, s2) = spectral_values(z);
    let diagonal = z[2] == C::new(0.0, 0.0) && z[3] == C::new(0.0, 0.0);
    if diagonal {
        return Ok(maximal_coordinates(z, &[0, 1])
            .into_iter()
            .map(|k| LinearFunctional::coordinate(4, k, phase_conj(z[k])))
            .collect());
    }
    if s1 - s2 < SPECTRAL_GAP_TOL {
        return Err(LabError::Degenerate(format!(
            "repeated top singular value {s1} (gap {})",
            s1 - s2
        )));
    }
    let (a, b, c, d) = matrix_entries(z);
    // top eigenvector of A^H A = [[p, q], [conj q, s]]
    let p = a.norm_sqr() + c.norm_sqr();
    let s = b.norm_sqr() + d.norm_sqr();
    let q = a.conj() * b + c.conj() * d;
    let lam = s1 * s1;
    let cand1 = [q, C::new(lam - p, 0.0)];
    let cand2 = [C::new(lam - s, 0.0), q.conj()];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (v, nv) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let nv = nv.sqrt();
    let v = [v[0] / nv, v[1] / nv];
    // u = A v / s1
    let u = [(a * v[0] + b * v[1]) / s1, (c * v[0] + d * v[1]) / s1];
    // l(W) = u^H W v; coordinate order (W11, W22, W12, W21)
    let coeffs: CVec = smallvec![
        u[0].conj() * v[0],
        u[1].conj() * v[1],
        u[0].conj() * v[1],
        u[1].conj() * v[0],
    ];
    Ok(vec![LinearFunctional::new(coeffs)])
}
