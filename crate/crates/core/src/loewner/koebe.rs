//! The `b`-transform of a disc function: the normalized solution of
//! `zeta b'(zeta) / b(zeta) = 1 / g(zeta)`, i.e.
//! `b(zeta) = zeta exp(int_0^zeta (1/g(u) - 1) / u du)`.

use std::sync::Arc;

use crate::disc::DiscFunction;
use crate::numeric::GaussLegendre;
use crate::{LabError, Result, C};

pub const DEFAULT_QUAD_POINTS: usize = 64;
/// Below this modulus the integrand uses its Taylor expansion.
const SERIES_RADIUS: f64 = 1e-6;

/// `E(zeta) = b(zeta) / zeta`, holomorphic with `E(0) = 1`.
#[derive(Debug, Clone)]
pub struct KoebeRatio {
    g: DiscFunction,
    rule: Arc<GaussLegendre>,
    g1: C,
    g2: C,
}

impl KoebeRatio {
    pub fn new(g: &DiscFunction, quad_points: usize) -> Result<Self> {
        if quad_points == 0 {
            return Err(LabError::InvalidParameter("quadrature needs at least one node".into()));
        }
        Ok(Self {
            g: g.clone(),
            rule: GaussLegendre::shared(quad_points),
            g1: g.g_prime0(),
            g2: g.taylor2(),
        })
    }

    pub fn g(&self) -> &DiscFunction {
        &self.g
    }

    /// `(1/g(u) - 1) / u`.
    fn integrand(&self, u: C) -> C {
        if u.norm() < SERIES_RADIUS {
            -self.g1 + (self.g1 * self.g1 - self.g2) * u
        } else {
            (1.0 / self.g.value(u) - 1.0) / u
        }
    }

    /// `int_0^zeta (1/g(u) - 1) / u du` along the radius. For `|zeta| > 1/2`
    /// the parameter interval is split at `1 - 2^{-k}` so every piece stays
    /// well separated from a boundary singularity of `1/g`.
    pub fn log_ratio(&self, zeta: C) -> C {
        let r = zeta.norm();
        let pieces = if r <= 0.5 {
            1
        } else {
            ((1.0 / (1.0 - r)).log2().ceil() as usize).clamp(1, 60)
        };
        let mut acc = C::new(0.0, 0.0);
        let mut a = 0.0;
        for k in 1..=pieces {
            let b = if k == pieces { 1.0 } else { 1.0 - 0.5f64.powi(k as i32) };
            let len = b - a;
            acc += self.rule.integrate(|x| self.integrand((a + len * x) * zeta)) * len;
            a = b;
        }
        acc * zeta
    }

    pub fn ratio(&self, zeta: C) -> C {
        self.log_ratio(zeta).exp()
    }

    /// `E'(zeta) = E(zeta) (1/g(zeta) - 1) / zeta`.
    pub fn ratio_derivative(&self, zeta: C) -> C {
        self.ratio(zeta) * self.integrand(zeta)
    }

    pub fn b(&self, zeta: C) -> C {
        zeta * self.ratio(zeta)
    }
}

/// `b(zeta)` with `quad_points` Gauss-Legendre nodes per piece.
pub fn koebe_transform(g: &DiscFunction, zeta: C, quad_points: usize) -> Result<C> {
    if !(zeta.norm() < 1.0) {
        return Err(LabError::Domain(format!("b-transform at |zeta| = {} >= 1", zeta.norm())));
    }
    Ok(KoebeRatio::new(g, quad_points)?.b(zeta))
}

/// Grid minimum of `(1 - r) / (r g(r))` over `r in [1/2, 1 - 1e-9]`, the
/// constant `C` in `1 / (r g(r)) >= C / (1 - r)`.
pub fn growth_constant(g: &DiscFunction) -> f64 {
    const N: usize = 4096;
    (0..N)
        .map(|k| {
            let r = 1.0 - 0.5 * (2e-9f64).powf(k as f64 / (N - 1) as f64);
            (1.0 - r) / (r * g.value(C::new(r, 0.0)).re)
        })
        .fold(f64::INFINITY, f64::min)
}
