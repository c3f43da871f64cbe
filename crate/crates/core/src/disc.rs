//! Convex disc functions `g: U -> C` with `g(0) = 1` and `Re g > 0`.
//!
//! Four closed families are built in, each with closed-form inverse, boundary
//! distance and derivatives. [`DiscFunction::Custom`] takes a pointwise
//! evaluator plus optional inverse and boundary parametrization and goes
//! through the numeric routes (boundary grid + golden section for `d1`,
//! winding number for membership).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::numeric::golden_section_min;
use crate::{LabError, Result, C};

/// Number of boundary points used by the numeric routes.
pub const BOUNDARY_GRID: usize = 4096;
/// Number of radial grid points used by [`DiscFunction::a0`].
pub const RADIAL_GRID: usize = 4096;

type ScalarFn = Arc<dyn Fn(C) -> C + Send + Sync>;
type BoundaryFn = Arc<dyn Fn(f64) -> C + Send + Sync>;

/// User-supplied disc function.
#[derive(Clone)]
pub struct CustomDisc {
    pub name: String,
    eval: ScalarFn,
    inverse: Option<ScalarFn>,
    boundary: Option<BoundaryFn>,
    polyline: Arc<OnceLock<Vec<C>>>,
}

impl CustomDisc {
    pub fn new(name: impl Into<String>, eval: impl Fn(C) -> C + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            inverse: None,
            boundary: None,
            polyline: Arc::new(OnceLock::new()),
        }
    }

    pub fn with_inverse(mut self, inverse: impl Fn(C) -> C + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// `theta -> g(e^{i theta})`. Points at infinity may be returned as
    /// non-finite values; they are skipped.
    pub fn with_boundary(mut self, boundary: impl Fn(f64) -> C + Send + Sync + 'static) -> Self {
        self.boundary = Some(Arc::new(boundary));
        self.polyline = Arc::new(OnceLock::new());
        self
    }

    fn polyline(&self) -> Option<&[C]> {
        let boundary = self.boundary.as_ref()?;
        Some(self.polyline.get_or_init(|| {
            (0..BOUNDARY_GRID)
                .map(|k| boundary(boundary_angle(k)))
                .collect()
        }))
    }
}

impl fmt::Debug for CustomDisc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDisc")
            .field("name", &self.name)
            .field("inverse", &self.inverse.is_some())
            .field("boundary", &self.boundary.is_some())
            .finish()
    }
}

/// A convex univalent disc function normalized by `g(0) = 1`.
#[derive(Clone, Debug)]
pub enum DiscFunction {
    /// `(1 - z) / (1 + z)`, image the right half-plane.
    Moebius,
    /// `(1 - z) / (1 + (1 - 2a) z)`, starlike of order `a in [0, 1)`.
    StarlikeOrder { alpha: f64 },
    /// `(1 - (1 - 2a) z) / (1 + z)`, almost starlike of order `a in [0, 1)`.
    AlmostStarlike { alpha: f64 },
    /// `((1 - z) / (1 + z))^a` on the principal branch, `a in (0, 1]`.
    StronglyStarlike { alpha: f64 },
    Custom(CustomDisc),
}

/// Three-way verdict of [`DiscFunction::contains`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Indeterminate,
}

/// JSON descriptor `{"family": ..., "alpha": ...}` of a catalog function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl DiscSpec {
    pub fn moebius() -> Self {
        Self {
            family: "moebius".into(),
            alpha: None,
        }
    }

    pub fn new(family: &str, alpha: f64) -> Self {
        Self {
            family: family.into(),
            alpha: Some(alpha),
        }
    }
}

impl TryFrom<&DiscSpec> for DiscFunction {
    type Error = LabError;

    fn try_from(spec: &DiscSpec) -> Result<Self> {
        let alpha = |fam: &str| {
            spec.alpha
                .ok_or_else(|| LabError::InvalidParameter(format!("family `{fam}` needs `alpha`")))
        };
        match spec.family.as_str() {
            "moebius" => Ok(DiscFunction::Moebius),
            "starlike_order" => DiscFunction::starlike_order(alpha("starlike_order")?),
            "almost_starlike" => DiscFunction::almost_starlike(alpha("almost_starlike")?),
            "strongly_starlike" => DiscFunction::strongly_starlike(alpha("strongly_starlike")?),
            "custom" => Err(LabError::Unsupported(
                "custom disc functions cannot be built from JSON".into(),
            )),
            other => Err(LabError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

impl TryFrom<DiscSpec> for DiscFunction {
    type Error = LabError;

    fn try_from(spec: DiscSpec) -> Result<Self> {
        DiscFunction::try_from(&spec)
    }
}

fn check_alpha(alpha: f64, lo_closed: bool, hi_closed: bool, family: &str) -> Result<()> {
    let lo_ok = if lo_closed { alpha >= 0.0 } else { alpha > 0.0 };
    let hi_ok = if hi_closed { alpha <= 1.0 } else { alpha < 1.0 };
    if alpha.is_finite() && lo_ok && hi_ok {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!(
            "alpha = {alpha} out of range for `{family}`"
        )))
    }
}

fn boundary_angle(k: usize) -> f64 {
    -PI + 2.0 * PI * k as f64 / BOUNDARY_GRID as f64
}

fn one() -> C {
    C::new(1.0, 0.0)
}

impl DiscFunction {
    pub fn starlike_order(alpha: f64) -> Result<Self> {
        check_alpha(alpha, true, false, "starlike_order")?;
        Ok(DiscFunction::StarlikeOrder { alpha })
    }

    pub fn almost_starlike(alpha: f64) -> Result<Self> {
        check_alpha(alpha, true, false, "almost_starlike")?;
        Ok(DiscFunction::AlmostStarlike { alpha })
    }

    pub fn strongly_starlike(alpha: f64) -> Result<Self> {
        check_alpha(alpha, false, true, "strongly_starlike")?;
        Ok(DiscFunction::StronglyStarlike { alpha })
    }

    pub fn custom(custom: CustomDisc) -> Self {
        DiscFunction::Custom(custom)
    }

    pub fn family_name(&self) -> &str {
        match self {
            DiscFunction::Moebius => "moebius",
            DiscFunction::StarlikeOrder { .. } => "starlike_order",
            DiscFunction::AlmostStarlike { .. } => "almost_starlike",
            DiscFunction::StronglyStarlike { .. } => "strongly_starlike",
            DiscFunction::Custom(_) => "custom",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            DiscFunction::StarlikeOrder { alpha }
            | DiscFunction::AlmostStarlike { alpha }
            | DiscFunction::StronglyStarlike { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Descriptor for serialization; `None` for custom functions.
    pub fn spec(&self) -> Option<DiscSpec> {
        match self {
            DiscFunction::Custom(_) => None,
            _ => Some(DiscSpec {
                family: self.family_name().to_string(),
                alpha: self.alpha(),
            }),
        }
    }

    pub fn is_catalog(&self) -> bool {
        !matches!(self, DiscFunction::Custom(_))
    }

    /// The same function stripped of every closed form: evaluation and
    /// boundary only, so all numeric routes are exercised.
    pub fn to_custom(&self) -> DiscFunction {
        if let DiscFunction::Custom(c) = self {
            return DiscFunction::Custom(CustomDisc {
                inverse: None,
                polyline: Arc::new(OnceLock::new()),
                ..c.clone()
            });
        }
        let g = self.clone();
        let gb = self.clone();
        DiscFunction::Custom(
            CustomDisc::new(format!("{}(numeric)", self.family_name()), move |z| g.value(z))
                .with_boundary(move |theta| {
                    gb.boundary_value(theta)
                        .unwrap_or(C::new(f64::NAN, f64::NAN))
                }),
        )
    }

    /// `g(z)` for `|z| < 1`.
    pub fn eval(&self, z: C) -> Result<C> {
        if !(z.norm() < 1.0) {
            return Err(LabError::Domain(format!(
                "disc function evaluated at |z| = {} >= 1",
                z.norm()
            )));
        }
        Ok(self.value(z))
    }

    /// Unchecked evaluation; also used on the closed disc for catalog
    /// families, where it yields the continuous boundary extension.
    pub(crate) fn value(&self, z: C) -> C {
        match self {
            DiscFunction::Moebius => (one() - z) / (one() + z),
            DiscFunction::StarlikeOrder { alpha } => {
                (one() - z) / (one() + (1.0 - 2.0 * alpha) * z)
            }
            DiscFunction::AlmostStarlike { alpha } => {
                (one() - (1.0 - 2.0 * alpha) * z) / (one() + z)
            }
            DiscFunction::StronglyStarlike { alpha } => {
                let m = (one() - z) / (one() + z);
                if m == C::new(0.0, 0.0) {
                    m
                } else {
                    m.powf(*alpha)
                }
            }
            DiscFunction::Custom(c) => (c.eval)(z),
        }
    }

    /// `g(e^{i theta})`, or `None` when no boundary parametrization exists.
    /// Poles come back as non-finite values.
    pub fn boundary_value(&self, theta: f64) -> Option<C> {
        match self {
            DiscFunction::Custom(c) => c.boundary.as_ref().map(|b| b(theta)),
            DiscFunction::StronglyStarlike { alpha } => {
                // (1 - e^{it}) / (1 + e^{it}) = -i tan(t/2), written out to keep
                // the branch exact on the boundary rays
                let t = (theta / 2.0).tan();
                if !t.is_finite() {
                    return Some(C::new(f64::INFINITY, f64::INFINITY));
                }
                if t == 0.0 {
                    Some(C::new(0.0, 0.0))
                } else {
                    Some(C::from_polar(t.abs().powf(*alpha), -t.signum() * alpha * FRAC_PI_2))
                }
            }
            _ => Some(self.value(C::from_polar(1.0, theta))),
        }
    }

    /// `g'(0)`: closed form for catalog families, Cauchy integral for custom.
    pub fn g_prime0(&self) -> C {
        match *self {
            DiscFunction::Moebius => C::new(-2.0, 0.0),
            DiscFunction::StarlikeOrder { alpha } => C::new(-2.0 * (1.0 - alpha), 0.0),
            DiscFunction::AlmostStarlike { alpha } => C::new(-2.0 * (1.0 - alpha), 0.0),
            DiscFunction::StronglyStarlike { alpha } => C::new(-2.0 * alpha, 0.0),
            DiscFunction::Custom(_) => self.cauchy_coefficient(1, 0.25, 64),
        }
    }

    /// Second Taylor coefficient `g''(0) / 2`.
    pub fn taylor2(&self) -> C {
        match *self {
            DiscFunction::Moebius => C::new(2.0, 0.0),
            DiscFunction::StarlikeOrder { alpha } => {
                let c = 1.0 - 2.0 * alpha;
                C::new(c * (1.0 + c), 0.0)
            }
            DiscFunction::AlmostStarlike { alpha } => C::new(2.0 - 2.0 * alpha, 0.0),
            DiscFunction::StronglyStarlike { alpha } => C::new(2.0 * alpha * alpha, 0.0),
            DiscFunction::Custom(_) => self.cauchy_coefficient(2, 0.25, 64),
        }
    }

    /// `g'(z)` for `|z| < 1`.
    pub fn derivative(&self, z: C) -> C {
        match *self {
            DiscFunction::Moebius => -2.0 / ((one() + z) * (one() + z)),
            DiscFunction::StarlikeOrder { alpha } => {
                let c = 1.0 - 2.0 * alpha;
                let d = one() + c * z;
                -(1.0 + c) / (d * d)
            }
            DiscFunction::AlmostStarlike { alpha } => {
                let d = 1.0 - 2.0 * alpha;
                -(1.0 + d) / ((one() + z) * (one() + z))
            }
            DiscFunction::StronglyStarlike { alpha } => {
                -2.0 * alpha * self.value(z) / (one() - z * z)
            }
            DiscFunction::Custom(_) => {
                let r = (0.5 * (1.0 - z.norm())).min(0.25);
                let m = 32;
                (0..m)
                    .map(|k| {
                        let e = C::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
                        self.value(z + r * e) / (r * e)
                    })
                    .sum::<C>()
                    / m as f64
            }
        }
    }

    fn cauchy_coefficient(&self, k: i32, r: f64, m: usize) -> C {
        (0..m)
            .map(|idx| {
                let theta = 2.0 * PI * idx as f64 / m as f64;
                self.value(C::from_polar(r, theta)) * C::from_polar(r.powi(-k), -(k as f64) * theta)
            })
            .sum::<C>()
            / m as f64
    }

    /// `d1(g) = dist(1, boundary of g(U))`. Closed forms for catalog
    /// families; custom functions use [`Self::d1_numeric`].
    pub fn d1(&self) -> Result<f64> {
        match *self {
            DiscFunction::Moebius => Ok(1.0),
            DiscFunction::StarlikeOrder { alpha } => Ok(if alpha <= 0.5 {
                1.0
            } else {
                (1.0 - alpha) / alpha
            }),
            DiscFunction::AlmostStarlike { alpha } => Ok(1.0 - alpha),
            DiscFunction::StronglyStarlike { alpha } => Ok((alpha * FRAC_PI_2).sin()),
            DiscFunction::Custom(_) => self.d1_numeric(),
        }
    }

    /// Boundary-grid minimum of `|g(e^{it}) - 1|` refined by golden-section
    /// search around the three best grid points.
    pub fn d1_numeric(&self) -> Result<f64> {
        if self.boundary_value(0.0).is_none() {
            return Err(LabError::Unsupported(
                "d1 of a custom disc function needs a boundary parametrization".into(),
            ));
        }
        let dist = |theta: f64| -> f64 {
            match self.boundary_value(theta) {
                Some(w) if w.re.is_finite() && w.im.is_finite() => (w - 1.0).norm(),
                _ => f64::INFINITY,
            }
        };
        let mut grid: Vec<(f64, f64)> = (0..BOUNDARY_GRID)
            .map(|k| {
                let t = boundary_angle(k);
                (t, dist(t))
            })
            .filter(|(_, d)| d.is_finite())
            .collect();
        if grid.is_empty() {
            return Err(LabError::NumericalInstability(
                "boundary parametrization produced no finite points".into(),
            ));
        }
        grid.sort_by(|a, b| a.1.total_cmp(&b.1));
        let h = 2.0 * PI / BOUNDARY_GRID as f64;
        let best = grid
            .iter()
            .take(3)
            .map(|&(t, d)| {
                let (_, refined) = golden_section_min(dist, t - h, t + h, 1e-13, 200);
                refined.min(d)
            })
            .fold(f64::INFINITY, f64::min);
        Ok(best)
    }

    /// Radial functional `a0(g) = inf_r min{|1 - g(r)|, |g(-r) - 1|} / r`.
    ///
    /// Dense grid on `(1e-6, 1 - 1e-6)`, golden-section refinement at the best
    /// grid point, the `r -> 0` limit `|g'(0)|`, and the `r -> 1` limit by
    /// Richardson extrapolation from `r = 1 - 10^-k`, `k = 2..6`.
    pub fn a0(&self) -> f64 {
        let phi = |rho: f64| self.radial_quotient(rho);
        let lo = 1e-6;
        let hi = 1.0 - 1e-6;
        let step = (hi - lo) / (RADIAL_GRID - 1) as f64;
        let (mut best_idx, mut best) = (0, f64::INFINITY);
        for k in 0..RADIAL_GRID {
            let v = phi(lo + step * k as f64);
            if v < best {
                best = v;
                best_idx = k;
            }
        }
        let center = lo + step * best_idx as f64;
        let (_, refined) = golden_section_min(
            phi,
            (center - step).max(lo),
            (center + step).min(hi),
            1e-14,
            200,
        );
        best = best.min(refined);
        best = best.min(self.g_prime0().norm());
        if let Some(limit) = self.radial_limit_at_one() {
            best = best.min(limit);
        }
        best
    }

    fn radial_quotient(&self, rho: f64) -> f64 {
        let r = C::new(rho, 0.0);
        let a = (one() - self.value(r)).norm();
        let b = (self.value(-r) - one()).norm();
        a.min(b) / rho
    }

    fn radial_limit_at_one(&self) -> Option<f64> {
        let samples: Vec<(f64, f64)> = (2..=6)
            .map(|k| {
                let h = 10f64.powi(-k);
                (h, self.radial_quotient(1.0 - h))
            })
            .collect();
        let (h1, v1) = samples[samples.len() - 2];
        let (h2, v2) = samples[samples.len() - 1];
        if !(v1.is_finite() && v2.is_finite()) {
            return None;
        }
        // linear in h: v(h) = v(0) + c h
        let extrapolated = v2 - (v1 - v2) * h2 / (h1 - h2);
        extrapolated.is_finite().then_some(extrapolated)
    }

    /// Closed-form (or user-provided) inverse. `Some(None)` means `w` lies
    /// outside the range of the inverse branch, hence outside `g(U)`;
    /// `None` means no inverse is available.
    fn inverse(&self, w: C) -> Option<Option<C>> {
        let z = match *self {
            DiscFunction::Moebius => (one() - w) / (one() + w),
            DiscFunction::StarlikeOrder { alpha } => {
                (one() - w) / (one() + (1.0 - 2.0 * alpha) * w)
            }
            DiscFunction::AlmostStarlike { alpha } => {
                (one() - w) / (w + (1.0 - 2.0 * alpha))
            }
            DiscFunction::StronglyStarlike { alpha } => {
                if w == C::new(0.0, 0.0) {
                    return Some(Some(one()));
                }
                if w.arg().abs() >= alpha * PI {
                    return Some(None);
                }
                let m = w.powf(1.0 / alpha);
                (one() - m) / (one() + m)
            }
            DiscFunction::Custom(ref c) => return c.inverse.as_ref().map(|inv| Some(inv(w))),
        };
        Some(Some(z))
    }

    /// Membership of `w` in `g(U)` with tolerance `eps` relative to
    /// `max(1, |w|)`.
    pub fn contains(&self, w: C, eps: f64) -> Membership {
        let scale = w.norm().max(1.0);
        match self.inverse(w) {
            Some(Some(z)) => {
                let r = z.norm();
                if !r.is_finite() {
                    Membership::Outside
                } else if r < 1.0 - eps * scale {
                    Membership::Inside
                } else if r > 1.0 + eps * scale {
                    Membership::Outside
                } else {
                    Membership::Indeterminate
                }
            }
            Some(None) => Membership::Outside,
            None => self.contains_by_winding(w, eps * scale),
        }
    }

    fn custom_polyline(&self) -> Option<&[C]> {
        match self {
            DiscFunction::Custom(c) => c.polyline(),
            _ => None,
        }
    }

    fn contains_by_winding(&self, w: C, tol: f64) -> Membership {
        let Some(poly) = self.custom_polyline() else {
            return Membership::Indeterminate;
        };
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Membership::Outside;
        }
        if polyline_distance(poly, w) <= tol {
            return Membership::Indeterminate;
        }
        if inside_by_inversion(poly, w) {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Signed Euclidean distance from `w` to the boundary of `g(U)`,
    /// positive inside.
    pub fn signed_distance(&self, w: C) -> f64 {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return -f64::MAX;
        }
        match *self {
            DiscFunction::Moebius => w.re,
            DiscFunction::AlmostStarlike { alpha } => w.re - alpha,
            DiscFunction::StarlikeOrder { alpha } => {
                if alpha == 0.0 {
                    w.re
                } else {
                    let r = 0.5 / alpha;
                    r - (w - r).norm()
                }
            }
            DiscFunction::StronglyStarlike { alpha } => {
                let half = alpha * FRAC_PI_2;
                let phi = w.arg().abs();
                let r = w.norm();
                if phi <= half {
                    r * (half - phi).sin()
                } else if phi - half < FRAC_PI_2 {
                    -r * (phi - half).sin()
                } else {
                    -r
                }
            }
            DiscFunction::Custom(_) => {
                let Some(poly) = self.custom_polyline() else {
                    return f64::NAN;
                };
                let d = polyline_distance(poly, w);
                if inside_by_inversion(poly, w) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    /// Checks `g(conj z) = conj g(z)` on a fixed grid (exact for the catalog).
    pub fn is_real_symmetric(&self) -> bool {
        if self.is_catalog() {
            return true;
        }
        (1..10).all(|i| {
            (0..16).all(|k| {
                let z = C::from_polar(0.095 * i as f64, 2.0 * PI * k as f64 / 16.0);
                (self.value(z.conj()) - self.value(z).conj()).norm() < 1e-10
            })
        })
    }

    /// Whether `g(r) = O(1 - r)` as `r -> 1`. Catalog answers are exact; a
    /// custom `g` is tested through the log-log slope between
    /// `r = 1 - 1e-6` and `r = 1 - 1e-8`.
    pub fn decays_linearly_at_one(&self) -> bool {
        match *self {
            DiscFunction::Moebius | DiscFunction::StarlikeOrder { .. } => true,
            DiscFunction::AlmostStarlike { alpha } => alpha == 0.0,
            DiscFunction::StronglyStarlike { alpha } => alpha == 1.0,
            DiscFunction::Custom(_) => {
                let g1 = self.value(C::new(1.0 - 1e-6, 0.0)).norm();
                let g2 = self.value(C::new(1.0 - 1e-8, 0.0)).norm();
                if g2 == 0.0 {
                    return true;
                }
                let slope = (g1 / g2).ln() / 100f64.ln();
                slope >= 1.0 - 1e-3
            }
        }
    }
}

fn finite(p: C) -> bool {
    p.re.is_finite() && p.im.is_finite()
}

/// Distance to the boundary polyline, skipping segments that touch points
/// at (or numerically near) infinity.
fn polyline_distance(poly: &[C], w: C) -> f64 {
    const FAR: f64 = 1e8;
    let n = poly.len();
    let mut best = f64::INFINITY;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        if !(finite(a) && finite(b)) || a.norm() > FAR || b.norm() > FAR {
            continue;
        }
        best = best.min(segment_distance(a, b, w));
    }
    best
}

fn segment_distance(a: C, b: C, w: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (w - a).norm();
    }
    let t = (((w - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (w - (a + ab * t)).norm()
}

/// `w` is inside `g(U)` iff the inverted curve `1 / (boundary - 1)` has
/// winding number zero around `1 / (w - 1)`. The inversion sends the
/// interior point `1 = g(0)` to infinity and points at infinity to 0, so the
/// curve is closed and bounded even for unbounded images.
fn inside_by_inversion(poly: &[C], w: C) -> bool {
    let dw = w - 1.0;
    if dw.norm() < 1e-300 {
        return true;
    }
    let target = 1.0 / dw;
    let pts: Vec<C> = poly
        .iter()
        .map(|&p| {
            if finite(p) {
                let d = p - 1.0;
                if d.norm() == 0.0 {
                    C::new(f64::MAX, 0.0)
                } else {
                    1.0 / d
                }
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect();
    winding_number(&pts, target) == 0
}

/// Winding number of the closed polygon `pts` around `p` (crossing rule).
pub(crate) fn winding_number(pts: &[C], p: C) -> i32 {
    let n = pts.len();
    let mut wn = 0;
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let cross = (b.re - a.re) * (p.im - a.im) - (p.re - a.re) * (b.im - a.im);
        if a.im <= p.im {
            if b.im > p.im && cross > 0.0 {
                wn += 1;
            }
        } else if b.im <= p.im && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}
