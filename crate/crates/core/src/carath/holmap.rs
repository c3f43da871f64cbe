use std::fmt;
use std::sync::Arc;

use num_complex::ComplexFloat;
use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use crate::disc::DiscFunction;
use crate::geometry::{BallGeometry, LinearFunctional};
use crate::loewner::KoebeRatio;
use crate::numeric::{identity_matrix, CMatrix};
use crate::{CVec, LabError, Result, C};

/// Step of the fourth-order central differences used for black-box Jacobians.
pub const FD_STEP: f64 = 1e-5;

/// One monomial `coeff * z^exponents` in component `component`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

impl Monomial {
    pub fn coeff(&self) -> C {
        C::new(self.re, self.im)
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Sparse polynomial map; serializes as a plain list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn identity(n: usize) -> Self {
        let terms = (0..n)
            .map(|k| {
                let mut exponents = vec![0; n];
                exponents[k] = 1;
                Monomial {
                    component: k,
                    exponents,
                    re: 1.0,
                    im: 0.0,
                }
            })
            .collect();
        Self { terms }
    }

    pub fn push(&mut self, component: usize, exponents: Vec<u32>, coeff: C) {
        self.terms.push(Monomial {
            component,
            exponents,
            re: coeff.re,
            im: coeff.im,
        });
    }

    /// `coeff * z_var^2 e_component` appended.
    pub fn push_square(&mut self, n: usize, component: usize, var: usize, coeff: C) {
        let mut exponents = vec![0; n];
        exponents[var] = 2;
        self.push(component, exponents, coeff);
    }

    /// Coefficient of `z^exponents` in `component`, summing duplicates.
    pub fn coefficient(&self, component: usize, exponents: &[u32]) -> C {
        self.terms
            .iter()
            .filter(|t| t.component == component && t.exponents == exponents)
            .map(Monomial::coeff)
            .sum()
    }

    fn eval(&self, z: &[C], out: &mut [C]) {
        for t in &self.terms {
            let mut v = t.coeff();
            for (zk, &e) in z.iter().zip(&t.exponents) {
                if e > 0 {
                    v *= zk.powu(e);
                }
            }
            out[t.component] += v;
        }
    }

    fn jacobian(&self, z: &[C], jac: &mut CMatrix) {
        for t in &self.terms {
            for (var, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut v = t.coeff() * e as f64;
                for (k, (zk, &ek)) in z.iter().zip(&t.exponents).enumerate() {
                    let p = if k == var { ek - 1 } else { ek };
                    if p > 0 {
                        v *= zk.powu(p);
                    }
                }
                jac[t.component][var] += v;
            }
        }
    }
}

/// Scalar holomorphic factor `phi` in the block `z -> phi(l(z)) z`.
#[derive(Clone, Debug)]
pub enum ScalarFactor {
    /// `phi = g`.
    Disc(DiscFunction),
    /// `phi(zeta) = b(zeta) / zeta` with `zeta b' / b = 1 / g`.
    KoebeRatio(KoebeRatio),
}

impl ScalarFactor {
    fn value(&self, zeta: C) -> C {
        match self {
            ScalarFactor::Disc(g) => g.value(zeta),
            ScalarFactor::KoebeRatio(k) => k.ratio(zeta),
        }
    }

    fn derivative(&self, zeta: C) -> C {
        match self {
            ScalarFactor::Disc(g) => g.derivative(zeta),
            ScalarFactor::KoebeRatio(k) => k.ratio_derivative(zeta),
        }
    }
}

pub type BlackBoxFn = Arc<dyn Fn(&[C]) -> CVec + Send + Sync>;

/// Opaque evaluator with a provenance tag.
#[derive(Clone)]
pub struct BlackBox {
    pub tag: String,
    f: BlackBoxFn,
}

impl BlackBox {
    pub fn new(tag: impl Into<String>, f: impl Fn(&[C]) -> CVec + Send + Sync + 'static) -> Self {
        Self {
            tag: tag.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn call(&self, z: &[C]) -> CVec {
        (self.f)(z)
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox({})", self.tag)
    }
}

/// Expression tree for composite maps.
#[derive(Clone, Debug)]
pub enum Expr {
    Identity,
    /// `z -> factor(l(z)) z`.
    Factor {
        factor: ScalarFactor,
        functional: LinearFunctional,
    },
    /// `z -> coeff z_var^2 e_component`.
    Square {
        component: usize,
        var: usize,
        coeff: C,
    },
    Poly(Polynomial),
    Black(BlackBox),
    Sum(Vec<Expr>),
    Scaled(C, Box<Expr>),
    Convex(Vec<(f64, Expr)>),
}

impl Expr {
    fn eval_into(&self, z: &[C], out: &mut [C]) {
        match self {
            Expr::Identity => {
                for (o, v) in out.iter_mut().zip(z) {
                    *o += v;
                }
            }
            Expr::Factor { factor, functional } => {
                let s = factor.value(functional.apply(z));
                for (o, v) in out.iter_mut().zip(z) {
                    *o += s * v;
                }
            }
            Expr::Square {
                component,
                var,
                coeff,
            } => {
                out[*component] += coeff * z[*var] * z[*var];
            }
            Expr::Poly(p) => p.eval(z, out),
            Expr::Black(b) => {
                for (o, v) in out.iter_mut().zip(b.call(z)) {
                    *o += v;
                }
            }
            Expr::Sum(items) => items.iter().for_each(|e| e.eval_into(z, out)),
            Expr::Scaled(c, e) => {
                let mut tmp: CVec = smallvec![C::new(0.0, 0.0); z.len()];
                e.eval_into(z, &mut tmp);
                for (o, v) in out.iter_mut().zip(tmp) {
                    *o += c * v;
                }
            }
            Expr::Convex(items) => {
                let mut tmp: CVec = smallvec![C::new(0.0, 0.0); z.len()];
                for (w, e) in items {
                    tmp.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
                    e.eval_into(z, &mut tmp);
                    for (o, v) in out.iter_mut().zip(&tmp) {
                        *o += *w * v;
                    }
                }
            }
        }
    }

    fn jacobian_into(&self, z: &[C], jac: &mut CMatrix) {
        let n = z.len();
        match self {
            Expr::Identity => (0..n).for_each(|k| jac[k][k] += 1.0),
            Expr::Factor { factor, functional } => {
                let zeta = functional.apply(z);
                let s = factor.value(zeta);
                let ds = factor.derivative(zeta);
                for i in 0..n {
                    jac[i][i] += s;
                    for k in 0..n {
                        jac[i][k] += ds * functional.coeffs[k] * z[i];
                    }
                }
            }
            Expr::Square {
                component,
                var,
                coeff,
            } => jac[*component][*var] += 2.0 * coeff * z[*var],
            Expr::Poly(p) => p.jacobian(z, jac),
            Expr::Black(b) => {
                let j = fd_jacobian(|w| b.call(w), z);
                add_scaled(jac, &j, C::new(1.0, 0.0));
            }
            Expr::Sum(items) => items.iter().for_each(|e| e.jacobian_into(z, jac)),
            Expr::Scaled(c, e) => {
                let mut tmp = zero_matrix(n);
                e.jacobian_into(z, &mut tmp);
                add_scaled(jac, &tmp, *c);
            }
            Expr::Convex(items) => {
                for (w, e) in items {
                    let mut tmp = zero_matrix(n);
                    e.jacobian_into(z, &mut tmp);
                    add_scaled(jac, &tmp, C::new(*w, 0.0));
                }
            }
        }
    }
}

fn zero_matrix(n: usize) -> CMatrix {
    vec![smallvec![C::new(0.0, 0.0); n]; n]
}

fn add_scaled(acc: &mut CMatrix, m: &CMatrix, c: C) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, v) in ra.iter_mut().zip(rm) {
            *a += c * v;
        }
    }
}

/// Fourth-order central-difference Jacobian of a holomorphic map.
pub fn fd_jacobian<F: Fn(&[C]) -> CVec>(f: F, z: &[C]) -> CMatrix {
    let n = z.len();
    let h = FD_STEP;
    let mut jac = zero_matrix(n);
    let mut w: CVec = z.iter().copied().collect();
    for k in 0..n {
        let at = |w: &mut CVec, d: f64| {
            w[k] = z[k] + d;
            f(w)
        };
        let p2 = at(&mut w, 2.0 * h);
        let p1 = at(&mut w, h);
        let m1 = at(&mut w, -h);
        let m2 = at(&mut w, -2.0 * h);
        w[k] = z[k];
        for i in 0..n {
            jac[i][k] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
    }
    jac
}

#[derive(Clone, Debug)]
pub enum MapRepr {
    Polynomial(Polynomial),
    Composite(Expr),
    BlackBox(BlackBox),
}

/// Holomorphic map of a ball into `C^n`.
#[derive(Clone, Debug)]
pub struct HolMap {
    repr: MapRepr,
    domain: BallGeometry,
    normalized: bool,
    label: String,
}

impl HolMap {
    pub fn polynomial(domain: BallGeometry, poly: Polynomial, label: impl Into<String>) -> Result<Self> {
        let n = domain.dim();
        for t in &poly.terms {
            if t.component >= n || t.exponents.len() != n {
                return Err(LabError::DimensionMismatch {
                    expected: n,
                    got: t.exponents.len().max(t.component + 1),
                });
            }
        }
        let normalized = poly_is_normalized(&poly, n);
        Ok(Self {
            repr: MapRepr::Polynomial(poly),
            domain,
            normalized,
            label: label.into(),
        })
    }

    pub fn identity(domain: BallGeometry) -> Self {
        Self {
            repr: MapRepr::Polynomial(Polynomial::identity(domain.dim())),
            domain,
            normalized: true,
            label: "id".into(),
        }
    }

    /// Composite map; `normalized` is asserted by the caller and checked by
    /// [`Self::check_normalized`].
    pub fn composite(domain: BallGeometry, expr: Expr, normalized: bool, label: impl Into<String>) -> Self {
        Self {
            repr: MapRepr::Composite(expr),
            domain,
            normalized,
            label: label.into(),
        }
    }

    pub fn black_box(domain: BallGeometry, bb: BlackBox, normalized: bool) -> Self {
        let label = bb.tag.clone();
        Self {
            repr: MapRepr::BlackBox(bb),
            domain,
            normalized,
            label,
        }
    }

    /// `sum_k w_k f_k` as a composite map. Normalized when every part is
    /// normalized and the weights sum to one.
    pub fn convex_combination(parts: &[(f64, HolMap)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| LabError::InvalidParameter("empty convex combination".into()))?;
        let domain = first.1.domain;
        if parts.iter().any(|(w, m)| m.domain != domain || *w < 0.0) {
            return Err(LabError::InvalidParameter(
                "convex combination needs non-negative weights on one domain".into(),
            ));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let normalized = (total - 1.0).abs() < 1e-12 && parts.iter().all(|(_, m)| m.normalized);
        let label = parts
            .iter()
            .map(|(w, m)| format!("{w:.3}*{}", m.label))
            .collect::<Vec<_>>()
            .join(" + ");
        let expr = Expr::Convex(parts.iter().map(|(w, m)| (*w, m.to_expr())).collect());
        Ok(Self::composite(domain, expr, normalized, label))
    }

    pub fn to_expr(&self) -> Expr {
        match &self.repr {
            MapRepr::Polynomial(p) => Expr::Poly(p.clone()),
            MapRepr::Composite(e) => e.clone(),
            MapRepr::BlackBox(b) => Expr::Black(b.clone()),
        }
    }

    pub fn repr(&self) -> &MapRepr {
        &self.repr
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match &self.repr {
            MapRepr::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn domain(&self) -> BallGeometry {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `f(z)` for `z` in the open ball.
    pub fn evaluate(&self, z: &[C]) -> Result<CVec> {
        let r = self.domain.norm(z)?;
        if !(r < 1.0) {
            return Err(LabError::Domain(format!("point of norm {r} is outside the open ball")));
        }
        Ok(self.eval_raw(z))
    }

    /// Evaluation without the ball check.
    #[inline]
    pub fn eval_raw(&self, z: &[C]) -> CVec {
        match &self.repr {
            MapRepr::BlackBox(b) => b.call(z),
            MapRepr::Polynomial(p) => {
                let mut out: CVec = smallvec![C::new(0.0, 0.0); z.len()];
                p.eval(z, &mut out);
                out
            }
            MapRepr::Composite(e) => {
                let mut out: CVec = smallvec![C::new(0.0, 0.0); z.len()];
                e.eval_into(z, &mut out);
                out
            }
        }
    }

    /// `Df(z)`: analytic for polynomial and composite maps, fourth-order
    /// central differences for black boxes.
    pub fn jacobian(&self, z: &[C]) -> Result<CMatrix> {
        self.domain.check_dim(z)?;
        Ok(self.jacobian_raw(z))
    }

    pub(crate) fn jacobian_raw(&self, z: &[C]) -> CMatrix {
        let n = z.len();
        match &self.repr {
            MapRepr::BlackBox(b) => fd_jacobian(|w| b.call(w), z),
            MapRepr::Polynomial(p) => {
                let mut j = zero_matrix(n);
                p.jacobian(z, &mut j);
                j
            }
            MapRepr::Composite(e) => {
                let mut j = zero_matrix(n);
                e.jacobian_into(z, &mut j);
                j
            }
        }
    }

    /// Verifies `|f(0)| < 1e-12` and `|Df(0) - I| < 1e-8` (entrywise max).
    pub fn check_normalized(&self) -> Result<()> {
        let zero = self.domain.zero();
        let v = self.eval_raw(&zero);
        let v0 = v.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let j = self.jacobian_raw(&zero);
        let id = identity_matrix(self.dim());
        let dj = j
            .iter()
            .zip(&id)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        if v0 < 1e-12 && dj < 1e-8 {
            Ok(())
        } else {
            Err(LabError::Precondition(format!(
                "map `{}` is not normalized: |f(0)| = {v0:e}, |Df(0) - I| = {dj:e}",
                self.label
            )))
        }
    }
}

fn poly_is_normalized(p: &Polynomial, n: usize) -> bool {
    let mut lin = zero_matrix(n);
    for t in &p.terms {
        match t.degree() {
            0 if t.coeff() != C::new(0.0, 0.0) => return false,
            1 => {
                let var = t.exponents.iter().position(|&e| e == 1).unwrap_or(0);
                lin[t.component][var] += t.coeff();
            }
            _ => {}
        }
    }
    let id = identity_matrix(n);
    lin.iter()
        .zip(&id)
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14))
}
