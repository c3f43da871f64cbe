//! Small numerical kernels shared by the lab modules: golden-section search,
//! Gauss-Legendre rules and dense complex linear solves.

use std::sync::{Arc, OnceLock};

use crate::{CVec, C};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal `f` on `[a, b]` by golden-section search.
///
/// Returns `(x, f(x))` for the best point seen. Stops when the bracket is
/// narrower than `xtol` or after `max_iter` shrinks.
pub fn golden_section_min<F>(f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre
    /// polynomial roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    /// Shared rule for `n` nodes; the common 64-point rule is built once.
    pub fn shared(n: usize) -> Arc<GaussLegendre> {
        static RULE64: OnceLock<Arc<GaussLegendre>> = OnceLock::new();
        if n == 64 {
            RULE64.get_or_init(|| Arc::new(GaussLegendre::new(64))).clone()
        } else {
            Arc::new(GaussLegendre::new(n))
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integral of a complex-valued `f` over `[0, 1]`.
    pub fn integrate<F: Fn(f64) -> C>(&self, f: F) -> C {
        self.iter().map(|(x, w)| f(x) * w).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Dense square complex matrix, row-major.
pub type CMatrix = Vec<CVec>;

pub fn identity_matrix(n: usize) -> CMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| if i == k { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) })
                .collect()
        })
        .collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-14` times the largest entry.
pub fn solve_linear(a: &CMatrix, b: &[C]) -> Option<CVec> {
    let n = b.len();
    let mut m: Vec<CVec> = a.clone();
    let mut rhs: CVec = b.iter().copied().collect();
    let scale = m
        .iter()
        .flat_map(|row| row.iter().map(|v| v.norm()))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| m[r1][col].norm().total_cmp(&m[r2][col].norm()))
            .unwrap_or(col);
        if m[pivot][col].norm() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == C::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
            let r = rhs[col];
            rhs[row] -= factor * r;
        }
    }
    let mut x: CVec = smallvec::smallvec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Euclidean length of a complex vector.
pub fn l2_norm(z: &[C]) -> f64 {
    z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `max_k |a_k - b_k|`.
pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = rule.integrate(|x| C::new(x.powi(15), 0.0));
        assert!((v.re - 1.0 / 16.0).abs() < 1e-15);
        let w: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_64_log_integral() {
        // int_0^1 1/(1+x) dx = ln 2
        let rule = GaussLegendre::shared(64);
        let v = rule.integrate(|x| C::new(1.0 / (1.0 + x), 0.0));
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn solve_with_pivoting() {
        let a: CMatrix = vec![
            smallvec::smallvec![C::new(0.0, 0.0), C::new(2.0, 1.0)],
            smallvec::smallvec![C::new(1.0, 0.0), C::new(3.0, 0.0)],
        ];
        let b = [C::new(1.0, 0.0), C::new(2.0, -1.0)];
        let x = solve_linear(&a, &b).unwrap();
        let r0 = a[0][0] * x[0] + a[0][1] * x[1] - b[0];
        let r1 = a[1][0] * x[0] + a[1][1] * x[1] - b[1];
        assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a: CMatrix = vec![
            smallvec::smallvec![C::new(1.0, 0.0), C::new(2.0, 0.0)],
            smallvec::smallvec![C::new(2.0, 0.0), C::new(4.0, 0.0)],
        ];
        assert!(solve_linear(&a, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]).is_none());
    }
}
