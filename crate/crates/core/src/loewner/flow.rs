//! Loewner ODE `dv/dt = -h(v, t)`, `v(z, s, s) = z`.
//!
//! The solver works with `u = e^{t - s} v`, which satisfies
//! `du/dt = -e^{t - s} (h(v, t) - v)`. The linear part is integrated
//! exactly, so identity segments cost nothing and `u` converges to the
//! parametric limit as `t -> inf`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use super::field::HerglotzField;
use crate::carath::HolMap;
use crate::{CVec, LabError, Result, C};

pub const DEFAULT_FLOW_TOL: f64 = 1e-10;
pub const DEFAULT_LIMIT_TOL: f64 = 1e-8;
/// Horizon of the parametric limit.
pub const LIMIT_HORIZON: f64 = 40.0;
/// Spacing of the limit checkpoints.
pub const LIMIT_CHECKPOINT: f64 = 5.0;
/// Relative growth of `||v||` tolerated before the integration aborts.
pub const NORM_GROWTH_TOL: f64 = 1e-9;
const MAX_STEPS: usize = 500_000;
const MIN_STEP: f64 = 1e-12;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    /// `v(z, s, t)` for [`flow`], the limit estimate for [`parametric_map`].
    pub endpoint: CVec,
    pub trajectory: Option<Vec<(f64, CVec)>>,
    pub error_estimate: f64,
    pub horizon_used: f64,
    pub converged: bool,
    pub steps: usize,
}

impl FlowResult {
    /// CSV with columns `t, re_0, im_0, re_1, ...`.
    pub fn write_trajectory_csv<W: Write>(&self, w: W) -> Result<()> {
        let traj = self
            .trajectory
            .as_ref()
            .ok_or_else(|| LabError::InvalidParameter("no trajectory was recorded".into()))?;
        let n = self.endpoint.len();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for k in 0..n {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        out.write_record(&header)?;
        for (t, v) in traj {
            let mut row = vec![t.to_string()];
            for c in v {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| LabError::Io {
            path: "<trajectory>".into(),
            source: e,
        })
    }

    pub fn save_trajectory_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| LabError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.write_trajectory_csv(file)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub record_trajectory: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_FLOW_TOL,
            record_trajectory: false,
        }
    }
}

fn axpy(u: &CVec, h: f64, terms: &[(f64, &CVec)]) -> CVec {
    let mut out = u.clone();
    for (a, k) in terms {
        if *a == 0.0 {
            continue;
        }
        let s = h * a;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * s;
        }
    }
    out
}

fn max_abs(v: &[C]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

struct Integrator<'a> {
    field: &'a HerglotzField,
    s: f64,
    tau: f64,
    u: CVec,
    step: f64,
    tol: f64,
    err: f64,
    err_u: f64,
    steps: usize,
    vnorm: f64,
    fsal: Option<CVec>,
    trajectory: Option<Vec<(f64, CVec)>>,
}

impl<'a> Integrator<'a> {
    fn new(field: &'a HerglotzField, z: &[C], s: f64, opts: &FlowOptions) -> Result<Self> {
        let dom = field.domain();
        let r = dom.norm(z)?;
        if !(r < 1.0) {
            return Err(LabError::Domain(format!("flow start point has norm {r} >= 1")));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(LabError::Domain(format!("flow start time {s} must be finite and >= 0")));
        }
        if !(opts.tol > 0.0) {
            return Err(LabError::InvalidParameter("flow tolerance must be positive".into()));
        }
        let u: CVec = z.iter().copied().collect();
        Ok(Self {
            field,
            s,
            tau: s,
            step: 0.05,
            tol: opts.tol,
            err: 0.0,
            err_u: 0.0,
            steps: 0,
            vnorm: r,
            fsal: None,
            trajectory: opts.record_trajectory.then(|| vec![(s, u.clone())]),
            u,
        })
    }

    fn rhs(&self, map: &HolMap, tau: f64, u: &CVec) -> CVec {
        let damp = (self.s - tau).exp();
        let v: CVec = u.iter().map(|c| c * damp).collect();
        let hv = map.eval_raw(&v);
        let grow = -1.0 / damp;
        hv.iter().zip(&v).map(|(a, b)| (a - b) * grow).collect()
    }

    fn v(&self) -> CVec {
        let damp = (self.s - self.tau).exp();
        self.u.iter().map(|c| c * damp).collect()
    }

    fn advance_to(&mut self, target: f64) -> Result<()> {
        let dom = self.field.domain();
        while self.tau < target {
            let end = target.min(self.field.next_breakpoint(self.tau));
            let mut h = self.step.min(end - self.tau);
            let land = self.tau + h >= end - 1e-14 * end.max(1.0);
            if land {
                h = end - self.tau;
            }
            let map = self.field.map_at(self.tau + 0.5 * h);
            let t = self.tau;
            let u = &self.u;
            let k1 = match self.fsal.take() {
                Some(k) => k,
                None => self.rhs(map, t, u),
            };
            let k2 = self.rhs(map, t + C2 * h, &axpy(u, h, &[(A21, &k1)]));
            let k3 = self.rhs(map, t + C3 * h, &axpy(u, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = self.rhs(map, t + C4 * h, &axpy(u, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = self.rhs(
                map,
                t + C5 * h,
                &axpy(u, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = self.rhs(
                map,
                t + h,
                &axpy(u, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let u_new = axpy(u, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = self.rhs(map, t + h, &u_new);
            let zero: CVec = smallvec![C::new(0.0, 0.0); u.len()];
            let delta = axpy(
                &zero,
                h,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let scale = self.tol * (max_abs(u).max(max_abs(&u_new)) + 1e-6);
            let dmax = max_abs(&delta);
            let ratio = dmax / scale;
            if !ratio.is_finite() || u_new.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(LabError::IntegratorInstability(format!(
                    "non-finite state at t = {t} for `{}`",
                    map.label()
                )));
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if ratio <= 1.0 {
                self.steps += 1;
                if self.steps > MAX_STEPS {
                    return Err(LabError::IntegratorInstability(format!(
                        "step budget exhausted at t = {t}"
                    )));
                }
                self.tau = if land { end } else { t + h };
                self.err += dmax * (self.s - self.tau).exp();
                self.err_u += dmax;
                self.u = u_new;
                self.fsal = if land { None } else { Some(k7) };
                if !land || factor < 1.0 {
                    self.step = h * factor;
                }
                let v = self.v();
                let vn = dom.norm_unchecked(&v);
                if vn > self.vnorm * (1.0 + NORM_GROWTH_TOL) {
                    return Err(LabError::IntegratorInstability(format!(
                        "||v|| grew from {} to {vn} at t = {}; the field is not a Herglotz field",
                        self.vnorm, self.tau
                    )));
                }
                self.vnorm = vn;
                if let Some(tr) = self.trajectory.as_mut() {
                    tr.push((self.tau, v));
                }
            } else {
                self.fsal = Some(k1);
                self.step = h * factor;
                if self.step < MIN_STEP {
                    return Err(LabError::IntegratorInstability(format!(
                        "step size underflow at t = {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `v(z, s, t)` with default options.
pub fn flow(field: &HerglotzField, z: &[C], s: f64, t: f64, tol: f64) -> Result<FlowResult> {
    flow_with(
        field,
        z,
        s,
        t,
        &FlowOptions {
            tol,
            record_trajectory: false,
        },
    )
}

pub fn flow_with(field: &HerglotzField, z: &[C], s: f64, t: f64, opts: &FlowOptions) -> Result<FlowResult> {
    if !(t >= s) || !t.is_finite() {
        return Err(LabError::Domain(format!("flow needs finite t >= s, got s = {s}, t = {t}")));
    }
    let mut it = Integrator::new(field, z, s, opts)?;
    it.advance_to(t)?;
    Ok(FlowResult {
        endpoint: it.v(),
        error_estimate: it.err,
        horizon_used: t,
        converged: true,
        steps: it.steps,
        trajectory: it.trajectory.take(),
    })
}

/// Tolerance handed to the integrator when computing a parametric limit to
/// tolerance `tol`.
pub fn limit_integrator_tol(tol: f64) -> f64 {
    (tol * 1e-2).max(1e-13)
}

/// `lim e^t v(z, 0, t)`, sampled at `t = 5, 10, ..., 40`; converged once two
/// successive checkpoints differ by less than `tol`.
pub fn parametric_map(field: &HerglotzField, z: &[C], tol: f64) -> Result<FlowResult> {
    if !(tol > 0.0) {
        return Err(LabError::InvalidParameter("limit tolerance must be positive".into()));
    }
    let opts = FlowOptions {
        tol: limit_integrator_tol(tol),
        record_trajectory: false,
    };
    let mut it = Integrator::new(field, z, 0.0, &opts)?;
    let start = field.horizon();
    let mut prev: Option<CVec> = None;
    let mut t = 0.0;
    let mut diff = f64::INFINITY;
    let mut k = 1;
    while t < LIMIT_HORIZON {
        t = LIMIT_CHECKPOINT * k as f64;
        k += 1;
        it.advance_to(t)?;
        if let Some(p) = &prev {
            diff = crate::numeric::l2_norm(
                &p.iter().zip(&it.u).map(|(a, b)| a - b).collect::<CVec>(),
            );
            if diff < tol && t > start {
                return Ok(FlowResult {
                    endpoint: it.u.clone(),
                    trajectory: None,
                    error_estimate: diff + it.err_u,
                    horizon_used: t,
                    converged: true,
                    steps: it.steps,
                });
            }
        }
        prev = Some(it.u.clone());
    }
    Ok(FlowResult {
        endpoint: it.u.clone(),
        trajectory: None,
        error_estimate: diff,
        horizon_used: t,
        converged: false,
        steps: it.steps,
    })
}
