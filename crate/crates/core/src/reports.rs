//! Experiment configs, the dispatcher behind the command-line tool, and
//! report envelopes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::carath::{
    canonical_coefficient, canonical_field, certify_mg, second_coeff, CertifyOptions, CoeffKind, HolMap,
    MgCertificate, Polynomial, DEFAULT_EPS,
};
use crate::disc::{DiscFunction, DiscSpec};
use crate::extremal::{
    random_field, scan_support_with, verify_gprime_bounds_with, verify_shear_commutes, BoundReport,
    Sg0Options,
};
use crate::geometry::{BallGeometry, GeometryKind, GeometrySpec};
use crate::loewner::{
    check_pde, flow, flow_with, growth_constant, koebe_transform, parametric_map, unbounded_support_map,
    FlowOptions, HerglotzField, DEFAULT_QUAD_POINTS,
};
use crate::numeric::max_abs_diff;
use crate::{seeded_rng, CVec, LabError, Result, C};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    D1Table,
    A0Table,
    Certify,
    FlowCheck,
    Scan,
    Gprime,
    UnboundedGrowth,
    ShearCommute,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::D1Table => "d1_table",
            ExperimentKind::A0Table => "a0_table",
            ExperimentKind::Certify => "certify",
            ExperimentKind::FlowCheck => "flow_check",
            ExperimentKind::Scan => "scan",
            ExperimentKind::Gprime => "gprime",
            ExperimentKind::UnboundedGrowth => "unbounded_growth",
            ExperimentKind::ShearCommute => "shear_commute",
        }
    }
}

const FAMILIES: [&str; 4] = ["moebius", "starlike_order", "almost_starlike", "strongly_starlike"];

/// One experiment. Optional fields fall back to per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_spec: Option<DiscSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_spec: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    /// Sample count (certify, scan, gprime, flow points, fields).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<usize>,
    /// Evaluation points per field (shear_commute).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Pass threshold of the experiment's main residual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Membership tolerance of the certifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Canonical-field coefficient as a multiple of the sharp constant
    /// (certify); values above 1 give the inflated maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    /// Parameter grid for tables and batch scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            g_spec: None,
            domain_spec: None,
            i: None,
            j: None,
            n: None,
            pieces: None,
            samples: None,
            tol: None,
            eps: None,
            scale: None,
            sign: None,
            alphas: None,
            seed: Some(seed),
            output_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::config("config", e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    fn default_alphas() -> Vec<f64> {
        (1..20).map(|k| k as f64 * 0.05).collect()
    }

    pub fn g(&self) -> Result<DiscFunction> {
        match &self.g_spec {
            None => Ok(DiscFunction::Moebius),
            Some(spec) => DiscFunction::try_from(spec).map_err(|e| LabError::config("g_spec", e.to_string())),
        }
    }

    pub fn domain(&self) -> Result<BallGeometry> {
        let default = match self.experiment {
            ExperimentKind::UnboundedGrowth => GeometrySpec {
                kind: GeometryKind::Euclidean,
                n: 2,
            },
            _ => GeometrySpec {
                kind: GeometryKind::Polydisc,
                n: 2,
            },
        };
        let spec = self.domain_spec.clone().unwrap_or(default);
        BallGeometry::try_from(spec).map_err(|e| LabError::config("domain_spec", e.to_string()))
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i.unwrap_or(0), self.j.unwrap_or(1))
    }

    fn count(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    /// Checks the fields the experiment uses; errors name the field.
    pub fn validate(&self) -> Result<()> {
        if self.seed.is_none() {
            return Err(LabError::config("seed", "a seed is required for reproducibility"));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(LabError::config("tol", "must be positive"));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return Err(LabError::config("eps", "must be positive"));
            }
        }
        if self.n == Some(0) {
            return Err(LabError::config("n", "must be at least 1"));
        }
        if self.pieces == Some(0) {
            return Err(LabError::config("pieces", "must be at least 1"));
        }
        if let Some(s) = self.sign {
            if s != 1 && s != -1 {
                return Err(LabError::config("sign", "must be 1 or -1"));
            }
        }
        match self.experiment {
            ExperimentKind::D1Table | ExperimentKind::A0Table => {
                if let Some(spec) = &self.g_spec {
                    if !FAMILIES.contains(&spec.family.as_str()) {
                        return Err(LabError::config("g_spec", format!("unknown family `{}`", spec.family)));
                    }
                }
                for &a in self.alphas.iter().flatten() {
                    if !(a > 0.0 && a < 1.0) {
                        return Err(LabError::config("alphas", format!("{a} is not in (0, 1)")));
                    }
                }
                Ok(())
            }
            ExperimentKind::Scan if self.alphas.is_some() => {
                let dom = self.domain()?;
                let (i, j) = self.pair();
                dom.check_pair(i, j).map_err(|e| LabError::config("i", e.to_string()))?;
                let base = self.g_spec.clone().unwrap_or(DiscSpec::moebius());
                for &a in self.alphas.iter().flatten() {
                    DiscFunction::try_from(&DiscSpec::new(&base.family, a))
                        .map_err(|e| LabError::config("alphas", e.to_string()))?;
                }
                Ok(())
            }
            ExperimentKind::Gprime => {
                self.g()?;
                let dom = self.domain()?;
                if dom.dim() < 2 {
                    return Err(LabError::config("domain_spec", "needs dimension >= 2"));
                }
                Ok(())
            }
            ExperimentKind::UnboundedGrowth => {
                self.g()?;
                self.domain()?;
                Ok(())
            }
            _ => {
                self.g()?;
                let dom = self.domain()?;
                let (i, j) = self.pair();
                dom.check_pair(i, j).map_err(|e| LabError::config("i", e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D1Row {
    pub family: String,
    pub alpha: Option<f64>,
    pub closed_form: f64,
    pub numeric: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A0Row {
    pub family: String,
    pub alpha: Option<f64>,
    pub a0: f64,
    pub d1: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCheckReport {
    pub coefficient: f64,
    pub n_points: usize,
    pub closed_form_max_err: f64,
    pub semigroup_residual: f64,
    pub parametric_max_err: f64,
    pub pde_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub bound: f64,
    pub empirical_max: f64,
    pub attained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub rho: f64,
    pub b: f64,
    pub lower_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub growth_constant: f64,
    pub b_half: f64,
    pub rows: Vec<GrowthRow>,
    /// `|| f(0.99 e_1) ||`.
    pub norm_at_099: f64,
    pub b_at_099: f64,
    pub diagonal_coefficient: C,
    pub expected_diagonal: C,
    /// Largest deviation from the Koebe function (Moebius only).
    pub koebe_max_err: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearCommuteRow {
    pub field: usize,
    pub labels: Vec<String>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearCommuteReport {
    pub rows: Vec<ShearCommuteRow>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum Payload {
    D1Table(Vec<D1Row>),
    A0Table(Vec<A0Row>),
    Certificate(MgCertificate),
    FlowCheck(FlowCheckReport),
    Bound(BoundReport),
    ScanBatch { rows: Vec<ScanRow>, reports: Vec<BoundReport> },
    Growth(GrowthReport),
    ShearCommute(ShearCommuteReport),
    /// The experiment stopped on a numerical error.
    None,
}

impl Payload {
    pub fn pass(&self) -> bool {
        match self {
            Payload::D1Table(rows) => rows.iter().all(|r| r.pass),
            Payload::A0Table(rows) => rows.iter().all(|r| r.pass),
            Payload::Certificate(c) => c.pass,
            Payload::FlowCheck(r) => r.pass,
            Payload::Bound(r) => r.pass(),
            Payload::ScanBatch { reports, .. } => reports.iter().all(BoundReport::pass),
            Payload::Growth(r) => r.pass,
            Payload::ShearCommute(r) => r.pass,
            Payload::None => false,
        }
    }

    fn matches(&self, kind: ExperimentKind) -> bool {
        matches!(
            (self, kind),
            (Payload::D1Table(_), ExperimentKind::D1Table)
                | (Payload::A0Table(_), ExperimentKind::A0Table)
                | (Payload::Certificate(_), ExperimentKind::Certify)
                | (Payload::FlowCheck(_), ExperimentKind::FlowCheck)
                | (Payload::Bound(_), ExperimentKind::Scan)
                | (Payload::ScanBatch { .. }, ExperimentKind::Scan)
                | (Payload::Bound(_), ExperimentKind::Gprime)
                | (Payload::Growth(_), ExperimentKind::UnboundedGrowth)
                | (Payload::ShearCommute(_), ExperimentKind::ShearCommute)
                | (Payload::None, _)
        )
    }

    /// Header and rows of the CSV companion for tabular payloads.
    pub fn table(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        fn opt(a: Option<f64>) -> String {
            a.map(|v| v.to_string()).unwrap_or_default()
        }
        match self {
            Payload::D1Table(rows) => Some((
                vec!["family", "alpha", "closed_form", "numeric", "abs_diff", "pass"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.family.clone(),
                            opt(r.alpha),
                            r.closed_form.to_string(),
                            r.numeric.to_string(),
                            r.abs_diff.to_string(),
                            r.pass.to_string(),
                        ]
                    })
                    .collect(),
            )),
            Payload::A0Table(rows) => Some((
                vec!["family", "alpha", "a0", "d1", "pass"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.family.clone(),
                            opt(r.alpha),
                            r.a0.to_string(),
                            r.d1.to_string(),
                            r.pass.to_string(),
                        ]
                    })
                    .collect(),
            )),
            Payload::ScanBatch { rows, .. } => Some((
                vec!["alpha", "bound", "empirical_max", "attained"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.alpha.to_string(),
                            r.bound.to_string(),
                            r.empirical_max.to_string(),
                            r.attained.to_string(),
                        ]
                    })
                    .collect(),
            )),
            Payload::Growth(r) => Some((
                vec!["rho", "b", "lower_bound", "holds"],
                r.rows
                    .iter()
                    .map(|g| vec![g.rho.to_string(), g.b.to_string(), g.lower_bound.to_string(), g.holds.to_string()])
                    .collect(),
            )),
            Payload::ShearCommute(r) => Some((
                vec!["field", "residual", "labels"],
                r.rows
                    .iter()
                    .map(|s| vec![s.field.to_string(), s.residual.to_string(), s.labels.join(" | ")])
                    .collect(),
            )),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NumericError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub config: ExperimentConfig,
    pub software_version: String,
    /// Seconds; the only field that differs between identical runs, so it
    /// can be left out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub status: Status,
    pub pass: bool,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub payload: Payload,
}

impl ReportEnvelope {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => EXIT_PASS,
            Status::Fail => EXIT_FAIL,
            Status::NumericError => EXIT_NUMERIC,
        }
    }

    /// Serialized payload, the part that must be identical between runs
    /// with the same config.
    pub fn payload_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.payload)?)
    }
}

/// Exit code for an error that prevented an envelope from being built.
pub fn error_exit_code(e: &LabError) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

fn is_numeric_failure(e: &LabError) -> bool {
    e.is_numeric() || matches!(e, LabError::Degenerate(_))
}

/// Validates and runs `config`. Numerical failures produce a failed
/// envelope; invalid configs are errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportEnvelope> {
    config.validate()?;
    let start = Instant::now();
    let outcome = dispatch(config);
    let wall_time_s = start.elapsed().as_secs_f64();
    let (payload, error) = match outcome {
        Ok(p) => (p, None),
        Err(e) if is_numeric_failure(&e) => (Payload::None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    debug_assert!(payload.matches(config.experiment));
    let pass = error.is_none() && payload.pass();
    let status = match (&error, pass) {
        (Some(_), _) => Status::NumericError,
        (None, true) => Status::Pass,
        (None, false) => Status::Fail,
    };
    let summary = match &error {
        Some(e) => format!("{}: numerical failure: {e}", config.experiment.name()),
        None => format!("{}: {}", config.experiment.name(), if pass { "pass" } else { "fail" }),
    };
    Ok(ReportEnvelope {
        config: config.clone(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: Some(wall_time_s),
        status,
        pass,
        summary,
        error,
        payload,
    })
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Payload> {
    let seed = cfg.seed.expect("validated");
    let mut rng = seeded_rng(seed);
    match cfg.experiment {
        ExperimentKind::D1Table => Ok(Payload::D1Table(d1_table(cfg)?)),
        ExperimentKind::A0Table => Ok(Payload::A0Table(a0_table(cfg)?)),
        ExperimentKind::Certify => {
            let g = cfg.g()?;
            let dom = cfg.domain()?;
            let (i, j) = cfg.pair();
            let h = scaled_canonical(&g, &dom, i, j, cfg.sign.unwrap_or(1), cfg.scale.unwrap_or(1.0))?;
            let cert = certify_mg(&h, &g, &dom, cfg.count(10_000), cfg.eps.unwrap_or(DEFAULT_EPS), &mut rng)?;
            Ok(Payload::Certificate(cert))
        }
        ExperimentKind::FlowCheck => Ok(Payload::FlowCheck(flow_check(cfg, &mut rng)?)),
        ExperimentKind::Scan => {
            let dom = cfg.domain()?;
            let (i, j) = cfg.pair();
            let n = cfg.count(200);
            let opts = Sg0Options::default();
            match &cfg.alphas {
                None => Ok(Payload::Bound(scan_support_with(&cfg.g()?, &dom, i, j, n, &mut rng, &opts)?)),
                Some(alphas) => {
                    let family = cfg.g_spec.clone().unwrap_or(DiscSpec::moebius()).family;
                    let mut rows = Vec::new();
                    let mut reports = Vec::new();
                    for &a in alphas {
                        let g = DiscFunction::try_from(&DiscSpec::new(&family, a))?;
                        let r = scan_support_with(&g, &dom, i, j, n, &mut rng, &opts)?;
                        rows.push(ScanRow {
                            alpha: a,
                            bound: r.theoretical_bound,
                            empirical_max: r.empirical_max,
                            attained: r.attained,
                        });
                        reports.push(r);
                    }
                    Ok(Payload::ScanBatch { rows, reports })
                }
            }
        }
        ExperimentKind::Gprime => {
            let r = verify_gprime_bounds_with(&cfg.g()?, &cfg.domain()?, cfg.count(100), &mut rng, &Sg0Options::default())?;
            Ok(Payload::Bound(r))
        }
        ExperimentKind::UnboundedGrowth => Ok(Payload::Growth(unbounded_growth(cfg)?)),
        ExperimentKind::ShearCommute => Ok(Payload::ShearCommute(shear_commute(cfg, &mut rng)?)),
    }
}

fn scaled_canonical(g: &DiscFunction, dom: &BallGeometry, i: usize, j: usize, sign: i8, scale: f64) -> Result<HolMap> {
    if scale == 1.0 {
        return canonical_field(g, dom, i, j, sign);
    }
    let c = canonical_coefficient(g, dom, sign)? * scale;
    let n = dom.dim();
    let mut p = Polynomial::identity(n);
    p.push_square(n, i, j, C::new(c, 0.0));
    HolMap::polynomial(*dom, p, format!("z + {c} z{j}^2 e{i}"))
}

fn table_functions(cfg: &ExperimentConfig) -> Result<Vec<(String, Option<f64>, DiscFunction)>> {
    let alphas = cfg.alphas.clone().unwrap_or_else(ExperimentConfig::default_alphas);
    let families: Vec<String> = match &cfg.g_spec {
        Some(s) => vec![s.family.clone()],
        None => FAMILIES.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::new();
    for fam in families {
        if fam == "moebius" {
            out.push((fam, None, DiscFunction::Moebius));
            continue;
        }
        for &a in &alphas {
            out.push((fam.clone(), Some(a), DiscFunction::try_from(&DiscSpec::new(&fam, a))?));
        }
    }
    Ok(out)
}

fn d1_table(cfg: &ExperimentConfig) -> Result<Vec<D1Row>> {
    let tol = cfg.tol.unwrap_or(1e-9);
    table_functions(cfg)?
        .into_iter()
        .map(|(family, alpha, g)| {
            let closed_form = g.d1()?;
            let numeric = g.d1_numeric()?;
            let abs_diff = (closed_form - numeric).abs();
            Ok(D1Row {
                family,
                alpha,
                closed_form,
                numeric,
                abs_diff,
                pass: abs_diff <= tol,
            })
        })
        .collect()
}

fn a0_table(cfg: &ExperimentConfig) -> Result<Vec<A0Row>> {
    let tol = cfg.tol.unwrap_or(1e-9);
    table_functions(cfg)?
        .into_iter()
        .map(|(family, alpha, g)| {
            let a0 = g.a0();
            let d1 = g.d1()?;
            Ok(A0Row {
                family,
                alpha,
                a0,
                d1,
                pass: a0 >= d1 - tol,
            })
        })
        .collect()
}

/// Closed-form flow of `h = z + c z_j^2 e_i`.
fn shear_flow_closed(z: &[C], i: usize, j: usize, c: f64, t: f64) -> CVec {
    let e = (-t).exp();
    let mut v: CVec = z.iter().map(|w| w * e).collect();
    v[i] += c * z[j] * z[j] * (e * e - e);
    v
}

fn flow_check(cfg: &ExperimentConfig, rng: &mut crate::LabRng) -> Result<FlowCheckReport> {
    let g = cfg.g()?;
    let dom = cfg.domain()?;
    let (i, j) = cfg.pair();
    let tol = cfg.tol.unwrap_or(1e-8);
    let n = cfg.count(100);
    let h = canonical_field(&g, &dom, i, j, 1)?;
    let c = canonical_coefficient(&g, &dom, 1)?;
    let field = HerglotzField::certified(g.clone(), dom, vec![(0.0, h)], &CertifyOptions::light(500), rng)?;
    let opts = FlowOptions {
        tol: 1e-10,
        record_trajectory: true,
    };
    let mut closed: f64 = 0.0;
    let mut semigroup: f64 = 0.0;
    let mut parametric: f64 = 0.0;
    for _ in 0..n {
        let z = dom.sample_ball(rng, 0.95);
        let r = flow_with(&field, &z, 0.0, 10.0, &opts)?;
        for (t, v) in r.trajectory.iter().flatten() {
            closed = closed.max(max_abs_diff(v, &shear_flow_closed(&z, i, j, c, *t)));
        }
        let t1 = 10.0 * rng.random::<f64>();
        let t2 = t1 + 10.0 * rng.random::<f64>();
        let a = flow(&field, &z, 0.0, t1, 1e-10)?;
        let b = flow(&field, &a.endpoint, t1, t2, 1e-10)?;
        let d = flow(&field, &z, 0.0, t2, 1e-10)?;
        semigroup = semigroup.max(max_abs_diff(&b.endpoint, &d.endpoint));
        let zp: CVec = dom.sample_ball(rng, 0.7);
        let p = parametric_map(&field, &zp, 1e-10)?;
        let mut want = zp.clone();
        want[i] -= c * zp[j] * zp[j];
        parametric = parametric.max(if p.converged { max_abs_diff(&p.endpoint, &want) } else { f64::INFINITY });
    }
    let mut chain = Polynomial::identity(dom.dim());
    chain.push_square(dom.dim(), i, j, C::new(-c, 0.0));
    let chain = HolMap::polynomial(dom, chain, "F-")?;
    let pde = check_pde(&chain, &field, n, rng)?;
    Ok(FlowCheckReport {
        coefficient: c,
        n_points: n,
        closed_form_max_err: closed,
        semigroup_residual: semigroup,
        parametric_max_err: parametric,
        pde_residual: pde,
        tolerance: tol,
        pass: closed < tol && semigroup < tol && parametric < 1e-6 && pde < 1e-10,
    })
}

fn unbounded_growth(cfg: &ExperimentConfig) -> Result<GrowthReport> {
    let g = cfg.g()?;
    let dom = cfg.domain()?;
    let f = unbounded_support_map(&g, &dom)?;
    let q = DEFAULT_QUAD_POINTS;
    let cst = growth_constant(&g);
    let b_half = koebe_transform(&g, C::new(0.5, 0.0), q)?.re;
    let rows = [0.9, 0.99, 0.999]
        .into_iter()
        .map(|rho| {
            let b = koebe_transform(&g, C::new(rho, 0.0), q)?.re;
            let lower_bound = b_half * (2.0 * (1.0 - rho)).powf(-cst);
            Ok(GrowthRow {
                rho,
                b,
                lower_bound,
                holds: b >= lower_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut e1 = dom.zero();
    e1[0] = C::new(0.99, 0.0);
    let norm_at_099 = dom.norm(&f.evaluate(&e1)?)?;
    let b_at_099 = koebe_transform(&g, C::new(0.99, 0.0), q)?.norm();
    let diagonal_coefficient = second_coeff(&f, 0, 0, CoeffKind::Pure)?.value;
    let expected_diagonal = -g.g_prime0();
    let koebe_max_err = matches!(g, DiscFunction::Moebius).then(|| {
        let mut worst: f64 = 0.0;
        for k in 1..=19 {
            let r = 0.05 * k as f64;
            for m in 0..32 {
                let z = C::from_polar(r, std::f64::consts::PI * m as f64 / 16.0);
                let b = koebe_transform(&g, z, q).unwrap_or(C::new(f64::NAN, 0.0));
                let want = z / ((1.0 - z) * (1.0 - z));
                worst = worst.max((b - want).norm());
            }
        }
        worst
    });
    let mut pass = rows.iter().all(|r| r.holds)
        && (diagonal_coefficient - expected_diagonal).norm() < 1e-7
        && ((norm_at_099 - b_at_099) / b_at_099).abs() < 1e-12;
    if let Some(err) = koebe_max_err {
        pass &= err < 1e-9 && (norm_at_099 / 9900.0 - 1.0).abs() < 1e-4;
    }
    Ok(GrowthReport {
        growth_constant: cst,
        b_half,
        rows,
        norm_at_099,
        b_at_099,
        diagonal_coefficient,
        expected_diagonal,
        koebe_max_err,
        pass,
    })
}

fn shear_commute(cfg: &ExperimentConfig, rng: &mut crate::LabRng) -> Result<ShearCommuteReport> {
    let g = cfg.g()?;
    let dom = cfg.domain()?;
    let tol = cfg.tol.unwrap_or(1e-5);
    let pieces = cfg.pieces.unwrap_or(3);
    let samples = cfg.samples.unwrap_or(10);
    let opts = Sg0Options::default();
    let mut rows = Vec::new();
    for k in 0..cfg.count(20) {
        let field = random_field(&g, &dom, rng, pieces, &opts)?;
        let residual = verify_shear_commutes(&g, &dom, &field, samples)?;
        rows.push(ShearCommuteRow {
            field: k,
            labels: field.segments().iter().map(|s| s.map.label().to_string()).collect(),
            residual,
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ShearCommuteReport {
        rows,
        max_residual,
        tolerance: tol,
        pass: max_residual < tol,
    })
}

/// Writes `<path>` as pretty JSON and, for tabular payloads, a CSV
/// companion next to it with extension `csv`.
pub fn emit_report(env: &ReportEnvelope, path: &Path) -> Result<Option<PathBuf>> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e: std::io::Error| LabError::Io { path: p, source: e }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut text = serde_json::to_string_pretty(env)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io(path))?;
    let Some((header, rows)) = env.payload.table() else {
        return Ok(None);
    };
    let csv_path = path.with_extension("csv");
    let file = std::fs::File::create(&csv_path).map_err(io(&csv_path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(io(&csv_path))?;
    Ok(Some(csv_path))
}

pub fn read_report(path: &Path) -> Result<ReportEnvelope> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}
