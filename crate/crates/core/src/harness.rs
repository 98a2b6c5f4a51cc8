//! Experiment protocol: sample points, fit a method once, resample it on a
//! sweep of rules, and report relative errors as CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::cubature::{
    approximate_cubature_with_truth, default_lscf_degree, lscf_integrate, lscf_weights_in,
    ExactFunction, Interpolant, LsCfWeights,
};
use crate::error::{Error, Result};
use crate::geometry::{filter_to_domain, halton, map_to_bbox, Domain, Point2, PointSet};
use crate::moving::{MovingInterpConfig, MovingInterpolant};
use crate::mshep::{fit_ms, MsConfig};
use crate::poly::{ChebyshevTensor, ScaledMonomials, DEFAULT_RANK_TOL};
use crate::pum::{fit_pum, PumConfig};
use crate::rbf::{default_epsilon_grid, fit_loocv, log_grid, KernelFamily};
use crate::rules::{
    basis_rule_moments, chebyshev_moments, gauss_legendre_product, load_rule, numeric_rows,
    read_rule, scaled_moments, validate_rule, CubatureRule, MomentVector, RuleReport,
};
use crate::testfns::{TestFunction, REFERENCE_DEGREE};

pub const CSV_HEADER: &str =
    "method,degree,nu,N,integral,reference,relative_error,node_gap_bound,wall_time_ms,error";

pub const POINTWISE_HEADER: &str =
    "index,x,y,boundary_distance,error,estimate,mean_error,mean_estimate";

/// Largest relative moment residual `rulecheck` accepts.
pub const RULECHECK_TOL: f64 = 1e-10;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Exit code for an error surfaced by the harness.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Io { .. }
        | Error::MuTooSmall { .. }
        | Error::EmptyResult => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Moving interpolation on discrete Leja points.
    Disc,
    /// Global multiquadric RBF with LOOCV shape parameter.
    Mq,
    Pum,
    /// Multinode Shepard, local degree 9 unless overridden.
    Mshep9,
    Lscf,
    Exactf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Disc => "disc",
            Self::Mq => "mq",
            Self::Pum => "pum",
            Self::Mshep9 => "mshep9",
            Self::Lscf => "lscf",
            Self::Exactf => "exactf",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "disc" => Self::Disc,
            "mq" => Self::Mq,
            "pum" => Self::Pum,
            "mshep9" | "mshep" => Self::Mshep9,
            "lscf" => Self::Lscf,
            "exactf" => Self::Exactf,
            _ => return Err(Error::Config(format!("unknown method '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointSource {
    Halton { n: usize, skip: usize },
    File(PathBuf),
}

impl FromStr for PointSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(path.into()));
        }
        let bad = || {
            Error::Config(format!(
                "bad point source '{s}', want halton:N[:skip] or file:<path>"
            ))
        };
        let rest = s.strip_prefix("halton:").ok_or_else(bad)?;
        let mut it = rest.split(':');
        let n = it
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(bad)?;
        let skip = match it.next() {
            Some(t) => t.parse().map_err(|_| bad())?,
            None => 0,
        };
        if it.next().is_some() {
            return Err(bad());
        }
        Ok(Self::Halton { n, skip })
    }
}

impl PointSource {
    /// The points inside `domain`: Halton points are mapped onto its bounding
    /// box first, file points are read as `x y` rows.
    pub fn load(&self, domain: &Domain) -> Result<PointSet> {
        let raw = match self {
            Self::Halton { n, skip } => map_to_bbox(&halton(*n, *skip)?, domain),
            Self::File(path) => {
                let rows = numeric_rows(&read_text(path)?, 2)?;
                PointSet::new(rows.iter().map(|r| Point2::new(r[0], r[1])).collect())?
            }
        };
        filter_to_domain(&raw, domain)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSource {
    Test(TestFunction),
    /// Sampled values as `x y f` rows; these also fix the data points.
    File(PathBuf),
}

impl FromStr for FunctionSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("file:") {
            Some(path) => Ok(Self::File(path.into())),
            None => Ok(Self::Test(s.parse()?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RuleSpec {
    /// Tensor Gauss-Legendre on a rectangle; the degree comes from the sweep
    /// unless given.
    Gauss(Option<usize>),
    /// Rule file; `{n}` in the path is replaced by the degree.
    File(String),
}

impl FromStr for RuleSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "gauss" {
            return Ok(Self::Gauss(None));
        }
        if let Some(n) = s.strip_prefix("gauss:") {
            let n = n
                .parse()
                .map_err(|_| Error::Config(format!("bad gauss degree in '{s}'")))?;
            return Ok(Self::Gauss(Some(n)));
        }
        match s.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(Self::File(p.into())),
            _ => Err(Error::Config(format!(
                "bad rule '{s}', want gauss, gauss:<n> or file:<path>"
            ))),
        }
    }
}

impl RuleSpec {
    fn is_templated(&self) -> bool {
        match self {
            Self::Gauss(n) => n.is_none(),
            Self::File(p) => p.contains("{n}"),
        }
    }

    /// The rule for sweep degree `n` over `domain`.
    pub fn rule(&self, domain: &Domain, n: usize) -> Result<CubatureRule> {
        match self {
            Self::Gauss(fixed) => match domain {
                Domain::Rectangle(r) => Ok(gauss_legendre_product(r, fixed.unwrap_or(n))),
                _ => Err(Error::Config(
                    "gauss rules need a rectangular domain; use --rule file:<path>".into(),
                )),
            },
            Self::File(template) => {
                let mut rule = load_rule(Path::new(&template.replace("{n}", &n.to_string())))?;
                rule.domain.get_or_insert(*domain);
                Ok(rule)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeSweep {
    pub start: usize,
    pub step: usize,
    pub stop: usize,
}

impl Default for DegreeSweep {
    fn default() -> Self {
        Self {
            start: 2,
            step: 2,
            stop: 30,
        }
    }
}

impl DegreeSweep {
    pub fn degrees(&self) -> Vec<usize> {
        (self.start..=self.stop).step_by(self.step).collect()
    }
}

impl FromStr for DegreeSweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad degree sweep '{s}', want start:step:stop or n"));
        let parts: Vec<usize> = s
            .split(':')
            .map(|t| t.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let sweep = match parts[..] {
            [n] => Self {
                start: n,
                step: 1,
                stop: n,
            },
            [a, s, b] => Self {
                start: a,
                step: s,
                stop: b,
            },
            _ => return Err(bad()),
        };
        if sweep.start == 0 || sweep.step == 0 || sweep.stop < sweep.start {
            return Err(bad());
        }
        Ok(sweep)
    }
}

/// `lo:hi:n` for a log-spaced grid, or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad grid '{s}'"));
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(bad());
        }
        log_grid(lo, hi, n)
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(bad());
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodFlags {
    pub mu: f64,
    pub q: Option<usize>,
    /// Local degree for mshep, working degree for lscf.
    pub local_degree: Option<usize>,
    pub theta: f64,
    pub d_max: usize,
    pub eps_grid: Option<Vec<f64>>,
    pub delta_grid: Option<Vec<f64>>,
}

impl Default for MethodFlags {
    fn default() -> Self {
        Self {
            mu: 2.0,
            q: None,
            local_degree: None,
            theta: 2.0,
            d_max: 10,
            eps_grid: None,
            delta_grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Defaults to the test function's natural domain.
    pub domain: Option<Domain>,
    pub points: PointSource,
    pub function: FunctionSource,
    pub method: Method,
    pub degrees: DegreeSweep,
    pub rule: RuleSpec,
    pub flags: MethodFlags,
    /// Explicit reference integral.
    pub reference: Option<f64>,
    /// Rule used for the reference integral on non-rectangular domains.
    pub reference_rule: Option<PathBuf>,
    /// Rule used for LS-CF moments on non-rectangular domains.
    pub moment_rule: Option<PathBuf>,
    /// Fill `wall_time_ms`; off by default so output is byte-deterministic.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(function: FunctionSource, method: Method) -> Self {
        Self {
            domain: None,
            points: PointSource::Halton { n: 800, skip: 0 },
            function,
            method,
            degrees: DegreeSweep::default(),
            rule: RuleSpec::Gauss(None),
            flags: MethodFlags::default(),
            reference: None,
            reference_rule: None,
            moment_rule: None,
            timing: false,
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        match (self.domain, &self.function) {
            (Some(d), _) => Ok(d),
            (None, FunctionSource::Test(f)) => Ok(f.domain()),
            (None, FunctionSource::File(_)) => {
                Err(Error::Config("sampled-value input needs --domain".into()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.flags;
        if !(f.mu > 0.0 && f.mu.is_finite()) {
            return Err(Error::Config(format!("mu must be positive, got {}", f.mu)));
        }
        if f.q == Some(0) {
            return Err(Error::Config("q must be at least 1".into()));
        }
        MovingInterpConfig {
            d_max: f.d_max,
            theta: f.theta,
            ..Default::default()
        }
        .validate()?;
        if self.degrees.degrees().len() > 1 && !self.rule.is_templated() {
            return Err(Error::Config(
                "a degree sweep needs --rule gauss or a file path containing {n}".into(),
            ));
        }
        if self.method == Method::Exactf && matches!(self.function, FunctionSource::File(_)) {
            return Err(Error::Config(
                "exactf needs an analytic test function".into(),
            ));
        }
        self.domain().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub method: String,
    pub degree: usize,
    pub nu: Option<usize>,
    pub n_points: usize,
    pub integral: Option<f64>,
    pub reference: f64,
    pub relative_error: Option<f64>,
    pub node_gap_bound: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
}

fn fmt_float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    s.chars()
        .map(|c| {
            if matches!(c, ',' | '\n' | '\r' | '"') {
                ' '
            } else {
                c
            }
        })
        .collect()
}

impl ConvergenceRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.degree,
            self.nu.map(|v| v.to_string()).unwrap_or_default(),
            self.n_points,
            fmt_float(self.integral),
            fmt_float(Some(self.reference)),
            fmt_float(self.relative_error),
            fmt_float(self.node_gap_bound),
            fmt_float(self.wall_time_ms),
            self.error.as_deref().map(csv_text).unwrap_or_default(),
        )
    }
}

pub fn format_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// `|integral - reference| / max(|reference|, machine epsilon)`.
pub fn relative_error(integral: f64, reference: f64) -> f64 {
    (integral - reference).abs() / reference.abs().max(f64::EPSILON)
}

/// Data, integrand and reference, shared by every record of a run.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub domain: Domain,
    pub data: PointSet,
    pub truth: Option<TestFunction>,
    pub reference: f64,
}

impl Experiment {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let domain = cfg.domain()?;
        let (data, truth) = match &cfg.function {
            FunctionSource::Test(f) => {
                let pts = cfg.points.load(&domain)?;
                (pts.sample(|p| f.eval(p))?, Some(*f))
            }
            FunctionSource::File(path) => {
                let rows = numeric_rows(&read_text(path)?, 3)?;
                let data = PointSet::with_values(
                    rows.iter().map(|r| Point2::new(r[0], r[1])).collect(),
                    rows.iter().map(|r| r[2]).collect(),
                )?;
                (filter_to_domain(&data, &domain)?, None)
            }
        };
        let reference = match (cfg.reference, truth) {
            (Some(r), _) => r,
            (None, Some(f)) => match (&domain, &cfg.reference_rule) {
                (_, Some(path)) => load_rule(path)?.apply(|p| f.eval(p)),
                (Domain::Rectangle(r), None) if *r == f.rect() => f.reference_integral(),
                (Domain::Rectangle(r), None) => {
                    gauss_legendre_product(r, REFERENCE_DEGREE).apply(|p| f.eval(p))
                }
                _ => {
                    return Err(Error::Config(
                        "curved domains need --reference or --reference-rule".into(),
                    ))
                }
            },
            (None, None) => {
                return Err(Error::Config(
                    "sampled-value input needs --reference".into(),
                ))
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            domain,
            data,
            truth,
            reference,
        })
    }

    /// Chebyshev basis on the bounding box and its moments over the domain.
    fn chebyshev_moments(&self, n: usize) -> Result<(ChebyshevTensor, Vec<f64>)> {
        let basis = ChebyshevTensor::new(self.domain.bbox(), n);
        let values = match (&self.domain, &self.cfg.moment_rule) {
            (_, Some(path)) => basis_rule_moments(&load_rule(path)?, &basis),
            (Domain::Rectangle(_), None) => chebyshev_moments(&basis),
            _ => {
                return Err(Error::Config(
                    "lscf on a curved domain needs --moment-rule".into(),
                ))
            }
        };
        Ok((basis, values))
    }

    /// Fits the configured method once.
    pub fn fit(&self) -> Result<Fitted> {
        let f = &self.cfg.flags;
        let eps = f.eps_grid.clone().unwrap_or_else(default_epsilon_grid);
        Ok(match self.cfg.method {
            Method::Disc => Fitted::Interpolant(Box::new(MovingInterpolant::new(
                &self.data,
                &self.domain,
                MovingInterpConfig {
                    d_max: f.d_max,
                    theta: f.theta,
                    rank_tol: DEFAULT_RANK_TOL,
                    ..Default::default()
                },
            )?)),
            Method::Mq => {
                Fitted::Interpolant(Box::new(fit_loocv(&self.data, KernelFamily::Mq, &eps)?))
            }
            Method::Pum => {
                let mut cfg = PumConfig {
                    epsilon_grid: eps,
                    ..Default::default()
                };
                if let Some(d) = &f.delta_grid {
                    cfg.delta_multipliers = d.clone();
                }
                Fitted::Interpolant(Box::new(fit_pum(&self.data, &self.domain, &cfg)?))
            }
            Method::Mshep9 => Fitted::Interpolant(Box::new(fit_ms(
                &self.data,
                &MsConfig {
                    degree: f.local_degree.unwrap_or(9),
                    mu: f.mu,
                    q: f.q,
                    rank_tol: DEFAULT_RANK_TOL,
                },
            )?)),
            Method::Lscf => {
                let n = f
                    .local_degree
                    .unwrap_or_else(|| default_lscf_degree(self.data.len()));
                let (basis, moments) = self.chebyshev_moments(n)?;
                let w = lscf_weights_in(&self.data, &basis, &moments)?;
                let value = lscf_integrate(&w, self.data.require_values()?);
                Fitted::Lscf(w, value)
            }
            Method::Exactf => {
                let t = self.truth.expect("validated: exactf has a test function");
                Fitted::Interpolant(Box::new(ExactFunction(move |p| t.eval(p))))
            }
        })
    }

    fn blank_record(&self, degree: usize) -> ConvergenceRecord {
        ConvergenceRecord {
            method: self.cfg.method.name().to_string(),
            degree,
            nu: None,
            n_points: self.data.len(),
            integral: None,
            reference: self.reference,
            relative_error: None,
            node_gap_bound: None,
            wall_time_ms: None,
            error: None,
        }
    }

    /// One record, or the error that prevented it.
    pub fn try_record(
        &self,
        fitted: &Fitted,
        degree: usize,
        fit_ms: f64,
    ) -> Result<ConvergenceRecord> {
        let mut rec = self.blank_record(degree);
        let start = Instant::now();
        let value = match fitted {
            Fitted::Lscf(w, value) => {
                rec.nu = Some(w.points.len());
                *value
            }
            Fitted::Interpolant(psi) => self.resample(psi.as_ref(), degree, &mut rec)?,
        };
        rec.integral = Some(value);
        rec.relative_error = Some(relative_error(value, self.reference));
        if self.cfg.timing {
            rec.wall_time_ms = Some(fit_ms + start.elapsed().as_secs_f64() * 1e3);
        }
        Ok(rec)
    }

    /// As [`Self::try_record`], with failures moved into the error column.
    pub fn record(&self, fitted: &Fitted, degree: usize, fit_ms: f64) -> ConvergenceRecord {
        self.try_record(fitted, degree, fit_ms).unwrap_or_else(|e| {
            let mut rec = self.blank_record(degree);
            rec.error = Some(e.to_string());
            rec
        })
    }

    fn resample(
        &self,
        psi: &dyn Interpolant,
        degree: usize,
        rec: &mut ConvergenceRecord,
    ) -> Result<f64> {
        let rule = self.cfg.rule.rule(&self.domain, degree)?;
        rec.nu = Some(rule.len());
        let truth = self.truth.map(|t| move |p: Point2| t.eval(p));
        let res = approximate_cubature_with_truth(
            &rule,
            psi,
            truth.as_ref().map(|f| f as &(dyn Fn(Point2) -> f64 + Sync)),
        )?;
        if let (Some(bound), Some(t)) = (res.node_bound, self.truth) {
            rec.node_gap_bound = Some(bound);
            let qf = rule.apply(|p| t.eval(p));
            let slack = 1e-14 * rule.weight_l1() * (1.0 + qf.abs());
            if (qf - res.value).abs() > bound + slack {
                return Err(Error::Value(format!(
                    "node gap bound violated: |Q(f) - Q(psi)| = {:e} > {bound:e}",
                    (qf - res.value).abs()
                )));
            }
        }
        Ok(res.value)
    }
}

pub enum Fitted {
    Interpolant(Box<dyn Interpolant>),
    /// Weights and the integral they give; the same for every degree.
    Lscf(LsCfWeights, f64),
}

/// One record per sweep degree, in degree order. A failed fit fills every
/// record's error column; the run itself only fails on bad configuration.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>> {
    let exp = Experiment::prepare(cfg)?;
    let start = Instant::now();
    let fitted = exp.fit();
    let fit_ms = start.elapsed().as_secs_f64() * 1e3;
    let degrees = cfg.degrees.degrees();
    Ok(match fitted {
        Ok(fitted) => degrees
            .par_iter()
            .map(|&n| exp.record(&fitted, n, fit_ms))
            .collect(),
        Err(e) => degrees
            .iter()
            .map(|&n| {
                let mut rec = exp.blank_record(n);
                rec.error = Some(e.to_string());
                rec
            })
            .collect(),
    })
}

/// Single-degree run; errors are returned rather than recorded. The degree
/// comes from `gauss:<n>`, from an untemplated rule file's header, or from
/// `degree`.
pub fn integrate_once(cfg: &ExperimentConfig, degree: Option<usize>) -> Result<ConvergenceRecord> {
    let degree = match (&cfg.rule, degree) {
        (RuleSpec::Gauss(Some(n)), _) => *n,
        (RuleSpec::File(p), None) if !p.contains("{n}") => read_rule(Path::new(p))?.degree,
        (_, Some(n)) => n,
        _ => {
            return Err(Error::Config(
                "the rule degree is not determined; pass --degree".into(),
            ))
        }
    };
    let mut cfg = cfg.clone();
    cfg.degrees = DegreeSweep {
        start: degree,
        step: 1,
        stop: degree,
    };
    let exp = Experiment::prepare(&cfg)?;
    let start = Instant::now();
    let fitted = exp.fit()?;
    exp.try_record(&fitted, degree, start.elapsed().as_secs_f64() * 1e3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleCheck {
    pub degree: usize,
    pub count: usize,
    pub positivity: bool,
    pub interiority: Option<bool>,
    /// Only available on rectangles.
    pub max_relative_moment_residual: Option<f64>,
}

impl RuleCheck {
    pub fn passed(&self) -> bool {
        self.positivity
            && self.interiority != Some(false)
            && self
                .max_relative_moment_residual
                .is_none_or(|r| r <= RULECHECK_TOL)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let flag = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_else(|| "unknown".into());
        writeln!(s, "degree {}", self.degree).unwrap();
        writeln!(s, "count {}", self.count).unwrap();
        writeln!(s, "positivity {}", self.positivity).unwrap();
        writeln!(s, "interiority {}", flag(self.interiority)).unwrap();
        match self.max_relative_moment_residual {
            Some(r) => writeln!(s, "max_moment_residual {r:.3e}").unwrap(),
            None => writeln!(s, "max_moment_residual unavailable").unwrap(),
        }
        writeln!(s, "status {}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

/// Validates a rule file. The domain comes from the file, else `domain`.
pub fn rulecheck(path: &Path, domain: Option<Domain>) -> Result<RuleCheck> {
    let mut rule = read_rule(path)?;
    if rule.domain.is_none() {
        rule.domain = domain;
    }
    let report: RuleReport = match rule.domain {
        Some(Domain::Rectangle(r)) => {
            let basis = ScaledMonomials::new(r.center(), r.half_diagonal(), rule.degree);
            validate_rule(&rule, &scaled_moments(&r, basis))
        }
        _ => {
            let basis = ScaledMonomials::new(Point2::new(0.0, 0.0), 1.0, 0);
            let trivial = MomentVector {
                basis,
                values: vec![rule.weights.iter().sum()],
            };
            let mut rep = validate_rule(&rule, &trivial);
            rep.max_relative_moment_residual = f64::NAN;
            rep
        }
    };
    let rect = matches!(rule.domain, Some(Domain::Rectangle(_)));
    Ok(RuleCheck {
        degree: rule.degree,
        count: rule.len(),
        positivity: report.positivity,
        interiority: report.interiority,
        max_relative_moment_residual: rect.then_some(report.max_relative_moment_residual),
    })
}

/// Halton points inside the domain as `x y` lines.
pub fn points_text(source: &PointSource, domain: &Domain) -> Result<String> {
    let pts = source.load(domain)?;
    let mut s = String::new();
    for p in pts.points() {
        writeln!(s, "{:.16e} {:.16e}", p.x, p.y).unwrap();
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseRow {
    pub point: Point2,
    pub boundary_distance: f64,
    pub error: f64,
    pub estimate: f64,
}

/// Test points for the pointwise study; the Halton indices are far past any
/// data set used here, so they never coincide with data points.
pub fn pointwise_test_points(domain: &Domain) -> Result<PointSet> {
    filter_to_domain(&map_to_bbox(&halton(100, 10_000)?, domain), domain)
}

/// Moving interpolation errors and estimates at the test points, ordered by
/// increasing distance from the boundary.
pub fn pointwise(
    function: TestFunction,
    points: &PointSource,
    cfg: MovingInterpConfig,
) -> Result<Vec<PointwiseRow>> {
    let domain = function.domain();
    let data = points.load(&domain)?.sample(|p| function.eval(p))?;
    let interp = MovingInterpolant::new(&data, &domain, cfg)?;
    let tests = pointwise_test_points(&domain)?;
    let mut rows: Vec<PointwiseRow> = tests
        .points()
        .par_iter()
        .map(|&p| {
            let ev = interp.evaluate(p)?;
            Ok(PointwiseRow {
                point: p,
                boundary_distance: domain.boundary_distance(p),
                error: (ev.value - function.eval(p)).abs(),
                estimate: ev.estimate,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.boundary_distance.total_cmp(&b.boundary_distance));
    Ok(rows)
}

pub fn format_pointwise(rows: &[PointwiseRow]) -> String {
    let n = rows.len().max(1) as f64;
    let mean_err = rows.iter().map(|r| r.error).sum::<f64>() / n;
    let mean_est = rows.iter().map(|r| r.estimate).sum::<f64>() / n;
    let mut s = String::from(POINTWISE_HEADER);
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            s,
            "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{mean_err:.16e},{mean_est:.16e}",
            r.point.x, r.point.y, r.boundary_distance, r.error, r.estimate
        )
        .unwrap();
    }
    s
}
