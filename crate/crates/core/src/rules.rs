//! Positive-interior cubature rules: tensor Gauss-Legendre on rectangles,
//! a plain-text rule file format, monomial moments and rule validation.
//!
//! Rule file layout:
//!
//! ```text
//! # comments may appear anywhere
//! dim 2
//! degree <n>
//! count <nu>
//! domain <spec>        (optional)
//! x y w                (nu lines)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, Rect};
use crate::poly::{dim, multi_indices, ChebyshevTensor, PolyBasis, ScaledMonomials};

#[derive(Clone, Debug, PartialEq)]
pub struct CubatureRule {
    pub nodes: Vec<Point2>,
    pub weights: Vec<f64>,
    pub degree: usize,
    /// Region the rule integrates over; rule files may omit it.
    pub domain: Option<Domain>,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_l1(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `sum_k w_k f(node_k)`, summed in node order.
    pub fn apply(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre_1d(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let half = q.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // z runs from the right end inward
        x[q - 1 - i] = z;
        x[i] = -z;
        w[q - 1 - i] = wi;
        w[i] = wi;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor Gauss-Legendre rule exact for total degree `n` on `rect`.
pub fn gauss_legendre_product(rect: &Rect, n: usize) -> CubatureRule {
    let q = (n + 2) / 2;
    let (x, w) = gauss_legendre_1d(q);
    let (hx, hy) = (0.5 * rect.width(), 0.5 * rect.height());
    let c = rect.center();
    let mut nodes = Vec::with_capacity(q * q);
    let mut weights = Vec::with_capacity(q * q);
    for i in 0..q {
        for j in 0..q {
            nodes.push(Point2::new(c.x + hx * x[i], c.y + hy * x[j]));
            weights.push(hx * hy * w[i] * w[j]);
        }
    }
    CubatureRule {
        nodes,
        weights,
        degree: n,
        domain: Some(Domain::Rectangle(*rect)),
    }
}

/// Integrals of a graded polynomial basis over a region.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub basis: ScaledMonomials,
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn degree(&self) -> usize {
        self.basis.degree
    }
}

/// `int_rect x^a y^b` for all `a + b <= d`.
pub fn monomial_moments(rect: &Rect, d: usize) -> MomentVector {
    scaled_moments(rect, ScaledMonomials::new(Point2::new(0.0, 0.0), 1.0, d))
}

/// Analytic moments of a scaled-centered monomial basis over a rectangle.
pub fn scaled_moments(rect: &Rect, basis: ScaledMonomials) -> MomentVector {
    let d = basis.degree;
    let s = basis.scale;
    let (lx, ux) = (
        (rect.ax - basis.center.x) / s,
        (rect.bx - basis.center.x) / s,
    );
    let (ly, uy) = (
        (rect.ay - basis.center.y) / s,
        (rect.by - basis.center.y) / s,
    );
    let power_integral =
        |lo: f64, hi: f64, a: i32| s * (hi.powi(a + 1) - lo.powi(a + 1)) / (a + 1) as f64;
    let values = multi_indices(d)
        .iter()
        .map(|(a, b)| power_integral(lx, ux, a as i32) * power_integral(ly, uy, b as i32))
        .collect();
    MomentVector { basis, values }
}

/// Moments obtained by applying a (high degree) rule to the basis.
pub fn rule_moments(rule: &CubatureRule, basis: ScaledMonomials) -> MomentVector {
    MomentVector {
        values: basis_rule_moments(rule, &basis),
        basis,
    }
}

/// The rule applied to every element of `basis`.
pub fn basis_rule_moments(rule: &CubatureRule, basis: &dyn PolyBasis) -> Vec<f64> {
    let m = dim(basis.degree());
    let mut values = vec![0.0; m];
    let mut row = vec![0.0; m];
    for (&p, &w) in rule.nodes.iter().zip(&rule.weights) {
        basis.fill_row(p, &mut row);
        for (acc, r) in values.iter_mut().zip(&row) {
            *acc += w * r;
        }
    }
    values
}

/// Analytic moments of [`ChebyshevTensor`] over its own rectangle.
pub fn chebyshev_moments(basis: &ChebyshevTensor) -> Vec<f64> {
    // int_{-1}^{1} T_k = 2 / (1 - k^2) for even k, 0 for odd k
    let t_integral = |k: u32| {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (1.0 - (k as f64) * (k as f64))
        }
    };
    let jac = basis.rect.width() * basis.rect.height() / 4.0;
    multi_indices(basis.degree)
        .iter()
        .map(|(a, b)| jac * t_integral(a) * t_integral(b))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleReport {
    pub max_relative_moment_residual: f64,
    pub positivity: bool,
    /// `None` when the rule carries no domain.
    pub interiority: Option<bool>,
}

impl RuleReport {
    pub fn is_pi(&self) -> bool {
        self.positivity && self.interiority.unwrap_or(true)
    }
}

/// Checks the rule against every entry of `moments`, plus the positive
/// weight and interior node conditions.
pub fn validate_rule(rule: &CubatureRule, moments: &MomentVector) -> RuleReport {
    let applied = rule_moments(rule, moments.basis);
    let residual = applied
        .values
        .iter()
        .zip(&moments.values)
        .map(|(q, m)| (q - m).abs() / (1.0 + m.abs()))
        .fold(0.0, f64::max);
    RuleReport {
        max_relative_moment_residual: residual,
        positivity: rule.weights.iter().all(|&w| w > 0.0),
        interiority: rule
            .domain
            .map(|d| rule.nodes.iter().all(|&p| d.contains(p))),
    }
}

/// Serializes a rule with 17 significant digits per number.
pub fn format_rule(rule: &CubatureRule) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# cubature rule");
    let _ = writeln!(s, "dim 2");
    let _ = writeln!(s, "degree {}", rule.degree);
    let _ = writeln!(s, "count {}", rule.len());
    if let Some(d) = &rule.domain {
        let _ = writeln!(s, "domain {d}");
    }
    for (p, w) in rule.nodes.iter().zip(&rule.weights) {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, w);
    }
    s
}

pub fn save_rule(rule: &CubatureRule, path: &Path) -> Result<()> {
    std::fs::write(path, format_rule(rule)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_row(ln: usize, line: &str, width: usize) -> Result<Vec<f64>> {
    let fields = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_err(ln, format!("bad number '{t}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if fields.len() != width {
        return Err(parse_err(
            ln,
            format!("expected {width} fields, found {}", fields.len()),
        ));
    }
    if let Some(v) = fields.iter().find(|v| !v.is_finite()) {
        return Err(Error::Value(format!("non-finite number {v} on line {ln}")));
    }
    Ok(fields)
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn significant_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Parses rows of `width` whitespace-separated decimals, skipping blanks
/// and `#` comments.
pub(crate) fn numeric_rows(text: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    significant_lines(text)
        .into_iter()
        .map(|(ln, line)| parse_row(ln, line, width))
        .collect()
}

/// Structural parse of a rule file; weights are not checked for sign.
pub fn parse_rule(text: &str) -> Result<CubatureRule> {
    let lines = significant_lines(text);
    let header = |idx: usize, key: &str| -> Result<usize> {
        let &(ln, line) = lines
            .get(idx)
            .ok_or_else(|| parse_err(0, format!("missing '{key}' header")))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return Err(parse_err(ln, format!("expected '{key} <value>'")));
        }
        let v = it
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| parse_err(ln, format!("'{key}' needs a nonnegative integer")))?;
        if it.next().is_some() {
            return Err(parse_err(ln, format!("trailing fields after '{key}'")));
        }
        Ok(v)
    };
    let dimension = header(0, "dim")?;
    let degree = header(1, "degree")?;
    let count = header(2, "count")?;
    if dimension != 2 {
        return Err(parse_err(
            lines[0].0,
            format!("only dim 2 is supported, got {dimension}"),
        ));
    }

    let mut body = &lines[3..];
    let mut domain = None;
    if let Some(&(ln, line)) = body.first() {
        if let Some(spec) = line.strip_prefix("domain") {
            let d = spec
                .trim()
                .parse::<Domain>()
                .map_err(|e| parse_err(ln, e.to_string()))?;
            domain = Some(d);
            body = &body[1..];
        }
    }
    if body.len() != count {
        return Err(parse_err(
            0,
            format!("count says {count} nodes, found {}", body.len()),
        ));
    }
    if count == 0 {
        return Err(parse_err(0, "rule has no nodes"));
    }
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for &(ln, line) in body {
        let r = parse_row(ln, line, 3)?;
        nodes.push(Point2::new(r[0], r[1]));
        weights.push(r[2]);
    }
    Ok(CubatureRule {
        nodes,
        weights,
        degree,
        domain,
    })
}

/// Reads a rule file without enforcing positivity.
pub fn read_rule(path: &Path) -> Result<CubatureRule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_rule(&text)
}

/// Reads a rule file and rejects nonpositive weights.
pub fn load_rule(path: &Path) -> Result<CubatureRule> {
    let rule = read_rule(path)?;
    if let Some((k, w)) = rule.weights.iter().enumerate().find(|(_, &w)| w <= 0.0) {
        return Err(Error::Value(format!("weight {k} is not positive ({w})")));
    }
    Ok(rule)
}
