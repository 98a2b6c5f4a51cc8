//! Resampled cubature `Q_n(Psi) = sum_k w_k Psi(Xi_k)`, the node gap bound,
//! and the least-squares moment-matching baseline.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point2, PointSet};
use crate::moving::MovingInterpolant;
use crate::mshep::MsInterpolant;
use crate::poly::{dim, PolyBasis, ScaledMonomials, DEFAULT_RANK_TOL};
use crate::pum::PumInterpolant;
use crate::rbf::RbfInterpolant;
use crate::rules::{CubatureRule, MomentVector};

/// Anything that can stand in for the integrand at the rule nodes.
pub trait Interpolant: Send + Sync {
    fn eval(&self, p: Point2) -> Result<f64>;

    /// Short tag used in reports.
    fn method(&self) -> &str;
}

impl Interpolant for MovingInterpolant {
    fn eval(&self, p: Point2) -> Result<f64> {
        Ok(self.evaluate(p)?.value)
    }
    fn method(&self) -> &str {
        "moving"
    }
}

impl Interpolant for RbfInterpolant {
    fn eval(&self, p: Point2) -> Result<f64> {
        Ok(RbfInterpolant::eval(self, p))
    }
    fn method(&self) -> &str {
        "rbf"
    }
}

impl Interpolant for PumInterpolant {
    fn eval(&self, p: Point2) -> Result<f64> {
        PumInterpolant::eval(self, p)
    }
    fn method(&self) -> &str {
        "pum"
    }
}

impl Interpolant for MsInterpolant {
    fn eval(&self, p: Point2) -> Result<f64> {
        Ok(MsInterpolant::eval(self, p))
    }
    fn method(&self) -> &str {
        "mshep"
    }
}

/// The true integrand, for the exact-evaluation baseline.
pub struct ExactFunction<F>(pub F);

impl<F: Fn(Point2) -> f64 + Send + Sync> Interpolant for ExactFunction<F> {
    fn eval(&self, p: Point2) -> Result<f64> {
        Ok((self.0)(p))
    }
    fn method(&self) -> &str {
        "exactf"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubatureResult {
    pub value: f64,
    pub rule_degree: usize,
    pub nu: usize,
    pub method: String,
    /// `||w||_1 * max_k |f(Xi_k) - Psi(Xi_k)|`, when the true integrand is known.
    pub node_bound: Option<f64>,
    pub wall_time: Duration,
}

fn eval_nodes(nodes: &[Point2], psi: &dyn Interpolant) -> Result<Vec<f64>> {
    nodes
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            psi.eval(p).map_err(|e| Error::NodeEvaluation {
                index: k,
                source: Box::new(e),
            })
        })
        .collect()
}

fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(&w, &v)| w * v).sum()
}

/// Applies the rule to the interpolant. Node values are computed in parallel
/// and summed in index order, so the result is deterministic.
pub fn approximate_cubature(rule: &CubatureRule, psi: &dyn Interpolant) -> Result<CubatureResult> {
    approximate_cubature_with_truth(rule, psi, None)
}

/// As [`approximate_cubature`], also filling in the node gap bound from the
/// true integrand.
pub fn approximate_cubature_with_truth(
    rule: &CubatureRule,
    psi: &dyn Interpolant,
    truth: Option<&(dyn Fn(Point2) -> f64 + Sync)>,
) -> Result<CubatureResult> {
    let start = Instant::now();
    let psi_vals = eval_nodes(&rule.nodes, psi)?;
    let value = weighted_sum(&rule.weights, &psi_vals);
    let node_bound = truth.map(|f| {
        let f_vals: Vec<f64> = rule.nodes.iter().map(|&p| f(p)).collect();
        cubature_gap_bound(rule, &f_vals, &psi_vals)
    });
    Ok(CubatureResult {
        value,
        rule_degree: rule.degree,
        nu: rule.len(),
        method: psi.method().to_string(),
        node_bound,
        wall_time: start.elapsed(),
    })
}

/// `||w||_1 * max_k |f_k - psi_k|`, an upper bound on `|Q(f) - Q(psi)|`.
pub fn cubature_gap_bound(rule: &CubatureRule, f_at_nodes: &[f64], psi_at_nodes: &[f64]) -> f64 {
    assert_eq!(f_at_nodes.len(), rule.len());
    assert_eq!(psi_at_nodes.len(), rule.len());
    let gap = f_at_nodes
        .iter()
        .zip(psi_at_nodes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rule.weight_l1() * gap
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsCfWeights {
    pub points: PointSet,
    pub degree: usize,
    pub weights: Vec<f64>,
    /// Largest absolute moment mismatch `|V^T w - m|`.
    pub moment_residual: f64,
}

/// Largest `n` with `m_n <= N / 2`.
pub fn default_lscf_degree(n_points: usize) -> usize {
    let mut n = 0;
    while dim(n + 1) <= n_points / 2 {
        n += 1;
    }
    n
}

/// Minimum 2-norm weights matching the first `m_n` moments, in the
/// scaled monomial basis the moments were computed in.
pub fn lscf_weights(points: &PointSet, moments: &MomentVector, n: usize) -> Result<LsCfWeights> {
    if n > moments.degree() {
        return Err(Error::Config(format!(
            "moments of degree {} cannot support degree {n}",
            moments.degree()
        )));
    }
    let basis = ScaledMonomials::new(moments.basis.center, moments.basis.scale, n);
    lscf_weights_in(points, &basis, &moments.values)
}

/// Minimum 2-norm solution of `V^T w = m`, where `V` is the Vandermonde
/// matrix of `basis` at the points and `m` the leading entries of
/// `moments`. The solution does not depend on the basis, only the
/// conditioning does. With `V = QR` (thin), `w = Q R^{-T} m`.
pub fn lscf_weights_in(
    points: &PointSet,
    basis: &dyn PolyBasis,
    moments: &[f64],
) -> Result<LsCfWeights> {
    let n = basis.degree();
    let m = dim(n);
    if moments.len() < m {
        return Err(Error::Config(format!(
            "need {m} moments, got {}",
            moments.len()
        )));
    }
    if points.len() < m {
        return Err(Error::InsufficientData {
            needed: m,
            got: points.len(),
        });
    }
    let v = basis.matrix(points.points());
    let target = DVector::from_column_slice(&moments[..m]);

    let qr = v.clone().qr();
    let r = qr.r();
    let largest = r.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for k in 0..m {
        if !(r[(k, k)].abs() > DEFAULT_RANK_TOL * largest) {
            return Err(Error::RankDeficient { step: k + 1 });
        }
    }
    let y = r
        .transpose()
        .solve_lower_triangular(&target)
        .ok_or(Error::Singular)?;
    let w = qr.q() * y;
    let residual = (v.transpose() * &w - &target).amax();
    Ok(LsCfWeights {
        points: points.clone(),
        degree: n,
        weights: w.as_slice().to_vec(),
        moment_residual: residual,
    })
}

pub fn lscf_integrate(weights: &LsCfWeights, values: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.weights.len());
    weighted_sum(&weights.weights, values)
}
