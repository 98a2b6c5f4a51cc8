//! Adaptive moving polynomial interpolation.
//!
//! For an evaluation point `pbar` and each candidate degree `d`, the radius
//! `h_d` is the distance to the `ceil(theta * m_d)`-th nearest data point in
//! the domain. Discrete Leja points are extracted from the data in
//! `B(pbar, h_d)`, and the nested interpolants of degree `0..=d` are
//! evaluated at `pbar` from one factorization. The successive difference
//! `|p_d - p_{d-1}|` serves as the error estimate, and the degree with the
//! smallest estimate wins.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, PointSet};
use crate::poly::{dim, leja_select, DEFAULT_RANK_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    /// `|p_d(pbar) - p_{d-1}(pbar)|`
    SuccessiveDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingInterpConfig {
    pub d_max: usize,
    /// Oversampling factor: the neighborhood for degree `d` holds at least
    /// `theta * m_d` points.
    pub theta: f64,
    pub rank_tol: f64,
    pub estimate_mode: EstimateMode,
}

impl Default for MovingInterpConfig {
    fn default() -> Self {
        Self {
            d_max: 10,
            theta: 2.0,
            rank_tol: DEFAULT_RANK_TOL,
            estimate_mode: EstimateMode::SuccessiveDifference,
        }
    }
}

impl MovingInterpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_max < 1 {
            return Err(Error::Config("d_max must be at least 1".into()));
        }
        if !(self.theta >= 1.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!(
                "theta must be >= 1, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingEvaluation {
    pub value: f64,
    pub estimate: f64,
    pub chosen_degree: usize,
    pub chosen_radius: f64,
    /// Lebesgue value at the center for the chosen local interpolant.
    pub lambda: f64,
}

/// Scattered data restricted to a domain, ready for moving evaluation.
#[derive(Clone, Debug)]
pub struct MovingInterpolant {
    points: Vec<Point2>,
    values: Vec<f64>,
    domain: Domain,
    cfg: MovingInterpConfig,
}

impl MovingInterpolant {
    pub fn new(data: &PointSet, domain: &Domain, cfg: MovingInterpConfig) -> Result<Self> {
        cfg.validate()?;
        let values = data.require_values()?;
        let (points, values): (Vec<Point2>, Vec<f64>) = data
            .points()
            .iter()
            .zip(values)
            .filter(|(&p, _)| domain.contains(p))
            .map(|(&p, &v)| (p, v))
            .unzip();
        if points.len() < dim(1) {
            return Err(Error::InsufficientData {
                needed: dim(1),
                got: points.len(),
            });
        }
        Ok(Self {
            points,
            values,
            domain: *domain,
            cfg,
        })
    }

    pub fn config(&self) -> &MovingInterpConfig {
        &self.cfg
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Data indices sorted by distance from `pbar` (ties by index), with the
    /// squared distances.
    fn by_distance(&self, pbar: Point2) -> (Vec<usize>, Vec<f64>) {
        let d2: Vec<f64> = self.points.iter().map(|p| p.dist2(pbar)).collect();
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| d2[a].total_cmp(&d2[b]).then(a.cmp(&b)));
        (order, d2)
    }

    pub fn evaluate(&self, pbar: Point2) -> Result<MovingEvaluation> {
        let n = self.points.len();
        let (order, d2) = self.by_distance(pbar);
        let mut best: Option<MovingEvaluation> = None;
        let mut last_err = None;

        for d in 1..=self.cfg.d_max {
            let k = (self.cfg.theta * dim(d) as f64).ceil() as usize;
            if k > n {
                break;
            }
            let h2 = d2[order[k - 1]];
            let count = k + order[k..].iter().take_while(|&&i| d2[i] <= h2).count();
            let h = h2.sqrt();
            let cand: Vec<Point2> = order[..count].iter().map(|&i| self.points[i]).collect();
            let seq = match leja_select(&cand, pbar, h, d, self.cfg.rank_tol) {
                Ok(s) => s,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let f: Vec<f64> = seq
                .selected()
                .iter()
                .map(|&c| self.values[order[c]])
                .collect();
            let nested = seq.nested_center_values(&f);
            let estimate = match self.cfg.estimate_mode {
                EstimateMode::SuccessiveDifference => (nested[d] - nested[d - 1]).abs(),
            };
            if best.is_none_or(|b| estimate < b.estimate) {
                best = Some(MovingEvaluation {
                    value: nested[d],
                    estimate,
                    chosen_degree: d,
                    chosen_radius: h,
                    lambda: seq.lebesgue_at_center(d),
                });
            }
        }
        best.ok_or_else(|| {
            last_err.unwrap_or(Error::InsufficientData {
                needed: (self.cfg.theta * dim(1) as f64).ceil() as usize,
                got: n,
            })
        })
    }

    /// Degree-`d` interpolant at `pbar` on the Leja points extracted from all
    /// data in the closed ball of radius `h`. Returns the value and the
    /// Lebesgue value at the center.
    pub fn evaluate_at_radius(&self, pbar: Point2, d: usize, h: f64) -> Result<(f64, f64)> {
        let (cand, vals): (Vec<Point2>, Vec<f64>) = self
            .points
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| p.dist2(pbar) <= h * h)
            .map(|(&p, &v)| (p, v))
            .unzip();
        let seq = leja_select(&cand, pbar, h, d, self.cfg.rank_tol)?;
        let f: Vec<f64> = seq.selected().iter().map(|&c| vals[c]).collect();
        Ok((seq.nested_center_values(&f)[d], seq.lebesgue_at_center(d)))
    }
}

/// One-shot moving evaluation.
pub fn evaluate_moving(
    data: &PointSet,
    domain: &Domain,
    pbar: Point2,
    cfg: MovingInterpConfig,
) -> Result<MovingEvaluation> {
    MovingInterpolant::new(data, domain, cfg)?.evaluate(pbar)
}

/// Right-hand side of the pointwise error bound
/// `lambda * 2^d / (d-1)! * seminorm * h^(d+1)`.
pub fn pointwise_bound(lambda: f64, lipschitz_seminorm: f64, h: f64, d: usize) -> f64 {
    assert!(d >= 1, "the bound needs d >= 1");
    let fact: f64 = (1..d).map(|k| k as f64).product();
    lambda * 2f64.powi(d as i32) / fact * lipschitz_seminorm * h.powi(d as i32 + 1)
}
