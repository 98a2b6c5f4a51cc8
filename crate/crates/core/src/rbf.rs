//! Global radial basis function interpolation with leave-one-out shape
//! parameter selection (Rippa's rule).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point2, PointSet};

/// Condition number above which a fit is flagged as ill-conditioned.
pub const ILL_CONDITIONED_THRESHOLD: f64 = 1e16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// Gaussian `exp(-(eps r)^2)`
    Ga,
    /// Inverse multiquadric `(1 + (eps r)^2)^(-1/2)`
    Imq,
    /// Multiquadric `(1 + (eps r)^2)^(1/2)`, conditionally positive definite of order 1
    Mq,
    /// Wendland C2 `max(1 - eps r, 0)^4 (4 eps r + 1)`
    W2,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [Self::Ga, Self::Imq, Self::Mq, Self::W2];

    /// Order of conditional positive definiteness.
    pub fn cpd_order(self) -> usize {
        match self {
            Self::Mq => 1,
            _ => 0,
        }
    }

    /// Dimension of the polynomial tail in two variables.
    pub fn tail_len(self) -> usize {
        match self.cpd_order() {
            0 => 0,
            m => crate::poly::dim(m - 1),
        }
    }

    pub fn is_spd(self) -> bool {
        self.cpd_order() == 0
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Self::Ga),
            "imq" => Ok(Self::Imq),
            "mq" => Ok(Self::Mq),
            "w2" => Ok(Self::W2),
            _ => Err(Error::Config(format!("unknown kernel '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Value(format!(
                "shape parameter must be positive, got {epsilon}"
            )));
        }
        Ok(Self { family, epsilon })
    }

    pub fn eval(&self, r: f64) -> f64 {
        kernel_eval(self, r)
    }
}

pub fn kernel_eval(spec: &KernelSpec, r: f64) -> f64 {
    let er = spec.epsilon * r;
    match spec.family {
        KernelFamily::Ga => (-er * er).exp(),
        KernelFamily::Imq => 1.0 / (1.0 + er * er).sqrt(),
        KernelFamily::Mq => (1.0 + er * er).sqrt(),
        KernelFamily::W2 => {
            let t = (1.0 - er).max(0.0);
            let t2 = t * t;
            t2 * t2 * (4.0 * er + 1.0)
        }
    }
}

/// `n` logarithmically spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// 50 log-spaced shape parameters in `[1e-2, 1e2]`.
pub fn default_epsilon_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 50)
}

#[derive(Clone, Debug)]
pub struct RbfInterpolant {
    spec: KernelSpec,
    centers: Vec<Point2>,
    /// Kernel coefficients followed by the polynomial tail.
    coefficients: Vec<f64>,
    inverse_diagonal: Vec<f64>,
    condition_estimate: f64,
}

impl RbfInterpolant {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn centers(&self) -> &[Point2] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Diagonal of the inverse interpolation matrix, first `N` entries.
    pub fn inverse_diagonal(&self) -> &[f64] {
        &self.inverse_diagonal
    }

    /// 1-norm condition number of the interpolation matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn ill_conditioned(&self) -> bool {
        !(self.condition_estimate <= ILL_CONDITIONED_THRESHOLD)
    }

    pub fn eval(&self, p: Point2) -> f64 {
        let n = self.centers.len();
        let mut s: f64 = self
            .centers
            .iter()
            .zip(&self.coefficients[..n])
            .map(|(c, a)| a * self.spec.eval(p.dist(*c)))
            .sum();
        if self.spec.family.tail_len() == 1 {
            s += self.coefficients[n];
        }
        s
    }
}

fn matrix_norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the (augmented) interpolation system for the given centers and
/// values, returning coefficients, the inverse diagonal and the condition
/// number.
pub(crate) fn solve_system(
    centers: &[Point2],
    values: &[f64],
    spec: &KernelSpec,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = centers.len();
    let tail = spec.family.tail_len();
    let size = n + tail;
    let mut m = DMatrix::zeros(size, size);
    for i in 0..n {
        m[(i, i)] = spec.eval(0.0);
        for j in 0..i {
            let v = spec.eval(centers[i].dist(centers[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    if tail == 1 {
        for i in 0..n {
            m[(i, n)] = 1.0;
            m[(n, i)] = 1.0;
        }
    }
    let norm = matrix_norm1(&m);
    let mut rhs = DVector::zeros(size);
    rhs.as_mut_slice()[..n].copy_from_slice(values);
    // SPD kernels go through Cholesky when it succeeds; LU otherwise.
    let chol = if tail == 0 {
        m.clone().cholesky()
    } else {
        None
    };
    let (inv, c) = match chol {
        Some(ch) => (ch.inverse(), ch.solve(&rhs)),
        None => {
            let lu = m.lu();
            let inv = lu.try_inverse().ok_or(Error::Singular)?;
            let c = lu.solve(&rhs).ok_or(Error::Singular)?;
            (inv, c)
        }
    };
    let cond = norm * matrix_norm1(&inv);
    if !cond.is_finite() {
        return Err(Error::Singular);
    }
    let diag = (0..n).map(|k| inv[(k, k)]).collect();
    Ok((c.as_slice().to_vec(), diag, cond))
}

/// Largest node residual of a solved system, scaled by `1 + |f_k|`.
pub(crate) fn max_scaled_residual(
    centers: &[Point2],
    values: &[f64],
    spec: &KernelSpec,
    coefficients: &[f64],
) -> f64 {
    let n = centers.len();
    let tail = if spec.family.tail_len() == 1 {
        coefficients[n]
    } else {
        0.0
    };
    centers
        .iter()
        .zip(values)
        .map(|(p, f)| {
            let s: f64 = centers
                .iter()
                .zip(&coefficients[..n])
                .map(|(c, a)| a * spec.eval(p.dist(*c)))
                .sum();
            (s + tail - f).abs() / (1.0 + f.abs())
        })
        .fold(0.0, f64::max)
}

/// Fits the global interpolant. Ill-conditioned systems are solved anyway and
/// flagged through [`RbfInterpolant::ill_conditioned`].
pub fn fit_global(data: &PointSet, spec: KernelSpec) -> Result<RbfInterpolant> {
    let values = data.require_values()?;
    let (coefficients, inverse_diagonal, condition_estimate) =
        solve_system(data.points(), values, &spec)?;
    Ok(RbfInterpolant {
        spec,
        centers: data.points().to_vec(),
        coefficients,
        inverse_diagonal,
        condition_estimate,
    })
}

/// Leave-one-out errors `e_k = c_k / (M^-1)_kk`.
pub fn rippa_errors(fit: &RbfInterpolant) -> Result<Vec<f64>> {
    rippa_from_parts(&fit.coefficients, &fit.inverse_diagonal)
}

pub(crate) fn rippa_from_parts(coefficients: &[f64], inverse_diagonal: &[f64]) -> Result<Vec<f64>> {
    inverse_diagonal
        .iter()
        .zip(coefficients)
        .enumerate()
        .map(|(k, (&d, &c))| {
            if !(d.abs() >= 1e-30) {
                Err(Error::DegenerateDiagonal { index: k, value: d })
            } else {
                Ok(c / d)
            }
        })
        .collect()
}

/// Maximum-norm LOOCV cost.
pub fn loocv_cost(errors: &[f64]) -> f64 {
    assert!(!errors.is_empty());
    errors.iter().fold(0.0, |m, e| m.max(e.abs()))
}

#[derive(Clone, Debug)]
pub struct EpsilonSelection {
    pub epsilon: f64,
    /// `(epsilon, cost)` per grid value; failed fits carry an infinite cost.
    pub cost_curve: Vec<(f64, f64)>,
}

/// Minimizes the LOOCV cost over a strictly increasing grid.
pub fn select_epsilon(
    data: &PointSet,
    family: KernelFamily,
    grid: &[f64],
) -> Result<EpsilonSelection> {
    if grid.is_empty() {
        return Err(Error::Config("epsilon grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] <= 0.0 {
        return Err(Error::Config(
            "epsilon grid must be positive and strictly increasing".into(),
        ));
    }
    let costs: Vec<f64> = grid
        .par_iter()
        .map(|&eps| {
            KernelSpec::new(family, eps)
                .and_then(|spec| fit_global(data, spec))
                .and_then(|fit| rippa_errors(&fit))
                .map(|e| loocv_cost(&e))
                .ok()
                .filter(|c| c.is_finite())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for (&eps, &cost) in grid.iter().zip(&costs) {
        if cost.is_finite() && best.is_none_or(|(_, c)| cost < c) {
            best = Some((eps, cost));
        }
    }
    let (epsilon, _) = best.ok_or(Error::AllCandidatesFailed)?;
    Ok(EpsilonSelection {
        epsilon,
        cost_curve: grid.iter().copied().zip(costs).collect(),
    })
}

/// LOOCV-tuned global fit.
pub fn fit_loocv(data: &PointSet, family: KernelFamily, grid: &[f64]) -> Result<RbfInterpolant> {
    let sel = select_epsilon(data, family, grid)?;
    fit_global(data, KernelSpec::new(family, sel.epsilon)?)
}
