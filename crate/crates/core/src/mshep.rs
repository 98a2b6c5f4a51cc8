//! Multinode Shepard interpolation.
//!
//! Every data point seeds a unisolvent subset of `m_d` points chosen by
//! discrete Leja selection among its nearest neighbors. Each subset carries
//! its local interpolating polynomial, and the polynomials are blended with
//! normalized inverse-distance-product weights.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point2, PointSet};
use crate::poly::{dim, leja_select, ScaledMonomials, DEFAULT_RANK_TOL};

const MAX_DOUBLINGS: usize = 4;

/// Smallest admissible exponent is strictly above `(s + d + 1) / m_d`.
pub fn mu_threshold(s: usize, d: usize) -> f64 {
    assert_eq!(s, 2, "only the planar case is implemented");
    (s + d + 1) as f64 / dim(d) as f64
}

#[derive(Clone, Debug)]
pub struct ShepardCover {
    degree: usize,
    points: Vec<Point2>,
    subsets: Vec<Vec<usize>>,
    barycenters: Vec<Point2>,
    local_scales: Vec<f64>,
    node_tol: f64,
}

impl ShepardCover {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn barycenters(&self) -> &[Point2] {
        &self.barycenters
    }

    pub fn local_scales(&self) -> &[f64] {
        &self.local_scales
    }

    pub fn node_tol(&self) -> f64 {
        self.node_tol
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Index of a data point within `node_tol` of `p`, if any.
    pub fn node_hit(&self, p: Point2) -> Option<usize> {
        let tol2 = self.node_tol * self.node_tol;
        self.points
            .iter()
            .enumerate()
            .filter(|(_, q)| q.dist2(p) < tol2)
            .min_by(|a, b| a.1.dist2(p).total_cmp(&b.1.dist2(p)))
            .map(|(i, _)| i)
    }
}

fn barycenter_and_radius(pts: &[Point2]) -> (Point2, f64) {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / n);
    let r = pts.iter().map(|p| p.dist(c)).fold(0.0, f64::max);
    (c, r)
}

/// Unisolvent subset containing `seed`, chosen among its `m_d + q` nearest
/// neighbors.
fn seed_subset(
    points: &[Point2],
    seed: usize,
    d: usize,
    q: usize,
    rank_tol: f64,
) -> Result<Vec<usize>> {
    let m = dim(d);
    let p0 = points[seed];
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .dist2(p0)
            .total_cmp(&points[b].dist2(p0))
            .then((a != seed).cmp(&(b != seed)))
            .then(a.cmp(&b))
    });
    let mut q = q;
    for _ in 0..=MAX_DOUBLINGS {
        let k = (m + q).min(points.len());
        let cand: Vec<Point2> = order[..k].iter().map(|&i| points[i]).collect();
        let (c, r) = barycenter_and_radius(&cand);
        match leja_select(&cand, c, r, d, rank_tol) {
            Ok(seq) => {
                let mut chosen: Vec<usize> = seq.selected().iter().map(|&j| order[j]).collect();
                if !chosen.contains(&seed) {
                    *chosen.last_mut().expect("m_d >= 1") = seed;
                }
                let sub: Vec<Point2> = chosen.iter().map(|&i| points[i]).collect();
                let (c, r) = barycenter_and_radius(&sub);
                if leja_select(&sub, c, r, d, rank_tol).is_ok() {
                    return Ok(chosen);
                }
            }
            Err(Error::RankDeficient { .. }) => {}
            Err(e) => return Err(e),
        }
        if k == points.len() {
            break;
        }
        q *= 2;
    }
    Err(Error::CoverFailure { seed })
}

/// Covering of the data by unisolvent degree-`d` subsets, one per seed point,
/// with duplicates (as sets) removed in first-seen order.
pub fn build_ms_cover(data: &PointSet, d: usize, q: usize, rank_tol: f64) -> Result<ShepardCover> {
    let m = dim(d);
    let n = data.len();
    if q < 1 {
        return Err(Error::Config("q must be at least 1".into()));
    }
    if n < m + q {
        return Err(Error::InsufficientData {
            needed: m + q,
            got: n,
        });
    }
    let points = data.points();
    let raw: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| seed_subset(points, i, d, q, rank_tol))
        .collect::<Result<_>>()?;

    let mut seen = HashSet::new();
    let mut subsets = Vec::new();
    for s in raw {
        let mut key = s.clone();
        key.sort_unstable();
        if seen.insert(key) {
            subsets.push(s);
        }
    }
    let (barycenters, local_scales) = subsets
        .iter()
        .map(|s| {
            let sub: Vec<Point2> = s.iter().map(|&i| points[i]).collect();
            barycenter_and_radius(&sub)
        })
        .unzip();
    Ok(ShepardCover {
        degree: d,
        points: points.to_vec(),
        subsets,
        barycenters,
        local_scales,
        node_tol: 1e-12 * data.diameter(),
    })
}

/// Normalized weights `prod_l |p - P_{j_l}|^{-mu}`, formed in log space.
pub fn ms_weights(cover: &ShepardCover, mu: f64, p: Point2) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    if let Some(index) = cover.node_hit(p) {
        return Err(Error::NodeHit { index });
    }
    let logd: Vec<f64> = cover.points.iter().map(|q| q.dist(p).ln()).collect();
    let ell: Vec<f64> = cover
        .subsets
        .iter()
        .map(|s| -mu * s.iter().map(|&i| logd[i]).sum::<f64>())
        .collect();
    let top = ell.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = ell.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

#[derive(Clone, Debug)]
pub struct MsInterpolant {
    cover: ShepardCover,
    mu: f64,
    values: Vec<f64>,
    bases: Vec<ScaledMonomials>,
    local_coefficients: Vec<Vec<f64>>,
}

impl MsInterpolant {
    pub fn cover(&self) -> &ShepardCover {
        &self.cover
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coefficients of each subset's interpolating polynomial in the Taylor
    /// basis centered at the subset barycenter, scaled by its radius.
    pub fn local_coefficients(&self) -> &[Vec<f64>] {
        &self.local_coefficients
    }

    pub fn local_value(&self, j: usize, p: Point2) -> f64 {
        self.bases[j].eval(&self.local_coefficients[j], p)
    }

    pub fn eval(&self, p: Point2) -> f64 {
        if let Some(i) = self.cover.node_hit(p) {
            return self.values[i];
        }
        let w = ms_weights(&self.cover, self.mu, p).expect("node hits handled above");
        w.iter()
            .enumerate()
            .map(|(j, wj)| wj * self.local_value(j, p))
            .sum()
    }
}

pub fn eval_ms(interp: &MsInterpolant, p: Point2) -> f64 {
    interp.eval(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsConfig {
    pub degree: usize,
    pub mu: f64,
    /// Extra nearest-neighbor candidates; `None` means `m_d`.
    pub q: Option<usize>,
    pub rank_tol: f64,
}

impl Default for MsConfig {
    fn default() -> Self {
        Self {
            degree: 9,
            mu: 2.0,
            q: None,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

pub fn fit_ms(data: &PointSet, cfg: &MsConfig) -> Result<MsInterpolant> {
    let d = cfg.degree;
    let threshold = mu_threshold(2, d);
    if !(cfg.mu > threshold) {
        return Err(Error::MuTooSmall {
            mu: cfg.mu,
            threshold,
        });
    }
    let values = data.require_values()?;
    let cover = build_ms_cover(data, d, cfg.q.unwrap_or(dim(d)), cfg.rank_tol)?;
    fit_on_cover(cover, values, cfg.mu, cfg.rank_tol)
}

fn fit_on_cover(
    cover: ShepardCover,
    values: &[f64],
    mu: f64,
    rank_tol: f64,
) -> Result<MsInterpolant> {
    let d = cover.degree;
    let (bases, local_coefficients): (Vec<_>, Vec<_>) = cover
        .subsets
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let sub: Vec<Point2> = s.iter().map(|&i| cover.points[i]).collect();
            let seq = leja_select(
                &sub,
                cover.barycenters[j],
                cover.local_scales[j],
                d,
                rank_tol,
            )?;
            let f: Vec<f64> = seq.selected().iter().map(|&k| values[s[k]]).collect();
            Ok((*seq.basis(), seq.coefficients(&f)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(MsInterpolant {
        cover,
        mu,
        values: values.to_vec(),
        bases,
        local_coefficients,
    })
}
