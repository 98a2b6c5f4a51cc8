//! RBF partition of unity interpolation with per-patch bivariate LOOCV over
//! the shape parameter and the patch radius.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, PointSet, Rect};
use crate::rbf::{
    default_epsilon_grid, fit_global, loocv_cost, max_scaled_residual, rippa_from_parts,
    solve_system, KernelFamily, KernelSpec, RbfInterpolant, ILL_CONDITIONED_THRESHOLD,
};

/// Fewest data points a patch may hold.
pub const MIN_PATCH_POINTS: usize = 3;

/// Largest node residual, relative to `1 + |f_k|`, a local fit may leave.
pub const NODE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PumConfig {
    pub family: KernelFamily,
    pub points_per_patch: usize,
    /// Ball radius as a multiple of the grid cell half-diagonal.
    pub overlap: f64,
    pub epsilon_grid: Vec<f64>,
    /// Radius candidates as multiples of each patch's base radius.
    pub delta_multipliers: Vec<f64>,
}

impl Default for PumConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::Ga,
            points_per_patch: 25,
            overlap: 1.25,
            epsilon_grid: default_epsilon_grid(),
            delta_multipliers: vec![1.0, 1.25, 1.5, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PumCover {
    pub centers: Vec<Point2>,
    pub base_radius: f64,
    pub radii: Vec<f64>,
}

impl PumCover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Indices of patches whose open ball contains `p`.
    pub fn covering(&self, p: Point2) -> impl Iterator<Item = usize> + '_ {
        self.centers
            .iter()
            .zip(&self.radii)
            .enumerate()
            .filter(move |(_, (c, &r))| p.dist2(**c) < r * r)
            .map(|(j, _)| j)
    }

    fn members(&self, points: &[Point2], j: usize, radius: f64) -> Vec<usize> {
        let c = self.centers[j];
        (0..points.len())
            .filter(|&i| points[i].dist2(c) <= radius * radius)
            .collect()
    }
}

/// Square grid of patch centers over the domain's bounding box.
///
/// The grid has `ceil(sqrt(n / points_per_patch))` cells per axis; a center
/// is kept when its cell meets the domain, and the base radius is `overlap`
/// times the cell half-diagonal, so each ball strictly covers its cell.
/// Patches holding fewer than [`MIN_PATCH_POINTS`] data points are grown.
pub fn build_cover(
    domain: &Domain,
    data: &[Point2],
    points_per_patch: usize,
    overlap: f64,
) -> Result<PumCover> {
    let n = data.len();
    if points_per_patch < MIN_PATCH_POINTS || n < points_per_patch {
        return Err(Error::Config(format!(
            "need n_data >= points_per_patch >= {MIN_PATCH_POINTS}, got {n} and {points_per_patch}"
        )));
    }
    if !(overlap > 1.0) {
        return Err(Error::Config(format!(
            "overlap factor must exceed 1, got {overlap}"
        )));
    }
    let per_axis = ((n as f64 / points_per_patch as f64).sqrt().ceil() as usize).max(1);
    let bbox = domain.bbox();
    let (hx, hy) = (
        bbox.width() / per_axis as f64,
        bbox.height() / per_axis as f64,
    );
    let base_radius = overlap * 0.5 * hx.hypot(hy);

    let mut centers = Vec::new();
    for i in 0..per_axis {
        for j in 0..per_axis {
            let cell = Rect {
                ax: bbox.ax + i as f64 * hx,
                bx: bbox.ax + (i + 1) as f64 * hx,
                ay: bbox.ay + j as f64 * hy,
                by: bbox.ay + (j + 1) as f64 * hy,
            };
            if domain.meets_rect(&cell) {
                centers.push(cell.center());
            }
        }
    }
    let mut cover = PumCover {
        radii: vec![base_radius; centers.len()],
        centers,
        base_radius,
    };
    for j in 0..cover.len() {
        while cover.members(data, j, cover.radii[j]).len() < MIN_PATCH_POINTS {
            cover.radii[j] *= 1.25;
        }
    }
    if let Some(i) = data
        .iter()
        .position(|&p| cover.covering(p).next().is_none())
    {
        return Err(Error::CoverageFailure { index: i });
    }
    Ok(cover)
}

/// Wendland C2 bump on the unit ball.
fn bump(t: f64) -> f64 {
    let s = (1.0 - t).max(0.0);
    s * s * s * s * (4.0 * t + 1.0)
}

/// Shepard-normalized compactly supported weights, as `(patch, weight)` pairs.
pub fn pu_weights(cover: &PumCover, p: Point2) -> Result<Vec<(usize, f64)>> {
    let raw: Vec<(usize, f64)> = cover
        .covering(p)
        .map(|j| (j, bump(p.dist(cover.centers[j]) / cover.radii[j])))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if raw.is_empty() || total <= 0.0 {
        return Err(Error::UncoveredPoint(p));
    }
    Ok(raw.into_iter().map(|(j, w)| (j, w / total)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BloocvChoice {
    pub epsilon: f64,
    pub radius: f64,
    pub cost: f64,
}

/// Rippa cost of the local system on the data within `radius` of `center`.
/// Systems past the ill-conditioning threshold, or whose solution misses the
/// patch data by more than [`NODE_RESIDUAL_TOL`], count as degenerate.
pub fn local_loocv_cost(
    data: &PointSet,
    center: Point2,
    radius: f64,
    spec: &KernelSpec,
) -> Result<f64> {
    let values = data.require_values()?;
    let (pts, vals): (Vec<Point2>, Vec<f64>) = data
        .points()
        .iter()
        .zip(values)
        .filter(|(p, _)| p.dist2(center) <= radius * radius)
        .map(|(&p, &v)| (p, v))
        .unzip();
    if pts.len() < MIN_PATCH_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_PATCH_POINTS,
            got: pts.len(),
        });
    }
    let (c, diag, cond) = solve_system(&pts, &vals, spec)?;
    if cond > ILL_CONDITIONED_THRESHOLD
        || max_scaled_residual(&pts, &vals, spec, &c) > NODE_RESIDUAL_TOL
    {
        return Err(Error::Singular);
    }
    Ok(loocv_cost(&rippa_from_parts(&c, &diag)?))
}

/// Minimizes the local LOOCV cost over `(epsilon, multiplier * base_radius)`.
/// Ties go to the smaller radius, then the smaller shape parameter.
pub fn bloocv_select(
    data: &PointSet,
    center: Point2,
    base_radius: f64,
    family: KernelFamily,
    epsilon_grid: &[f64],
    delta_multipliers: &[f64],
) -> Result<BloocvChoice> {
    if epsilon_grid.is_empty() || delta_multipliers.is_empty() {
        return Err(Error::Config("BLOOCV grids must be nonempty".into()));
    }
    if !family.is_spd() {
        return Err(Error::Config(format!(
            "{family:?} is not strictly positive definite"
        )));
    }
    let mut mults = delta_multipliers.to_vec();
    mults.sort_by(f64::total_cmp);
    let mut eps = epsilon_grid.to_vec();
    eps.sort_by(f64::total_cmp);

    let mut best: Option<BloocvChoice> = None;
    for &m in &mults {
        let radius = m * base_radius;
        for &e in &eps {
            let Ok(spec) = KernelSpec::new(family, e) else {
                continue;
            };
            let Ok(cost) = local_loocv_cost(data, center, radius, &spec) else {
                continue;
            };
            if cost.is_finite() && best.is_none_or(|b| cost < b.cost) {
                best = Some(BloocvChoice {
                    epsilon: e,
                    radius,
                    cost,
                });
            }
        }
    }
    best.ok_or(Error::AllCandidatesFailed)
}

#[derive(Clone, Debug)]
pub struct PumInterpolant {
    cover: PumCover,
    local_fits: Vec<RbfInterpolant>,
    selected: Vec<BloocvChoice>,
}

impl PumInterpolant {
    pub fn cover(&self) -> &PumCover {
        &self.cover
    }

    pub fn local_fits(&self) -> &[RbfInterpolant] {
        &self.local_fits
    }

    pub fn selected(&self) -> &[BloocvChoice] {
        &self.selected
    }

    pub fn eval(&self, p: Point2) -> Result<f64> {
        Ok(pu_weights(&self.cover, p)?
            .into_iter()
            .map(|(j, w)| w * self.local_fits[j].eval(p))
            .sum())
    }
}

pub fn eval_pum(interp: &PumInterpolant, p: Point2) -> Result<f64> {
    interp.eval(p)
}

/// Assembles the interpolant on an existing cover, choosing each patch's
/// shape parameter and radius by BLOOCV.
pub fn fit_pum_on_cover(
    data: &PointSet,
    cover: PumCover,
    cfg: &PumConfig,
) -> Result<PumInterpolant> {
    let values = data.require_values()?;
    let fits: Vec<(BloocvChoice, RbfInterpolant)> = (0..cover.len())
        .into_par_iter()
        .map(|j| {
            let choice = bloocv_select(
                data,
                cover.centers[j],
                cover.radii[j],
                cfg.family,
                &cfg.epsilon_grid,
                &cfg.delta_multipliers,
            )?;
            let idx = cover.members(data.points(), j, choice.radius);
            let local = PointSet::with_values(
                idx.iter().map(|&i| data.points()[i]).collect(),
                idx.iter().map(|&i| values[i]).collect(),
            )?;
            let fit = fit_global(&local, KernelSpec::new(cfg.family, choice.epsilon)?)?;
            Ok((choice, fit))
        })
        .collect::<Result<_>>()?;
    let mut cover = cover;
    let (selected, local_fits): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
    for (r, c) in cover.radii.iter_mut().zip(&selected) {
        *r = c.radius;
    }
    Ok(PumInterpolant {
        cover,
        local_fits,
        selected,
    })
}

pub fn fit_pum(data: &PointSet, domain: &Domain, cfg: &PumConfig) -> Result<PumInterpolant> {
    let cover = build_cover(domain, data.points(), cfg.points_per_patch, cfg.overlap)?;
    fit_pum_on_cover(data, cover, cfg)
}
