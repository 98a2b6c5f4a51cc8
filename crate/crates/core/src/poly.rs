//! Bivariate polynomial machinery: graded multi-indices, scaled and centered
//! Vandermonde matrices, and discrete Leja extraction by pivoted elimination.
//!
//! Columns are always in graded order (total degree ascending, then
//! descending power of `x`), so the first `m_k` columns span the polynomials
//! of degree `k`. The Leja elimination processes columns in this order, which
//! makes every prefix of the selected sequence unisolvent for its degree.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

/// Default relative rank tolerance for pivot acceptance.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Dimension of the bivariate polynomials of total degree `<= d`.
pub const fn dim(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Graded exponent pairs `(a, b)` standing for `x^a y^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexSet {
    degree: usize,
    indices: Vec<(u32, u32)>,
}

impl MultiIndexSet {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[(u32, u32)] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.indices.iter().copied()
    }
}

pub fn multi_indices(d: usize) -> MultiIndexSet {
    let mut indices = Vec::with_capacity(dim(d));
    for k in 0..=d as u32 {
        for b in 0..=k {
            indices.push((k - b, b));
        }
    }
    MultiIndexSet { degree: d, indices }
}

/// Monomials `((P - center) / scale)^alpha` in graded order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMonomials {
    pub center: Point2,
    pub scale: f64,
    pub degree: usize,
}

impl ScaledMonomials {
    pub fn new(center: Point2, scale: f64, degree: usize) -> Self {
        debug_assert!(scale > 0.0);
        Self {
            center,
            scale,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        dim(self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes the basis values at `p` into `out` (length `dim(degree)`).
    pub fn fill_row(&self, p: Point2, out: &mut [f64]) {
        let d = self.degree;
        let u = (p.x - self.center.x) / self.scale;
        let v = (p.y - self.center.y) / self.scale;
        let mut pu = [1.0f64; 64];
        let mut pv = [1.0f64; 64];
        assert!(d < 64, "degree {d} too large");
        for k in 1..=d {
            pu[k] = pu[k - 1] * u;
            pv[k] = pv[k - 1] * v;
        }
        let mut col = 0;
        for k in 0..=d {
            for b in 0..=k {
                out[col] = pu[k - b] * pv[b];
                col += 1;
            }
        }
    }

    pub fn row(&self, p: Point2) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.fill_row(p, &mut out);
        out
    }

    /// Evaluates the polynomial with the given coefficients at `p`.
    pub fn eval(&self, coefficients: &[f64], p: Point2) -> f64 {
        let row = self.row(p);
        row.iter().zip(coefficients).map(|(a, b)| a * b).sum()
    }

    pub fn matrix(&self, points: &[Point2]) -> DMatrix<f64> {
        PolyBasis::matrix(self, points)
    }
}

/// A graded polynomial basis of total degree `degree`.
pub trait PolyBasis {
    fn degree(&self) -> usize;

    /// Writes the basis values at `p` into `out` (length `dim(degree)`).
    fn fill_row(&self, p: Point2, out: &mut [f64]);

    fn matrix(&self, points: &[Point2]) -> DMatrix<f64> {
        let m = dim(self.degree());
        let mut v = DMatrix::zeros(points.len(), m);
        let mut row = vec![0.0; m];
        for (i, &p) in points.iter().enumerate() {
            self.fill_row(p, &mut row);
            for (j, &x) in row.iter().enumerate() {
                v[(i, j)] = x;
            }
        }
        v
    }
}

impl PolyBasis for ScaledMonomials {
    fn degree(&self) -> usize {
        self.degree
    }

    fn fill_row(&self, p: Point2, out: &mut [f64]) {
        ScaledMonomials::fill_row(self, p, out)
    }
}

/// Products `T_a(x') T_b(y')` of Chebyshev polynomials, where `x', y'` map
/// the rectangle affinely onto `[-1, 1]^2`. Graded order as for monomials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevTensor {
    pub rect: Rect,
    pub degree: usize,
}

impl ChebyshevTensor {
    pub fn new(rect: Rect, degree: usize) -> Self {
        Self { rect, degree }
    }
}

fn chebyshev_values(t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * t * out[k - 1] - out[k - 2];
    }
}

impl PolyBasis for ChebyshevTensor {
    fn degree(&self) -> usize {
        self.degree
    }

    fn fill_row(&self, p: Point2, out: &mut [f64]) {
        let d = self.degree;
        assert!(d < 64, "degree {d} too large");
        let r = &self.rect;
        let mut tx = [0.0f64; 64];
        let mut ty = [0.0f64; 64];
        chebyshev_values((2.0 * p.x - r.ax - r.bx) / r.width(), &mut tx[..=d]);
        chebyshev_values((2.0 * p.y - r.ay - r.by) / r.height(), &mut ty[..=d]);
        let mut col = 0;
        for k in 0..=d {
            for b in 0..=k {
                out[col] = tx[k - b] * ty[b];
                col += 1;
            }
        }
    }
}

/// Vandermonde matrix with rows over `points` and graded columns.
pub fn vandermonde(points: &[Point2], center: Point2, h: f64, d: usize) -> DMatrix<f64> {
    ScaledMonomials::new(center, h, d).matrix(points)
}

/// A discrete Leja sequence together with the triangular factors of its
/// Vandermonde matrix (rows in selection order).
#[derive(Clone, Debug)]
pub struct LejaSequence {
    basis: ScaledMonomials,
    selected: Vec<usize>,
    /// Unit lower factor, row-major `m x m`.
    lower: Vec<f64>,
    /// Upper factor, row-major `m x m`.
    upper: Vec<f64>,
    pivots: Vec<f64>,
    /// First row of the inverse upper factor.
    first_row_uinv: Vec<f64>,
}

impl LejaSequence {
    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn center(&self) -> Point2 {
        self.basis.center
    }

    pub fn scale(&self) -> f64 {
        self.basis.scale
    }

    pub fn basis(&self) -> &ScaledMonomials {
        &self.basis
    }

    /// Candidate indices in pivot order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Pivot magnitudes `|U_kk|` in pivot order.
    pub fn pivot_magnitudes(&self) -> &[f64] {
        &self.pivots
    }

    fn m(&self) -> usize {
        self.selected.len()
    }

    /// Forward substitution with the unit lower factor.
    fn lower_solve(&self, f: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut g = f.to_vec();
        for i in 0..m {
            let mut s = g[i];
            for j in 0..i {
                s -= self.lower[i * m + j] * g[j];
            }
            g[i] = s;
        }
        g
    }

    /// Values at the center of the interpolants of degree `0..=d` built on
    /// the leading `m_k` selected points.
    pub fn nested_center_values(&self, values_at_selected: &[f64]) -> Vec<f64> {
        assert_eq!(values_at_selected.len(), self.m());
        let g = self.lower_solve(values_at_selected);
        let mut out = Vec::with_capacity(self.degree() + 1);
        let mut acc = 0.0;
        let mut j = 0;
        for k in 0..=self.degree() {
            while j < dim(k) {
                acc += self.first_row_uinv[j] * g[j];
                j += 1;
            }
            out.push(acc);
        }
        out
    }

    /// 1-norm of the first row of the inverse leading `m_k x m_k` block.
    pub fn lebesgue_at_center(&self, k: usize) -> f64 {
        assert!(k <= self.degree());
        let mk = dim(k);
        let m = self.m();
        // s L_k = r[..mk]
        let mut s = self.first_row_uinv[..mk].to_vec();
        for j in (0..mk).rev() {
            let mut v = s[j];
            for i in j + 1..mk {
                v -= s[i] * self.lower[i * m + j];
            }
            s[j] = v;
        }
        s.iter().map(|v| v.abs()).sum()
    }

    /// Coefficients of the degree-`d` interpolant in the sequence's basis.
    pub fn coefficients(&self, values_at_selected: &[f64]) -> Vec<f64> {
        assert_eq!(values_at_selected.len(), self.m());
        let m = self.m();
        let mut a = self.lower_solve(values_at_selected);
        for i in (0..m).rev() {
            let mut s = a[i];
            for j in i + 1..m {
                s -= self.upper[i * m + j] * a[j];
            }
            a[i] = s / self.upper[i * m + i];
        }
        a
    }
}

/// Greedy discrete Leja selection by Gaussian elimination with row pivoting
/// on the candidates' Vandermonde matrix.
///
/// A pivot is rejected when its magnitude does not exceed `rank_tol` times
/// the largest pivot accepted so far. Ties go to the smallest candidate
/// index. `RankDeficient { step }` reports the failing step, counted from 1.
pub fn leja_select(
    candidates: &[Point2],
    center: Point2,
    h: f64,
    d: usize,
    rank_tol: f64,
) -> Result<LejaSequence> {
    let basis = ScaledMonomials::new(center, h, d);
    let m = basis.len();
    let n = candidates.len();
    if n < m {
        return Err(Error::InsufficientData { needed: m, got: n });
    }
    let mut a = vec![0.0; n * m];
    for (i, &p) in candidates.iter().enumerate() {
        basis.fill_row(p, &mut a[i * m..(i + 1) * m]);
    }
    let mut rows: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(m);
    let mut largest = 0.0f64;

    for k in 0..m {
        let mut best = k;
        let mut best_abs = a[k * m + k].abs();
        for i in k + 1..n {
            let v = a[i * m + k].abs();
            if v > best_abs || (v == best_abs && rows[i] < rows[best]) {
                best = i;
                best_abs = v;
            }
        }
        if !(best_abs.is_finite() && best_abs > 0.0 && best_abs > rank_tol * largest) {
            return Err(Error::RankDeficient { step: k + 1 });
        }
        largest = largest.max(best_abs);
        if best != k {
            rows.swap(best, k);
            for j in 0..m {
                a.swap(best * m + j, k * m + j);
            }
        }
        pivots.push(best_abs);
        let piv = a[k * m + k];
        for r in k + 1..n {
            let l = a[r * m + k] / piv;
            if l == 0.0 {
                a[r * m + k] = 0.0;
                continue;
            }
            a[r * m + k] = l;
            for j in k + 1..m {
                a[r * m + j] -= l * a[k * m + j];
            }
        }
    }

    let mut lower = vec![0.0; m * m];
    let mut upper = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let v = a[i * m + j];
            match i.cmp(&j) {
                std::cmp::Ordering::Greater => lower[i * m + j] = v,
                std::cmp::Ordering::Equal => {
                    lower[i * m + j] = 1.0;
                    upper[i * m + j] = v;
                }
                std::cmp::Ordering::Less => upper[i * m + j] = v,
            }
        }
    }
    // r U = e_0
    let mut first_row_uinv = vec![0.0; m];
    for j in 0..m {
        let mut s = if j == 0 { 1.0 } else { 0.0 };
        for i in 0..j {
            s -= first_row_uinv[i] * upper[i * m + j];
        }
        first_row_uinv[j] = s / upper[j * m + j];
    }

    rows.truncate(m);
    Ok(LejaSequence {
        basis,
        selected: rows,
        lower,
        upper,
        pivots,
        first_row_uinv,
    })
}
