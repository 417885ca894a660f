//! Dense linear algebra used by PCA and the regression fits.
//!
//! `symmetric_eigen` is a cyclic Jacobi solver. `least_squares_min_norm`
//! reduces the problem with Householder QR (of `X` when it is tall, of `Xᵀ`
//! when it is wide) and takes the SVD of the small triangular factor with
//! one-sided Jacobi rotations. Singular values below `1e-10·σ_max` are
//! dropped, which yields the minimum-norm least-squares solution.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of finite `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix {rows}×{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite matrix entry at ({}, {})",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length must match columns");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]`, with its
    /// largest-magnitude entry positive.
    pub eigenvectors: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(a: &Matrix) -> Result<EigenResult> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}×{}",
            a.rows, a.cols
        )));
    }
    let scale = a.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let mut m = a.clone();
    // Symmetrize exactly so rotations act on a truly symmetric matrix.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let tol = 1e-12 * scale;

    let off_max = |m: &Matrix| {
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(m[(i, j)].abs());
            }
        }
        best
    };

    let mut converged = off_max(&m) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_max(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let lead = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (k, x)| {
                if x.abs() > best.1 {
                    (k, x.abs())
                } else {
                    best
                }
            })
            .0;
        if col[lead] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (k, x) in col.into_iter().enumerate() {
            vectors[(k, dst)] = x;
        }
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Householder QR of a column-major `rows × cols` matrix with `rows >= cols`.
/// On return `cols` holds R in its upper triangle; the reflectors are
/// returned separately as unit vectors over rows `k..`.
struct HouseholderQr {
    rows: usize,
    /// `r[j]` is column j of R, length `ncols`.
    r: Vec<Vec<f64>>,
    /// Reflector k acts on rows `k..rows`; empty when the column was already zero.
    reflectors: Vec<Vec<f64>>,
}

impl HouseholderQr {
    fn factor(mut cols: Vec<Vec<f64>>, rows: usize) -> Self {
        let ncols = cols.len();
        debug_assert!(rows >= ncols);
        let mut reflectors = Vec::with_capacity(ncols);
        for k in 0..ncols {
            let x = &cols[k][k..];
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            let alpha = if x[0] > 0.0 { -norm } else { norm };
            let mut u: Vec<f64> = x.to_vec();
            u[0] -= alpha;
            let unorm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if unorm == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            u.iter_mut().for_each(|v| *v /= unorm);
            for col in cols.iter_mut().skip(k) {
                let seg = &mut col[k..];
                let d = 2.0 * dot(&u, seg);
                for (s, ui) in seg.iter_mut().zip(&u) {
                    *s -= d * ui;
                }
            }
            reflectors.push(u);
        }
        let r = cols
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                let mut col = vec![0.0; ncols];
                col[..=j.min(ncols - 1)].copy_from_slice(&c[..=j.min(ncols - 1)]);
                col
            })
            .collect();
        HouseholderQr {
            rows,
            r,
            reflectors,
        }
    }

    /// Qᵀ·b, truncated to the first `ncols` entries.
    fn qt_mul_truncated(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for (k, u) in self.reflectors.iter().enumerate() {
            if u.is_empty() {
                continue;
            }
            let seg = &mut y[k..];
            let d = 2.0 * dot(u, seg);
            for (s, ui) in seg.iter_mut().zip(u) {
                *s -= d * ui;
            }
        }
        y.truncate(self.r.len());
        y
    }

    /// Q·[w; 0] for `w` of length `ncols`.
    fn q_mul_padded(&self, w: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        y[..w.len()].copy_from_slice(w);
        for (k, u) in self.reflectors.iter().enumerate().rev() {
            if u.is_empty() {
                continue;
            }
            let seg = &mut y[k..];
            let d = 2.0 * dot(u, seg);
            for (s, ui) in seg.iter_mut().zip(u) {
                *s -= d * ui;
            }
        }
        y
    }
}

type Columns = Vec<Vec<f64>>;

/// SVD of a square matrix given by columns, by one-sided Jacobi.
/// Returns `(w, v)` with `A·V = W`, columns of W mutually orthogonal;
/// `σ_i = ‖w_i‖`.
fn one_sided_jacobi(mut w: Columns) -> Result<(Columns, Columns)> {
    const MAX_SWEEPS: usize = 80;
    let k = w.len();
    // Rounding in a length-k dot product is about k·ε relative.
    let eps = (k.max(1) as f64) * f64::EPSILON;
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut norms: Vec<f64> = w.iter().map(|c| dot(c, c)).collect();
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let (alpha, beta) = (norms[i], norms[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (left, right) = w.split_at_mut(j);
                let (wi, wj) = (&mut left[i], &mut right[0]);
                let gamma = dot(wi, wj);
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (a, b) in wi.iter_mut().zip(wj.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
                let (left, right) = v.split_at_mut(j);
                for (a, b) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
                norms[i] = alpha - t * gamma;
                norms[j] = beta + t * gamma;
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(Error::Numeric(format!(
        "one-sided Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
    )))
}

/// Applies the truncated pseudo-inverse of `A` (given by columns) to `b`.
fn square_pinv_apply(cols: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>> {
    let k = cols.len();
    let (w, v) = one_sided_jacobi(cols)?;
    let sq: Vec<f64> = w.iter().map(|c| dot(c, c)).collect();
    let sigma_max = sq.iter().fold(0.0f64, |m, s| m.max(s.sqrt()));
    let cutoff = 1e-10 * sigma_max;
    let mut x = vec![0.0; k];
    for i in 0..k {
        let sigma = sq[i].sqrt();
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        // u_i·b / σ_i with u_i = w_i / σ_i.
        let coef = dot(&w[i], b) / sq[i];
        for (xi, vi) in x.iter_mut().zip(&v[i]) {
            *xi += coef * vi;
        }
    }
    Ok(x)
}

/// Minimum-norm minimizer of ‖Xβ − y‖₂.
pub fn least_squares_min_norm(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (x.rows, x.cols);
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("least squares needs n, p >= 1".into()));
    }
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "target length {} does not match {} rows",
            y.len(),
            n
        )));
    }
    if x.data.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite least-squares input".into()));
    }

    if n >= p {
        let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
        let qr = HouseholderQr::factor(cols, n);
        let c = qr.qt_mul_truncated(y);
        square_pinv_apply(qr.r, &c)
    } else {
        // X = Rᵀ Qᵀ with Xᵀ = Q R; pinv(X) = Q · pinv(Rᵀ).
        let cols: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let qr = HouseholderQr::factor(cols, p);
        let rt_cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| qr.r[i][j]).collect())
            .collect();
        let w = square_pinv_apply(rt_cols, y)?;
        Ok(qr.q_mul_padded(&w))
    }
}
