//! Small dense linear algebra.
//!
//! Everything here targets desk-scale dimensions (n <= 16). Symmetric
//! eigenproblems use cyclic Jacobi rotations, which are deterministic and
//! keep the crate free of solver dependencies.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense row-major matrix; doubles as a linear map acting on column vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("matrix must have positive dimensions"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::invalid("ragged rows"));
            }
            data.extend_from_slice(r);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x` without forming the transpose.
    pub fn tvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            axpy(&mut out, x[i], self.row(i));
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        m
    }

    /// Accumulates `alpha * v v^T` into a square matrix.
    pub fn add_outer(&mut self, alpha: f64, v: &[f64]) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            let av = alpha * v[i];
            for j in 0..self.cols {
                self[(i, j)] += av * v[j];
            }
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Relative asymmetry `max |A_ij - A_ji| / max |A_ij|`.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a[i * n + k].abs() > a[piv * n + k].abs() {
                    piv = i;
                }
            }
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            det *= a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / a[k * n + k];
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a[i * n + k].abs() > a[piv * n + k].abs() {
                    piv = i;
                }
            }
            let p = a[piv * n + k];
            if p.abs() < 1e-300 {
                return Err(Error::NearSingular { det: 0.0 });
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            for i in (k + 1)..n {
                let f = a[i * n + k] / a[k * n + k];
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s / a[i * n + i];
        }
        Ok(x)
    }

    /// Inverse by Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n);
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a[i * n + k].abs() > a[piv * n + k].abs() {
                    piv = i;
                }
            }
            if a[piv * n + k].abs() < 1e-300 {
                return Err(Error::NearSingular { det: 0.0 });
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                    let tmp = inv[(k, j)];
                    inv[(k, j)] = inv[(piv, j)];
                    inv[(piv, j)] = tmp;
                }
            }
            let p = a[k * n + k];
            for j in 0..n {
                a[k * n + j] /= p;
                inv[(k, j)] /= p;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i * n + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] -= f * a[k * n + j];
                    inv[(i, j)] -= f * inv[(k, j)];
                }
            }
        }
        Ok(inv)
    }

    /// Rank with a pivot threshold relative to the largest entry.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut a = self.data.clone();
        let (r, c) = (self.rows, self.cols);
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        let tol = rel_tol * scale;
        let mut rank = 0;
        let mut row = 0;
        for col in 0..c {
            let mut piv = row;
            for i in row..r {
                if a[i * c + col].abs() > a[piv * c + col].abs() {
                    piv = i;
                }
            }
            if row >= r || a[piv * c + col].abs() <= tol {
                continue;
            }
            for j in 0..c {
                a.swap(row * c + j, piv * c + j);
            }
            for i in (row + 1)..r {
                let f = a[i * c + col] / a[row * c + col];
                for j in col..c {
                    a[i * c + j] -= f * a[row * c + j];
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a symmetric matrix.
pub struct SymEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `i` of `vectors` is the eigenvector for `values[i]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eigen(m: &Matrix) -> SymEigen {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values: Vec<f64> = idx.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    SymEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    sym_eigen(m).values
}

/// Singular values of a rectangular map, descending, via the Gram matrix of
/// the smaller side.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let gram = if m.rows <= m.cols {
        // m m^T
        Matrix::from_fn(m.rows, m.rows, |i, j| dot(m.row(i), m.row(j)))
    } else {
        let t = m.transpose();
        Matrix::from_fn(t.rows, t.rows, |i, j| dot(t.row(i), t.row(j)))
    };
    let mut vals = sym_eigenvalues(&gram);
    vals.reverse();
    vals.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Standard normal sample via Box-Muller.
pub fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Haar-ish random orthogonal matrix from Gram-Schmidt of a Gaussian one.
pub fn random_orthogonal(n: usize, rng: &mut impl rand::Rng) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| gaussian(rng)).collect())
            .collect();
        let mut ok = true;
        for i in 0..n {
            for j in 0..i {
                let proj = dot(&cols[i], &cols[j]);
                let prev = cols[j].clone();
                axpy(&mut cols[i], -proj, &prev);
            }
            let len = norm2(&cols[i]);
            if len < 1e-6 {
                ok = false;
                break;
            }
            for v in &mut cols[i] {
                *v /= len;
            }
        }
        if ok {
            return Matrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Random invertible matrix with entries O(1) and determinant bounded away
/// from zero.
pub fn random_invertible(n: usize, rng: &mut impl rand::Rng) -> Matrix {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| gaussian(rng));
        let row_prod: f64 = (0..n).map(|i| norm2(m.row(i))).product();
        if m.det().abs() > 1e-6 * row_prod {
            return m;
        }
    }
}

/// Least-squares solve of a symmetric system through the spectral
/// pseudoinverse; eigenvalues below `rel_tol * lambda_max` are discarded.
pub fn sym_pinv_solve(a: &Matrix, b: &[f64], rel_tol: f64) -> Vec<f64> {
    let eig = sym_eigen(a);
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = a.rows();
    let mut x = vec![0.0; n];
    if lmax == 0.0 {
        return x;
    }
    for k in 0..n {
        let l = eig.values[k];
        if l.abs() <= rel_tol * lmax {
            continue;
        }
        let col: Vec<f64> = (0..n).map(|r| eig.vectors[(r, k)]).collect();
        let coeff = dot(&col, b) / l;
        axpy(&mut x, coeff, &col);
    }
    x
}
