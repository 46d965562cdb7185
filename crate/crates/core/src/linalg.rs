//! Small dense linear algebra: a column-major design matrix and
//! Householder least squares with rank detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a column is treated as lying in the span of the
/// columns before it.
pub const RANK_TOL: f64 = 1e-10;

/// Dense column-major matrix. Columns are features, rows observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(Error::Dimension("columns have different lengths".into()));
        }
        Ok(Matrix {
            nrows,
            ncols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::Dimension(format!(
                "{} values for a {nrows}x{ncols} matrix",
                values.len()
            )));
        }
        let mut m = Matrix::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m.data[j * nrows + i] = values[i * ncols + j];
            }
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nrows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.nrows + i] = value;
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.nrows.max(1)).take(self.ncols)
    }

    /// `X v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.col(j), &mut out);
            }
        }
        out
    }

    /// `X' v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.nrows);
        (0..self.ncols).map(|j| dot(self.col(j), v)).collect()
    }

    pub fn select_columns(&self, columns: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(columns.len() * self.nrows);
        for &j in columns {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            nrows: self.nrows,
            ncols: columns.len(),
            data,
        }
    }

    /// Euclidean norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.ncols).map(|j| norm(self.col(j))).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y - X beta`.
pub fn residual(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut r = y.to_vec();
    for (j, &bj) in beta.iter().enumerate() {
        if bj != 0.0 {
            axpy(-bj, x.col(j), &mut r);
        }
    }
    r
}

/// Least-squares fit restricted to a set of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// Coefficients in the order of the requested columns.
    pub coefficients: Vec<f64>,
    pub residual: Vec<f64>,
    pub rss: f64,
}

/// Least squares of `y` on the listed columns of `x` by Householder QR.
///
/// Columns that fall within `RANK_TOL` of the span of the earlier ones are
/// reported together in [`Error::RankDeficient`].
pub fn least_squares(x: &Matrix, y: &[f64], columns: &[usize]) -> Result<LeastSquares> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::Dimension(format!("y has {} rows, X has {n}", y.len())));
    }
    if let Some(&bad) = columns.iter().find(|&&j| j >= x.ncols()) {
        return Err(Error::Dimension(format!("column {bad} out of range")));
    }
    if columns.is_empty() {
        let residual = y.to_vec();
        let rss = norm_sq(&residual);
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            residual,
            rss,
        });
    }

    let k = columns.len();
    // reflectors[r] acts on rows r..n
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k.min(n));
    let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut dependent = Vec::new();

    for &j in columns {
        let mut col = x.col(j).to_vec();
        let original = norm(&col);
        for (r, (v, tau)) in reflectors.iter().enumerate() {
            apply_reflector(v, *tau, &mut col[r..]);
        }
        let r = reflectors.len();
        let tail = if r < n { norm(&col[r..]) } else { 0.0 };
        if r >= n || tail <= RANK_TOL * original.max(f64::MIN_POSITIVE) {
            dependent.push(j);
            continue;
        }
        let (v, tau, alpha) = householder(&col[r..], tail);
        col[r] = alpha;
        for c in col[r + 1..].iter_mut() {
            *c = 0.0;
        }
        reflectors.push((v, tau));
        r_cols.push(col[..=r].to_vec());
    }
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }

    let mut qty = y.to_vec();
    for (r, (v, tau)) in reflectors.iter().enumerate() {
        apply_reflector(v, *tau, &mut qty[r..]);
    }
    let mut coefficients = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for c in i + 1..k {
            s -= r_cols[c][i] * coefficients[c];
        }
        coefficients[i] = s / r_cols[i][i];
    }

    let mut resid = y.to_vec();
    for (c, &j) in columns.iter().enumerate() {
        axpy(-coefficients[c], x.col(j), &mut resid);
    }
    let rss = norm_sq(&resid);
    Ok(LeastSquares {
        coefficients,
        residual: resid,
        rss,
    })
}

/// Householder vector `v` (with `v[0] = 1`) and `tau` such that
/// `(I - tau v v') x = alpha e1`.
fn householder(x: &[f64], xnorm: f64) -> (Vec<f64>, f64, f64) {
    let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
    let v0 = x[0] - alpha;
    let mut v: Vec<f64> = x.iter().map(|xi| xi / v0).collect();
    v[0] = 1.0;
    let tau = -v0 / alpha;
    (v, tau, alpha)
}

fn apply_reflector(v: &[f64], tau: f64, x: &mut [f64]) {
    let s = tau * dot(v, x);
    axpy(-s, v, x);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_and_column_major_agree() {
        let m = Matrix::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.col(1), &[2.0, 5.0]);
        assert_eq!(m.get(1, 2), 6.0);
        assert_eq!(m.mul_vec(&[1.0, 0.0, 1.0]), vec![4.0, 10.0]);
        assert_eq!(m.t_mul_vec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn least_squares_exact_fit() {
        let x = Matrix::from_row_major(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
        let y = [1.0, 3.0, 5.0];
        let fit = least_squares(&x, &y, &[0, 1]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-14);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-14);
        assert!(fit.rss < 1e-26);
    }

    #[test]
    fn detects_dependent_columns() {
        let x = Matrix::from_columns(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let err = least_squares(&x, &[1.0; 4], &[0, 1, 2, 3]).unwrap_err();
        assert_eq!(err, Error::RankDeficient { columns: vec![2] });
    }

    #[test]
    fn too_many_columns_for_rows() {
        let x = Matrix::from_row_major(1, 2, &[1.0, 2.0]).unwrap();
        assert!(matches!(
            least_squares(&x, &[1.0], &[0, 1]),
            Err(Error::RankDeficient { .. })
        ));
    }
}
