//! Dense row-major matrices over [`Scalar`], exact Gaussian elimination and a
//! symmetric eigensolver.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use super::scalar::{Rational, Scalar};
use crate::error::{shape_err, Error, Result};

/// Dense matrix. Cone elements of the orthant are stored as `n x 1` columns,
/// elements of the matrix cones as `d x d` symmetric matrices, so that the
/// cone pairing is always the entrywise (Frobenius) inner product.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RatMatrix = Matrix<Rational>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    pub fn column(values: &[T]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Matrix::from_fn(n, n, |r, c| {
            if r == c {
                values[r].clone()
            } else {
                T::zero()
            }
        })
    }

    /// `z zᵀ` for a vector `z`.
    pub fn outer(z: &[T]) -> Self {
        Matrix::from_fn(z.len(), z.len(), |r, c| z[r].clone() * &z[c])
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::one(); rows * cols],
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn from_f64(m: &Matrix<f64>) -> Self {
        m.map(|v| T::from_f64(*v))
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b)
                .collect(),
        }
    }

    /// In-place `self += s * other`.
    pub fn add_scaled(&mut self, s: &T, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.clone() * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape_err(
                format!("inner dimension {}", self.cols),
                format!("{}", other.rows),
            ));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc += self[(r, k)].clone() * &other[(k, c)];
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(self.cols, v.len());
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// Entrywise (Frobenius) inner product; equals `Tr(AB)` for symmetric
    /// matrices and the dot product for column vectors.
    pub fn inner(&self, other: &Self) -> T {
        debug_assert_eq!(self.shape(), other.shape());
        dot(&self.data, &other.data)
    }

    /// `zᵀ M z`.
    pub fn quad_form(&self, z: &[T]) -> T {
        debug_assert!(self.is_square() && z.len() == self.rows);
        let mut acc = T::zero();
        for r in 0..self.rows {
            if z[r].is_zero() {
                continue;
            }
            let mut row_acc = T::zero();
            for c in 0..self.cols {
                row_acc += self[(r, c)].clone() * &z[c];
            }
            acc += row_acc * &z[r];
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|M_ij - M_ji|` as a float.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                let d = (self[(r, c)].clone() - &self[(c, r)]).to_f64().abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        if T::EXACT {
            (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self[(r, c)] == self[(c, r)]))
        } else {
            self.asymmetry() <= 1e-12 * (1.0 + self.max_abs())
        }
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        let two = T::from_i64(2);
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)].clone() + &self[(c, r)]) / two.clone()
        })
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(idx.len(), idx.len(), |r, c| self[(idx[r], idx[c])].clone())
    }

    /// Upper-triangle entries (row-major, including the diagonal) of a square
    /// matrix; all entries of a column vector.
    pub fn upper_triangle(&self) -> Vec<T> {
        if self.cols == 1 {
            return self.data.clone();
        }
        let mut out = Vec::with_capacity(self.rows * (self.rows + 1) / 2);
        for r in 0..self.rows {
            for c in r..self.cols {
                out.push(self[(r, c)].clone());
            }
        }
        out
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() {
            continue;
        }
        acc += x.clone() * y;
    }
    acc
}

/// Solves the square system `A x = b` by Gaussian elimination.
///
/// Rationals pivot on the first nonzero entry, floats on the largest one.
/// Returns `None` when `A` is singular (for floats: numerically singular).
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    assert!(a.is_square() && b.len() == n, "solve: shape mismatch");
    let mut aug: Vec<Vec<T>> = (0..n)
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.push(b[r].clone());
            row
        })
        .collect();
    let scale = if T::EXACT { 1.0 } else { 1.0 + a.max_abs() };
    for col in 0..n {
        let pivot = if T::EXACT {
            (col..n).find(|&r| !aug[r][col].is_zero())
        } else {
            let best = (col..n).max_by(|&x, &y| {
                aug[x][col]
                    .to_f64()
                    .abs()
                    .total_cmp(&aug[y][col].to_f64().abs())
            })?;
            (aug[best][col].to_f64().abs() > 1e-12 * scale).then_some(best)
        }?;
        aug.swap(col, pivot);
        let inv = T::one() / aug[col][col].clone();
        for entry in aug[col][col..].iter_mut() {
            *entry *= &inv;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (c, p) in pivot_row.iter().enumerate().skip(col) {
                if !p.is_zero() {
                    row[c] -= factor.clone() * p;
                }
            }
        }
    }
    Some(aug.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Reduced row echelon form. Returns the reduced matrix and its pivot columns.
pub fn rref<T: Scalar>(m: &Matrix<T>) -> (Matrix<T>, Vec<usize>) {
    let mut rows = m.to_rows();
    let ncols = m.cols();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_negligible()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = T::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (c, pv) in pivot_row.iter().enumerate() {
                    row[c] -= f.clone() * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    let out = if rows.is_empty() {
        Matrix::zeros(0, ncols)
    } else {
        Matrix::from_rows(&rows).expect("rectangular")
    };
    (out, pivots)
}

pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    rref(m).1.len()
}

/// Basis of the right null space `{x : M x = 0}` in a deterministic
/// (reduced echelon) form.
pub fn null_space<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let (r, pivots) = rref(m);
    let n = m.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); n];
            v[f] = T::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, f)].clone();
            }
            v
        })
        .collect()
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix<f64>,
}

impl SymEig {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows())
            .map(|r| self.vectors[(r, k)])
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Symmetric eigensolver; rejects inputs whose asymmetry exceeds `1e-12`.
pub fn sym_eig(m: &Matrix<f64>) -> Result<SymEig> {
    if !m.is_square() {
        return Err(shape_err("square matrix", format!("{}x{}", m.rows(), m.cols())));
    }
    let asym = m.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.rows();
    let dm = DMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)]));
    let eig = dm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::scalar::{int, rat};

    #[test]
    fn solve_rational_exact() {
        let a = Matrix::from_rows(&[vec![int(2), int(1)], vec![int(1), int(3)]]).unwrap();
        let x = solve(&a, &[int(3), int(5)]).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
    }

    #[test]
    fn solve_detects_singular() {
        let a = Matrix::from_rows(&[vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        assert!(solve(&a, &[int(1), int(1)]).is_none());
        let f = a.to_f64();
        assert!(solve(&f, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = Matrix::from_rows(&[vec![int(1), int(1), int(0)]]).unwrap();
        let ns = null_space(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(m.mul_vec(v).iter().all(|x| x == &int(0)));
        }
    }

    #[test]
    fn eig_identity() {
        let e = sym_eig(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values.len(), 3);
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_two_by_two_hand_computed() {
        // characteristic polynomial (λ+1)² − 1/4 = 0  →  λ = −3/2, −1/2
        let q = Matrix::from_rows(&[vec![-1.0, 0.5], vec![0.5, -1.0]]).unwrap();
        let e = sym_eig(&q).unwrap();
        assert!((e.values[0] + 1.5).abs() < 1e-12);
        assert!((e.values[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn eig_diag_sorted() {
        let e = sym_eig(&Matrix::diagonal(&[2.0, -5.0])).unwrap();
        assert_eq!(e.values, vec![-5.0, 2.0]);
    }

    #[test]
    fn eig_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn eig_residual_bound() {
        let m = Matrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 3.0, 0.0, 1.0],
            vec![-2.0, 0.0, 1.0, 2.0],
            vec![0.5, 1.0, 2.0, -1.0],
        ])
        .unwrap();
        let e = sym_eig(&m).unwrap();
        let mv = m.matmul(&e.vectors).unwrap();
        let norm = m.max_abs() * 4.0;
        for k in 0..4 {
            for r in 0..4 {
                let resid = mv[(r, k)] - e.vectors[(r, k)] * e.values[k];
                assert!(resid.abs() <= 1e-9 * (1.0 + norm));
            }
        }
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((vtv[(r, c)] - want).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
