//! Small dense/sparse linear algebra used by the module construction.
//!
//! `Mat<T>` is a row-major dense matrix over any [`Scalar`]; it carries the
//! exact rational path. Everything downstream of orthonormalization works in
//! `f64` on nalgebra matrices or on the CSR type below.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        if let Some(data) = T::gemm(self.rows, self.cols, other.cols, &self.data, &other.data) {
            return Mat {
                rows: self.rows,
                cols: other.cols,
                data,
            };
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow: &mut [T] = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *o = o.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &Mat<T>, factor: &T) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if factor.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + factor.clone() * b.clone();
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[T]) {
        for (i, v) in col.iter().enumerate() {
            self.set(i, j, v.clone());
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat<T> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    pub fn max_abs(&self) -> T {
        let mut best = T::zero();
        for v in &self.data {
            let a = v.abs();
            if a.gt(&best) {
                best = a;
            }
        }
        best
    }

    /// Solves `self * X = rhs` by Gauss-Jordan elimination with pivoting.
    /// Returns `None` for a singular system.
    pub fn solve(&self, rhs: &Mat<T>) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs();
        for col in 0..n {
            let mut piv = None;
            let mut best = T::zero();
            for r in col..n {
                let v = a.get(r, col).abs();
                if !v.is_zero() && (piv.is_none() || v.gt(&best)) {
                    best = v;
                    piv = Some(r);
                    if T::EXACT {
                        break;
                    }
                }
            }
            let piv = piv?;
            if best.is_negligible(&scale) && !T::EXACT {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                for j in 0..m {
                    b.data.swap(piv * m + j, col * m + j);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                let v = a.get(col, j).clone() / p.clone();
                a.set(col, j, v);
            }
            for j in 0..m {
                let v = b.get(col, j).clone() / p.clone();
                b.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(col, j);
                    if !v.is_zero() {
                        let nv = a.get(r, j).clone() - f.clone() * v.clone();
                        a.set(r, j, nv);
                    }
                }
                for j in 0..m {
                    let v = b.get(col, j);
                    if !v.is_zero() {
                        let nv = b.get(r, j).clone() - f.clone() * v.clone();
                        b.set(r, j, nv);
                    }
                }
            }
        }
        Some(b)
    }
}

/// Outcome of the pivoted symmetric elimination of a Gram matrix.
#[derive(Clone, Debug)]
pub struct PivotSelection {
    /// Indices of a maximal linearly independent subset, in pivot order.
    pub pivots: Vec<usize>,
    /// Most negative pivot met, if the matrix is not positive semidefinite.
    pub negative: Option<f64>,
}

/// Rank-revealing symmetric elimination with diagonal pivoting.
///
/// Exact scalars stop at the first vanishing residual diagonal; floats stop
/// below `FLOAT_RANK_TOL` times the largest initial diagonal entry.
pub fn pivoted_selection<T: Scalar>(gram: &Mat<T>) -> PivotSelection {
    let n = gram.rows();
    let mut r = gram.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut scale = T::zero();
    for i in 0..n {
        let d = r.get(i, i).abs();
        if d.gt(&scale) {
            scale = d;
        }
    }
    loop {
        if remaining.is_empty() {
            break;
        }
        let mut best_pos = 0;
        let mut best = r.get(remaining[0], remaining[0]).clone();
        for (pos, &i) in remaining.iter().enumerate().skip(1) {
            let d = r.get(i, i);
            if d.gt(&best) {
                best = d.clone();
                best_pos = pos;
            }
        }
        if best.is_negligible(&scale) || !best.gt(&T::zero()) {
            // Residual should vanish; anything clearly negative means the
            // form is indefinite.
            let mut worst: Option<f64> = None;
            for &i in &remaining {
                let d = r.get(i, i);
                if !d.is_negligible(&scale) && T::zero().gt(d) {
                    let v = d.to_f64();
                    worst = Some(worst.map_or(v, |w: f64| w.min(v)));
                }
                for &j in &remaining {
                    let off = r.get(i, j);
                    if i != j && !off.is_negligible(&scale) {
                        // Nonzero off-diagonal with vanishing diagonals forces
                        // a negative eigenvalue.
                        let v = -off.abs().to_f64();
                        worst = Some(worst.map_or(v, |w: f64| w.min(v)));
                    }
                }
            }
            return PivotSelection {
                pivots,
                negative: worst,
            };
        }
        let p = remaining.swap_remove(best_pos);
        pivots.push(p);
        let dp = r.get(p, p).clone();
        let col: Vec<T> = remaining.iter().map(|&i| r.get(i, p).clone()).collect();
        for (a, &i) in remaining.iter().enumerate() {
            if col[a].is_zero() {
                continue;
            }
            let f = col[a].clone() / dp.clone();
            for (b, &j) in remaining.iter().enumerate() {
                if col[b].is_zero() {
                    continue;
                }
                let nv = r.get(i, j).clone() - f.clone() * col[b].clone();
                r.set(i, j, nv);
            }
        }
    }
    PivotSelection {
        pivots,
        negative: None,
    }
}

/// Symmetric inverse square root `H^{-1/2}` of a positive definite matrix.
///
/// The columns give coordinates of an orthonormal basis in the basis whose
/// Gram matrix is `H`; the symmetric choice keeps the result free of sign
/// ambiguities.
pub fn inverse_sqrt(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if h.iter().all(|_| true) && is_diagonal(h) {
        let mut q = DMatrix::zeros(n, n);
        for i in 0..n {
            let d = h[(i, i)];
            if d <= 0.0 {
                return Err(Error::IntegrabilityViolation { level: 0, pivot: d });
            }
            q[(i, i)] = 1.0 / d.sqrt();
        }
        return Ok(q);
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            return Err(Error::IntegrabilityViolation { level: 0, pivot: lam });
        }
        let s = 1.0 / lam.sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(&scaled * eig.eigenvectors.transpose())
}

fn is_diagonal(h: &DMatrix<f64>) -> bool {
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            if i != j && h[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.values[k];
            }
        }
        m
    }
}

/// Mode-action matrix in orthonormal level bases.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum ModeMatrix {
    Dense(DMatrix<f64>),
    Sparse(Csr),
}

impl ModeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ModeMatrix::Sparse(Csr::from_triplets(rows, cols, Vec::new()))
    }

    pub fn nrows(&self) -> usize {
        match self {
            ModeMatrix::Dense(m) => m.nrows(),
            ModeMatrix::Sparse(s) => s.rows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            ModeMatrix::Dense(m) => m.ncols(),
            ModeMatrix::Sparse(s) => s.cols,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            ModeMatrix::Dense(m) => m.clone(),
            ModeMatrix::Sparse(s) => s.to_dense(),
        }
    }

    /// `self * b`
    pub fn mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ModeMatrix::Dense(m) => m * b,
            ModeMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(s.rows, b.ncols());
                for r in 0..s.rows {
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        let (c, v) = (s.indices[k], s.values[k]);
                        for j in 0..b.ncols() {
                            out[(r, j)] += v * b[(c, j)];
                        }
                    }
                }
                out
            }
        }
    }

    /// `self^T * b`
    pub fn tr_mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ModeMatrix::Dense(m) => m.tr_mul(b),
            ModeMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(s.cols, b.ncols());
                for r in 0..s.rows {
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        let (c, v) = (s.indices[k], s.values[k]);
                        for j in 0..b.ncols() {
                            out[(c, j)] += v * b[(r, j)];
                        }
                    }
                }
                out
            }
        }
    }

    /// `a * self`
    pub fn left_mul(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ModeMatrix::Dense(m) => a * m,
            ModeMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(a.nrows(), s.cols);
                for r in 0..s.rows {
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        let (c, v) = (s.indices[k], s.values[k]);
                        for i in 0..a.nrows() {
                            out[(i, c)] += a[(i, r)] * v;
                        }
                    }
                }
                out
            }
        }
    }

    /// `a * self^T`
    pub fn left_mul_tr(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ModeMatrix::Dense(m) => a * m.transpose(),
            ModeMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(a.nrows(), s.rows);
                for r in 0..s.rows {
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        let (c, v) = (s.indices[k], s.values[k]);
                        for i in 0..a.nrows() {
                            out[(i, r)] += a[(i, c)] * v;
                        }
                    }
                }
                out
            }
        }
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ModeMatrix::Dense(m) => m * v,
            ModeMatrix::Sparse(s) => {
                let mut out = DVector::zeros(s.rows);
                for r in 0..s.rows {
                    let mut acc = 0.0;
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        acc += s.values[k] * v[s.indices[k]];
                    }
                    out[r] = acc;
                }
                out
            }
        }
    }

    pub fn tr_mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ModeMatrix::Dense(m) => m.tr_mul(v),
            ModeMatrix::Sparse(s) => {
                let mut out = DVector::zeros(s.cols);
                for r in 0..s.rows {
                    for k in s.indptr[r]..s.indptr[r + 1] {
                        out[s.indices[k]] += s.values[k] * v[r];
                    }
                }
                out
            }
        }
    }
}

/// Result of a power iteration.
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub value: f64,
    pub iterations: usize,
    pub last_change: f64,
}

/// Largest singular value of a dense matrix: Lanczos on `A^T A` with full
/// reorthogonalization, restarted from the leading Ritz vector. `max_iter`
/// bounds the total number of products with `A^T A`.
pub fn largest_singular_value(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<PowerIteration> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(PowerIteration {
            value: 0.0,
            iterations: 0,
            last_change: 0.0,
        });
    }
    let krylov = n.min(120);
    // Deterministic start with support on every coordinate.
    let mut start = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin());
    start /= start.norm();
    let mut iterations = 0;
    let mut theta_prev = 0.0;
    let mut change = f64::INFINITY;
    while iterations < max_iter {
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut exhausted = false;
        for j in 0..krylov {
            let mut w = a.tr_mul(&(a * &basis[j]));
            iterations += 1;
            alpha.push(basis[j].dot(&w));
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            let nb = w.norm();
            if nb <= 1e-14 * alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE) || j + 1 == n {
                exhausted = true;
                break;
            }
            if j + 1 < krylov {
                beta.push(nb);
                basis.push(w / nb);
            } else {
                beta.push(nb);
            }
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        let y = eig.eigenvectors.column(imax);
        let residual = if exhausted { 0.0 } else { beta[k - 1] * y[k - 1].abs() };
        let mut ritz = DVector::zeros(n);
        for (i, b) in basis.iter().enumerate().take(k) {
            ritz.axpy(y[i], b, 1.0);
        }
        let sigma = (a * &ritz).norm() / ritz.norm();
        change = (theta - theta_prev).abs() / theta.abs().max(f64::MIN_POSITIVE);
        theta_prev = theta;
        if exhausted || residual <= tol * theta.abs() {
            return Ok(PowerIteration {
                value: sigma.max(theta.max(0.0).sqrt()),
                iterations,
                last_change: residual / theta.abs().max(f64::MIN_POSITIVE),
            });
        }
        let rn = ritz.norm();
        start = ritz / rn;
    }
    Err(Error::NonConvergence {
        iterations,
        last_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, Rational};

    #[test]
    fn exact_solve_recovers_inverse() {
        let a = Mat::from_fn(3, 3, |i, j| rat_int(((i + 1) * (j + 2) + i * i) as i64 % 7 + (i == j) as i64 * 5));
        let x = a.solve(&Mat::identity(3)).unwrap();
        assert_eq!(a.matmul(&x), Mat::<Rational>::identity(3));
    }

    #[test]
    fn pivoted_selection_finds_exact_rank() {
        // rank-2 Gram matrix of vectors (1,0), (0,1), (1,1)
        let g = Mat::from_fn(3, 3, |i, j| {
            let v = [[1, 0], [0, 1], [1, 1]];
            rat_int(v[i][0] * v[j][0] + v[i][1] * v[j][1])
        });
        let sel = pivoted_selection(&g);
        assert_eq!(sel.pivots.len(), 2);
        assert!(sel.negative.is_none());
    }

    #[test]
    fn pivoted_selection_flags_indefinite_forms() {
        let g = Mat::from_fn(2, 2, |i, j| if i == j { rat(1, 1) } else { rat(2, 1) });
        let sel = pivoted_selection(&g);
        assert!(sel.negative.is_some());
    }

    #[test]
    fn inverse_sqrt_orthonormalizes() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let q = inverse_sqrt(&h).unwrap();
        let id = q.transpose() * &h * &q;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn sparse_products_match_dense() {
        let s = Csr::from_triplets(2, 3, vec![(0, 1, 2.0), (1, 2, -1.0), (1, 0, 0.5)]);
        let d = s.to_dense();
        let m = ModeMatrix::Sparse(s);
        let b = DMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 1.0);
        let a = DMatrix::from_fn(4, 2, |i, j| (i + j) as f64 - 1.5);
        let c = DMatrix::from_fn(2, 2, |i, j| (i * j) as f64 + 0.25);
        assert!((m.mul(&b) - &d * &b).norm() < 1e-14);
        assert!((m.tr_mul(&c) - d.transpose() * &c).norm() < 1e-14);
        assert!((m.left_mul(&a) - &a * &d).norm() < 1e-14);
        let a3 = DMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64);
        assert!((m.left_mul_tr(&a3) - &a3 * d.transpose()).norm() < 1e-14);
    }

    #[test]
    fn near_degenerate_top_singular_values() {
        // σ1 = 1, σ2 = 1 − 1e-6: hopeless for plain power iteration
        let n = 300;
        let d = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else if i == 1 { 1.0 - 1e-6 } else { 0.9 * (-(i as f64) / 50.0).exp() });
        let q = DMatrix::from_fn(n, n, |i, j| ((i * 31 + j * 17) as f64 * 0.37).sin()).qr().q();
        let a = &q * DMatrix::from_diagonal(&d) * q.transpose();
        let p = largest_singular_value(&a, 1e-13, 10_000).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10, "{}", p.value);
        assert!(p.iterations < 2000);
    }

    #[test]
    fn singular_value_matches_svd() {
        let a = DMatrix::from_fn(5, 4, |i, j| ((i * 3 + j * 7) % 5) as f64 - 2.0 + (i == j) as u8 as f64);
        let p = largest_singular_value(&a, 1e-13, 10_000).unwrap();
        let svd = a.clone().svd(false, false);
        let top = svd.singular_values.max();
        assert!((p.value - top).abs() < 1e-8 * top);
    }
}
