//! Small dense complex linear algebra.
//!
//! Only what the precoder and the bounds need: products, a Cholesky solve
//! for Hermitian positive-definite systems, a cyclic Jacobi Hermitian
//! eigensolver and a power iteration for the dominant eigenvalue of a Gram
//! matrix. Sizes are tiny (N ≤ N_RF clusters, N_BS ≤ a few hundred).

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix from {} entries",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r: usize| self[(r, c)]).collect()
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self† v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.rows != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "({}x{})† times vector of {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (r, &x) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * x;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix difference".into()));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest modulus of `A - A†`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `a† b`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm_sq(v).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|z| z / n).collect())
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Real eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `values[i]`.
    pub vectors: CMatrix,
}

impl EigenPair {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors.rows();
        CMatrix::from_fn(n, n, |r, c| {
            self.values
                .iter()
                .enumerate()
                .map(|(i, &l)| self.vectors[(r, i)] * self.vectors[(c, i)].conj() * l)
                .sum()
        })
    }
}

const HERMITIAN_TOL: f64 = 1e-10;

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    if !(defect <= HERMITIAN_TOL * a.max_abs().max(1.0)) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix
/// by cyclic complex Jacobi rotations.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigenPair> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut m = a.clone();
    // Symmetrize so later rotations see an exactly Hermitian matrix.
    for r in 0..n {
        m[(r, r)] = C64::new(m[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_sq().sqrt();
    let max_rotations = 100 * n * n;
    let mut rotations = 0usize;

    let off = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                s += m[(r, c)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    while off(&m) > 1e-15 * scale {
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    continue;
                }
                rotations += 1;
                if rotations > max_rotations {
                    return Err(Error::NoConvergence(max_rotations));
                }
                // Phase-rotate index q so that m[p][q] becomes real positive.
                let phase = apq / mag;
                for k in 0..n {
                    m[(k, q)] *= phase.conj();
                }
                for k in 0..n {
                    m[(q, k)] *= phase;
                }
                for k in 0..n {
                    v[(k, q)] *= phase.conj();
                }
                // Real Jacobi rotation on the (p, q) plane.
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let kp = m[(k, p)];
                    let kq = m[(k, q)];
                    m[(k, p)] = kp * c - kq * s;
                    m[(k, q)] = kp * s + kq * c;
                }
                for k in 0..n {
                    let pk = m[(p, k)];
                    let qk = m[(q, k)];
                    m[(p, k)] = pk * c - qk * s;
                    m[(q, k)] = pk * s + qk * c;
                }
                for k in 0..n {
                    let kp = v[(k, p)];
                    let kq = v[(k, q)];
                    v[(k, p)] = kp * c - kq * s;
                    v[(k, q)] = kp * s + kq * c;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenPair { values, vectors })
}

const PIVOT_TOL: f64 = 1e-12;

/// Solves `A X = B` for Hermitian positive-definite `A` by Cholesky
/// factorization. Pivots below `1e-12 · max|A_ii|` are reported as
/// [`Error::SingularMatrix`].
pub fn hermitian_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_hermitian(a)?;
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} system with {}-row right-hand side",
            b.rows()
        )));
    }
    let diag_scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
    let threshold = PIVOT_TOL * diag_scale.max(f64::MIN_POSITIVE);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > threshold) {
            return Err(Error::SingularMatrix { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    let mut x = CMatrix::zeros(n, b.cols());
    for col in 0..b.cols() {
        // L y = b
        let mut y = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = b[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        // L† x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

const POWER_MAX_ITERS: usize = 10_000;
const POWER_TOL: f64 = 1e-13;

/// Largest eigenvalue of `M M†` (the squared top singular value of `M`) by
/// power iteration.
pub fn gram_max_eigen(m: &CMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    // κ_max(M M†) = κ_max(M† M); iterate on the smaller Gram.
    let gram = if m.rows() <= m.cols() {
        m.matmul(&m.adjoint())?
    } else {
        m.adjoint().matmul(m)?
    };
    let n = gram.rows();
    if gram.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let start = vec![C64::new(1.0, 0.0); n];
    match power_iterate(&gram, start) {
        Some(l) => Ok(l),
        None => {
            let perturbed = (0..n)
                .map(|i| C64::from_polar(1.0 + 0.1 * i as f64, 0.7 * i as f64 + 0.3))
                .collect();
            power_iterate(&gram, perturbed).ok_or(Error::NoConvergence(POWER_MAX_ITERS))
        }
    }
}

fn power_iterate(gram: &CMatrix, start: Vec<C64>) -> Option<f64> {
    let mut v = normalized(&start).ok()?;
    let mut previous = f64::NAN;
    for _ in 0..POWER_MAX_ITERS {
        let w = gram.mul_vec(&v).ok()?;
        let rayleigh = inner(&v, &w).re;
        let w_norm = norm_sq(&w).sqrt();
        if w_norm == 0.0 {
            // Start vector fell in the null space.
            return None;
        }
        let residual: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * rayleigh).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= 1e-12 * rayleigh.abs()
            || (rayleigh - previous).abs() <= POWER_TOL * rayleigh.abs()
        {
            return Some(rayleigh.max(0.0));
        }
        previous = rayleigh;
        v = w.into_iter().map(|z| z / w_norm).collect();
    }
    None
}
