//! Dense complex linear algebra: complete-pivoting elimination, nullspaces,
//! singular values, eigendecomposition, solves and commutators.
//!
//! Everything works in complex double precision. Eigenvalues and singular
//! values go through `nalgebra`; the elimination is implemented here because
//! rank decisions depend on its exact pivot sequence.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative slack used to treat two pivot candidates as tied.
const PIVOT_TIE_SLACK: f64 = 1e-14;

/// Pivot ratio beyond which a square system is reported as singular.
const SOLVE_SINGULAR_RATIO: f64 = 1e14;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let nested: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c64(x, 0.0)).collect())
            .collect();
        Self::from_rows(&nested)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
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

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Submatrix picking the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|z| format_complex(*z)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Short human-readable rendering, dropping a negligible imaginary part.
pub fn format_complex(z: C64) -> String {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        format!("{:.6}", z.re)
    } else if z.im < 0.0 {
        format!("{:.6}-{:.6}i", z.re, -z.im)
    } else {
        format!("{:.6}+{:.6}i", z.re, z.im)
    }
}

/// `Tr(A·B)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.cols != b.rows || a.rows != b.cols {
        return Err(Error::Dimension(format!(
            "trace of {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.rows {
        for l in 0..a.cols {
            acc += a[(i, l)] * b[(l, i)];
        }
    }
    Ok(acc)
}

/// Outcome of (possibly partial) Gaussian elimination with complete pivoting.
///
/// With `P` and `Q` the permutation matrices encoded by `p_perm` and `q_perm`,
/// `(P·M·Q)[i][j] = M[p_perm[i]][q_perm[j]]` and `P·M·Q = L·U`. After a partial
/// run, rows `steps..n` of `upper` hold the unreduced Schur complement.
#[derive(Clone, Debug)]
pub struct GecpResult {
    pub p_perm: Vec<usize>,
    pub q_perm: Vec<usize>,
    pub lower: ComplexMatrix,
    pub upper: ComplexMatrix,
    pub steps: usize,
    pub pivot_magnitudes: Vec<f64>,
}

impl GecpResult {
    pub fn dim(&self) -> usize {
        self.upper.rows()
    }

    /// Largest magnitude in the unreduced block left after `steps` steps.
    pub fn remaining_max(&self) -> f64 {
        remaining_block_max(&self.upper, self.steps)
    }

    /// Canonical nullspace of the first `k` rows of `upper`, in original column order.
    pub fn nullspace(&self, k: usize) -> Result<Vec<Vec<C64>>> {
        nullspace_of_top_rows(&self.upper, k, &self.q_perm)
    }

    /// Solves `M·x = b` with a full factorization.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if self.steps < n {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {n}x{n} system",
                b.len()
            )));
        }
        // L z = P b
        let mut z: Vec<C64> = self.p_perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lower[(i, j)];
                let zj = z[j];
                z[i] -= l * zj;
            }
        }
        // U y = z
        for i in (0..n).rev() {
            let mut acc = z[i];
            for (j, zj) in z.iter().enumerate().skip(i + 1) {
                acc -= self.upper[(i, j)] * zj;
            }
            z[i] = acc / self.upper[(i, i)];
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (j, &qj) in self.q_perm.iter().enumerate() {
            x[qj] = z[j];
        }
        Ok(x)
    }

    /// Ratio of the largest to the smallest pivot magnitude.
    pub fn pivot_ratio(&self) -> f64 {
        match (
            self.pivot_magnitudes.first(),
            self.pivot_magnitudes.iter().cloned().reduce(f64::min),
        ) {
            (Some(&first), Some(min)) if min > 0.0 => {
                let max = self.pivot_magnitudes.iter().cloned().fold(first, f64::max);
                max / min
            }
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }
}

fn remaining_block_max(u: &ComplexMatrix, from: usize) -> f64 {
    let n = u.rows();
    let mut best = 0.0f64;
    for s in from..n {
        for t in from..u.cols() {
            best = best.max(u[(s, t)].norm());
        }
    }
    best
}

/// Complete-pivoting elimination with a constant stopping threshold.
pub fn gecp_partial(m: &ComplexMatrix, max_steps: usize, stop_threshold: f64) -> Result<GecpResult> {
    gecp_partial_with(m, max_steps, |_| stop_threshold)
}

/// Complete-pivoting elimination where the stopping threshold may depend on
/// the number of completed steps.
///
/// Before step `k` (0-based) the largest remaining magnitude is compared against
/// `stop(k)`; elimination halts when it does not exceed it. Among tied candidates
/// the lexicographically smallest (row, column) position in the working matrix wins.
pub fn gecp_partial_with<F>(m: &ComplexMatrix, max_steps: usize, mut stop: F) -> Result<GecpResult>
where
    F: FnMut(usize) -> f64,
{
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "elimination needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if max_steps > n {
        return Err(Error::Dimension(format!(
            "max_steps {max_steps} exceeds dimension {n}"
        )));
    }
    let mut a = m.clone();
    let mut lower = ComplexMatrix::identity(n);
    let mut p_perm: Vec<usize> = (0..n).collect();
    let mut q_perm: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(max_steps);

    for step in 0..max_steps {
        let mut best = 0.0f64;
        for s in step..n {
            for t in step..n {
                let mag = a[(s, t)].norm();
                if !mag.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "entry ({s}, {t}) during elimination step {step}"
                    )));
                }
                best = best.max(mag);
            }
        }
        if best == 0.0 || best <= stop(step) {
            break;
        }
        let cutoff = best * (1.0 - PIVOT_TIE_SLACK);
        let (ps, pt) = (step..n)
            .flat_map(|s| (step..n).map(move |t| (s, t)))
            .find(|&(s, t)| a[(s, t)].norm() >= cutoff)
            .expect("maximum is attained");

        if ps != step {
            for t in 0..n {
                let tmp = a[(step, t)];
                a[(step, t)] = a[(ps, t)];
                a[(ps, t)] = tmp;
            }
            for t in 0..step {
                let tmp = lower[(step, t)];
                lower[(step, t)] = lower[(ps, t)];
                lower[(ps, t)] = tmp;
            }
            p_perm.swap(step, ps);
        }
        if pt != step {
            for s in 0..n {
                let tmp = a[(s, step)];
                a[(s, step)] = a[(s, pt)];
                a[(s, pt)] = tmp;
            }
            q_perm.swap(step, pt);
        }

        let pivot = a[(step, step)];
        pivots.push(pivot.norm());
        for s in step + 1..n {
            let l = a[(s, step)] / pivot;
            lower[(s, step)] = l;
            a[(s, step)] = C64::new(0.0, 0.0);
            if l == C64::new(0.0, 0.0) {
                continue;
            }
            for t in step + 1..n {
                let u = a[(step, t)];
                a[(s, t)] -= l * u;
            }
        }
    }

    if a.as_slice().iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("elimination overflowed".into()));
    }
    Ok(GecpResult {
        p_perm,
        q_perm,
        lower,
        upper: a,
        steps: pivots.len(),
        pivot_magnitudes: pivots,
    })
}

/// Nullspace of the `k × n` matrix formed by the first `k` rows of `u`.
///
/// `u` must be upper trapezoidal in its first `k` rows (as produced by
/// elimination) with a nonzero leading diagonal. Vector `j` carries a 1 in
/// free position `k + j`, zeros in the other free positions, and the pivot
/// positions are back-substituted. Coordinates are returned in the original
/// column order, i.e. with `q_perm` undone.
pub fn nullspace_of_top_rows(u: &ComplexMatrix, k: usize, q_perm: &[usize]) -> Result<Vec<Vec<C64>>> {
    let n = u.cols();
    if k > u.rows() || k > n {
        return Err(Error::Dimension(format!(
            "cannot take {k} rows of a {}x{n} matrix",
            u.rows()
        )));
    }
    if q_perm.len() != n {
        return Err(Error::Dimension(format!(
            "column permutation of length {} for {n} columns",
            q_perm.len()
        )));
    }
    if let Some(step) = (0..k).find(|&i| u[(i, i)] == C64::new(0.0, 0.0)) {
        return Err(Error::RankDeficient { step, requested: k });
    }
    let mut out = Vec::with_capacity(n - k);
    for free in k..n {
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[free] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = u[(i, free)];
            for t in i + 1..k {
                acc += u[(i, t)] * y[t];
            }
            y[i] = -acc / u[(i, i)];
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (t, &qt) in q_perm.iter().enumerate() {
            v[qt] = y[t];
        }
        out.push(v);
    }
    Ok(out)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let len = m.rows().min(m.cols());
    if len == 0 {
        return Ok(Vec::new());
    }
    if m.max_abs() == 0.0 {
        return Ok(vec![0.0; len]);
    }
    let svd = nalgebra::linalg::SVD::try_new(m.to_nalgebra(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::NoConvergence("singular value decomposition".into()))?;
    let mut values: Vec<f64> = svd.singular_values.iter().cloned().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("singular values".into()));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Eigenvalues with their right eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Column `t` is the unit-norm eigenvector for `values[t]`.
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of a square matrix via a complex Schur form.
///
/// Eigenvalues are sorted by real part, then imaginary part.
pub fn eigen(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.to_nalgebra(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NoConvergence("Schur iteration".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);

    // Eigenvectors of the triangular factor by back-substitution.
    let mut y = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in j + 1..=i {
                acc += t[(j, l)] * y[(l, i)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(j, i)] = -acc / denom;
        }
    }
    let x = q * y;

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    order.sort_by(|&a, &b| {
        diag[a]
            .re
            .total_cmp(&diag[b].re)
            .then(diag[a].im.total_cmp(&diag[b].im))
    });

    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let norm = (0..n).map(|r| x[(r, src)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            vectors[(r, col)] = x[(r, src)] / norm;
        }
    }
    let values: Vec<C64> = order.iter().map(|&i| diag[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalues".into()));
    }
    Ok(Eigen { values, vectors })
}

/// Solves `a·x = b` through a full complete-pivoting factorization.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    factorize(a)?.solve(b)
}

/// Full complete-pivoting factorization of a square, numerically regular matrix.
pub fn factorize(a: &ComplexMatrix) -> Result<GecpResult> {
    let n = a.rows();
    let lu = gecp_partial(a, n, 0.0)?;
    let ratio = lu.pivot_ratio();
    if lu.steps < n || ratio > SOLVE_SINGULAR_RATIO {
        return Err(Error::Singular { condition: ratio });
    }
    Ok(lu)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let lu = factorize(a)?;
    let n = a.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        e[j] = C64::new(1.0, 0.0);
        let col = lu.solve(&e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// `a·b − b·a`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "commutator of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    a.matmul(b)?.sub(&b.matmul(a)?)
}
