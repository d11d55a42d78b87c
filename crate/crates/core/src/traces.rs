//! The matrix of traces and the objects it is built from.
//!
//! Three input forms are supported: multiplication matrices of the quotient
//! algebra, explicit (possibly repeated) root sets, and univariate
//! coefficients through Newton–Girard power sums. Multiplication matrices act
//! on coordinate row vectors: if `c` are the coordinates of `g` in the basis,
//! `c·M_{x_i}` are the coordinates of `x_i·g`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c64, trace_of_product, ComplexMatrix, C64};

/// A point in `ℂ^m`.
pub type Point = Vec<C64>;

/// Evaluates the monomial with exponent vector `exps` at `point`.
pub fn eval_monomial(exps: &[u32], point: &[C64]) -> C64 {
    exps.iter()
        .zip(point)
        .filter(|(&e, _)| e > 0)
        .fold(c64(1.0, 0.0), |acc, (&e, &z)| acc * z.powu(e))
}

fn add_exps(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Renders an exponent vector as `x1^2*x2`, or `1` for the constant monomial.
pub fn format_monomial(exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| {
            if e == 1 {
                format!("x{}", v + 1)
            } else {
                format!("x{}^{}", v + 1, e)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Ordered list of distinct monomials indexing rows and columns of every matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    num_vars: usize,
    monomials: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(num_vars: usize, monomials: Vec<Vec<u32>>) -> Result<Self> {
        if let Some(bad) = monomials.iter().position(|m| m.len() != num_vars) {
            return Err(Error::Dimension(format!(
                "monomial {bad} has {} exponents, expected {num_vars}",
                monomials[bad].len()
            )));
        }
        for i in 0..monomials.len() {
            if let Some(j) = (i + 1..monomials.len()).find(|&j| monomials[j] == monomials[i]) {
                return Err(Error::InvalidInput(format!(
                    "monomials {i} and {j} coincide ({})",
                    format_monomial(&monomials[i])
                )));
            }
        }
        Ok(Self { num_vars, monomials })
    }

    /// `[1, x, …, x^{d-1}]`.
    pub fn power(d: usize) -> Self {
        Self {
            num_vars: 1,
            monomials: (0..d as u32).map(|e| vec![e]).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn monomial(&self, i: usize) -> &[u32] {
        &self.monomials[i]
    }

    pub fn evaluate(&self, i: usize, point: &[C64]) -> C64 {
        eval_monomial(&self.monomials[i], point)
    }

    /// Reordered basis `[b_{order[0]}, b_{order[1]}, …]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            num_vars: self.num_vars,
            monomials: order.iter().map(|&i| self.monomials[i].clone()).collect(),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn check_point(&self, point: &[C64]) -> Result<()> {
        if point.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "point of dimension {} for {} variables",
                point.len(),
                self.num_vars
            )));
        }
        Ok(())
    }
}

impl fmt::Display for MonomialBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.monomials.iter().map(|m| format_monomial(m)).collect();
        write!(f, "[{}]", names.join(", "))
    }
}

/// Multiplication matrices `M_{x_1}, …, M_{x_m}` in a monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MulMatrixSet {
    basis: MonomialBasis,
    matrices: Vec<ComplexMatrix>,
}

impl MulMatrixSet {
    pub fn new(basis: MonomialBasis, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.len() != basis.num_vars() {
            return Err(Error::Dimension(format!(
                "{} multiplication matrices for {} variables",
                matrices.len(),
                basis.num_vars()
            )));
        }
        let n = basis.len();
        if let Some(i) = matrices.iter().position(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Dimension(format!(
                "matrix for x{} is {}x{}, basis has {n} elements",
                i + 1,
                matrices[i].rows(),
                matrices[i].cols()
            )));
        }
        Ok(Self { basis, matrices })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn num_vars(&self) -> usize {
        self.basis.num_vars()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Symmetric matrix `R = [Tr(M_{b_i b_j})]` together with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMatrix {
    pub matrix: ComplexMatrix,
    pub basis: MonomialBasis,
}

impl TraceMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Anything that can report the trace of the multiplication map of a monomial.
pub trait TraceSource {
    fn num_vars(&self) -> usize;

    /// Dimension of the quotient algebra (number of roots with multiplicity).
    fn dimension(&self) -> usize;

    fn trace(&mut self, exps: &[u32]) -> Result<C64>;
}

/// Traces computed from multiplication matrices, with memoised powers and
/// left-to-right prefix products.
pub struct MulMatrixTraces<'a> {
    set: &'a MulMatrixSet,
    powers: HashMap<(usize, u32), ComplexMatrix>,
    prefixes: HashMap<Vec<u32>, ComplexMatrix>,
}

impl<'a> MulMatrixTraces<'a> {
    pub fn new(set: &'a MulMatrixSet) -> Self {
        Self {
            set,
            powers: HashMap::new(),
            prefixes: HashMap::new(),
        }
    }

    fn power(&mut self, var: usize, e: u32) -> Result<ComplexMatrix> {
        if e == 0 {
            return Ok(ComplexMatrix::identity(self.set.dim()));
        }
        if e == 1 {
            return Ok(self.set.matrices[var].clone());
        }
        if let Some(m) = self.powers.get(&(var, e)) {
            return Ok(m.clone());
        }
        let m = self.power(var, e - 1)?.matmul(&self.set.matrices[var])?;
        self.powers.insert((var, e), m.clone());
        Ok(m)
    }

    /// Product `M_{x_1}^{e_1} ⋯ M_{x_m}^{e_m}` evaluated left to right.
    fn product(&mut self, exps: &[u32]) -> Result<ComplexMatrix> {
        let Some(last) = exps.iter().rposition(|&e| e > 0) else {
            return Ok(ComplexMatrix::identity(self.set.dim()));
        };
        if let Some(m) = self.prefixes.get(exps) {
            return Ok(m.clone());
        }
        let mut head = exps.to_vec();
        head[last] = 0;
        let tail = self.power(last, exps[last])?;
        let m = if head.iter().all(|&e| e == 0) {
            tail
        } else {
            self.product(&head)?.matmul(&tail)?
        };
        self.prefixes.insert(exps.to_vec(), m.clone());
        Ok(m)
    }
}

impl TraceSource for MulMatrixTraces<'_> {
    fn num_vars(&self) -> usize {
        self.set.num_vars()
    }

    fn dimension(&self) -> usize {
        self.set.dim()
    }

    fn trace(&mut self, exps: &[u32]) -> Result<C64> {
        if exps.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "exponent vector of length {} for {} variables",
                exps.len(),
                self.num_vars()
            )));
        }
        let Some(last) = exps.iter().rposition(|&e| e > 0) else {
            return Ok(c64(self.dimension() as f64, 0.0));
        };
        // Split off one factor of the last variable so the final product is
        // never formed.
        let mut head = exps.to_vec();
        head[last] -= 1;
        if head.iter().all(|&e| e == 0) {
            return Ok(self.set.matrices[last].trace());
        }
        let prefix = self.product(&head)?;
        trace_of_product(&prefix, &self.set.matrices[last])
    }
}

/// Traces as power sums over an explicit root list (with repetition).
pub struct PointTraces<'a> {
    points: &'a [Point],
    num_vars: usize,
}

impl<'a> PointTraces<'a> {
    pub fn new(points: &'a [Point], num_vars: usize) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.len() != num_vars) {
            return Err(Error::Dimension(format!(
                "point {i} has dimension {}, expected {num_vars}",
                points[i].len()
            )));
        }
        Ok(Self { points, num_vars })
    }
}

impl TraceSource for PointTraces<'_> {
    fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn dimension(&self) -> usize {
        self.points.len()
    }

    fn trace(&mut self, exps: &[u32]) -> Result<C64> {
        if exps.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "exponent vector of length {} for {} variables",
                exps.len(),
                self.num_vars
            )));
        }
        Ok(self.points.iter().map(|p| eval_monomial(exps, p)).sum())
    }
}

/// Builds `R` from any trace source; entry `(i, j)` is computed once and mirrored.
pub fn trace_matrix<S: TraceSource + ?Sized>(source: &mut S, basis: &MonomialBasis) -> Result<TraceMatrix> {
    if source.num_vars() != basis.num_vars() {
        return Err(Error::Dimension(format!(
            "trace source has {} variables, basis has {}",
            source.num_vars(),
            basis.num_vars()
        )));
    }
    let n = basis.len();
    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let t = source.trace(&add_exps(basis.monomial(i), basis.monomial(j)))?;
            r[(i, j)] = t;
            r[(j, i)] = t;
        }
    }
    Ok(TraceMatrix {
        matrix: r,
        basis: basis.clone(),
    })
}

pub fn trace_matrix_from_mulmats(mats: &MulMatrixSet) -> Result<TraceMatrix> {
    trace_matrix(&mut MulMatrixTraces::new(mats), mats.basis())
}

/// `R = [Σ_k (b_i b_j)(z_k)]`; requires as many points as basis elements.
pub fn trace_matrix_from_points(points: &[Point], basis: &MonomialBasis) -> Result<TraceMatrix> {
    if points.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} points for a basis of {} elements",
            points.len(),
            basis.len()
        )));
    }
    trace_matrix(&mut PointTraces::new(points, basis.num_vars())?, basis)
}

/// `V = [b_i(z_j)]`, an `n × r` matrix.
pub fn vandermonde(points: &[Point], basis: &MonomialBasis) -> Result<ComplexMatrix> {
    for p in points {
        basis.check_point(p)?;
    }
    let mut v = ComplexMatrix::zeros(basis.len(), points.len());
    for i in 0..basis.len() {
        for (j, p) in points.iter().enumerate() {
            v[(i, j)] = basis.evaluate(i, p);
        }
    }
    Ok(v)
}

/// Right-hand side `[Tr(x_i · b_j · b_{σ(s)})]_{s}` for the defining systems
/// of the approximate multiplication matrices.
///
/// `row_basis` holds the basis indices `σ(1), …, σ(k)`; `var` and `basis_index`
/// are 0-based.
pub fn rhs_trace_vector_with<S: TraceSource + ?Sized>(
    source: &mut S,
    basis: &MonomialBasis,
    row_basis: &[usize],
    var: usize,
    basis_index: usize,
) -> Result<Vec<C64>> {
    if var >= basis.num_vars() {
        return Err(Error::InvalidInput(format!(
            "variable index {var} out of range for {} variables",
            basis.num_vars()
        )));
    }
    if basis_index >= basis.len() {
        return Err(Error::InvalidInput(format!(
            "basis index {basis_index} out of range for {} elements",
            basis.len()
        )));
    }
    if let Some(&bad) = row_basis.iter().find(|&&s| s >= basis.len()) {
        return Err(Error::InvalidInput(format!("row basis index {bad} out of range")));
    }
    let mut lead = basis.monomial(basis_index).to_vec();
    lead[var] += 1;
    row_basis
        .iter()
        .map(|&s| source.trace(&add_exps(&lead, basis.monomial(s))))
        .collect()
}

pub fn rhs_trace_vector(
    mats: &MulMatrixSet,
    row_basis: &[usize],
    var: usize,
    basis_index: usize,
) -> Result<Vec<C64>> {
    rhs_trace_vector_with(&mut MulMatrixTraces::new(mats), mats.basis(), row_basis, var, basis_index)
}

pub fn rhs_trace_vector_from_points(
    points: &[Point],
    basis: &MonomialBasis,
    row_basis: &[usize],
    var: usize,
    basis_index: usize,
) -> Result<Vec<C64>> {
    rhs_trace_vector_with(
        &mut PointTraces::new(points, basis.num_vars())?,
        basis,
        row_basis,
        var,
        basis_index,
    )
}

/// Power sums `s_0, …, s_{2d-2}` of the roots of a degree-`d` polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSums {
    pub degree: usize,
    pub sums: Vec<C64>,
}

/// Newton–Girard power sums from ascending coefficients `[c_0, …, c_d]`.
///
/// Non-monic input is divided through by its leading coefficient first.
pub fn power_sums_from_coeffs(coeffs: &[C64]) -> Result<PowerSums> {
    let lead_idx = coeffs
        .iter()
        .rposition(|c| *c != c64(0.0, 0.0))
        .ok_or_else(|| Error::Degree("zero polynomial".into()))?;
    let d = lead_idx;
    if d == 0 {
        return Err(Error::Degree("constant polynomial has no roots".into()));
    }
    let lead = coeffs[d];
    // a[t] is the coefficient of x^{d-t} in the monic polynomial.
    let a: Vec<C64> = (0..=d).map(|t| coeffs[d - t] / lead).collect();
    let top = 2 * d - 2;
    let mut s = vec![c64(0.0, 0.0); top + 1];
    s[0] = c64(d as f64, 0.0);
    for t in 1..=top {
        let mut acc = c64(0.0, 0.0);
        for i in 1..t.min(d + 1) {
            acc += a[i] * s[t - i];
        }
        if t <= d {
            acc += a[t] * (t as f64);
        }
        s[t] = -acc;
    }
    Ok(PowerSums { degree: d, sums: s })
}

/// Hankel matrix `[s_{i+j}]` with basis `[1, x, …, x^{d-1}]`.
pub fn hankel_trace_matrix(s: &PowerSums) -> Result<TraceMatrix> {
    let d = s.degree;
    if d == 0 || s.sums.len() != 2 * d - 1 {
        return Err(Error::Dimension(format!(
            "degree {d} needs {} power sums, got {}",
            (2 * d).saturating_sub(1),
            s.sums.len()
        )));
    }
    let mut r = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            r[(i, j)] = s.sums[i + j];
        }
    }
    Ok(TraceMatrix {
        matrix: r,
        basis: MonomialBasis::power(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c64(x, 0.0)).collect()
    }

    #[test]
    fn power_sums_of_multiple_roots() {
        // x^5 - 7x^4 + 19x^3 - 25x^2 + 16x - 4 = (x-1)^3 (x-2)^2
        let p = power_sums_from_coeffs(&real(&[-4.0, 16.0, -25.0, 19.0, -7.0, 1.0])).unwrap();
        let want = [5.0, 7.0, 11.0, 19.0, 35.0, 67.0, 131.0, 259.0, 515.0];
        assert_eq!(p.sums.len(), want.len());
        for (a, b) in p.sums.iter().zip(want) {
            assert!((a - c64(b, 0.0)).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn power_sums_small_cases() {
        let a = c64(0.3, -1.2);
        let p = power_sums_from_coeffs(&[-a, c64(1.0, 0.0)]).unwrap();
        assert_eq!(p.sums, vec![c64(1.0, 0.0)]);
        assert_eq!(p.degree, 1);

        let p = power_sums_from_coeffs(&real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.sums, real(&[2.0, 0.0, 2.0]));

        // Non-monic input is normalised.
        let p = power_sums_from_coeffs(&real(&[-3.0, 0.0, 3.0])).unwrap();
        assert_eq!(p.sums, real(&[2.0, 0.0, 2.0]));
    }

    #[test]
    fn power_sums_reject_constants() {
        assert!(matches!(power_sums_from_coeffs(&real(&[2.0])), Err(Error::Degree(_))));
        assert!(matches!(power_sums_from_coeffs(&real(&[0.0, 0.0])), Err(Error::Degree(_))));
    }

    #[test]
    fn hankel_small() {
        let r = hankel_trace_matrix(&PowerSums {
            degree: 1,
            sums: real(&[1.0]),
        })
        .unwrap();
        assert_eq!(r.matrix, ComplexMatrix::from_real(1, 1, &[1.0]).unwrap());
        let r = hankel_trace_matrix(&PowerSums {
            degree: 2,
            sums: real(&[2.0, 0.0, 2.0]),
        })
        .unwrap();
        assert_eq!(
            r.matrix,
            ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 2.0]]).unwrap()
        );
        assert!(hankel_trace_matrix(&PowerSums {
            degree: 2,
            sums: real(&[2.0, 0.0])
        })
        .is_err());
    }

    #[test]
    fn basis_rejects_duplicates_and_bad_lengths() {
        assert!(MonomialBasis::new(2, vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(MonomialBasis::new(2, vec![vec![0]]).is_err());
        let b = MonomialBasis::new(2, vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(b.to_string(), "[1, x1, x1*x2]");
    }

    #[test]
    fn single_variable_trivial_trace() {
        let basis = MonomialBasis::power(1);
        let set = MulMatrixSet::new(basis, vec![ComplexMatrix::from_real(1, 1, &[7.0]).unwrap()]).unwrap();
        let r = trace_matrix_from_mulmats(&set).unwrap();
        assert_eq!(r.matrix, ComplexMatrix::from_real(1, 1, &[1.0]).unwrap());
    }

    #[test]
    fn vandermonde_examples() {
        let pts = vec![real(&[1.0]), real(&[-1.0])];
        let v = vandermonde(&pts, &MonomialBasis::power(2)).unwrap();
        assert_eq!(v, ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).unwrap());

        let basis =
            MonomialBasis::new(2, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]]).unwrap();
        let v = vandermonde(&[real(&[1.0, 1.0])], &basis).unwrap();
        assert_eq!(v.column(0), real(&[1.0; 5]));

        assert!(matches!(vandermonde(&[real(&[1.0])], &basis), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_point_trace() {
        let r = trace_matrix_from_points(&[vec![c64(2.5, 1.0)]], &MonomialBasis::power(1)).unwrap();
        assert_eq!(r.matrix, ComplexMatrix::from_real(1, 1, &[1.0]).unwrap());
    }

    #[test]
    fn rhs_index_checks() {
        let pts = vec![real(&[1.0]), real(&[2.0])];
        let b = MonomialBasis::power(2);
        assert!(rhs_trace_vector_from_points(&pts, &b, &[0, 1], 1, 0).is_err());
        assert!(rhs_trace_vector_from_points(&pts, &b, &[0, 1], 0, 2).is_err());
        assert!(rhs_trace_vector_from_points(&pts, &b, &[0, 5], 0, 0).is_err());
        let r = rhs_trace_vector_from_points(&pts, &b, &[0, 1], 0, 0).unwrap();
        assert_eq!(r, real(&[3.0, 5.0]));
    }
}
