//! Approximate square-free factorization of a univariate polynomial whose
//! roots form clusters.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigen, format_complex, ComplexMatrix, C64};
use crate::rank::{decide_rank, RankMethod, RankReport, ThresholdRule, ThresholdSpec};
use crate::traces::{hankel_trace_matrix, power_sums_from_coeffs};

/// Monic polynomial with ascending complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    /// Builds from ascending coefficients, dropping trailing zeros and
    /// dividing by the leading coefficient.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficient".into()));
        }
        let top = coeffs
            .iter()
            .rposition(|c| *c != c64(0.0, 0.0))
            .ok_or_else(|| Error::Degree("zero polynomial".into()))?;
        let lead = coeffs[top];
        let coeffs = coeffs[..=top].iter().map(|c| c / lead).collect();
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| c64(c, 0.0)).collect())
    }

    /// `Π (x − r)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![c64(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c64(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(c64(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Roots as eigenvalues of the companion matrix, sorted by (re, im).
    pub fn roots(&self) -> Result<Vec<C64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let mut c = ComplexMatrix::zeros(d, d);
        for i in 1..d {
            c[(i, i - 1)] = c64(1.0, 0.0);
        }
        for i in 0..d {
            c[(i, d - 1)] = -self.coeffs[i];
        }
        Ok(eigen(&c)?.values)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == c64(0.0, 0.0) {
                continue;
            }
            let real = c.im.abs() <= 1e-12 * c.re.abs().max(1.0);
            let (sign, body) = if real {
                (if c.re < 0.0 { "-" } else { "+" }, format!("{:.6}", c.re.abs()))
            } else {
                ("+", format!("({})", format_complex(*c)))
            };
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let term = if i == 0 {
                body
            } else if real && c.re == 1.0 {
                mono
            } else {
                format!("{body}*{mono}")
            };
            if out.is_empty() {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Reads `v` as `Σ v_i x^i` and normalizes it monic.
pub fn vector_to_polynomial(v: &[C64]) -> Result<Polynomial> {
    if v.iter().all(|c| *c == c64(0.0, 0.0)) {
        return Err(Error::InvalidInput("zero vector has no polynomial".into()));
    }
    Polynomial::new(v.to_vec())
}

/// Output of [`approximate_square_free`].
#[derive(Clone, Debug)]
pub struct SquareFreeResult {
    pub factor: Polynomial,
    pub rank: usize,
    /// Canonical nullspace basis read as polynomials.
    pub nullspace_polys: Vec<Polynomial>,
    pub report: RankReport,
    /// Rank report from the method that was not chosen.
    pub cross_check: RankReport,
}

/// Cauchy-bound estimate `d·ρ^{d−1}` of the derivative bound, with
/// `ρ = 1 + max |a_i|` bounding every root magnitude.
pub fn cauchy_b_prime(f: &Polynomial) -> f64 {
    let d = f.degree();
    let rho = 1.0
        + f.coeffs()[..d]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    d as f64 * rho.powi(d as i32 - 1)
}

/// Minimal-degree element of the span of `vectors`.
///
/// Row-reduces with columns taken from the highest degree downward; the last
/// pivot row then vanishes on every higher-degree pivot column.
fn minimal_degree_vector(vectors: &[Vec<C64>]) -> Vec<C64> {
    let mut rows: Vec<Vec<C64>> = vectors.to_vec();
    let d = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    let tol = 1e-13 * scale;
    let mut done = 0;
    for col in (0..d).rev() {
        if done == rows.len() {
            break;
        }
        let (best, mag) = (done..rows.len())
            .map(|r| (r, rows[r][col].norm()))
            .fold((done, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= tol {
            for r in rows.iter_mut().skip(done) {
                r[col] = c64(0.0, 0.0);
            }
            continue;
        }
        rows.swap(done, best);
        let (head, tail) = rows.split_at_mut(done + 1);
        let pivot_row = &head[done];
        for r in tail.iter_mut() {
            let factor = r[col] / pivot_row[col];
            r.iter_mut().zip(pivot_row).for_each(|(x, p)| *x -= factor * p);
            r[col] = c64(0.0, 0.0);
        }
        done += 1;
    }
    rows.pop().expect("nonempty nullspace")
}

/// Square-free factor `g` whose roots approximate the cluster means of `f`.
pub fn approximate_square_free(f: &Polynomial, spec: ThresholdSpec, method: RankMethod) -> Result<SquareFreeResult> {
    let d = f.degree();
    if d == 0 {
        return Err(Error::Degree("constant polynomial has no roots".into()));
    }
    let sums = power_sums_from_coeffs(f.coeffs())?;
    let r = hankel_trace_matrix(&sums)?;
    let rule = match spec {
        ThresholdSpec::Epsilon { epsilon, b_prime } => ThresholdRule::resolve(
            ThresholdSpec::Epsilon {
                epsilon,
                b_prime: Some(b_prime.unwrap_or_else(|| cauchy_b_prime(f))),
            },
            &r,
        )?,
        abs => ThresholdRule::resolve(abs, &r)?,
    };
    let decision = decide_rank(&r, &rule, method)?;
    let k = decision.chosen.rank;
    if k == 0 {
        return Err(Error::InvalidInput("trace matrix is numerically zero; rank 0".into()));
    }
    if k == d {
        return Ok(SquareFreeResult {
            factor: f.clone(),
            rank: k,
            nullspace_polys: Vec::new(),
            report: decision.chosen,
            cross_check: decision.cross_check,
        });
    }
    let null = decision.gecp.nullspace(k)?;
    let nullspace_polys = null.iter().map(|v| vector_to_polynomial(v)).collect::<Result<Vec<_>>>()?;
    let factor = vector_to_polynomial(&minimal_degree_vector(&null))?;
    if factor.degree() != k {
        log::warn!("square-free factor has degree {} for rank {k}", factor.degree());
    }
    Ok(SquareFreeResult {
        factor,
        rank: k,
        nullspace_polys,
        report: decision.chosen,
        cross_check: decision.cross_check,
    })
}
