//! Approximate radical of a zero-dimensional ideal with clustered roots.
//!
//! After the numerical rank `k` of the matrix of traces is fixed, the `m·k`
//! systems `R^(k)·v_{i,j} = r_{i,j}` give approximate multiplication
//! matrices `M'_{x_i}` of size `k×k`, one eigenvalue per cluster. Their
//! common eigenvectors, taken from a random real combination, give the
//! cluster means.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, commutator, condition_number, eigen, factorize, format_complex, gecp_partial, inverse, ComplexMatrix,
    GecpResult, C64,
};
use crate::rank::{decide_rank, RankMethod, RankReport, ThresholdRule, ThresholdSpec};
use crate::traces::{
    format_monomial, rhs_trace_vector_with, trace_matrix, MonomialBasis, MulMatrixSet, MulMatrixTraces, Point,
    PointTraces, TraceMatrix, TraceSource,
};

/// Largest condition estimate accepted for `R^(k)` and change-of-basis matrices.
pub const REGULARITY_LIMIT: f64 = 1e12;

/// Largest eigenvector-matrix condition accepted before re-drawing the combination.
pub const EIGENVECTOR_LIMIT: f64 = 1e10;

const MEAN_ATTEMPTS: usize = 3;

/// Sparse multivariate polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    pub num_vars: usize,
    /// Exponent vectors with coefficients, like terms combined.
    pub terms: Vec<(Vec<u32>, C64)>,
}

impl MultiPoly {
    pub fn new(num_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Self {
        let mut out: Vec<(Vec<u32>, C64)> = Vec::new();
        for (e, c) in terms {
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some(t) => t.1 += c,
                None => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| *c != c64(0.0, 0.0));
        Self { num_vars, terms: out }
    }

    /// `Σ v_t·b_t` over a basis.
    pub fn from_coords(basis: &MonomialBasis, v: &[C64]) -> Self {
        Self::new(basis.num_vars(), basis.monomials().iter().cloned().zip(v.iter().cloned()))
    }

    pub fn coefficient(&self, exps: &[u32]) -> C64 {
        self.terms
            .iter()
            .find(|(e, _)| e.as_slice() == exps)
            .map(|t| t.1)
            .unwrap_or(c64(0.0, 0.0))
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| c * crate::traces::eval_monomial(e, point))
            .sum()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({})*{}", format_complex(*c), format_monomial(e)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `f_{i,j} = x_i·b_j − Σ_s v_{i,j,s}·b_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    /// 0-based variable index `i`.
    pub var: usize,
    /// 0-based position `j` in the column basis.
    pub basis_index: usize,
    pub poly: MultiPoly,
}

/// How the rank is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankSelection {
    Spec(ThresholdSpec),
    /// Candidate rank supplied by the caller.
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadicalOptions {
    pub rank: RankSelection,
    pub method: RankMethod,
    pub seed: u64,
}

impl RadicalOptions {
    pub fn new(rank: RankSelection) -> Self {
        Self {
            rank,
            method: RankMethod::Gecp,
            seed: 0,
        }
    }

    pub fn with_threshold(threshold: f64) -> Self {
        Self::new(RankSelection::Spec(ThresholdSpec::Absolute(threshold)))
    }

    pub fn with_epsilon(epsilon: f64) -> Self {
        Self::new(RankSelection::Spec(ThresholdSpec::Epsilon {
            epsilon,
            b_prime: None,
        }))
    }

    pub fn with_rank(k: usize) -> Self {
        Self::new(RankSelection::Fixed(k))
    }

    pub fn method(mut self, method: RankMethod) -> Self {
        self.method = method;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Means read off the conjugated approximate multiplication matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterMeans {
    /// Sorted lexicographically by (re, im) of each coordinate.
    pub points: Vec<Point>,
    /// Off-diagonal Frobenius norm of `W^{-1}·M'_{x_i}·W`, per variable.
    pub offdiag_residuals: Vec<f64>,
    pub eigenvector_condition: f64,
    /// Number of random combinations drawn.
    pub attempts: usize,
}

#[derive(Clone, Debug)]
pub struct RadicalOutput {
    pub rank: usize,
    /// Full basis `B` of the input.
    pub basis: MonomialBasis,
    /// Basis indices `σ(1..k)` of the rows used in `R^(k)`.
    pub row_basis: Vec<usize>,
    /// Basis indices of `b_1..b_k`.
    pub col_indices: Vec<usize>,
    pub col_basis: MonomialBasis,
    pub generators: Vec<Generator>,
    /// Canonical nullspace of the first `k` rows of the reduced `R`.
    pub nullspace: Vec<MultiPoly>,
    pub mul_primes: Vec<ComplexMatrix>,
    pub means: ClusterMeans,
    /// `‖[M'_i, M'_j]‖_F` for `i < j` in lexicographic order.
    pub commutator_norms: Vec<f64>,
    /// Largest entry magnitude over all commutators.
    pub commutator_max_entry: f64,
    pub report: RankReport,
    /// Rank from the other method, absent for a fixed rank.
    pub cross_check: Option<RankReport>,
    pub block_condition: f64,
    pub gecp: GecpResult,
}

/// Canonical nullspace polynomials of the first `k` rows of the reduced matrix.
pub fn radical_nullspace_generators(gecp: &GecpResult, basis: &MonomialBasis, k: usize) -> Result<Vec<MultiPoly>> {
    if basis.len() != gecp.dim() {
        return Err(Error::Dimension(format!(
            "basis of {} elements for {}x{} factorization",
            basis.len(),
            gecp.dim(),
            gecp.dim()
        )));
    }
    Ok(gecp
        .nullspace(k)?
        .iter()
        .map(|v| MultiPoly::from_coords(basis, v))
        .collect())
}

fn sort_points(points: &mut [Point]) {
    points.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Reads cluster means from a seeded random real combination of `mul_primes`.
pub fn cluster_means(mul_primes: &[ComplexMatrix], seed: u64) -> Result<ClusterMeans> {
    let first = mul_primes
        .first()
        .ok_or_else(|| Error::InvalidInput("no multiplication matrices".into()))?;
    let k = first.rows();
    if k == 0 || mul_primes.iter().any(|m| !m.is_square() || m.rows() != k) {
        return Err(Error::Dimension("matrices must be square, nonempty and of equal size".into()));
    }
    let mut worst = 0.0f64;
    for attempt in 0..MEAN_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut combo = ComplexMatrix::zeros(k, k);
        for m in mul_primes {
            let c: f64 = rng.random();
            combo = combo.add(&m.scale(c64(c, 0.0)))?;
        }
        let w = eigen(&combo)?.vectors;
        let cond = condition_number(&w)?;
        if cond.is_nan() || cond > EIGENVECTOR_LIMIT {
            log::warn!("random combination {attempt} has eigenvector condition {cond:.3e}; redrawing");
            worst = worst.max(cond);
            continue;
        }
        let w_inv = match inverse(&w) {
            Ok(inv) => inv,
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let mut points = vec![vec![c64(0.0, 0.0); mul_primes.len()]; k];
        let mut offdiag_residuals = Vec::with_capacity(mul_primes.len());
        for (i, m) in mul_primes.iter().enumerate() {
            let d = w_inv.matmul(&m.matmul(&w)?)?;
            let mut off = 0.0;
            for s in 0..k {
                for t in 0..k {
                    if s == t {
                        points[s][i] = d[(s, s)];
                    } else {
                        off += d[(s, t)].norm_sqr();
                    }
                }
            }
            offdiag_residuals.push(off.sqrt());
        }
        sort_points(&mut points);
        return Ok(ClusterMeans {
            points,
            offdiag_residuals,
            eigenvector_condition: cond,
            attempts: attempt + 1,
        });
    }
    Err(Error::DefectiveCombination {
        attempts: MEAN_ATTEMPTS,
        condition: worst,
    })
}

/// `k×k` principal blocks of `T·M·T^{-1}` where the rows of `T` are
/// `complement` followed by `radical_gens`.
pub fn restrict_by_change_of_basis(
    mats: &MulMatrixSet,
    radical_gens: &[Vec<C64>],
    complement: &[Vec<C64>],
) -> Result<Vec<ComplexMatrix>> {
    let n = mats.dim();
    let k = complement.len();
    if k + radical_gens.len() != n {
        return Err(Error::Dimension(format!(
            "{k} complement and {} radical vectors for dimension {n}",
            radical_gens.len()
        )));
    }
    if radical_gens.is_empty() {
        return Ok(mats.matrices().to_vec());
    }
    let rows: Vec<Vec<C64>> = complement.iter().chain(radical_gens).cloned().collect();
    let t = ComplexMatrix::from_rows(&rows)?;
    let cond = condition_number(&t)?;
    if cond.is_nan() || cond > REGULARITY_LIMIT {
        return Err(Error::Singular { condition: cond });
    }
    let t_inv = inverse(&t)?;
    let idx: Vec<usize> = (0..k).collect();
    mats.matrices()
        .iter()
        .map(|m| Ok(t.matmul(m)?.matmul(&t_inv)?.select(&idx, &idx)))
        .collect()
}

/// Unit coordinate vectors at the first `k` pivot columns.
pub fn pivot_complement(gecp: &GecpResult, k: usize) -> Vec<Vec<C64>> {
    let n = gecp.dim();
    gecp.q_perm[..k]
        .iter()
        .map(|&q| {
            let mut e = vec![c64(0.0, 0.0); n];
            e[q] = c64(1.0, 0.0);
            e
        })
        .collect()
}

fn choose_rank(r: &TraceMatrix, opts: &RadicalOptions) -> Result<(RankReport, Option<RankReport>, GecpResult)> {
    match opts.rank {
        RankSelection::Fixed(k) => {
            if k > r.dim() {
                return Err(Error::InvalidInput(format!("rank {k} exceeds dimension {}", r.dim())));
            }
            let g = gecp_partial(&r.matrix, k, 0.0)?;
            if g.steps < k {
                return Err(Error::RankDeficient {
                    step: g.steps,
                    requested: k,
                });
            }
            let report = RankReport {
                rank: k,
                method: RankMethod::Gecp,
                diagnostics: g.pivot_magnitudes.clone(),
                threshold_used: g.remaining_max(),
            };
            Ok((report, None, g))
        }
        RankSelection::Spec(spec) => {
            let rule = ThresholdRule::resolve(spec, r)?;
            let d = decide_rank(r, &rule, opts.method)?;
            Ok((d.chosen, Some(d.cross_check), d.gecp))
        }
    }
}

/// Approximate radical from any trace source over `basis`.
pub fn approximate_radical_with<S: TraceSource + ?Sized>(
    source: &mut S,
    basis: &MonomialBasis,
    opts: &RadicalOptions,
) -> Result<RadicalOutput> {
    let m = basis.num_vars();
    if m == 0 {
        return Err(Error::InvalidInput("no variables".into()));
    }
    let r = trace_matrix(source, basis)?;
    let (report, cross_check, gecp) = choose_rank(&r, opts)?;
    let k = report.rank;
    if k == 0 {
        return Err(Error::AmbiguousRank("numerical rank is 0".into()));
    }
    let row_basis: Vec<usize> = gecp.p_perm[..k].to_vec();

    // Prefer the leading basis elements; fall back to the pivot columns.
    let leading: Vec<usize> = (0..k).collect();
    let pivots: Vec<usize> = gecp.q_perm[..k].to_vec();
    let mut chosen = None;
    let mut worst = 0.0f64;
    for cols in [leading, pivots] {
        let block = r.matrix.select(&row_basis, &cols);
        let cond = condition_number(&block)?;
        if cond <= REGULARITY_LIMIT {
            chosen = Some((cols, block, cond));
            break;
        }
        worst = worst.max(cond);
    }
    let (col_indices, block, block_condition) = chosen.ok_or(Error::AssumptionViolation {
        rank: k,
        condition: worst,
    })?;
    let lu = factorize(&block).map_err(|_| Error::AssumptionViolation {
        rank: k,
        condition: block_condition,
    })?;
    let col_basis = basis.permuted(&col_indices);

    let mut mul_primes = Vec::with_capacity(m);
    let mut generators = Vec::with_capacity(m * k);
    for var in 0..m {
        let mut mp = ComplexMatrix::zeros(k, k);
        for (j, &bj) in col_indices.iter().enumerate() {
            let rhs = rhs_trace_vector_with(source, basis, &row_basis, var, bj)?;
            let v = lu.solve(&rhs)?;
            for (s, &vs) in v.iter().enumerate() {
                mp[(j, s)] = vs;
            }
            let mut lead = basis.monomial(bj).to_vec();
            lead[var] += 1;
            let terms = std::iter::once((lead, c64(1.0, 0.0)))
                .chain(col_basis.monomials().iter().cloned().zip(v.iter().map(|c| -c)));
            generators.push(Generator {
                var,
                basis_index: j,
                poly: MultiPoly::new(m, terms),
            });
        }
        mul_primes.push(mp);
    }

    let mut commutator_norms = Vec::new();
    let mut commutator_max_entry = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let c = commutator(&mul_primes[i], &mul_primes[j])?;
            commutator_norms.push(c.frobenius_norm());
            commutator_max_entry = commutator_max_entry.max(c.max_abs());
        }
    }
    let means = cluster_means(&mul_primes, opts.seed)?;
    let nullspace = radical_nullspace_generators(&gecp, basis, k)?;

    Ok(RadicalOutput {
        rank: k,
        basis: basis.clone(),
        row_basis,
        col_indices,
        col_basis,
        generators,
        nullspace,
        mul_primes,
        means,
        commutator_norms,
        commutator_max_entry,
        report,
        cross_check,
        block_condition,
        gecp,
    })
}

pub fn approximate_radical(mats: &MulMatrixSet, opts: &RadicalOptions) -> Result<RadicalOutput> {
    approximate_radical_with(&mut MulMatrixTraces::new(mats), mats.basis(), opts)
}

/// Approximate radical when the roots themselves are known.
pub fn approximate_radical_from_points(
    points: &[Point],
    basis: &MonomialBasis,
    opts: &RadicalOptions,
) -> Result<RadicalOutput> {
    if points.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} points for a basis of {} elements",
            points.len(),
            basis.len()
        )));
    }
    approximate_radical_with(&mut PointTraces::new(points, basis.num_vars())?, basis, opts)
}

/// What the computed means are checked against.
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    /// Known cluster centroids.
    Centroids(&'a [Point]),
    /// `[b_s(ξ)]` must be a common eigenvector of every `M'_{x_i}`.
    EigenResidual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// Residual for each mean, in the order of `means.points`.
    pub per_mean: Vec<f64>,
    pub max_residual: f64,
}

fn inf_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Substitutes the means back: distance to the nearest centroid, or the
/// relative eigen-residual `‖M'_i·e − ξ_i·e‖ / ‖e‖`.
pub fn verify_by_substitution(output: &RadicalOutput, reference: Reference<'_>) -> Result<ResidualReport> {
    let per_mean: Vec<f64> = match reference {
        Reference::Centroids(centroids) => {
            if centroids.is_empty() {
                return Err(Error::InvalidInput("no centroids".into()));
            }
            output
                .means
                .points
                .iter()
                .map(|p| centroids.iter().map(|c| inf_distance(p, c)).fold(f64::INFINITY, f64::min))
                .collect()
        }
        Reference::EigenResidual => {
            let mut out = Vec::with_capacity(output.means.points.len());
            for p in &output.means.points {
                let e: Vec<C64> = (0..output.col_basis.len()).map(|s| output.col_basis.evaluate(s, p)).collect();
                let norm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let mut worst = 0.0f64;
                for (i, mp) in output.mul_primes.iter().enumerate() {
                    let me = mp.mul_vec(&e)?;
                    let res = me
                        .iter()
                        .zip(&e)
                        .map(|(a, b)| (a - p[i] * b).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    worst = worst.max(res / norm);
                }
                out.push(worst);
            }
            out
        }
    };
    let max_residual = per_mean.iter().cloned().fold(0.0, f64::max);
    Ok(ResidualReport { per_mean, max_residual })
}
