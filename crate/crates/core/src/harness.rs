//! Synthetic root clusters, multiplication matrices built from them, and
//! ε-sweeps measuring how the tail quantities shrink with the radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c64, condition_number, inverse, singular_values, ComplexMatrix, C64};
use crate::radical::{approximate_radical, verify_by_substitution, RadicalOptions, Reference, REGULARITY_LIMIT};
use crate::traces::{trace_matrix_from_mulmats, vandermonde, MonomialBasis, MulMatrixSet, Point};

/// Values at or below this are treated as numerical noise when fitting slopes.
pub const NOISE_FLOOR: f64 = 1e-11;

/// One cluster: a center and one offset direction per root.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub center: Point,
    pub offsets: Vec<Vec<C64>>,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.offsets.len()
    }
}

/// Clusters `{z_i + δ_{i,j}·ε}` with `|δ_{i,j,r}| ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSpec {
    pub num_vars: usize,
    pub clusters: Vec<Cluster>,
    pub epsilon: f64,
    /// Quotient basis used when building multiplication matrices.
    pub basis: Option<MonomialBasis>,
}

impl ClusterSpec {
    pub fn new(num_vars: usize, clusters: Vec<Cluster>, epsilon: f64) -> Result<Self> {
        let spec = Self {
            num_vars,
            clusters,
            epsilon,
            basis: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_basis(mut self, basis: MonomialBasis) -> Result<Self> {
        if basis.num_vars() != self.num_vars || basis.len() != self.total_roots() {
            return Err(Error::Dimension(format!(
                "basis of {} elements in {} variables for {} roots in {} variables",
                basis.len(),
                basis.num_vars(),
                self.total_roots(),
                self.num_vars
            )));
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 || self.clusters.is_empty() {
            return Err(Error::InvalidInput("cluster spec needs variables and clusters".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon {} must be finite and nonnegative", self.epsilon)));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.center.len() != self.num_vars {
                return Err(Error::Dimension(format!("center of cluster {i} has wrong dimension")));
            }
            if c.offsets.is_empty() {
                return Err(Error::InvalidInput(format!("cluster {i} has no roots")));
            }
            for d in &c.offsets {
                if d.len() != self.num_vars {
                    return Err(Error::Dimension(format!("offset in cluster {i} has wrong dimension")));
                }
                if d.iter().chain(&c.center).any(|z| !z.is_finite()) {
                    return Err(Error::NonFinite(format!("cluster {i}")));
                }
                if d.iter().any(|z| z.norm() > 1.0 + 1e-12) {
                    return Err(Error::InvalidInput(format!("offset in cluster {i} exceeds 1 in magnitude")));
                }
            }
        }
        Ok(())
    }

    pub fn total_roots(&self) -> usize {
        self.clusters.iter().map(Cluster::multiplicity).sum()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Centers uniform on `[-2, 2]^m`, offsets uniform on `[-1, 1]^m`.
    pub fn random(num_vars: usize, multiplicities: &[usize], epsilon: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: f64, hi: f64| -> Vec<C64> {
            (0..num_vars).map(|_| c64(rng.random_range(lo..=hi), 0.0)).collect()
        };
        let clusters = multiplicities
            .iter()
            .map(|&n| Cluster {
                center: draw(-2.0, 2.0),
                offsets: (0..n).map(|_| draw(-1.0, 1.0)).collect(),
            })
            .collect();
        Self::new(num_vars, clusters, epsilon)
    }
}

/// All roots `z_i + δ_{i,j}·ε`, cluster by cluster.
pub fn realize_points(spec: &ClusterSpec) -> Vec<Point> {
    spec.clusters
        .iter()
        .flat_map(|c| {
            c.offsets.iter().map(move |d| {
                c.center
                    .iter()
                    .zip(d)
                    .map(|(z, dz)| z + dz * spec.epsilon)
                    .collect()
            })
        })
        .collect()
}

/// Arithmetic mean of each cluster.
pub fn centroids(spec: &ClusterSpec) -> Vec<Point> {
    spec.clusters
        .iter()
        .map(|c| {
            let n = c.multiplicity() as f64;
            (0..spec.num_vars)
                .map(|r| {
                    let mean_offset: C64 = c.offsets.iter().map(|d| d[r]).sum::<C64>() / n;
                    c.center[r] + mean_offset * spec.epsilon
                })
                .collect()
        })
        .collect()
}

/// `M_{x_i} = V·D_i·V^{-1}` with `V = [b_s(z_t)]` and `D_i = diag(z_{t,i})`.
pub fn mulmats_from_points(points: &[Point], basis: &MonomialBasis) -> Result<MulMatrixSet> {
    if points.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} points for a basis of {} elements",
            points.len(),
            basis.len()
        )));
    }
    let v = vandermonde(points, basis)?;
    let cond = condition_number(&v)?;
    if cond.is_nan() || cond > REGULARITY_LIMIT {
        return Err(Error::BasisNotValid { condition: cond });
    }
    let v_inv = inverse(&v).map_err(|_| Error::BasisNotValid { condition: cond })?;
    let mats = (0..basis.num_vars())
        .map(|i| {
            let d = ComplexMatrix::diagonal(&points.iter().map(|p| p[i]).collect::<Vec<_>>());
            v.matmul(&d)?.matmul(&v_inv)
        })
        .collect::<Result<Vec<_>>>()?;
    MulMatrixSet::new(basis.clone(), mats)
}

/// Exponent vectors of total degree `d` in `m` variables, `x1` powers first.
fn monomials_of_degree(m: usize, d: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .rev()
        .flat_map(|e| {
            monomials_of_degree(m - 1, d - e).into_iter().map(move |mut rest| {
                rest.insert(0, e);
                rest
            })
        })
        .collect()
}

/// Greedy graded basis whose evaluations at `points` are linearly independent.
pub fn basis_for_points(points: &[Point], num_vars: usize) -> Result<MonomialBasis> {
    let n = points.len();
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    let mut ortho: Vec<Vec<C64>> = Vec::new();
    'degrees: for d in 0..n as u32 {
        for mono in monomials_of_degree(num_vars, d) {
            let mut v: Vec<C64> = points.iter().map(|p| crate::traces::eval_monomial(&mono, p)).collect();
            let before = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for q in &ortho {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qx)| *x -= dot * qx);
            }
            let after = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if after > 1e-8 * before.max(1.0) {
                v.iter_mut().for_each(|x| *x /= after);
                ortho.push(v);
                chosen.push(mono);
                if chosen.len() == n {
                    break 'degrees;
                }
            }
        }
    }
    if chosen.len() < n {
        return Err(Error::BasisNotValid { condition: f64::INFINITY });
    }
    MonomialBasis::new(num_vars, chosen)
}

/// Tail quantities at a single radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    /// Largest entry of the block left after `k` elimination steps.
    pub pivot_tail: f64,
    /// `σ_{k+1}` of the matrix of traces.
    pub sigma_tail: f64,
    /// Largest ∞-distance from a computed mean to its nearest centroid.
    pub mean_error: f64,
    /// Largest pairwise commutator Frobenius norm.
    pub commutator_norm: f64,
}

/// Log-log slopes; `None` when the quantity sits at the noise floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSlopes {
    pub pivot_tail: Option<f64>,
    pub sigma_tail: Option<f64>,
    pub mean_error: Option<f64>,
    pub commutator_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rank: usize,
    /// Ordered by ascending ε.
    pub records: Vec<SweepRecord>,
    pub slopes: SweepSlopes,
    /// Radii where the basis was not valid for the realized points.
    pub skipped: Vec<f64>,
}

/// Least-squares slope of `log y` against `log x` over points above the floor.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > NOISE_FLOOR && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `n` log-spaced values from `from` to `to` inclusive.
pub fn log_spaced(from: f64, to: f64, n: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) || n < 2 {
        return Err(Error::InvalidInput("log spacing needs two positive endpoints and at least 2 steps".into()));
    }
    let (a, b) = (from.ln(), to.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Runs the radical pipeline at each radius with the rank fixed to the
/// number of clusters.
pub fn epsilon_sweep(spec: &ClusterSpec, eps_values: &[f64], seed: u64) -> Result<SweepResult> {
    spec.validate()?;
    if eps_values.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "a sweep needs at least 4 radii, got {}",
            eps_values.len()
        )));
    }
    if eps_values.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("sweep radii must be positive and finite".into()));
    }
    let lo = eps_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_values.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidInput("sweep radii must span at least one decade".into()));
    }
    let mut eps: Vec<f64> = eps_values.to_vec();
    eps.sort_by(f64::total_cmp);

    let k = spec.clusters.len();
    let basis = match &spec.basis {
        Some(b) => b.clone(),
        None => basis_for_points(&realize_points(&spec.with_epsilon(hi)), spec.num_vars)?,
    };
    let opts = RadicalOptions::with_rank(k).seed(seed);
    let mut records = Vec::with_capacity(eps.len());
    let mut skipped = Vec::new();
    for &e in &eps {
        let s = spec.with_epsilon(e);
        let points = realize_points(&s);
        let mats = match mulmats_from_points(&points, &basis) {
            Ok(m) => m,
            Err(Error::BasisNotValid { condition }) => {
                log::warn!("skipping epsilon {e:e}: basis not valid (condition {condition:.3e})");
                skipped.push(e);
                continue;
            }
            Err(other) => return Err(other),
        };
        let r = trace_matrix_from_mulmats(&mats)?;
        let out = approximate_radical(&mats, &opts)?;
        let sigma = singular_values(&r.matrix)?;
        let truth = centroids(&s);
        records.push(SweepRecord {
            epsilon: e,
            pivot_tail: out.gecp.remaining_max(),
            sigma_tail: sigma.get(k).cloned().unwrap_or(0.0),
            mean_error: verify_by_substitution(&out, Reference::Centroids(&truth))?.max_residual,
            commutator_norm: out.commutator_norms.iter().cloned().fold(0.0, f64::max),
        });
    }
    if records.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "only {} usable radii remain after skipping singular ones",
            records.len()
        )));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    let slope = |f: fn(&SweepRecord) -> f64| log_log_slope(&xs, &records.iter().map(f).collect::<Vec<_>>());
    let slopes = SweepSlopes {
        pivot_tail: slope(|r| r.pivot_tail),
        sigma_tail: slope(|r| r.sigma_tail),
        mean_error: slope(|r| r.mean_error),
        commutator_norm: slope(|r| r.commutator_norm),
    };
    Ok(SweepResult {
        rank: k,
        records,
        slopes,
        skipped,
    })
}
