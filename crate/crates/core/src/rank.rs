//! Numerical rank of the matrix of traces.
//!
//! Three routes are available: stop complete-pivoting elimination once the
//! remaining block is below a threshold, count singular values above a
//! threshold, or look for the largest ratio gap in a descending sequence.
//! Thresholds can be given directly or derived from a cluster radius `ε`
//! through the `ε²` coefficient bounds.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{gecp_partial, gecp_partial_with, singular_values, GecpResult};
use crate::traces::TraceMatrix;

/// Inputs to the `ε²` coefficient bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdParams {
    /// Total number of roots (matrix dimension).
    pub n: usize,
    /// Candidate rank.
    pub k: usize,
    /// Number of variables.
    pub m: usize,
    /// Bound on `|∂b_l/∂x_r|` at the cluster centers.
    pub b_prime: f64,
    pub epsilon: f64,
}

impl ThresholdParams {
    pub fn new(n: usize, k: usize, m: usize, b_prime: f64, epsilon: f64) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidInput(format!("candidate rank {k} exceeds dimension {n}")));
        }
        if !(b_prime >= 0.0 && b_prime.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "b' = {b_prime} and epsilon = {epsilon} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            n,
            k,
            m,
            b_prime,
            epsilon,
        })
    }
}

/// `4(n−k)(k+1)²m² · b'² · ε²`: bound on the remaining block after `k` steps.
pub fn pivot_threshold(p: &ThresholdParams) -> f64 {
    let (n, k, m) = (p.n as f64, p.k as f64, p.m as f64);
    4.0 * (n - k) * (k + 1.0).powi(2) * m * m * p.b_prime * p.b_prime * p.epsilon * p.epsilon
}

/// `4(n−k)²(k+1)²m² · √((2n+2nk−k²−k)/2) · b'² · ε²`: bound on `σ_{k+1}`.
pub fn svd_tail_bound(p: &ThresholdParams) -> f64 {
    let (n, k, m) = (p.n as f64, p.k as f64, p.m as f64);
    let l_norm = ((2.0 * n + 2.0 * n * k - k * k - k) / 2.0).sqrt();
    4.0 * (n - k).powi(2) * (k + 1.0).powi(2) * m * m * l_norm * p.b_prime * p.b_prime * p.epsilon * p.epsilon
}

/// How the rank threshold is specified by the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdSpec {
    Absolute(f64),
    Epsilon { epsilon: f64, b_prime: Option<f64> },
}

/// Rank threshold as a function of the candidate rank.
///
/// When `ε` is given the bound is capped at `ε` itself: the tail after
/// the true rank sits near `ε²`, well below `ε`, while genuine pivots stay of
/// order one, so the cap only matters where the coefficient bound is loose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    Absolute(f64),
    Bound {
        n: usize,
        m: usize,
        b_prime: f64,
        epsilon: f64,
    },
}

impl ThresholdRule {
    fn params(n: usize, k: usize, m: usize, b_prime: f64, epsilon: f64) -> ThresholdParams {
        ThresholdParams {
            n,
            k: k.min(n),
            m,
            b_prime,
            epsilon,
        }
    }

    pub fn pivot(&self, k: usize) -> f64 {
        match *self {
            ThresholdRule::Absolute(t) => t,
            ThresholdRule::Bound { n, m, b_prime, epsilon } => {
                pivot_threshold(&Self::params(n, k, m, b_prime, epsilon)).min(epsilon)
            }
        }
    }

    pub fn singular(&self, k: usize) -> f64 {
        match *self {
            ThresholdRule::Absolute(t) => t,
            ThresholdRule::Bound { n, m, b_prime, epsilon } => {
                svd_tail_bound(&Self::params(n, k, m, b_prime, epsilon)).min(epsilon)
            }
        }
    }

    /// Resolves a caller request against a trace matrix, estimating `b'`
    /// from `R` when it is not given.
    pub fn resolve(spec: ThresholdSpec, r: &TraceMatrix) -> Result<Self> {
        match spec {
            ThresholdSpec::Absolute(t) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::InvalidInput(format!("threshold {t} must be finite and nonnegative")));
                }
                Ok(ThresholdRule::Absolute(t))
            }
            ThresholdSpec::Epsilon { epsilon, b_prime } => {
                let b_prime = b_prime.unwrap_or_else(|| estimate_b_prime(r));
                ThresholdParams::new(r.dim(), 0, r.basis.num_vars(), b_prime, epsilon)?;
                Ok(ThresholdRule::Bound {
                    n: r.dim(),
                    m: r.basis.num_vars(),
                    b_prime,
                    epsilon,
                })
            }
        }
    }
}

/// Estimates `b'` when root magnitudes are unknown.
///
/// The largest diagonal-type entry of `R` is about `n·ρ^{2D}` for roots of
/// magnitude `ρ` and basis degree `D`; `ρ` recovered from it bounds the
/// partial derivatives `e_r·ρ^{deg−1}` of every basis monomial.
pub fn estimate_b_prime(r: &TraceMatrix) -> f64 {
    let n = r.dim().max(1) as f64;
    let top = r.basis.max_degree();
    let rho = if top == 0 {
        1.0
    } else {
        (r.matrix.max_abs() / n).powf(1.0 / (2.0 * top as f64)).max(1.0)
    };
    r.basis
        .monomials()
        .iter()
        .flat_map(|mono| {
            let deg: u32 = mono.iter().sum();
            mono.iter()
                .filter(|&&e| e > 0)
                .map(move |&e| e as f64 * rho.powi(deg as i32 - 1))
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMethod {
    Gecp,
    Svd,
    Gap,
}

impl RankMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RankMethod::Gecp => "gecp",
            RankMethod::Svd => "svd",
            RankMethod::Gap => "gap-heuristic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gecp" => Some(RankMethod::Gecp),
            "svd" => Some(RankMethod::Svd),
            "gap" | "gap-heuristic" => Some(RankMethod::Gap),
            _ => None,
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rank decision with the evidence behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub method: RankMethod,
    /// Pivot magnitudes (gecp) or the descending sequence examined (svd, gap).
    pub diagnostics: Vec<f64>,
    /// Threshold the first rejected candidate was compared with.
    pub threshold_used: f64,
}

pub fn rank_by_gecp(r: &TraceMatrix, threshold: f64) -> Result<(RankReport, GecpResult)> {
    rank_by_gecp_rule(r, &ThresholdRule::Absolute(threshold))
}

/// Runs elimination until the remaining block drops to the rule's threshold.
pub fn rank_by_gecp_rule(r: &TraceMatrix, rule: &ThresholdRule) -> Result<(RankReport, GecpResult)> {
    let n = r.dim();
    let g = gecp_partial_with(&r.matrix, n, |k| rule.pivot(k))?;
    let report = RankReport {
        rank: g.steps,
        method: RankMethod::Gecp,
        diagnostics: g.pivot_magnitudes.clone(),
        threshold_used: rule.pivot(g.steps),
    };
    Ok((report, g))
}

pub fn rank_by_svd(r: &TraceMatrix, threshold: f64) -> Result<RankReport> {
    rank_by_svd_rule(r, &ThresholdRule::Absolute(threshold))
}

/// Smallest `k` with `σ_{k+1}` at or below the rule's threshold.
pub fn rank_by_svd_rule(r: &TraceMatrix, rule: &ThresholdRule) -> Result<RankReport> {
    let sigma = singular_values(&r.matrix)?;
    let rank = (0..sigma.len())
        .find(|&k| sigma[k] <= rule.singular(k))
        .unwrap_or(sigma.len());
    Ok(RankReport {
        rank,
        method: RankMethod::Svd,
        diagnostics: sigma,
        threshold_used: rule.singular(rank),
    })
}

/// Rank at the largest ratio gap `d[i]/d[i+1]` of a descending sequence.
pub fn rank_by_gap(diagnostics: &[f64]) -> Result<RankReport> {
    if diagnostics.is_empty() {
        return Err(Error::InvalidInput("empty diagnostics".into()));
    }
    if diagnostics.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidInput("diagnostics must be finite and nonnegative".into()));
    }
    let hi = diagnostics.iter().cloned().fold(f64::MIN, f64::max);
    let lo = diagnostics.iter().cloned().fold(f64::MAX, f64::min);
    if hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoGap);
    }
    let ratio = |i: usize| {
        let (a, b) = (diagnostics[i], diagnostics[i + 1]);
        if b == 0.0 {
            if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            a / b
        }
    };
    let mut best = 0;
    for i in 1..diagnostics.len() - 1 {
        // Strict comparison keeps the smaller rank on ties.
        if ratio(i) > ratio(best) {
            best = i;
        }
    }
    let rank = best + 1;
    Ok(RankReport {
        rank,
        method: RankMethod::Gap,
        diagnostics: diagnostics.to_vec(),
        threshold_used: (diagnostics[best] * diagnostics[best + 1]).sqrt(),
    })
}

/// Combined elimination and singular-value rank decision.
#[derive(Clone, Debug)]
pub struct RankDecision {
    pub chosen: RankReport,
    /// Report from the method that was not chosen.
    pub cross_check: RankReport,
    pub agree: bool,
    /// Elimination carried out for exactly `chosen.rank` steps.
    pub gecp: GecpResult,
}

/// Runs both rank routes. The preferred method decides unless the two
/// disagree, in which case the singular values win.
pub fn decide_rank(r: &TraceMatrix, rule: &ThresholdRule, preferred: RankMethod) -> Result<RankDecision> {
    let (gecp_report, gecp) = rank_by_gecp_rule(r, rule)?;
    let svd_report = rank_by_svd_rule(r, rule)?;
    let agree = gecp_report.rank == svd_report.rank;
    if !agree {
        log::warn!(
            "rank disagreement: gecp = {}, svd = {}; using svd",
            gecp_report.rank,
            svd_report.rank
        );
    }
    let use_gecp = agree && preferred == RankMethod::Gecp;
    let (chosen, cross_check) = if use_gecp {
        (gecp_report, svd_report)
    } else {
        (svd_report, gecp_report)
    };
    let gecp = if gecp.steps == chosen.rank {
        gecp
    } else {
        let g = gecp_partial(&r.matrix, chosen.rank, 0.0)?;
        if g.steps < chosen.rank {
            return Err(Error::AmbiguousRank(format!(
                "elimination found only {} nonzero pivots for rank {}",
                g.steps, chosen.rank
            )));
        }
        g
    };
    Ok(RankDecision {
        chosen,
        cross_check,
        agree,
        gecp,
    })
}
