//! Approximate radicals of zero-dimensional polynomial systems whose roots
//! form clusters.
//!
//! The matrix of traces `R = [Tr(b_i·b_j)]` of the quotient algebra has a
//! numerical rank equal to the number of clusters. Complete-pivoting
//! elimination (or the singular values) exposes that rank; the nullspace of
//! the reduced rows describes the approximate radical, and small approximate
//! multiplication matrices built from `R` have the cluster means as their
//! eigenvalues, accurate to `O(ε²)` in the cluster radius `ε`.
//!
//! ```
//! use approx_radical::{approximate_square_free, Polynomial, RankMethod, ThresholdSpec};
//!
//! // (x - 1.001)(x - 0.999)(x - 3)
//! let f = Polynomial::from_real(&[-2.999997, 6.999999, -5.0, 1.0]).unwrap();
//! let g = approximate_square_free(&f, ThresholdSpec::Absolute(1e-4), RankMethod::Gecp).unwrap();
//! assert_eq!(g.rank, 2);
//! ```

pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod radical;
pub mod rank;
pub mod traces;
pub mod univariate;

pub use error::{Error, Result};
pub use harness::{
    centroids, epsilon_sweep, mulmats_from_points, realize_points, Cluster, ClusterSpec, SweepRecord, SweepResult,
};
pub use io::{parse, serialize, Document, FormatError};
pub use linalg::{c64, gecp_partial, ComplexMatrix, GecpResult, C64};
pub use radical::{
    approximate_radical, approximate_radical_from_points, cluster_means, radical_nullspace_generators,
    restrict_by_change_of_basis, verify_by_substitution, RadicalOptions, RadicalOutput, RankSelection,
};
pub use rank::{RankMethod, RankReport, ThresholdParams, ThresholdSpec};
pub use traces::{trace_matrix_from_mulmats, trace_matrix_from_points, MonomialBasis, MulMatrixSet, Point, TraceMatrix};
pub use univariate::{approximate_square_free, Polynomial, SquareFreeResult};
