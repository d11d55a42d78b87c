//! Problem instances shared by the benchmarks.

use approx_radical::{c64, Cluster, ClusterSpec, MonomialBasis, Polynomial};

/// Two clusters in the plane, three and two roots, radius `epsilon`.
pub fn two_cluster_spec(epsilon: f64) -> ClusterSpec {
    let p = |x: f64, y: f64| vec![c64(x, 0.0), c64(y, 0.0)];
    ClusterSpec::new(
        2,
        vec![
            Cluster {
                center: p(1.0, 1.0),
                offsets: vec![p(-1.0, 0.0), p(0.0, 0.0), p(0.0, -1.0)],
            },
            Cluster {
                center: p(-1.0, 2.0),
                offsets: vec![p(0.0, 0.0), p(-1.0, 0.0)],
            },
        ],
        epsilon,
    )
    .expect("valid spec")
    .with_basis(
        MonomialBasis::new(2, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]]).expect("valid basis"),
    )
    .expect("basis matches")
}

/// Polynomial with `clusters` clusters of `multiplicity` roots each.
pub fn clustered_polynomial(clusters: usize, multiplicity: usize, epsilon: f64) -> Polynomial {
    let roots: Vec<_> = (0..clusters)
        .flat_map(|c| {
            (0..multiplicity).map(move |j| {
                let offset = (j as f64 / multiplicity.max(2) as f64 - 0.5) * 2.0;
                c64(c as f64 + 1.0 + offset * epsilon, 0.0)
            })
        })
        .collect();
    Polynomial::from_roots(&roots)
}
