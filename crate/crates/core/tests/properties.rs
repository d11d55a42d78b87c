mod common;

use approx_radical::harness::basis_for_points;
use approx_radical::io::{parse, serialize, Document};
use approx_radical::linalg::singular_values;
use approx_radical::rank::{pivot_threshold, svd_tail_bound};
use approx_radical::traces::{hankel_trace_matrix, power_sums_from_coeffs, vandermonde};
use approx_radical::{
    c64, gecp_partial, mulmats_from_points, realize_points, trace_matrix_from_mulmats, trace_matrix_from_points,
    ClusterSpec, ComplexMatrix, MonomialBasis, Point, Polynomial, ThresholdParams, C64,
};
use common::naive_inverse;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c64(a, b))
}

fn square(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(complex(), n * n).prop_map(move |d| ComplexMatrix::new(n, n, d).unwrap())
    })
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1e-300)
}

/// Random well-separated multivariate root set with its greedy basis.
fn instance() -> impl Strategy<Value = (Vec<Point>, MonomialBasis)> {
    (1usize..=3, 1usize..=6, any::<u64>()).prop_filter_map("basis", |(m, n, seed)| {
        let spec = ClusterSpec::random(m, &vec![1; n], 0.0, seed).ok()?;
        let pts = realize_points(&spec);
        let basis = basis_for_points(&pts, m).ok()?;
        Some((pts, basis))
    })
}

/// `max |∂b/∂x_r|` over basis monomials, variables and the given points.
fn derivative_bound(basis: &MonomialBasis, centers: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for mono in basis.monomials() {
        for r in 0..mono.len() {
            if mono[r] == 0 {
                continue;
            }
            for z in centers {
                let mut d = c64(mono[r] as f64, 0.0);
                for (t, &e) in mono.iter().enumerate() {
                    let e = if t == r { e - 1 } else { e };
                    d *= z[t].powu(e);
                }
                best = best.max(d.norm());
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gecp_reconstructs_permuted_matrix(m in square(7)) {
        let n = m.rows();
        let g = gecp_partial(&m, n, 0.0).unwrap();
        let pmq = m.select(&g.p_perm, &g.q_perm);
        let lu = g.lower.matmul(&g.upper).unwrap();
        prop_assert!(rel(&lu, &pmq) < 1e-12);
    }

    #[test]
    fn gecp_multipliers_bounded_and_lower_unit(m in square(7)) {
        let n = m.rows();
        let g = gecp_partial(&m, n, 0.0).unwrap();
        for i in 0..n {
            prop_assert_eq!(g.lower[(i, i)], c64(1.0, 0.0));
            for j in 0..n {
                if j > i {
                    prop_assert_eq!(g.lower[(i, j)], c64(0.0, 0.0));
                } else {
                    prop_assert!(g.lower[(i, j)].norm() <= 1.0 + 1e-12);
                }
                if j < i && j < g.steps {
                    prop_assert!(g.upper[(i, j)].norm() <= 1e-12 * m.max_abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn gecp_partial_reconstruction_and_tail(m in square(7), frac in 0.0f64..1.0) {
        let n = m.rows();
        let k = ((n as f64) * frac) as usize;
        let g = gecp_partial(&m, k, 0.0).unwrap();
        prop_assert_eq!(g.steps, k);
        let pmq = m.select(&g.p_perm, &g.q_perm);
        prop_assert!(rel(&g.lower.matmul(&g.upper).unwrap(), &pmq) < 1e-12);
        if let Some(&last) = g.pivot_magnitudes.last() {
            // Every complete-pivoting pivot dominates the block it leaves behind.
            prop_assert!(g.remaining_max() <= 2.0 * last * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gecp_pivots_decrease_on_trace_matrices((pts, basis) in instance()) {
        let r = trace_matrix_from_points(&pts, &basis).unwrap();
        let g = gecp_partial(&r.matrix, basis.len(), 0.0).unwrap();
        for w in g.pivot_magnitudes.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", g.pivot_magnitudes);
        }
    }

    #[test]
    fn trace_constructions_agree((pts, basis) in instance()) {
        let mats = mulmats_from_points(&pts, &basis).unwrap();
        let a = trace_matrix_from_mulmats(&mats).unwrap();
        let b = trace_matrix_from_points(&pts, &basis).unwrap();
        prop_assert!(rel(&a.matrix, &b.matrix) < 1e-9);
        let v = vandermonde(&pts, &basis).unwrap();
        prop_assert!(rel(&v.matmul(&v.transpose()).unwrap(), &b.matrix) < 1e-12);
        prop_assert!(rel(&b.matrix.transpose(), &b.matrix) < 1e-14);
    }

    #[test]
    fn multiplication_matrices_match_independent_inverse((pts, basis) in instance()) {
        let mats = mulmats_from_points(&pts, &basis).unwrap();
        let v = vandermonde(&pts, &basis).unwrap();
        let vinv = naive_inverse(&v);
        for (r, mr) in mats.matrices().iter().enumerate() {
            let d: Vec<C64> = pts.iter().map(|p| p[r]).collect();
            let want = v.matmul(&ComplexMatrix::diagonal(&d)).unwrap().matmul(&vinv).unwrap();
            prop_assert!(rel(mr, &want) < 1e-8);
        }
    }

    #[test]
    fn newton_girard_matches_direct_sums(roots in prop::collection::vec(complex(), 1..8)) {
        let f = Polynomial::from_roots(&roots);
        let s = power_sums_from_coeffs(f.coeffs()).unwrap();
        prop_assert_eq!(s.sums.len(), 2 * roots.len() - 1);
        for (t, st) in s.sums.iter().enumerate() {
            let direct: C64 = roots.iter().map(|z| z.powu(t as u32)).sum();
            let scale: f64 = roots.iter().map(|z| z.norm().powi(t as i32)).sum::<f64>().max(1.0);
            prop_assert!((st - direct).norm() / scale < 1e-9);
        }
        let h = hankel_trace_matrix(&s).unwrap();
        let pts: Vec<Point> = roots.iter().map(|&z| vec![z]).collect();
        let direct = trace_matrix_from_points(&pts, &MonomialBasis::power(roots.len())).unwrap();
        prop_assert!(rel(&h.matrix, &direct.matrix) < 1e-9);
    }

    #[test]
    fn documents_round_trip(m in square(5), roots in prop::collection::vec(complex(), 1..6)) {
        for doc in [Document::Matrix(m.clone()), Document::Polynomial(Polynomial::from_roots(&roots))] {
            let text = serialize(&doc).unwrap();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(serialize(&back).unwrap(), text);
        }
    }

    #[test]
    fn mulmats_and_cluster_spec_round_trip(m in 1usize..=3, n in 1usize..=4, eps in 1e-4f64..0.5, seed in any::<u64>()) {
        let spec = ClusterSpec::random(m, &vec![2; n], eps, seed).unwrap();
        let doc = Document::ClusterSpec(spec.clone());
        let back = parse(&serialize(&doc).unwrap()).unwrap();
        prop_assert_eq!(back, doc);
        let pts = realize_points(&spec);
        if let Ok(basis) = basis_for_points(&pts, m) {
            if let Ok(mats) = mulmats_from_points(&pts, &basis) {
                let doc = Document::MulMats(mats);
                prop_assert_eq!(parse(&serialize(&doc).unwrap()).unwrap(), doc);
            }
        }
    }

    #[test]
    fn exact_multiplicities_give_exact_rank(m in 1usize..=2, mults in prop::collection::vec(1usize..=3, 1..=3), seed in any::<u64>()) {
        let distinct = ClusterSpec::random(m, &vec![1; mults.len()], 0.0, seed).unwrap();
        let centers: Vec<Point> = realize_points(&distinct);
        let min_gap = centers
            .iter()
            .enumerate()
            .flat_map(|(i, a)| centers[i + 1..].iter().map(move |b| {
                a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.2);
        let pts: Vec<Point> = centers
            .iter()
            .zip(&mults)
            .flat_map(|(c, &k)| std::iter::repeat_n(c.clone(), k))
            .collect();
        let n = pts.len();
        // Any n monomials of low degree; rank of V·V^T is the number of distinct points.
        let basis = MonomialBasis::new(m, (0..n as u32).map(|d| {
            let mut e = vec![0; m];
            e[0] = d;
            e
        }).collect()).unwrap();
        let r = trace_matrix_from_points(&pts, &basis).unwrap();
        let s = singular_values(&r.matrix).unwrap();
        let k = mults.len();
        prop_assert!(s[k - 1] > 1e-8 * s[0], "{:?}", s);
        if k < n {
            prop_assert!(s[k] < 1e-9 * s[0], "{:?}", s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bounds_hold_for_small_clusters(m in 1usize..=2, mults in prop::collection::vec(1usize..=3, 2..=3), eps in 1e-5f64..1e-3, seed in any::<u64>()) {
        let spec = ClusterSpec::random(m, &mults, eps, seed).unwrap();
        let centers: Vec<Point> = spec.clusters.iter().map(|c| c.center.clone()).collect();
        let min_gap = centers
            .iter()
            .enumerate()
            .flat_map(|(i, a)| centers[i + 1..].iter().map(move |b| {
                a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.3);
        let exact: Vec<Point> = spec
            .clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.center.clone(), c.offsets.len()))
            .collect();
        let n = exact.len();
        let k = mults.len();
        prop_assume!(k < n);
        let basis = basis_for_points(&realize_points(&spec), m);
        prop_assume!(basis.is_ok());
        let basis = basis.unwrap();
        let r = trace_matrix_from_points(&realize_points(&spec), &basis).unwrap();
        let r0 = trace_matrix_from_points(&exact, &basis).unwrap();
        // The bounds presume the exact matrix has a clean rank-k elimination.
        let g0 = gecp_partial(&r0.matrix, k, 0.0).unwrap();
        prop_assume!(g0.pivot_magnitudes[k - 1] > 1e-3 * g0.pivot_magnitudes[0]);
        let b_prime = derivative_bound(&basis, &centers).max(1.0);
        let params = ThresholdParams::new(n, k, m, b_prime, eps).unwrap();
        let g = gecp_partial(&r.matrix, k, 0.0).unwrap();
        prop_assert!(g.remaining_max() <= pivot_threshold(&params), "{} > {}", g.remaining_max(), pivot_threshold(&params));
        let s = singular_values(&r.matrix).unwrap();
        prop_assert!(s[k] <= svd_tail_bound(&params), "{} > {}", s[k], svd_tail_bound(&params));
    }
}
