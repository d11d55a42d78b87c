#![allow(dead_code)]

use approx_radical::{c64, ComplexMatrix, MonomialBasis, MulMatrixSet, Point, C64};

pub fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c64(x, 0.0)).collect()
}

pub fn pt(x: f64, y: f64) -> Point {
    vec![c64(x, 0.0), c64(y, 0.0)]
}

/// `[1, x1, x2, x1*x2, x1^2]`.
pub fn basis5() -> MonomialBasis {
    MonomialBasis::new(2, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]]).unwrap()
}

pub fn rows(r: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(r).unwrap()
}

/// Double roots (1,1) x3 and (-1,2) x2.
pub fn exact_mulmats() -> MulMatrixSet {
    let mx1 = rows(&[
        &[0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        &[5.0 / 3.0, -2.0, -1.0, 2.0 / 3.0, 5.0 / 3.0],
        &[-17.0 / 3.0, 1.0, 4.0, 4.0 / 3.0, 1.0 / 3.0],
    ]);
    let mx2 = rows(&[
        &[0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        &[-13.0 / 6.0, 1.0, 3.0, -2.0 / 3.0, -1.0 / 6.0],
        &[-1.0 / 6.0, -1.0, 0.0, 7.0 / 3.0, -1.0 / 6.0],
        &[5.0 / 3.0, -2.0, -1.0, 2.0 / 3.0, 5.0 / 3.0],
    ]);
    MulMatrixSet::new(basis5(), vec![mx1, mx2]).unwrap()
}

pub const EXACT_R: [[f64; 5]; 5] = [
    [5.0, 1.0, 7.0, -1.0, 5.0],
    [1.0, 5.0, -1.0, 7.0, 1.0],
    [7.0, -1.0, 11.0, -5.0, 7.0],
    [-1.0, 7.0, -5.0, 11.0, -1.0],
    [5.0, 1.0, 7.0, -1.0, 5.0],
];

pub fn exact_points() -> Vec<Point> {
    vec![pt(1.0, 1.0), pt(1.0, 1.0), pt(1.0, 1.0), pt(-1.0, 2.0), pt(-1.0, 2.0)]
}

pub fn small_cluster_points() -> Vec<Point> {
    vec![
        pt(1.0, 1.0),
        pt(0.9924, 1.0027),
        pt(1.0076, 0.9973),
        pt(-1.0, 2.0),
        pt(-1.0076, 2.0027),
    ]
}

pub const SMALL_CLUSTER_R: [[f64; 5]; 5] = [
    [4.99999, 0.99240, 7.00269, -1.01796, 5.01538],
    [0.99259, 5.01557, -1.01777, 7.03349, 0.97757],
    [7.00131, -1.01934, 11.00943, -5.04274, 7.03192],
    [-1.01900, 7.03226, -5.04240, 11.07093, -1.04951],
    [5.01548, 0.97748, 7.03339, -1.04838, 5.03155],
];

pub fn large_cluster_points() -> Vec<Point> {
    vec![pt(0.8999, 1.0), pt(1.0, 1.0), pt(1.0, 0.8999), pt(-1.0, 2.0), pt(-1.0999, 2.0)]
}

pub fn univariate_roots() -> Vec<C64> {
    vec![
        c64(0.98816, -0.01847),
        c64(0.98816, 0.01847),
        c64(1.02390, 0.0),
        c64(1.98603, 0.0),
        c64(2.01375, 0.0),
    ]
}

pub fn matrix_of(a: &[[f64; 5]; 5]) -> ComplexMatrix {
    let r: Vec<&[f64]> = a.iter().map(|r| r.as_slice()).collect();
    rows(&r)
}

/// Least-squares distance from `v` to the span of `basis` (Gram-Schmidt).
pub fn distance_to_span(v: &[C64], basis: &[Vec<C64>]) -> f64 {
    let mut ortho: Vec<Vec<C64>> = Vec::new();
    for b in basis {
        let mut w = b.clone();
        for q in &ortho {
            let d: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            w.iter_mut().zip(q).for_each(|(x, qx)| *x -= d * qx);
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-300 {
            w.iter_mut().for_each(|x| *x /= n);
            ortho.push(w);
        }
    }
    let mut r = v.to_vec();
    for q in &ortho {
        let d: C64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        r.iter_mut().zip(q).for_each(|(x, qx)| *x -= d * qx);
    }
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Independent `V·D·V^{-1}` by Gauss-Jordan inversion in plain arrays.
pub fn naive_inverse(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut a: Vec<Vec<C64>> = m.to_rows();
    let mut inv: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| c64(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    let (ac, ic) = (a[c][j], inv[c][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    ComplexMatrix::from_rows(&inv).unwrap()
}
