//! Reference implementations shared by integration tests. Nothing here calls
//! into the library's SVD or transform code paths.
#![allow(dead_code)]

use ttnn::{CMat, ComplexTensor3, UnitaryTransform, C64};

/// One-sided Jacobi on the columns of `a`. Returns `(a * v, v)` where the
/// columns of `a * v` are mutually orthogonal; their norms are the singular
/// values.
pub fn jacobi(a: &CMat) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let (m, n) = (a.rows, a.cols);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| C64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // rotate column q by a phase so the cross term becomes real
                let phase = (gamma / g).conj();
                for z in cols[q].iter_mut().chain(v[q].iter_mut()) {
                    *z *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for vecs in [&mut cols, &mut v] {
                    for i in 0..vecs[p].len() {
                        let (x, y) = (vecs[p][i], vecs[q][i]);
                        vecs[p][i] = x * c - y * s;
                        vecs[q][i] = x * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (cols, v)
}

pub fn jacobi_singular_values(a: &CMat) -> Vec<f64> {
    let (cols, _) = jacobi(a);
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular value thresholding of one matrix: `A V diag(max(s - tau, 0) / s) V^H`.
pub fn svt_oracle(a: &CMat, tau: f64) -> CMat {
    let (cols, v) = jacobi(a);
    let n = a.cols;
    let weights: Vec<f64> = cols
        .iter()
        .map(|c| {
            let s = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if s > 0.0 { (s - tau).max(0.0) / s } else { 0.0 }
        })
        .collect();
    CMat::from_fn(a.rows, n, |i, j| {
        (0..n).map(|l| cols[l][i] * weights[l] * v[l][j].conj()).sum()
    })
}

/// Mode-3 product with the transform's dense matrix, computed entry by entry.
pub fn dense_transform(x: &ComplexTensor3, t: &UnitaryTransform, adjoint: bool) -> ComplexTensor3 {
    let m = t.dense_matrix();
    let d = x.dims();
    ComplexTensor3::from_fn(d, |i, j, k| {
        (0..d.n3)
            .map(|l| {
                let w = if adjoint { m.get(l, k).conj() } else { m.get(k, l) };
                w * x[(i, j, l)]
            })
            .sum()
    })
}

/// Frontal slice `k` (0-based) as a matrix, read through indexing.
pub fn slice(x: &ComplexTensor3, k: usize) -> CMat {
    let d = x.dims();
    CMat::from_fn(d.n1, d.n2, |i, j| x[(i, j, k)])
}

pub fn stack(slices: &[CMat]) -> ComplexTensor3 {
    let (n1, n2) = (slices[0].rows, slices[0].cols);
    ComplexTensor3::from_fn((n1, n2, slices.len()), |i, j, k| slices[k].get(i, j))
}

/// TTNN through the dense block-diagonal matrix.
pub fn ttnn_oracle(x: &ComplexTensor3, t: &UnitaryTransform) -> f64 {
    let xhat = dense_transform(x, t, false);
    let d = x.dims();
    let big = CMat::from_fn(d.n1 * d.n3, d.n2 * d.n3, |r, c| {
        if r / d.n1 == c / d.n2 { xhat[(r % d.n1, c % d.n2, r / d.n1)] } else { C64::new(0.0, 0.0) }
    });
    jacobi_singular_values(&big).iter().sum()
}

/// T-TSVT with a scalar threshold through the dense transform and Jacobi SVT.
pub fn tsvt_oracle(y: &ComplexTensor3, tau: f64, t: &UnitaryTransform) -> ComplexTensor3 {
    let yhat = dense_transform(y, t, false);
    let slices: Vec<CMat> = (0..y.dims().n3).map(|k| svt_oracle(&slice(&yhat, k), tau)).collect();
    dense_transform(&stack(&slices), t, true)
}

pub fn prox_objective(x: &ComplexTensor3, y: &ComplexTensor3, tau: f64, t: &UnitaryTransform) -> f64 {
    tau * ttnn::ttnn(x, t).unwrap() + 0.5 * (x - y).frobenius_norm().powi(2)
}
