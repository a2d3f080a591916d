//! Dense complex matrix SVD for frontal slices.
//!
//! Backed by nalgebra's bidiagonal QR iteration. Factors are canonicalized so
//! that the largest-magnitude entry of every left singular vector is real and
//! positive, which makes factor comparisons reproducible.

use nalgebra::DMatrix;

use crate::tensor::{CMat, C64};

const MAX_SWEEPS: usize = 10_000;

/// Thin factorization `A = U diag(s) V^H`, `U` is `m x r`, `V` is `n x r`
/// with `r = min(m, n)`. Singular values are nonincreasing.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// Full factorization with square unitary `U` (`m x m`) and `V` (`n x n`).
#[derive(Clone, Debug)]
pub struct FullSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// Returns `None` if the iteration does not converge or the input is not finite.
pub fn thin_svd(a: &CMat) -> Option<ThinSvd> {
    let (m, n) = (a.rows, a.cols);
    let r = m.min(n);
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    if r == 0 {
        return Some(ThinSvd {
            u: CMat::zeros(m, 0),
            s: Vec::new(),
            v: CMat::zeros(n, 0),
        });
    }
    let svd = a
        .to_nalgebra()
        .try_svd(true, true, f64::EPSILON * 5.0, MAX_SWEEPS)?;
    let u_na: DMatrix<C64> = svd.u?;
    let vt_na: DMatrix<C64> = svd.v_t?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));

    let mut u = CMat::zeros(m, r);
    let mut v = CMat::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for (col, &src) in order.iter().enumerate() {
        s.push(sv[src]);
        for i in 0..m {
            u.set(i, col, u_na[(i, src)]);
        }
        for j in 0..n {
            v.set(j, col, vt_na[(src, j)].conj());
        }
    }
    for col in 0..r {
        let phase = canonical_phase(&u, col);
        scale_column(&mut u, col, phase);
        scale_column(&mut v, col, phase);
    }
    Some(ThinSvd { u, s, v })
}

pub fn full_svd(a: &CMat) -> Option<FullSvd> {
    let thin = thin_svd(a)?;
    let mut u = complete_basis(&thin.u);
    let mut v = complete_basis(&thin.v);
    let r = thin.s.len();
    for col in r..u.cols {
        let phase = canonical_phase(&u, col);
        scale_column(&mut u, col, phase);
    }
    for col in r..v.cols {
        let phase = canonical_phase(&v, col);
        scale_column(&mut v, col, phase);
    }
    Some(FullSvd { u, s: thin.s, v })
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &CMat) -> Option<Vec<f64>> {
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    if a.rows.min(a.cols) == 0 {
        return Some(Vec::new());
    }
    let svd = a
        .to_nalgebra()
        .try_svd(false, false, f64::EPSILON * 5.0, MAX_SWEEPS)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Some(s)
}

/// Phase factor that makes the largest-magnitude entry of column `col` real positive.
fn canonical_phase(m: &CMat, col: usize) -> C64 {
    let mut best = C64::new(0.0, 0.0);
    for i in 0..m.rows {
        let z = m.get(i, col);
        if z.norm() > best.norm() {
            best = z;
        }
    }
    if best.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        (best / best.norm()).conj()
    }
}

fn scale_column(m: &mut CMat, col: usize, factor: C64) {
    for i in 0..m.rows {
        let z = m.get(i, col);
        m.set(i, col, z * factor);
    }
}

/// Extends orthonormal columns to a square unitary matrix. Each new column is
/// the standard basis vector with the largest component outside the current
/// span, orthogonalized twice.
fn complete_basis(q: &CMat) -> CMat {
    let m = q.rows;
    let mut cols: Vec<Vec<C64>> = (0..q.cols)
        .map(|c| (0..m).map(|i| q.get(i, c)).collect())
        .collect();
    while cols.len() < m {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..m {
            let mut v = vec![C64::new(0.0, 0.0); m];
            v[e] = C64::new(1.0, 0.0);
            project_out(&mut v, &cols);
            let norm = norm2(&v);
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (_, mut v) = best.expect("m > 0");
        project_out(&mut v, &cols);
        let norm = norm2(&v);
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    CMat::from_fn(m, m, |i, j| cols[j][i])
}

fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in basis {
            let p: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
