//! Transformed tensor algebra: the transform-domain tensor product, the
//! transformed tensor SVD, multirank, nuclear and spectral norms, and the
//! singular value thresholding prox of the nuclear norm.
//!
//! Everything here follows one pattern: move to the transformed domain with
//! `T`, work on frontal slices independently as ordinary matrices, and come
//! back with `T^H`.

use crate::error::{Error, Result};
use crate::par;
use crate::svd;
use crate::tensor::{CMat, ComplexTensor3, C64};
use crate::transforms::UnitaryTransform;

/// Default relative cut for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

fn check_transform(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<()> {
    if x.dims().n3 != t.size() {
        return Err(Error::Dimension(format!(
            "transform of size {} used with tensor {}",
            t.size(),
            x.dims()
        )));
    }
    Ok(())
}

/// Applies `f` to every transformed frontal slice and folds the results back
/// through the adjoint transform.
fn slicewise<F>(x: &ComplexTensor3, t: &UnitaryTransform, f: F) -> Result<ComplexTensor3>
where
    F: Fn(usize, CMat) -> Result<CMat> + Send + Sync,
{
    check_transform(x, t)?;
    let xhat = t.apply(x)?;
    let slices = par::map_indexed(xhat.dims().n3, |k| f(k, xhat.slice_matrix(k + 1)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    t.apply_adjoint(&ComplexTensor3::from_slices(&slices)?)
}

/// Per-slice singular values of `T(x)`, each list nonincreasing.
pub fn transformed_singular_values(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<Vec<Vec<f64>>> {
    check_transform(x, t)?;
    let xhat = t.apply(x)?;
    par::map_indexed(xhat.dims().n3, |k| {
        svd::singular_values(&xhat.slice_matrix(k + 1)).ok_or(Error::SvdNoConvergence { slice: k + 1 })
    })
    .into_iter()
    .collect()
}

/// The transform-domain product `C = T^H(fold(bdiag(T a) bdiag(T b)))`.
pub fn t_product(a: &ComplexTensor3, b: &ComplexTensor3, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    let (da, db) = (a.dims(), b.dims());
    if da.n2 != db.n1 || da.n3 != db.n3 {
        return Err(Error::Dimension(format!("tensor product of {da} and {db}")));
    }
    check_transform(a, t)?;
    let (ahat, bhat) = (t.apply(a)?, t.apply(b)?);
    let slices = par::map_indexed(da.n3, |k| ahat.slice_matrix(k + 1).matmul(&bhat.slice_matrix(k + 1)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    t.apply_adjoint(&ComplexTensor3::from_slices(&slices)?)
}

/// Conjugate-transposes every transformed frontal slice.
pub fn tensor_hermitian_transpose(a: &ComplexTensor3, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    slicewise(a, t, |_, s| Ok(s.adjoint()))
}

/// The tensor whose transformed frontal slices are all `n x n` identities.
pub fn identity_tensor(n: usize, n3: usize, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    if n == 0 || n3 == 0 {
        return Err(Error::Dimension("identity tensor needs n, n3 >= 1".into()));
    }
    if t.size() != n3 {
        return Err(Error::Dimension(format!(
            "transform of size {} for identity tensor with n3 = {n3}",
            t.size()
        )));
    }
    let id = CMat::identity(n);
    let slices = vec![id; n3];
    t.apply_adjoint(&ComplexTensor3::from_slices(&slices)?)
}

/// True when both `Q^H Q` and `Q Q^H` are within `tol * sqrt(n n3)` of the
/// identity tensor in Frobenius norm.
pub fn is_unitary_tensor(q: &ComplexTensor3, t: &UnitaryTransform, tol: f64) -> Result<bool> {
    let d = q.dims();
    if d.n1 != d.n2 {
        return Err(Error::Dimension(format!(
            "unitary tensors are square in the first two modes, got {d}"
        )));
    }
    let qh = tensor_hermitian_transpose(q, t)?;
    let id = identity_tensor(d.n1, d.n3, t)?;
    let bound = tol * ((d.n1 * d.n3) as f64).sqrt();
    let left = t_product(&qh, q, t)?.try_sub(&id)?.frobenius_norm();
    let right = t_product(q, &qh, t)?.try_sub(&id)?.frobenius_norm();
    Ok(left <= bound && right <= bound)
}

/// Factors of `X = U * S * V^H` under the transform-domain product.
#[derive(Clone, Debug)]
pub struct TtSvdFactors {
    /// `n1 x n1 x n3`, unitary.
    pub u: ComplexTensor3,
    /// `n1 x n2 x n3`, every transformed slice diagonal.
    pub s: ComplexTensor3,
    /// `n2 x n2 x n3`, unitary.
    pub v: ComplexTensor3,
    pub transform: UnitaryTransform,
    /// Singular values of each transformed frontal slice, nonincreasing.
    pub singular_values: Vec<Vec<f64>>,
}

impl TtSvdFactors {
    pub fn reconstruct(&self) -> Result<ComplexTensor3> {
        let t = &self.transform;
        let vh = tensor_hermitian_transpose(&self.v, t)?;
        t_product(&self.u, &t_product(&self.s, &vh, t)?, t)
    }
}

pub fn tt_svd(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<TtSvdFactors> {
    check_transform(x, t)?;
    let d = x.dims();
    let xhat = t.apply(x)?;
    let per_slice = par::map_indexed(d.n3, |k| {
        svd::full_svd(&xhat.slice_matrix(k + 1)).ok_or(Error::SvdNoConvergence { slice: k + 1 })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut us = Vec::with_capacity(d.n3);
    let mut ss = Vec::with_capacity(d.n3);
    let mut vs = Vec::with_capacity(d.n3);
    let mut singular_values = Vec::with_capacity(d.n3);
    for f in per_slice {
        let mut core = CMat::zeros(d.n1, d.n2);
        for (l, &sigma) in f.s.iter().enumerate() {
            core.set(l, l, C64::new(sigma, 0.0));
        }
        us.push(f.u);
        ss.push(core);
        vs.push(f.v);
        singular_values.push(f.s);
    }
    Ok(TtSvdFactors {
        u: t.apply_adjoint(&ComplexTensor3::from_slices(&us)?)?,
        s: t.apply_adjoint(&ComplexTensor3::from_slices(&ss)?)?,
        v: t.apply_adjoint(&ComplexTensor3::from_slices(&vs)?)?,
        transform: t.clone(),
        singular_values,
    })
}

/// Per-slice numerical ranks in the transformed domain.
#[derive(Clone, Debug, PartialEq)]
pub struct MultirankVector {
    pub ranks: Vec<usize>,
    pub tolerance: f64,
}

impl MultirankVector {
    pub fn sum(&self) -> usize {
        self.ranks.iter().sum()
    }
}

/// `ranks[i]` counts singular values of transformed slice `i` above
/// `tol * sigma_max`, where `sigma_max` is the largest over all slices.
pub fn transformed_multirank(x: &ComplexTensor3, t: &UnitaryTransform, tol: f64) -> Result<MultirankVector> {
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!("rank tolerance must be >= 0, got {tol}")));
    }
    let sv = transformed_singular_values(x, t)?;
    Ok(multirank_from_values(&sv, tol))
}

pub(crate) fn multirank_from_values(sv: &[Vec<f64>], tol: f64) -> MultirankVector {
    let sigma_max = sv.iter().flatten().copied().fold(0.0, f64::max);
    let cut = tol * sigma_max;
    let ranks = sv
        .iter()
        .map(|s| if sigma_max > 0.0 { s.iter().filter(|&&v| v > cut).count() } else { 0 })
        .collect();
    MultirankVector { ranks, tolerance: tol }
}

pub fn sum_rank(x: &ComplexTensor3, t: &UnitaryTransform, tol: f64) -> Result<usize> {
    Ok(transformed_multirank(x, t, tol)?.sum())
}

/// Transformed tensor nuclear norm: the sum of all transformed singular values.
pub fn ttnn(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<f64> {
    Ok(transformed_singular_values(x, t)?.iter().flatten().sum())
}

/// Largest singular value over all transformed frontal slices.
pub fn transformed_spectral_norm(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<f64> {
    Ok(transformed_singular_values(x, t)?
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max))
}

/// How the singular values of each transformed slice are shrunk.
#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    /// One threshold for every slice.
    Scalar(f64),
    /// Threshold `tau[i]` for slice `i`.
    PerSlice(Vec<f64>),
    /// Slice `i` uses `sigmoid(a[i]) * max(sigma of slice i)`.
    Relative(Vec<f64>),
}

impl From<f64> for Threshold {
    fn from(tau: f64) -> Self {
        Threshold::Scalar(tau)
    }
}

impl From<Vec<f64>> for Threshold {
    fn from(tau: Vec<f64>) -> Self {
        Threshold::PerSlice(tau)
    }
}

pub fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

impl Threshold {
    fn validate(&self, n3: usize) -> Result<()> {
        match self {
            Threshold::Scalar(tau) => {
                if !(*tau >= 0.0) {
                    return Err(Error::Parameter(format!("threshold must be >= 0, got {tau}")));
                }
            }
            Threshold::PerSlice(taus) => {
                if taus.len() != n3 {
                    return Err(Error::Parameter(format!(
                        "{} thresholds for {n3} frontal slices",
                        taus.len()
                    )));
                }
                if let Some(bad) = taus.iter().find(|&&v| !(v >= 0.0)) {
                    return Err(Error::Parameter(format!("threshold must be >= 0, got {bad}")));
                }
            }
            Threshold::Relative(a) => {
                if a.len() != n3 {
                    return Err(Error::Parameter(format!(
                        "{} relative thresholds for {n3} frontal slices",
                        a.len()
                    )));
                }
                if a.iter().any(|v| v.is_nan()) {
                    return Err(Error::Parameter("relative threshold is NaN".into()));
                }
            }
        }
        Ok(())
    }

    /// Absolute threshold for slice `k` (zero based) given that slice's
    /// largest singular value.
    pub fn for_slice(&self, k: usize, sigma_max: f64) -> f64 {
        match self {
            Threshold::Scalar(tau) => *tau,
            Threshold::PerSlice(taus) => taus[k],
            Threshold::Relative(a) => (sigmoid(a[k]) * sigma_max).max(0.0),
        }
    }
}

/// Singular value thresholding in the transformed domain. For a scalar
/// threshold this is the prox of `tau * ttnn`.
pub fn t_tsvt(y: &ComplexTensor3, tau: impl Into<Threshold>, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    Ok(t_tsvt_with_thresholds(y, &tau.into(), t)?.0)
}

/// Like [`t_tsvt`], also returning the absolute threshold applied to each slice.
pub fn t_tsvt_with_thresholds(
    y: &ComplexTensor3,
    tau: &Threshold,
    t: &UnitaryTransform,
) -> Result<(ComplexTensor3, Vec<f64>)> {
    tau.validate(y.dims().n3)?;
    check_transform(y, t)?;
    let yhat = t.apply(y)?;
    let per_slice = par::map_indexed(yhat.dims().n3, |k| {
        let slice = yhat.slice_matrix(k + 1);
        let thin = svd::thin_svd(&slice).ok_or(Error::SvdNoConvergence { slice: k + 1 })?;
        let sigma_max = thin.s.first().copied().unwrap_or(0.0);
        let tk = tau.for_slice(k, sigma_max);
        Ok((shrink(&thin, tk, slice.rows, slice.cols), tk))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (slices, taus): (Vec<CMat>, Vec<f64>) = per_slice.into_iter().unzip();
    Ok((t.apply_adjoint(&ComplexTensor3::from_slices(&slices)?)?, taus))
}

fn shrink(thin: &svd::ThinSvd, tau: f64, rows: usize, cols: usize) -> CMat {
    let mut out = CMat::zeros(rows, cols);
    for (l, &sigma) in thin.s.iter().enumerate() {
        let shrunk = (sigma - tau).max(0.0);
        if shrunk == 0.0 {
            break;
        }
        for i in 0..rows {
            let ui = thin.u.get(i, l) * shrunk;
            if ui == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &mut out.data[i * cols..(i + 1) * cols];
            for (j, o) in row.iter_mut().enumerate() {
                *o += ui * thin.v.get(j, l).conj();
            }
        }
    }
    out
}
