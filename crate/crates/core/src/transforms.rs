//! Unitary transforms acting along the third (temporal) mode.
//!
//! Every mode-3 fiber `x(i, j, :)` is mapped to `U x(i, j, :)` for an
//! `n3 x n3` unitary `U`. The FFT is the unitary DFT (`1/sqrt(n3)` on both the
//! forward and adjoint pass) and the DCT is the orthonormal type-II transform
//! whose adjoint is the orthonormal type-III transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;
use crate::tensor::{CMat, ComplexTensor3, C64};

/// Fibers handed to one worker at a time.
const FIBER_BATCH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Fft,
    Dct,
    Identity,
    Matrix,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Fft => "fft",
            TransformKind::Dct => "dct",
            TransformKind::Identity => "identity",
            TransformKind::Matrix => "matrix",
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fft" | "dft" => Ok(TransformKind::Fft),
            "dct" => Ok(TransformKind::Dct),
            "identity" | "id" => Ok(TransformKind::Identity),
            "matrix" => Ok(TransformKind::Matrix),
            other => Err(Error::Parameter(format!("unknown transform kind '{other}'"))),
        }
    }
}

#[derive(Clone)]
struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[derive(Clone)]
pub struct UnitaryTransform {
    kind: TransformKind,
    size: usize,
    // dense operator for the Dct and Matrix kinds
    matrix: Option<Arc<CMat>>,
    fft: Option<FftPair>,
}

impl fmt::Debug for UnitaryTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryTransform")
            .field("kind", &self.kind)
            .field("size", &self.size)
            .finish()
    }
}

impl PartialEq for UnitaryTransform {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.size == other.size && self.matrix == other.matrix
    }
}

/// Builds a transform of the given kind. `matrix` is required for
/// [`TransformKind::Matrix`] and ignored otherwise.
pub fn make_transform(kind: TransformKind, n3: usize, matrix: Option<CMat>) -> Result<UnitaryTransform> {
    match kind {
        TransformKind::Fft => UnitaryTransform::fft(n3),
        TransformKind::Dct => UnitaryTransform::dct(n3),
        TransformKind::Identity => UnitaryTransform::identity(n3),
        TransformKind::Matrix => {
            let m = matrix.ok_or_else(|| {
                Error::Parameter("matrix transform requires an explicit matrix".into())
            })?;
            if m.rows != n3 {
                return Err(Error::Dimension(format!(
                    "transform matrix is {}x{}, expected {n3}x{n3}",
                    m.rows, m.cols
                )));
            }
            UnitaryTransform::from_matrix(m)
        }
    }
}

fn check_size(n3: usize) -> Result<()> {
    if n3 == 0 {
        return Err(Error::Dimension("transform size must be positive".into()));
    }
    Ok(())
}

/// `||U^H U - I||_F`.
pub fn unitarity_deviation(m: &CMat) -> f64 {
    let gram = m.adjoint().matmul(m).expect("square matrix");
    gram.sub(&CMat::identity(m.cols)).frobenius_norm()
}

impl UnitaryTransform {
    pub fn identity(n3: usize) -> Result<Self> {
        check_size(n3)?;
        Ok(Self {
            kind: TransformKind::Identity,
            size: n3,
            matrix: None,
            fft: None,
        })
    }

    pub fn fft(n3: usize) -> Result<Self> {
        check_size(n3)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            kind: TransformKind::Fft,
            size: n3,
            matrix: None,
            fft: Some(FftPair {
                forward: planner.plan_fft_forward(n3),
                inverse: planner.plan_fft_inverse(n3),
            }),
        })
    }

    pub fn dct(n3: usize) -> Result<Self> {
        check_size(n3)?;
        let n = n3 as f64;
        let m = CMat::from_fn(n3, n3, |k, t| {
            let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            C64::new(s * (PI * (2.0 * t as f64 + 1.0) * k as f64 / (2.0 * n)).cos(), 0.0)
        });
        Ok(Self {
            kind: TransformKind::Dct,
            size: n3,
            matrix: Some(Arc::new(m)),
            fft: None,
        })
    }

    /// Wraps an explicit matrix, rejecting it unless
    /// `||U^H U - I||_F <= 1e-10 * n3`.
    pub fn from_matrix(m: CMat) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Dimension(format!(
                "transform matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        check_size(m.rows)?;
        let deviation = unitarity_deviation(&m);
        let bound = 1e-10 * m.rows as f64;
        if !(deviation <= bound) {
            return Err(Error::NotUnitary { deviation, bound });
        }
        Ok(Self {
            kind: TransformKind::Matrix,
            size: m.rows,
            matrix: Some(Arc::new(m)),
            fft: None,
        })
    }

    /// Reads a matrix transform stored as an `n3 x n3 x 1` tensor.
    pub fn from_tensor(t: &ComplexTensor3) -> Result<Self> {
        let d = t.dims();
        if d.n3 != 1 || d.n1 != d.n2 {
            return Err(Error::Dimension(format!(
                "a transform matrix is stored as an n x n x 1 tensor, got {d}"
            )));
        }
        Self::from_matrix(t.slice_matrix(1))
    }

    /// A random unitary matrix: Gram-Schmidt QR of a complex Gaussian matrix.
    pub fn random_unitary(n3: usize, seed: u64) -> Result<Self> {
        check_size(n3)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexTensor3::random_with((n3, n3, 1), &mut rng).slice_matrix(1);
        Self::from_matrix(orthonormalize_columns(&g))
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// The explicit matrix for `Dct` and `Matrix` kinds.
    pub fn matrix(&self) -> Option<&CMat> {
        self.matrix.as_deref()
    }

    /// Materializes `U` for any kind by transforming the standard basis.
    pub fn dense_matrix(&self) -> CMat {
        let n = self.size;
        let mut cols = Vec::with_capacity(n);
        for e in 0..n {
            let mut fiber = vec![C64::new(0.0, 0.0); n];
            fiber[e] = C64::new(1.0, 0.0);
            self.transform_batch(&mut fiber, true);
            cols.push(fiber);
        }
        CMat::from_fn(n, n, |i, j| cols[j][i])
    }

    pub fn apply(&self, x: &ComplexTensor3) -> Result<ComplexTensor3> {
        self.map_fibers(x, true)
    }

    pub fn apply_adjoint(&self, x: &ComplexTensor3) -> Result<ComplexTensor3> {
        self.map_fibers(x, false)
    }

    fn map_fibers(&self, x: &ComplexTensor3, forward: bool) -> Result<ComplexTensor3> {
        let d = x.dims();
        if d.n3 != self.size {
            return Err(Error::Dimension(format!(
                "transform of size {} applied to tensor with n3 = {}",
                self.size, d.n3
            )));
        }
        if self.kind == TransformKind::Identity {
            return Ok(x.clone());
        }
        let nf = d.slice_len();
        let n3 = d.n3;
        let src = x.data();
        let mut fibers = vec![C64::new(0.0, 0.0); src.len()];
        for k in 0..n3 {
            for f in 0..nf {
                fibers[f * n3 + k] = src[k * nf + f];
            }
        }
        par::for_each_chunk(&mut fibers, FIBER_BATCH * n3, |_, batch| {
            self.transform_batch(batch, forward)
        });
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        for f in 0..nf {
            for k in 0..n3 {
                out[k * nf + f] = fibers[f * n3 + k];
            }
        }
        Ok(ComplexTensor3::from_parts(d, out))
    }

    /// Transforms consecutive fibers of length `size` in place.
    fn transform_batch(&self, batch: &mut [C64], forward: bool) {
        let n = self.size;
        match self.kind {
            TransformKind::Identity => {}
            TransformKind::Fft => {
                let pair = self.fft.as_ref().expect("fft plan");
                let plan = if forward { &pair.forward } else { &pair.inverse };
                plan.process(batch);
                let s = 1.0 / (n as f64).sqrt();
                for z in batch.iter_mut() {
                    *z *= s;
                }
            }
            TransformKind::Dct | TransformKind::Matrix => {
                let m = self.matrix.as_ref().expect("dense transform matrix");
                let mut tmp = vec![C64::new(0.0, 0.0); n];
                for fiber in batch.chunks_mut(n) {
                    for (r, t) in tmp.iter_mut().enumerate() {
                        *t = if forward {
                            (0..n).map(|c| m.get(r, c) * fiber[c]).sum()
                        } else {
                            (0..n).map(|c| m.get(c, r).conj() * fiber[c]).sum()
                        };
                    }
                    fiber.copy_from_slice(&tmp);
                }
            }
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn orthonormalize_columns(m: &CMat) -> CMat {
    let (rows, cols) = (m.rows, m.cols);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<C64> = (0..rows).map(|i| m.get(i, j)).collect();
        for _ in 0..2 {
            for u in &q {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        q.push(v);
    }
    CMat::from_fn(rows, cols, |i, j| q[j][i])
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport {
    pub trials: usize,
    /// max over trials of `| ||T x|| - ||x|| | / ||x||`
    pub norm_deviation: f64,
    /// max over trials of `|<Tx, Ty> - <x, y>| / (||x|| ||y||)`
    pub inner_product_deviation: f64,
    /// max over trials of `||T^H T x - x|| / ||x||`
    pub roundtrip_deviation: f64,
    pub tolerance: f64,
}

impl UnitarityReport {
    pub fn max_deviation(&self) -> f64 {
        self.norm_deviation
            .max(self.inner_product_deviation)
            .max(self.roundtrip_deviation)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() <= self.tolerance
    }
}

/// Randomized check of norm and inner-product preservation on `trials`
/// random `3 x 2 x n3` tensors.
pub fn check_unitarity(t: &UnitaryTransform, trials: usize, tol: f64) -> Result<UnitarityReport> {
    let mut report = UnitarityReport {
        trials,
        norm_deviation: 0.0,
        inner_product_deviation: 0.0,
        roundtrip_deviation: 0.0,
        tolerance: tol,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for _ in 0..trials {
        let x = ComplexTensor3::random_with((3, 2, t.size()), &mut rng);
        let y = ComplexTensor3::random_with((3, 2, t.size()), &mut rng);
        let (tx, ty) = (t.apply(&x)?, t.apply(&y)?);
        let nx = x.frobenius_norm();
        let ny = y.frobenius_norm();
        report.norm_deviation = report
            .norm_deviation
            .max((tx.frobenius_norm() - nx).abs() / nx);
        let ip = (tx.inner_product(&ty)? - x.inner_product(&y)?).norm() / (nx * ny);
        report.inner_product_deviation = report.inner_product_deviation.max(ip);
        let back = t.apply_adjoint(&tx)?;
        report.roundtrip_deviation = report.roundtrip_deviation.max(back.relative_error(&x)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds(n3: usize) -> Vec<UnitaryTransform> {
        vec![
            UnitaryTransform::identity(n3).unwrap(),
            UnitaryTransform::fft(n3).unwrap(),
            UnitaryTransform::dct(n3).unwrap(),
            UnitaryTransform::random_unitary(n3, 9).unwrap(),
        ]
    }

    #[test]
    fn identity_is_bit_exact() {
        let x = ComplexTensor3::random((3, 4, 5), 1);
        let t = UnitaryTransform::identity(5).unwrap();
        assert_eq!(t.apply(&x).unwrap(), x);
        assert_eq!(t.apply_adjoint(&x).unwrap(), x);
    }

    #[test]
    fn fft_of_constant_fiber_is_dc_only() {
        let c = C64::new(1.5, -0.5);
        let n3 = 6;
        let x = ComplexTensor3::from_fn((2, 3, n3), |_, _, _| c);
        let y = UnitaryTransform::fft(n3).unwrap().apply(&x).unwrap();
        let dc = c * (n3 as f64).sqrt();
        for &z in y.frontal_slice(1) {
            assert!((z - dc).norm() < 1e-13);
        }
        for k in 2..=n3 {
            assert!(y.frontal_slice(k).iter().all(|z| z.norm() < 1e-13));
        }
    }

    #[test]
    fn matrix_kind_matches_fiber_matvec() {
        let n3 = 5;
        let t = UnitaryTransform::random_unitary(n3, 42).unwrap();
        let u = t.matrix().unwrap().clone();
        let x = ComplexTensor3::random((3, 2, n3), 2);
        let y = t.apply(&x).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                for r in 0..n3 {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..n3 {
                        acc += u.get(r, c) * x[(i, j, c)];
                    }
                    assert!((acc - y[(i, j, r)]).norm() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn round_trip_and_adjoint_identity() {
        for t in all_kinds(7) {
            let x = ComplexTensor3::random((4, 3, 7), 3);
            let y = ComplexTensor3::random((4, 3, 7), 4);
            let back = t.apply_adjoint(&t.apply(&x).unwrap()).unwrap();
            assert!(back.relative_error(&x).unwrap() <= 1e-12, "{:?}", t.kind());
            let fwd = t.apply(&t.apply_adjoint(&x).unwrap()).unwrap();
            assert!(fwd.relative_error(&x).unwrap() <= 1e-12, "{:?}", t.kind());

            let lhs = t.apply(&x).unwrap().inner_product(&y).unwrap();
            let rhs = x.inner_product(&t.apply_adjoint(&y).unwrap()).unwrap();
            let scale = x.frobenius_norm() * y.frobenius_norm();
            assert!((lhs - rhs).norm() <= 1e-12 * scale, "{:?}", t.kind());

            let nx = x.frobenius_norm();
            assert!((t.apply(&x).unwrap().frobenius_norm() - nx).abs() <= 1e-12 * nx);
        }
    }

    #[test]
    fn identity_matrix_is_accepted() {
        let t = make_transform(TransformKind::Matrix, 4, Some(CMat::identity(4))).unwrap();
        let report = check_unitarity(&t, 5, 1e-12).unwrap();
        assert_eq!(report.max_deviation(), 0.0);
        assert!(report.passed());
    }

    #[test]
    fn scaling_matrix_is_rejected() {
        let mut m = CMat::identity(4);
        m.set(0, 0, C64::new(2.0, 0.0));
        match UnitaryTransform::from_matrix(m) {
            Err(Error::NotUnitary { deviation, .. }) => assert!((deviation - 3.0).abs() < 1e-12),
            other => panic!("expected unitarity error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_kind_requires_matrix_of_right_size() {
        assert!(make_transform(TransformKind::Matrix, 3, None).is_err());
        assert!(make_transform(TransformKind::Matrix, 3, Some(CMat::identity(4))).is_err());
        assert!(UnitaryTransform::from_matrix(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let x = ComplexTensor3::random((2, 2, 3), 0);
        let t = UnitaryTransform::fft(4).unwrap();
        assert!(matches!(t.apply(&x), Err(Error::Dimension(_))));
        assert!(matches!(t.apply_adjoint(&x), Err(Error::Dimension(_))));
    }

    #[test]
    fn fft_of_length_one_is_identity() {
        let x = ComplexTensor3::random((3, 3, 1), 5);
        let y = UnitaryTransform::fft(1).unwrap().apply(&x).unwrap();
        assert!(y.relative_error(&x).unwrap() <= 1e-15);
    }

    #[test]
    fn dct_keeps_real_tensors_real() {
        let x = ComplexTensor3::random((3, 3, 8), 6).map(|z| C64::new(z.re, 0.0));
        let t = UnitaryTransform::dct(8).unwrap();
        for y in [t.apply(&x).unwrap(), t.apply_adjoint(&x).unwrap()] {
            assert!(y.data().iter().all(|z| z.im.abs() <= 1e-12));
        }
    }

    #[test]
    fn random_unitary_passes_checker() {
        let t = UnitaryTransform::random_unitary(6, 77).unwrap();
        assert!(unitarity_deviation(t.matrix().unwrap()) <= 1e-12);
        let report = check_unitarity(&t, 10, 1e-12).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn dense_matrix_of_fft_is_unitary_dft() {
        let n = 4;
        let m = UnitaryTransform::fft(n).unwrap().dense_matrix();
        for r in 0..n {
            for c in 0..n {
                let angle = -2.0 * PI * (r * c) as f64 / n as f64;
                let expect = C64::from_polar(1.0 / (n as f64).sqrt(), angle);
                assert!((m.get(r, c) - expect).norm() < 1e-14);
            }
        }
    }
}
