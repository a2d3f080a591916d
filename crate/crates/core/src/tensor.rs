//! Dense third-order complex tensors.
//!
//! Entries are stored slice-major and row-major within each frontal slice:
//! entry `(i, j, k)` (zero based) lives at offset `(k * n1 + i) * n2 + j`, so
//! every frontal slice is a contiguous `n1 x n2` row-major block.

use std::fmt;
use std::ops::{Add, Index, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n1 + i) * self.n2 + j
    }

    fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(Error::Dimension(format!(
                "all dimensions must be positive, got {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

impl From<(usize, usize, usize)> for Dims {
    fn from((n1, n2, n3): (usize, usize, usize)) -> Self {
        Self { n1, n2, n3 }
    }
}

/// A dense `n1 x n2 x n3` complex tensor. Operations never mutate their
/// inputs; they return fresh tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor3 {
    dims: Dims,
    data: Vec<C64>,
}

impl ComplexTensor3 {
    pub fn new(dims: impl Into<Dims>, data: Vec<C64>) -> Result<Self> {
        let dims = dims.into();
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "{} values supplied for a {} tensor ({} expected)",
                data.len(),
                dims,
                dims.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: impl Into<Dims>) -> Self {
        let dims = dims.into();
        assert!(dims.validate().is_ok(), "tensor dimensions must be positive");
        Self {
            dims,
            data: vec![C64::new(0.0, 0.0); dims.len()],
        }
    }

    /// Builds a tensor from a function of zero-based `(i, j, k)`.
    pub fn from_fn(dims: impl Into<Dims>, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let dims = dims.into();
        let mut t = Self::zeros(dims);
        for k in 0..dims.n3 {
            for i in 0..dims.n1 {
                for j in 0..dims.n2 {
                    t.data[dims.offset(i, j, k)] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Stacks `n3` frontal slices of equal shape.
    pub fn from_slices(slices: &[CMat]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Dimension("no frontal slices supplied".into()))?;
        let (rows, cols) = (first.rows, first.cols);
        let mut data = Vec::with_capacity(rows * cols * slices.len());
        for (k, s) in slices.iter().enumerate() {
            if s.rows != rows || s.cols != cols {
                return Err(Error::Dimension(format!(
                    "slice {} is {}x{}, expected {rows}x{cols}",
                    k + 1,
                    s.rows,
                    s.cols
                )));
            }
            data.extend_from_slice(&s.data);
        }
        Self::new((rows, cols, slices.len()), data)
    }

    /// Entries are i.i.d. standard complex Gaussians (unit variance per
    /// real and imaginary component), deterministic in `seed`.
    pub fn random(dims: impl Into<Dims>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(dims, &mut rng)
    }

    pub fn random_with<R: rand::Rng + ?Sized>(dims: impl Into<Dims>, rng: &mut R) -> Self {
        let dims = dims.into();
        let mut t = Self::zeros(dims);
        for z in t.data.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = C64::new(re, im);
        }
        t
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Frontal slice `k`, counted from 1, as a row-major `n1 x n2` block.
    ///
    /// Panics if `k` is outside `1..=n3`.
    pub fn frontal_slice(&self, k: usize) -> &[C64] {
        assert!(
            (1..=self.dims.n3).contains(&k),
            "frontal slice index {k} outside 1..={}",
            self.dims.n3
        );
        let len = self.dims.slice_len();
        &self.data[(k - 1) * len..k * len]
    }

    /// Frontal slice `k` (counted from 1) copied into a matrix.
    pub fn slice_matrix(&self, k: usize) -> CMat {
        CMat {
            rows: self.dims.n1,
            cols: self.dims.n2,
            data: self.frontal_slice(k).to_vec(),
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dims.slice_len())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum conj(a) * b` over all entries.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        self.check_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `||self - other||_F / ||other||_F`, or the absolute distance when
    /// `other` is zero.
    pub fn relative_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.try_sub(reference)?.frobenius_norm();
        let scale = reference.frobenius_norm();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub(crate) fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "operands are {} and {}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts(dims: Dims, data: Vec<C64>) -> Self {
        debug_assert_eq!(dims.len(), data.len());
        Self { dims, data }
    }
}

impl Index<(usize, usize, usize)> for ComplexTensor3 {
    type Output = C64;

    /// Zero-based `(i, j, k)` addressing.
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &C64 {
        assert!(i < self.dims.n1 && j < self.dims.n2 && k < self.dims.n3);
        &self.data[self.dims.offset(i, j, k)]
    }
}

impl Add for &ComplexTensor3 {
    type Output = ComplexTensor3;

    /// Panics on shape mismatch; use [`ComplexTensor3::try_add`] to get an error.
    fn add(self, rhs: Self) -> ComplexTensor3 {
        self.try_add(rhs).expect("tensor shapes differ")
    }
}

impl Sub for &ComplexTensor3 {
    type Output = ComplexTensor3;

    fn sub(self, rhs: Self) -> ComplexTensor3 {
        self.try_sub(rhs).expect("tensor shapes differ")
    }
}

/// Small dense row-major complex matrix, used for frontal slices.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &rhs.data[l * rhs.cols..(l + 1) * rhs.cols];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// The `(n1 n3) x (n2 n3)` block-diagonal matrix whose diagonal blocks are the
/// frontal slices of `source`. Off-block entries are implicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagView {
    source: ComplexTensor3,
}

pub fn bdiag(x: &ComplexTensor3) -> BlockDiagView {
    BlockDiagView { source: x.clone() }
}

pub fn fold(view: BlockDiagView) -> ComplexTensor3 {
    view.source
}

impl BlockDiagView {
    pub fn rows(&self) -> usize {
        self.source.dims.n1 * self.source.dims.n3
    }

    pub fn cols(&self) -> usize {
        self.source.dims.n2 * self.source.dims.n3
    }

    pub fn num_blocks(&self) -> usize {
        self.source.dims.n3
    }

    /// Diagonal block `k`, counted from 1.
    pub fn block(&self, k: usize) -> CMat {
        self.source.slice_matrix(k)
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let d = self.source.dims;
        let (kr, i) = (r / d.n1, r % d.n1);
        let (kc, j) = (c / d.n2, c % d.n2);
        if kr == kc {
            self.source[(i, j, kr)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Product of two block-diagonal matrices, computed block by block.
    pub fn matmul(&self, rhs: &BlockDiagView) -> Result<BlockDiagView> {
        let (a, b) = (self.source.dims, rhs.source.dims);
        if a.n2 != b.n1 || a.n3 != b.n3 {
            return Err(Error::Dimension(format!(
                "block-diagonal product of {a} and {b}"
            )));
        }
        let blocks = (1..=a.n3)
            .map(|k| self.block(k).matmul(&rhs.block(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockDiagView {
            source: ComplexTensor3::from_slices(&blocks)?,
        })
    }

    /// Materializes the full matrix including the zero blocks.
    pub fn to_dense(&self) -> CMat {
        CMat::from_fn(self.rows(), self.cols(), |r, c| self.get(r, c))
    }
}
