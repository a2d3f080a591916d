//! Transformed tensor low-rank reconstruction of dynamic MR images.
//!
//! The crate provides a dense complex third-order tensor type, unitary
//! transforms along the temporal mode, the transformed tensor SVD and nuclear
//! norm with its singular value thresholding prox, a Cartesian MRI forward
//! model with mask generators and phantoms, and an ADMM solver that recovers
//! image series from undersampled k-space.

pub mod admm;
pub mod check;
mod clock;
pub mod error;
pub mod io;
pub mod mri;
mod par;
pub mod svd;
pub mod tensor;
pub mod transforms;
pub mod tsvd;

pub use error::{Error, Result};
pub use tensor::{bdiag, fold, BlockDiagView, CMat, ComplexTensor3, Dims, C64};
pub use transforms::{make_transform, TransformKind, UnitaryTransform};
pub use tsvd::{
    identity_tensor, is_unitary_tensor, sum_rank, t_product, t_tsvt, tensor_hermitian_transpose,
    transformed_multirank, transformed_spectral_norm, tt_svd, ttnn, MultirankVector, Threshold,
    TtSvdFactors,
};
