//! Cartesian dynamic MRI acquisition model.
//!
//! Frames are the frontal slices of a tensor (`nx x ny` images, `nt` frames).
//! The forward operator is `A = S F`: a per-frame centered unitary 2D DFT
//! followed by gathering the sampled k-space locations.

mod fourier;
mod phantom;
mod sampling;

pub use fourier::{spatial_fft, spatial_ifft};
pub use phantom::{add_noise, generating_transform, make_phantom, PhantomKind};
pub use sampling::{
    gen_pseudo_radial_mask, gen_pseudo_radial_mask_with, gen_random_mask, gen_vds_mask,
    rasterize_segment, KSpaceVector, Mask, RadialParams, SamplingSpec, GOLDEN_ANGLE,
};

use crate::error::{Error, Result};
use crate::tensor::ComplexTensor3;

/// `b = S(F(x))`.
pub fn forward(x: &ComplexTensor3, spec: &SamplingSpec) -> Result<KSpaceVector> {
    spec.check_dims(x.dims())?;
    spec.gather(&spatial_fft(x))
}

/// `A^H b = F^H(S^H b)`, the zero-filled reconstruction.
pub fn adjoint(b: &KSpaceVector, spec: &SamplingSpec) -> Result<ComplexTensor3> {
    Ok(spatial_ifft(&spec.scatter(b)?))
}

/// `20 log10(||reference|| / ||rec - reference||)` in dB, `+inf` when the two
/// tensors are identical.
pub fn snr(rec: &ComplexTensor3, reference: &ComplexTensor3) -> Result<f64> {
    let scale = reference.frobenius_norm();
    if scale == 0.0 {
        return Err(Error::Parameter("SNR reference tensor is zero".into()));
    }
    let err = rec.try_sub(reference)?.frobenius_norm();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (scale / err).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Dims, C64};

    #[test]
    fn snr_reference_values() {
        let reference = ComplexTensor3::random((4, 4, 2), 1);
        let same_size = reference.scale(2.0);
        assert!(snr(&same_size, &reference).unwrap().abs() < 1e-12);
        let close = reference.scale(1.1);
        assert!((snr(&close, &reference).unwrap() - 20.0).abs() < 1e-10);
        assert_eq!(snr(&reference, &reference).unwrap(), f64::INFINITY);
    }

    #[test]
    fn snr_matches_direct_formula() {
        let reference = ComplexTensor3::random((5, 3, 2), 2);
        let rec = ComplexTensor3::random((5, 3, 2), 3);
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, x) in reference.data().iter().zip(rec.data()) {
            num += r.re * r.re + r.im * r.im;
            den += (x.re - r.re).powi(2) + (x.im - r.im).powi(2);
        }
        let oracle = 10.0 * (num / den).log10();
        assert!((snr(&rec, &reference).unwrap() - oracle).abs() <= 1e-10);
    }

    #[test]
    fn snr_errors() {
        let zero = ComplexTensor3::zeros((2, 2, 2));
        assert!(matches!(snr(&zero, &zero), Err(Error::Parameter(_))));
        let a = ComplexTensor3::random((2, 2, 2), 0);
        assert!(snr(&a, &ComplexTensor3::random((2, 2, 3), 0)).is_err());
    }

    #[test]
    fn fully_sampled_round_trip() {
        let x = ComplexTensor3::random((6, 5, 3), 4);
        let spec = SamplingSpec::full(Dims::new(6, 5, 3));
        let b = forward(&x, &spec).unwrap();
        assert_eq!(b.len(), 90);
        assert!(adjoint(&b, &spec).unwrap().relative_error(&x).unwrap() <= 1e-12);
    }

    #[test]
    fn empty_mask_gives_empty_data() {
        let x = ComplexTensor3::random((4, 4, 2), 5);
        let spec = SamplingSpec::empty(Dims::new(4, 4, 2));
        let b = forward(&x, &spec).unwrap();
        assert_eq!((b.len(), spec.count()), (0, 0));
        assert_eq!(adjoint(&b, &spec).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn adjoint_identity_and_projection() {
        let dims = Dims::new(8, 6, 3);
        let spec = gen_random_mask(dims, 0.4, 7).unwrap();
        let x = ComplexTensor3::random(dims, 8);
        let y = KSpaceVector::new(ComplexTensor3::random((spec.count(), 1, 1), 9).into_data());
        let lhs = forward(&x, &spec).unwrap().inner_product(&y).unwrap();
        let rhs = x.inner_product(&adjoint(&y, &spec).unwrap()).unwrap();
        assert!((lhs.re - rhs.re).abs() <= 1e-12 * x.frobenius_norm() * y.norm());
        let again = forward(&adjoint(&y, &spec).unwrap(), &spec).unwrap();
        let diff: f64 = again
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-12 * y.norm());
        assert_eq!(adjoint(&KSpaceVector::new(vec![C64::new(0.0, 0.0); spec.count()]), &spec).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec = SamplingSpec::full(Dims::new(4, 4, 2));
        assert!(forward(&ComplexTensor3::zeros((4, 4, 3)), &spec).is_err());
        assert!(adjoint(&KSpaceVector::new(vec![C64::new(0.0, 0.0); 3]), &spec).is_err());
    }
}
