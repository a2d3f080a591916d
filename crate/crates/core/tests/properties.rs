mod common;

use proptest::prelude::*;
use ttnn::mri::{self, gen_random_mask};
use ttnn::{t_tsvt, transformed_spectral_norm, tt_svd, ttnn as nuclear, ComplexTensor3, Dims, UnitaryTransform};

fn transform(kind: u8, n3: usize, seed: u64) -> UnitaryTransform {
    match kind % 4 {
        0 => UnitaryTransform::identity(n3),
        1 => UnitaryTransform::fft(n3),
        2 => UnitaryTransform::dct(n3),
        _ => UnitaryTransform::random_unitary(n3, seed),
    }
    .unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..6, 1usize..6, 1usize..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_conjugate_symmetric(d in dims(), s1: u64, s2: u64) {
        let x = ComplexTensor3::random(d, s1);
        let y = ComplexTensor3::random(d, s2);
        let xy = x.inner_product(&y).unwrap();
        let yx = y.inner_product(&x).unwrap();
        prop_assert!((xy - yx.conj()).norm() <= 1e-12 * (1.0 + xy.norm()));
        let xx = x.inner_product(&x).unwrap();
        prop_assert!(xx.im.abs() <= 1e-12 * xx.re);
        prop_assert!((xx.re - x.frobenius_norm().powi(2)).abs() <= 1e-12 * xx.re);
    }

    #[test]
    fn frobenius_norm_obeys_triangle_inequality(d in dims(), s1: u64, s2: u64) {
        let x = ComplexTensor3::random(d, s1);
        let y = ComplexTensor3::random(d, s2);
        prop_assert!((&x + &y).frobenius_norm() <= x.frobenius_norm() + y.frobenius_norm() + 1e-12);
    }

    #[test]
    fn transforms_preserve_norm_and_invert(d in dims(), kind: u8, seed: u64) {
        let t = transform(kind, d.2, seed);
        let x = ComplexTensor3::random(d, seed);
        let xhat = t.apply(&x).unwrap();
        prop_assert!((xhat.frobenius_norm() - x.frobenius_norm()).abs() <= 1e-12 * x.frobenius_norm());
        prop_assert!(t.apply_adjoint(&xhat).unwrap().relative_error(&x).unwrap() <= 1e-12);
        let oracle = common::dense_transform(&x, &t, false);
        prop_assert!(xhat.relative_error(&oracle).unwrap() <= 1e-12);
    }

    #[test]
    fn tt_svd_reconstructs(d in dims(), kind: u8, seed: u64) {
        let t = transform(kind, d.2, seed);
        let x = ComplexTensor3::random(d, seed);
        let f = tt_svd(&x, &t).unwrap();
        prop_assert!(f.reconstruct().unwrap().relative_error(&x).unwrap() <= 1e-10);
    }

    #[test]
    fn prox_is_nonexpansive(d in dims(), kind: u8, s1: u64, s2: u64, tau in 0.0f64..3.0) {
        let t = transform(kind, d.2, s1);
        let y1 = ComplexTensor3::random(d, s1);
        let y2 = ComplexTensor3::random(d, s2);
        let out = (&t_tsvt(&y1, tau, &t).unwrap() - &t_tsvt(&y2, tau, &t).unwrap()).frobenius_norm();
        prop_assert!(out <= (&y1 - &y2).frobenius_norm() + 1e-12);
    }

    #[test]
    fn ttnn_is_convex(d in dims(), kind: u8, s1: u64, s2: u64) {
        let t = transform(kind, d.2, s1);
        let x = ComplexTensor3::random(d, s1);
        let y = ComplexTensor3::random(d, s2);
        let mid = (&x + &y).scale(0.5);
        let lhs = nuclear(&mid, &t).unwrap();
        let rhs = 0.5 * nuclear(&x, &t).unwrap() + 0.5 * nuclear(&y, &t).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn duality_sandwich(d in dims(), kind: u8, s1: u64, s2: u64) {
        let t = transform(kind, d.2, s1);
        let x = ComplexTensor3::random(d, s1);
        let a = ComplexTensor3::random(d, s2);
        let a = a.scale(1.0 / transformed_spectral_norm(&a, &t).unwrap());
        prop_assert!(x.inner_product(&a).unwrap().re <= nuclear(&x, &t).unwrap() + 1e-9);
    }

    #[test]
    fn ttnn_matches_explicit_dft_matrix(d in dims(), seed: u64) {
        let fft = UnitaryTransform::fft(d.2).unwrap();
        let dense = UnitaryTransform::from_matrix(fft.dense_matrix()).unwrap();
        let x = ComplexTensor3::random(d, seed);
        let (a, b) = (nuclear(&x, &fft).unwrap(), nuclear(&x, &dense).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a);
        let (a, b) = (
            transformed_spectral_norm(&x, &fft).unwrap(),
            transformed_spectral_norm(&x, &dense).unwrap(),
        );
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn normal_operator_is_a_projection(nx in 1usize..9, ny in 1usize..9, nt in 1usize..4, fraction in 0.0f64..1.0, seed: u64) {
        let spec = gen_random_mask(Dims::new(nx, ny, nt), fraction, seed).unwrap();
        let x = ComplexTensor3::random(spec.dims(), seed);
        let ax = mri::adjoint(&mri::forward(&x, &spec).unwrap(), &spec).unwrap();
        let q = ax.inner_product(&x).unwrap();
        let n2 = x.frobenius_norm().powi(2);
        prop_assert!(q.im.abs() <= 1e-10 * n2);
        prop_assert!(q.re >= -1e-10 * n2 && q.re <= n2 * (1.0 + 1e-10));
        let again = mri::adjoint(&mri::forward(&ax, &spec).unwrap(), &spec).unwrap();
        prop_assert!((&again - &ax).frobenius_norm() <= 1e-12 * (1.0 + n2.sqrt()));
    }

    #[test]
    fn mask_generators_are_pure(nx in 2usize..20, ny in 2usize..20, nt in 1usize..4, seed: u64) {
        let a = mri::gen_pseudo_radial_mask(nx, ny, nt, 3, seed).unwrap();
        let b = mri::gen_pseudo_radial_mask(nx, ny, nt, 3, seed).unwrap();
        prop_assert_eq!(a.mask(), b.mask());
        let a = mri::gen_vds_mask(nx, ny, nt, 3.0, seed).unwrap();
        let b = mri::gen_vds_mask(nx, ny, nt, 3.0, seed).unwrap();
        prop_assert_eq!(a.mask(), b.mask());
    }
}
