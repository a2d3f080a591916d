mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ttnn::mri::{gen_pseudo_radial_mask, gen_vds_mask, RadialParams};
use ttnn::{t_tsvt, ttnn as nuclear, CMat, ComplexTensor3, UnitaryTransform, C64};

#[test]
fn jacobi_oracle_agrees_with_known_singular_values() {
    // diag(3, 1) rotated on both sides
    let (c, s) = (0.6, 0.8);
    let a = CMat::from_fn(2, 2, |i, j| {
        let u = [[c, -s], [s, c]];
        let v = [[s, c], [-c, s]];
        C64::new((0..2).map(|l| u[i][l] * [3.0, 1.0][l] * v[j][l]).sum(), 0.0)
    });
    let sv = common::jacobi_singular_values(&a);
    assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
}

#[test]
fn ttnn_matches_dense_jacobi_nuclear_norm() {
    for seed in 0..20u64 {
        let t = match seed % 4 {
            0 => UnitaryTransform::identity(4),
            1 => UnitaryTransform::fft(4),
            2 => UnitaryTransform::dct(4),
            _ => UnitaryTransform::random_unitary(4, seed),
        }
        .unwrap();
        let x = ComplexTensor3::random((5, 3, 4), seed);
        let (got, want) = (nuclear(&x, &t).unwrap(), common::ttnn_oracle(&x, &t));
        assert!((got - want).abs() <= 1e-10 * want, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn tsvt_matches_per_slice_svt_oracle() {
    for seed in 0..10u64 {
        let t = UnitaryTransform::random_unitary(3, seed).unwrap();
        let y = ComplexTensor3::random((5, 4, 3), seed + 100);
        for tau in [0.0, 0.5, 2.0] {
            let got = t_tsvt(&y, tau, &t).unwrap();
            let want = common::tsvt_oracle(&y, tau, &t);
            assert!((&got - &want).frobenius_norm() <= 1e-10 * y.frobenius_norm());
        }
    }
}

/// Unitary from the QR factorization of a complex Gaussian matrix.
fn qr_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let q = g.qr().q();
    CMat::from_fn(n, n, |i, j| q[(i, j)])
}

#[test]
fn qr_unitary_works_as_matrix_transform() {
    for n in [1, 2, 5, 8] {
        let t = UnitaryTransform::from_matrix(qr_unitary(n, n as u64)).unwrap();
        let x = ComplexTensor3::random((3, 4, n), 7);
        let f = ttnn::tt_svd(&x, &t).unwrap();
        assert!(f.reconstruct().unwrap().relative_error(&x).unwrap() <= 1e-10);
        let (got, want) = (nuclear(&x, &t).unwrap(), common::ttnn_oracle(&x, &t));
        assert!((got - want).abs() <= 1e-10 * want);
    }
}

/// Marks every cell on the spoke segment from `c` to `e`: all integers along
/// the longer axis, the other coordinate rounded half away from `c`.
fn oracle_segment(c: (i64, i64), e: (i64, i64), mark: &mut dyn FnMut(i64, i64)) {
    let (dx, dy) = (e.0 - c.0, e.1 - c.1);
    let major = dx.abs().max(dy.abs());
    if major == 0 {
        mark(c.0, c.1);
        return;
    }
    for s in 0..=major {
        let along = |d: i64| -> i64 {
            // exact rational s * |d| / major, rounded half up in magnitude
            let num = 2 * s * d.abs() + major;
            d.signum() * num.div_euclid(2 * major)
        };
        mark(c.0 + along(dx), c.1 + along(dy));
    }
}

fn oracle_radial(nx: usize, ny: usize, nt: usize, p: &RadialParams) -> Vec<Vec<bool>> {
    let c = ((nx / 2) as f64, (ny / 2) as f64);
    (0..nt)
        .map(|k| {
            let mut frame = vec![false; nx * ny];
            for l in 0..p.lines {
                let theta = p.base_angle + k as f64 * p.angle_increment + l as f64 * PI / p.lines as f64;
                for sign in [1.0, -1.0] {
                    let (u, v) = (sign * theta.cos(), sign * theta.sin());
                    // smallest positive step that reaches an edge of the grid
                    let mut t = f64::INFINITY;
                    for (pos, dir, n) in [(c.0, u, nx), (c.1, v, ny)] {
                        if dir.abs() > 1e-12 {
                            let edge = if dir > 0.0 { (n - 1) as f64 } else { 0.0 };
                            t = t.min((edge - pos) / dir);
                        }
                    }
                    let e = (
                        (c.0 + t * u).round().clamp(0.0, (nx - 1) as f64) as i64,
                        (c.1 + t * v).round().clamp(0.0, (ny - 1) as f64) as i64,
                    );
                    oracle_segment((c.0 as i64, c.1 as i64), e, &mut |i, j| {
                        frame[i as usize * ny + j as usize] = true
                    });
                }
            }
            frame
        })
        .collect()
}

#[test]
fn radial_mask_popcount_matches_rasterization_oracle() {
    let (nx, ny, nt, lines) = (144, 112, 16, 16);
    for seed in [0u64, 1, 42] {
        let spec = gen_pseudo_radial_mask(nx, ny, nt, lines, seed).unwrap();
        let oracle = oracle_radial(nx, ny, nt, &RadialParams::seeded(lines, seed));
        for (k, frame) in oracle.iter().enumerate() {
            let want = frame.iter().filter(|&&b| b).count();
            assert_eq!(spec.mask().frame_count(k), want, "seed {seed} frame {k}");
            assert!(want <= lines * nx.max(ny) + 2 * lines);
            assert!(want >= nx.max(ny));
            for i in 0..nx {
                for j in 0..ny {
                    assert_eq!(spec.mask().get(i, j, k), frame[i * ny + j]);
                }
            }
        }
    }
}

#[test]
fn single_spoke_at_zero_angle_has_nx_samples() {
    let p = RadialParams { lines: 1, base_angle: 0.0, angle_increment: 0.0 };
    let spec = ttnn::mri::gen_pseudo_radial_mask_with(9, 12, 2, &p).unwrap();
    for k in 0..2 {
        assert_eq!(spec.mask().frame_count(k), 9);
        assert!((0..9).all(|i| spec.mask().get(i, 6, k)));
    }
}

#[test]
fn vds_fraction_is_within_ten_percent_over_100_seeds() {
    // independent draws: the per-frame spread shrinks like 1/sqrt(nx * ny)
    let (nx, ny, nt) = (128, 96, 2);
    for accel in [3.0, 6.0] {
        for seed in 0..100u64 {
            let spec = gen_vds_mask(nx, ny, nt, accel, seed).unwrap();
            for k in 0..nt {
                let frac = spec.mask().frame_count(k) as f64 / (nx * ny) as f64;
                assert!(
                    (frac * accel - 1.0).abs() <= 0.1,
                    "accel {accel} seed {seed} frame {k}: fraction {frac}"
                );
                assert!(spec.mask().get(nx / 2, ny / 2, k));
            }
        }
    }
}
