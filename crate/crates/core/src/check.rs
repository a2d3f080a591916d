//! Built-in invariant suite, runnable from the command line on any build.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{self, AdmmConfig};
use crate::clock::Stopwatch;
use crate::error::Result;
use crate::mri::{self, gen_pseudo_radial_mask, gen_random_mask, gen_vds_mask, KSpaceVector, PhantomKind};
use crate::svd;
use crate::tensor::{bdiag, ComplexTensor3, Dims};
use crate::transforms::{check_unitarity, TransformKind, UnitaryTransform};
use crate::tsvd::{self, t_product, tensor_hermitian_transpose, transformed_spectral_norm, tt_svd, ttnn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckLevel {
    Quick,
    Full,
}

impl std::str::FromStr for CheckLevel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(CheckLevel::Quick),
            "full" => Ok(CheckLevel::Full),
            other => Err(crate::Error::Parameter(format!("unknown check level '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<28} {} ({:.0} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_ms
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

type Check = fn(&mut ChaCha8Rng, usize) -> Result<(bool, String)>;

pub fn run_checks(level: CheckLevel) -> CheckReport {
    let trials = match level {
        CheckLevel::Quick => 3,
        CheckLevel::Full => 20,
    };
    let checks: [(&'static str, Check); 9] = [
        ("transform unitarity", transform_unitarity),
        ("tt-svd exactness", tt_svd_exactness),
        ("ttnn dense oracle", ttnn_dense_oracle),
        ("nuclear/spectral duality", duality_witness),
        ("prox nonexpansive", prox_nonexpansive),
        ("operator adjointness", operator_adjointness),
        ("x-update normal equations", x_update_residual),
        ("generalized equals classic", generalized_equivalence),
        ("low-rank recovery", small_recovery),
    ];
    let mut report = CheckReport::default();
    for (i, (name, check)) in checks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let start = Stopwatch::start();
        let (passed, detail) = match check(&mut rng, trials) {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        report.results.push(CheckResult {
            name,
            passed,
            detail,
            elapsed_ms: start.elapsed_ms(),
        });
    }
    report
}

fn transforms(n3: usize, seed: u64) -> Result<Vec<UnitaryTransform>> {
    Ok(vec![
        UnitaryTransform::identity(n3)?,
        UnitaryTransform::fft(n3)?,
        UnitaryTransform::dct(n3)?,
        UnitaryTransform::random_unitary(n3, seed)?,
    ])
}

fn transform_unitarity(_: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for t in transforms(7, 1)? {
        worst = worst.max(check_unitarity(&t, trials, 1e-12)?.max_deviation());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn tt_svd_exactness(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut unitary = true;
    for trial in 0..trials {
        for t in transforms(4, trial as u64)? {
            let x = ComplexTensor3::random_with((6, 5, 4), rng);
            let f = tt_svd(&x, &t)?;
            worst = worst.max(f.reconstruct()?.relative_error(&x)?);
            unitary &= tsvd::is_unitary_tensor(&f.u, &t, 1e-10)? && tsvd::is_unitary_tensor(&f.v, &t, 1e-10)?;
        }
    }
    Ok((worst <= 1e-10 && unitary, format!("max relative error {worst:.2e}, unitary factors {unitary}")))
}

fn ttnn_dense_oracle(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        for t in transforms(3, trial as u64)? {
            let x = ComplexTensor3::random_with((5, 4, 3), rng);
            let dense = bdiag(&t.apply(&x)?).to_dense();
            let oracle: f64 = svd::singular_values(&dense)
                .ok_or(crate::Error::SvdNoConvergence { slice: 0 })?
                .iter()
                .sum();
            worst = worst.max((ttnn(&x, &t)? - oracle).abs() / oracle);
        }
    }
    Ok((worst <= 1e-10, format!("max relative gap {worst:.2e}")))
}

fn duality_witness(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut spectral: f64 = 0.0;
    for trial in 0..trials {
        let t = UnitaryTransform::random_unitary(4, trial as u64)?;
        let x = ComplexTensor3::random_with((5, 4, 4), rng);
        let f = tt_svd(&x, &t)?;
        // thin witness: only the leading min(n1, n2) singular vector pairs
        let r = 4;
        let u = truncate_columns(&f.u, r, &t)?;
        let v = truncate_columns(&f.v, r, &t)?;
        let witness = t_product(&u, &tensor_hermitian_transpose(&v, &t)?, &t)?;
        spectral = spectral.max(transformed_spectral_norm(&witness, &t)?);
        let nuclear = ttnn(&x, &t)?;
        worst = worst.max((x.inner_product(&witness)?.re - nuclear).abs() / nuclear);
    }
    Ok((
        worst <= 1e-9 && spectral <= 1.0 + 1e-9,
        format!("max relative gap {worst:.2e}, witness spectral norm {spectral:.12}"),
    ))
}

/// Keeps the first `r` lateral slices (columns) of each transformed slice.
fn truncate_columns(q: &ComplexTensor3, r: usize, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    let qhat = t.apply(q)?;
    let d = qhat.dims();
    let kept = ComplexTensor3::from_fn((d.n1, r, d.n3), |i, j, k| qhat[(i, j, k)]);
    t.apply_adjoint(&kept)
}

fn prox_nonexpansive(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let t = UnitaryTransform::fft(3)?;
        let y1 = ComplexTensor3::random_with((5, 4, 3), rng);
        let y2 = ComplexTensor3::random_with((5, 4, 3), rng);
        let d_in = (&y1 - &y2).frobenius_norm();
        let d_out = (&tsvd::t_tsvt(&y1, 1.0, &t)? - &tsvd::t_tsvt(&y2, 1.0, &t)?).frobenius_norm();
        worst = worst.max(d_out / d_in);
    }
    Ok((worst <= 1.0 + 1e-12, format!("max contraction ratio {worst:.6}")))
}

fn operator_adjointness(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        for spec in [
            gen_pseudo_radial_mask(16, 12, 3, 5, trial as u64)?,
            gen_vds_mask(16, 12, 3, 4.0, trial as u64)?,
        ] {
            let x = ComplexTensor3::random_with(spec.dims(), rng);
            let y = KSpaceVector::new(ComplexTensor3::random_with((spec.count(), 1, 1), rng).into_data());
            let lhs = mri::forward(&x, &spec)?.inner_product(&y)?.re;
            let rhs = x.inner_product(&mri::adjoint(&y, &spec)?)?.re;
            worst = worst.max((lhs - rhs).abs() / (x.frobenius_norm() * y.norm()));
        }
    }
    Ok((worst <= 1e-12, format!("max relative mismatch {worst:.2e}")))
}

fn x_update_residual(rng: &mut ChaCha8Rng, trials: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let spec = gen_random_mask(Dims::new(8, 8, 3), 0.4, trial as u64)?;
        let b = mri::forward(&ComplexTensor3::random_with(spec.dims(), rng), &spec)?;
        let z = ComplexTensor3::random_with(spec.dims(), rng);
        let l = ComplexTensor3::random_with(spec.dims(), rng);
        for mu in [0.05, 1.0, 20.0] {
            let x = admm::x_update_cartesian(&z, &l, &b, &spec, mu)?;
            let r = admm::normal_equation_residual(&x, &z, &l, &b, &spec, mu)?;
            worst = worst.max(r.frobenius_norm() / (b.norm() + mu * (&z - &l).frobenius_norm()));
        }
    }
    Ok((worst <= 1e-10, format!("max scaled residual {worst:.2e}")))
}

fn generalized_equivalence(rng: &mut ChaCha8Rng, _: usize) -> Result<(bool, String)> {
    let spec = gen_random_mask(Dims::new(8, 8, 4), 0.5, 3)?;
    let b = mri::forward(&ComplexTensor3::random_with(spec.dims(), rng), &spec)?;
    let mut cfg = AdmmConfig::new(UnitaryTransform::dct(4)?);
    cfg.lambda = 0.2;
    cfg.mu = 0.5;
    cfg.max_iters = 8;
    cfg.rel_tol = 0.0;
    let classic = admm::solve(&b, &spec, &cfg)?;
    let sched = admm::constant_schedule(&cfg, 4, 8);
    let general = admm::solve_generalized(&b, &spec, &sched, &cfg.transform)?;
    let err = general.reconstruction.relative_error(&classic.reconstruction)?;
    Ok((err <= 1e-10, format!("relative difference {err:.2e}")))
}

fn small_recovery(_: &mut ChaCha8Rng, _: usize) -> Result<(bool, String)> {
    let kind = PhantomKind::LowTubalRank {
        rank: 1,
        transform: TransformKind::Fft,
    };
    let truth = mri::make_phantom(12, 12, 4, &kind, 5)?;
    let spec = gen_random_mask(truth.dims(), 0.6, 6)?;
    let b = mri::forward(&truth, &spec)?;
    let zero_filled = mri::snr(&mri::adjoint(&b, &spec)?, &truth)?;
    let mut cfg = AdmmConfig::new(UnitaryTransform::fft(4)?);
    cfg.lambda = 3e-3;
    cfg.mu = 0.05;
    cfg.max_iters = 300;
    cfg.record_history = false;
    let rec = mri::snr(&admm::solve(&b, &spec, &cfg)?.reconstruction, &truth)?;
    Ok((rec >= zero_filled + 10.0, format!("SNR {rec:.1} dB vs zero-filled {zero_filled:.1} dB")))
}
