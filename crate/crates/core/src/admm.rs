//! ADMM reconstruction with a transformed tensor nuclear norm prior.
//!
//! The classic solver minimizes `1/2 ||A x - b||^2 + lambda ||x||_TTNN` by
//! splitting `z = x` and iterating
//!
//! ```text
//! z_n = D_{lambda/mu, T}(x_{n-1} + l_{n-1})
//! x_n = (A^H A + mu)^{-1} (A^H b + mu (z_n - l_{n-1}))
//! l_n = l_{n-1} - eta (z_n - x_n)
//! ```
//!
//! where `D` is singular value thresholding in the transformed domain. The
//! generalized solver lets every iteration carry its own transform,
//! per-slice thresholds, data weight `gamma = 1/mu` and step `eta`.

use crate::clock::Stopwatch;

use crate::error::{Error, Result};
use crate::mri::{adjoint, forward, spatial_fft, spatial_ifft, KSpaceVector, SamplingSpec};
use crate::tensor::ComplexTensor3;
use crate::transforms::UnitaryTransform;
use crate::tsvd::{t_tsvt, t_tsvt_with_thresholds, transformed_singular_values, Threshold};

#[derive(Clone, Debug)]
pub struct AdmmConfig {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once `||x_n - x_{n-1}|| / ||x_{n-1}||` drops below this.
    pub rel_tol: f64,
    pub transform: UnitaryTransform,
    pub record_history: bool,
}

impl AdmmConfig {
    pub fn new(transform: UnitaryTransform) -> Self {
        Self {
            lambda: 1e-2,
            mu: 1.0,
            eta: 1.0,
            max_iters: 300,
            rel_tol: 1e-6,
            transform,
            record_history: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Parameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Parameter(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::Parameter(format!("eta must be > 0, got {}", self.eta)));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be >= 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::Parameter(format!("rel_tol must be >= 0, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Threshold rule for one generalized iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdMode {
    /// `tau[i]` for slice `i`.
    Absolute(Vec<f64>),
    /// `tau[i] = sigmoid(a[i]) * max singular value of transformed slice i`.
    Relative(Vec<f64>),
}

impl ThresholdMode {
    fn to_threshold(&self) -> Threshold {
        match self {
            ThresholdMode::Absolute(t) => Threshold::PerSlice(t.clone()),
            ThresholdMode::Relative(a) => Threshold::Relative(a.clone()),
        }
    }

    fn len(&self) -> usize {
        match self {
            ThresholdMode::Absolute(v) | ThresholdMode::Relative(v) => v.len(),
        }
    }
}

/// Hyperparameters of one generalized iteration.
#[derive(Clone, Debug)]
pub struct IterationParams {
    pub gamma: f64,
    pub eta: f64,
    pub threshold: ThresholdMode,
    pub transform: UnitaryTransform,
}

impl IterationParams {
    fn validate(&self, nt: usize) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Parameter(format!("eta must be >= 0, got {}", self.eta)));
        }
        if self.threshold.len() != nt {
            return Err(Error::Parameter(format!(
                "threshold vector has {} entries for {nt} frames",
                self.threshold.len()
            )));
        }
        if self.transform.size() != nt {
            return Err(Error::Dimension(format!(
                "iteration transform of size {} for {nt} frames",
                self.transform.size()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `1/2 ||A x - b||^2 + lambda ttnn(x)`
    pub objective: f64,
    /// `||A x - b||`
    pub fidelity: f64,
    pub ttnn: f64,
    /// `||z - x||`
    pub primal_residual: f64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ReconReport {
    pub reconstruction: ComplexTensor3,
    pub iterations_run: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

/// Z step: singular value thresholding of `x_prev + l_prev` at `lambda / mu`.
pub fn z_update(
    x_prev: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    lambda: f64,
    mu: f64,
    t: &UnitaryTransform,
) -> Result<ComplexTensor3> {
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu must be > 0, got {mu}")));
    }
    t_tsvt(&x_prev.try_add(l_prev)?, lambda / mu, t)
}

/// X step for Cartesian sampling, solved exactly in k-space:
/// `x = F^H((S^H b + mu F(z - l)) / (mask + mu))`.
pub fn x_update_cartesian(
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    b: &KSpaceVector,
    spec: &SamplingSpec,
    mu: f64,
) -> Result<ComplexTensor3> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Parameter(format!("mu must be >= 0, got {mu}")));
    }
    if mu == 0.0 && spec.count() < spec.dims().len() {
        return Err(Error::Numeric(
            "mu = 0 leaves unsampled k-space locations undetermined (0/0)".into(),
        ));
    }
    let target = z.try_sub(l_prev)?;
    spec.check_dims(target.dims())?;
    if spec.count() == 0 {
        return Ok(target);
    }
    let sampled = spec.scatter(b)?;
    let kz = spatial_fft(&target);
    let weights = spec.weights();
    let data = sampled
        .data()
        .iter()
        .zip(kz.data())
        .zip(&weights)
        .map(|((&s, &k), &w)| (s + k * mu) / (w + mu))
        .collect();
    Ok(spatial_ifft(&ComplexTensor3::new(target.dims(), data)?))
}

/// X step with data weight `gamma`:
/// `x = F^H((gamma S^H b + F(z - l)) / (gamma mask + 1))`. Returns `z - l`
/// exactly when `gamma = 0`.
pub fn x_update_gamma(
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    b: &KSpaceVector,
    spec: &SamplingSpec,
    gamma: f64,
) -> Result<ComplexTensor3> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let target = z.try_sub(l_prev)?;
    spec.check_dims(target.dims())?;
    if gamma == 0.0 || spec.count() == 0 {
        return Ok(target);
    }
    let sampled = spec.scatter(b)?;
    let kz = spatial_fft(&target);
    let weights = spec.weights();
    let data = sampled
        .data()
        .iter()
        .zip(kz.data())
        .zip(&weights)
        .map(|((&s, &k), &w)| (s * gamma + k) / (w * gamma + 1.0))
        .collect();
    Ok(spatial_ifft(&ComplexTensor3::new(target.dims(), data)?))
}

/// Solves `(gamma A^H A + I) x = rhs` for a particular acquisition operator.
///
/// Only the Cartesian closed form ships with the crate; other trajectories
/// can plug in their own solver and drive [`x_update_with`].
pub trait NormalEquationSolver {
    fn solve(&self, rhs: &ComplexTensor3, gamma: f64) -> Result<ComplexTensor3>;
}

pub struct CartesianSolver<'a> {
    pub spec: &'a SamplingSpec,
}

impl NormalEquationSolver for CartesianSolver<'_> {
    fn solve(&self, rhs: &ComplexTensor3, gamma: f64) -> Result<ComplexTensor3> {
        self.spec.check_dims(rhs.dims())?;
        let k = spatial_fft(rhs);
        let weights = self.spec.weights();
        let data = k
            .data()
            .iter()
            .zip(&weights)
            .map(|(&v, &w)| v / (w * gamma + 1.0))
            .collect();
        Ok(spatial_ifft(&ComplexTensor3::new(rhs.dims(), data)?))
    }
}

/// Generic X step: `x = (gamma A^H A + I)^{-1} (gamma A^H b + z - l)`.
pub fn x_update_with(
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    adjoint_b: &ComplexTensor3,
    gamma: f64,
    solver: &dyn NormalEquationSolver,
) -> Result<ComplexTensor3> {
    let rhs = adjoint_b.scale(gamma).try_add(&z.try_sub(l_prev)?)?;
    solver.solve(&rhs, gamma)
}

/// Multiplier step `l = l_prev - eta (z - x)`.
pub fn l_update(l_prev: &ComplexTensor3, z: &ComplexTensor3, x: &ComplexTensor3, eta: f64) -> Result<ComplexTensor3> {
    l_prev.check_same_dims(z)?;
    z.check_same_dims(x)?;
    let data = l_prev
        .data()
        .iter()
        .zip(z.data())
        .zip(x.data())
        .map(|((&l, &zv), &xv)| l - (zv - xv) * eta)
        .collect();
    ComplexTensor3::new(l_prev.dims(), data)
}

fn relative_change(x: &ComplexTensor3, prev: &ComplexTensor3) -> f64 {
    let diff = (x - prev).frobenius_norm();
    let scale = prev.frobenius_norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn record(
    iter: usize,
    x: &ComplexTensor3,
    z: &ComplexTensor3,
    b: &KSpaceVector,
    spec: &SamplingSpec,
    t: &UnitaryTransform,
    weights: &[f64],
    start: Stopwatch,
) -> Result<IterationRecord> {
    let fidelity = forward(x, spec)?.sub(b)?.norm();
    let sv = transformed_singular_values(x, t)?;
    let ttnn: f64 = sv.iter().flatten().sum();
    let penalty: f64 = sv
        .iter()
        .zip(weights)
        .map(|(s, w)| w * s.iter().sum::<f64>())
        .sum();
    Ok(IterationRecord {
        iter,
        objective: 0.5 * fidelity * fidelity + penalty,
        fidelity,
        ttnn,
        primal_residual: (z - x).frobenius_norm(),
        elapsed_ms: start.elapsed_ms(),
    })
}

fn check_data(b: &KSpaceVector, spec: &SamplingSpec) -> Result<()> {
    if b.len() != spec.count() {
        return Err(Error::Dimension(format!(
            "{} k-space samples for a mask with {} sampled locations",
            b.len(),
            spec.count()
        )));
    }
    Ok(())
}

/// Classic ADMM, starting from the zero-filled image `x_0 = A^H b`, `z_0 = x_0`,
/// `l_0 = 0`.
pub fn solve(b: &KSpaceVector, spec: &SamplingSpec, config: &AdmmConfig) -> Result<ReconReport> {
    config.validate()?;
    check_data(b, spec)?;
    if config.transform.size() != spec.dims().n3 {
        return Err(Error::Dimension(format!(
            "transform of size {} for {} frames",
            config.transform.size(),
            spec.dims().n3
        )));
    }
    let start = Stopwatch::start();
    let t = &config.transform;
    let weights = vec![config.lambda; spec.dims().n3];
    let mut x = adjoint(b, spec)?;
    let mut l = ComplexTensor3::zeros(x.dims());
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    for n in 1..=config.max_iters {
        let z = z_update(&x, &l, config.lambda, config.mu, t)?;
        let x_next = x_update_cartesian(&z, &l, b, spec, config.mu)?;
        l = l_update(&l, &z, &x_next, config.eta)?;
        if !x_next.is_finite() || !l.is_finite() {
            return Err(Error::Divergence { iteration: n });
        }
        let change = relative_change(&x_next, &x);
        x = x_next;
        iterations_run = n;
        if config.record_history {
            history.push(record(n, &x, &z, b, spec, t, &weights, start)?);
        }
        if change < config.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(ReconReport {
        reconstruction: x,
        iterations_run,
        converged,
        history,
    })
}

/// Runs one iteration per schedule entry. The reported objective weighs the
/// nuclear norm of slice `i` by `tau_i / gamma`, the effective `lambda` of
/// that iteration; `init_transform` is used for the reported TTNN.
pub fn solve_generalized(
    b: &KSpaceVector,
    spec: &SamplingSpec,
    schedule: &[IterationParams],
    init_transform: &UnitaryTransform,
) -> Result<ReconReport> {
    let nt = spec.dims().n3;
    if schedule.is_empty() {
        return Err(Error::Parameter("generalized schedule is empty".into()));
    }
    for p in schedule {
        p.validate(nt)?;
    }
    if init_transform.size() != nt {
        return Err(Error::Dimension(format!(
            "transform of size {} for {nt} frames",
            init_transform.size()
        )));
    }
    check_data(b, spec)?;
    let start = Stopwatch::start();
    let mut x = adjoint(b, spec)?;
    let mut l = ComplexTensor3::zeros(x.dims());
    let mut history = Vec::with_capacity(schedule.len());
    for (idx, p) in schedule.iter().enumerate() {
        let n = idx + 1;
        let (z, taus) = t_tsvt_with_thresholds(&x.try_add(&l)?, &p.threshold.to_threshold(), &p.transform)?;
        x = x_update_gamma(&z, &l, b, spec, p.gamma)?;
        l = l_update(&l, &z, &x, p.eta)?;
        if !x.is_finite() || !l.is_finite() {
            return Err(Error::Divergence { iteration: n });
        }
        let weights: Vec<f64> = taus
            .iter()
            .map(|tau| if p.gamma > 0.0 { tau / p.gamma } else { 0.0 })
            .collect();
        let mut rec = record(n, &x, &z, b, spec, &p.transform, &weights, start)?;
        if init_transform != &p.transform {
            rec.ttnn = transformed_singular_values(&x, init_transform)?.iter().flatten().sum();
        }
        history.push(rec);
    }
    Ok(ReconReport {
        reconstruction: x,
        iterations_run: schedule.len(),
        converged: false,
        history,
    })
}

/// `(A^H A + mu) x - (A^H b + mu (z - l))`, the residual of the X-step normal
/// equations. Zero for an exact X step.
pub fn normal_equation_residual(
    x: &ComplexTensor3,
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    b: &KSpaceVector,
    spec: &SamplingSpec,
    mu: f64,
) -> Result<ComplexTensor3> {
    let lhs = adjoint(&forward(x, spec)?, spec)?.try_add(&x.scale(mu))?;
    let rhs = adjoint(b, spec)?.try_add(&z.try_sub(l_prev)?.scale(mu))?;
    lhs.try_sub(&rhs)
}

/// Same residual for the `gamma` form: `(gamma A^H A + 1) x - (gamma A^H b + z - l)`.
pub fn normal_equation_residual_gamma(
    x: &ComplexTensor3,
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    b: &KSpaceVector,
    spec: &SamplingSpec,
    gamma: f64,
) -> Result<ComplexTensor3> {
    let lhs = adjoint(&forward(x, spec)?, spec)?.scale(gamma).try_add(x)?;
    let rhs = adjoint(b, spec)?.scale(gamma).try_add(&z.try_sub(l_prev)?)?;
    lhs.try_sub(&rhs)
}

/// A constant schedule equivalent to `n` classic iterations.
pub fn constant_schedule(config: &AdmmConfig, nt: usize, n: usize) -> Vec<IterationParams> {
    let entry = IterationParams {
        gamma: 1.0 / config.mu,
        eta: config.eta,
        threshold: ThresholdMode::Absolute(vec![config.lambda / config.mu; nt]),
        transform: config.transform.clone(),
    };
    vec![entry; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mri::gen_random_mask;
    use crate::tensor::{Dims, C64};
    use crate::tsvd::{transformed_spectral_norm, ttnn};

    fn setup(seed: u64) -> (ComplexTensor3, SamplingSpec, KSpaceVector) {
        let dims = Dims::new(8, 6, 4);
        let spec = gen_random_mask(dims, 0.5, seed).unwrap();
        let truth = ComplexTensor3::random(dims, seed + 100);
        let b = forward(&truth, &spec).unwrap();
        (truth, spec, b)
    }

    #[test]
    fn z_update_limits() {
        let t = UnitaryTransform::fft(4).unwrap();
        let x = ComplexTensor3::random((5, 4, 4), 1);
        let l = ComplexTensor3::random((5, 4, 4), 2);
        let sum = &x + &l;
        assert!(z_update(&x, &l, 0.0, 1.0, &t).unwrap().relative_error(&sum).unwrap() <= 1e-12);
        let big = transformed_spectral_norm(&sum, &t).unwrap();
        assert_eq!(z_update(&x, &l, big * 2.0, 2.0, &t).unwrap().frobenius_norm(), 0.0);
        assert!(z_update(&x, &l, 1.0, 0.0, &t).is_err());
    }

    #[test]
    fn z_update_beats_trivial_candidates() {
        let t = UnitaryTransform::dct(4).unwrap();
        let x = ComplexTensor3::random((5, 4, 4), 3);
        let l = ComplexTensor3::random((5, 4, 4), 4);
        let (lambda, mu) = (0.8, 1.3);
        let y = &x + &l;
        let objective = |z: &ComplexTensor3| {
            lambda * ttnn(z, &t).unwrap() + 0.5 * mu * (z - &y).frobenius_norm().powi(2)
        };
        let z = z_update(&x, &l, lambda, mu, &t).unwrap();
        assert!(objective(&z) <= objective(&y));
        assert!(objective(&z) <= objective(&ComplexTensor3::zeros(y.dims())));
    }

    #[test]
    fn x_update_fixed_point_with_consistent_data() {
        let dims = Dims::new(6, 6, 3);
        let truth = ComplexTensor3::random(dims, 5);
        let spec = SamplingSpec::full(dims);
        let b = forward(&truth, &spec).unwrap();
        let zero = ComplexTensor3::zeros(dims);
        let x = x_update_cartesian(&truth, &zero, &b, &spec, 1.0).unwrap();
        assert!(x.relative_error(&truth).unwrap() <= 1e-12);
    }

    #[test]
    fn x_update_with_empty_mask_returns_target() {
        let dims = Dims::new(4, 4, 2);
        let spec = SamplingSpec::empty(dims);
        let z = ComplexTensor3::random(dims, 6);
        let l = ComplexTensor3::random(dims, 7);
        let b = KSpaceVector::new(vec![]);
        assert_eq!(x_update_cartesian(&z, &l, &b, &spec, 0.7).unwrap(), &z - &l);
        assert_eq!(x_update_gamma(&z, &l, &b, &spec, 3.0).unwrap(), &z - &l);
    }

    #[test]
    fn zero_mu_is_rejected_when_locations_are_missing() {
        let (_, spec, b) = setup(1);
        let z = ComplexTensor3::zeros(spec.dims());
        assert!(matches!(
            x_update_cartesian(&z, &z, &b, &spec, 0.0),
            Err(Error::Numeric(_))
        ));
        let full = SamplingSpec::full(spec.dims());
        let truth = ComplexTensor3::random(spec.dims(), 2);
        let bf = forward(&truth, &full).unwrap();
        let x = x_update_cartesian(&z, &z, &bf, &full, 0.0).unwrap();
        assert!(x.relative_error(&truth).unwrap() <= 1e-12);
    }

    #[test]
    fn x_update_solves_normal_equations() {
        let (_, spec, b) = setup(2);
        let z = ComplexTensor3::random(spec.dims(), 8);
        let l = ComplexTensor3::random(spec.dims(), 9);
        for mu in [1e-3, 0.5, 1.0, 40.0] {
            let x = x_update_cartesian(&z, &l, &b, &spec, mu).unwrap();
            let r = normal_equation_residual(&x, &z, &l, &b, &spec, mu).unwrap();
            let scale = b.norm() + mu * (&z - &l).frobenius_norm();
            assert!(r.frobenius_norm() <= 1e-10 * scale, "mu = {mu}");
        }
    }

    #[test]
    fn gamma_form_matches_mu_form() {
        let (_, spec, b) = setup(3);
        let z = ComplexTensor3::random(spec.dims(), 10);
        let l = ComplexTensor3::random(spec.dims(), 11);
        let mu = 0.37;
        let a = x_update_cartesian(&z, &l, &b, &spec, mu).unwrap();
        let g = x_update_gamma(&z, &l, &b, &spec, 1.0 / mu).unwrap();
        assert!(g.relative_error(&a).unwrap() <= 1e-12);
        let generic = x_update_with(&z, &l, &adjoint(&b, &spec).unwrap(), 1.0 / mu, &CartesianSolver { spec: &spec }).unwrap();
        assert!(generic.relative_error(&a).unwrap() <= 1e-12);
        assert_eq!(x_update_gamma(&z, &l, &b, &spec, 0.0).unwrap(), &z - &l);
    }

    #[test]
    fn large_gamma_approaches_data() {
        let dims = Dims::new(6, 4, 2);
        let spec = SamplingSpec::full(dims);
        let b = forward(&ComplexTensor3::random(dims, 12), &spec).unwrap();
        let z = ComplexTensor3::random(dims, 13);
        let l = ComplexTensor3::random(dims, 14);
        let x = x_update_gamma(&z, &l, &b, &spec, 1e8).unwrap();
        let limit = adjoint(&b, &spec).unwrap();
        assert!(x.relative_error(&limit).unwrap() <= 1e-6);
    }

    #[test]
    fn l_update_cases() {
        let l = ComplexTensor3::random((3, 3, 2), 15);
        let z = ComplexTensor3::random((3, 3, 2), 16);
        let x = ComplexTensor3::random((3, 3, 2), 17);
        assert_eq!(l_update(&l, &z, &z, 0.5).unwrap(), l);
        assert_eq!(l_update(&l, &z, &x, 0.0).unwrap(), l);
        let out = l_update(&l, &z, &x, 0.3).unwrap();
        for o in 0..18 {
            let expect = l.data()[o] - (z.data()[o] - x.data()[o]) * 0.3;
            assert_eq!(out.data()[o], expect);
        }
    }

    #[test]
    fn zero_data_gives_zero_image() {
        let dims = Dims::new(6, 6, 3);
        let spec = gen_random_mask(dims, 0.5, 4).unwrap();
        let b = KSpaceVector::new(vec![C64::new(0.0, 0.0); spec.count()]);
        let report = solve(&b, &spec, &AdmmConfig::new(UnitaryTransform::fft(3).unwrap())).unwrap();
        assert_eq!(report.iterations_run, 1);
        assert_eq!(report.reconstruction.frobenius_norm(), 0.0);
        assert_eq!(report.history[0].objective, 0.0);
    }

    #[test]
    fn config_validation() {
        let (_, spec, b) = setup(5);
        let mut cfg = AdmmConfig::new(UnitaryTransform::fft(4).unwrap());
        cfg.mu = 0.0;
        assert!(solve(&b, &spec, &cfg).is_err());
        let mut cfg = AdmmConfig::new(UnitaryTransform::fft(3).unwrap());
        cfg.max_iters = 5;
        assert!(solve(&b, &spec, &cfg).is_err());
        assert!(solve_generalized(&b, &spec, &[], &UnitaryTransform::fft(4).unwrap()).is_err());
    }

    #[test]
    fn generalized_matches_classic() {
        let (_, spec, b) = setup(6);
        let mut cfg = AdmmConfig::new(UnitaryTransform::fft(4).unwrap());
        cfg.lambda = 0.3;
        cfg.mu = 0.8;
        cfg.eta = 0.9;
        cfg.max_iters = 12;
        cfg.rel_tol = 0.0;
        let classic = solve(&b, &spec, &cfg).unwrap();
        let sched = constant_schedule(&cfg, 4, 12);
        let general = solve_generalized(&b, &spec, &sched, &cfg.transform).unwrap();
        assert_eq!(classic.iterations_run, 12);
        let err = general.reconstruction.relative_error(&classic.reconstruction).unwrap();
        assert!(err <= 1e-10, "{err}");
        for (c, g) in classic.history.iter().zip(&general.history) {
            assert!((c.objective - g.objective).abs() <= 1e-10 * c.objective.abs().max(1.0));
        }
    }
}
