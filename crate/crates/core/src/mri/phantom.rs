//! Synthetic dynamic phantoms and measurement noise.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mri::KSpaceVector;
use crate::tensor::{ComplexTensor3, Dims, C64};
use crate::transforms::{make_transform, TransformKind, UnitaryTransform};
use crate::tsvd::t_product;

#[derive(Clone, Debug, PartialEq)]
pub enum PhantomKind {
    /// Static ellipses plus one ellipse oscillating across frames.
    MovingEllipse,
    /// Two crossing bars rotating about the center.
    RotatingBars,
    /// Product of random factor tensors with inner dimension `rank`.
    LowTubalRank { rank: usize, transform: TransformKind },
}

impl PhantomKind {
    pub fn name(&self) -> &'static str {
        match self {
            PhantomKind::MovingEllipse => "moving_ellipse",
            PhantomKind::RotatingBars => "rotating_bars",
            PhantomKind::LowTubalRank { .. } => "low_tubal_rank",
        }
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    /// Accepts `moving_ellipse`, `rotating_bars` and `low_tubal_rank`, the
    /// last one optionally as `low_tubal_rank:<rank>[:<transform>]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        match parts.next().unwrap_or_default() {
            "moving_ellipse" => Ok(PhantomKind::MovingEllipse),
            "rotating_bars" => Ok(PhantomKind::RotatingBars),
            "low_tubal_rank" => {
                let rank = match parts.next() {
                    Some(r) => r
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad tubal rank '{r}'")))?,
                    None => 2,
                };
                let transform = match parts.next() {
                    Some(t) => t.parse()?,
                    None => TransformKind::Fft,
                };
                Ok(PhantomKind::LowTubalRank { rank, transform })
            }
            other => Err(Error::Parameter(format!("unknown phantom kind '{other}'"))),
        }
    }
}

/// The transform used to generate a low-tubal-rank phantom. `Matrix`
/// resolves to a random unitary drawn from `seed`.
pub fn generating_transform(kind: TransformKind, nt: usize, seed: u64) -> Result<UnitaryTransform> {
    match kind {
        TransformKind::Matrix => UnitaryTransform::random_unitary(nt, seed ^ 0x5eed),
        k => make_transform(k, nt, None),
    }
}

/// Phantoms are scaled to a peak magnitude of 1.
pub fn make_phantom(nx: usize, ny: usize, nt: usize, kind: &PhantomKind, seed: u64) -> Result<ComplexTensor3> {
    let dims = Dims::new(nx, ny, nt);
    if dims.is_empty() {
        return Err(Error::Dimension("phantom dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = match kind {
        PhantomKind::MovingEllipse => moving_ellipse(dims, &mut rng),
        PhantomKind::RotatingBars => rotating_bars(dims, &mut rng),
        PhantomKind::LowTubalRank { rank, transform } => {
            if *rank == 0 || *rank > nx.min(ny) {
                return Err(Error::Parameter(format!(
                    "tubal rank {rank} must be in 1..={}",
                    nx.min(ny)
                )));
            }
            let t = generating_transform(*transform, nt, seed)?;
            let a = ComplexTensor3::random_with((nx, *rank, nt), &mut rng);
            let b = ComplexTensor3::random_with((*rank, ny, nt), &mut rng);
            t_product(&a, &b, &t)?
        }
    };
    let peak = x.max_abs();
    Ok(if peak > 0.0 { x.scale(1.0 / peak) } else { x })
}

struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
    value: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

/// Pixel centers in normalized coordinates `[-1, 1]`.
fn coord(i: usize, n: usize) -> f64 {
    2.0 * (i as f64 + 0.5) / n as f64 - 1.0
}

fn render(dims: Dims, frame_shapes: impl Fn(usize) -> Vec<Ellipse>) -> ComplexTensor3 {
    let mut data = vec![C64::new(0.0, 0.0); dims.len()];
    for k in 0..dims.n3 {
        let shapes = frame_shapes(k);
        for i in 0..dims.n1 {
            for j in 0..dims.n2 {
                let (x, y) = (coord(i, dims.n1), coord(j, dims.n2));
                let v: f64 = shapes.iter().filter(|e| e.contains(x, y)).map(|e| e.value).sum();
                data[dims.offset(i, j, k)] = C64::new(v, 0.0);
            }
        }
    }
    ComplexTensor3::new(dims, data).expect("sized above")
}

fn moving_ellipse(dims: Dims, rng: &mut ChaCha8Rng) -> ComplexTensor3 {
    let phase = rng.random::<f64>() * 2.0 * PI;
    let amplitude = 0.15 + 0.1 * rng.random::<f64>();
    let nt = dims.n3 as f64;
    render(dims, |k| {
        let shift = amplitude * (2.0 * PI * k as f64 / nt + phase).sin();
        vec![
            Ellipse { cx: 0.0, cy: 0.0, a: 0.9, b: 0.75, angle: 0.0, value: 0.6 },
            Ellipse { cx: 0.0, cy: 0.0, a: 0.8, b: 0.65, angle: 0.0, value: -0.3 },
            Ellipse { cx: -0.35, cy: 0.3, a: 0.15, b: 0.25, angle: 0.4, value: 0.3 },
            Ellipse { cx: 0.4, cy: -0.35, a: 0.1, b: 0.08, angle: 0.0, value: 0.5 },
            Ellipse { cx: 0.1 + shift, cy: 0.0, a: 0.22, b: 0.3, angle: 0.2, value: 0.6 },
        ]
    })
}

fn rotating_bars(dims: Dims, rng: &mut ChaCha8Rng) -> ComplexTensor3 {
    let start = rng.random::<f64>() * PI;
    let step = PI / (2.0 * dims.n3 as f64);
    render(dims, |k| {
        let theta = start + k as f64 * step;
        vec![
            Ellipse { cx: 0.0, cy: 0.0, a: 0.85, b: 0.85, angle: 0.0, value: 0.3 },
            Ellipse { cx: 0.0, cy: 0.0, a: 0.7, b: 0.08, angle: theta, value: 0.7 },
            Ellipse { cx: 0.0, cy: 0.0, a: 0.45, b: 0.06, angle: theta + PI / 2.0, value: 0.5 },
        ]
    })
}

/// Adds i.i.d. complex Gaussian noise with standard deviation `sigma` on the
/// real and imaginary parts.
pub fn add_noise(b: &KSpaceVector, sigma: f64, seed: u64) -> Result<KSpaceVector> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!("noise level must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(b.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(KSpaceVector::new(
        b.values()
            .iter()
            .map(|&z| z + C64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect(),
    ))
}
