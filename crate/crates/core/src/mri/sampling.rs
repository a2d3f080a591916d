//! Cartesian sampling masks and the sampling operator.
//!
//! Masks share the tensor storage order (frame-major, row-major within a
//! frame). Sampled values are always listed in that order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{ComplexTensor3, Dims, C64};

/// Angular increment between frames for rotating radial patterns.
pub const GOLDEN_ANGLE: f64 = PI * 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    dims: Dims,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() || dims.is_empty() {
            return Err(Error::Dimension(format!(
                "{} mask entries for a {dims} grid",
                bits.len()
            )));
        }
        Ok(Self { dims, bits })
    }

    pub fn filled(dims: Dims, value: bool) -> Self {
        Self {
            dims,
            bits: vec![value; dims.len()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.bits[self.dims.offset(i, j, k)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of sampled locations in frame `k` (zero based).
    pub fn frame_count(&self, k: usize) -> usize {
        let len = self.dims.slice_len();
        self.bits[k * len..(k + 1) * len].iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.dims.len() as f64
    }
}

/// A mask together with how it was generated.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSpec {
    mask: Mask,
    count: usize,
    /// e.g. `radial(lines=16)`
    pub generator: String,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(mask: Mask, generator: impl Into<String>, seed: u64) -> Self {
        let count = mask.count();
        Self {
            mask,
            count,
            generator: generator.into(),
            seed,
        }
    }

    pub fn full(dims: Dims) -> Self {
        Self::new(Mask::filled(dims, true), "full", 0)
    }

    pub fn empty(dims: Dims) -> Self {
        Self::new(Mask::filled(dims, false), "empty", 0)
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn dims(&self) -> Dims {
        self.mask.dims
    }

    /// Number of sampled locations `m`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub(crate) fn check_dims(&self, dims: Dims) -> Result<()> {
        if dims != self.mask.dims {
            return Err(Error::Dimension(format!(
                "tensor is {dims} but the sampling mask is {}",
                self.mask.dims
            )));
        }
        Ok(())
    }

    /// `S`: picks the sampled entries of a k-space tensor.
    pub fn gather(&self, kspace: &ComplexTensor3) -> Result<KSpaceVector> {
        self.check_dims(kspace.dims())?;
        let values = kspace
            .data()
            .iter()
            .zip(&self.mask.bits)
            .filter_map(|(&z, &b)| b.then_some(z))
            .collect();
        Ok(KSpaceVector { values })
    }

    /// `S^H`: places samples on the grid, zeros elsewhere.
    pub fn scatter(&self, b: &KSpaceVector) -> Result<ComplexTensor3> {
        if b.len() != self.count {
            return Err(Error::Dimension(format!(
                "{} k-space samples for a mask with {} sampled locations",
                b.len(),
                self.count
            )));
        }
        let mut values = b.values.iter();
        let data = self
            .mask
            .bits
            .iter()
            .map(|&s| if s { *values.next().expect("count checked") } else { C64::new(0.0, 0.0) })
            .collect();
        ComplexTensor3::new(self.mask.dims, data)
    }

    /// `S^H S 1`: the mask as 0/1 weights in storage order.
    pub fn weights(&self) -> Vec<f64> {
        self.mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

/// Sampled k-space values in mask storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct KSpaceVector {
    values: Vec<C64>,
}

impl KSpaceVector {
    pub fn new(values: Vec<C64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "k-space vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "k-space vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }
}

/// Uniform Bernoulli sampling with probability `fraction` per location.
pub fn gen_random_mask(dims: Dims, fraction: f64, seed: u64) -> Result<SamplingSpec> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Parameter(format!("sampling fraction {fraction} outside [0, 1]")));
    }
    if dims.is_empty() {
        return Err(Error::Dimension("mask dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..dims.len()).map(|_| rng.random::<f64>() < fraction).collect();
    Ok(SamplingSpec::new(
        Mask::new(dims, bits)?,
        format!("random(fraction={fraction})"),
        seed,
    ))
}

/// Spoke layout for pseudo-radial masks. Frame `k` uses spokes at
/// `base_angle + k * angle_increment + l * pi / lines`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialParams {
    pub lines: usize,
    pub base_angle: f64,
    pub angle_increment: f64,
}

impl RadialParams {
    /// Random base angle from `seed`, golden-angle rotation between frames.
    pub fn seeded(lines: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = PI / lines.max(1) as f64;
        Self {
            lines,
            base_angle: rng.random::<f64>() * span,
            angle_increment: GOLDEN_ANGLE,
        }
    }

    /// Same spokes in every frame.
    pub fn frozen(self) -> Self {
        Self {
            angle_increment: 0.0,
            ..self
        }
    }
}

pub fn gen_pseudo_radial_mask(nx: usize, ny: usize, nt: usize, lines: usize, seed: u64) -> Result<SamplingSpec> {
    let spec = gen_pseudo_radial_mask_with(nx, ny, nt, &RadialParams::seeded(lines, seed))?;
    Ok(SamplingSpec {
        seed,
        ..spec
    })
}

/// Rasterizes `lines` straight spokes through the centered DC bin of every
/// frame. Each spoke is drawn as two segments from the center to the grid
/// boundary, so the DC bin is always sampled.
pub fn gen_pseudo_radial_mask_with(nx: usize, ny: usize, nt: usize, params: &RadialParams) -> Result<SamplingSpec> {
    let dims = Dims::new(nx, ny, nt);
    if dims.is_empty() {
        return Err(Error::Dimension("mask dimensions must be positive".into()));
    }
    let lines = params.lines;
    if lines == 0 || lines > nx * ny {
        return Err(Error::Parameter(format!(
            "radial line count {lines} must be in 1..={}",
            nx * ny
        )));
    }
    let mut bits = vec![false; dims.len()];
    let center = ((nx / 2) as i64, (ny / 2) as i64);
    for k in 0..nt {
        let frame = &mut bits[k * nx * ny..(k + 1) * nx * ny];
        for l in 0..lines {
            let theta = params.base_angle + k as f64 * params.angle_increment + l as f64 * PI / lines as f64;
            let (di, dj) = (theta.cos(), theta.sin());
            for sign in [1.0, -1.0] {
                let end = boundary_point(center, (sign * di, sign * dj), nx, ny);
                rasterize_segment(center, end, |i, j| frame[i as usize * ny + j as usize] = true);
            }
        }
    }
    Ok(SamplingSpec::new(
        Mask::new(dims, bits)?,
        format!(
            "radial(lines={lines},base={:.6},increment={:.6})",
            params.base_angle, params.angle_increment
        ),
        0,
    ))
}

/// Where the ray from `center` along `dir` leaves the grid, rounded to the
/// nearest grid point.
fn boundary_point(center: (i64, i64), dir: (f64, f64), nx: usize, ny: usize) -> (i64, i64) {
    let reach = |c: i64, d: f64, n: usize| -> f64 {
        if d > 1e-12 {
            (n as i64 - 1 - c) as f64 / d
        } else if d < -1e-12 {
            c as f64 / -d
        } else {
            f64::INFINITY
        }
    };
    let t = reach(center.0, dir.0, nx).min(reach(center.1, dir.1, ny));
    let i = (center.0 as f64 + t * dir.0).round().clamp(0.0, nx as f64 - 1.0);
    let j = (center.1 as f64 + t * dir.1).round().clamp(0.0, ny as f64 - 1.0);
    (i as i64, j as i64)
}

/// Integer midpoint line from `start` to `end`, both included. Along the
/// major axis every integer is visited; the minor offset after `s` steps is
/// `s * |d_minor| / |d_major|` rounded half away from `start`.
pub fn rasterize_segment(start: (i64, i64), end: (i64, i64), mut plot: impl FnMut(i64, i64)) {
    let (dx, dy) = (end.0 - start.0, end.1 - start.1);
    let (sx, sy) = (dx.signum(), dy.signum());
    let (ax, ay) = (dx.abs(), dy.abs());
    let (major, minor) = if ax >= ay { (ax, ay) } else { (ay, ax) };
    let (mut x, mut y) = start;
    // r = 2 s minor + major - 2 major * offset, kept in [0, 2 major)
    let mut r = major;
    for _ in 0..=major {
        plot(x, y);
        r += 2 * minor;
        let step_minor = r >= 2 * major;
        if step_minor {
            r -= 2 * major;
        }
        if ax >= ay {
            x += sx;
            if step_minor {
                y += sy;
            }
        } else {
            y += sy;
            if step_minor {
                x += sx;
            }
        }
    }
}

/// Variable-density random sampling. Each location is drawn independently
/// with probability `min(1, c * exp(-r^2 / (2 s^2)))`, `r` the distance to the
/// DC bin and `s = 0.25 * min(nx, ny)`; `c` is chosen so a frame holds
/// `nx * ny / accel` samples on average. The DC bin is always sampled.
pub fn gen_vds_mask(nx: usize, ny: usize, nt: usize, accel: f64, seed: u64) -> Result<SamplingSpec> {
    let dims = Dims::new(nx, ny, nt);
    if dims.is_empty() {
        return Err(Error::Dimension("mask dimensions must be positive".into()));
    }
    if !(accel > 1.0) || !accel.is_finite() {
        return Err(Error::Parameter(format!("acceleration factor must be > 1, got {accel}")));
    }
    let probs = vds_probabilities(nx, ny, accel);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(dims.len());
    for _ in 0..nt {
        for &p in &probs {
            let draw: f64 = rng.random();
            bits.push(draw < p);
        }
    }
    Ok(SamplingSpec::new(
        Mask::new(dims, bits)?,
        format!("vds(accel={accel})"),
        seed,
    ))
}

fn vds_probabilities(nx: usize, ny: usize, accel: f64) -> Vec<f64> {
    let sigma = 0.25 * nx.min(ny) as f64;
    let (cx, cy) = ((nx / 2) as f64, (ny / 2) as f64);
    let dc = (nx / 2) * ny + ny / 2;
    let density: Vec<f64> = (0..nx * ny)
        .map(|o| {
            let (i, j) = ((o / ny) as f64, (o % ny) as f64);
            let r2 = (i - cx).powi(2) + (j - cy).powi(2);
            (-r2 / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    // the DC bin contributes exactly one expected sample
    let target = (nx * ny) as f64 / accel - 1.0;
    let expected = |c: f64| -> f64 {
        density
            .iter()
            .enumerate()
            .filter(|&(o, _)| o != dc)
            .map(|(_, &g)| (c * g).min(1.0))
            .sum()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while expected(hi) < target && hi < 1e300 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    density
        .iter()
        .enumerate()
        .map(|(o, &g)| if o == dc { 1.0 } else { (hi * g).min(1.0) })
        .collect()
}
