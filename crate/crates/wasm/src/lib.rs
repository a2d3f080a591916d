//! Browser bindings: a reconstruction demo, a transformed singular value
//! viewer and a sampling mask preview. Images are returned as 8-bit
//! grayscale frames laid out frame by frame, rows of `ny` pixels.

use ttnn::admm::{self, AdmmConfig};
use ttnn::mri::{self, PhantomKind, SamplingSpec};
use ttnn::tsvd::{t_tsvt, transformed_singular_values, ttnn};
use ttnn::{make_transform, ComplexTensor3, Dims, Error, Result, TransformKind, UnitaryTransform};
use wasm_bindgen::prelude::*;

const MAX_SIZE: usize = 128;
const MAX_FRAMES: usize = 16;

fn check_size(size: usize, frames: usize) -> Result<()> {
    if size < 4 || size > MAX_SIZE || frames == 0 || frames > MAX_FRAMES {
        return Err(Error::Parameter(format!(
            "size must be in 4..={MAX_SIZE} and frames in 1..={MAX_FRAMES}"
        )));
    }
    Ok(())
}

fn transform(name: &str, nt: usize, seed: u64) -> Result<UnitaryTransform> {
    match name {
        "random" => UnitaryTransform::random_unitary(nt, seed),
        other => make_transform(other.parse::<TransformKind>()?, nt, None),
    }
}

fn mask(pattern: &str, size: usize, frames: usize, param: f64, seed: u64) -> Result<SamplingSpec> {
    match pattern {
        "radial" => mri::gen_pseudo_radial_mask(size, size, frames, param.max(1.0) as usize, seed),
        "vds" => mri::gen_vds_mask(size, size, frames, param, seed),
        "random" => mri::gen_random_mask(Dims::new(size, size, frames), param, seed),
        other => Err(Error::Parameter(format!("unknown sampling pattern '{other}'"))),
    }
}

/// Magnitudes scaled so `peak` maps to 255.
fn gray(x: &ComplexTensor3, peak: f64) -> Vec<u8> {
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    x.data()
        .iter()
        .map(|z| (z.norm() * scale).round().clamp(0.0, 255.0) as u8)
        .collect()
}

#[wasm_bindgen]
pub struct ReconDemo {
    truth: Vec<u8>,
    zero_filled: Vec<u8>,
    recon: Vec<u8>,
    mask: Vec<u8>,
    snr_zero_filled: f64,
    snr_recon: f64,
    sampled_fraction: f64,
    iterations: usize,
    objective: Vec<f64>,
}

#[wasm_bindgen]
impl ReconDemo {
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<u8> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn zero_filled(&self) -> Vec<u8> {
        self.zero_filled.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn recon(&self) -> Vec<u8> {
        self.recon.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mask(&self) -> Vec<u8> {
        self.mask.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn snr_zero_filled(&self) -> f64 {
        self.snr_zero_filled
    }

    #[wasm_bindgen(getter)]
    pub fn snr_recon(&self) -> f64 {
        self.snr_recon
    }

    #[wasm_bindgen(getter)]
    pub fn sampled_fraction(&self) -> f64 {
        self.sampled_fraction
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn objective(&self) -> Vec<f64> {
        self.objective.clone()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_reconstruction(
    phantom: &str,
    size: usize,
    frames: usize,
    pattern: &str,
    param: f64,
    transform_name: &str,
    lambda: f64,
    iterations: usize,
    seed: u64,
) -> Result<ReconDemo> {
    check_size(size, frames)?;
    let truth = mri::make_phantom(size, size, frames, &phantom.parse::<PhantomKind>()?, seed)?;
    let spec = mask(pattern, size, frames, param, seed.wrapping_add(1))?;
    let b = mri::forward(&truth, &spec)?;
    let zero_filled = mri::adjoint(&b, &spec)?;
    let mut cfg = AdmmConfig::new(transform(transform_name, frames, seed)?);
    cfg.lambda = lambda;
    cfg.mu = 0.1;
    cfg.max_iters = iterations.clamp(1, 500);
    cfg.rel_tol = 1e-6;
    let report = admm::solve(&b, &spec, &cfg)?;
    let peak = truth.max_abs();
    Ok(ReconDemo {
        truth: gray(&truth, peak),
        zero_filled: gray(&zero_filled, peak),
        recon: gray(&report.reconstruction, peak),
        mask: spec.mask().bits().iter().map(|&b| if b { 255 } else { 0 }).collect(),
        snr_zero_filled: mri::snr(&zero_filled, &truth)?,
        snr_recon: mri::snr(&report.reconstruction, &truth)?,
        sampled_fraction: spec.mask().fraction(),
        iterations: report.iterations_run,
        objective: report.history.iter().map(|r| r.objective).collect(),
    })
}

/// Phantom plus undersampled k-space, zero-filled and TTNN reconstructions.
/// `param` is the line count for `radial`, the acceleration for `vds` and
/// the sampled fraction for `random`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn reconstruct(
    phantom: &str,
    size: usize,
    frames: usize,
    pattern: &str,
    param: f64,
    transform_name: &str,
    lambda: f64,
    iterations: usize,
    seed: u32,
) -> std::result::Result<ReconDemo, JsError> {
    run_reconstruction(phantom, size, frames, pattern, param, transform_name, lambda, iterations, seed as u64)
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Spectrum {
    frames: usize,
    width: usize,
    before: Vec<f64>,
    after: Vec<f64>,
    ttnn_before: f64,
    ttnn_after: f64,
    images: Vec<u8>,
}

#[wasm_bindgen]
impl Spectrum {
    #[wasm_bindgen(getter)]
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Singular values per transformed slice.
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `frames * width` values, slice by slice, descending within a slice.
    #[wasm_bindgen(getter)]
    pub fn before(&self) -> Vec<f64> {
        self.before.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn after(&self) -> Vec<f64> {
        self.after.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ttnn_before(&self) -> f64 {
        self.ttnn_before
    }

    #[wasm_bindgen(getter)]
    pub fn ttnn_after(&self) -> f64 {
        self.ttnn_after
    }

    /// Frames of the thresholded series.
    #[wasm_bindgen(getter)]
    pub fn images(&self) -> Vec<u8> {
        self.images.clone()
    }
}

pub fn run_spectrum(
    phantom: &str,
    size: usize,
    frames: usize,
    transform_name: &str,
    tau: f64,
    seed: u64,
) -> Result<Spectrum> {
    check_size(size, frames)?;
    let x = mri::make_phantom(size, size, frames, &phantom.parse::<PhantomKind>()?, seed)?;
    let t = transform(transform_name, frames, seed)?;
    let y = t_tsvt(&x, tau, &t)?;
    let before = transformed_singular_values(&x, &t)?;
    let after = transformed_singular_values(&y, &t)?;
    Ok(Spectrum {
        frames,
        width: size,
        before: before.concat(),
        after: after.concat(),
        ttnn_before: ttnn(&x, &t)?,
        ttnn_after: ttnn(&y, &t)?,
        images: gray(&y, x.max_abs()),
    })
}

/// Transformed singular values of a phantom before and after thresholding
/// at `tau`, with the thresholded frames.
#[wasm_bindgen]
pub fn singular_spectrum(
    phantom: &str,
    size: usize,
    frames: usize,
    transform_name: &str,
    tau: f64,
    seed: u32,
) -> std::result::Result<Spectrum, JsError> {
    run_spectrum(phantom, size, frames, transform_name, tau, seed as u64).map_err(|e| JsError::new(&e.to_string()))
}

/// Sampling masks, 255 where sampled.
#[wasm_bindgen]
pub fn mask_preview(
    pattern: &str,
    size: usize,
    frames: usize,
    param: f64,
    seed: u32,
) -> std::result::Result<Vec<u8>, JsError> {
    check_size(size, frames)
        .and_then(|_| mask(pattern, size, frames, param, seed as u64))
        .map(|s| s.mask().bits().iter().map(|&b| if b { 255 } else { 0 }).collect())
        .map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruction_beats_zero_filling() {
        let demo = run_reconstruction("moving_ellipse", 32, 4, "radial", 12.0, "fft", 0.03, 60, 1).unwrap();
        assert_eq!(demo.truth.len(), 32 * 32 * 4);
        assert_eq!(demo.mask.len(), demo.truth.len());
        assert!(demo.snr_recon > demo.snr_zero_filled);
        assert_eq!(demo.objective.len(), demo.iterations);
    }

    #[test]
    fn thresholding_lowers_the_spectrum() {
        let s = run_spectrum("rotating_bars", 16, 4, "dct", 0.5, 2).unwrap();
        assert_eq!(s.before.len(), 4 * 16);
        assert!(s.ttnn_after < s.ttnn_before);
        for (a, b) in s.after.iter().zip(&s.before) {
            assert!(*a <= b + 1e-9);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(run_spectrum("moving_ellipse", 1000, 4, "fft", 0.1, 0).is_err());
        assert!(run_reconstruction("moving_ellipse", 16, 4, "spiral", 8.0, "fft", 0.1, 5, 0).is_err());
        assert!(run_reconstruction("moving_ellipse", 16, 4, "radial", 8.0, "wavelet", 0.1, 5, 0).is_err());
    }
}
