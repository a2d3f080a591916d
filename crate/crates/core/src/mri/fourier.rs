//! Per-frame centered unitary 2D DFT.
//!
//! `K = fftshift(fft2(ifftshift(x))) / sqrt(nx ny)`, so the DC coefficient of
//! each frame sits at zero-based index `(nx / 2, ny / 2)`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::par;
use crate::tensor::{ComplexTensor3, C64};

pub fn spatial_fft(x: &ComplexTensor3) -> ComplexTensor3 {
    transform_frames(x, true)
}

pub fn spatial_ifft(k: &ComplexTensor3) -> ComplexTensor3 {
    transform_frames(k, false)
}

fn transform_frames(x: &ComplexTensor3, forward: bool) -> ComplexTensor3 {
    let d = x.dims();
    let (nx, ny) = (d.n1, d.n2);
    let mut planner = FftPlanner::new();
    let (rows, cols): (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) = if forward {
        (planner.plan_fft_forward(ny), planner.plan_fft_forward(nx))
    } else {
        (planner.plan_fft_inverse(ny), planner.plan_fft_inverse(nx))
    };
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    let mut data = x.data().to_vec();
    par::for_each_chunk(&mut data, nx * ny, |_, frame| {
        let mut buf = vec![C64::new(0.0, 0.0); nx * ny];
        // ifftshift: source index (i, j) moves to ((i + nx - nx/2) % nx, ...)
        shift(frame, &mut buf, nx, ny, nx - nx / 2, ny - ny / 2);
        rows.process(&mut buf);
        let mut colbuf = vec![C64::new(0.0, 0.0); nx * ny];
        transpose(&buf, &mut colbuf, nx, ny);
        cols.process(&mut colbuf);
        transpose(&colbuf, &mut buf, ny, nx);
        shift(&buf, frame, nx, ny, nx / 2, ny / 2);
        for z in frame.iter_mut() {
            *z *= scale;
        }
    });
    ComplexTensor3::new(d, data).expect("same shape")
}

/// Circular shift of an `nx x ny` row-major frame by `(di, dj)`.
fn shift(src: &[C64], dst: &mut [C64], nx: usize, ny: usize, di: usize, dj: usize) {
    for i in 0..nx {
        let ti = (i + di) % nx;
        for j in 0..ny {
            dst[ti * ny + (j + dj) % ny] = src[i * ny + j];
        }
    }
}

fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}
