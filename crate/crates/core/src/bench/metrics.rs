use super::BenchError;
use crate::worldmodel::Frame;

/// PSNR reported for identical frames, where the MSE is zero.
pub const PSNR_CAP_DB: f64 = 100.0;

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const PEAK: f64 = 255.0;

fn same_size(a: &Frame, b: &Frame) -> Result<(), BenchError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(BenchError::Metric(format!(
            "frames differ in size: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio over all RGB samples, in dB.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64, BenchError> {
    same_size(a, b)?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    let mse = sum / a.pixels().len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP_DB))
}

fn luma(f: &Frame) -> Vec<f64> {
    f.pixels()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

fn gaussian_window() -> [f64; WINDOW * WINDOW] {
    let half = (WINDOW / 2) as f64;
    let g: Vec<f64> = (0..WINDOW)
        .map(|i| {
            let x = i as f64 - half;
            (-(x * x) / (2.0 * SIGMA * SIGMA)).exp()
        })
        .collect();
    let mut w = [0.0; WINDOW * WINDOW];
    for (i, gi) in g.iter().enumerate() {
        for (j, gj) in g.iter().enumerate() {
            w[i * WINDOW + j] = gi * gj;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Single-scale SSIM on BT.601 luma with an 11×11 Gaussian window
/// (σ = 1.5), averaged over every window that fits inside the frame.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64, BenchError> {
    same_size(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < WINDOW || h < WINDOW {
        return Err(BenchError::Metric(format!(
            "frames must be at least {WINDOW}x{WINDOW}, got {w}x{h}"
        )));
    }
    let (x, y) = (luma(a), luma(b));
    let kernel = gaussian_window();
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for top in 0..=h - WINDOW {
        for left in 0..=w - WINDOW {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in 0..WINDOW {
                let row = (top + r) * w + left;
                for c in 0..WINDOW {
                    let k = kernel[r * WINDOW + c];
                    let (p, q) = (x[row + c], y[row + c]);
                    mx += k * p;
                    my += k * q;
                    xx += k * p * p;
                    yy += k * q * q;
                    xy += k * p * q;
                }
            }
            let vx = xx - mx * mx;
            let vy = yy - my * my;
            let cov = xy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}
