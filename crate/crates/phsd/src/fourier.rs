//! Unitary FFT helpers shared by the transform and sensing stages.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::par::for_each_chunk_mut;

/// In-place unitary DFT of every row of a row-major grid.
pub(crate) fn unitary_fft_rows_inplace(values: &mut [Complex64], width: usize, inverse: bool) {
    debug_assert_eq!(values.len() % width, 0);
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(width)
    } else {
        planner.plan_fft_forward(width)
    };
    let scale = 1.0 / (width as f64).sqrt();
    for_each_chunk_mut(values, width, |_, row| {
        fft.process(row);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
}

/// Row-major transpose of a height x width grid.
pub(crate) fn transpose(values: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    debug_assert_eq!(values.len(), width * height);
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for t in 0..height {
        for y in 0..width {
            out[y * height + t] = values[t * width + y];
        }
    }
    out
}

/// In-place unitary 2-D DFT (rows then columns; separable, order-free).
pub(crate) fn unitary_dft2_inplace(
    values: &mut Vec<Complex64>,
    width: usize,
    height: usize,
    inverse: bool,
) {
    unitary_fft_rows_inplace(values, width, inverse);
    let mut flipped = transpose(values, width, height);
    unitary_fft_rows_inplace(&mut flipped, height, inverse);
    *values = transpose(&flipped, height, width);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unitary_round_trip_preserves_values_and_energy() {
        let orig: Vec<Complex64> = (0..32)
            .map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut v = orig.clone();
        unitary_dft2_inplace(&mut v, 8, 4, false);
        let energy_hat: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let energy: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        assert!((energy_hat - energy).abs() < 1e-12 * energy);
        unitary_dft2_inplace(&mut v, 8, 4, true);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_grid_concentrates_at_dc() {
        let mut v = vec![c(3.0, 0.0); 16];
        unitary_dft2_inplace(&mut v, 4, 4, false);
        assert!((v[0] - c(12.0, 0.0)).norm() < 1e-12); // 3 * sqrt(16)
        for z in &v[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn transpose_round_trips() {
        let v: Vec<Complex64> = (0..12).map(|i| c(i as f64, -(i as f64))).collect();
        let t = transpose(&v, 4, 3);
        assert_eq!(t[0], v[0]);
        assert_eq!(t[1], v[4]);
        assert_eq!(transpose(&t, 3, 4), v);
    }
}
