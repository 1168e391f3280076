//! Orthonormal analysis/synthesis transforms.
//!
//! Two bases share one interface:
//!
//! * the hybrid basis: a unitary DFT across the y axis followed, in each
//!   frequency column, by a decimated wavelet cascade along t whose filter
//!   pair depends on the column frequency and the cascade step;
//! * a classical separable wavelet basis (`daub2d`) built from the single
//!   lambda = 0 pair, used as the comparison baseline.
//!
//! Both are real-linear isometries of the complex grid, so the synthesis
//! direction is the exact transpose (= conjugate-free adjoint, all filters
//! are real) of the analysis direction.

use num_complex::Complex64;

use crate::error::{PhsdError, Result};
use crate::filters::{build_filter_bank, build_filter_pair, FilterBank, FilterPair, FilterSpec};
use crate::fourier::{transpose, unitary_fft_rows_inplace};
use crate::image::{ComplexGrid, Image};
use crate::par::for_each_chunk_mut;
use crate::pyramid::{BasisKind, BasisTag, CoefficientPyramid};

/// One decimated analysis step on `buf[..cur]`, periodic boundary.
///
/// out_low[k]  = sum_m h[m] buf[(2k+m) mod cur]
/// out_high[k] = sum_m g[m] buf[(2k+m) mod cur]
///
/// The result is packed back as [low | high].
fn analysis_step(buf: &mut [Complex64], cur: usize, pair: &FilterPair, scratch: &mut [Complex64]) {
    let half = cur / 2;
    for k in 0..half {
        let mut lo = Complex64::new(0.0, 0.0);
        let mut hi = Complex64::new(0.0, 0.0);
        for (m, (&h, &g)) in pair.lowpass.iter().zip(&pair.highpass).enumerate() {
            let v = buf[(2 * k + m) % cur];
            lo += h * v;
            hi += g * v;
        }
        scratch[k] = lo;
        scratch[half + k] = hi;
    }
    buf[..cur].copy_from_slice(&scratch[..cur]);
}

/// Exact transpose of `analysis_step`: scatter [low | high] back to cur samples.
fn synthesis_step(buf: &mut [Complex64], cur: usize, pair: &FilterPair, scratch: &mut [Complex64]) {
    let half = cur / 2;
    for s in scratch[..cur].iter_mut() {
        *s = Complex64::new(0.0, 0.0);
    }
    for k in 0..half {
        let lo = buf[k];
        let hi = buf[half + k];
        for (m, (&h, &g)) in pair.lowpass.iter().zip(&pair.highpass).enumerate() {
            scratch[(2 * k + m) % cur] += h * lo + g * hi;
        }
    }
    buf[..cur].copy_from_slice(&scratch[..cur]);
}

fn check_cascade_args(len: usize, pairs: &[&FilterPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(PhsdError::param("cascade needs at least one filter pair"));
    }
    if pairs.len() >= usize::BITS as usize || len % (1usize << pairs.len()) != 0 || len < 2 {
        return Err(PhsdError::dims(format!(
            "signal length {len} is not divisible by 2^{}",
            pairs.len()
        )));
    }
    Ok(())
}

/// Multi-level decimated analysis of one signal. Level l uses `pairs[l-1]`
/// on the coarse part of length `len >> (l-1)`. Output packing is
/// [coarse_L | detail_L | detail_{L-1} | ... | detail_1].
pub fn cascade_forward_1d(signal: &[Complex64], pairs: &[&FilterPair]) -> Result<Vec<Complex64>> {
    check_cascade_args(signal.len(), pairs)?;
    let mut buf = signal.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); signal.len()];
    cascade_forward_inplace(&mut buf, pairs, &mut scratch);
    Ok(buf)
}

/// Inverse of [`cascade_forward_1d`] (its transpose, hence exact inverse).
pub fn cascade_inverse_1d(packed: &[Complex64], pairs: &[&FilterPair]) -> Result<Vec<Complex64>> {
    check_cascade_args(packed.len(), pairs)?;
    let mut buf = packed.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); packed.len()];
    cascade_inverse_inplace(&mut buf, pairs, &mut scratch);
    Ok(buf)
}

fn cascade_forward_inplace(buf: &mut [Complex64], pairs: &[&FilterPair], scratch: &mut [Complex64]) {
    let mut cur = buf.len();
    for pair in pairs {
        analysis_step(buf, cur, pair, scratch);
        cur /= 2;
    }
}

fn cascade_inverse_inplace(buf: &mut [Complex64], pairs: &[&FilterPair], scratch: &mut [Complex64]) {
    let mut cur = buf.len() >> (pairs.len() - 1);
    for pair in pairs.iter().rev() {
        synthesis_step(buf, cur, pair, scratch);
        cur *= 2;
    }
}

/// Unitary DFT of every image row (the y axis), one output column per
/// frequency xi. This is the first analysis stage of the hybrid basis.
pub fn fft_columns(image: &Image) -> ComplexGrid {
    let mut grid = ComplexGrid::from_image(image);
    unitary_fft_rows_inplace(&mut grid.values, grid.width, false);
    grid
}

/// A planned transform: basis choice plus every filter needed for the grid.
#[derive(Debug, Clone)]
pub struct TransformHandle {
    kind: BasisKind,
    n_t: usize,
    n_y: usize,
    levels: u8,
    order: u8,
    bank: Option<FilterBank>,
    daub_pair: Option<FilterPair>,
}

impl TransformHandle {
    /// Hybrid basis on an n_t x n_y grid (t = rows = cascade axis).
    pub fn phsd(n_t: usize, n_y: usize, order: u8, levels: u8, y_scale: f64) -> Result<Self> {
        let bank = build_filter_bank(n_t, n_y, order, levels, y_scale)?;
        Ok(Self {
            kind: BasisKind::Phsd,
            n_t,
            n_y,
            levels,
            order,
            bank: Some(bank),
            daub_pair: None,
        })
    }

    /// Classical separable wavelet basis from the lambda = 0 filter pair.
    pub fn daub2d(n_t: usize, n_y: usize, order: u8, levels: u8) -> Result<Self> {
        if !n_t.is_power_of_two() || !n_y.is_power_of_two() || n_t < 2 || n_y < 2 {
            return Err(PhsdError::param(format!(
                "grid {n_t}x{n_y} must have power-of-two sides of at least 2"
            )));
        }
        if levels == 0 || (n_t >> levels) == 0 || (n_y >> levels) == 0 {
            return Err(PhsdError::param(format!(
                "levels={levels} does not fit grid {n_t}x{n_y}: need 1 <= levels <= log2(min side)"
            )));
        }
        let pair = build_filter_pair(FilterSpec { order, lambda_eff: 0.0 })?;
        Ok(Self {
            kind: BasisKind::Daub2d,
            n_t,
            n_y,
            levels,
            order,
            bank: None,
            daub_pair: Some(pair),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn basis_tag(&self) -> BasisTag {
        BasisTag { kind: self.kind, order: self.order }
    }

    /// Number of (xi, step) slots whose effective exponent hit the clamp.
    pub fn clamped_pairs(&self) -> usize {
        self.bank.as_ref().map_or(0, |b| b.clamped_pairs())
    }

    pub fn filter_bank(&self) -> Option<&FilterBank> {
        self.bank.as_ref()
    }

    fn check_grid(&self, width: usize, height: usize) -> Result<()> {
        if height != self.n_t || width != self.n_y {
            return Err(PhsdError::dims(format!(
                "transform planned for {}x{} got {height}x{width}",
                self.n_t, self.n_y
            )));
        }
        Ok(())
    }

    fn check_pyramid(&self, pyr: &CoefficientPyramid) -> Result<()> {
        if pyr.n_t != self.n_t || pyr.n_y != self.n_y || pyr.levels != self.levels {
            return Err(PhsdError::dims(format!(
                "pyramid geometry {}x{} levels={} does not match transform {}x{} levels={}",
                pyr.n_t, pyr.n_y, pyr.levels, self.n_t, self.n_y, self.levels
            )));
        }
        if pyr.basis_tag != self.basis_tag() {
            return Err(PhsdError::dims(format!(
                "pyramid basis {} does not match transform basis {}",
                pyr.basis_tag,
                self.basis_tag()
            )));
        }
        Ok(())
    }

    /// Analysis on an already-complex grid (the core of the operator chain).
    pub fn analyze_grid(&self, grid: &ComplexGrid) -> Result<CoefficientPyramid> {
        self.check_grid(grid.width, grid.height)?;
        let values = self.analyze_values(grid.values.clone());
        CoefficientPyramid::new(self.n_t, self.n_y, self.levels, self.basis_tag(), values)
    }

    /// Exact transpose of [`analyze_grid`]; equal to its inverse (isometry).
    pub fn synthesize_grid(&self, pyr: &CoefficientPyramid) -> Result<ComplexGrid> {
        self.check_pyramid(pyr)?;
        let values = self.synthesize_values(pyr.values.clone());
        Ok(ComplexGrid { width: self.n_y, height: self.n_t, values })
    }

    /// Analysis of a real image.
    pub fn forward(&self, image: &Image) -> Result<CoefficientPyramid> {
        self.check_grid(image.width, image.height)?;
        self.analyze_grid(&ComplexGrid::from_image(image))
    }

    /// Synthesis back to a real image. Returns the image together with the
    /// relative size of the imaginary part that was discarded; for pyramids
    /// produced by [`forward`](Self::forward) it is at rounding level.
    pub fn inverse(&self, pyr: &CoefficientPyramid, bit_depth: u8) -> Result<(Image, f64)> {
        let grid = self.synthesize_grid(pyr)?;
        grid.into_real_image(bit_depth)
    }

    /// Flat-value analysis; callers guarantee `values.len() == n_t * n_y`.
    pub(crate) fn analyze_values(&self, mut values: Vec<Complex64>) -> Vec<Complex64> {
        match self.kind {
            BasisKind::Phsd => {
                unitary_fft_rows_inplace(&mut values, self.n_y, false);
                let mut cols = transpose(&values, self.n_y, self.n_t);
                let bank = self.bank.as_ref().expect("phsd handle carries a bank");
                let levels = self.levels;
                let n_t = self.n_t;
                for_each_chunk_mut(&mut cols, n_t, |xi, col| {
                    let pairs: Vec<&FilterPair> =
                        (1..=levels).map(|step| bank.pair(xi, step)).collect();
                    let mut scratch = vec![Complex64::new(0.0, 0.0); n_t];
                    cascade_forward_inplace(col, &pairs, &mut scratch);
                });
                transpose(&cols, self.n_t, self.n_y)
            }
            BasisKind::Daub2d => {
                let pair = self.daub_pair.as_ref().expect("daub2d handle carries a pair");
                for level in 0..self.levels {
                    let ht = self.n_t >> level;
                    let wd = self.n_y >> level;
                    // rows of the active block, then columns (via transpose)
                    for_each_chunk_mut(&mut values[..ht * self.n_y], self.n_y, |_, row| {
                        let mut scratch = vec![Complex64::new(0.0, 0.0); wd];
                        analysis_step(row, wd, pair, &mut scratch);
                    });
                    let mut cols = transpose(&values, self.n_y, self.n_t);
                    for_each_chunk_mut(&mut cols[..wd * self.n_t], self.n_t, |_, col| {
                        let mut scratch = vec![Complex64::new(0.0, 0.0); ht];
                        analysis_step(col, ht, pair, &mut scratch);
                    });
                    values = transpose(&cols, self.n_t, self.n_y);
                }
                values
            }
        }
    }

    /// Flat-value synthesis; callers guarantee `values.len() == n_t * n_y`.
    pub(crate) fn synthesize_values(&self, mut values: Vec<Complex64>) -> Vec<Complex64> {
        match self.kind {
            BasisKind::Phsd => {
                let mut cols = transpose(&values, self.n_y, self.n_t);
                let bank = self.bank.as_ref().expect("phsd handle carries a bank");
                let levels = self.levels;
                let n_t = self.n_t;
                for_each_chunk_mut(&mut cols, n_t, |xi, col| {
                    let pairs: Vec<&FilterPair> =
                        (1..=levels).map(|step| bank.pair(xi, step)).collect();
                    let mut scratch = vec![Complex64::new(0.0, 0.0); n_t];
                    cascade_inverse_inplace(col, &pairs, &mut scratch);
                });
                values = transpose(&cols, self.n_t, self.n_y);
                unitary_fft_rows_inplace(&mut values, self.n_y, true);
                values
            }
            BasisKind::Daub2d => {
                let pair = self.daub_pair.as_ref().expect("daub2d handle carries a pair");
                for level in (0..self.levels).rev() {
                    let ht = self.n_t >> level;
                    let wd = self.n_y >> level;
                    // mirror of analysis: columns first, then rows
                    let mut cols = transpose(&values, self.n_y, self.n_t);
                    for_each_chunk_mut(&mut cols[..wd * self.n_t], self.n_t, |_, col| {
                        let mut scratch = vec![Complex64::new(0.0, 0.0); ht];
                        synthesis_step(col, ht, pair, &mut scratch);
                    });
                    values = transpose(&cols, self.n_t, self.n_y);
                    for_each_chunk_mut(&mut values[..ht * self.n_y], self.n_y, |_, row| {
                        let mut scratch = vec![Complex64::new(0.0, 0.0); wd];
                        synthesis_step(row, wd, pair, &mut scratch);
                    });
                }
                values
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn haar_pair() -> FilterPair {
        build_filter_pair(FilterSpec { order: 1, lambda_eff: 0.0 }).unwrap()
    }

    fn test_image(n_t: usize, n_y: usize) -> Image {
        // deterministic, non-symmetric content
        let pixels: Vec<f64> =
            (0..n_t * n_y).map(|i| ((i * 37 + 11) % 251) as f64).collect();
        Image::new(n_y, n_t, 8, pixels).unwrap()
    }

    #[test]
    fn fft_columns_of_constant_hits_dc_only() {
        let img = Image::new(8, 1, 8, vec![2.0; 8]).unwrap();
        let grid = fft_columns(&img);
        assert_abs_diff_eq!(grid.values[0].re, 2.0 * 8f64.sqrt(), epsilon = 1e-12);
        for v in &grid.values[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn haar_cascade_matches_hand_computation() {
        let pair = haar_pair();
        let signal = vec![c(1.0), c(1.0), c(1.0), c(1.0)];
        let one = cascade_forward_1d(&signal, &[&pair]).unwrap();
        let s = 2f64.sqrt();
        for (got, want) in one.iter().zip([s, s, 0.0, 0.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
        }
        let two = cascade_forward_1d(&signal, &[&pair, &pair]).unwrap();
        for (got, want) in two.iter().zip([2.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn cascade_round_trips_and_preserves_energy() {
        let pair = build_filter_pair(FilterSpec { order: 2, lambda_eff: 0.7 }).unwrap();
        let signal: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let packed = cascade_forward_1d(&signal, &[&pair, &pair]).unwrap();
        let e_in: f64 = signal.iter().map(|v| v.norm_sqr()).sum();
        let e_out: f64 = packed.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(e_in, e_out, epsilon = 1e-10 * e_in);
        let back = cascade_inverse_1d(&packed, &[&pair, &pair]).unwrap();
        for (a, b) in back.iter().zip(&signal) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cascade_rejects_bad_arguments() {
        let pair = haar_pair();
        let signal = vec![c(1.0); 6];
        assert!(cascade_forward_1d(&signal, &[]).is_err());
        // 6 is not divisible by 2^2
        assert!(cascade_forward_1d(&signal, &[&pair, &pair]).is_err());
    }

    #[test]
    fn phsd_round_trip_is_exact() {
        let img = test_image(8, 8);
        let t = TransformHandle::phsd(8, 8, 2, 2, 1.0).unwrap();
        let pyr = t.forward(&img).unwrap();
        let (back, residue) = t.inverse(&pyr, 8).unwrap();
        assert!(residue < 1e-12);
        for (a, b) in back.pixels.iter().zip(&img.pixels) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn phsd_is_an_isometry() {
        let img = test_image(16, 8);
        let t = TransformHandle::phsd(16, 8, 3, 3, 1.5).unwrap();
        let pyr = t.forward(&img).unwrap();
        let e_img: f64 = img.pixels.iter().map(|v| v * v).sum();
        let e_pyr: f64 = pyr.values.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(e_img, e_pyr, epsilon = 1e-10 * e_img);
    }

    #[test]
    fn phsd_pyramid_of_real_image_has_conjugate_column_symmetry() {
        let img = test_image(16, 16);
        let t = TransformHandle::phsd(16, 16, 2, 2, 1.0).unwrap();
        let pyr = t.forward(&img).unwrap();
        assert!(pyr.column_conjugate_asymmetry() < 1e-12);
    }

    #[test]
    fn adjoint_identity_holds_for_complex_grids() {
        // <F x, y> == <x, F^T y> with the complex bilinear-free real pairing
        // Re sum a conj(b); F is real-linear so this is the right check.
        let t = TransformHandle::phsd(8, 8, 2, 2, 0.8).unwrap();
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.2).cos()))
            .collect();
        let y: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.4).cos(), (i as f64 * 0.9).sin()))
            .collect();
        let fx = t.analyze_values(x.clone());
        let fty = t.synthesize_values(y.clone());
        let lhs: f64 = fx.iter().zip(&y).map(|(a, b)| (a * b.conj()).re).sum();
        let rhs: f64 = x.iter().zip(&fty).map(|(a, b)| (a * b.conj()).re).sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn daub2d_haar_matches_hand_computed_2x2() {
        // image [[1,2],[3,4]]: LL=5, LH=-1, HL=-2, HH=0
        let img = Image::new(2, 2, 8, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = TransformHandle::daub2d(2, 2, 1, 1).unwrap();
        let pyr = t.forward(&img).unwrap();
        let got: Vec<f64> = pyr.values.iter().map(|v| v.re).collect();
        for (a, b) in got.iter().zip([5.0, -1.0, -2.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        for v in &pyr.values {
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn daub2d_round_trip_and_isometry() {
        let img = test_image(8, 16);
        let t = TransformHandle::daub2d(8, 16, 2, 2).unwrap();
        let pyr = t.forward(&img).unwrap();
        let e_img: f64 = img.pixels.iter().map(|v| v * v).sum();
        let e_pyr: f64 = pyr.values.iter().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(e_img, e_pyr, epsilon = 1e-10 * e_img);
        let (back, residue) = t.inverse(&pyr, 8).unwrap();
        assert!(residue < 1e-12);
        for (a, b) in back.pixels.iter().zip(&img.pixels) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let t = TransformHandle::phsd(8, 8, 2, 2, 1.0).unwrap();
        let wrong = test_image(8, 16);
        assert!(t.forward(&wrong).is_err());

        let other = TransformHandle::daub2d(8, 8, 2, 2).unwrap();
        let pyr = other.forward(&test_image(8, 8)).unwrap();
        // same geometry, different basis tag
        assert!(t.synthesize_grid(&pyr).is_err());
    }

    #[test]
    fn imaginary_residue_is_reported_for_asymmetric_pyramids() {
        let img = test_image(8, 8);
        let t = TransformHandle::phsd(8, 8, 2, 2, 1.0).unwrap();
        let mut pyr = t.forward(&img).unwrap();
        // break the conjugate symmetry of one off-axis coefficient
        pyr.values[3] += Complex64::new(0.0, 50.0);
        let (_, residue) = t.inverse(&pyr, 8).unwrap();
        assert!(residue > 1e-3, "residue {residue} should flag the asymmetry");
    }

    #[test]
    fn forward_is_deterministic() {
        let img = test_image(32, 32);
        let t = TransformHandle::phsd(32, 32, 3, 3, 1.0).unwrap();
        let a = t.forward(&img).unwrap();
        let b = t.forward(&img).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
