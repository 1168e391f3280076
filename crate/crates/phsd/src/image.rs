//! Spatial-domain containers and reconstruction-quality metrics.
//!
//! Axis convention used throughout the crate: an image is stored row-major,
//! `pixels[t * width + y]`, where `t` (height, rows) is the subdivision axis
//! and `y` (width, columns) is the axis the column FFT runs along.

use num_complex::Complex64;

use crate::error::{PhsdError, Result};

/// Real-valued image. `bit_depth` (8 or 16) only fixes the PSNR peak and the
/// PGM export range; pixel values themselves are unclamped f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, bit_depth: u8, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(PhsdError::param("image dimensions must be nonzero"));
        }
        if bit_depth != 8 && bit_depth != 16 {
            return Err(PhsdError::param(format!(
                "bit depth must be 8 or 16, got {bit_depth}"
            )));
        }
        if pixels.len() != width * height {
            return Err(PhsdError::dims(format!(
                "pixel buffer holds {} values, expected {}x{}={}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Image { width, height, bit_depth, pixels })
    }

    pub fn zeros(width: usize, height: usize, bit_depth: u8) -> Result<Self> {
        Image::new(width, height, bit_depth, vec![0.0; width * height])
    }

    /// Peak signal value implied by the bit depth (255 or 65535).
    pub fn peak(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Swap the two axes. Used by the CLI so callers can choose which image
    /// axis gets the subdivision treatment.
    pub fn transposed(&self) -> Image {
        let mut pixels = vec![0.0; self.pixels.len()];
        for t in 0..self.height {
            for y in 0..self.width {
                pixels[y * self.height + t] = self.pixels[t * self.width + y];
            }
        }
        Image {
            width: self.height,
            height: self.width,
            bit_depth: self.bit_depth,
            pixels,
        }
    }

    /// Center-crop each axis to the largest power of two not exceeding the
    /// axis length (and not exceeding `max_size` when nonzero). Returns the
    /// image unchanged if it already conforms.
    pub fn center_crop_pow2(&self, max_size: usize) -> Image {
        let target = |len: usize| -> usize {
            let mut p = 1usize;
            while p * 2 <= len {
                p *= 2;
            }
            if max_size > 0 {
                p.min(max_size.next_power_of_two().min(max_size))
            } else {
                p
            }
        };
        let (w, h) = (target(self.width), target(self.height));
        if w == self.width && h == self.height {
            return self.clone();
        }
        let x0 = (self.width - w) / 2;
        let t0 = (self.height - h) / 2;
        let mut pixels = Vec::with_capacity(w * h);
        for t in 0..h {
            let row = (t0 + t) * self.width + x0;
            pixels.extend_from_slice(&self.pixels[row..row + w]);
        }
        Image { width: w, height: h, bit_depth: self.bit_depth, pixels }
    }
}

/// Complex grid with the same row-major layout as `Image`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(width: usize, height: usize) -> ComplexGrid {
        ComplexGrid {
            width,
            height,
            values: vec![Complex64::new(0.0, 0.0); width * height],
        }
    }

    pub fn from_image(img: &Image) -> ComplexGrid {
        ComplexGrid {
            width: img.width,
            height: img.height,
            values: img.pixels.iter().map(|&p| Complex64::new(p, 0.0)).collect(),
        }
    }

    /// Real part as an image, together with the relative imaginary residue
    /// max|Im| / max|value| (0 for an all-zero grid).
    pub fn into_real_image(self, bit_depth: u8) -> Result<(Image, f64)> {
        let mut max_abs = 0.0f64;
        let mut max_im = 0.0f64;
        for v in &self.values {
            max_abs = max_abs.max(v.norm());
            max_im = max_im.max(v.im.abs());
        }
        let residue = if max_abs > 0.0 { max_im / max_abs } else { 0.0 };
        let pixels = self.values.iter().map(|v| v.re).collect();
        Ok((Image::new(self.width, self.height, bit_depth, pixels)?, residue))
    }
}

/// Mean squared error over all pixels.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(PhsdError::dims(format!(
            "mse needs equal shapes, got {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let n = a.pixels.len() as f64;
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok(sum / n)
}

/// PSNR in dB with the peak taken from the reference image's bit depth.
/// Identical images give +infinity.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    let err = mse(reference, test)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = reference.peak();
    Ok(10.0 * (peak * peak / err).log10())
}
