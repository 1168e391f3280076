//! Measurement operators: radial-line Fourier masks, pixel masks, and the
//! mask-plus-basis composition the solvers iterate with.
//!
//! Everything is applied matrix-free; the composed operator is never
//! materialized as a matrix (dense storage would be gigabytes at realistic
//! sizes).

use std::collections::HashSet;

use num_complex::Complex64;

use crate::error::{PhsdError, Result};
use crate::fourier::unitary_dft2_inplace;
use crate::image::{ComplexGrid, Image};
use crate::pyramid::CoefficientPyramid;
use crate::transform::TransformHandle;

/// Where the mask indexes: the unitary 2-D DFT of the image, or pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskDomain {
    Fourier,
    Pixel,
}

impl MaskDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            MaskDomain::Fourier => "fourier",
            MaskDomain::Pixel => "pixel",
        }
    }
}

impl std::str::FromStr for MaskDomain {
    type Err = PhsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(MaskDomain::Fourier),
            "pixel" => Ok(MaskDomain::Pixel),
            other => Err(PhsdError::format(format!("unknown mask domain {other:?}"))),
        }
    }
}

/// An ordered set of distinct grid positions (u, v); u indexes the t axis,
/// v the y axis, both in standard DFT order for fourier masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    pub n_t: usize,
    pub n_y: usize,
    pub domain: MaskDomain,
    pub indices: Vec<(usize, usize)>,
    /// Whether conjugate-symmetric completion was applied when building.
    pub hermitian_completed: bool,
}

impl SamplingMask {
    pub fn new(
        n_t: usize,
        n_y: usize,
        domain: MaskDomain,
        indices: Vec<(usize, usize)>,
        hermitian_completed: bool,
    ) -> Result<Self> {
        if n_t == 0 || n_y == 0 {
            return Err(PhsdError::param("mask dims must be nonzero"));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for &(u, v) in &indices {
            if u >= n_t || v >= n_y {
                return Err(PhsdError::param(format!(
                    "mask index ({u}, {v}) outside {n_t}x{n_y} grid"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(PhsdError::param(format!("duplicate mask index ({u}, {v})")));
            }
        }
        Ok(Self { n_t, n_y, domain, indices, hermitian_completed })
    }

    /// Number of measurements M.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Short provenance string carried by measurement vectors.
    pub fn id(&self) -> String {
        format!(
            "{} {}x{} M={}{}",
            self.domain.as_str(),
            self.n_t,
            self.n_y,
            self.len(),
            if self.hermitian_completed { " hermitian" } else { "" }
        )
    }

    /// True when the index set is closed under (u, v) -> (-u, -v) mod n.
    pub fn is_hermitian_closed(&self) -> bool {
        let set: HashSet<(usize, usize)> = self.indices.iter().copied().collect();
        self.indices.iter().all(|&(u, v)| {
            set.contains(&((self.n_t - u) % self.n_t, (self.n_y - v) % self.n_y))
        })
    }
}

/// The values ⟨x, θ_m⟩ in mask order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub values: Vec<Complex64>,
    pub mask_id: String,
}

fn round_away(x: f64) -> isize {
    x.round() as isize
}

fn wrap(idx: isize, n: usize) -> usize {
    idx.rem_euclid(n as isize) as usize
}

/// Radial-line Fourier mask on an n x n grid: `lines` diameters at angles
/// pi*l/lines, `points_per_line` equally spaced samples per diameter in
/// centered-DC coordinates (spacing n/points), rounded to the grid and
/// shifted to standard DFT order. Duplicates keep the first occurrence; with
/// `hermitian`, missing conjugate indices are appended afterwards in scan
/// order. Fully deterministic; `seed` is reserved for jittered variants.
pub fn radial_mask(
    n: usize,
    lines: usize,
    points_per_line: usize,
    hermitian: bool,
    seed: u64,
) -> Result<SamplingMask> {
    let _ = seed;
    if !n.is_power_of_two() || n < 2 {
        return Err(PhsdError::param(format!("grid size {n} must be a power of two, at least 2")));
    }
    if lines == 0 {
        return Err(PhsdError::param("need at least one radial line"));
    }
    if points_per_line == 0 || points_per_line > n {
        return Err(PhsdError::param(format!(
            "points_per_line={points_per_line} must be in 1..={n}"
        )));
    }

    let mut indices = Vec::new();
    let mut seen = HashSet::new();
    let spacing = n as f64 / points_per_line as f64;
    for line in 0..lines {
        let theta = std::f64::consts::PI * line as f64 / lines as f64;
        let (dir_u, dir_v) = (theta.cos(), theta.sin());
        for i in 0..points_per_line {
            let s = -(n as f64) / 2.0 + i as f64 * spacing;
            let u = wrap(round_away(s * dir_u), n);
            let v = wrap(round_away(s * dir_v), n);
            if seen.insert((u, v)) {
                indices.push((u, v));
            }
        }
    }
    if hermitian {
        let snapshot = indices.clone();
        for (u, v) in snapshot {
            let conj = ((n - u) % n, (n - v) % n);
            if seen.insert(conj) {
                indices.push(conj);
            }
        }
    }
    SamplingMask::new(n, n, MaskDomain::Fourier, indices, hermitian)
}

fn check_mask_grid(mask: &SamplingMask, width: usize, height: usize) -> Result<()> {
    if height != mask.n_t || width != mask.n_y {
        return Err(PhsdError::dims(format!(
            "mask is for a {}x{} grid, got {height}x{width}",
            mask.n_t, mask.n_y
        )));
    }
    Ok(())
}

/// Flat-value measurement; `values` is a full n_t x n_y grid in row-major
/// order and is consumed (the fourier path transforms it in place).
pub(crate) fn measure_values(mut values: Vec<Complex64>, mask: &SamplingMask) -> Vec<Complex64> {
    debug_assert_eq!(values.len(), mask.n_t * mask.n_y);
    if mask.domain == MaskDomain::Fourier {
        unitary_dft2_inplace(&mut values, mask.n_y, mask.n_t, false);
    }
    mask.indices.iter().map(|&(u, v)| values[u * mask.n_y + v]).collect()
}

/// Flat-value scatter (plus inverse DFT for fourier masks): the adjoint of
/// [`measure_values`].
pub(crate) fn scatter_values(meas: &[Complex64], mask: &SamplingMask) -> Vec<Complex64> {
    debug_assert_eq!(meas.len(), mask.len());
    let mut values = vec![Complex64::new(0.0, 0.0); mask.n_t * mask.n_y];
    for (&(u, v), &val) in mask.indices.iter().zip(meas) {
        values[u * mask.n_y + v] = val;
    }
    if mask.domain == MaskDomain::Fourier {
        unitary_dft2_inplace(&mut values, mask.n_y, mask.n_t, true);
    }
    values
}

/// Measure a complex grid: unitary 2-D DFT then extraction for fourier
/// masks, direct extraction for pixel masks.
pub fn measure_grid(grid: &ComplexGrid, mask: &SamplingMask) -> Result<MeasurementVector> {
    check_mask_grid(mask, grid.width, grid.height)?;
    let values = measure_values(grid.values.clone(), mask);
    Ok(MeasurementVector { values, mask_id: mask.id() })
}

/// Measure a real image.
pub fn measure(image: &Image, mask: &SamplingMask) -> Result<MeasurementVector> {
    measure_grid(&ComplexGrid::from_image(image), mask)
}

/// Adjoint of [`measure_grid`]: scatter the measurements onto a zero grid
/// and, for fourier masks, apply the inverse unitary 2-D DFT.
pub fn measure_adjoint(meas: &MeasurementVector, mask: &SamplingMask) -> Result<ComplexGrid> {
    if meas.values.len() != mask.len() {
        return Err(PhsdError::dims(format!(
            "measurement length {} does not match mask M={}",
            meas.values.len(),
            mask.len()
        )));
    }
    let values = scatter_values(&meas.values, mask);
    Ok(ComplexGrid { width: mask.n_y, height: mask.n_t, values })
}

/// A = Θ Φ: sparsifying synthesis followed by masked measurement. The
/// solvers only ever see this composition.
#[derive(Debug, Clone)]
pub struct ComposedOperator {
    mask: SamplingMask,
    transform: TransformHandle,
}

impl ComposedOperator {
    pub fn new(mask: SamplingMask, transform: TransformHandle) -> Result<Self> {
        if mask.n_t != transform.n_t() || mask.n_y != transform.n_y() {
            return Err(PhsdError::dims(format!(
                "mask grid {}x{} does not match transform grid {}x{}",
                mask.n_t,
                mask.n_y,
                transform.n_t(),
                transform.n_y()
            )));
        }
        Ok(Self { mask, transform })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn transform(&self) -> &TransformHandle {
        &self.transform
    }

    /// Coefficient-space dimension N = n_t * n_y.
    pub fn coefficient_len(&self) -> usize {
        self.mask.n_t * self.mask.n_y
    }

    /// Measurement-space dimension M.
    pub fn measurement_len(&self) -> usize {
        self.mask.len()
    }

    /// A β = Θ Φ β.
    pub fn apply(&self, beta: &CoefficientPyramid) -> Result<MeasurementVector> {
        let grid = self.transform.synthesize_grid(beta)?;
        measure_grid(&grid, &self.mask)
    }

    /// A^T y = Φ^T Θ^T y.
    pub fn apply_adjoint(&self, meas: &MeasurementVector) -> Result<CoefficientPyramid> {
        let grid = measure_adjoint(meas, &self.mask)?;
        self.transform.analyze_grid(&grid)
    }
}
