//! Coefficient container shared by both transforms, plus sparsity utilities.

use num_complex::Complex64;
use std::fmt;

use crate::error::{PhsdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Phsd,
    Daub2d,
}

impl BasisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::Phsd => "phsd",
            BasisKind::Daub2d => "daub2d",
        }
    }
}

/// Identifies the transform that produced a pyramid, e.g. "phsd-p2".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTag {
    pub kind: BasisKind,
    pub order: u8,
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-p{}", self.kind.as_str(), self.order)
    }
}

/// Flat complex coefficient grid, one packed cascade per frequency column
/// for the hybrid transform or a Mallat square for the separable one.
/// Layout matches the source grid: `values[t * n_y + xi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPyramid {
    pub n_t: usize,
    pub n_y: usize,
    pub levels: u8,
    pub basis_tag: BasisTag,
    pub values: Vec<Complex64>,
}

impl CoefficientPyramid {
    pub fn new(
        n_t: usize,
        n_y: usize,
        levels: u8,
        basis_tag: BasisTag,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(PhsdError::param("pyramid needs at least one level"));
        }
        if n_t == 0 || n_t % (1usize << levels) != 0 {
            return Err(PhsdError::dims(format!(
                "n_t={n_t} is not divisible by 2^levels={}",
                1usize << levels
            )));
        }
        if values.len() != n_t * n_y {
            return Err(PhsdError::dims(format!(
                "pyramid holds {} values, expected {}",
                values.len(),
                n_t * n_y
            )));
        }
        Ok(CoefficientPyramid { n_t, n_y, levels, basis_tag, values })
    }

    pub fn sparsity_report(&self, threshold: f64) -> SparsityReport {
        sparsity_report(&self.values, threshold)
    }

    pub fn keep_top_k(&self, k: usize) -> CoefficientPyramid {
        CoefficientPyramid {
            values: keep_top_k(&self.values, k),
            ..self.clone()
        }
    }

    /// Largest relative deviation from column-conjugate symmetry
    /// (column xi vs conjugated column (n_y - xi) mod n_y). Real-input
    /// hybrid pyramids satisfy this to rounding error.
    pub fn column_conjugate_asymmetry(&self) -> f64 {
        let mut max_dev = 0.0f64;
        let mut max_abs = 0.0f64;
        for t in 0..self.n_t {
            for xi in 0..self.n_y {
                let a = self.values[t * self.n_y + xi];
                let b = self.values[t * self.n_y + (self.n_y - xi) % self.n_y];
                max_dev = max_dev.max((a - b.conj()).norm());
                max_abs = max_abs.max(a.norm());
            }
        }
        if max_abs > 0.0 {
            max_dev / max_abs
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityReport {
    pub threshold: f64,
    /// Number of coefficients with modulus strictly above the threshold.
    pub k: usize,
    /// Fraction of total energy carried by those coefficients
    /// (1.0 for an all-zero input by convention).
    pub energy_fraction: f64,
}

pub fn sparsity_report(values: &[Complex64], threshold: f64) -> SparsityReport {
    let mut k = 0usize;
    let mut kept = 0.0f64;
    let mut total = 0.0f64;
    for v in values {
        let e = v.norm_sqr();
        total += e;
        if v.norm() > threshold {
            k += 1;
            kept += e;
        }
    }
    let energy_fraction = if total > 0.0 { kept / total } else { 1.0 };
    SparsityReport { threshold, k, energy_fraction }
}

/// Zero all but the k largest-modulus entries. Ties are broken in favor of
/// the lower linear index.
pub fn keep_top_k(values: &[Complex64], k: usize) -> Vec<Complex64> {
    if k >= values.len() {
        return values.to_vec();
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .norm()
            .partial_cmp(&values[a].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for &idx in order.iter().take(k) {
        out[idx] = values[idx];
    }
    out
}
