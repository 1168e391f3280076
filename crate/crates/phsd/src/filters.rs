//! Non-stationary interpolatory symbols and their orthonormal filter pairs.
//!
//! For order p and a per-level exponent lambda (expressed per unit of the
//! refined grid), the interpolatory symbol a(z) has center tap 1, vanishing
//! even taps, and symmetric odd taps equal to the weights of the unique
//! functional reproducing u(0) from u(+-1), u(+-3), ..., u(+-(2p-1)) for all
//! u in span{t^j e^{lambda t}, t^j e^{-lambda t} : j < p}. Equivalently, and
//! numerically far better behaved as lambda -> 0, the odd taps are the unique
//! solution of "a(z) vanishes to order p at z = -e^{-lambda}" (the mirrored
//! zeros at -e^{+lambda} follow from tap symmetry). At lambda = 0 this is the
//! classical 2p-point interpolatory construction.
//!
//! Factoring a(z) = h(z) h(z^{-1}) yields an orthonormal lowpass h of length
//! 2p (sum of squares 1) whose quadrature-mirror highpass completes a
//! decimated perfect-reconstruction pair. At lambda = 0 the pair is exactly
//! the classical Daubechies-p pair.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{PhsdError, Result};
use crate::textfmt::fmt_g17;

/// Per-level exponents are clamped here before filter construction; larger
/// values buy nothing once the filter has effectively localized and only
/// degrade the conditioning of the construction.
pub const LAMBDA_MAX: f64 = 2.0;

/// Supported subdivision orders.
pub const MAX_ORDER: u8 = 5;

const COND_LIMIT: f64 = 1e12;
const CIRCLE_GRID: usize = 4096;
const CIRCLE_NEG_TOL: f64 = -1e-12;
const UNIT_BAND: f64 = 1e-9;
const UNIT_PAIR_TOL: f64 = 1e-7;
const RESIDUAL_TOL: f64 = 1e-8;

/// Parameters a filter pair is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub order: u8,
    pub lambda_eff: f64,
}

/// Symmetric interpolatory symbol: taps a_k for k in -(2p-1)..=(2p-1).
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatorySymbol {
    order: u8,
    lambda_eff: f64,
    taps: Vec<f64>,
}

impl InterpolatorySymbol {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn lambda_eff(&self) -> f64 {
        self.lambda_eff
    }

    /// All taps, ascending k; index k + (2p-1).
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn tap(&self, k: isize) -> f64 {
        let half = (2 * self.order as isize) - 1;
        if k.abs() > half {
            0.0
        } else {
            self.taps[(k + half) as usize]
        }
    }

    /// Positive-side odd weights w_i = a_{2i-1}, i = 1..=p.
    pub fn odd_weights(&self) -> Vec<f64> {
        (1..=self.order as isize).map(|i| self.tap(2 * i - 1)).collect()
    }

    /// a(e^{i omega}); real by tap symmetry.
    pub fn eval_circle(&self, omega: f64) -> f64 {
        let mut acc = 1.0;
        for (i, w) in self.odd_weights().iter().enumerate() {
            let k = (2 * i + 1) as f64;
            acc += 2.0 * w * (k * omega).cos();
        }
        acc
    }

    /// Minimum over the standard 4096-point circle grid.
    pub fn min_on_circle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for j in 0..CIRCLE_GRID {
            let omega = 2.0 * std::f64::consts::PI * j as f64 / CIRCLE_GRID as f64;
            min = min.min(self.eval_circle(omega));
        }
        min
    }
}

/// Orthonormal analysis pair for one (order, lambda_eff) spec.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
    pub spec: FilterSpec,
    /// True when the requested exponent exceeded LAMBDA_MAX and was clamped.
    pub clamped: bool,
}

fn falling(m: i64, j: usize) -> f64 {
    let mut acc = 1.0;
    for q in 0..j as i64 {
        acc *= (m - q) as f64;
    }
    acc
}

/// Gaussian elimination with partial pivoting; None on a vanishing pivot.
fn lu_solve(a: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut m = a.to_owned();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| {
            m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap()
        })?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c2 in col..n {
                    m[r][c2] -= f * m[col][c2];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c2 in r + 1..n {
            s -= m[r][c2] * x[c2];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

fn norm1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|c| (0..n).map(|r| a[r][c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn cond1(a: &[Vec<f64>]) -> Option<f64> {
    let n = a.len();
    let mut inv_norm: f64 = 0.0;
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let col = lu_solve(a, &e)?;
        inv_norm = inv_norm.max(col.iter().map(|x| x.abs()).sum());
    }
    // columns of the inverse solve A x = e_i, so this is ||A^-1||_1 * ||A||_1
    Some(norm1(a) * inv_norm)
}

/// Classical 2p-point interpolation weights: Lagrange cardinal values at 0
/// over the odd nodes.
fn polynomial_odd_weights(p: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (0..2 * p)
        .map(|i| {
            let k = 2 * i as isize + 1 - 2 * p as isize;
            k as f64
        })
        .collect();
    let weight_at = |x: f64| -> f64 {
        let mut acc = 1.0;
        for &other in &nodes {
            if other != x {
                acc *= (0.0 - other) / (x - other);
            }
        }
        acc
    };
    // average the mirror nodes to kill last-ulp asymmetry
    (1..=p)
        .map(|i| {
            let k = (2 * i - 1) as f64;
            0.5 * (weight_at(k) + weight_at(-k))
        })
        .collect()
}

/// Odd weights for lambda > 0 from the zero conditions
/// d^j/dz^j a(z) = 0 at z = -e^{-lambda}, j = 0..p-1.
fn exponential_odd_weights(p: usize, lambda: f64) -> Result<Vec<f64>> {
    let z0 = -(-lambda).exp();
    let mut mat = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    rhs[0] = -1.0;
    for (j, row) in mat.iter_mut().enumerate() {
        for (i, entry) in row.iter_mut().enumerate() {
            let m = (2 * i + 1) as i64;
            *entry = falling(m, j) * z0.powi((m - j as i64) as i32)
                + falling(-m, j) * z0.powi((-m - j as i64) as i32);
        }
    }
    // equilibrate rows: derivative rows of order j shrink like lambda^(j mod 2)
    // near lambda = 0, so raw row scales would swamp the pivoting
    for (row, b) in mat.iter_mut().zip(rhs.iter_mut()) {
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(PhsdError::numerics(format!(
                "singular symbol system at order {p}, lambda {lambda}"
            )));
        }
        for x in row.iter_mut() {
            *x /= scale;
        }
        *b /= scale;
    }
    let cond = cond1(&mat).ok_or_else(|| {
        PhsdError::numerics(format!("singular symbol system at order {p}, lambda {lambda}"))
    })?;
    if cond > COND_LIMIT {
        return Err(PhsdError::numerics(format!(
            "symbol system condition {cond:.2e} exceeds {COND_LIMIT:.0e} (order {p}, lambda {lambda})"
        )));
    }
    lu_solve(&mat, &rhs).ok_or_else(|| {
        PhsdError::numerics(format!("singular symbol system at order {p}, lambda {lambda}"))
    })
}

/// Build the interpolatory symbol for the given order and exponent.
pub fn exp_dd_symbol(order: u8, lambda_eff: f64) -> Result<InterpolatorySymbol> {
    if order == 0 || order > MAX_ORDER {
        return Err(PhsdError::param(format!(
            "unsupported order {order}: expected 1..={MAX_ORDER}"
        )));
    }
    if !lambda_eff.is_finite() || lambda_eff < 0.0 {
        return Err(PhsdError::param(format!(
            "lambda_eff must be finite and nonnegative, got {lambda_eff}"
        )));
    }
    let p = order as usize;
    let weights = if lambda_eff == 0.0 {
        polynomial_odd_weights(p)
    } else {
        exponential_odd_weights(p, lambda_eff)?
    };
    let half = 2 * p - 1;
    let mut taps = vec![0.0; 4 * p - 1];
    taps[half] = 1.0;
    for (i, &w) in weights.iter().enumerate() {
        let k = 2 * i + 1;
        taps[half + k] = w;
        taps[half - k] = w;
    }
    Ok(InterpolatorySymbol { order, lambda_eff, taps })
}

/// Synthetic division of a descending-coefficient polynomial by (z - root);
/// returns the quotient and remainder.
fn deflate_root(desc: &[f64], root: f64) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(desc.len());
    let mut acc = 0.0;
    for &c in desc {
        acc = acc * root + c;
        out.push(acc);
    }
    let rem = out.pop().unwrap_or(0.0);
    (out, rem)
}

fn companion_roots(desc: &[f64]) -> Result<Vec<Complex64>> {
    let deg = desc.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = desc[0];
    let scale: f64 = desc.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if lead.abs() < 1e-14 * scale {
        return Err(PhsdError::numerics(
            "degenerate symbol: leading coefficient vanishes".to_string(),
        ));
    }
    // ascending monic coefficients c_0..c_{deg-1}
    let c: Vec<f64> = (0..deg).map(|j| desc[deg - j] / lead).collect();
    let m = nalgebra::DMatrix::<f64>::from_fn(deg, deg, |r, col| {
        if col == deg - 1 {
            -c[r]
        } else if r == col + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = m.complex_eigenvalues();
    Ok(eig.iter().map(|e| Complex64::new(e.re, e.im)).collect())
}

fn root_sort_key(r: &Complex64) -> (f64, f64) {
    (r.norm(), r.arg())
}

/// Factor a(z) = h(z) h(z^{-1}) and return the length-2p lowpass h, listed
/// so that h(1) = +sqrt(a(1)) and the minimum-phase zeros sit first (the
/// classical Daubechies listing at lambda = 0).
pub fn spectral_factorize(symbol: &InterpolatorySymbol) -> Result<Vec<f64>> {
    let p = symbol.order as usize;
    let lambda = symbol.lambda_eff;

    let min = symbol.min_on_circle();
    if min < CIRCLE_NEG_TOL {
        return Err(PhsdError::numerics(format!(
            "symbol is negative on the unit circle (min {min:.3e}); cannot factorize"
        )));
    }

    // q(z) = z^(2p-1) a(z), descending coefficients; palindromic.
    let mut desc: Vec<f64> = (0..4 * p - 1)
        .map(|j| symbol.tap(2 * p as isize - 1 - j as isize))
        .collect();
    let q_scale: f64 = desc.iter().map(|x| x.abs()).sum();

    // Deflate the reproduction zeros at -e^{+-lambda}. Dividing out the
    // outside copies directly would run Horner with a root of modulus e^lambda,
    // so reverse the coefficients first (roots map to reciprocals).
    let r_in = -(-lambda).exp();
    let mut selected: Vec<Complex64> = Vec::with_capacity(2 * p - 1);
    let check_rem = |rem: f64| -> Result<()> {
        if rem.abs() > RESIDUAL_TOL * q_scale {
            return Err(PhsdError::numerics(format!(
                "symbol lacks the expected zeros at -e^(+-lambda) (deflation remainder {rem:.3e})"
            )));
        }
        Ok(())
    };
    if lambda == 0.0 {
        // single root -1 of multiplicity 2p: split evenly
        for _ in 0..2 * p {
            let (quot, rem) = deflate_root(&desc, -1.0);
            check_rem(rem)?;
            desc = quot;
        }
        for _ in 0..p {
            selected.push(Complex64::new(-1.0, 0.0));
        }
    } else {
        for _ in 0..p {
            let (quot, rem) = deflate_root(&desc, r_in);
            check_rem(rem)?;
            desc = quot;
        }
        desc.reverse();
        for _ in 0..p {
            let (quot, rem) = deflate_root(&desc, r_in);
            check_rem(rem)?;
            desc = quot;
        }
        desc.reverse();
        // minimum-phase assignment: the inside copies go to h
        for _ in 0..p {
            selected.push(Complex64::new(r_in, 0.0));
        }
    }

    // Remaining factor has the 2p-2 spurious zeros in reciprocal pairs.
    let roots = companion_roots(&desc)?;
    let mut unit_band: Vec<Complex64> = Vec::new();
    for r in roots {
        let modulus = r.norm();
        if modulus < 1.0 - UNIT_BAND {
            selected.push(r);
        } else if modulus <= 1.0 + UNIT_BAND {
            unit_band.push(r);
        }
        // |r| > 1: reciprocal partner of an already-selected root
    }
    if !unit_band.is_empty() {
        unit_band.sort_by(|a, b| root_sort_key(a).partial_cmp(&root_sort_key(b)).unwrap());
        let mut clusters: Vec<Vec<Complex64>> = Vec::new();
        for r in unit_band {
            match clusters.last_mut() {
                Some(cl) if (r - cl[0]).norm() <= UNIT_PAIR_TOL => cl.push(r),
                _ => clusters.push(vec![r]),
            }
        }
        for cl in clusters {
            if cl.len() % 2 != 0 {
                return Err(PhsdError::numerics(format!(
                    "unit-circle zero near {:.6}+{:.6}i has odd multiplicity {}",
                    cl[0].re,
                    cl[0].im,
                    cl.len()
                )));
            }
            let mean = cl.iter().sum::<Complex64>() / cl.len() as f64;
            let snapped = mean / mean.norm();
            for _ in 0..cl.len() / 2 {
                selected.push(snapped);
            }
        }
    }
    if selected.len() != 2 * p - 1 {
        return Err(PhsdError::numerics(format!(
            "root selection produced {} zeros, expected {}",
            selected.len(),
            2 * p - 1
        )));
    }

    selected.sort_by(|a, b| root_sort_key(a).partial_cmp(&root_sort_key(b)).unwrap());

    // monic polynomial with the selected zeros, ascending coefficients
    let mut m = vec![Complex64::new(1.0, 0.0)];
    for r in &selected {
        let mut next = vec![Complex64::new(0.0, 0.0); m.len() + 1];
        for (k, &c) in m.iter().enumerate() {
            next[k] -= r * c;
            next[k + 1] += c;
        }
        m = next;
    }
    let coeff_scale = m.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    let max_im = m.iter().fold(0.0f64, |acc, c| acc.max(c.im.abs()));
    if max_im > 1e-9 * coeff_scale {
        return Err(PhsdError::numerics(format!(
            "selected zeros are not conjugate-closed (imaginary residue {max_im:.3e})"
        )));
    }
    let mr: Vec<f64> = m.iter().map(|c| c.re).collect();

    // scale so the zero-lag autocorrelation is exactly a_0 = 1; sign so that
    // h(1) = +sqrt(a(1))
    let sum_sq: f64 = mr.iter().map(|x| x * x).sum();
    let at_one: f64 = mr.iter().sum();
    if !(sum_sq > 0.0) || at_one.abs() < 1e-12 {
        return Err(PhsdError::numerics("degenerate factor polynomial".to_string()));
    }
    let c = at_one.signum() / sum_sq.sqrt();
    let h: Vec<f64> = (0..2 * p).map(|k| c * mr[2 * p - 1 - k]).collect();

    let acorr = autocorrelation(&h);
    let mut residual = 0.0f64;
    for (lag, &ac) in acorr.iter().enumerate() {
        residual = residual.max((ac - symbol.tap(lag as isize)).abs());
    }
    if residual > RESIDUAL_TOL {
        return Err(PhsdError::numerics(format!(
            "factorization residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    Ok(h)
}

/// Autocorrelation of a real filter: lag k = sum_j h_j h_{j+k}, k = 0..len-1.
pub fn autocorrelation(h: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|lag| (0..h.len() - lag).map(|j| h[j] * h[j + lag]).sum())
        .collect()
}

/// Quadrature-mirror highpass: g_k = (-1)^k h_{(2p-1)-k}.
pub fn highpass_from_lowpass(lowpass: &[f64]) -> Vec<f64> {
    let n = lowpass.len();
    (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * lowpass[n - 1 - k]
        })
        .collect()
}

/// Build the orthonormal pair for one spec.
pub fn build_filter_pair(spec: FilterSpec) -> Result<FilterPair> {
    let symbol = exp_dd_symbol(spec.order, spec.lambda_eff)?;
    let lowpass = spectral_factorize(&symbol)?;
    let highpass = highpass_from_lowpass(&lowpass);
    Ok(FilterPair { lowpass, highpass, spec, clamped: false })
}

/// Per-(frequency column, level step) filter pairs for the hybrid transform.
#[derive(Debug, Clone)]
pub struct FilterBank {
    order: u8,
    levels: u8,
    n_t: usize,
    n_y: usize,
    y_scale: f64,
    /// index (xi * levels + step-1) for xi in 0..=n_y/2
    pairs: Vec<FilterPair>,
    clamped_pairs: usize,
}

/// Build filter pairs for every frequency column xi = 0..=n_y/2 and level
/// step 1..=levels. Step l works on data of spacing 2^(l-1) original rows,
/// so the effective exponent is lambda(xi) * 2^(l-1), clamped to LAMBDA_MAX.
pub fn build_filter_bank(
    n_t: usize,
    n_y: usize,
    order: u8,
    levels: u8,
    y_scale: f64,
) -> Result<FilterBank> {
    if !n_t.is_power_of_two() || !n_y.is_power_of_two() || n_t < 2 || n_y < 2 {
        return Err(PhsdError::param(format!(
            "grid {n_t}x{n_y} must have power-of-two sides of at least 2"
        )));
    }
    if levels == 0 || (n_t >> levels) == 0 {
        return Err(PhsdError::param(format!(
            "levels={levels} does not fit n_t={n_t}: need 1 <= levels <= log2(n_t)"
        )));
    }
    if !y_scale.is_finite() || y_scale < 0.0 {
        return Err(PhsdError::param(format!(
            "y_scale must be finite and nonnegative, got {y_scale}"
        )));
    }
    if order == 0 || order > MAX_ORDER {
        return Err(PhsdError::param(format!(
            "unsupported order {order}: expected 1..={MAX_ORDER}"
        )));
    }

    let mut cache: HashMap<u64, FilterPair> = HashMap::new();
    let mut pairs = Vec::with_capacity((n_y / 2 + 1) * levels as usize);
    let mut clamped_pairs = 0usize;
    for xi in 0..=n_y / 2 {
        let lambda = y_scale * 2.0 * std::f64::consts::PI * xi as f64 / n_y as f64;
        for step in 1..=levels {
            let raw = lambda * (1u64 << (step - 1)) as f64;
            let clamped = raw > LAMBDA_MAX;
            let lambda_eff = if clamped { LAMBDA_MAX } else { raw };
            let mut pair = match cache.get(&lambda_eff.to_bits()) {
                Some(p) => p.clone(),
                None => {
                    let p = build_filter_pair(FilterSpec { order, lambda_eff })?;
                    cache.insert(lambda_eff.to_bits(), p.clone());
                    p
                }
            };
            pair.clamped = clamped;
            if clamped {
                clamped_pairs += 1;
            }
            pairs.push(pair);
        }
    }
    Ok(FilterBank { order, levels, n_t, n_y, y_scale, pairs, clamped_pairs })
}

impl FilterBank {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn y_scale(&self) -> f64 {
        self.y_scale
    }

    /// Number of (xi, step) slots whose exponent hit the LAMBDA_MAX clamp.
    pub fn clamped_pairs(&self) -> usize {
        self.clamped_pairs
    }

    /// Pair for frequency column xi (any 0..n_y; mirrored columns share
    /// filters) at level step 1..=levels.
    pub fn pair(&self, xi: usize, step: u8) -> &FilterPair {
        debug_assert!(xi < self.n_y && step >= 1 && step <= self.levels);
        let folded = xi.min(self.n_y - xi);
        &self.pairs[folded * self.levels as usize + (step - 1) as usize]
    }

    /// Debug dump: `xi level tap value` per line, lowpass taps, 17
    /// significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for xi in 0..=self.n_y / 2 {
            for step in 1..=self.levels {
                let pair = self.pair(xi, step);
                for (t, v) in pair.lowpass.iter().enumerate() {
                    out.push_str(&format!("{xi} {step} {t} {}\n", fmt_g17(*v)));
                }
            }
        }
        out
    }
}
