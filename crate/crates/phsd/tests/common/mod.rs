//! Shared helpers for integration tests: synthetic operators and instances.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use phsd::MeasurementOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

/// M distinct rows of the unitary DFT matrix on C^n: the canonical
/// synthetic partial-unitary operator (A A^T = I).
pub struct DftRowsOperator {
    pub n: usize,
    pub rows: Vec<usize>,
}

impl DftRowsOperator {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        assert!(m <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = rand::seq::index::sample(&mut rng, n, m).into_vec();
        Self { n, rows }
    }

    fn fft(&self, values: &mut [Complex64], inverse: bool) {
        let mut planner = FftPlanner::new();
        let plan = if inverse {
            planner.plan_fft_inverse(self.n)
        } else {
            planner.plan_fft_forward(self.n)
        };
        plan.process(values);
        let scale = 1.0 / (self.n as f64).sqrt();
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    /// Explicit matrix column j = A e_j, for brute-force oracles.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        let mut e = vec![Complex64::new(0.0, 0.0); self.n];
        e[j] = Complex64::new(1.0, 0.0);
        self.apply_flat(&e)
    }
}

impl MeasurementOperator for DftRowsOperator {
    fn coefficient_len(&self) -> usize {
        self.n
    }

    fn measurement_len(&self) -> usize {
        self.rows.len()
    }

    fn apply_flat(&self, beta: &[Complex64]) -> Vec<Complex64> {
        let mut hat = beta.to_vec();
        self.fft(&mut hat, false);
        self.rows.iter().map(|&r| hat[r]).collect()
    }

    fn adjoint_flat(&self, meas: &[Complex64]) -> Vec<Complex64> {
        let mut hat = vec![Complex64::new(0.0, 0.0); self.n];
        for (&r, &v) in self.rows.iter().zip(meas) {
            hat[r] = v;
        }
        self.fft(&mut hat, true);
        hat
    }
}

/// K unit-magnitude spikes with random signs at distinct positions.
pub fn sparse_spikes(n: usize, k: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut beta = vec![Complex64::new(0.0, 0.0); n];
    for idx in support {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        beta[idx] = Complex64::new(sign, 0.0);
    }
    beta
}

pub fn support_of(beta: &[Complex64], tol: f64) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > tol)
        .map(|(i, _)| i)
        .collect()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least-squares solve of A_S c = y on one candidate support; the l1 norm of
/// the fit when its residual is within feas_tol, None otherwise.
fn support_l1(
    columns: &[Vec<Complex64>],
    support: &[usize],
    y: &DMatrix<Complex64>,
    feas_tol: f64,
) -> Option<f64> {
    let m = y.nrows();
    let a = DMatrix::from_fn(m, support.len(), |r, c| columns[support[c]][r]);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(y, 1e-12).ok()?;
    let residual = (&a * &c - y).norm();
    if residual > feas_tol {
        return None;
    }
    Some(c.iter().map(|z| z.norm()).sum())
}

/// Brute-force oracle: every support of size 1..=k_max whose least-squares
/// fit reproduces y within feas_tol, together with the fit's l1 norm.
pub fn feasible_supports(
    op: &DftRowsOperator,
    y_vec: &[Complex64],
    k_max: usize,
    feas_tol: f64,
) -> Vec<(Vec<usize>, f64)> {
    let n = op.n;
    let y = DMatrix::from_fn(y_vec.len(), 1, |r, _| y_vec[r]);
    let columns: Vec<Vec<Complex64>> = (0..n).map(|j| op.column(j)).collect();

    let mut feasible = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(support) = stack.pop() {
        if let Some(l1) = support_l1(&columns, &support, &y, feas_tol) {
            feasible.push((support.clone(), l1));
        }
        if support.len() < k_max {
            let last = *support.last().unwrap();
            for nxt in last + 1..n {
                let mut extended = support.clone();
                extended.push(nxt);
                stack.push(extended);
            }
        }
    }
    feasible
}
