//! l1 recovery: Lasso by accelerated proximal gradient (FISTA) and
//! equality-constrained Basis Pursuit by Douglas-Rachford splitting.
//!
//! Both solvers see the measurement operator only through the matrix-free
//! [`MeasurementOperator`] trait, so they run unchanged on the real
//! mask-plus-basis composition and on small synthetic operators in tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PhsdError, Result};
use crate::pyramid::CoefficientPyramid;
use crate::sensing::{ComposedOperator, MeasurementVector};

/// Iterations used for the internal step-size power iteration.
const NORM_ITERS: usize = 60;
const NORM_SEED: u64 = 0x7068_7364; // arbitrary fixed seed, keeps runs deterministic
const PROBE_SEED: u64 = 0x70726f62;
const ROW_ORTHO_TOL: f64 = 1e-8;

/// A linear map from coefficient space to measurement space together with
/// its adjoint, applied matrix-free on flat complex vectors.
pub trait MeasurementOperator: Sync {
    fn coefficient_len(&self) -> usize;
    fn measurement_len(&self) -> usize;
    /// A beta. `beta` has length `coefficient_len`.
    fn apply_flat(&self, beta: &[Complex64]) -> Vec<Complex64>;
    /// A^T y. `meas` has length `measurement_len`.
    fn adjoint_flat(&self, meas: &[Complex64]) -> Vec<Complex64>;
}

impl MeasurementOperator for ComposedOperator {
    fn coefficient_len(&self) -> usize {
        ComposedOperator::coefficient_len(self)
    }

    fn measurement_len(&self) -> usize {
        ComposedOperator::measurement_len(self)
    }

    fn apply_flat(&self, beta: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(beta.len(), self.coefficient_len());
        let grid = self.transform().synthesize_values(beta.to_vec());
        crate::sensing::measure_values(grid, self.mask())
    }

    fn adjoint_flat(&self, meas: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(meas.len(), self.measurement_len());
        let grid = crate::sensing::scatter_values(meas, self.mask());
        self.transform().analyze_values(grid)
    }
}

/// Which objective a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// min ||beta||_1 subject to A beta = y.
    Bp,
    /// min 1/2 ||A beta - y||_2^2 + mu ||beta||_1.
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolveMethod,
    /// Lasso penalty weight.
    pub mu: f64,
    /// Douglas-Rachford prox scale (the l1 threshold of the splitting step).
    pub gamma: f64,
    pub iterations: usize,
    /// Gradient step for Lasso; default is 1/L^2 from a power iteration.
    pub step_override: Option<f64>,
    /// Stop early when the relative iterate change drops below this; 0 runs
    /// the full budget.
    pub tol: f64,
}

impl SolverConfig {
    pub fn bp() -> Self {
        Self {
            method: SolveMethod::Bp,
            mu: 1.0,
            gamma: 100.0,
            iterations: 10,
            step_override: None,
            tol: 0.0,
        }
    }

    pub fn lasso() -> Self {
        Self { method: SolveMethod::Lasso, ..Self::bp() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(PhsdError::param("iterations must be at least 1"));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(PhsdError::param(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(PhsdError::param(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(PhsdError::param(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        if let Some(s) = self.step_override {
            if !(s > 0.0) || !s.is_finite() {
                return Err(PhsdError::param(format!("step_override must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Solver output on flat coefficient vectors.
#[derive(Debug, Clone)]
pub struct FlatSolveResult {
    pub beta: Vec<Complex64>,
    pub iterations_run: usize,
    /// Per-iteration objective: the Lasso objective, or ||.||_1 of the prox
    /// iterate for Basis Pursuit.
    pub objective_trace: Vec<f64>,
    /// Final ||A beta - y||_2.
    pub residual: f64,
    /// Final Lasso stationarity gap; absent for Basis Pursuit.
    pub kkt_residual: Option<f64>,
}

/// Solver output with the coefficients wrapped back into a pyramid.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub beta: CoefficientPyramid,
    pub iterations_run: usize,
    pub objective_trace: Vec<f64>,
    pub residual: f64,
    pub kkt_residual: Option<f64>,
}

/// Proximal operator of tau |.| on the complex plane: shrink the modulus,
/// keep the phase.
pub fn soft_threshold(z: Complex64, tau: f64) -> Complex64 {
    debug_assert!(tau >= 0.0);
    let norm = z.norm();
    if norm <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((norm - tau) / norm)
    }
}

fn soft_threshold_vec(z: &[Complex64], tau: f64) -> Vec<Complex64> {
    z.iter().map(|&v| soft_threshold(v, tau)).collect()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Power-iteration trace of ||A v_k|| for v_k normalized; nondecreasing and
/// convergent to the operator norm ||A||_2.
pub fn operator_norm_trace<O: MeasurementOperator + ?Sized>(
    op: &O,
    iters: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_complex(&mut rng, op.coefficient_len());
    let mut trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        let nv = norm2(&v);
        if nv == 0.0 {
            trace.push(0.0);
            break;
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        let av = op.apply_flat(&v);
        trace.push(norm2(&av));
        v = op.adjoint_flat(&av);
    }
    trace
}

/// Power-iteration estimate of ||A||_2 from a seeded random start.
pub fn operator_norm<O: MeasurementOperator + ?Sized>(op: &O, iters: usize, seed: u64) -> f64 {
    operator_norm_trace(op, iters, seed).last().copied().unwrap_or(0.0)
}

/// Lasso stationarity gap at `beta`: with r = A^T(A beta - y), the largest
/// violation of |r_i| <= mu on the zero set and r_i = -mu beta_i/|beta_i|
/// on the support. Zero exactly at a minimizer.
pub fn kkt_residual<O: MeasurementOperator + ?Sized>(
    op: &O,
    y: &[Complex64],
    beta: &[Complex64],
    mu: f64,
) -> f64 {
    let ab = op.apply_flat(beta);
    let r = op.adjoint_flat(&sub(&ab, y));
    let mut worst = 0.0f64;
    for (&b, &ri) in beta.iter().zip(&r) {
        let gap = if b == Complex64::new(0.0, 0.0) {
            (ri.norm() - mu).max(0.0)
        } else {
            (ri + b * (mu / b.norm())).norm()
        };
        worst = worst.max(gap);
    }
    worst
}

fn check_dims<O: MeasurementOperator + ?Sized>(op: &O, y: &[Complex64]) -> Result<()> {
    if op.measurement_len() == 0 {
        return Err(PhsdError::param("operator has no measurements"));
    }
    if y.len() != op.measurement_len() {
        return Err(PhsdError::dims(format!(
            "measurement length {} does not match operator M={}",
            y.len(),
            op.measurement_len()
        )));
    }
    Ok(())
}

/// FISTA on min 1/2 ||A beta - y||^2 + mu ||beta||_1, started at zero.
pub fn lasso_fista_flat<O: MeasurementOperator + ?Sized>(
    op: &O,
    y: &[Complex64],
    cfg: &SolverConfig,
) -> Result<FlatSolveResult> {
    cfg.validate()?;
    if cfg.method != SolveMethod::Lasso {
        return Err(PhsdError::param("lasso_fista requires method = lasso"));
    }
    check_dims(op, y)?;

    let step = match cfg.step_override {
        Some(s) => s,
        None => {
            let l = operator_norm(op, NORM_ITERS, NORM_SEED);
            if l > 0.0 {
                1.0 / (l * l)
            } else {
                1.0
            }
        }
    };

    let n = op.coefficient_len();
    let mut beta = vec![Complex64::new(0.0, 0.0); n];
    let mut w = beta.clone();
    let mut t = 1.0f64;
    let mut trace = Vec::with_capacity(cfg.iterations);

    for _ in 0..cfg.iterations {
        let aw = op.apply_flat(&w);
        let grad = op.adjoint_flat(&sub(&aw, y));
        let next: Vec<Complex64> = w
            .iter()
            .zip(&grad)
            .map(|(&wi, &gi)| soft_threshold(wi - step * gi, step * cfg.mu))
            .collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        w = next
            .iter()
            .zip(&beta)
            .map(|(&ni, &bi)| ni + momentum * (ni - bi))
            .collect();
        t = t_next;

        let delta = norm2(&sub(&next, &beta));
        let base = norm2(&beta);
        beta = next;

        let resid = norm2(&sub(&op.apply_flat(&beta), y));
        let objective = 0.5 * resid * resid + cfg.mu * norm1(&beta);
        if !objective.is_finite() {
            return Err(PhsdError::numerics(
                "Lasso objective diverged; check step_override against the operator norm",
            ));
        }
        trace.push(objective);

        if cfg.tol > 0.0 && delta < cfg.tol * base.max(1e-30) {
            break;
        }
    }

    let residual = norm2(&sub(&op.apply_flat(&beta), y));
    let kkt = kkt_residual(op, y, &beta, cfg.mu);
    Ok(FlatSolveResult {
        iterations_run: trace.len(),
        objective_trace: trace,
        residual,
        kkt_residual: Some(kkt),
        beta,
    })
}

/// Exact projection onto {beta : A beta = y}, valid because A A^T = I.
fn project_affine<O: MeasurementOperator + ?Sized>(
    op: &O,
    y: &[Complex64],
    beta: &[Complex64],
) -> Vec<Complex64> {
    let ab = op.apply_flat(beta);
    let corr = op.adjoint_flat(&sub(y, &ab));
    beta.iter().zip(&corr).map(|(&b, &c)| b + c).collect()
}

/// Douglas-Rachford splitting on min ||beta||_1 subject to A beta = y.
///
/// Requires A A^T = I (verified once by a random probe) so the affine
/// projection beta + A^T(y - A beta) is exact; the returned iterate is
/// projected, hence feasible to machine precision.
pub fn bp_douglas_rachford_flat<O: MeasurementOperator + ?Sized>(
    op: &O,
    y: &[Complex64],
    cfg: &SolverConfig,
) -> Result<FlatSolveResult> {
    cfg.validate()?;
    if cfg.method != SolveMethod::Bp {
        return Err(PhsdError::param("bp_douglas_rachford requires method = bp"));
    }
    check_dims(op, y)?;

    // row-orthonormality probe: ||A A^T u - u|| <= tol ||u||
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let u = random_complex(&mut rng, op.measurement_len());
    let aat_u = op.apply_flat(&op.adjoint_flat(&u));
    let probe = norm2(&sub(&aat_u, &u)) / norm2(&u).max(1e-300);
    if probe > ROW_ORTHO_TOL {
        return Err(PhsdError::numerics(format!(
            "operator rows are not orthonormal (AA^T probe residual {probe:.3e}); \
             Basis Pursuit needs distinct mask indices and an orthonormal basis"
        )));
    }

    let mut z = op.adjoint_flat(y);
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut prev_x: Option<Vec<Complex64>> = None;

    for _ in 0..cfg.iterations {
        let x = soft_threshold_vec(&z, cfg.gamma);
        let refl: Vec<Complex64> = x.iter().zip(&z).map(|(&xi, &zi)| 2.0 * xi - zi).collect();
        let p = project_affine(op, y, &refl);
        for ((zi, &pi), &xi) in z.iter_mut().zip(&p).zip(&x) {
            *zi += pi - xi;
        }

        let objective = norm1(&x);
        if !objective.is_finite() {
            return Err(PhsdError::numerics("Basis Pursuit iterate diverged"));
        }
        trace.push(objective);

        let stop = match (&prev_x, cfg.tol > 0.0) {
            (Some(old), true) => norm2(&sub(&x, old)) < cfg.tol * norm2(old).max(1e-30),
            _ => false,
        };
        prev_x = Some(x);
        if stop {
            break;
        }
    }

    let x = soft_threshold_vec(&z, cfg.gamma);
    let beta = project_affine(op, y, &x);
    let residual = norm2(&sub(&op.apply_flat(&beta), y));
    Ok(FlatSolveResult {
        iterations_run: trace.len(),
        objective_trace: trace,
        residual,
        kkt_residual: None,
        beta,
    })
}

fn wrap_result(op: &ComposedOperator, flat: FlatSolveResult) -> Result<SolveResult> {
    let t = op.transform();
    let beta =
        CoefficientPyramid::new(t.n_t(), t.n_y(), t.levels(), t.basis_tag(), flat.beta)?;
    Ok(SolveResult {
        beta,
        iterations_run: flat.iterations_run,
        objective_trace: flat.objective_trace,
        residual: flat.residual,
        kkt_residual: flat.kkt_residual,
    })
}

/// [`lasso_fista_flat`] on the composed operator, returning a pyramid.
pub fn lasso_fista(
    op: &ComposedOperator,
    y: &MeasurementVector,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    wrap_result(op, lasso_fista_flat(op, &y.values, cfg)?)
}

/// [`bp_douglas_rachford_flat`] on the composed operator, returning a pyramid.
pub fn bp_douglas_rachford(
    op: &ComposedOperator,
    y: &MeasurementVector,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    wrap_result(op, bp_douglas_rachford_flat(op, &y.values, cfg)?)
}
