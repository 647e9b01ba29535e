//! Direction-dependent Markov measures.
//!
//! At a solved direction, `A(x0,y0) = x0 Σ_j y0^j A_{s0+j}` has Perron
//! root 1 with positive left/right eigenvectors `l, r` (normalized
//! `l·r = 1`). The stochastic matrix `Π_jk = a_jk r_k / r_j` with
//! stationary vector `q_j = l_j r_j` defines a shift-invariant measure
//! whose metric entropy equals the directional entropy and whose expected
//! weight per step is `cot θ`.

use crate::entropy_solver::{DirectionSolution, SolutionStatus};
use crate::spectral::{power_pair, SpectralFailure};
use crate::symbolic_graph::WeightedGraph;
use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

/// Residual tolerance for stochasticity/stationarity checks.
pub const MEASURE_TOL: f64 = 1e-12;
/// `|λ_min|` below this counts as a zero eigenvalue...
const ZERO_EIG_TOL: f64 = 1e-9;
/// ...provided the next eigenvalue is at least this far away.
const SPECTRAL_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("matrix is not primitive")]
    NonPrimitive,
    #[error("power iteration did not converge")]
    NoConvergence,
    #[error("matrix is not nonnegative")]
    NotNonnegative,
    #[error("direction solution is not an interior solve")]
    InvalidSolution,
    #[error("spectral radius of A(x0,y0) is {0}, expected 1")]
    NotUnitRadius(f64),
    #[error("zero is not a simple spectral point (|λ|min = {lambda_min:e}, gap = {gap:e})")]
    ZeroNotSimple { lambda_min: f64, gap: f64 },
}

impl From<SpectralFailure> for MeasureError {
    fn from(_: SpectralFailure) -> Self {
        MeasureError::NoConvergence
    }
}

/// Perron data of a primitive nonnegative matrix.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub lambda: f64,
    /// Left eigenvector, scaled so that `l·r = 1`.
    pub left: DVector<f64>,
    /// Right eigenvector, max-norm 1.
    pub right: DVector<f64>,
}

impl PerronData {
    /// The raw scaling with first components 1, convenient for eyeballing
    /// published eigenvector tables.
    pub fn left_raw(&self) -> DVector<f64> {
        &self.left / self.left[0]
    }

    pub fn right_raw(&self) -> DVector<f64> {
        &self.right / self.right[0]
    }
}

fn is_primitive_pattern(m: &DMatrix<f64>) -> bool {
    let p = m.nrows();
    let weights: Vec<Vec<Option<i64>>> = (0..p)
        .map(|i| (0..p).map(|j| (m[(i, j)] > 0.0).then_some(0)).collect())
        .collect();
    match WeightedGraph::from_weights(weights) {
        Ok(g) => g.primitivity().0,
        Err(_) => false,
    }
}

/// Dominant eigenvalue and positive eigenvector pair of a primitive
/// nonnegative matrix, by two-sided power iteration.
pub fn perron(m: &DMatrix<f64>) -> Result<PerronData, MeasureError> {
    if m.iter().any(|&x| x < 0.0) {
        return Err(MeasureError::NotNonnegative);
    }
    if !is_primitive_pattern(m) {
        return Err(MeasureError::NonPrimitive);
    }
    let pair = power_pair(m)?;
    Ok(PerronData { lambda: pair.lambda, left: pair.left, right: pair.right })
}

/// The Markov measure `μ_Π` of one solved direction.
#[derive(Clone, Debug)]
pub struct MarkovMeasure {
    pub pi: DMatrix<f64>,
    pub q: DVector<f64>,
    /// Perron pair of `A(x0, y0)` the measure was built from.
    pub perron: PerronData,
    pub x0: f64,
    pub y0: f64,
    pub alpha_true: f64,
}

/// Builds `Π` and `q` from `A(x0, y0)`. The support of `Π` equals the
/// support of `A` and rows sum to 1 up to the Perron residual.
pub fn build_measure(
    g: &WeightedGraph,
    sol: &DirectionSolution,
    alpha_true: f64,
) -> Result<MarkovMeasure, MeasureError> {
    if sol.status != SolutionStatus::Interior {
        return Err(MeasureError::InvalidSolution);
    }
    let p = g.state_count();
    let a = DMatrix::from_fn(p, p, |i, j| match g.shifted_weight(i, j) {
        Some(s) => sol.x0 * sol.y0.powi(s as i32),
        None => 0.0,
    });
    let perron_data = perron(&a)?;
    if (perron_data.lambda - 1.0).abs() > 1e-8 {
        return Err(MeasureError::NotUnitRadius(perron_data.lambda));
    }
    let r = &perron_data.right;
    let l = &perron_data.left;
    let pi = DMatrix::from_fn(p, p, |i, j| a[(i, j)] * r[j] / r[i]);
    let q = DVector::from_fn(p, |i, _| l[i] * r[i]);
    Ok(MarkovMeasure { pi, q, perron: perron_data, x0: sol.x0, y0: sol.y0, alpha_true })
}

/// Metric entropy `-Σ q_j Π_jk ln Π_jk` in nats; zero entries contribute 0.
pub fn measure_entropy(measure: &MarkovMeasure) -> f64 {
    let p = measure.pi.nrows();
    let mut h = 0.0;
    for j in 0..p {
        for k in 0..p {
            let pjk = measure.pi[(j, k)];
            if pjk > 0.0 {
                h -= measure.q[j] * pjk * pjk.ln();
            }
        }
    }
    h
}

/// `μ_Π([w]) = q_{w0} Π_{w0 w1} … Π_{w_{n-2} w_{n-1}}`; 0 for
/// inadmissible words.
pub fn cylinder_measure(measure: &MarkovMeasure, word: &[usize]) -> f64 {
    assert!(!word.is_empty());
    let mut mu = measure.q[word[0]];
    for t in 1..word.len() {
        mu *= measure.pi[(word[t - 1], word[t])];
    }
    mu
}

/// Expected weight per symbolic step, `Σ q_j Π_jk k_jk` with the true
/// (unshifted) weights; equals `cot θ` for the direction-matched measure.
pub fn expected_drift(measure: &MarkovMeasure, g: &WeightedGraph) -> f64 {
    let p = g.state_count();
    let mut drift = 0.0;
    for j in 0..p {
        for k in 0..p {
            if let Some(w) = g.weight(j, k) {
                drift += measure.q[j] * measure.pi[(j, k)] * w as f64;
            }
        }
    }
    drift
}

/// Directional derivative of the determinant at a singular matrix:
/// for `B` with a simple zero eigenvalue, `D(det B)(X) = β (l X r)` where
/// `β` is the product of the nonzero eigenvalues and `l B = 0`, `B r = 0`,
/// `l·r = 1`. Returns `(finite difference, β(lXr))`.
pub fn det_derivative_check(
    b: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> Result<(f64, f64), MeasureError> {
    let p = b.nrows();
    assert_eq!(b.ncols(), p);
    assert_eq!((x.nrows(), x.ncols()), (p, p));

    let eigenvalues = b.clone().complex_eigenvalues();
    let mut mags: Vec<(f64, Complex<f64>)> =
        eigenvalues.iter().map(|&e| (e.norm(), e)).collect();
    mags.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let lambda_min = mags[0].0;
    let gap = mags.get(1).map_or(f64::INFINITY, |m| m.0);
    if lambda_min > ZERO_EIG_TOL || gap < SPECTRAL_GAP_TOL {
        return Err(MeasureError::ZeroNotSimple { lambda_min, gap });
    }
    let beta: Complex<f64> = mags[1..]
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, (_, e)| acc * e);
    let beta = beta.re;

    // kernel vectors via SVD: the singular direction of B (resp. B^T)
    let r = crate::spectral::kernel_vector(b).map_err(|_| MeasureError::NoConvergence)?;
    let l = crate::spectral::kernel_vector(&b.transpose())
        .map_err(|_| MeasureError::NoConvergence)?;
    let lr = l.dot(&r);
    if lr.abs() < 1e-12 {
        return Err(MeasureError::ZeroNotSimple { lambda_min, gap: lr.abs() });
    }
    let l = l / lr;

    let rhs = beta * (l.transpose() * x * &r)[(0, 0)];
    let eps = 1e-6;
    let lhs = ((b + x * eps).determinant() - (b - x * eps).determinant()) / (2.0 * eps);
    Ok((lhs, rhs))
}
