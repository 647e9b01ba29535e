//! Directional entropy solver.
//!
//! For a direction `θ` with `α = cot θ - s0` strictly inside the (shifted)
//! rotation interval, the stationarity system
//!
//! ```text
//! H(x, y) = 0,    α x ∂x H = y ∂y H
//! ```
//!
//! has a unique positive solution `(x0, y0)` at which the spectral radius
//! of `x0 Σ_j y0^j A_{s0+j}` equals 1, and the directional entropy is
//! `h = -ln x0 - α ln y0`.
//!
//! The primary solve route is spectral: `ρ(y)` is the Perron root of the
//! layer polynomial `Σ_j y^j A_{s0+j}` and the logarithmic derivative
//! `drift(y) = y ρ'(y) / ρ(y)` is nondecreasing, so `drift(y0) = α` is
//! found by bisection and `x0 = 1/ρ(y0)`. This automatically picks the
//! minimal solution and cannot land on a non-Perron branch; the exact
//! polynomial system is then evaluated as an independent residual check.

use crate::genfun::{denominator_h, eval_with_partials, numerator_matrix, BivarPoly, PolyJet};
use crate::spectral::{power_pair, SpectralFailure, SpectralPair};
use crate::symbolic_graph::{rotation_interval, RotationInterval, WeightedGraph};
use crate::word_counts::ln_biguint;
use nalgebra::DMatrix;
use num_bigint::BigUint;
use rayon::prelude::*;
use thiserror::Error;

/// Residual tolerance for the exact-polynomial cross-check.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Detection margin for rotation-interval endpoints.
pub const ENDPOINT_MARGIN: f64 = 1e-9;
/// Bisection bracket for `y`.
pub const BRACKET: (f64, f64) = (1e-12, 1e12);
const BISECT_ITERS: usize = 200;
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("transition matrix is not primitive")]
    NonPrimitive,
    #[error("power iteration did not converge")]
    NoConvergence,
    #[error("graph has no cycle")]
    NoCycle,
    #[error("stationarity residual {value:e} exceeds tolerance ({which})")]
    ResidualTooLarge { which: &'static str, value: f64 },
    #[error("drift never attains alpha within the bisection bracket")]
    BracketFailure,
    #[error("numerator or curvature vanishes at the solution; asymptotics invalid")]
    DegenerateEntry,
    #[error("entropy curve needs at least 2 samples")]
    TooFewSamples,
}

impl From<SpectralFailure> for SolveError {
    fn from(_: SpectralFailure) -> Self {
        SolveError::NoConvergence
    }
}

/// A direction, parameterized by `α = cot θ`.
#[derive(Clone, Copy, Debug)]
pub struct DirectionSpec {
    /// `cot θ`, the user-facing slope.
    pub alpha_true: f64,
    /// `cot θ - s0`, the solver's coordinate.
    pub alpha_shifted: f64,
    /// `θ` on the principal branch `(0, π)`.
    pub theta: f64,
}

impl DirectionSpec {
    pub fn from_alpha(alpha_true: f64, g: &WeightedGraph) -> Self {
        DirectionSpec {
            alpha_true,
            alpha_shifted: alpha_true - g.s0() as f64,
            theta: std::f64::consts::FRAC_PI_2 - alpha_true.atan(),
        }
    }

    pub fn from_theta(theta: f64, g: &WeightedGraph) -> Self {
        assert!(theta > 0.0 && theta < std::f64::consts::PI);
        let alpha_true = theta.cos() / theta.sin();
        DirectionSpec {
            alpha_true,
            alpha_shifted: alpha_true - g.s0() as f64,
            theta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionStatus {
    /// Solved strictly inside the rotation interval.
    Interior,
    /// `cot θ` outside the rotation interval: entropy 0, no `(x0, y0)`.
    OutsideInterval,
    /// Endpoint direction: `drift` attains `α` only in the limit; entropy
    /// is a one-sided extrapolation.
    Boundary,
}

/// Solution data for one direction.
#[derive(Clone, Copy, Debug)]
pub struct DirectionSolution {
    pub status: SolutionStatus,
    pub x0: f64,
    pub y0: f64,
    /// `-ln x0 - α ln y0` in nats.
    pub entropy: f64,
    pub q_value: f64,
    /// `|H(x0, y0)|` from the exact polynomial.
    pub residual_h: f64,
    /// `|α x0 H_x - y0 H_y|` from the exact polynomial.
    pub residual_ray: f64,
    /// Some diagonal numerator entry is nonzero at `(x0, y0)`.
    pub f_nonzero_diag: bool,
    pub q_nonzero: bool,
    pub on_boundary: bool,
}

impl DirectionSolution {
    fn degenerate_outside() -> Self {
        DirectionSolution {
            status: SolutionStatus::OutsideInterval,
            x0: f64::NAN,
            y0: f64::NAN,
            entropy: 0.0,
            q_value: f64::NAN,
            residual_h: 0.0,
            residual_ray: 0.0,
            f_nonzero_diag: false,
            q_nonzero: false,
            on_boundary: false,
        }
    }
}

fn layer_matrix(g: &WeightedGraph, y: f64) -> DMatrix<f64> {
    let p = g.state_count();
    DMatrix::from_fn(p, p, |i, j| match g.shifted_weight(i, j) {
        Some(s) => y.powi(s as i32),
        None => 0.0,
    })
}

fn layer_matrix_tilde(g: &WeightedGraph, y: f64) -> DMatrix<f64> {
    let p = g.state_count();
    DMatrix::from_fn(p, p, |i, j| match g.shifted_weight(i, j) {
        Some(s) => s as f64 * y.powi(s as i32),
        None => 0.0,
    })
}

fn rho_and_drift(g: &WeightedGraph, y: f64) -> Result<(f64, f64, SpectralPair), SolveError> {
    let m = layer_matrix(g, y);
    let pair = power_pair(&m)?;
    let tilde = layer_matrix_tilde(g, y);
    let lr = pair.left.dot(&pair.right);
    let drift = pair.left.dot(&(&tilde * &pair.right)) / (pair.lambda * lr);
    Ok((pair.lambda, drift, pair))
}

/// Perron root `ρ(y)` of `Σ_j y^j A_{s0+j}` (shifted exponents) together
/// with the drift `y ρ'(y)/ρ(y)`, computed from the eigenvector
/// perturbation identity `drift = l·Ã·r / (l·A·r)`.
pub fn layer_spectral_radius(g: &WeightedGraph, y: f64) -> Result<(f64, f64), SolveError> {
    assert!(y > 0.0, "layer spectral radius needs y > 0");
    if !g.primitivity().0 {
        return Err(SolveError::NonPrimitive);
    }
    let (rho, drift, _) = rho_and_drift(g, y)?;
    Ok((rho, drift))
}

/// Context shared across the directions of one graph.
struct SolverContext {
    h: BivarPoly,
    diag: Vec<BivarPoly>,
    interval: RotationInterval,
}

impl SolverContext {
    fn build(g: &WeightedGraph) -> Result<Self, SolveError> {
        if !g.primitivity().0 {
            return Err(SolveError::NonPrimitive);
        }
        let interval = rotation_interval(g).map_err(|_| SolveError::NoCycle)?;
        let h = denominator_h(g);
        let numer = numerator_matrix(g);
        let diag = (0..g.state_count())
            .map(|i| numer.entry(i, i).clone())
            .collect();
        Ok(SolverContext { h, diag, interval })
    }

    fn jet(&self, x: f64, y: f64) -> PolyJet {
        eval_with_partials(&self.h, x, y)
    }
}

/// Damped Newton on `(H, α x H_x - y H_y) = 0`, keeping each step only
/// when it stays in the positive quadrant and shrinks the residual.
fn newton_polish(ctx: &SolverContext, alpha: f64, mut x: f64, mut y: f64) -> (f64, f64) {
    let residual = |jet: &PolyJet, x: f64, y: f64| -> (f64, f64) {
        (jet.value, alpha * x * jet.dx - y * jet.dy)
    };
    let mut jet = ctx.jet(x, y);
    let (mut f1, mut f2) = residual(&jet, x, y);
    for _ in 0..4 {
        let j11 = jet.dx;
        let j12 = jet.dy;
        let j21 = alpha * (jet.dx + x * jet.dxx) - y * jet.dxy;
        let j22 = alpha * x * jet.dxy - jet.dy - y * jet.dyy;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (f1 * j22 - f2 * j12) / det;
        let dy = (j11 * f2 - j21 * f1) / det;
        let (nx, ny) = (x - dx, y - dy);
        if !(nx > 0.0 && ny > 0.0 && nx.is_finite() && ny.is_finite()) {
            break;
        }
        let njet = ctx.jet(nx, ny);
        let (n1, n2) = residual(&njet, nx, ny);
        if n1.abs().max(n2.abs()) >= f1.abs().max(f2.abs()) {
            break;
        }
        (x, y, jet, f1, f2) = (nx, ny, njet, n1, n2);
    }
    (x, y)
}

/// `Q` of the saddle-point prefactor.
fn q_formula(jet: &PolyJet, x: f64, y: f64) -> f64 {
    let xhx = x * jet.dx;
    let yhy = y * jet.dy;
    -xhx * yhy * yhy - yhy * xhx * xhx
        - y * y
            * x
            * x
            * (jet.dy * jet.dy * jet.dxx + jet.dx * jet.dx * jet.dyy
                - 2.0 * jet.dx * jet.dy * jet.dxy)
}

fn solve_interior(
    g: &WeightedGraph,
    ctx: &SolverContext,
    alpha_shifted: f64,
    on_boundary: bool,
) -> Result<DirectionSolution, SolveError> {
    // drift(y) is nondecreasing; bisect on drift(y) = α, geometrically so
    // that probes stay away from the nearly-periodic bracket extremes
    let (mut lo, mut hi) = BRACKET;
    let (_, d_lo, _) = rho_and_drift(g, lo)?;
    let (_, d_hi, _) = rho_and_drift(g, hi)?;
    if alpha_shifted < d_lo || alpha_shifted > d_hi {
        return Err(SolveError::BracketFailure);
    }
    for _ in 0..BISECT_ITERS {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let (_, d_mid, _) = rho_and_drift(g, mid)?;
        if d_mid < alpha_shifted {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y0 = (lo * hi).sqrt();
    let (rho, _, _) = rho_and_drift(g, y0)?;
    let x0 = 1.0 / rho;
    // polish on the exact polynomial system: the spectral solve picked the
    // minimal branch, Newton removes the eigensolver noise floor
    let (x0, y0) = newton_polish(ctx, alpha_shifted, x0, y0);
    let jet = ctx.jet(x0, y0);
    let residual_h = jet.value.abs();
    let residual_ray = (alpha_shifted * x0 * jet.dx - y0 * jet.dy).abs();
    if !on_boundary {
        if residual_h > RESIDUAL_TOL {
            return Err(SolveError::ResidualTooLarge { which: "H", value: residual_h });
        }
        if residual_ray > RESIDUAL_TOL {
            return Err(SolveError::ResidualTooLarge {
                which: "ray",
                value: residual_ray,
            });
        }
    }
    let q_value = q_formula(&jet, x0, y0);
    let f_nonzero_diag = ctx
        .diag
        .iter()
        .any(|f| f.eval(x0, y0).abs() > DEGENERACY_TOL);
    Ok(DirectionSolution {
        status: SolutionStatus::Interior,
        x0,
        y0,
        entropy: -x0.ln() - alpha_shifted * y0.ln(),
        q_value,
        residual_h,
        residual_ray,
        f_nonzero_diag,
        q_nonzero: q_value.abs() > DEGENERACY_TOL,
        on_boundary,
    })
}

fn solve_with_ctx(
    g: &WeightedGraph,
    ctx: &SolverContext,
    dir: &DirectionSpec,
) -> Result<DirectionSolution, SolveError> {
    let lo = ctx.interval.lo_f64();
    let hi = ctx.interval.hi_f64();
    let a = dir.alpha_true;

    if a < lo - ENDPOINT_MARGIN || a > hi + ENDPOINT_MARGIN {
        return Ok(DirectionSolution::degenerate_outside());
    }

    if g.rho() == 0 {
        // single layer: the rotation interval is the point s0 and the
        // drift is identically 0 in shifted coordinates
        let (rho, _, _) = rho_and_drift(g, 1.0)?;
        let x0 = 1.0 / rho;
        let jet = ctx.jet(x0, 1.0);
        let q_value = q_formula(&jet, x0, 1.0);
        return Ok(DirectionSolution {
            status: SolutionStatus::Interior,
            x0,
            y0: 1.0,
            entropy: rho.ln(),
            q_value,
            residual_h: jet.value.abs(),
            residual_ray: (dir.alpha_shifted * x0 * jet.dx - jet.dy).abs(),
            f_nonzero_diag: ctx
                .diag
                .iter()
                .any(|f| f.eval(x0, 1.0).abs() > DEGENERACY_TOL),
            q_nonzero: q_value.abs() > DEGENERACY_TOL,
            on_boundary: false,
        });
    }

    let near_lo = (a - lo).abs() <= ENDPOINT_MARGIN;
    let near_hi = (a - hi).abs() <= ENDPOINT_MARGIN;
    if !(near_lo || near_hi) {
        match solve_interior(g, ctx, dir.alpha_shifted, false) {
            Ok(sol) => return Ok(sol),
            // drift saturated before reaching alpha: endpoint direction
            Err(SolveError::BracketFailure) => {}
            Err(e) => return Err(e),
        }
    }

    // endpoint direction: extrapolate the entropy one-sidedly
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let toward_hi = (a - lo) > (hi - a);
    let base = span * 1e-6;
    let probe = |delta: f64| -> Result<DirectionSolution, SolveError> {
        let alpha = if toward_hi { hi - delta } else { lo + delta };
        solve_interior(g, ctx, alpha - g.s0() as f64, true)
    };
    let s1 = probe(base)?;
    let s2 = probe(2.0 * base)?;
    let entropy = (2.0 * s1.entropy - s2.entropy).max(0.0);
    Ok(DirectionSolution {
        status: SolutionStatus::Boundary,
        entropy,
        on_boundary: true,
        ..s1
    })
}

/// Solves the stationarity system for one direction. Directions outside
/// the rotation interval yield the entropy-0 degenerate solution; endpoint
/// directions are flagged and extrapolated one-sidedly.
pub fn solve_direction(
    g: &WeightedGraph,
    dir: &DirectionSpec,
) -> Result<DirectionSolution, SolveError> {
    let ctx = SolverContext::build(g)?;
    solve_with_ctx(g, &ctx, dir)
}

/// Natural log of the saddle-point approximation to the coefficient
/// `a_{n, ⌊αn⌋}` of the generating-function entry `(i, j)`:
///
/// ```text
/// f(x0,y0)/√(2π) · x0^{-n} y0^{-αn} · √(-x0 H_x / (n Q))
/// ```
///
/// with `α = cot θ - s0`. The coefficient equals the exact count
/// `M(L^{n+1}_{⌊αn⌋ + n s0})_{ij}`.
pub fn asymptotic_count_ln(
    g: &WeightedGraph,
    entry: (usize, usize),
    dir: &DirectionSpec,
    sol: &DirectionSolution,
    n: usize,
) -> Result<f64, SolveError> {
    if sol.status != SolutionStatus::Interior {
        return Err(SolveError::DegenerateEntry);
    }
    let numer = numerator_matrix(g);
    let f = numer.entry(entry.0, entry.1).eval(sol.x0, sol.y0);
    let h = denominator_h(g);
    let jet = eval_with_partials(&h, sol.x0, sol.y0);
    let q = q_formula(&jet, sol.x0, sol.y0);
    if f.abs() <= DEGENERACY_TOL || q.abs() <= DEGENERACY_TOL {
        return Err(SolveError::DegenerateEntry);
    }
    let radicand = -sol.x0 * jet.dx / (n as f64 * q);
    if f < 0.0 || radicand <= 0.0 {
        return Err(SolveError::DegenerateEntry);
    }
    Ok(f.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - n as f64 * sol.x0.ln()
        - dir.alpha_shifted * n as f64 * sol.y0.ln()
        + 0.5 * radicand.ln())
}

/// `exp` of [`asymptotic_count_ln`]; overflows to `+inf` for large `n`.
pub fn asymptotic_count(
    g: &WeightedGraph,
    entry: (usize, usize),
    dir: &DirectionSpec,
    sol: &DirectionSolution,
    n: usize,
) -> Result<f64, SolveError> {
    asymptotic_count_ln(g, entry, dir, sol, n).map(f64::exp)
}

/// Ratio of an exact count to the saddle-point approximation.
pub fn asymptotic_ratio(exact: &BigUint, asym_ln: f64) -> f64 {
    (ln_biguint(exact) - asym_ln).exp()
}

#[derive(Clone, Copy, Debug)]
pub struct CurveRow {
    pub alpha_true: f64,
    pub x0: f64,
    pub y0: f64,
    pub entropy: f64,
    pub status: SolutionStatus,
}

#[derive(Clone, Debug)]
pub struct EntropyCurve {
    pub rows: Vec<CurveRow>,
    pub interval: RotationInterval,
}

/// Solves a Chebyshev-spaced grid of directions strictly inside the
/// rotation interval, sorted by `α` ascending. Per-point failures are
/// carried as flagged rows rather than aborting the curve.
pub fn entropy_curve(g: &WeightedGraph, samples: usize) -> Result<EntropyCurve, SolveError> {
    if samples < 2 {
        return Err(SolveError::TooFewSamples);
    }
    let ctx = SolverContext::build(g)?;
    let lo = ctx.interval.lo_f64();
    let hi = ctx.interval.hi_f64();
    if hi - lo <= 0.0 {
        // degenerate interval: the curve collapses to one point
        let dir = DirectionSpec::from_alpha(lo, g);
        let sol = solve_with_ctx(g, &ctx, &dir)?;
        return Ok(EntropyCurve {
            rows: vec![CurveRow {
                alpha_true: lo,
                x0: sol.x0,
                y0: sol.y0,
                entropy: sol.entropy,
                status: sol.status,
            }],
            interval: ctx.interval.clone(),
        });
    }
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut alphas: Vec<f64> = (0..samples)
        .map(|k| {
            let phi = (2 * k + 1) as f64 * std::f64::consts::PI / (2 * samples) as f64;
            center + half * phi.cos()
        })
        .collect();
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rows: Result<Vec<CurveRow>, SolveError> = alphas
        .par_iter()
        .map(|&alpha| {
            let dir = DirectionSpec::from_alpha(alpha, g);
            let sol = solve_with_ctx(g, &ctx, &dir)?;
            Ok(CurveRow {
                alpha_true: alpha,
                x0: sol.x0,
                y0: sol.y0,
                entropy: sol.entropy,
                status: sol.status,
            })
        })
        .collect();
    Ok(EntropyCurve { rows: rows?, interval: ctx.interval })
}

#[derive(Clone, Copy, Debug)]
pub struct MaxDirection {
    pub alpha_max: f64,
    pub theta_max: f64,
    pub h_top: f64,
}

/// Direction of maximal entropy: `α_max = (l Ã(1,1) r)/(l A r) + s0` with
/// `Ã(1,1) = Σ_j j A_{s0+j}` and `l, r` the Perron pair of `A`; there
/// `y0 = 1`, the measure is the maximal-entropy one, and the directional
/// entropy equals `h_top = ln λ(A)`.
pub fn max_entropy_direction(g: &WeightedGraph) -> Result<MaxDirection, SolveError> {
    if !g.primitivity().0 {
        return Err(SolveError::NonPrimitive);
    }
    let (lambda, drift_at_one, _) = rho_and_drift(g, 1.0)?;
    let alpha_max = drift_at_one + g.s0() as f64;
    Ok(MaxDirection {
        alpha_max,
        theta_max: std::f64::consts::FRAC_PI_2 - alpha_max.atan(),
        h_top: lambda.ln(),
    })
}
