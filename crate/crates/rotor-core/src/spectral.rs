//! Dominant eigenpairs of nonnegative primitive matrices.
//!
//! Two-sided power iteration is the fast path; matrices that are nearly
//! periodic (the extreme-`y` layer polynomials, whose two leading
//! eigenvalues almost tie in modulus) fall back to a QR eigenvalue plus
//! SVD kernel extraction.

use nalgebra::{DMatrix, DVector};

pub(crate) const POWER_TOL: f64 = 2e-14;
const POWER_MAX_ITER: usize = 20_000;

#[derive(Debug)]
pub(crate) enum SpectralFailure {
    NoConvergence,
}

/// Dominant eigenvalue with left and right eigenvectors, `l·r = 1` and
/// `r` scaled to max-norm 1. Requires a primitive matrix; the caller
/// checks primitivity on the support pattern.
pub(crate) struct SpectralPair {
    pub lambda: f64,
    pub left: DVector<f64>,
    pub right: DVector<f64>,
}

pub(crate) fn power_pair(m: &DMatrix<f64>) -> Result<SpectralPair, SpectralFailure> {
    // balance first: entries of the layer polynomials span many decades
    // in y, and the noise floor of a matvec is absolute in the largest
    // entry, so unbalanced small eigencomponents would lose all relative
    // accuracy
    let d = balancing(m);
    let p = m.nrows();
    let balanced = DMatrix::from_fn(p, p, |i, j| m[(i, j)] * d[i] / d[j]);
    let pair = match iterate(&balanced) {
        Ok(pair) => pair,
        Err(_) => schur_pair(&balanced)?,
    };
    let mut right = DVector::from_fn(p, |i, _| pair.right[i] / d[i]);
    let mut left = DVector::from_fn(p, |i, _| pair.left[i] * d[i]);
    let scale = right.amax();
    if scale == 0.0 {
        return Err(SpectralFailure::NoConvergence);
    }
    right /= scale;
    let lr = left.dot(&right);
    if lr == 0.0 {
        return Err(SpectralFailure::NoConvergence);
    }
    left /= lr;
    Ok(SpectralPair { lambda: pair.lambda, left, right })
}

/// Osborne balancing: a positive diagonal `d` making row and column sums
/// of `d_i m_ij / d_j` comparable. Leaves eigenvalues untouched.
fn balancing(m: &DMatrix<f64>) -> Vec<f64> {
    let p = m.nrows();
    let mut d = vec![1.0f64; p];
    for _ in 0..16 {
        let mut moved = false;
        for i in 0..p {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..p {
                if j != i {
                    col += (m[(j, i)] * d[j] / d[i]).abs();
                    row += (m[(i, j)] * d[i] / d[j]).abs();
                }
            }
            if col > 0.0 && row > 0.0 {
                let f = (col / row).sqrt();
                if f > 2.0 || f < 0.5 {
                    moved = true;
                }
                d[i] *= f;
            }
        }
        if !moved {
            break;
        }
    }
    d
}

fn iterate(m: &DMatrix<f64>) -> Result<SpectralPair, SpectralFailure> {
    let p = m.nrows();
    let mt = m.transpose();
    let mut r = DVector::from_element(p, 1.0);
    let mut l = DVector::from_element(p, 1.0);
    // the achievable residual floor scales with the largest matrix entry,
    // not with the eigenvalue
    let scale = m.amax().max(1e-300);
    for _ in 0..POWER_MAX_ITER {
        let mr = m * &r;
        let ml = &mt * &l;
        let r_scale = mr.amax();
        let l_scale = ml.amax();
        if r_scale == 0.0 || l_scale == 0.0 {
            // a primitive matrix cannot annihilate a positive vector
            return Err(SpectralFailure::NoConvergence);
        }
        r = mr / r_scale;
        l = ml / l_scale;
        // Rayleigh-style two-sided estimate: converges at the squared
        // spectral-gap rate without any deflation.
        let lr = l.dot(&r);
        if lr.abs() == 0.0 {
            continue;
        }
        let mr2 = m * &r;
        let lambda = l.dot(&mr2) / lr;
        let res_r = (mr2 - lambda * &r).amax();
        let res_l = (&mt * &l - lambda * &l).amax();
        if res_r <= POWER_TOL * scale * r.amax() && res_l <= POWER_TOL * scale * l.amax() {
            let left = l / lr;
            return Ok(SpectralPair { lambda, left, right: r });
        }
    }
    Err(SpectralFailure::NoConvergence)
}

fn schur_pair(m: &DMatrix<f64>) -> Result<SpectralPair, SpectralFailure> {
    let lambda = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda.is_finite() {
        return Err(SpectralFailure::NoConvergence);
    }
    let p = m.nrows();
    let shifted = m - DMatrix::<f64>::identity(p, p) * lambda;
    let mut r = kernel_vector(&shifted)?;
    let mut l = kernel_vector(&shifted.transpose())?;
    orient_positive(&mut r);
    orient_positive(&mut l);
    let r_scale = r.amax();
    if r_scale == 0.0 {
        return Err(SpectralFailure::NoConvergence);
    }
    r /= r_scale;
    let lr = l.dot(&r);
    if lr.abs() == 0.0 {
        return Err(SpectralFailure::NoConvergence);
    }
    l /= lr;
    Ok(SpectralPair { lambda, left: l, right: r })
}

/// Unit vector spanning the (numerical) kernel: the right-singular vector
/// of the smallest singular value.
pub(crate) fn kernel_vector(m: &DMatrix<f64>) -> Result<DVector<f64>, SpectralFailure> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.ok_or(SpectralFailure::NoConvergence)?;
    let row = v_t.row(v_t.nrows() - 1);
    Ok(DVector::from_iterator(row.len(), row.iter().copied()))
}

/// Flips the sign so the largest-magnitude component is positive (Perron
/// vectors have constant sign).
fn orient_positive(v: &mut DVector<f64>) {
    let mut dominant = 0.0f64;
    for &x in v.iter() {
        if x.abs() > dominant.abs() {
            dominant = x;
        }
    }
    if dominant < 0.0 {
        *v = -v.clone();
    }
}
