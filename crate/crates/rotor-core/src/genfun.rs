//! Integer-coefficient bivariate polynomials and the generating-function
//! kernel of the weighted graph.
//!
//! The denominator `H(x,y) = det(E - x Σ_j y^j A_{s0+j})` and the adjugate
//! numerator matrix `N` (with `N·(E - x Σ y^j A_j) = H·E`) are computed
//! exactly over `Z[x,y]`. Degrees are tiny (`<= p` in `x`, `<= pρ` in `y`),
//! so dense coefficient grids are used throughout.

use crate::symbolic_graph::WeightedGraph;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;

/// Dense bivariate polynomial: `coeffs[dx][dy]`, trailing zeros trimmed.
/// The zero polynomial has an empty grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivarPoly {
    coeffs: Vec<Vec<BigInt>>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        BivarPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        BivarPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = BivarPoly { coeffs: vec![vec![c]] };
        p.trim();
        p
    }

    /// `c · x^dx · y^dy`
    pub fn monomial(c: i64, dx: usize, dy: usize) -> Self {
        if c == 0 {
            return BivarPoly::zero();
        }
        let mut coeffs = vec![vec![BigInt::zero(); dy + 1]; dx + 1];
        coeffs[dx][dy] = BigInt::from(c);
        BivarPoly { coeffs }
    }

    /// Builds from small-integer rows (`rows[dx][dy]`), mostly for tests.
    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let mut coeffs: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        let width = coeffs.iter().map(Vec::len).max().unwrap_or(0);
        for row in &mut coeffs {
            row.resize(width, BigInt::zero());
        }
        let mut p = BivarPoly { coeffs };
        p.trim();
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg_x(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn deg_y(&self) -> usize {
        self.coeffs.first().map_or(0, |r| r.len()).saturating_sub(1)
    }

    pub fn coeff(&self, dx: usize, dy: usize) -> BigInt {
        self.coeffs
            .get(dx)
            .and_then(|row| row.get(dy))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    fn trim(&mut self) {
        let mut width = 0;
        for row in &self.coeffs {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    width = width.max(j + 1);
                }
            }
        }
        while let Some(last) = self.coeffs.last() {
            if last.iter().all(Zero::is_zero) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        for row in &mut self.coeffs {
            row.truncate(width.max(1));
            if row.len() < width {
                row.resize(width, BigInt::zero());
            }
        }
        if width == 0 {
            self.coeffs.clear();
        }
    }

    pub fn add(&self, other: &BivarPoly) -> BivarPoly {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let cols = self
            .coeffs
            .first()
            .map_or(0, Vec::len)
            .max(other.coeffs.first().map_or(0, Vec::len));
        let mut coeffs = vec![vec![BigInt::zero(); cols]; rows];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                coeffs[i][j] += c;
            }
        }
        for (i, row) in other.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                coeffs[i][j] += c;
            }
        }
        let mut p = BivarPoly { coeffs };
        p.trim();
        p
    }

    pub fn neg(&self) -> BivarPoly {
        BivarPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| -c).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &BivarPoly) -> BivarPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &BivarPoly) -> BivarPoly {
        if self.is_zero() || other.is_zero() {
            return BivarPoly::zero();
        }
        let rows = self.coeffs.len() + other.coeffs.len() - 1;
        let cols = self.coeffs[0].len() + other.coeffs[0].len() - 1;
        let mut coeffs = vec![vec![BigInt::zero(); cols]; rows];
        for (i1, r1) in self.coeffs.iter().enumerate() {
            for (j1, c1) in r1.iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                for (i2, r2) in other.coeffs.iter().enumerate() {
                    for (j2, c2) in r2.iter().enumerate() {
                        if !c2.is_zero() {
                            coeffs[i1 + i2][j1 + j2] += c1 * c2;
                        }
                    }
                }
            }
        }
        let mut p = BivarPoly { coeffs };
        p.trim();
        p
    }

    pub fn partial_x(&self) -> BivarPoly {
        if self.coeffs.len() <= 1 {
            return BivarPoly::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter().map(|c| c * BigInt::from(i + 1)).collect()
            })
            .collect();
        let mut p = BivarPoly { coeffs };
        p.trim();
        p
    }

    pub fn partial_y(&self) -> BivarPoly {
        let coeffs: Vec<Vec<BigInt>> = self
            .coeffs
            .iter()
            .map(|row| {
                if row.len() <= 1 {
                    vec![BigInt::zero()]
                } else {
                    row[1..]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * BigInt::from(j + 1))
                        .collect()
                }
            })
            .collect();
        let mut p = BivarPoly { coeffs };
        p.trim();
        p
    }

    /// Nested Horner evaluation in doubles. Coefficients stay far below
    /// 2^53 for the graphs handled here, so the conversion is exact.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coeffs.iter().rev() {
            let mut inner = 0.0;
            for c in row.iter().rev() {
                inner = inner * y + c.to_f64().unwrap();
            }
            acc = acc * x + inner;
        }
        acc
    }
}

impl fmt::Display for BivarPoly {
    /// Canonical ascending-degree form, e.g. `1 - x - x^2*y - x^3*y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (dx, row) in self.coeffs.iter().enumerate() {
            for (dy, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mag = c.abs();
                let mut parts = Vec::new();
                if !mag.is_one() || (dx == 0 && dy == 0) {
                    parts.push(mag.to_string());
                }
                if dx == 1 {
                    parts.push("x".to_owned());
                } else if dx > 1 {
                    parts.push(format!("x^{dx}"));
                }
                if dy == 1 {
                    parts.push("y".to_owned());
                } else if dy > 1 {
                    parts.push(format!("y^{dy}"));
                }
                let term = parts.join("*");
                if first {
                    if c.is_negative() {
                        write!(f, "-{term}")?;
                    } else {
                        write!(f, "{term}")?;
                    }
                    first = false;
                } else if c.is_negative() {
                    write!(f, " - {term}")?;
                } else {
                    write!(f, " + {term}")?;
                }
            }
        }
        Ok(())
    }
}

/// Value and partial derivatives of a polynomial at a point.
#[derive(Clone, Copy, Debug)]
pub struct PolyJet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
    pub dxy: f64,
}

/// Evaluates a polynomial and its first and second partials at `(x, y)`.
pub fn eval_with_partials(poly: &BivarPoly, x: f64, y: f64) -> PolyJet {
    let px = poly.partial_x();
    let py = poly.partial_y();
    PolyJet {
        value: poly.eval(x, y),
        dx: px.eval(x, y),
        dy: py.eval(x, y),
        dxx: px.partial_x().eval(x, y),
        dyy: py.partial_y().eval(x, y),
        dxy: px.partial_y().eval(x, y),
    }
}

/// Square matrix over `Z[x,y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    entries: Vec<Vec<BivarPoly>>,
}

impl PolyMatrix {
    pub fn new(entries: Vec<Vec<BivarPoly>>) -> Self {
        let p = entries.len();
        assert!(entries.iter().all(|row| row.len() == p), "matrix not square");
        PolyMatrix { entries }
    }

    pub fn identity(p: usize) -> Self {
        let entries = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| if i == j { BivarPoly::one() } else { BivarPoly::zero() })
                    .collect()
            })
            .collect();
        PolyMatrix { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BivarPoly {
        &self.entries[i][j]
    }

    pub fn add_entrywise(&self, other: &PolyMatrix) -> PolyMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect();
        PolyMatrix { entries }
    }

    pub fn sub_entrywise(&self, other: &PolyMatrix) -> PolyMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect())
            .collect();
        PolyMatrix { entries }
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let p = self.dim();
        let entries = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        let mut acc = BivarPoly::zero();
                        for k in 0..p {
                            acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        PolyMatrix { entries }
    }

    /// Determinant by Laplace expansion along rows, memoized over column
    /// subsets, exact over the polynomial ring.
    pub fn det(&self) -> BivarPoly {
        let p = self.dim();
        assert!(p <= 20, "determinant dimension cap exceeded");
        let mut dp: HashMap<u32, BivarPoly> = HashMap::new();
        dp.insert(0, BivarPoly::one());
        for row in 0..p {
            let mut next: HashMap<u32, BivarPoly> = HashMap::new();
            for (mask, val) in &dp {
                if val.is_zero() {
                    continue;
                }
                for j in 0..p {
                    let bit = 1u32 << j;
                    if mask & bit != 0 {
                        continue;
                    }
                    let entry = &self.entries[row][j];
                    if entry.is_zero() {
                        continue;
                    }
                    // inversions added: used columns greater than j
                    let above = (mask >> (j + 1)).count_ones();
                    let mut term = val.mul(entry);
                    if above % 2 == 1 {
                        term = term.neg();
                    }
                    next.entry(mask | bit)
                        .and_modify(|acc| *acc = acc.add(&term))
                        .or_insert(term);
                }
            }
            dp = next;
        }
        let full = if p == 32 { u32::MAX } else { (1u32 << p) - 1 };
        dp.remove(&full).unwrap_or_else(BivarPoly::zero)
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> PolyMatrix {
        let p = self.dim();
        let entries = (0..p)
            .filter(|&i| i != drop_row)
            .map(|i| {
                (0..p)
                    .filter(|&j| j != drop_col)
                    .map(|j| self.entries[i][j].clone())
                    .collect()
            })
            .collect();
        PolyMatrix { entries }
    }

    /// Adjugate: `adj(M)·M = det(M)·E` exactly.
    pub fn adjugate(&self) -> PolyMatrix {
        let p = self.dim();
        if p == 1 {
            return PolyMatrix::new(vec![vec![BivarPoly::one()]]);
        }
        let entries = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        // adj_ij = (-1)^{i+j} * minor with row j, col i dropped
                        let m = self.minor(j, i).det();
                        if (i + j) % 2 == 1 {
                            m.neg()
                        } else {
                            m
                        }
                    })
                    .collect()
            })
            .collect();
        PolyMatrix { entries }
    }
}

/// `E - x Σ_j y^j A_{s0+j}` with shifted weight exponents.
pub fn system_matrix(g: &WeightedGraph) -> PolyMatrix {
    let p = g.state_count();
    let entries = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut e = if i == j { BivarPoly::one() } else { BivarPoly::zero() };
                    if let Some(s) = g.shifted_weight(i, j) {
                        e = e.sub(&BivarPoly::monomial(1, 1, s));
                    }
                    e
                })
                .collect()
        })
        .collect();
    PolyMatrix { entries }
}

/// The generating-function denominator `H(x, y)`.
pub fn denominator_h(g: &WeightedGraph) -> BivarPoly {
    system_matrix(g).det()
}

/// Adjugate numerator matrix `N` with `N·(E - x Σ y^j A_j) = H·E`.
pub fn numerator_matrix(g: &WeightedGraph) -> PolyMatrix {
    system_matrix(g).adjugate()
}
