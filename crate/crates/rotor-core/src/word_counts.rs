//! Exact counting of weighted admissible words.
//!
//! `M(L^n_m)` follows the layer recursion
//! `M(L^{n+1}_m) = Σ_s M(L^n_{m-s}) A_s`; strip-constrained counts
//! `M(B_{n,α,r})` prune prefix weights outside `[αj - r, αj + r]` with
//! exact rational comparisons. Counts are arbitrary-precision integers
//! end to end: on interesting graphs they grow like `e^{0.6 n}` and would
//! overflow any fixed width near `n ≈ 100`.

use crate::rational::Rational;
use crate::symbolic_graph::WeightedGraph;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Cap for exhaustive enumeration.
pub const MAX_ENUM_LEN: usize = 20;
/// Cap for growth-rate grids.
pub const MAX_GROWTH_LEN: usize = 5000;

#[derive(Debug, Error)]
pub enum CountError {
    #[error("enumeration capped at length {MAX_ENUM_LEN}, requested {0}")]
    LengthCapExceeded(usize),
    #[error("n grid must be increasing and bounded by {MAX_GROWTH_LEN}")]
    InvalidGrid,
    #[error("all strip counts vanish at the requested lengths")]
    AllCountsZero,
}

/// Strip parameters: direction slope `α = cot θ` (exact, unshifted) and
/// half-width `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripSpec {
    pub alpha: Rational,
    pub r: u32,
}

impl StripSpec {
    pub fn new(alpha: Rational, r: u32) -> Self {
        StripSpec { alpha, r }
    }

    /// Integer weights admissible after `j` transitions:
    /// `αj - r <= w <= αj + r`, as an inclusive integer range.
    fn bounds(&self, j: usize) -> (i64, i64) {
        let aj = &self.alpha * Rational::from_integer(j.into());
        let r = Rational::from_integer(self.r.into());
        let lo = (&aj - &r).ceil().to_integer();
        let hi = (&aj + &r).floor().to_integer();
        (
            lo.to_i64().expect("strip bound exceeds i64"),
            hi.to_i64().expect("strip bound exceeds i64"),
        )
    }
}

/// What a [`CountMatrix`] counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountClass {
    /// All admissible words of the stated length.
    All,
    /// Words of total weight `m`.
    Weight(i64),
    /// Strip-constrained words.
    Strip(StripSpec),
}

/// `p × p` matrix of word counts by start and end state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    pub n: usize,
    pub class: CountClass,
    counts: Vec<Vec<BigUint>>,
}

impl CountMatrix {
    fn zero(p: usize, n: usize, class: CountClass) -> Self {
        CountMatrix { n, class, counts: vec![vec![BigUint::zero(); p]; p] }
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigUint {
        &self.counts[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigUint>] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().flatten().sum()
    }

    pub fn entrywise_le(&self, other: &CountMatrix) -> bool {
        self.counts
            .iter()
            .zip(&other.counts)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
    }
}

type Table = BTreeMap<i64, Vec<Vec<BigUint>>>;

fn zero_mat(p: usize) -> Vec<Vec<BigUint>> {
    vec![vec![BigUint::zero(); p]; p]
}

fn identity_mat(p: usize) -> Vec<Vec<BigUint>> {
    let mut m = zero_mat(p);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigUint::from(1u32);
    }
    m
}

/// One extension step of the layer recursion: multiplies each
/// weight-resolved matrix by the layers, shifting keys by the edge weight.
fn step_table(g: &WeightedGraph, table: &Table) -> Table {
    let p = g.state_count();
    let mut next: Table = BTreeMap::new();
    for (&m, mat) in table {
        for en in 0..p {
            if (0..p).all(|i| mat[i][en].is_zero()) {
                continue;
            }
            for k in g.successors(en) {
                let w = m + g.weight(en, k).unwrap();
                let target = next.entry(w).or_insert_with(|| zero_mat(p));
                for i in 0..p {
                    if !mat[i][en].is_zero() {
                        target[i][k] += &mat[i][en];
                    }
                }
            }
        }
    }
    next
}

/// Incremental sweep over word lengths maintaining every `M(L^n_m)`.
pub struct WeightSweep<'g> {
    g: &'g WeightedGraph,
    n: usize,
    table: Table,
}

impl<'g> WeightSweep<'g> {
    /// Starts at `n = 1`: `M(L^1_0) = E`, all other weights empty.
    pub fn new(g: &'g WeightedGraph) -> Self {
        let mut table = Table::new();
        table.insert(0, identity_mat(g.state_count()));
        WeightSweep { g, n: 1, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&mut self) {
        self.table = step_table(self.g, &self.table);
        self.n += 1;
    }

    pub fn weights(&self) -> impl Iterator<Item = i64> + '_ {
        self.table.keys().copied()
    }

    pub fn matrix(&self, m: i64) -> CountMatrix {
        let p = self.g.state_count();
        match self.table.get(&m) {
            Some(mat) => CountMatrix {
                n: self.n,
                class: CountClass::Weight(m),
                counts: mat.clone(),
            },
            None => CountMatrix::zero(p, self.n, CountClass::Weight(m)),
        }
    }

    /// `Σ_m M(L^n_m)`, which must equal `A^{n-1}`.
    pub fn sum_all(&self) -> CountMatrix {
        let p = self.g.state_count();
        let mut acc = zero_mat(p);
        for mat in self.table.values() {
            for i in 0..p {
                for j in 0..p {
                    acc[i][j] += &mat[i][j];
                }
            }
        }
        CountMatrix { n: self.n, class: CountClass::All, counts: acc }
    }
}

/// `M(L^n_m)`: admissible `n`-words of weight `m`, by start/end state.
pub fn count_l(g: &WeightedGraph, n: usize, m: i64) -> CountMatrix {
    assert!(n >= 1, "word length must be positive");
    let mut sweep = WeightSweep::new(g);
    while sweep.n() < n {
        sweep.step();
    }
    sweep.matrix(m)
}

/// Incremental strip-constrained sweep: after each extension the new
/// prefix weight is tested against the strip, so the table at length `n`
/// is exactly `M(B_{n,α,r})` split by weight.
pub struct StripSweep<'g> {
    g: &'g WeightedGraph,
    strip: StripSpec,
    n: usize,
    table: Table,
}

impl<'g> StripSweep<'g> {
    pub fn new(g: &'g WeightedGraph, strip: StripSpec) -> Self {
        let mut table = Table::new();
        table.insert(0, identity_mat(g.state_count()));
        StripSweep { g, strip, n: 1, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True once the strip has killed every word; all later counts are 0.
    pub fn extinct(&self) -> bool {
        self.table.is_empty()
    }

    pub fn step(&mut self) {
        let mut next = step_table(self.g, &self.table);
        let (lo, hi) = self.strip.bounds(self.n);
        next.retain(|&m, _| lo <= m && m <= hi);
        self.table = next;
        self.n += 1;
    }

    pub fn matrix(&self) -> CountMatrix {
        let p = self.g.state_count();
        let mut acc = zero_mat(p);
        for mat in self.table.values() {
            for i in 0..p {
                for j in 0..p {
                    acc[i][j] += &mat[i][j];
                }
            }
        }
        CountMatrix {
            n: self.n,
            class: CountClass::Strip(self.strip.clone()),
            counts: acc,
        }
    }

    pub fn total(&self) -> BigUint {
        self.table.values().flatten().flatten().sum()
    }
}

/// `M(B_{n,α,r})`: words whose prefix weights stay in the strip.
pub fn count_b(g: &WeightedGraph, n: usize, strip: &StripSpec) -> CountMatrix {
    assert!(n >= 1, "word length must be positive");
    assert!(strip.r >= 1, "strip half-width must be positive");
    let mut sweep = StripSweep::new(g, strip.clone());
    while sweep.n() < n {
        sweep.step();
    }
    sweep.matrix()
}

/// Word predicate for [`enumerate_words`].
#[derive(Clone, Debug)]
pub enum WordFilter {
    All,
    Weight(i64),
    Strip(StripSpec),
}

impl WordFilter {
    fn admits(&self, g: &WeightedGraph, word: &[usize]) -> bool {
        match self {
            WordFilter::All => true,
            WordFilter::Weight(m) => word_weight(g, word) == *m,
            WordFilter::Strip(strip) => {
                let mut w = 0i64;
                for j in 1..word.len() {
                    w += g.weight(word[j - 1], word[j]).unwrap();
                    let (lo, hi) = strip.bounds(j);
                    if w < lo || w > hi {
                        return false;
                    }
                }
                true
            }
        }
    }
}

/// Total weight `v(w)`.
pub fn word_weight(g: &WeightedGraph, word: &[usize]) -> i64 {
    (1..word.len())
        .map(|j| g.weight(word[j - 1], word[j]).unwrap())
        .sum()
}

/// Exhaustive depth-first enumeration of admissible `n`-words passing the
/// filter, in lexicographic order. Oracle for the dynamic programs.
pub fn enumerate_words(
    g: &WeightedGraph,
    n: usize,
    filter: &WordFilter,
) -> Result<Vec<Vec<usize>>, CountError> {
    if n > MAX_ENUM_LEN {
        return Err(CountError::LengthCapExceeded(n));
    }
    assert!(n >= 1, "word length must be positive");
    let p = g.state_count();
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    fn dfs(
        g: &WeightedGraph,
        n: usize,
        filter: &WordFilter,
        word: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if word.len() == n {
            if filter.admits(g, word) {
                out.push(word.clone());
            }
            return;
        }
        let last = *word.last().unwrap();
        for next in g.successors(last) {
            word.push(next);
            dfs(g, n, filter, word, out);
            word.pop();
        }
    }
    for start in 0..p {
        word.push(start);
        dfs(g, n, filter, &mut word, &mut out);
        word.pop();
    }
    Ok(out)
}

/// Packs an enumerated word list into a count matrix (test oracle side).
pub fn matrix_from_words(
    p: usize,
    n: usize,
    class: CountClass,
    words: &[Vec<usize>],
) -> CountMatrix {
    let mut counts = zero_mat(p);
    for w in words {
        counts[w[0]][w[n - 1]] += BigUint::from(1u32);
    }
    CountMatrix { n, class, counts }
}

/// `A^e` over the naturals.
pub fn adjacency_power(g: &WeightedGraph, e: usize) -> CountMatrix {
    let p = g.state_count();
    let adj: Vec<Vec<BigUint>> = g
        .adjacency()
        .iter()
        .map(|row| row.iter().map(|&b| BigUint::from(b as u32)).collect())
        .collect();
    let mut acc = identity_mat(p);
    for _ in 0..e {
        let mut next = zero_mat(p);
        for i in 0..p {
            for k in 0..p {
                if !acc[i][k].is_zero() {
                    for j in 0..p {
                        if !adj[k][j].is_zero() {
                            let add = &acc[i][k] * &adj[k][j];
                            next[i][j] += add;
                        }
                    }
                }
            }
        }
        acc = next;
    }
    CountMatrix { n: e + 1, class: CountClass::All, counts: acc }
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 53 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 53;
        let top = (x >> shift).to_f64().unwrap();
        top.ln() + (shift as f64) * std::f64::consts::LN_2
    }
}

/// Growth-rate estimate for `ln |B_{n,α,r}| / n`.
#[derive(Clone, Debug)]
pub struct GrowthEstimate {
    /// `(n, ln|B_n|/n)` at each requested length.
    pub samples: Vec<(usize, f64)>,
    /// Extrapolated limit: log-ratio of the last two counts, which cancels
    /// the polynomial prefactor.
    pub estimate: f64,
    /// False when the per-n rates are not monotone.
    pub monotone: bool,
}

/// Finite-`r` directional entropy estimate from strip counts on a grid of
/// lengths.
pub fn finite_r_entropy(
    g: &WeightedGraph,
    strip: &StripSpec,
    n_grid: &[usize],
) -> Result<GrowthEstimate, CountError> {
    if n_grid.is_empty()
        || n_grid.windows(2).any(|w| w[0] >= w[1])
        || *n_grid.last().unwrap() > MAX_GROWTH_LEN
        || n_grid[0] < 1
    {
        return Err(CountError::InvalidGrid);
    }
    let mut sweep = StripSweep::new(g, strip.clone());
    let mut counts: Vec<(usize, BigUint)> = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        while sweep.n() < n {
            sweep.step();
            if sweep.extinct() {
                break;
            }
        }
        counts.push((n, if sweep.n() == n { sweep.total() } else { BigUint::zero() }));
    }
    if counts.last().map_or(true, |(_, c)| c.is_zero()) {
        return Err(CountError::AllCountsZero);
    }
    let samples: Vec<(usize, f64)> = counts
        .iter()
        .map(|(n, c)| (*n, ln_biguint(c) / *n as f64))
        .collect();
    let estimate = if counts.len() >= 2 {
        let (n1, c1) = &counts[counts.len() - 2];
        let (n2, c2) = &counts[counts.len() - 1];
        if c1.is_zero() {
            ln_biguint(c2) / *n2 as f64
        } else {
            (ln_biguint(c2) - ln_biguint(c1)) / (*n2 - *n1) as f64
        }
    } else {
        samples[0].1
    };
    let finite: Vec<f64> = samples
        .iter()
        .map(|&(_, v)| v)
        .filter(|v| v.is_finite())
        .collect();
    let monotone = finite.windows(2).all(|w| w[1] >= w[0] - 1e-12)
        || finite.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(GrowthEstimate { samples, estimate, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::load_map;
    use crate::rational::rat;
    use crate::symbolic_graph::build_graph;

    fn fixture_graph() -> WeightedGraph {
        let spec = load_map(
            r#"{"breakpoints":["0","1/3","2/3","1"],"lift_values":["1/3","1","2/3","4/3"]}"#,
        )
        .unwrap();
        build_graph(&spec.refine().unwrap()).unwrap()
    }

    #[test]
    fn length_one_is_identity() {
        let g = fixture_graph();
        let id = count_l(&g, 1, 0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id.entry(i, j), &BigUint::from((i == j) as u32));
            }
        }
        assert!(count_l(&g, 1, 1).total().is_zero());
        assert!(count_l(&g, 1, -1).total().is_zero());
    }

    #[test]
    fn fixture_weight_counts() {
        let g = fixture_graph();
        // n=2, m=1 is the layer A_1: single entry at (3,1) in 1-based labels
        let m21 = count_l(&g, 2, 1);
        assert_eq!(m21.total(), BigUint::from(1u32));
        assert_eq!(m21.entry(2, 0), &BigUint::from(1u32));
        // no consecutive weight-1 transitions
        assert!(count_l(&g, 3, 2).total().is_zero());
        assert_eq!(count_l(&g, 3, 1).total(), BigUint::from(5u32));
        // m outside the possible band
        assert!(count_l(&g, 4, -1).total().is_zero());
        assert!(count_l(&g, 4, 4).total().is_zero());
    }

    #[test]
    fn strip_length_one_counts_all_letters() {
        let g = fixture_graph();
        let strip = StripSpec::new(rat(1, 4), 1);
        assert_eq!(count_b(&g, 1, &strip).total(), BigUint::from(3u32));
    }

    #[test]
    fn strip_outside_interval_dies() {
        let g = fixture_graph();
        let strip = StripSpec::new(rat(3, 4), 1);
        assert!(count_b(&g, 20, &strip).total().is_zero());
    }

    #[test]
    fn strip_matches_enumeration_small() {
        let g = fixture_graph();
        let strip = StripSpec::new(rat(1, 2), 1);
        let by_dp = count_b(&g, 4, &strip);
        let words = enumerate_words(&g, 4, &WordFilter::Strip(strip.clone())).unwrap();
        let by_enum =
            matrix_from_words(3, 4, CountClass::Strip(strip), &words);
        assert_eq!(by_dp.rows(), by_enum.rows());
    }

    #[test]
    fn enumeration_examples() {
        let g = fixture_graph();
        assert_eq!(enumerate_words(&g, 2, &WordFilter::All).unwrap().len(), 5);
        assert_eq!(
            enumerate_words(&g, 3, &WordFilter::Weight(0)).unwrap().len(),
            4
        );
        assert_eq!(enumerate_words(&g, 1, &WordFilter::All).unwrap().len(), 3);
        assert!(matches!(
            enumerate_words(&g, 21, &WordFilter::All),
            Err(CountError::LengthCapExceeded(21))
        ));
    }

    #[test]
    fn weight_sum_equals_adjacency_power() {
        let g = fixture_graph();
        let mut sweep = WeightSweep::new(&g);
        for n in 1..=12 {
            assert_eq!(
                sweep.sum_all().rows(),
                adjacency_power(&g, n - 1).rows(),
                "n = {n}"
            );
            sweep.step();
        }
    }

    #[test]
    fn shift_covariance() {
        let g = fixture_graph();
        let shifted = g.with_weight_offset(2);
        for n in 1..=6 {
            for m in -1..=3i64 {
                assert_eq!(
                    count_l(&g, n, m).rows(),
                    count_l(&shifted, n, m + 2 * (n as i64 - 1)).rows()
                );
            }
        }
    }

    #[test]
    fn growth_estimate_single_layer() {
        // all weights equal: the strip never binds and the rate is ln λ(A)
        let g = WeightedGraph::from_weights(vec![
            vec![Some(1), Some(1)],
            vec![Some(1), Some(1)],
        ])
        .unwrap();
        let est = finite_r_entropy(
            &g,
            &StripSpec::new(rat(1, 1), 2),
            &[50, 100, 200],
        )
        .unwrap();
        assert!((est.estimate - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn growth_estimate_dead_direction() {
        let g = fixture_graph();
        let err = finite_r_entropy(
            &g,
            &StripSpec::new(rat(3, 4), 2),
            &[20, 40],
        );
        assert!(matches!(err, Err(CountError::AllCountsZero)));
    }

    #[test]
    fn ln_biguint_handles_huge_values() {
        let x = BigUint::from(3u32).pow(5000);
        let expect = 5000.0 * 3f64.ln();
        assert!((ln_biguint(&x) - expect).abs() < 1e-6 * expect);
    }
}
