//! The weighted oriented graph of a refined Markov partition.
//!
//! An edge `i -> j` exists iff `F(ξ_i) ⊇ ξ_j + s` for some integer `s`
//! (checked on closures, since the image of an element is a closed
//! interval); that `s` is the edge weight `k_ij`. Continuity of the lift
//! forces the weight set to be a contiguous range `{s0, ..., s0 + ρ}`,
//! and the transition matrix splits into layers `A = Σ_s A_s` with
//! disjoint supports.

use crate::circle_map::MarkovPartition;
use crate::rational::Rational;
use num_bigint::BigInt;
use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no states")]
    EmptyGraph,
    #[error("weight matrix is not square")]
    NotSquare,
    #[error("edge weights {0:?} do not form a contiguous range")]
    NonContiguousWeights(Vec<i64>),
    #[error("graph has no cycle")]
    NoCycle,
}

/// Transition matrix `A`, edge weights `K`, and layer decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    weights: Vec<Vec<Option<i64>>>,
    s0: i64,
    rho: usize,
    layers: Vec<Vec<Vec<bool>>>,
}

impl WeightedGraph {
    /// Builds a graph from the partial weight matrix (`None` = no edge),
    /// verifying weight contiguity.
    pub fn from_weights(weights: Vec<Vec<Option<i64>>>) -> Result<Self, GraphError> {
        let p = weights.len();
        if p == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if weights.iter().any(|row| row.len() != p) {
            return Err(GraphError::NotSquare);
        }
        let mut present: Vec<i64> = weights
            .iter()
            .flatten()
            .filter_map(|w| *w)
            .collect();
        present.sort_unstable();
        present.dedup();
        if present.is_empty() {
            return Err(GraphError::NoCycle);
        }
        let s0 = present[0];
        let rho = (present[present.len() - 1] - s0) as usize;
        if present.len() != rho + 1 {
            return Err(GraphError::NonContiguousWeights(present));
        }
        let mut layers = vec![vec![vec![false; p]; p]; rho + 1];
        for (i, row) in weights.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if let Some(w) = w {
                    layers[(w - s0) as usize][i][j] = true;
                }
            }
        }
        Ok(WeightedGraph { weights, s0, rho, layers })
    }

    pub fn state_count(&self) -> usize {
        self.weights.len()
    }

    pub fn s0(&self) -> i64 {
        self.s0
    }

    /// Weight span: weights lie in `{s0, ..., s0 + rho}`.
    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weights[i][j].is_some()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<i64> {
        self.weights[i][j]
    }

    /// Weight relative to `s0`, in `0..=rho`.
    pub fn shifted_weight(&self, i: usize, j: usize) -> Option<usize> {
        self.weights[i][j].map(|w| (w - self.s0) as usize)
    }

    pub fn weights(&self) -> &[Vec<Option<i64>>] {
        &self.weights
    }

    /// 0/1 transition matrix `A`.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        self.weights
            .iter()
            .map(|row| row.iter().map(|w| w.is_some()).collect())
            .collect()
    }

    /// Layer `A_{s0 + s}` for shifted weight `s`.
    pub fn layer(&self, s: usize) -> &Vec<Vec<bool>> {
        &self.layers[s]
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights[i]
            .iter()
            .enumerate()
            .filter_map(|(j, w)| w.map(|_| j))
    }

    /// Same graph with `c` added to every weight (integer conjugation of
    /// the lift).
    pub fn with_weight_offset(&self, c: i64) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|row| row.iter().map(|w| w.map(|w| w + c)).collect())
            .collect();
        WeightedGraph::from_weights(weights).unwrap()
    }

    /// Exact primitivity test by boolean matrix powers, with the minimal
    /// witness exponent; the search is capped at Wielandt's bound
    /// `(p-1)^2 + 1`.
    pub fn primitivity(&self) -> (bool, Option<usize>) {
        let p = self.state_count();
        let adj = self.adjacency();
        let bound = (p - 1) * (p - 1) + 1;
        let mut power = adj.clone();
        for k in 1..=bound {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return (true, Some(k));
            }
            power = bool_mat_mul(&power, &adj);
        }
        (false, None)
    }
}

fn bool_mat_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let p = a.len();
    let mut out = vec![vec![false; p]; p];
    for i in 0..p {
        for k in 0..p {
            if a[i][k] {
                for j in 0..p {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Extracts the weighted graph from a refined partition. The unique shift
/// per edge is guaranteed by `diam F(ξ_i) < 1`.
pub fn build_graph(partition: &MarkovPartition) -> Result<WeightedGraph, GraphError> {
    let p = partition.len();
    let mut weights = vec![vec![None; p]; p];
    for i in 0..p {
        let (img_lo, img_hi) = partition.image(i);
        for j in 0..p {
            let e = partition.element(j);
            let s_min = (&img_lo - e.lo()).floor().to_integer();
            let s_max = (&img_hi - e.lo()).ceil().to_integer();
            let mut s = s_min.clone();
            while s <= s_max {
                let shift = Rational::from_integer(s.clone());
                if (e.lo() + &shift) >= img_lo && (e.hi() + &shift) <= img_hi {
                    debug_assert!(weights[i][j].is_none(), "two shifts fit one edge");
                    weights[i][j] = Some(int_to_i64(&s));
                }
                s += BigInt::from(1);
            }
        }
    }
    WeightedGraph::from_weights(weights)
}

fn int_to_i64(x: &BigInt) -> i64 {
    num_traits::ToPrimitive::to_i64(x).expect("edge weight exceeds i64")
}

/// Closed interval of rotation numbers, realized as cycle-mean weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RotationInterval {
    pub fn lo_f64(&self) -> f64 {
        crate::rational::to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        crate::rational::to_f64(&self.hi)
    }
}

/// Rotation interval endpoints as the exact minimum and maximum cycle-mean
/// weight of the graph, by Karp's dynamic program run per strongly
/// connected component.
pub fn rotation_interval(g: &WeightedGraph) -> Result<RotationInterval, GraphError> {
    let sccs = strongly_connected_components(g);
    let mut lo: Option<Rational64> = None;
    let mut hi: Option<Rational64> = None;
    for scc in &sccs {
        let has_edge = scc
            .iter()
            .any(|&u| scc.iter().any(|&v| g.has_edge(u, v)));
        if !has_edge {
            continue;
        }
        let min = karp_min_mean(g, scc, false);
        let max = -karp_min_mean(g, scc, true);
        lo = Some(lo.map_or(min, |cur| cur.min(min)));
        hi = Some(hi.map_or(max, |cur| cur.max(max)));
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(RotationInterval {
            lo: ratio64_to_big(lo),
            hi: ratio64_to_big(hi),
        }),
        _ => Err(GraphError::NoCycle),
    }
}

fn ratio64_to_big(r: Rational64) -> Rational {
    Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Karp: `μ* = min_v max_k (D_n(v) - D_k(v)) / (n - k)` over walks inside
/// one strongly connected component. `negate` flips weights to obtain the
/// maximum cycle mean.
fn karp_min_mean(g: &WeightedGraph, scc: &[usize], negate: bool) -> Rational64 {
    let n = scc.len();
    let weight = |u: usize, v: usize| {
        let w = g.weight(u, v).unwrap();
        if negate { -w } else { w }
    };
    // dist[k][v] = min weight of a length-k walk from scc[0] to v
    let mut dist = vec![vec![None::<i64>; n]; n + 1];
    dist[0][0] = Some(0);
    for k in 1..=n {
        for (vi, &v) in scc.iter().enumerate() {
            let mut best: Option<i64> = None;
            for (ui, &u) in scc.iter().enumerate() {
                if !g.has_edge(u, v) {
                    continue;
                }
                if let Some(du) = dist[k - 1][ui] {
                    let cand = du + weight(u, v);
                    best = Some(best.map_or(cand, |b: i64| b.min(cand)));
                }
            }
            dist[k][vi] = best;
        }
    }
    let mut mu: Option<Rational64> = None;
    for (vi, _) in scc.iter().enumerate() {
        let Some(dn) = dist[n][vi] else { continue };
        let mut worst: Option<Rational64> = None;
        for (k, row) in dist.iter().enumerate().take(n) {
            if let Some(dk) = row[vi] {
                let mean = Rational64::new(dn - dk, (n - k) as i64);
                worst = Some(worst.map_or(mean, |w: Rational64| w.max(mean)));
            }
        }
        if let Some(w) = worst {
            mu = Some(mu.map_or(w, |m: Rational64| m.min(w)));
        }
    }
    mu.expect("strongly connected component with an edge has a cycle")
}

/// Kosaraju.
fn strongly_connected_components(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let p = g.state_count();
    let mut order = Vec::with_capacity(p);
    let mut seen = vec![false; p];
    for s in 0..p {
        if !seen[s] {
            // iterative post-order
            let mut stack = vec![(s, 0usize)];
            seen[s] = true;
            while let Some((u, next)) = stack.pop() {
                let mut pushed = false;
                for v in next..p {
                    if g.has_edge(u, v) && !seen[v] {
                        seen[v] = true;
                        stack.push((u, v + 1));
                        stack.push((v, 0));
                        pushed = true;
                        break;
                    }
                }
                if !pushed && stack.iter().all(|&(w, _)| w != u) {
                    order.push(u);
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; p];
    let mut components = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..p {
                // reversed edge v -> u
                if g.has_edge(v, u) && comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Evidence backing the rank-condition verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum RankEvidence {
    /// Two rows of `A` have different supports, so the rank exceeds 1 for
    /// every phase. Exact.
    DistinctRowSupports(usize, usize),
    /// All sampled phases had a nonvanishing 2x2 minor. Heuristic: a
    /// uniform sample cannot certify "for all φ".
    Sampled { samples: usize },
    /// A phase was found where every 2x2 minor vanishes.
    RankDrop { phi: f64 },
    /// 1x1 graphs have rank 1 identically; the analysis is restricted.
    Scalar,
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub primitive: bool,
    /// Minimal exponent with `A^k` strictly positive, when primitive.
    pub witness: Option<usize>,
    pub rank_condition: bool,
    pub rank_evidence: RankEvidence,
}

const RANK_SAMPLES: usize = 1024;

/// Primitivity (exact) and the rank hypothesis of the minimal-solution
/// proposition (structural shortcut where possible, sampled otherwise).
pub fn structure_checks(g: &WeightedGraph) -> StructureReport {
    let (primitive, witness) = g.primitivity();
    let p = g.state_count();
    if p == 1 {
        return StructureReport {
            primitive,
            witness,
            rank_condition: false,
            rank_evidence: RankEvidence::Scalar,
        };
    }

    let adj = g.adjacency();
    for i in 0..p {
        for j in (i + 1)..p {
            if adj[i] != adj[j] && adj[i].iter().any(|&b| b) && adj[j].iter().any(|&b| b) {
                return StructureReport {
                    primitive,
                    witness,
                    rank_condition: true,
                    rank_evidence: RankEvidence::DistinctRowSupports(i, j),
                };
            }
        }
    }

    // identical supports: sample A(1, e^{iφ}) and look for a surviving minor
    for sample in 0..RANK_SAMPLES {
        let phi = 2.0 * std::f64::consts::PI * (sample as f64) / (RANK_SAMPLES as f64);
        if !has_nonzero_minor(g, phi) {
            return StructureReport {
                primitive,
                witness,
                rank_condition: false,
                rank_evidence: RankEvidence::RankDrop { phi },
            };
        }
    }
    StructureReport {
        primitive,
        witness,
        rank_condition: true,
        rank_evidence: RankEvidence::Sampled { samples: RANK_SAMPLES },
    }
}

fn has_nonzero_minor(g: &WeightedGraph, phi: f64) -> bool {
    use nalgebra::Complex;
    let p = g.state_count();
    let entry = |i: usize, j: usize| -> Complex<f64> {
        match g.shifted_weight(i, j) {
            Some(s) => Complex::from_polar(1.0, phi * s as f64),
            None => Complex::new(0.0, 0.0),
        }
    };
    let tol = 1e-9;
    for i in 0..p {
        for k in (i + 1)..p {
            for c in 0..p {
                for d in (c + 1)..p {
                    let det = entry(i, c) * entry(k, d) - entry(i, d) * entry(k, c);
                    if det.norm() > tol {
                        return true;
                    }
                }
            }
        }
    }
    false
}
