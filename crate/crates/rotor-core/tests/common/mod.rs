//! Shared fixtures and oracle helpers for the integration tests.

use num_bigint::BigUint;
use num_rational::Rational64;
use rotor_core::circle_map::{load_map, CircleMapSpec, MarkovPartition};
use rotor_core::symbolic_graph::{build_graph, WeightedGraph};

pub const FIXTURE_JSON: &str = r#"{
    "breakpoints": ["0", "1/3", "2/3", "1"],
    "lift_values": ["1/3", "1", "2/3", "4/3"]
}"#;

pub fn fixture_spec() -> CircleMapSpec {
    load_map(FIXTURE_JSON).unwrap()
}

pub fn fixture() -> (CircleMapSpec, MarkovPartition, WeightedGraph) {
    let spec = fixture_spec();
    let part = spec.refine().unwrap();
    let g = build_graph(&part).unwrap();
    (spec, part, g)
}

/// BigUint matrix product, for oracle-side arithmetic.
pub fn mat_mul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let p = a.len();
    let mut out = vec![vec![BigUint::from(0u32); p]; p];
    for i in 0..p {
        for k in 0..p {
            for j in 0..p {
                let add = &a[i][k] * &b[k][j];
                out[i][j] += add;
            }
        }
    }
    out
}

/// All simple cycles of the graph, each as the list of visited states.
/// Exponential, for small oracle graphs only.
pub fn simple_cycles(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let p = g.state_count();
    assert!(p <= 6, "oracle cycle enumeration is for tiny graphs");
    let mut cycles = Vec::new();
    // canonical form: the cycle starts at its minimal state
    for start in 0..p {
        let mut path = vec![start];
        let mut on_path = vec![false; p];
        on_path[start] = true;
        dfs(g, start, start, &mut path, &mut on_path, &mut cycles);
    }
    fn dfs(
        g: &WeightedGraph,
        start: usize,
        u: usize,
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        cycles: &mut Vec<Vec<usize>>,
    ) {
        for v in g.successors(u) {
            if v == start {
                cycles.push(path.clone());
            } else if v > start && !on_path[v] {
                path.push(v);
                on_path[v] = true;
                dfs(g, start, v, path, on_path, cycles);
                on_path[v] = false;
                path.pop();
            }
        }
    }
    cycles
}

/// Mean weight of a simple cycle.
pub fn cycle_mean(g: &WeightedGraph, cycle: &[usize]) -> Rational64 {
    let n = cycle.len();
    let total: i64 = (0..n)
        .map(|i| g.weight(cycle[i], cycle[(i + 1) % n]).unwrap())
        .sum();
    Rational64::new(total, n as i64)
}
