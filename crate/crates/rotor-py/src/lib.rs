//! Python bindings: the map pipeline (validate → refine → graph) plus the
//! counting, generating-function, entropy, measure, and complexity
//! operations. Exact rationals cross the boundary as `"p/q"` strings,
//! exact counts as Python ints.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rotor_core::circle_map::{load_map, CircleMapSpec, MarkovPartition};
use rotor_core::complexity_lab::{bounds_report, epsilon_m};
use rotor_core::entropy_solver::{
    entropy_curve, max_entropy_direction, solve_direction, DirectionSpec,
    DirectionSolution, SolutionStatus,
};
use rotor_core::genfun::{denominator_h, numerator_matrix};
use rotor_core::markov_measure::{build_measure, expected_drift, measure_entropy};
use rotor_core::rational::{format_rational, parse_rational, to_f64, Rational};
use rotor_core::symbolic_graph::{
    build_graph, rotation_interval, structure_checks, WeightedGraph,
};
use rotor_core::word_counts::{count_b, count_l, StripSpec};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_rat(text: &str) -> PyResult<Rational> {
    parse_rational(text).map_err(value_err)
}

/// Validation report of a map document, without constructing the pipeline.
#[pyfunction]
#[pyo3(signature = (json_text, strict=false))]
fn validate_map<'py>(py: Python<'py>, json_text: &str, strict: bool) -> PyResult<Bound<'py, PyDict>> {
    let spec = load_map(json_text).map_err(value_err)?;
    let report = spec.validate();
    let out = PyDict::new(py);
    out.set_item("ok", report.ok(strict))?;
    out.set_item("expansion", format!("{:?}", report.expansion))?;
    let checks = PyList::empty(py);
    for check in &report.checks {
        let item = PyDict::new(py);
        item.set_item("condition", format!("{:?}", check.kind))?;
        item.set_item("passed", check.passed)?;
        item.set_item("witness", check.witness.clone())?;
        checks.append(item)?;
    }
    out.set_item("checks", checks)?;
    Ok(out)
}

/// A validated piecewise affine Markov circle map with its refined
/// partition and weighted transition graph.
#[pyclass]
struct CircleMap {
    spec: CircleMapSpec,
    partition: MarkovPartition,
    graph: WeightedGraph,
}

impl CircleMap {
    fn direction(&self, alpha: &str) -> PyResult<(Rational, DirectionSpec, DirectionSolution)> {
        let alpha_exact = parse_rat(alpha)?;
        let dir = DirectionSpec::from_alpha(to_f64(&alpha_exact), &self.graph);
        let sol = solve_direction(&self.graph, &dir).map_err(runtime_err)?;
        Ok((alpha_exact, dir, sol))
    }
}

fn solution_dict<'py>(
    py: Python<'py>,
    alpha: f64,
    sol: &DirectionSolution,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("alpha", alpha)?;
    out.set_item(
        "status",
        match sol.status {
            SolutionStatus::Interior => "interior",
            SolutionStatus::Boundary => "boundary",
            SolutionStatus::OutsideInterval => "outside",
        },
    )?;
    out.set_item("entropy", sol.entropy)?;
    if sol.status != SolutionStatus::OutsideInterval {
        out.set_item("x0", sol.x0)?;
        out.set_item("y0", sol.y0)?;
        out.set_item("q", sol.q_value)?;
        out.set_item("residual_h", sol.residual_h)?;
        out.set_item("residual_ray", sol.residual_ray)?;
    }
    Ok(out)
}

#[pymethods]
impl CircleMap {
    /// Parses and validates a map document; raises ValueError when any
    /// map condition fails.
    #[new]
    #[pyo3(signature = (json_text, strict=false))]
    fn new(json_text: &str, strict: bool) -> PyResult<Self> {
        let spec = load_map(json_text).map_err(value_err)?;
        let report = spec.validate();
        if !report.ok(strict) {
            return Err(PyValueError::new_err(
                report.first_failure(strict).unwrap_or_default(),
            ));
        }
        let partition = spec.refine().map_err(value_err)?;
        let graph = build_graph(&partition).map_err(value_err)?;
        Ok(CircleMap { spec, partition, graph })
    }

    #[staticmethod]
    #[pyo3(signature = (path, strict=false))]
    fn from_file(path: &str, strict: bool) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        CircleMap::new(&text, strict)
    }

    fn breakpoints(&self) -> Vec<String> {
        self.spec.breakpoints().iter().map(format_rational).collect()
    }

    fn lift_values(&self) -> Vec<String> {
        self.spec.lift_values().iter().map(format_rational).collect()
    }

    fn refinement_depth(&self) -> usize {
        self.partition.refinement_depth()
    }

    fn state_count(&self) -> usize {
        self.graph.state_count()
    }

    fn s0(&self) -> i64 {
        self.graph.s0()
    }

    fn rho(&self) -> usize {
        self.graph.rho()
    }

    /// 0/1 transition matrix.
    fn transition_matrix(&self) -> Vec<Vec<i64>> {
        self.graph
            .adjacency()
            .iter()
            .map(|row| row.iter().map(|&b| b as i64).collect())
            .collect()
    }

    /// Edge weights; None where there is no edge.
    fn weights(&self) -> Vec<Vec<Option<i64>>> {
        self.graph.weights().to_vec()
    }

    /// Exact rotation interval endpoints as rational strings.
    fn rotation_interval(&self) -> PyResult<(String, String)> {
        let iv = rotation_interval(&self.graph).map_err(runtime_err)?;
        Ok((format_rational(&iv.lo), format_rational(&iv.hi)))
    }

    fn structure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = structure_checks(&self.graph);
        let out = PyDict::new(py);
        out.set_item("primitive", report.primitive)?;
        out.set_item("witness", report.witness)?;
        out.set_item("rank_condition", report.rank_condition)?;
        out.set_item("rank_evidence", format!("{:?}", report.rank_evidence))?;
        Ok(out)
    }

    /// `H(x,y)` in canonical ascending-degree form.
    fn h_polynomial(&self) -> String {
        denominator_h(&self.graph).to_string()
    }

    /// Numerator entry (1-based indices) in canonical form.
    fn numerator_entry(&self, row: usize, col: usize) -> PyResult<String> {
        let p = self.graph.state_count();
        if row == 0 || col == 0 || row > p || col > p {
            return Err(PyValueError::new_err(format!(
                "entry indices must lie in 1..={p}"
            )));
        }
        Ok(numerator_matrix(&self.graph).entry(row - 1, col - 1).to_string())
    }

    /// Number of admissible n-words of total weight m.
    fn count_weight(&self, n: usize, m: i64) -> BigUint {
        count_l(&self.graph, n, m).total()
    }

    /// Number of admissible n-words staying in the strip of slope alpha
    /// and half-width r.
    fn count_strip(&self, n: usize, alpha: &str, r: u32) -> PyResult<BigUint> {
        let alpha = parse_rat(alpha)?;
        Ok(count_b(&self.graph, n, &StripSpec::new(alpha, r)).total())
    }

    /// Directional entropy at `alpha = cot(theta)`.
    fn entropy<'py>(&self, py: Python<'py>, alpha: &str) -> PyResult<Bound<'py, PyDict>> {
        let (alpha_exact, _, sol) = self.direction(alpha)?;
        solution_dict(py, to_f64(&alpha_exact), &sol)
    }

    /// Chebyshev-sampled entropy curve, rows sorted by alpha.
    fn entropy_curve<'py>(
        &self,
        py: Python<'py>,
        samples: usize,
    ) -> PyResult<Bound<'py, PyList>> {
        let curve = entropy_curve(&self.graph, samples).map_err(runtime_err)?;
        let rows = PyList::empty(py);
        for row in &curve.rows {
            let item = PyDict::new(py);
            item.set_item("alpha", row.alpha_true)?;
            item.set_item("x0", row.x0)?;
            item.set_item("y0", row.y0)?;
            item.set_item("entropy", row.entropy)?;
            item.set_item(
                "status",
                match row.status {
                    SolutionStatus::Interior => "interior",
                    SolutionStatus::Boundary => "boundary",
                    SolutionStatus::OutsideInterval => "outside",
                },
            )?;
            rows.append(item)?;
        }
        Ok(rows)
    }

    /// Direction of maximal entropy: (alpha_max, theta_max, h_top).
    fn max_direction<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let max = max_entropy_direction(&self.graph).map_err(runtime_err)?;
        let out = PyDict::new(py);
        out.set_item("alpha_max", max.alpha_max)?;
        out.set_item("theta_max", max.theta_max)?;
        out.set_item("h_top", max.h_top)?;
        Ok(out)
    }

    /// The direction-matched Markov measure: stochastic matrix, stationary
    /// vector, metric entropy and expected drift.
    fn measure<'py>(&self, py: Python<'py>, alpha: &str) -> PyResult<Bound<'py, PyDict>> {
        let (alpha_exact, _, sol) = self.direction(alpha)?;
        if sol.status != SolutionStatus::Interior {
            return Err(PyValueError::new_err(
                "alpha is not strictly inside the rotation interval",
            ));
        }
        let alpha_f = to_f64(&alpha_exact);
        let mu = build_measure(&self.graph, &sol, alpha_f).map_err(runtime_err)?;
        let p = self.graph.state_count();
        let pi: Vec<Vec<f64>> = (0..p)
            .map(|i| (0..p).map(|j| mu.pi[(i, j)]).collect())
            .collect();
        let q: Vec<f64> = (0..p).map(|i| mu.q[i]).collect();
        let out = PyDict::new(py);
        out.set_item("pi", pi)?;
        out.set_item("q", q)?;
        out.set_item("entropy", measure_entropy(&mu))?;
        out.set_item("drift", expected_drift(&mu, &self.graph))?;
        out.set_item("solver_entropy", sol.entropy)?;
        Ok(out)
    }

    /// Minimal length among the nonempty depth-m cylinders, as a rational
    /// string.
    fn epsilon_m(&self, m: usize) -> PyResult<String> {
        let eps = epsilon_m(&self.partition, &self.graph, m).map_err(value_err)?;
        Ok(format_rational(&eps))
    }

    /// Exact lift orbit `(x, F(x), ..., F^n(x))` as rational strings.
    fn lift_orbit(&self, x: &str, n: usize) -> PyResult<Vec<String>> {
        let x = parse_rat(x)?;
        Ok(self
            .spec
            .lift_orbit(&x, n)
            .iter()
            .map(format_rational)
            .collect())
    }

    /// Separated-set sandwich rows (T, lower, observed, upper, rate) for
    /// the window [-r, r] with block depth m and k = 1..k_max.
    fn complexity_bounds<'py>(
        &self,
        py: Python<'py>,
        alpha: &str,
        r: u32,
        m: usize,
        k_max: usize,
    ) -> PyResult<Bound<'py, PyList>> {
        let alpha = parse_rat(alpha)?;
        let rows = bounds_report(
            &self.spec,
            &self.partition,
            &self.graph,
            alpha,
            r,
            m,
            k_max,
            None,
        )
        .map_err(runtime_err)?;
        let list = PyList::empty(py);
        for row in rows {
            let item = PyDict::new(py);
            item.set_item("t", row.t)?;
            item.set_item("lower", row.lower)?;
            item.set_item("observed", row.observed)?;
            item.set_item("upper", row.upper)?;
            item.set_item("rate", row.rate)?;
            list.append(item)?;
        }
        Ok(list)
    }

    fn __repr__(&self) -> String {
        format!(
            "CircleMap(pieces={}, states={}, s0={}, rho={})",
            self.spec.piece_count(),
            self.graph.state_count(),
            self.graph.s0(),
            self.graph.rho()
        )
    }
}

#[pymodule]
fn rotor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CircleMap>()?;
    m.add_function(wrap_pyfunction!(validate_map, m)?)?;
    Ok(())
}
