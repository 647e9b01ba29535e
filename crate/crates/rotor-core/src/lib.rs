//! # rotor-core
//!
//! Directional complexity and directional entropy for piecewise affine
//! Markov maps of the circle.
//!
//! Given a degree-one circle map described by its lift values at the
//! breakpoints of a Markov partition, this crate
//!
//! * validates the map and refines its partition ([`circle_map`]),
//! * extracts the weighted transition graph, its layer decomposition and
//!   the rotation interval ([`symbolic_graph`]),
//! * counts weighted and strip-constrained admissible words exactly with
//!   arbitrary-precision integers ([`word_counts`]),
//! * builds the bivariate generating-function denominator
//!   `H(x,y) = det(E - x Σ_j y^j A_{s0+j})` and its adjugate numerators
//!   over the exact integer polynomial ring ([`genfun`]),
//! * solves the stationarity system for each direction and produces exact
//!   directional entropies `h = -ln x0 - α ln y0`, entropy curves, and the
//!   maximal-entropy direction ([`entropy_solver`]),
//! * constructs the direction-dependent Markov measure whose metric
//!   entropy equals the directional entropy ([`markov_measure`]),
//! * and builds `(ε,W,T)`-separated orbit sets by exact rational iteration,
//!   bracketed by the word-count bounds ([`complexity_lab`]).
//!
//! All symbolic/combinatorial computations are exact (rationals and big
//! integers); only the spectral solver and the entropy values themselves
//! live in `f64`.

pub mod circle_map;
pub mod complexity_lab;
pub mod entropy_solver;
pub mod genfun;
pub mod interval;
pub mod markov_measure;
pub mod rational;
mod spectral;
pub mod symbolic_graph;
pub mod word_counts;

pub use circle_map::{CircleMapSpec, CylinderInterval, MarkovPartition, ValidationReport};
pub use entropy_solver::{DirectionSolution, DirectionSpec, EntropyCurve};
pub use interval::Interval;
pub use rational::Rational;
pub use symbolic_graph::{RotationInterval, StructureReport, WeightedGraph};
pub use word_counts::{CountMatrix, StripSpec};
