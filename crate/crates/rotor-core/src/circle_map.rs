//! Piecewise affine Markov circle maps and their lifts.
//!
//! A map is described exactly by an ordered list of breakpoints
//! `d_0 = 0 < d_1 < ... < d_p = 1` together with the lift values
//! `F(d_0), ..., F(d_p)`; continuity and affinity on each piece are then
//! automatic. Everything here is exact rational arithmetic — floating
//! point would misclassify boundary itineraries.

use crate::interval::Interval;
use crate::rational::{
    format_rational, parse_rational, Rational, RationalParseError,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use thiserror::Error;

/// Depth cap for the dynamical refinement; generous, since the diameter
/// condition is reached after finitely many rounds whenever every cycle
/// of the transition graph expands.
pub const REFINEMENT_DEPTH_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map file syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Rational(#[from] RationalParseError),
    #[error("breakpoints and lift_values have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two breakpoints")]
    TooFewBreakpoints,
    #[error("first breakpoint must be 0")]
    MissingZeroEndpoint,
    #[error("last breakpoint must be 1")]
    MissingUnitEndpoint,
    #[error("breakpoints must be strictly increasing (offender at index {0})")]
    NotIncreasing(usize),
    #[error("spec fails validation: {0}")]
    InvalidSpec(String),
    #[error("dynamical refinement exceeded depth cap {0}")]
    RefinementDiverged(usize),
}

/// On-disk shape of a map file: a JSON object with exactly two keys,
/// each an array of rational strings (`"p"` or `"p/q"`).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    breakpoints: Vec<String>,
    lift_values: Vec<String>,
}

/// Exact description of the lift `F` of a piecewise affine circle map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleMapSpec {
    breakpoints: Vec<Rational>,
    lift_values: Vec<Rational>,
}

/// Parses a map document. See [`CircleMapSpec::from_json`].
pub fn load_map(text: &str) -> Result<CircleMapSpec, MapError> {
    CircleMapSpec::from_json(text)
}

impl CircleMapSpec {
    /// Builds a spec from exact values, enforcing the structural shape
    /// (ordering and the 0/1 endpoints). Semantic conditions — degree one,
    /// lift normalization, Markov invariance, expansion — are reported by
    /// [`CircleMapSpec::validate`] instead.
    pub fn new(
        breakpoints: Vec<Rational>,
        lift_values: Vec<Rational>,
    ) -> Result<Self, MapError> {
        if breakpoints.len() != lift_values.len() {
            return Err(MapError::LengthMismatch(
                breakpoints.len(),
                lift_values.len(),
            ));
        }
        if breakpoints.len() < 2 {
            return Err(MapError::TooFewBreakpoints);
        }
        if !breakpoints[0].is_zero() {
            return Err(MapError::MissingZeroEndpoint);
        }
        if !breakpoints[breakpoints.len() - 1].is_one() {
            return Err(MapError::MissingUnitEndpoint);
        }
        for i in 1..breakpoints.len() {
            if breakpoints[i] <= breakpoints[i - 1] {
                return Err(MapError::NotIncreasing(i));
            }
        }
        Ok(CircleMapSpec { breakpoints, lift_values })
    }

    /// Parses the JSON object `{ "breakpoints": [...], "lift_values": [...] }`.
    /// Extra keys, malformed or non-reduced rationals, and length mismatches
    /// are rejected; syntax errors carry the position reported by the parser.
    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let file: MapFile =
            serde_json::from_str(text).map_err(|e| MapError::Syntax(e.to_string()))?;
        let breakpoints = file
            .breakpoints
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        let lift_values = file
            .lift_values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        CircleMapSpec::new(breakpoints, lift_values)
    }

    /// Number of affine pieces `p`.
    pub fn piece_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn lift_values(&self) -> &[Rational] {
        &self.lift_values
    }

    /// Slope of piece `i`.
    pub fn slope(&self, i: usize) -> Rational {
        (&self.lift_values[i + 1] - &self.lift_values[i])
            / (&self.breakpoints[i + 1] - &self.breakpoints[i])
    }

    /// Index of the piece whose half-open interval `[d_i, d_{i+1})`
    /// contains `x`, for `x` in `[0, 1)`.
    pub fn piece_of(&self, x: &Rational) -> usize {
        debug_assert!(!x.is_negative() && x < &Rational::one());
        match self.breakpoints.binary_search(x) {
            Ok(i) => i.min(self.piece_count() - 1),
            Err(i) => i - 1,
        }
    }

    /// Exact evaluation of the lift at any rational `x`, reducing with
    /// `F(x + 1) = F(x) + 1`.
    pub fn lift_eval(&self, x: &Rational) -> Rational {
        let shift = x.floor();
        let frac = x - &shift;
        let i = self.piece_of(&frac);
        let value = &self.lift_values[i]
            + self.slope(i) * (&frac - &self.breakpoints[i]);
        value + shift
    }

    /// Exact orbit of the lift: `(x, F(x), ..., F^n(x))`, `n + 1` values.
    pub fn lift_orbit(&self, x: &Rational, n: usize) -> Vec<Rational> {
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(x.clone());
        for _ in 0..n {
            let next = self.lift_eval(orbit.last().unwrap());
            orbit.push(next);
        }
        orbit
    }

    /// The circle map value `f(x) = F(x) mod 1`.
    pub fn circle_eval(&self, x: &Rational) -> Rational {
        let v = self.lift_eval(x);
        &v - v.floor()
    }

    /// Positive-length transition structure of the unrefined partition:
    /// `a_ij = 1` iff `f(int ξ_i) ∩ int ξ_j` has positive length. Used for
    /// the eventual-expansion cycle check, where image diameters may still
    /// exceed 1.
    fn coarse_adjacency(&self) -> Vec<Vec<bool>> {
        let p = self.piece_count();
        let mut adj = vec![vec![false; p]; p];
        for i in 0..p {
            let a = &self.lift_values[i];
            let b = &self.lift_values[i + 1];
            let (img_lo, img_hi) = if a <= b { (a, b) } else { (b, a) };
            for j in 0..p {
                let e_lo = &self.breakpoints[j];
                let e_hi = &self.breakpoints[j + 1];
                // scan integer translates ξ_j + s against [img_lo, img_hi]
                let s_min = (img_lo - e_hi).floor().to_integer();
                let s_max = (img_hi - e_lo).ceil().to_integer();
                let mut s = s_min;
                while s <= s_max {
                    let shift = Rational::from_integer(s.clone());
                    let lo = (e_lo + &shift).max(img_lo.clone());
                    let hi = (e_hi + &shift).min(img_hi.clone());
                    if lo < hi {
                        adj[i][j] = true;
                        break;
                    }
                    s += BigInt::one();
                }
            }
        }
        adj
    }

    /// Checks the defining conditions and reports each with a witness.
    /// Failures do not abort: downstream constructors refuse unvalidated
    /// specs instead.
    pub fn validate(&self) -> ValidationReport {
        let p = self.piece_count();
        let one = Rational::one();
        let mut checks = Vec::new();

        let degree = &self.lift_values[p] - &self.lift_values[0];
        checks.push(ConditionCheck {
            kind: ConditionKind::DegreeOne,
            passed: degree == one,
            witness: (degree != one).then(|| {
                format!("DegreeNotOne: F(1) - F(0) = {}", format_rational(&degree))
            }),
        });

        let f0 = &self.lift_values[0];
        let normalized = !f0.is_negative() && f0 <= &one;
        checks.push(ConditionCheck {
            kind: ConditionKind::LiftNormalized,
            passed: normalized,
            witness: (!normalized).then(|| {
                format!("LiftNotNormalized: F(0) = {} not in [0,1]", format_rational(f0))
            }),
        });

        let mut markov_witness = None;
        for (i, v) in self.lift_values.iter().enumerate() {
            let frac = v - v.floor();
            if self.breakpoints.binary_search(&frac).is_err() {
                markov_witness = Some(format!(
                    "MarkovViolation: F({}) = {} maps to {} mod 1, not a breakpoint",
                    format_rational(&self.breakpoints[i]),
                    format_rational(v),
                    format_rational(&frac),
                ));
                break;
            }
        }
        checks.push(ConditionCheck {
            kind: ConditionKind::MarkovInvariance,
            passed: markov_witness.is_none(),
            witness: markov_witness,
        });

        let mut zero_slope = None;
        let mut sub_unit_slope = None;
        let mut unit_slope_pieces = Vec::new();
        let mut all_strict = true;
        for i in 0..p {
            let s = self.slope(i);
            let mag_cmp = s.abs().cmp(&one);
            if s.is_zero() {
                zero_slope.get_or_insert(i);
            } else if mag_cmp == std::cmp::Ordering::Less {
                sub_unit_slope.get_or_insert(i);
            } else if mag_cmp == std::cmp::Ordering::Equal {
                unit_slope_pieces.push(i);
                all_strict = false;
            }
        }
        checks.push(ConditionCheck {
            kind: ConditionKind::NonzeroSlope,
            passed: zero_slope.is_none(),
            witness: zero_slope.map(|i| format!("ZeroSlope: piece {i} is constant")),
        });

        // Expansion: |a_i| >= 1 everywhere and every transition-graph cycle
        // has slope-magnitude product > 1, i.e. the subgraph induced on
        // magnitude-1 pieces is acyclic. Strict mode additionally demands
        // |a_i| > 1 on every piece.
        let (expansion, witness) = if zero_slope.is_some() {
            (ExpansionStatus::Fails, Some("ZeroSlope piece".to_owned()))
        } else if let Some(i) = sub_unit_slope {
            (
                ExpansionStatus::Fails,
                Some(format!(
                    "NotExpanding: |slope| < 1 on piece {i} ({})",
                    format_rational(&self.slope(i))
                )),
            )
        } else if all_strict {
            (ExpansionStatus::Strict, None)
        } else {
            let adj = self.coarse_adjacency();
            match cycle_within(&adj, &unit_slope_pieces) {
                Some(cycle) => (
                    ExpansionStatus::Fails,
                    Some(format!(
                        "NonExpandingCycle: states {cycle:?} form a cycle of slope-magnitude product 1"
                    )),
                ),
                None => (ExpansionStatus::Eventual, None),
            }
        };
        checks.push(ConditionCheck {
            kind: ConditionKind::Expansion,
            passed: expansion != ExpansionStatus::Fails,
            witness,
        });

        ValidationReport { checks, expansion }
    }

    /// Returns the coarsest dynamical refinement whose elements all have
    /// image diameter `< 1`, together with its depth.
    pub fn refine(&self) -> Result<MarkovPartition, MapError> {
        let report = self.validate();
        if let Some(reason) = report.first_failure(false) {
            return Err(MapError::InvalidSpec(reason));
        }

        // breakpoints of the current partition of [0,1); 1 is implicit
        let mut points: Vec<Rational> =
            self.breakpoints[..self.breakpoints.len() - 1].to_vec();
        let mut depth = 0usize;
        loop {
            if self.max_image_diameter_ok(&points) {
                return Ok(self.partition_from_points(points, depth));
            }
            if depth >= REFINEMENT_DEPTH_CAP {
                return Err(MapError::RefinementDiverged(REFINEMENT_DEPTH_CAP));
            }
            points = self.refine_points_once(points);
            depth += 1;
        }
    }

    fn element_bounds<'a>(
        &self,
        points: &'a [Rational],
        i: usize,
    ) -> (&'a Rational, Rational) {
        let lo = &points[i];
        let hi = if i + 1 < points.len() {
            points[i + 1].clone()
        } else {
            Rational::one()
        };
        (lo, hi)
    }

    fn max_image_diameter_ok(&self, points: &[Rational]) -> bool {
        for i in 0..points.len() {
            let (lo, hi) = self.element_bounds(points, i);
            let diam = (self.lift_eval(&hi) - self.lift_eval(lo)).abs();
            if diam >= Rational::one() {
                return false;
            }
        }
        true
    }

    /// One refinement round: adds every interior preimage of a current
    /// breakpoint, which turns `ξ^(k)` into `ξ^(k+1)`.
    fn refine_points_once(&self, points: Vec<Rational>) -> Vec<Rational> {
        let mut targets = points.clone();
        targets.push(Rational::one());
        let mut new_points = points.clone();
        for i in 0..points.len() {
            let (lo, hi) = self.element_bounds(&points, i);
            let f_lo = self.lift_eval(lo);
            let f_hi = self.lift_eval(&hi);
            let (img_lo, img_hi) = if f_lo <= f_hi {
                (f_lo.clone(), f_hi.clone())
            } else {
                (f_hi.clone(), f_lo.clone())
            };
            let piece = self.piece_of(lo);
            let slope = self.slope(piece);
            for c in &targets {
                let s_min = (&img_lo - c).ceil().to_integer();
                let s_max = (&img_hi - c).floor().to_integer();
                let mut s = s_min;
                while s <= s_max {
                    let target = c + Rational::from_integer(s.clone());
                    // x with F(x) = target on this affine element
                    let x = lo + (&target - &f_lo) / &slope;
                    if &x > lo && x < hi {
                        new_points.push(x.clone());
                    }
                    s += BigInt::one();
                }
            }
        }
        new_points.sort();
        new_points.dedup();
        new_points
    }

    fn partition_from_points(
        &self,
        points: Vec<Rational>,
        depth: usize,
    ) -> MarkovPartition {
        let mut elements = Vec::with_capacity(points.len());
        let mut slopes = Vec::with_capacity(points.len());
        let mut values_at_left = Vec::with_capacity(points.len());
        for i in 0..points.len() {
            let (lo, hi) = self.element_bounds(&points, i);
            elements.push(Interval::half_open(lo.clone(), hi));
            slopes.push(self.slope(self.piece_of(lo)));
            values_at_left.push(self.lift_eval(lo));
        }
        MarkovPartition { elements, slopes, values_at_left, refinement_depth: depth }
    }
}

/// DFS for a cycle within the subgraph induced on `states`.
fn cycle_within(adj: &[Vec<bool>], states: &[usize]) -> Option<Vec<usize>> {
    let in_set: Vec<bool> = {
        let mut v = vec![false; adj.len()];
        for &s in states {
            v[s] = true;
        }
        v
    };
    // colors: 0 unvisited, 1 on stack, 2 done
    let mut color = vec![0u8; adj.len()];
    fn dfs(
        u: usize,
        adj: &[Vec<bool>],
        in_set: &[bool],
        color: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        color[u] = 1;
        stack.push(u);
        for v in 0..adj.len() {
            if !adj[u][v] || !in_set[v] {
                continue;
            }
            if color[v] == 1 {
                let start = stack.iter().position(|&w| w == v).unwrap();
                return Some(stack[start..].to_vec());
            }
            if color[v] == 0 {
                if let Some(c) = dfs(v, adj, in_set, color, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        color[u] = 2;
        None
    }
    for &s in states {
        if color[s] == 0 {
            let mut stack = Vec::new();
            if let Some(c) = dfs(s, adj, &in_set, &mut color, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    DegreeOne,
    LiftNormalized,
    MarkovInvariance,
    NonzeroSlope,
    Expansion,
}

#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub kind: ConditionKind,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionStatus {
    /// `|a_i| > 1` on every piece.
    Strict,
    /// Some `|a_i| = 1`, but every cycle has slope-magnitude product `> 1`.
    Eventual,
    Fails,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    pub expansion: ExpansionStatus,
}

impl ValidationReport {
    /// In strict mode only [`ExpansionStatus::Strict`] passes the
    /// expansion condition; otherwise eventual expansion is accepted.
    pub fn ok(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| c.passed)
            && match self.expansion {
                ExpansionStatus::Strict => true,
                ExpansionStatus::Eventual => !strict,
                ExpansionStatus::Fails => false,
            }
    }

    pub fn first_failure(&self, strict: bool) -> Option<String> {
        for c in &self.checks {
            if !c.passed {
                return Some(c.witness.clone().unwrap_or_else(|| format!("{:?}", c.kind)));
            }
        }
        if strict && self.expansion == ExpansionStatus::Eventual {
            return Some("NotStrictlyExpanding: some piece has |slope| = 1".to_owned());
        }
        None
    }

    pub fn check(&self, kind: ConditionKind) -> &ConditionCheck {
        self.checks.iter().find(|c| c.kind == kind).unwrap()
    }
}

/// A refined Markov partition: the half-open elements tiling `[0, 1)`,
/// with the affine data of the lift restricted to each element.
#[derive(Clone, Debug)]
pub struct MarkovPartition {
    elements: Vec<Interval>,
    slopes: Vec<Rational>,
    values_at_left: Vec<Rational>,
    refinement_depth: usize,
}

/// A cylinder `Δ_w` together with its word. Empty iff the word is not
/// graph-admissible. Orientation-reversing pieces flip which endpoint is
/// closed, so the interval is not always half-open.
#[derive(Clone, Debug)]
pub struct CylinderInterval {
    pub word: Vec<usize>,
    pub interval: Interval,
}

impl MarkovPartition {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn refinement_depth(&self) -> usize {
        self.refinement_depth
    }

    pub fn element(&self, i: usize) -> &Interval {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Interval] {
        &self.elements
    }

    pub fn slope(&self, i: usize) -> &Rational {
        &self.slopes[i]
    }

    /// `F` restricted to element `i`, evaluated at `x`.
    pub fn lift_on_element(&self, i: usize, x: &Rational) -> Rational {
        &self.values_at_left[i] + &self.slopes[i] * (x - self.elements[i].lo())
    }

    /// Closed image `[lo, hi]` of element `i` under `F`.
    pub fn image(&self, i: usize) -> (Rational, Rational) {
        let a = self.values_at_left[i].clone();
        let b = self.lift_on_element(i, self.elements[i].hi());
        if a <= b { (a, b) } else { (b, a) }
    }

    /// Element containing `x ∈ [0, 1)` under the half-open convention.
    pub fn locate(&self, x: &Rational) -> usize {
        debug_assert!(!x.is_negative() && x < &Rational::one());
        let mut lo = 0usize;
        let mut hi = self.elements.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.elements[mid].lo() <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// The exact cylinder `Δ_w = ξ_{w0} ∩ f^{-1}ξ_{w1} ∩ … ∩ f^{-n+1}ξ_{w_{n-1}}`,
    /// empty iff `w` is not admissible.
    pub fn cylinder(&self, word: &[usize]) -> CylinderInterval {
        assert!(!word.is_empty(), "cylinder of the empty word");
        assert!(
            word.iter().all(|&s| s < self.len()),
            "cylinder word state out of range"
        );
        let mut current = self.elements[word[word.len() - 1]].clone();
        for i in (0..word.len() - 1).rev() {
            if current.is_empty() {
                break;
            }
            current = self.pull_back(word[i], &current);
        }
        CylinderInterval { word: word.to_vec(), interval: current }
    }

    /// `{x ∈ ξ_i : f(x) ∈ target}` for `target ⊆ [0,1)`: finds the unique
    /// integer translate of `target` meeting `F(ξ_i)` with positive length
    /// (unique because image diameters are < 1 after refinement) and pulls
    /// it back through the affine piece.
    fn pull_back(&self, i: usize, target: &Interval) -> Interval {
        let (img_lo, img_hi) = self.image(i);
        let s_min = (&img_lo - target.hi()).floor().to_integer();
        let s_max = (&img_hi - target.lo()).ceil().to_integer();
        let slope = &self.slopes[i];
        let intercept = &self.values_at_left[i] - slope * self.elements[i].lo();
        let mut s = s_min;
        while s <= s_max {
            let shifted = target.translate(&Rational::from_integer(s.clone()));
            let olo = shifted.lo().clone().max(img_lo.clone());
            let ohi = shifted.hi().clone().min(img_hi.clone());
            if olo < ohi {
                let pre = shifted.preimage_affine(slope, &intercept);
                return pre.intersect(&self.elements[i]);
            }
            s += BigInt::one();
        }
        Interval::empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) const FIXTURE_JSON: &str = r#"{
        "breakpoints": ["0", "1/3", "2/3", "1"],
        "lift_values": ["1/3", "1", "2/3", "4/3"]
    }"#;

    fn fixture() -> CircleMapSpec {
        load_map(FIXTURE_JSON).unwrap()
    }

    #[test]
    fn loads_fixture() {
        let spec = fixture();
        assert_eq!(spec.piece_count(), 3);
        assert_eq!(spec.slope(0), rat(2, 1));
        assert_eq!(spec.slope(1), rat(-1, 1));
        assert_eq!(spec.slope(2), rat(2, 1));
    }

    #[test]
    fn loads_identity_format() {
        let spec = load_map(r#"{"breakpoints":["0","1"],"lift_values":["0","1"]}"#).unwrap();
        assert_eq!(spec.piece_count(), 1);
        assert_eq!(spec.slope(0), rat(1, 1));
    }

    #[test]
    fn rejects_missing_unit_endpoint() {
        let err = load_map(r#"{"breakpoints":["0","1/2"],"lift_values":["0","1"]}"#);
        assert!(matches!(err, Err(MapError::MissingUnitEndpoint)));
    }

    #[test]
    fn rejects_extra_keys() {
        let err = load_map(
            r#"{"breakpoints":["0","1"],"lift_values":["0","1"],"name":"x"}"#,
        );
        assert!(matches!(err, Err(MapError::Syntax(_))));
    }

    #[test]
    fn rejects_non_reduced_rational() {
        let err = load_map(r#"{"breakpoints":["0","2/4","1"],"lift_values":["0","1","1"]}"#);
        assert!(matches!(
            err,
            Err(MapError::Rational(RationalParseError::NotReduced(_)))
        ));
    }

    #[test]
    fn fixture_validates_with_eventual_expansion() {
        let report = fixture().validate();
        assert!(report.ok(false));
        assert!(!report.ok(true), "middle slope -1 must fail strict mode");
        assert_eq!(report.expansion, ExpansionStatus::Eventual);
    }

    #[test]
    fn doubling_spec_fails_degree() {
        let spec = load_map(r#"{"breakpoints":["0","1/2","1"],"lift_values":["0","1","2"]}"#)
            .unwrap();
        let report = spec.validate();
        assert!(!report.check(ConditionKind::DegreeOne).passed);
        assert!(report
            .first_failure(false)
            .unwrap()
            .contains("DegreeNotOne"));
    }

    #[test]
    fn markov_violation_reported_with_witness() {
        let spec = CircleMapSpec::new(
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            vec![rat(0, 1), rat(3, 10), rat(1, 1)],
        )
        .unwrap();
        let report = spec.validate();
        let check = report.check(ConditionKind::MarkovInvariance);
        assert!(!check.passed);
        assert!(check.witness.as_ref().unwrap().contains("3/10"));
    }

    #[test]
    fn rigid_one_piece_spec_fails_expansion() {
        let spec = CircleMapSpec::new(
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 2), rat(3, 2)],
        )
        .unwrap();
        let report = spec.validate();
        assert_eq!(report.expansion, ExpansionStatus::Fails);
        assert!(spec.refine().is_err());
    }

    #[test]
    fn fixture_refines_at_depth_zero() {
        let part = fixture().refine().unwrap();
        assert_eq!(part.refinement_depth(), 0);
        assert_eq!(part.len(), 3);
        assert_eq!(
            part.elements(),
            &[
                Interval::half_open(rat(0, 1), rat(1, 3)),
                Interval::half_open(rat(1, 3), rat(2, 3)),
                Interval::half_open(rat(2, 3), rat(1, 1)),
            ]
        );
    }

    #[test]
    fn wide_image_forces_refinement() {
        // diam F([0,1/2)) = 3/2, so at least one round is needed
        let spec = CircleMapSpec::new(
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            vec![rat(0, 1), rat(3, 2), rat(1, 1)],
        )
        .unwrap();
        let part = spec.refine().unwrap();
        assert!(part.refinement_depth() >= 1);
        for i in 0..part.len() {
            let (lo, hi) = part.image(i);
            assert!(hi - lo < rat(1, 1));
        }
    }

    #[test]
    fn fixture_cylinders() {
        let part = fixture().refine().unwrap();
        // paper states 1..3 are code states 0..2
        let c = part.cylinder(&[0]);
        assert_eq!(c.interval, Interval::half_open(rat(0, 1), rat(1, 3)));
        let c = part.cylinder(&[0, 1]);
        assert_eq!(c.interval, Interval::half_open(rat(0, 1), rat(1, 6)));
        let c = part.cylinder(&[1, 0]);
        assert!(c.interval.is_empty(), "transition 2->1 is inadmissible");
    }

    #[test]
    fn fixture_orbits() {
        let spec = fixture();
        assert_eq!(
            spec.lift_orbit(&rat(0, 1), 2),
            vec![rat(0, 1), rat(1, 3), rat(1, 1)]
        );
        assert_eq!(spec.lift_orbit(&rat(0, 1), 0), vec![rat(0, 1)]);
        assert_eq!(spec.lift_orbit(&rat(5, 6), 1), vec![rat(5, 6), rat(1, 1)]);
    }

    #[test]
    fn refinement_is_idempotent() {
        let spec = CircleMapSpec::new(
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            vec![rat(0, 1), rat(3, 2), rat(1, 1)],
        )
        .unwrap();
        let part = spec.refine().unwrap();
        // rebuild a spec from the refined breakpoints and refine again
        let mut bps: Vec<Rational> =
            part.elements().iter().map(|e| e.lo().clone()).collect();
        bps.push(rat(1, 1));
        let vals: Vec<Rational> = bps.iter().map(|b| spec.lift_eval(b)).collect();
        let spec2 = CircleMapSpec::new(bps, vals).unwrap();
        assert_eq!(spec2.refine().unwrap().refinement_depth(), 0);
    }
}
