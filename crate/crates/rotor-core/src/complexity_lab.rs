//! Empirical `(ε, W, T)`-separated sets by exact orbit iteration.
//!
//! A window of direction `θ` confines orbit points to
//! `l1 + n·cot θ <= F^n x <= l2 + n·cot θ`. Separated sets are built
//! greedily from representatives inside the depth-`T` cylinders that
//! survive the window, every pair verified exactly, and bracketed by the
//! strip-count bounds: at most `⌊1/ε⌋·|B_{T,α,r+1}|` points fit, and a
//! block scheme over `T = km` guarantees at least `3^{-k}|B_{km,α,r}|`.

use crate::circle_map::{CircleMapSpec, MarkovPartition};
use crate::rational::{to_f64, Rational};
use crate::symbolic_graph::WeightedGraph;
use crate::word_counts::{count_b, enumerate_words, CountError, StripSpec, WordFilter};
use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact-orbit cost grows with the branch count; depth is capped.
pub const HORIZON_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("horizon {0} exceeds the cap {HORIZON_CAP}")]
    HorizonCapExceeded(usize),
    #[error("epsilon {epsilon} exceeds the minimal depth-{m} cylinder length {cap}")]
    EpsilonTooLarge { epsilon: String, m: usize, cap: String },
    #[error("block depth {m} does not divide the horizon {t}")]
    BadBlock { t: usize, m: usize },
    #[error(transparent)]
    Count(#[from] CountError),
}

/// Space-time window `W(l1, l2, θ)`, carried as `α = cot θ` exactly.
#[derive(Clone, Debug)]
pub struct WindowSpec {
    pub l1: Rational,
    pub l2: Rational,
    pub alpha: Rational,
}

impl WindowSpec {
    pub fn new(alpha: Rational, l1: Rational, l2: Rational) -> Self {
        assert!(l1 < l2, "window needs l1 < l2");
        WindowSpec { l1, l2, alpha }
    }

    /// The theorem windows `[-r, r]`.
    pub fn symmetric(alpha: Rational, r: u32) -> Self {
        let r = Rational::from_integer(r.into());
        WindowSpec { l1: -r.clone(), l2: r, alpha }
    }

    /// `θ = arccot α` on the principal branch `(0, π)`.
    pub fn theta(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - to_f64(&self.alpha).atan()
    }

    /// `Some(r)` when the window is exactly `[-r, r]` with integer `r >= 1`.
    pub fn symmetric_radius(&self) -> Option<u32> {
        if self.l1 != -self.l2.clone() {
            return None;
        }
        if !self.l2.is_integer() || self.l2 < Rational::one() {
            return None;
        }
        self.l2.to_integer().to_u32()
    }

    /// Exact membership of `(x_n, n)`: `l1 + nα <= x_n <= l2 + nα`.
    pub fn admits(&self, x_n: &Rational, n: usize) -> bool {
        let shift = &self.alpha * Rational::from_integer(n.into());
        let lo = &self.l1 + &shift;
        let hi = &self.l2 + &shift;
        &lo <= x_n && x_n <= &hi
    }
}

/// Minimal length over the nonempty depth-`m` cylinders.
pub fn epsilon_m(
    partition: &MarkovPartition,
    g: &WeightedGraph,
    m: usize,
) -> Result<Rational, ComplexityError> {
    assert!(m >= 1, "cylinder depth must be positive");
    let words = enumerate_words(g, m, &WordFilter::All)?;
    let mut min: Option<Rational> = None;
    for w in &words {
        let cyl = partition.cylinder(w);
        if cyl.interval.is_empty() {
            continue;
        }
        let len = cyl.interval.length();
        min = Some(match min {
            Some(cur) => cur.min(len),
            None => len,
        });
    }
    Ok(min.expect("admissible words exist for every valid graph"))
}

/// Exact check of the window inequalities along the orbit `F^0 x .. F^T x`.
pub fn orbit_in_window(
    spec: &CircleMapSpec,
    x: &Rational,
    window: &WindowSpec,
    t: usize,
) -> bool {
    let orbit = spec.lift_orbit(x, t);
    orbit.iter().enumerate().all(|(n, v)| window.admits(v, n))
}

/// A verified `(ε, W, T)`-separated set with the theorem bounds.
#[derive(Clone, Debug)]
pub struct SeparationResult {
    /// Itinerary length: orbit times `0..=t-1` are constrained.
    pub t: usize,
    pub epsilon: Rational,
    /// Block decomposition `t = m·k` used for the lower bound.
    pub block: (usize, usize),
    /// The separated points, ascending.
    pub points: Vec<Rational>,
    /// `⌈3^{-k} |B_{km,α,r}|⌉`; present for symmetric integer windows.
    pub lower_bound: Option<BigUint>,
    /// `⌊1/ε⌋ · |B_{t,α,r+1}|`; present for symmetric integer windows.
    pub upper_bound: Option<BigUint>,
}

impl SeparationResult {
    pub fn set_size(&self) -> usize {
        self.points.len()
    }
}

/// Greedily builds a separated set from cylinder representatives:
/// closed cylinder endpoints plus an interior grid sized to the cylinder's
/// final-time image, filtered by the exact window test, kept only when
/// `ε`-separation against every kept point is verified exactly, and capped
/// at `⌊1/ε⌋` points per cylinder to match the upper-bound accounting.
///
/// `block_m` selects the block depth `m` of the lower bound (`t = m·k`);
/// it defaults to `m = t`, `k = 1`.
pub fn separated_set(
    spec: &CircleMapSpec,
    partition: &MarkovPartition,
    g: &WeightedGraph,
    window: &WindowSpec,
    epsilon: &Rational,
    t: usize,
    block_m: Option<usize>,
) -> Result<SeparationResult, ComplexityError> {
    if t > HORIZON_CAP {
        return Err(ComplexityError::HorizonCapExceeded(t));
    }
    assert!(epsilon > &Rational::zero(), "epsilon must be positive");

    if t == 0 {
        // no dynamics: an ε-grid on [l1, l2] is separated at time 0
        let mut points = Vec::new();
        let mut x = window.l1.clone();
        while x <= window.l2 {
            points.push(x.clone());
            x += epsilon;
        }
        return Ok(SeparationResult {
            t,
            epsilon: epsilon.clone(),
            block: (0, 0),
            points,
            lower_bound: None,
            upper_bound: None,
        });
    }

    let m = block_m.unwrap_or(t);
    if m == 0 || t % m != 0 {
        return Err(ComplexityError::BadBlock { t, m });
    }
    let k = t / m;
    let eps_cap = epsilon_m(partition, g, m)?;
    if epsilon > &eps_cap {
        return Err(ComplexityError::EpsilonTooLarge {
            epsilon: crate::rational::format_rational(epsilon),
            m,
            cap: crate::rational::format_rational(&eps_cap),
        });
    }

    let per_cylinder_cap = (Rational::one() / epsilon)
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(1);

    // candidate representatives per cylinder, cylinders ordered by left
    // endpoint for a deterministic greedy pass
    let words = enumerate_words(g, t, &WordFilter::All)?;
    let mut groups: Vec<(Rational, Vec<Rational>)> = Vec::new();
    for w in &words {
        let cyl = partition.cylinder(w);
        if cyl.interval.is_empty() {
            continue;
        }
        let iv = &cyl.interval;
        let len = iv.length();
        let mut stretch = Rational::one();
        for &state in &w[..t - 1] {
            stretch *= partition.slope(state).abs();
        }
        let image_len = &len * &stretch;
        let grid = (&image_len / epsilon)
            .floor()
            .to_integer()
            .to_usize()
            .unwrap_or(0)
            .saturating_add(1)
            .min(per_cylinder_cap);
        let mut pts = Vec::with_capacity(grid + 2);
        if iv.lo_closed() {
            pts.push(iv.lo().clone());
        }
        if iv.hi_closed() {
            pts.push(iv.hi().clone());
        }
        for i in 0..grid {
            let frac = Rational::new((2 * i + 1).into(), (2 * grid).into());
            pts.push(iv.lo() + &len * frac);
        }
        pts.sort();
        pts.dedup();
        groups.push((iv.lo().clone(), pts));
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));

    let mut kept_points: Vec<Rational> = Vec::new();
    let mut kept_orbits: Vec<Vec<Rational>> = Vec::new();
    for (_, pts) in &groups {
        let mut taken = 0usize;
        for x in pts {
            if taken >= per_cylinder_cap {
                break;
            }
            let orbit = spec.lift_orbit(x, t - 1);
            if !orbit.iter().enumerate().all(|(n, v)| window.admits(v, n)) {
                continue;
            }
            let separated = kept_orbits.iter().all(|other| {
                orbit
                    .iter()
                    .zip(other)
                    .any(|(a, b)| (a - b).abs() >= *epsilon)
            });
            if separated {
                kept_points.push(x.clone());
                kept_orbits.push(orbit);
                taken += 1;
            }
        }
    }
    kept_points.sort();

    let (lower_bound, upper_bound) = match window.symmetric_radius() {
        Some(r) => {
            let b_r = count_b(g, t, &StripSpec::new(window.alpha.clone(), r)).total();
            let b_r1 = count_b(g, t, &StripSpec::new(window.alpha.clone(), r + 1)).total();
            let three_k = BigUint::from(3u32).pow(k as u32);
            let lower = (&b_r + &three_k - BigUint::one()) / &three_k;
            let upper = BigUint::from(per_cylinder_cap) * b_r1;
            (Some(lower), Some(upper))
        }
        None => (None, None),
    };

    Ok(SeparationResult {
        t,
        epsilon: epsilon.clone(),
        block: (m, k),
        points: kept_points,
        lower_bound,
        upper_bound,
    })
}

/// One row of the bounds table.
#[derive(Clone, Debug)]
pub struct BoundsRow {
    pub t: usize,
    pub lower: BigUint,
    pub observed: usize,
    pub upper: BigUint,
    /// `ln(observed)/T`
    pub rate: f64,
}

/// Sandwich table over `T = m, 2m, ..., k_max·m` for the window `[-r, r]`,
/// demonstrating the bracket that defines the directional entropy. The
/// resolution defaults to `ε_m`.
#[allow(clippy::too_many_arguments)]
pub fn bounds_report(
    spec: &CircleMapSpec,
    partition: &MarkovPartition,
    g: &WeightedGraph,
    alpha: Rational,
    r: u32,
    m: usize,
    k_max: usize,
    epsilon: Option<Rational>,
) -> Result<Vec<BoundsRow>, ComplexityError> {
    let epsilon = match epsilon {
        Some(eps) => eps,
        None => epsilon_m(partition, g, m)?,
    };
    let window = WindowSpec::symmetric(alpha, r);
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let t = k * m;
        let result = separated_set(spec, partition, g, &window, &epsilon, t, Some(m))?;
        let observed = result.set_size();
        rows.push(BoundsRow {
            t,
            lower: result.lower_bound.unwrap(),
            observed,
            upper: result.upper_bound.unwrap(),
            rate: if observed > 0 {
                (observed as f64).ln() / t as f64
            } else {
                f64::NEG_INFINITY
            },
        });
    }
    Ok(rows)
}
