//! Exact rational intervals with individually open or closed endpoints.
//!
//! Partition elements are half-open `[a, b)`, but preimages under
//! orientation-reversing affine pieces flip endpoint types, so cylinders
//! need the general form.

use crate::rational::Rational;
use num_traits::Zero;
use std::fmt;

/// An interval over the rationals; each endpoint is open or closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// `[lo, hi)`
    pub fn half_open(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi, true, false)
    }

    /// `[lo, hi]`
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval::new(lo, hi, true, true)
    }

    pub fn empty() -> Self {
        Interval::new(Rational::zero(), Rational::zero(), false, false)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Length `hi - lo`, zero for empty intervals.
    pub fn length(&self) -> Rational {
        if self.is_empty() {
            Rational::zero()
        } else {
            &self.hi - &self.lo
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above_lo = x > &self.lo || (x == &self.lo && self.lo_closed);
        let below_hi = x < &self.hi || (x == &self.hi && self.hi_closed);
        above_lo && below_hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::empty();
        }
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    pub fn translate(&self, shift: &Rational) -> Interval {
        Interval::new(
            &self.lo + shift,
            &self.hi + shift,
            self.lo_closed,
            self.hi_closed,
        )
    }

    /// Exact preimage `{x : slope*x + intercept ∈ self}` for `slope != 0`.
    /// A negative slope swaps which endpoint is closed.
    pub fn preimage_affine(&self, slope: &Rational, intercept: &Rational) -> Interval {
        assert!(!slope.is_zero(), "affine piece with zero slope");
        let a = (&self.lo - intercept) / slope;
        let b = (&self.hi - intercept) / slope;
        if slope > &Rational::zero() {
            Interval::new(a, b, self.lo_closed, self.hi_closed)
        } else {
            Interval::new(b, a, self.hi_closed, self.lo_closed)
        }
    }

    /// True when `other`'s closure is contained in `self`'s closure.
    pub fn closure_covers(&self, other: &Interval) -> bool {
        !other.is_empty() && self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            crate::rational::format_rational(&self.lo),
            crate::rational::format_rational(&self.hi),
            if self.hi_closed { ']' } else { ')' },
        )
    }
}
