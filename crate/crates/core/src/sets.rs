//! Finite unions of half-open intervals and step functions on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_infinite() || hi.is_infinite() {
            return Err(Error::UnboundedSupport);
        }
        if !(lo <= hi) {
            return Err(Error::InvalidInterval(lo, hi));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Interval {
        let a = self.lo.max(lo);
        let b = self.hi.min(hi);
        Interval { lo: a, hi: b.max(a) }
    }
}

/// Finite union of disjoint half-open intervals, kept sorted and merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        let mut ivs = raw.iter().map(|&(a, b)| Interval::new(a, b)).collect::<Result<Vec<_>>>()?;
        ivs.retain(|iv| !iv.is_empty());
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[(lo, hi)])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Smallest and largest endpoint, if non-empty.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.lo, self.intervals.last()?.hi))
    }

    /// Intersection with `(lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        IntervalSet {
            intervals: self.intervals.iter().map(|iv| iv.intersect(lo, hi)).filter(|iv| !iv.is_empty()).collect(),
        }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let raw: Vec<(f64, f64)> = self.intervals.iter().chain(&other.intervals).map(|iv| (iv.lo, iv.hi)).collect();
        IntervalSet::new(&raw).expect("finite intervals")
    }
}

impl TryFrom<Vec<[f64; 2]>> for IntervalSet {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        let raw: Vec<(f64, f64)> = v.into_iter().map(|[a, b]| (a, b)).collect();
        IntervalSet::new(&raw)
    }
}

impl From<IntervalSet> for Vec<[f64; 2]> {
    fn from(s: IntervalSet) -> Self {
        s.intervals.iter().map(|iv| [iv.lo, iv.hi]).collect()
    }
}

/// Step function `sum_i v_i 1_{(a_i, b_i]}` with disjoint pieces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct StepFunction {
    pieces: Vec<(Interval, f64)>,
}

impl StepFunction {
    /// Pieces are `(lo, hi, value)`; they must not overlap.
    pub fn new(raw: &[(f64, f64, f64)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(raw.len());
        for &(a, b, v) in raw {
            if !v.is_finite() {
                return Err(Error::UnboundedSupport);
            }
            let iv = Interval::new(a, b)?;
            if !iv.is_empty() && v != 0.0 {
                pieces.push((iv, v));
            }
        }
        pieces.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        if pieces.windows(2).any(|w| w[1].0.lo < w[0].0.hi) {
            return Err(Error::InvalidInterval(f64::NAN, f64::NAN));
        }
        Ok(Self { pieces })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[(lo, hi, 1.0)])
    }

    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self { pieces: self.pieces.iter().map(|&(iv, v)| (iv, c * v)).collect() }
    }

    pub fn pieces(&self) -> &[(Interval, f64)] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces.iter().find(|(iv, _)| iv.contains(x)).map_or(0.0, |&(_, v)| v)
    }

    /// `int phi^n dx` from the step representation.
    pub fn integral_pow(&self, n: u32) -> f64 {
        self.pieces.iter().map(|(iv, v)| v.powi(n as i32) * iv.len()).sum()
    }

    /// `int |phi|^p dx`.
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        self.pieces.iter().map(|(iv, v)| v.abs().powf(p) * iv.len()).sum()
    }

    /// Support hull.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.0.lo, self.pieces.last()?.0.hi))
    }

    /// Same function with every piece split at the given cut points.
    pub fn refined(&self, cuts: &[f64]) -> Self {
        let mut pieces = Vec::new();
        for &(iv, v) in &self.pieces {
            let mut inner: Vec<f64> = cuts.iter().copied().filter(|&c| c > iv.lo && c < iv.hi).collect();
            inner.sort_by(f64::total_cmp);
            inner.dedup();
            let mut lo = iv.lo;
            for c in inner.into_iter().chain(std::iter::once(iv.hi)) {
                pieces.push((Interval { lo, hi: c }, v));
                lo = c;
            }
        }
        Self { pieces }
    }
}

impl TryFrom<Vec<[f64; 3]>> for StepFunction {
    type Error = Error;
    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        let raw: Vec<(f64, f64, f64)> = v.into_iter().map(|[a, b, c]| (a, b, c)).collect();
        StepFunction::new(&raw)
    }
}

impl From<StepFunction> for Vec<[f64; 3]> {
    fn from(s: StepFunction) -> Self {
        s.pieces.iter().map(|(iv, v)| [iv.lo, iv.hi, *v]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_merge_and_measure() {
        let s = IntervalSet::new(&[(2.0, 3.0), (0.0, 1.0), (0.5, 1.5), (4.0, 4.0)]).unwrap();
        assert_eq!(s.intervals().len(), 2);
        assert_eq!(s.measure(), 2.5);
        assert!(s.contains(1.5) && !s.contains(0.0) && s.contains(3.0));
        assert_eq!(s.clip(-1.0, 2.5).measure(), 2.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(matches!(IntervalSet::interval(1.0, 0.0), Err(Error::InvalidInterval(..))));
        assert_eq!(IntervalSet::interval(0.0, f64::INFINITY).unwrap_err(), Error::UnboundedSupport);
        assert!(StepFunction::new(&[(0.0, 2.0, 1.0), (1.0, 3.0, 1.0)]).is_err());
    }

    #[test]
    fn step_integrals() {
        let phi = StepFunction::new(&[(0.0, 3.0, 2.0)]).unwrap();
        assert_eq!(phi.integral_pow(2), 12.0);
        assert_eq!(phi.integral_pow(3), 24.0);
        assert_eq!(phi.eval(0.0), 0.0);
        assert_eq!(phi.eval(3.0), 2.0);
        let r = phi.refined(&[1.0, 2.5, 7.0]);
        assert_eq!(r.pieces().len(), 3);
        assert_eq!(r.integral_pow(4), phi.integral_pow(4));
    }

    #[test]
    fn serde_round_trip() {
        let s = IntervalSet::new(&[(0.0, 1.0), (2.0, 2.5)]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "[[0.0,1.0],[2.0,2.5]]");
        assert_eq!(serde_json::from_str::<IntervalSet>(&j).unwrap(), s);
    }
}
