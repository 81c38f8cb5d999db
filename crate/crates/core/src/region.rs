//! Finite unions of half-open intervals `[lo, hi)` with exact endpoints.
//!
//! A [`Region`] is always kept canonical: intervals are nonempty, sorted,
//! pairwise disjoint and never touching. Sets are taken modulo null sets, so a
//! canonical region is the unique representative of its class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x < &self.hi
    }

    /// Closed-interval membership, used for infima over closures.
    pub fn closure_contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        if lo < hi {
            Some(Interval::new(lo.clone(), hi.clone()))
        } else {
            None
        }
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lo + &self.hi).half()
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Region {
    ivs: Vec<Interval>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ivs.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.ivs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{:?}", iv)?;
        }
        Ok(())
    }
}

impl Region {
    pub fn empty() -> Self {
        Region { ivs: Vec::new() }
    }

    pub fn interval(lo: Scalar, hi: Scalar) -> Self {
        if lo < hi {
            Region { ivs: vec![Interval::new(lo, hi)] }
        } else {
            Region::empty()
        }
    }

    /// Builds the canonical union of arbitrary (possibly overlapping, unsorted) intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(ivs: I) -> Self {
        let mut v: Vec<Interval> = ivs.into_iter().filter(|iv| !iv.is_empty()).collect();
        v.sort_by(|x, y| x.lo.cmp(&y.lo));
        Region { ivs: merge_sorted(v) }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.ivs
    }

    pub fn into_intervals(self) -> Vec<Interval> {
        self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.ivs.len()
    }

    pub fn measure(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for iv in &self.ivs {
            acc += &iv.hi;
            acc -= &iv.lo;
        }
        acc
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        self.locate(x).is_some()
    }

    /// Index of the interval containing `x`.
    pub fn locate(&self, x: &Scalar) -> Option<usize> {
        let idx = self.ivs.partition_point(|iv| &iv.lo <= x);
        if idx == 0 {
            return None;
        }
        if x < &self.ivs[idx - 1].hi {
            Some(idx - 1)
        } else {
            None
        }
    }

    /// Intervals meeting `[lo, hi)` in a set of positive length.
    pub fn overlapping(&self, lo: &Scalar, hi: &Scalar) -> &[Interval] {
        let start = self.ivs.partition_point(|iv| &iv.hi <= lo);
        let end = self.ivs.partition_point(|iv| &iv.lo < hi);
        if start >= end {
            &[]
        } else {
            &self.ivs[start..end]
        }
    }

    pub fn hull(&self) -> Option<Interval> {
        match (self.ivs.first(), self.ivs.last()) {
            (Some(f), Some(l)) => Some(Interval::new(f.lo.clone(), l.hi.clone())),
            _ => None,
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let mut merged = Vec::with_capacity(self.ivs.len() + other.ivs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ivs.len() || j < other.ivs.len() {
            let take_left = j >= other.ivs.len() || (i < self.ivs.len() && self.ivs[i].lo <= other.ivs[j].lo);
            if take_left {
                merged.push(self.ivs[i].clone());
                i += 1;
            } else {
                merged.push(other.ivs[j].clone());
                j += 1;
            }
        }
        Region { ivs: merge_sorted(merged) }
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a Region>>(regions: I) -> Region {
        Region::from_intervals(regions.into_iter().flat_map(|r| r.ivs.iter().cloned()))
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ivs.len() && j < other.ivs.len() {
            let a = &self.ivs[i];
            let b = &other.ivs[j];
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Region { ivs: out }
    }

    pub fn intersect_interval(&self, lo: &Scalar, hi: &Scalar) -> Region {
        let probe = Interval::new(lo.clone(), hi.clone());
        Region { ivs: self.overlapping(lo, hi).iter().filter_map(|iv| iv.intersect(&probe)).collect() }
    }

    pub fn subtract(&self, other: &Region) -> Region {
        if other.is_empty() || self.is_empty() {
            return self.clone();
        }
        let mut out = Vec::new();
        let mut j = 0;
        for a in &self.ivs {
            let mut cur = a.lo.clone();
            while j < other.ivs.len() && other.ivs[j].hi <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.ivs.len() && other.ivs[k].lo < a.hi {
                let b = &other.ivs[k];
                if b.lo > cur {
                    out.push(Interval::new(cur.clone(), b.lo.clone()));
                }
                if b.hi > cur {
                    cur = b.hi.clone();
                }
                if cur >= a.hi {
                    break;
                }
                k += 1;
            }
            if cur < a.hi {
                out.push(Interval::new(cur, a.hi.clone()));
            }
        }
        Region { ivs: out }
    }

    pub fn symmetric_difference(&self, other: &Region) -> Region {
        self.subtract(other).union(&other.subtract(self))
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.subtract(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &Region) -> bool {
        self.intersect(other).is_empty()
    }

    pub fn translate(&self, offset: &Scalar) -> Region {
        Region { ivs: self.ivs.iter().map(|iv| Interval::new(&iv.lo + offset, &iv.hi + offset)).collect() }
    }

    /// Image under `x ↦ offset − x`, re-normalized to half-open intervals.
    pub fn reflect(&self, offset: &Scalar) -> Region {
        Region { ivs: self.ivs.iter().rev().map(|iv| Interval::new(offset - &iv.hi, offset - &iv.lo)).collect() }
    }

    /// Points at distance at least `delta` from the boundary: every component
    /// loses `delta` at both ends, and components of length `<= 2·delta` vanish.
    pub fn shrink(&self, delta: &Scalar) -> Region {
        Region {
            ivs: self
                .ivs
                .iter()
                .map(|iv| Interval::new(&iv.lo + delta, &iv.hi - delta))
                .filter(|iv| !iv.is_empty())
                .collect(),
        }
    }

    /// Open neighbourhood `{x : d(x, self) < delta}`, half-open rendered.
    pub fn grow(&self, delta: &Scalar) -> Region {
        Region::from_intervals(self.ivs.iter().map(|iv| Interval::new(&iv.lo - delta, &iv.hi + delta)))
    }
}

/// Merges intervals sorted by `lo` into canonical form.
fn merge_sorted(v: Vec<Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        if iv.is_empty() {
            continue;
        }
        if let Some(last) = out.last_mut() {
            if iv.lo <= last.hi {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
                continue;
            }
        }
        out.push(iv);
    }
    out
}

/// Splits `base` into maximal pieces by how many of `covers` contain each point.
/// Pieces of equal count that touch are merged; zero-count pieces are included.
pub fn stratify(base: &Region, covers: &[&Region]) -> Vec<(Region, usize)> {
    // events: (position, delta) with +1 at lo and -1 at hi
    let mut events: Vec<(Scalar, i64)> = Vec::new();
    for r in covers {
        for iv in r.intervals() {
            events.push((iv.lo.clone(), 1));
            events.push((iv.hi.clone(), -1));
        }
    }
    events.sort_by(|x, y| x.0.cmp(&y.0));
    let mut pieces: Vec<Vec<Interval>> = Vec::new();
    let mut depth: i64 = 0;
    let mut prev: Option<Scalar> = None;
    let push = |depth: i64, lo: &Scalar, hi: &Scalar, pieces: &mut Vec<Vec<Interval>>| {
        if lo < hi {
            let d = depth as usize;
            if pieces.len() <= d {
                pieces.resize_with(d + 1, Vec::new);
            }
            pieces[d].push(Interval::new(lo.clone(), hi.clone()));
        }
    };
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0.clone();
        if let Some(p) = &prev {
            push(depth, p, &x, &mut pieces);
        }
        while i < events.len() && events[i].0 == x {
            depth += events[i].1;
            i += 1;
        }
        prev = Some(x);
    }
    let mut out = Vec::new();
    let mut covered = Region::empty();
    for (d, ivs) in pieces.into_iter().enumerate() {
        let r = Region::from_intervals(ivs).intersect(base);
        covered = covered.union(&r);
        if d > 0 && !r.is_empty() {
            out.push((r, d));
        }
    }
    let zero = base.subtract(&covered);
    if !zero.is_empty() {
        out.insert(0, (zero, 0));
    }
    out.sort_by_key(|(_, d)| *d);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn iv(a: Scalar, b: Scalar) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn measure_examples() {
        assert_eq!(Region::empty().measure(), Scalar::zero());
        let r = Region::from_intervals([iv(q(0, 1), q(1, 2)), iv(q(3, 4), q(1, 1))]);
        assert_eq!(r.measure(), q(3, 4));
        let beta = Scalar::sqrt2() - Scalar::one();
        assert_eq!(Region::interval(Scalar::zero(), beta).measure(), Scalar::quad(-1, 1, 1, 1));
    }

    #[test]
    fn boolean_examples() {
        let unit = Region::interval(q(0, 1), q(1, 1));
        let mid = Region::interval(q(1, 3), q(2, 3));
        assert_eq!(unit.subtract(&mid), Region::from_intervals([iv(q(0, 1), q(1, 3)), iv(q(2, 3), q(1, 1))]));
        assert!(Region::interval(q(0, 1), q(1, 4)).intersect(&Region::interval(q(1, 2), q(1, 1))).is_empty());
        let beta = Scalar::sqrt2() - Scalar::one();
        let left = Region::from_intervals([iv(q(0, 1), beta.clone()), iv(q(1, 2), q(1, 1))]);
        assert_eq!(left.intersect(&Region::interval(q(0, 1), q(1, 2))), Region::interval(q(0, 1), beta));
    }

    #[test]
    fn adjacent_intervals_merge() {
        let r = Region::from_intervals([iv(q(1, 2), q(1, 1)), iv(q(0, 1), q(1, 2))]);
        assert_eq!(r.intervals().len(), 1);
    }

    #[test]
    fn shrink_examples() {
        assert_eq!(Region::interval(q(0, 1), q(1, 1)).shrink(&q(1, 4)), Region::interval(q(1, 4), q(3, 4)));
        assert!(Region::interval(q(0, 1), q(1, 3)).shrink(&q(1, 5)).is_empty());
        let two = Region::from_intervals([iv(q(0, 1), q(1, 3)), iv(q(2, 3), q(1, 1))]);
        assert_eq!(
            two.shrink(&q(1, 10)),
            Region::from_intervals([iv(q(1, 10), q(7, 30)), iv(q(23, 30), q(9, 10))])
        );
    }

    #[test]
    fn stratify_counts_overlaps() {
        let base = Region::interval(q(0, 1), q(1, 1));
        let a = Region::interval(q(0, 1), q(1, 2));
        let b = Region::interval(q(1, 4), q(3, 4));
        let s = stratify(&base, &[&a, &b]);
        assert_eq!(s[0], (Region::interval(q(3, 4), q(1, 1)), 0));
        assert_eq!(s[1].1, 1);
        assert_eq!(s[1].0, Region::from_intervals([iv(q(0, 1), q(1, 4)), iv(q(1, 2), q(3, 4))]));
        assert_eq!(s[2], (Region::interval(q(1, 4), q(1, 2)), 2));
    }

    fn arb_region() -> impl Strategy<Value = Region> {
        prop::collection::vec((0i64..60, 1i64..12, 0i64..3), 0..6).prop_map(|v| {
            Region::from_intervals(v.into_iter().map(|(lo, len, root)| {
                let shift = Scalar::quad(0, 1, root, 7);
                iv(q(lo, 8) + &shift, q(lo + len, 8) + &shift)
            }))
        })
    }

    proptest! {
        #[test]
        fn inclusion_exclusion(r1 in arb_region(), r2 in arb_region()) {
            let lhs = r1.union(&r2).measure() + r1.intersect(&r2).measure();
            prop_assert_eq!(lhs, r1.measure() + r2.measure());
        }

        #[test]
        fn set_algebra(r1 in arb_region(), r2 in arb_region(), r3 in arb_region()) {
            prop_assert_eq!(r1.union(&r2), r2.union(&r1));
            prop_assert_eq!(r1.intersect(&r2), r2.intersect(&r1));
            prop_assert_eq!(r1.union(&r2).union(&r3), r1.union(&r2.union(&r3)));
            prop_assert_eq!(r1.intersect(&r2).intersect(&r3), r1.intersect(&r2.intersect(&r3)));
            prop_assert_eq!(r1.union(&r1), r1.clone());
            prop_assert_eq!(r1.subtract(&r2).union(&r1.intersect(&r2)), r1.clone());
            prop_assert!(r1.subtract(&r2).is_disjoint_from(&r2));
        }

        #[test]
        fn shrink_loses_at_most_two_delta_per_component(r in arb_region(), k in 1i64..40) {
            let delta = q(1, k);
            let lost_bound = &(&delta + &delta) * &Scalar::int(r.component_count() as i64);
            prop_assert!(r.shrink(&delta).measure() >= r.measure() - lost_bound);
        }
    }
}
