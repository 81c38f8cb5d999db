//! Piecewise partial isometries of the line.
//!
//! A [`PwIsometry`] is a finite list of affine pieces `x ↦ ±x + offset`, each on a
//! half-open source interval. Valid maps have pairwise disjoint sources and
//! pairwise disjoint images (mod null), so they are injective and preserve length.

use std::fmt;

use crate::error::{Error, Result};
use crate::region::{Interval, Region};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Slope {
    Pos,
    Neg,
}

impl Slope {
    pub fn from_sign(s: i64) -> Option<Slope> {
        match s {
            1 => Some(Slope::Pos),
            -1 => Some(Slope::Neg),
            _ => None,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Slope::Pos => 1,
            Slope::Neg => -1,
        }
    }

    pub fn compose(self, other: Slope) -> Slope {
        if self == other {
            Slope::Pos
        } else {
            Slope::Neg
        }
    }

    pub fn apply(self, x: &Scalar) -> Scalar {
        match self {
            Slope::Pos => x.clone(),
            Slope::Neg => -x,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Piece {
    pub src: Interval,
    pub slope: Slope,
    pub offset: Scalar,
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.slope == Slope::Pos { "x" } else { "-x" };
        write!(f, "{:?} ↦ {} + {}", self.src, s, self.offset)
    }
}

impl Piece {
    pub fn new(lo: Scalar, hi: Scalar, slope: Slope, offset: Scalar) -> Self {
        Piece { src: Interval::new(lo, hi), slope, offset }
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.slope.apply(x) + &self.offset
    }

    /// Inverse of the affine formula (ignores the source interval).
    pub fn eval_inverse(&self, y: &Scalar) -> Scalar {
        self.slope.apply(&(y - &self.offset))
    }

    /// Image interval, normalized to half-open.
    pub fn image(&self) -> Interval {
        self.image_of(&self.src)
    }

    pub fn image_of(&self, iv: &Interval) -> Interval {
        match self.slope {
            Slope::Pos => Interval::new(&iv.lo + &self.offset, &iv.hi + &self.offset),
            Slope::Neg => Interval::new(&self.offset - &iv.hi, &self.offset - &iv.lo),
        }
    }

    /// Sub-interval of the source mapped onto `target` (which must lie in the image).
    fn preimage_of(&self, target: &Interval) -> Interval {
        match self.slope {
            Slope::Pos => Interval::new(&target.lo - &self.offset, &target.hi - &self.offset),
            Slope::Neg => Interval::new(&self.offset - &target.hi, &self.offset - &target.lo),
        }
    }

    pub fn restricted(&self, iv: Interval) -> Piece {
        Piece { src: iv, slope: self.slope, offset: self.offset.clone() }
    }

    pub fn same_formula(&self, other: &Piece) -> bool {
        self.slope == other.slope && self.offset == other.offset
    }

    pub fn inverse(&self) -> Piece {
        // y = s·x + o  ⇒  x = s·y − s·o
        let off = match self.slope {
            Slope::Pos => -&self.offset,
            Slope::Neg => self.offset.clone(),
        };
        Piece { src: self.image(), slope: self.slope, offset: off }
    }

    /// Fixed point of the formula inside the closed source interval, if any.
    pub fn fixed_point(&self) -> Option<Scalar> {
        match self.slope {
            Slope::Pos => {
                if self.offset.is_zero() {
                    Some(self.src.lo.clone())
                } else {
                    None
                }
            }
            Slope::Neg => {
                let x0 = self.offset.half();
                if self.src.closure_contains(&x0) {
                    Some(x0)
                } else {
                    None
                }
            }
        }
    }

    /// Infimum of `|f(x) − x|` over the closed source interval.
    pub fn min_displacement(&self) -> Scalar {
        match self.slope {
            Slope::Pos => self.offset.abs(),
            Slope::Neg => {
                let x0 = self.offset.half();
                if self.src.closure_contains(&x0) {
                    Scalar::zero()
                } else {
                    let at = |x: &Scalar| (&self.offset - &(x + x)).abs();
                    at(&self.src.lo).min_of(at(&self.src.hi))
                }
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PwIsometry {
    pieces: Vec<Piece>,
}

impl fmt::Debug for PwIsometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.pieces.iter()).finish()
    }
}

impl PwIsometry {
    pub fn empty() -> Self {
        PwIsometry { pieces: Vec::new() }
    }

    /// Sorts the pieces by source and merges touching pieces with equal formula.
    /// Does not check injectivity; see [`PwIsometry::violations`].
    pub fn new(mut pieces: Vec<Piece>) -> Self {
        pieces.retain(|p| !p.src.is_empty());
        pieces.sort_by(|a, b| a.src.lo.cmp(&b.src.lo).then_with(|| a.src.hi.cmp(&b.src.hi)));
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(last) = out.last_mut() {
                if last.same_formula(&p) && last.src.hi == p.src.lo {
                    last.src.hi = p.src.hi;
                    continue;
                }
            }
            out.push(p);
        }
        PwIsometry { pieces: out }
    }

    pub fn translation(domain: &Region, offset: Scalar) -> Self {
        PwIsometry::new(
            domain
                .intervals()
                .iter()
                .map(|iv| Piece { src: iv.clone(), slope: Slope::Pos, offset: offset.clone() })
                .collect(),
        )
    }

    pub fn identity(domain: &Region) -> Self {
        PwIsometry::translation(domain, Scalar::zero())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn domain(&self) -> Region {
        Region::from_intervals(self.pieces.iter().map(|p| p.src.clone()))
    }

    pub fn image_region(&self) -> Region {
        Region::from_intervals(self.pieces.iter().map(|p| p.image()))
    }

    pub fn eval(&self, x: &Scalar) -> Option<Scalar> {
        let idx = self.pieces.partition_point(|p| &p.src.lo <= x);
        // sources may overlap in invalid maps; scan back over candidates
        self.pieces[..idx].iter().rev().find(|p| p.src.contains(x)).map(|p| p.eval(x))
    }

    /// Pointwise inverse: the source point mapped to `y`, if any.
    /// Uses the true image of each piece, `(c, d]` for reflections.
    pub fn eval_inverse(&self, y: &Scalar) -> Option<Scalar> {
        self.pieces.iter().find_map(|p| {
            let x = p.eval_inverse(y);
            if p.src.contains(&x) {
                Some(x)
            } else {
                None
            }
        })
    }

    pub fn restrict(&self, region: &Region) -> PwIsometry {
        let mut out = Vec::new();
        for p in &self.pieces {
            for iv in region.overlapping(&p.src.lo, &p.src.hi) {
                if let Some(c) = iv.intersect(&p.src) {
                    out.push(p.restricted(c));
                }
            }
        }
        PwIsometry::new(out)
    }

    /// Forward image of `region ∩ domain`.
    pub fn image(&self, region: &Region) -> Region {
        let mut out = Vec::new();
        for p in &self.pieces {
            for iv in region.overlapping(&p.src.lo, &p.src.hi) {
                if let Some(c) = iv.intersect(&p.src) {
                    out.push(p.image_of(&c));
                }
            }
        }
        Region::from_intervals(out)
    }

    /// Preimage of `region ∩ image`.
    pub fn preimage(&self, region: &Region) -> Region {
        let mut out = Vec::new();
        for p in &self.pieces {
            let im = p.image();
            for iv in region.overlapping(&im.lo, &im.hi) {
                if let Some(c) = iv.intersect(&im) {
                    out.push(p.preimage_of(&c));
                }
            }
        }
        Region::from_intervals(out)
    }

    /// `self ∘ inner`, defined where `inner` lands in the domain of `self`.
    pub fn compose(&self, inner: &PwIsometry) -> PwIsometry {
        let mut out = Vec::new();
        for f in &inner.pieces {
            let im = f.image();
            let start = self.pieces.partition_point(|g| g.src.hi <= im.lo);
            for g in &self.pieces[start..] {
                if g.src.lo >= im.hi {
                    break;
                }
                if let Some(c) = g.src.intersect(&im) {
                    let src = f.preimage_of(&c);
                    // g(f(x)) = sg·(sf·x + of) + og
                    let offset = g.slope.apply(&f.offset) + &g.offset;
                    out.push(Piece { src, slope: g.slope.compose(f.slope), offset });
                }
            }
        }
        PwIsometry::new(out)
    }

    pub fn invert(&self) -> PwIsometry {
        PwIsometry::new(self.pieces.iter().map(Piece::inverse).collect())
    }

    /// Conjugates by translations: `x ↦ self(x − shift_in) + shift_out`.
    pub fn shifted(&self, shift_in: &Scalar, shift_out: &Scalar) -> PwIsometry {
        PwIsometry::new(
            self.pieces
                .iter()
                .map(|p| {
                    // s·(x − a) + o + b = s·x + (o + b − s·a)
                    let offset = &p.offset + shift_out - p.slope.apply(shift_in);
                    Piece {
                        src: Interval::new(&p.src.lo + shift_in, &p.src.hi + shift_in),
                        slope: p.slope,
                        offset,
                    }
                })
                .collect(),
        )
    }

    /// Union of two maps with disjoint domains; the caller guarantees validity.
    pub fn union(&self, other: &PwIsometry) -> PwIsometry {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        PwIsometry::new(pieces)
    }

    /// Region where `self` and `other` agree as maps (positive-measure part).
    pub fn coinciding_region(&self, other: &PwIsometry) -> Region {
        let mut out = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                if p.same_formula(q) {
                    if let Some(c) = p.src.intersect(&q.src) {
                        out.push(c);
                    }
                }
            }
        }
        Region::from_intervals(out)
    }

    /// Infimum over the closure of `region ∩ domain` of `|f(x) − x|`.
    /// Reports a fixed point instead of returning zero.
    pub fn min_displacement(&self, region: &Region) -> Result<Scalar> {
        let restricted = self.restrict(region);
        let mut best: Option<Scalar> = None;
        for p in restricted.pieces() {
            if let Some(x0) = p.fixed_point() {
                return Err(Error::FixedPointFound(Box::new(x0)));
            }
            let d = p.min_displacement();
            best = Some(match best {
                None => d,
                Some(b) => b.min_of(d),
            });
        }
        best.ok_or_else(|| Error::InvalidArgument("min_displacement over an empty region".into()))
    }

    /// Pieces whose sources overlap another piece's source (not a function) and
    /// pieces whose images overlap (not injective).
    pub fn violations(&self) -> (Region, Region) {
        let overlap = |ivs: Vec<Interval>| {
            let mut ivs = ivs;
            ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
            let mut bad = Vec::new();
            let mut reach: Option<Scalar> = None;
            for iv in ivs {
                if let Some(r) = &reach {
                    if &iv.lo < r {
                        let hi = if &iv.hi < r { iv.hi.clone() } else { r.clone() };
                        bad.push(Interval::new(iv.lo.clone(), hi));
                    }
                }
                reach = Some(match reach {
                    Some(r) if r > iv.hi => r,
                    _ => iv.hi.clone(),
                });
            }
            Region::from_intervals(bad)
        };
        let src = overlap(self.pieces.iter().map(|p| p.src.clone()).collect());
        let img = overlap(self.pieces.iter().map(|p| p.image()).collect());
        (src, img)
    }

    pub fn is_valid(&self) -> bool {
        let (s, i) = self.violations();
        s.is_empty() && i.is_empty()
    }

    pub fn measure(&self) -> Scalar {
        self.pieces.iter().map(|p| p.src.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn unit() -> Region {
        Region::interval(q(0, 1), q(1, 1))
    }

    fn shift(k: Scalar) -> PwIsometry {
        PwIsometry::translation(&unit(), k)
    }

    fn flip() -> PwIsometry {
        PwIsometry::new(vec![Piece::new(q(0, 1), q(1, 1), Slope::Neg, q(1, 1))])
    }

    #[test]
    fn image_examples() {
        let half = Region::interval(q(0, 1), q(1, 2));
        assert_eq!(shift(q(2, 1)).image(&half), Region::interval(q(2, 1), q(5, 2)));
        assert_eq!(flip().image(&half), Region::interval(q(1, 2), q(1, 1)));
        assert!(shift(q(2, 1)).image(&Region::empty()).is_empty());
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(shift(q(2, 1)).preimage(&Region::interval(q(2, 1), q(5, 2))), Region::interval(q(0, 1), q(1, 2)));
        assert!(shift(q(2, 1)).preimage(&Region::interval(q(5, 1), q(6, 1))).is_empty());
        assert_eq!(flip().preimage(&Region::interval(q(0, 1), q(1, 4))), Region::interval(q(3, 4), q(1, 1)));
    }

    #[test]
    fn compose_examples() {
        let a = Scalar::quad(0, 1, 1, 3);
        let b = q(1, 5);
        let c = shift(a.clone()).compose(&PwIsometry::translation(&Region::interval(-&a, q(1, 1)), b.clone()));
        // overlap: x + b ∈ [0,1)  with x ∈ [-a, 1)
        assert_eq!(c.pieces().len(), 1);
        assert_eq!(c.pieces()[0].offset, &a + &b);
        assert_eq!(c.domain(), Region::interval(-&b, q(1, 1) - &b));

        let r1 = PwIsometry::new(vec![Piece::new(q(0, 1), q(10, 1), Slope::Neg, q(7, 1))]);
        let r2 = PwIsometry::new(vec![Piece::new(q(-10, 1), q(10, 1), Slope::Neg, q(3, 1))]);
        let t = r1.compose(&r2);
        assert!(t.pieces().iter().all(|p| p.slope == Slope::Pos && p.offset == q(4, 1)));

        let far = PwIsometry::translation(&Region::interval(q(10, 1), q(11, 1)), q(0, 1));
        assert!(far.compose(&shift(q(2, 1))).is_empty());
    }

    #[test]
    fn invert_examples() {
        let inv = shift(q(2, 1)).invert();
        assert_eq!(inv, PwIsometry::translation(&Region::interval(q(2, 1), q(3, 1)), q(-2, 1)));
        assert_eq!(flip().invert(), flip());
        assert!(PwIsometry::empty().invert().is_empty());
    }

    #[test]
    fn min_displacement_examples() {
        assert_eq!(shift(q(2, 1)).min_displacement(&unit()).unwrap(), q(2, 1));
        assert_eq!(flip().min_displacement(&Region::interval(q(0, 1), q(1, 4))).unwrap(), q(1, 2));
        match flip().min_displacement(&unit()) {
            Err(Error::FixedPointFound(x)) => assert_eq!(*x, q(1, 2)),
            other => panic!("expected fixed point, got {:?}", other),
        }
    }

    #[test]
    fn violations_detect_overlap() {
        let bad = PwIsometry::new(vec![
            Piece::new(q(0, 1), q(1, 2), Slope::Pos, q(2, 1)),
            Piece::new(q(1, 2), q(1, 1), Slope::Pos, q(3, 2)),
        ]);
        let (src, img) = bad.violations();
        assert!(src.is_empty());
        assert_eq!(img, Region::interval(q(2, 1), q(5, 2)));
    }

    fn arb_map() -> impl Strategy<Value = PwIsometry> {
        // an interval exchange on [0, n/8) with random reflections, then shifted
        (prop::collection::vec((1i64..6, any::<bool>()), 1..5), 0i64..4, any::<u64>()).prop_map(|(lens, shift, seed)| {
            let mut order: Vec<usize> = (0..lens.len()).collect();
            let mut s = seed;
            for i in (1..order.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (s >> 33) as usize % (i + 1));
            }
            let root = Scalar::quad(0, 1, shift, 9);
            let mut starts = vec![Scalar::zero(); lens.len()];
            let mut acc = Scalar::zero();
            for &k in &order {
                starts[k] = acc.clone();
                acc += q(lens[k].0, 8);
            }
            let mut pieces = Vec::new();
            let mut lo = root.clone();
            for (k, (len, neg)) in lens.iter().enumerate() {
                let hi = &lo + &q(*len, 8);
                let tlo = &starts[k] + &q(shift * 3, 1);
                let thi = &tlo + &q(*len, 8);
                let p = if *neg {
                    Piece::new(lo.clone(), hi.clone(), Slope::Neg, &thi + &lo)
                } else {
                    Piece::new(lo.clone(), hi.clone(), Slope::Pos, &tlo - &lo)
                };
                pieces.push(p);
                lo = hi;
            }
            PwIsometry::new(pieces)
        })
    }

    fn arb_region() -> impl Strategy<Value = Region> {
        prop::collection::vec((0i64..40, 1i64..10), 0..5).prop_map(|v| {
            Region::from_intervals(v.into_iter().map(|(lo, len)| Interval::new(q(lo, 16), q(lo + len, 16))))
        })
    }

    proptest! {
        #[test]
        fn generated_maps_are_valid(f in arb_map()) {
            prop_assert!(f.is_valid());
            prop_assert_eq!(f.domain().measure(), f.image_region().measure());
        }

        #[test]
        fn image_preserves_measure(f in arb_map(), r in arb_region()) {
            prop_assert_eq!(f.image(&r).measure(), r.intersect(&f.domain()).measure());
        }

        #[test]
        fn preimage_of_image_round_trips(f in arb_map(), r in arb_region()) {
            prop_assert_eq!(f.preimage(&f.image(&r)), r.intersect(&f.domain()));
        }

        #[test]
        fn invert_is_involutive(f in arb_map()) {
            prop_assert_eq!(f.invert().invert(), f.clone());
            let id = f.invert().compose(&f);
            prop_assert!(id.pieces().iter().all(|p| p.slope == Slope::Pos && p.offset.is_zero()));
        }

        #[test]
        fn compose_is_associative(f in arb_map(), g in arb_map(), h in arb_map()) {
            let g = g.shifted(&Scalar::zero(), &q(-3, 1));
            let h = h.shifted(&Scalar::zero(), &q(-5, 1));
            let left = h.compose(&g).compose(&f);
            let right = h.compose(&g.compose(&f));
            prop_assert_eq!(left.domain(), right.domain());
            prop_assert_eq!(left.image_region(), right.image_region());
            for p in left.pieces() {
                let x = p.src.midpoint();
                prop_assert_eq!(Some(p.eval(&x)), right.eval(&x));
            }
        }
    }
}
