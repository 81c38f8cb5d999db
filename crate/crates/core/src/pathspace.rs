//! Families of alternating paths parametrized by their start vertex, the
//! measure `ν` on them, and the conflict graph joining paths that share a vertex.
//!
//! A [`PathType`] fixes a sequence of edge maps (each forward or inverted, matched
//! or not). Its start region is the exact set of vertices from which that sequence
//! traces a simple alternating path, so the whole family is the region together
//! with the prefix composites `c_0 = id, c_1, …, c_l`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{uncovered, DefinableBipartiteGraph, Matching, Side};
use crate::pwiso::{Piece, PwIsometry, Slope};
use crate::region::{Interval, Region};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Dir {
    /// A → B along the edge map.
    Forward,
    /// B → A along the inverse.
    Backward,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Step {
    pub edge: usize,
    pub dir: Dir,
    pub matched: bool,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct GeneratingSequence {
    pub root: Side,
    pub steps: Vec<Step>,
}

impl GeneratingSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Side of the `i`-th vertex `p_i`.
    pub fn side_at(&self, i: usize) -> Side {
        if i.is_multiple_of(2) {
            self.root
        } else {
            self.root.other()
        }
    }

    pub fn label(&self, g: &DefinableBipartiteGraph) -> String {
        let mut s = format!("{:?}", self.root);
        for st in &self.steps {
            let arrow = match st.dir {
                Dir::Forward => "→",
                Dir::Backward => "←",
            };
            let mark = if st.matched { "*" } else { "" };
            s.push_str(&format!(" {arrow}{}{mark}", g.edge(st.edge).id));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathType {
    pub seq: GeneratingSequence,
    pub start: Region,
    /// `composites[i]` maps a start vertex to `p_i`; each has domain `start`.
    pub composites: Vec<PwIsometry>,
    pub slot: usize,
}

impl PathType {
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn end(&self) -> &PwIsometry {
        self.composites.last().expect("composites include the identity")
    }

    /// Vertices `p_i` over the start vertices in `r`.
    pub fn footprint(&self, i: usize, r: &Region) -> Region {
        self.composites[i].image(r)
    }

    /// Restriction of this type to a sub-region of its start.
    pub fn restricted(&self, r: &Region) -> PathType {
        let start = self.start.intersect(r);
        PathType {
            seq: self.seq.clone(),
            composites: self.composites.iter().map(|c| c.restrict(&start)).collect(),
            start,
            slot: self.slot,
        }
    }
}

/// Affine placement of every type's start region into its own slot on the line.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub origin_a: Scalar,
    pub origin_b: Scalar,
    pub stride: Scalar,
}

impl Embedding {
    pub fn for_graph(g: &DefinableBipartiteGraph) -> Embedding {
        let hull = |r: &Region| r.hull().map(|h| (h.lo.clone(), h.len())).unwrap_or((Scalar::zero(), Scalar::zero()));
        let (origin_a, la) = hull(g.a());
        let (origin_b, lb) = hull(g.b());
        let span = la.max_of(lb);
        let ceil = Scalar::from_bigint(span.ceil()).max_of(Scalar::one());
        Embedding { origin_a, origin_b, stride: &ceil * &Scalar::int(2) }
    }

    /// Translation carrying the start of a `root`-rooted type in `slot` to its copy.
    pub fn shift(&self, root: Side, slot: usize) -> Scalar {
        let origin = match root {
            Side::A => &self.origin_a,
            Side::B => &self.origin_b,
        };
        &(&self.stride * &Scalar::int(slot as i64)) - origin
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSpace {
    pub k: usize,
    pub types: Vec<PathType>,
    pub embedding: Embedding,
}

impl PathSpace {
    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    /// `ν` of the whole space.
    pub fn nu_total(&self) -> Scalar {
        self.types.iter().map(|t| t.start.measure()).sum()
    }

    /// `ν` of a selection of sub-regions, one per type (missing entries count as empty).
    pub fn nu(&self, selection: &[Region]) -> Scalar {
        selection.iter().zip(&self.types).map(|(r, t)| r.intersect(&t.start).measure()).sum()
    }

    /// Union of all start regions: the vertices where a short augmenting path begins.
    pub fn starts(&self) -> Region {
        Region::union_all(self.types.iter().map(|t| &t.start))
    }

    pub fn embedded_start(&self, idx: usize) -> Region {
        let t = &self.types[idx];
        t.start.translate(&self.embedding.shift(t.seq.root, t.slot))
    }

    pub fn embedded_vertices(&self) -> Region {
        let parts: Vec<Region> = (0..self.types.len()).map(|i| self.embedded_start(i)).collect();
        Region::union_all(parts.iter())
    }

    /// Pulls an embedded region back onto the start of type `idx`.
    pub fn pull_back(&self, idx: usize, embedded: &Region) -> Region {
        let t = &self.types[idx];
        let shift = self.embedding.shift(t.seq.root, t.slot);
        embedded.intersect(&self.embedded_start(idx)).translate(&-&shift)
    }

    pub fn stats(&self) -> PathSpaceStats {
        PathSpaceStats {
            types: self.types.len(),
            max_len: self.types.iter().map(PathType::len).max().unwrap_or(0),
            start_intervals: self.types.iter().map(|t| t.start.component_count()).sum(),
            composite_pieces: self.types.iter().flat_map(|t| t.composites.iter()).map(|c| c.pieces().len()).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSpaceStats {
    pub types: usize,
    pub max_len: usize,
    pub start_intervals: usize,
    pub composite_pieces: usize,
}

impl fmt::Display for PathSpaceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} types, longest {}, {} start intervals, {} composite pieces",
            self.types, self.max_len, self.start_intervals, self.composite_pieces
        )
    }
}

/// Per-edge regions and step maps for a fixed matching.
pub struct MatchState {
    pub uncovered_a: Region,
    pub uncovered_b: Region,
    sub_a: Vec<Region>,
    sub_b: Vec<Region>,
    free_a: Vec<Region>,
    free_b: Vec<Region>,
    maps: Vec<[PwIsometry; 4]>,
}

impl MatchState {
    pub fn new(g: &DefinableBipartiteGraph, m: &Matching) -> MatchState {
        let n = g.edges().len();
        let mut st = MatchState {
            uncovered_a: uncovered(g, m, Side::A),
            uncovered_b: uncovered(g, m, Side::B),
            sub_a: Vec::with_capacity(n),
            sub_b: Vec::with_capacity(n),
            free_a: Vec::with_capacity(n),
            free_b: Vec::with_capacity(n),
            maps: Vec::with_capacity(n),
        };
        for (i, e) in g.edges().iter().enumerate() {
            let sub = m.get(i).cloned().unwrap_or_default();
            let matched = e.map.restrict(&sub);
            let free = e.map.restrict(&e.map.domain().subtract(&sub));
            st.sub_b.push(matched.image_region());
            st.free_a.push(free.domain());
            st.free_b.push(free.image_region());
            st.sub_a.push(sub);
            let matched_inv = matched.invert();
            let free_inv = free.invert();
            st.maps.push([free, free_inv, matched, matched_inv]);
        }
        st
    }

    pub fn uncovered(&self, side: Side) -> &Region {
        match side {
            Side::A => &self.uncovered_a,
            Side::B => &self.uncovered_b,
        }
    }

    /// The edge map restricted to where `step` may be taken.
    pub fn step_map(&self, step: &Step) -> &PwIsometry {
        let idx = match (step.matched, step.dir) {
            (false, Dir::Forward) => 0,
            (false, Dir::Backward) => 1,
            (true, Dir::Forward) => 2,
            (true, Dir::Backward) => 3,
        };
        &self.maps[step.edge][idx]
    }

    /// Vertices from which `step` may be taken.
    pub fn step_region(&self, step: &Step) -> &Region {
        match (step.matched, step.dir) {
            (false, Dir::Forward) => &self.free_a[step.edge],
            (false, Dir::Backward) => &self.free_b[step.edge],
            (true, Dir::Forward) => &self.sub_a[step.edge],
            (true, Dir::Backward) => &self.sub_b[step.edge],
        }
    }

    fn edges(&self) -> usize {
        self.maps.len()
    }
}

fn dir_from(side: Side) -> Dir {
    match side {
        Side::A => Dir::Forward,
        Side::B => Dir::Backward,
    }
}

/// Default ceiling on the worst-case number of generating sequences.
pub const DEFAULT_BRANCH_CAP: u64 = 1 << 24;

/// Worst-case number of sequences of length `2K+1`: `d·(d−1)^K`.
pub fn branching_bound(d: usize, k: usize) -> BigInt {
    let d = BigInt::from(d);
    let dm1 = if d > BigInt::from(0) { &d - 1 } else { BigInt::from(0) };
    &d * num_traits::pow(dm1, k)
}

/// All augmenting path types of odd length at most `2K+1`, rooted on either side.
pub fn enumerate_augmenting(g: &DefinableBipartiteGraph, m: &Matching, k: usize) -> Result<PathSpace> {
    enumerate_augmenting_capped(g, m, k, DEFAULT_BRANCH_CAP)
}

pub fn enumerate_augmenting_capped(g: &DefinableBipartiteGraph, m: &Matching, k: usize, cap: u64) -> Result<PathSpace> {
    let d = g.degree_bound();
    let branching = branching_bound(d, k);
    if branching > BigInt::from(cap) {
        return Err(Error::EnumerationCap { branching: branching.to_string(), cap: cap.to_string() });
    }
    let st = MatchState::new(g, m);
    Ok(enumerate_with(g, &st, k))
}

pub(crate) fn enumerate_with(g: &DefinableBipartiteGraph, st: &MatchState, k: usize) -> PathSpace {
    let max_len = 2 * k + 1;
    let roots: Vec<(Side, usize)> =
        [Side::A, Side::B].iter().flat_map(|&s| (0..st.edges()).map(move |e| (s, e))).collect();
    let mut found: Vec<(GeneratingSequence, Region, Vec<PwIsometry>)> = roots
        .par_iter()
        .flat_map_iter(|&(root, e)| {
            let start = st.uncovered(root);
            let mut out = Vec::new();
            if start.is_empty() {
                return out;
            }
            let step = Step { edge: e, dir: dir_from(root), matched: false };
            let c0 = PwIsometry::identity(start);
            let c1 = st.step_map(&step).compose(&c0);
            if !c1.is_empty() {
                let mut seq = GeneratingSequence { root, steps: vec![step] };
                let mut comps = vec![c0, c1];
                extend(st, &mut seq, &mut comps, max_len, &mut out);
            }
            out
        })
        .collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let types = found
        .into_iter()
        .enumerate()
        .map(|(slot, (seq, start, comps))| PathType {
            composites: comps.iter().map(|c| c.restrict(&start)).collect(),
            seq,
            start,
            slot,
        })
        .collect();
    PathSpace { k, types, embedding: Embedding::for_graph(g) }
}

/// Depth-first extension; `comps` has one more entry than `seq.steps`, the last
/// one nonempty and already free of repeated vertices.
fn extend(
    st: &MatchState,
    seq: &mut GeneratingSequence,
    comps: &mut Vec<PwIsometry>,
    max_len: usize,
    out: &mut Vec<(GeneratingSequence, Region, Vec<PwIsometry>)>,
) {
    let l = seq.steps.len();
    let side = seq.side_at(l);
    let last = comps.last().expect("nonempty");
    if l % 2 == 1 {
        let ends = last.preimage(st.uncovered(side));
        if !ends.is_empty() {
            out.push((seq.clone(), ends, comps.clone()));
        }
    }
    if l >= max_len {
        return;
    }
    let matched = l % 2 == 1;
    for e in 0..st.edges() {
        let step = Step { edge: e, dir: dir_from(side), matched };
        let map = st.step_map(&step);
        if map.is_empty() {
            continue;
        }
        let mut next = map.compose(comps.last().expect("nonempty"));
        if next.is_empty() {
            continue;
        }
        // drop start vertices whose path revisits a vertex on this side
        let mut repeats = Vec::new();
        for j in ((l + 1) % 2..=l).step_by(2) {
            repeats.extend(next.coinciding_region(&comps[j]).into_intervals());
        }
        if !repeats.is_empty() {
            let rep = Region::from_intervals(repeats);
            next = next.restrict(&next.domain().subtract(&rep));
            if next.is_empty() {
                continue;
            }
        }
        seq.steps.push(step);
        comps.push(next);
        extend(st, seq, comps, max_len, out);
        comps.pop();
        seq.steps.pop();
    }
}

/// Sub-region of `r` from which the type's sequence is still an augmenting path
/// against the matching described by `st`.
pub fn residual(t: &PathType, r: &Region, st: &MatchState) -> Region {
    let mut cur = r.intersect(&t.start).intersect(st.uncovered(t.seq.root));
    for (i, step) in t.seq.steps.iter().enumerate() {
        if cur.is_empty() {
            return cur;
        }
        cur = cur.intersect(&t.composites[i].preimage(st.step_region(step)));
    }
    let l = t.len();
    cur.intersect(&t.composites[l].preimage(st.uncovered(t.seq.side_at(l))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConflictMap {
    pub s: usize,
    pub t: usize,
    /// Acts on embedded coordinates: start copy of `s` to start copy of `t`.
    pub map: PwIsometry,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConflictGraph {
    pub vertices: Region,
    pub maps: Vec<ConflictMap>,
}

impl ConflictGraph {
    pub fn edge_maps(&self) -> Vec<PwIsometry> {
        self.maps.iter().map(|c| c.map.clone()).collect()
    }

    pub fn piece_count(&self) -> usize {
        self.maps.iter().map(|c| c.map.pieces().len()).sum()
    }
}

/// Pairs of (type, index) whose vertex footprints overlap in positive measure.
fn overlapping_footprints(ps: &PathSpace) -> Vec<((usize, usize), (usize, usize))> {
    let mut ivs: Vec<(Interval, usize, usize)> = Vec::new();
    for (s, t) in ps.types.iter().enumerate() {
        for k in 0..=t.len() {
            for iv in t.footprint(k, &t.start).into_intervals() {
                ivs.push((iv, s, k));
            }
        }
    }
    ivs.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    let mut pairs = std::collections::BTreeSet::new();
    let mut active: Vec<usize> = Vec::new();
    for (i, (iv, s, k)) in ivs.iter().enumerate() {
        active.retain(|&j| ivs[j].0.hi > iv.lo);
        for &j in &active {
            let (_, t, l) = &ivs[j];
            let a = (*s, *k);
            let b = (*t, *l);
            if a != b {
                pairs.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
        active.push(i);
    }
    pairs.into_iter().collect()
}

/// Conflict maps between all pairs of paths sharing a vertex, on embedded coordinates.
pub fn conflict_graph(ps: &PathSpace) -> ConflictGraph {
    let pairs = overlapping_footprints(ps);
    let pieces: Vec<((usize, usize, Slope, Scalar), Piece)> = pairs
        .par_iter()
        .flat_map_iter(|&((s, k), (t, l))| {
            let ts = &ps.types[s];
            let tt = &ps.types[t];
            let raw = tt.composites[l].invert().compose(&ts.composites[k]);
            let shift_s = ps.embedding.shift(ts.seq.root, ts.slot);
            let shift_t = ps.embedding.shift(tt.seq.root, tt.slot);
            let emb = raw.shifted(&shift_s, &shift_t);
            emb.pieces()
                .iter()
                .filter(|p| !(p.slope == Slope::Pos && p.offset.is_zero()))
                .map(|p| ((s, t, p.slope, p.offset.clone()), p.clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut groups: BTreeMap<(usize, usize, Slope, Scalar), Vec<Interval>> = BTreeMap::new();
    for (key, p) in pieces {
        groups.entry(key).or_default().push(p.src);
    }
    let maps = groups
        .into_iter()
        .map(|((s, t, slope, offset), srcs)| {
            let dom = Region::from_intervals(srcs);
            let map = PwIsometry::new(
                dom.into_intervals().into_iter().map(|iv| Piece { src: iv, slope, offset: offset.clone() }).collect(),
            );
            ConflictMap { s, t, map }
        })
        .collect();
    ConflictGraph { vertices: ps.embedded_vertices(), maps }
}

/// Largest vertex degree any conflict graph over `types` paths of length `≤ 2K+1` can have.
pub fn conflict_degree_bound(types: usize, k: usize) -> u64 {
    let per = (2 * k + 2) as u64;
    (types as u64) * per * per
}

/// `d^{2K+1}` as a big integer, the per-edge flip budget.
pub fn flip_budget(d: usize, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(d), 2 * k + 1)
}

pub fn to_u64_saturating(n: &BigInt) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_laczkovich, make_rot};

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn beta() -> Scalar {
        Scalar::sqrt2() - Scalar::one()
    }

    #[test]
    fn perfect_matching_has_no_paths() {
        let g = make_rot(beta()).unwrap();
        let m = Matching::full_edge(&g, 0);
        assert!(enumerate_augmenting(&g, &m, 3).unwrap().is_empty());
    }

    #[test]
    fn empty_matching_yields_single_edges() {
        let g = make_rot(beta()).unwrap();
        let ps = enumerate_augmenting(&g, &Matching::new(), 4).unwrap();
        assert_eq!(ps.len(), 4);
        assert!(ps.types.iter().all(|t| t.len() == 1));
        let expected: Scalar = g.edges().iter().map(|e| &e.map.measure() * &Scalar::int(2)).sum();
        assert_eq!(ps.nu_total(), expected);
    }

    #[test]
    fn nu_of_selections() {
        let g = make_rot(beta()).unwrap();
        let ps = enumerate_augmenting(&g, &Matching::new(), 0).unwrap();
        assert_eq!(ps.nu(&[]), Scalar::zero());
        let sel = vec![Region::interval(q(0, 1), q(1, 8))];
        assert_eq!(ps.nu(&sel), q(1, 8));
    }

    #[test]
    fn starts_trace_real_paths() {
        let g = make_laczkovich(beta()).unwrap();
        let m = Matching::from_entries([(1, Region::interval(q(1, 4), q(1, 2)))]);
        let ps = enumerate_augmenting(&g, &m, 3).unwrap();
        let st = MatchState::new(&g, &m);
        for t in &ps.types {
            assert_eq!(residual(t, &t.start, &st), t.start);
            for (i, c) in t.composites.iter().enumerate() {
                assert_eq!(c.domain(), t.start);
                assert!(c.image_region().is_subset_of(g.side(t.seq.side_at(i))));
            }
        }
    }

    #[test]
    fn shared_start_conflict_is_slot_translation() {
        let g = make_rot(beta()).unwrap();
        let ps = enumerate_augmenting(&g, &Matching::new(), 0).unwrap();
        let cg = conflict_graph(&ps);
        let ts = ps.types.iter().position(|t| t.seq.root == Side::A && t.seq.steps[0].edge == 0).unwrap();
        let tr = ps.types.iter().position(|t| t.seq.root == Side::A && t.seq.steps[0].edge == 1).unwrap();
        let (lo, hi) = (ts.min(tr), ts.max(tr));
        let between: Vec<_> = cg.maps.iter().filter(|c| c.s == lo && c.t == hi).collect();
        let shift = &ps.embedding.stride * &Scalar::int((hi - lo) as i64);
        let k0 = between.iter().find(|c| c.map.pieces().iter().all(|p| p.slope == Slope::Pos && p.offset == shift));
        assert_eq!(k0.unwrap().map.domain(), ps.embedded_start(lo));
        for c in &cg.maps {
            assert!(c.map.min_displacement(&c.map.domain()).is_ok());
        }
    }

    #[test]
    fn disjoint_types_do_not_conflict() {
        let g = make_rot(beta()).unwrap();
        let m = Matching::from_entries([(0, Region::interval(q(1, 2), q(1, 1)))]);
        let ps = enumerate_augmenting(&g, &m, 0).unwrap();
        let cg = conflict_graph(&ps);
        for c in &cg.maps {
            let fs = ps.types[c.s].start.clone();
            let ft = ps.types[c.t].start.clone();
            assert!(fs.is_subset_of(g.a()) || fs.is_subset_of(g.b()));
            assert!(!c.map.is_empty(), "{fs:?} {ft:?}");
        }
    }

    #[test]
    fn two_regular_growth_is_linear() {
        let g = make_laczkovich(beta()).unwrap();
        let m = Matching::from_entries([(0, Region::interval(q(3, 10), q(1, 2))), (2, Region::interval(q(0, 1), q(1, 16)))]);
        assert!(m.violations(&g).is_empty());
        for k in 0..5 {
            let ps = enumerate_augmenting(&g, &m, k).unwrap();
            assert!(ps.len() <= 4 * (k + 1) * 2, "k={k}: {}", ps.len());
        }
    }

    #[test]
    fn enumeration_cap_refuses() {
        let g = make_rot(beta()).unwrap();
        let mut edges = g.edges().to_vec();
        edges.push(crate::graph::Edge {
            id: "r2".into(),
            map: PwIsometry::new(vec![
                Piece::new(q(0, 1), q(2, 3), Slope::Pos, q(7, 3)),
                Piece::new(q(2, 3), q(1, 1), Slope::Pos, q(4, 3)),
            ]),
        });
        let g3 = g.with_edges(edges);
        assert_eq!(g3.degree_bound(), 3);
        assert_eq!(branching_bound(3, 10), BigInt::from(3 * 1024));
        assert!(matches!(
            enumerate_augmenting_capped(&g3, &Matching::new(), 10, 1000),
            Err(Error::EnumerationCap { .. })
        ));
        assert!(enumerate_augmenting_capped(&g3, &Matching::new(), 2, 1000).is_ok());
    }
}
