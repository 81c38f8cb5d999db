//! Measure-preserving bipartite graphs whose edges are piecewise isometries,
//! matchings as per-edge subregions, and degree/neighbourhood queries.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::pwiso::PwIsometry;
use crate::region::{stratify, Region};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: String,
    pub map: PwIsometry,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefinableBipartiteGraph {
    a: Region,
    b: Region,
    edges: Vec<Edge>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    PartsOverlap,
    EdgeOutsideA,
    EdgeOutsideB,
    EdgeNotFunction,
    EdgeNotInjective,
    CoincidingEdges,
    DuplicateEdgeId,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::PartsOverlap => "parts overlap",
            ViolationKind::EdgeOutsideA => "edge domain outside A",
            ViolationKind::EdgeOutsideB => "edge image outside B",
            ViolationKind::EdgeNotFunction => "edge not a function",
            ViolationKind::EdgeNotInjective => "edge not injective",
            ViolationKind::CoincidingEdges => "coinciding edges",
            ViolationKind::DuplicateEdgeId => "duplicate edge id",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub edge: Option<String>,
    pub region: Region,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.edge {
            Some(e) => write!(f, "{} (edge {}): {:?}", self.kind, e, self.region),
            None => write!(f, "{}: {:?}", self.kind, self.region),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    pub side: Side,
    pub strata: Vec<(Region, usize)>,
}

impl DegreeProfile {
    pub fn max_degree(&self) -> usize {
        self.strata.iter().map(|(_, d)| *d).max().unwrap_or(0)
    }

    pub fn region_of_degree(&self, degree: usize) -> Region {
        self.strata.iter().find(|(_, d)| *d == degree).map(|(r, _)| r.clone()).unwrap_or_default()
    }

    /// `Σ degree · measure(stratum)`: the edge mass seen from this side.
    pub fn edge_mass(&self) -> Scalar {
        self.strata.iter().map(|(r, d)| &r.measure() * &Scalar::int(*d as i64)).sum()
    }

    pub fn is_regular(&self, degree: usize) -> bool {
        self.strata.iter().all(|(r, d)| *d == degree || r.is_empty())
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "side {:?}:", self.side)?;
        for (r, d) in &self.strata {
            write!(f, " deg {} on measure {} ({} intervals);", d, r.measure(), r.component_count())?;
        }
        Ok(())
    }
}

impl DefinableBipartiteGraph {
    pub fn new(a: Region, b: Region, edges: Vec<Edge>) -> Self {
        DefinableBipartiteGraph { a, b, edges }
    }

    pub fn a(&self) -> &Region {
        &self.a
    }

    pub fn b(&self) -> &Region {
        &self.b
    }

    pub fn side(&self, side: Side) -> &Region {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn vertices(&self) -> Region {
        self.a.union(&self.b)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn maps(&self) -> impl Iterator<Item = &PwIsometry> {
        self.edges.iter().map(|e| &e.map)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let overlap = self.a.intersect(&self.b);
        if !overlap.is_empty() {
            out.push(Violation { kind: ViolationKind::PartsOverlap, edge: None, region: overlap });
        }
        for (i, e) in self.edges.iter().enumerate() {
            let mut push = |kind, region: Region| {
                if !region.is_empty() {
                    out.push(Violation { kind, edge: Some(e.id.clone()), region });
                }
            };
            push(ViolationKind::EdgeOutsideA, e.map.domain().subtract(&self.a));
            push(ViolationKind::EdgeOutsideB, e.map.image_region().subtract(&self.b));
            let (src, img) = e.map.violations();
            push(ViolationKind::EdgeNotFunction, src);
            push(ViolationKind::EdgeNotInjective, img);
            for other in &self.edges[i + 1..] {
                if other.id == e.id {
                    push(ViolationKind::DuplicateEdgeId, e.map.domain());
                }
                push(ViolationKind::CoincidingEdges, e.map.coinciding_region(&other.map));
            }
        }
        out
    }

    pub fn degrees(&self, side: Side) -> DegreeProfile {
        let covers: Vec<Region> = self
            .edges
            .iter()
            .map(|e| match side {
                Side::A => e.map.domain(),
                Side::B => e.map.image_region(),
            })
            .collect();
        let refs: Vec<&Region> = covers.iter().collect();
        DegreeProfile { side, strata: stratify(self.side(side), &refs) }
    }

    /// Upper bound `d` on vertex degrees over both sides.
    pub fn degree_bound(&self) -> usize {
        self.degrees(Side::A).max_degree().max(self.degrees(Side::B).max_degree())
    }

    pub fn is_two_regular(&self) -> bool {
        self.degrees(Side::A).is_regular(2) && self.degrees(Side::B).is_regular(2)
    }

    /// Neighbours of `y` (which is taken to lie on `from`).
    pub fn neighborhood(&self, y: &Region, from: Side) -> Region {
        let parts: Vec<Region> = self
            .edges
            .iter()
            .map(|e| match from {
                Side::A => e.map.image(y),
                Side::B => e.map.preimage(y),
            })
            .collect();
        Region::union_all(parts.iter())
    }

    /// Neighbourhood of a region meeting both sides.
    pub fn neighborhood_both(&self, y: &Region) -> Region {
        let ya = y.intersect(&self.a);
        let yb = y.intersect(&self.b);
        self.neighborhood(&ya, Side::A).union(&self.neighborhood(&yb, Side::B))
    }

    pub fn with_edges(&self, edges: Vec<Edge>) -> Self {
        DefinableBipartiteGraph { a: self.a.clone(), b: self.b.clone(), edges }
    }

    /// Restriction to sub-parts: vertex sets and all edges are cut down.
    pub fn induced(&self, a: &Region, b: &Region) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let m = e.map.restrict(a);
                let m = m.restrict(&m.preimage(b));
                Edge { id: e.id.clone(), map: m }
            })
            .collect();
        DefinableBipartiteGraph { a: a.clone(), b: b.clone(), edges }
    }
}

/// A matching: for each edge, the subregion of its domain whose edges are selected.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    entries: BTreeMap<usize, Region>,
}

impl Matching {
    pub fn new() -> Self {
        Matching::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (usize, Region)>>(entries: I) -> Self {
        let mut m = Matching::new();
        for (e, r) in entries {
            m.add(e, &r);
        }
        m
    }

    /// The full graph of one edge map.
    pub fn full_edge(g: &DefinableBipartiteGraph, edge: usize) -> Self {
        Matching::from_entries([(edge, g.edge(edge).map.domain())])
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Region)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn get(&self, edge: usize) -> Option<&Region> {
        self.entries.get(&edge)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&mut self, edge: usize, region: &Region) {
        if region.is_empty() {
            return;
        }
        let slot = self.entries.entry(edge).or_default();
        *slot = slot.union(region);
    }

    pub fn remove(&mut self, edge: usize, region: &Region) {
        if let Some(slot) = self.entries.get_mut(&edge) {
            *slot = slot.subtract(region);
            if slot.is_empty() {
                self.entries.remove(&edge);
            }
        }
    }

    pub fn union(&self, other: &Matching) -> Matching {
        let mut m = self.clone();
        for (e, r) in other.entries() {
            m.add(e, r);
        }
        m
    }

    /// Matched part restricted to sub-parts of the graph.
    pub fn restrict(&self, g: &DefinableBipartiteGraph, a: &Region, b: &Region) -> Matching {
        Matching::from_entries(self.entries().map(|(e, r)| {
            let map = &g.edge(e).map;
            let r = r.intersect(a);
            (e, r.intersect(&map.preimage(b)))
        }))
    }

    pub fn support_a(&self) -> Region {
        Region::union_all(self.entries.values())
    }

    pub fn support_b(&self, g: &DefinableBipartiteGraph) -> Region {
        let imgs: Vec<Region> = self.entries().map(|(e, r)| g.edge(e).map.image(r)).collect();
        Region::union_all(imgs.iter())
    }

    pub fn support(&self, g: &DefinableBipartiteGraph, side: Side) -> Region {
        match side {
            Side::A => self.support_a(),
            Side::B => self.support_b(g),
        }
    }

    pub fn covered_measure(&self) -> Scalar {
        self.entries.values().map(Region::measure).sum()
    }

    pub fn interval_count(&self) -> usize {
        self.entries.values().map(Region::component_count).sum()
    }

    /// Exact check of the matching invariants; the returned list is empty iff valid.
    pub fn violations(&self, g: &DefinableBipartiteGraph) -> Vec<String> {
        let mut out = Vec::new();
        let mut total_a = Scalar::zero();
        let mut total_b = Scalar::zero();
        let mut imgs = Vec::new();
        for (e, r) in self.entries() {
            if e >= g.edges().len() {
                out.push(format!("entry references missing edge #{e}"));
                continue;
            }
            let map = &g.edge(e).map;
            let outside = r.subtract(&map.domain());
            if !outside.is_empty() {
                out.push(format!("entry on edge {} leaves the edge domain on {:?}", g.edge(e).id, outside));
            }
            total_a += &r.measure();
            let img = map.image(r);
            total_b += &img.measure();
            imgs.push(img);
        }
        if self.support_a().measure() != total_a {
            out.push("A-side supports overlap".to_string());
        }
        if Region::union_all(imgs.iter()).measure() != total_b {
            out.push("B-side images overlap".to_string());
        }
        out
    }

    pub fn check(&self, g: &DefinableBipartiteGraph) -> Result<()> {
        let v = self.violations(g);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMatching(v.join("; ")))
        }
    }

    /// Neighbours of `y` through matched edges only.
    pub fn matched_neighborhood(&self, g: &DefinableBipartiteGraph, y: &Region, from: Side) -> Region {
        let parts: Vec<Region> = self
            .entries()
            .map(|(e, r)| {
                let m = g.edge(e).map.restrict(r);
                match from {
                    Side::A => m.image(y),
                    Side::B => m.preimage(y),
                }
            })
            .collect();
        Region::union_all(parts.iter())
    }

    pub fn matched_neighborhood_both(&self, g: &DefinableBipartiteGraph, y: &Region) -> Region {
        let ya = y.intersect(g.a());
        let yb = y.intersect(g.b());
        self.matched_neighborhood(g, &ya, Side::A).union(&self.matched_neighborhood(g, &yb, Side::B))
    }

    /// Matched edges as a single piecewise isometry from A to B.
    pub fn as_map(&self, g: &DefinableBipartiteGraph) -> PwIsometry {
        let mut pieces = Vec::new();
        for (e, r) in self.entries() {
            pieces.extend(g.edge(e).map.restrict(r).pieces().iter().cloned());
        }
        PwIsometry::new(pieces)
    }
}

/// Vertices of `side` not covered by `m`.
pub fn uncovered(g: &DefinableBipartiteGraph, m: &Matching, side: Side) -> Region {
    g.side(side).subtract(&m.support(g, side))
}

pub fn uncovered_both(g: &DefinableBipartiteGraph, m: &Matching) -> Region {
    uncovered(g, m, Side::A).union(&uncovered(g, m, Side::B))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::make_rot;
    use crate::pwiso::{Piece, Slope};

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn beta() -> Scalar {
        Scalar::sqrt2() - Scalar::one()
    }

    fn half_edge_graph() -> DefinableBipartiteGraph {
        let a = Region::interval(q(0, 1), q(1, 1));
        let b = Region::interval(q(2, 1), q(3, 1));
        let e = Edge { id: "h".into(), map: PwIsometry::translation(&Region::interval(q(0, 1), q(1, 2)), q(2, 1)) };
        DefinableBipartiteGraph::new(a, b, vec![e])
    }

    #[test]
    fn validate_flags_overlapping_parts() {
        let a = Region::interval(q(0, 1), q(1, 1));
        let g = DefinableBipartiteGraph::new(a.clone(), a.clone(), vec![]);
        let v = g.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::PartsOverlap);
        assert_eq!(v[0].region, a);
    }

    #[test]
    fn validate_flags_non_injective_edge() {
        let a = Region::interval(q(0, 1), q(1, 1));
        let b = Region::interval(q(2, 1), q(3, 1));
        let bad = PwIsometry::new(vec![
            Piece::new(q(0, 1), q(1, 2), Slope::Pos, q(2, 1)),
            Piece::new(q(1, 2), q(1, 1), Slope::Pos, q(3, 2)),
        ]);
        let g = DefinableBipartiteGraph::new(a, b, vec![Edge { id: "bad".into(), map: bad }]);
        assert!(g.validate().iter().any(|v| v.kind == ViolationKind::EdgeNotInjective));
    }

    #[test]
    fn degrees_of_half_edge() {
        let g = half_edge_graph();
        let p = g.degrees(Side::A);
        assert_eq!(p.region_of_degree(1), Region::interval(q(0, 1), q(1, 2)));
        assert_eq!(p.region_of_degree(0), Region::interval(q(1, 2), q(1, 1)));
    }

    #[test]
    fn neighborhood_examples() {
        let g = make_rot(beta()).unwrap();
        assert!(g.neighborhood(&Region::empty(), Side::A).is_empty());
        let y = Region::interval(q(0, 1), q(1, 10));
        let n = g.neighborhood(&y, Side::A);
        let expected = Region::interval(q(2, 1), q(21, 10)).union(&Region::interval(q(2, 1) + beta(), q(21, 10) + beta()));
        assert_eq!(n, expected);
        // everywhere-defined edge: measure at least |A|
        assert!(g.neighborhood(g.a(), Side::A).measure() >= g.a().measure());
    }

    #[test]
    fn matched_neighborhood_examples() {
        let g = make_rot(beta()).unwrap();
        let y = Region::interval(q(0, 1), q(1, 4));
        assert!(Matching::new().matched_neighborhood(&g, &y, Side::A).is_empty());
        let t = g.edge_index("t").unwrap();
        let m = Matching::full_edge(&g, t);
        assert_eq!(m.matched_neighborhood(&g, &y, Side::A), Region::interval(q(2, 1), q(9, 4)));
        let partial = Matching::from_entries([(t, Region::interval(q(1, 2), q(1, 1)))]);
        assert!(partial.matched_neighborhood(&g, &y, Side::A).is_empty());
    }

    #[test]
    fn uncovered_examples() {
        let g = make_rot(beta()).unwrap();
        assert_eq!(uncovered(&g, &Matching::new(), Side::A), *g.a());
        let t = g.edge_index("t").unwrap();
        let m = Matching::full_edge(&g, t);
        assert!(uncovered(&g, &m, Side::A).is_empty());
        assert!(uncovered(&g, &m, Side::B).is_empty());
        let half = Matching::from_entries([(t, Region::interval(q(0, 1), q(1, 2)))]);
        assert_eq!(uncovered(&g, &half, Side::A), Region::interval(q(1, 2), q(1, 1)));
    }

    #[test]
    fn adding_entries_never_grows_uncovered() {
        let g = make_rot(beta()).unwrap();
        let t = g.edge_index("t").unwrap();
        let small = Matching::from_entries([(t, Region::interval(q(0, 1), q(1, 3)))]);
        let big = small.union(&Matching::from_entries([(t, Region::interval(q(1, 2), q(3, 4)))]));
        for side in [Side::A, Side::B] {
            assert!(uncovered(&g, &big, side).is_subset_of(&uncovered(&g, &small, side)));
        }
    }

    #[test]
    fn matching_violations_detect_overlapping_images() {
        let g = make_rot(beta()).unwrap();
        let t = g.edge_index("t").unwrap();
        let r = g.edge_index("r").unwrap();
        // both edges at [0, 1/10) are fine on A only if the A-supports differ; here they coincide
        let m = Matching::from_entries([(t, Region::interval(q(0, 1), q(1, 10))), (r, Region::interval(q(0, 1), q(1, 10)))]);
        assert!(!m.violations(&g).is_empty());
    }
}
