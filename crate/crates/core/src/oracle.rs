//! Independent pointwise checks: finite discretizations solved by
//! Hopcroft–Karp, and sampled validation of matchings computed with region
//! algebra. Nothing here feeds back into the engine.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{uncovered, DefinableBipartiteGraph, Matching, Side};
use crate::region::Region;
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteBipartiteGraph {
    pub left: Vec<Scalar>,
    pub right: Vec<Scalar>,
    /// `adj[i]` lists `(right index, edge index)`.
    pub adj: Vec<Vec<(usize, usize)>>,
}

impl FiniteBipartiteGraph {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }
}

fn breakpoints(g: &DefinableBipartiteGraph) -> Vec<Scalar> {
    let mut pts: Vec<Scalar> = Vec::new();
    for e in g.edges() {
        for p in e.map.pieces() {
            pts.push(p.src.lo.clone());
            pts.push(p.src.hi.clone());
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

/// `m` midpoints in every component of `A`, joined to their images.
pub fn discretize(g: &DefinableBipartiteGraph, m: usize) -> FiniteBipartiteGraph {
    let m = m.max(1);
    let bps = breakpoints(g);
    let mut fg = FiniteBipartiteGraph::default();
    let mut right_idx: HashMap<Scalar, usize> = HashMap::new();
    let den = Scalar::int(m as i64);
    for comp in g.a().intervals() {
        let step = comp.len().checked_div(&den).expect("m > 0");
        let nudge = step.checked_div(&Scalar::int(3)).expect("nonzero");
        for i in 0..m {
            let mut x = &comp.lo + &(&step * &(Scalar::int(i as i64) + Scalar::frac(1, 2)));
            if bps.binary_search(&x).is_ok() {
                x = &x + &nudge;
            }
            let mut row = Vec::new();
            for (ei, e) in g.edges().iter().enumerate() {
                if let Some(y) = e.map.eval(&x) {
                    let next = right_idx.len();
                    let j = *right_idx.entry(y.clone()).or_insert_with(|| {
                        fg.right.push(y);
                        next
                    });
                    row.push((j, ei));
                }
            }
            fg.left.push(x);
            fg.adj.push(row);
        }
    }
    fg
}

/// A maximum matching as `left index → (right index, edge index)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMatching {
    pub pairs: Vec<Option<(usize, usize)>>,
}

impl FiniteMatching {
    pub fn size(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_some()).count()
    }
}

const NIL: usize = usize::MAX;

/// Hopcroft–Karp: BFS layers from free left vertices, then vertex-disjoint
/// shortest augmenting paths by DFS, repeated until no augmenting path remains.
pub fn max_matching_finite(fg: &FiniteBipartiteGraph) -> FiniteMatching {
    let n = fg.left.len();
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; fg.right.len()];
    let mut edge_l = vec![NIL; n];
    let mut dist = vec![0usize; n];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..n {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &fg.adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n {
            if match_l[u] == NIL {
                augment(fg, u, &mut match_l, &mut match_r, &mut edge_l, &mut dist);
            }
        }
    }
    FiniteMatching {
        pairs: (0..n).map(|u| (match_l[u] != NIL).then(|| (match_l[u], edge_l[u]))).collect(),
    }
}

fn augment(
    fg: &FiniteBipartiteGraph,
    u: usize,
    match_l: &mut [usize],
    match_r: &mut [usize],
    edge_l: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &(v, e) in &fg.adj[u] {
        let w = match_r[v];
        let ok = w == NIL || (dist[w] == dist[u] + 1 && augment(fg, w, match_l, match_r, edge_l, dist));
        if ok {
            match_l[u] = v;
            edge_l[u] = e;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleViolation {
    pub point: Scalar,
    pub side: Side,
    pub what: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub seed: u64,
    pub samples: usize,
    pub skipped: usize,
    pub uncovered_hits: usize,
    pub violations: Vec<SampleViolation>,
}

impl SampleReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Rational point drawn uniformly (to `2^-32` resolution, weighted by length) from `r`.
fn sample_point(r: &Region, weights: &[f64], rng: &mut ChaCha8Rng) -> Scalar {
    let total: f64 = weights.iter().sum();
    let mut t = rng.gen::<f64>() * total;
    let mut idx = weights.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            idx = i;
            break;
        }
        t -= w;
    }
    let iv = &r.intervals()[idx];
    let k: u32 = rng.gen();
    let u = Scalar::frac(k as i64, 1i64 << 32);
    &iv.lo + &(&iv.len() * &u)
}

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Pointwise view of a matching, independent of region images.
struct PointMatching<'a> {
    g: &'a DefinableBipartiteGraph,
    entries: Vec<(usize, &'a Region)>,
}

impl<'a> PointMatching<'a> {
    fn new(g: &'a DefinableBipartiteGraph, m: &'a Matching) -> Self {
        PointMatching { g, entries: m.entries().collect() }
    }

    /// Matched partners of an A-vertex: `(edge, image)`.
    fn partners_of_a(&self, x: &Scalar) -> Vec<(usize, Option<Scalar>)> {
        self.entries.iter().filter(|(_, r)| r.contains(x)).map(|(e, _)| (*e, self.g.edge(*e).map.eval(x))).collect()
    }

    /// Matched partners of a B-vertex: `(edge, preimage)`.
    fn partners_of_b(&self, y: &Scalar) -> Vec<(usize, Scalar)> {
        self.entries
            .iter()
            .filter_map(|(e, r)| {
                let x = self.g.edge(*e).map.eval_inverse(y)?;
                r.contains(&x).then_some((*e, x))
            })
            .collect()
    }

    fn covered(&self, v: &Scalar, side: Side) -> bool {
        match side {
            Side::A => !self.partners_of_a(v).is_empty(),
            Side::B => !self.partners_of_b(v).is_empty(),
        }
    }

    fn is_matched_pair(&self, e: usize, x: &Scalar) -> bool {
        self.entries.iter().any(|(f, r)| *f == e && r.contains(x))
    }
}

/// Every endpoint of every region and piece involved, where half-open
/// conventions make pointwise answers ambiguous.
fn boundary_points(g: &DefinableBipartiteGraph, m: &Matching) -> Vec<Scalar> {
    let mut pts = Vec::new();
    for r in [g.a(), g.b()] {
        for iv in r.intervals() {
            pts.push(iv.lo.clone());
            pts.push(iv.hi.clone());
        }
    }
    for e in g.edges() {
        for p in e.map.pieces() {
            let im = p.image();
            pts.extend([p.src.lo.clone(), p.src.hi.clone(), im.lo, im.hi]);
        }
    }
    for (e, r) in m.entries() {
        let img = g.edge(e).map.image(r);
        for iv in r.intervals().iter().chain(img.intervals()) {
            pts.push(iv.lo.clone());
            pts.push(iv.hi.clone());
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

/// Checks `M ⊆ G`, functionality, injectivity and the uncovered region at random points.
pub fn sample_validate(g: &DefinableBipartiteGraph, m: &Matching, n_samples: usize, seed: u64) -> SampleReport {
    let verts = g.vertices();
    let mut report = SampleReport { seed, samples: n_samples, skipped: 0, uncovered_hits: 0, violations: Vec::new() };
    if n_samples == 0 || verts.is_empty() {
        return report;
    }
    let weights: Vec<f64> = verts.intervals().iter().map(|iv| iv.len().to_f64()).collect();
    let bps = boundary_points(g, m);
    let pm = PointMatching::new(g, m);
    let unc_a = uncovered(g, m, Side::A);
    let unc_b = uncovered(g, m, Side::B);
    let results: Vec<(bool, bool, Vec<SampleViolation>)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let x = sample_point(&verts, &weights, &mut rng);
            if bps.binary_search(&x).is_ok() {
                return (true, false, Vec::new());
            }
            let side = if g.a().contains(&x) { Side::A } else { Side::B };
            let mut v = Vec::new();
            let mut bad = |what: String| v.push(SampleViolation { point: x.clone(), side, what });
            let partners = match side {
                Side::A => {
                    let p = pm.partners_of_a(&x);
                    for (e, img) in &p {
                        match img {
                            None => bad(format!("matched on edge {} outside its domain", g.edge(*e).id)),
                            Some(y) if !g.b().contains(y) => bad(format!("edge {} leaves B", g.edge(*e).id)),
                            _ => {}
                        }
                    }
                    if p.len() > 1 {
                        bad(format!("matched {} times (not a function)", p.len()));
                    }
                    p.len()
                }
                Side::B => {
                    let p = pm.partners_of_b(&x);
                    if p.len() > 1 {
                        bad(format!("matched {} times (not injective)", p.len()));
                    }
                    p.len()
                }
            };
            let engine_uncovered = match side {
                Side::A => unc_a.contains(&x),
                Side::B => unc_b.contains(&x),
            };
            if engine_uncovered != (partners == 0) {
                bad(format!("uncovered flag {engine_uncovered} disagrees with {partners} partner(s)"));
            }
            (false, partners == 0, v)
        })
        .collect();
    for (skip, unc, v) in results {
        report.skipped += skip as usize;
        report.uncovered_hits += unc as usize;
        report.violations.extend(v);
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfsReport {
    pub seed: u64,
    pub k: usize,
    pub tried: usize,
    /// Augmenting paths found, as vertex sequences.
    pub found: Vec<Vec<Scalar>>,
}

impl BfsReport {
    pub fn is_clean(&self) -> bool {
        self.found.is_empty()
    }
}

/// Pointwise search for an augmenting path of length `≤ max_len` from `v`.
fn search(pm: &PointMatching, v: &Scalar, side: Side, max_len: usize, path: &mut Vec<Scalar>) -> bool {
    let depth = path.len() - 1;
    if depth % 2 == 1 && !pm.covered(v, side) {
        return true;
    }
    if depth >= max_len {
        return false;
    }
    let mut next: Vec<Scalar> = Vec::new();
    if depth.is_multiple_of(2) {
        for (e, edge) in pm.g.edges().iter().enumerate() {
            match side {
                Side::A => {
                    if let Some(y) = edge.map.eval(v) {
                        if !pm.is_matched_pair(e, v) {
                            next.push(y);
                        }
                    }
                }
                Side::B => {
                    if let Some(x) = edge.map.eval_inverse(v) {
                        if !pm.is_matched_pair(e, &x) {
                            next.push(x);
                        }
                    }
                }
            }
        }
    } else {
        match side {
            Side::A => next.extend(pm.partners_of_a(v).into_iter().filter_map(|(_, y)| y)),
            Side::B => next.extend(pm.partners_of_b(v).into_iter().map(|(_, x)| x)),
        }
    }
    for w in next {
        if path.contains(&w) {
            continue;
        }
        path.push(w.clone());
        if search(pm, &w, side.other(), max_len, path) {
            return true;
        }
        path.pop();
    }
    false
}

/// From sampled uncovered vertices outside `z`, looks for augmenting paths of
/// length at most `2K+1` by explicit search.
pub fn bfs_no_short_augmenting(
    g: &DefinableBipartiteGraph,
    m: &Matching,
    k: usize,
    z: &Region,
    samples: usize,
    seed: u64,
) -> BfsReport {
    let region = uncovered(g, m, Side::A).union(&uncovered(g, m, Side::B)).subtract(z);
    let mut report = BfsReport { seed, k, tried: 0, found: Vec::new() };
    if samples == 0 || region.is_empty() {
        return report;
    }
    let weights: Vec<f64> = region.intervals().iter().map(|iv| iv.len().to_f64()).collect();
    let bps = boundary_points(g, m);
    let pm = PointMatching::new(g, m);
    let zb = {
        let mut v: Vec<Scalar> = z.intervals().iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect();
        v.sort();
        v
    };
    let found: Vec<Option<Vec<Scalar>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let x = sample_point(&region, &weights, &mut rng);
            if bps.binary_search(&x).is_ok() || zb.binary_search(&x).is_ok() {
                return None;
            }
            let side = if g.a().contains(&x) { Side::A } else { Side::B };
            let mut path = vec![x.clone()];
            search(&pm, &x, side, 2 * k + 1, &mut path).then_some(path)
        })
        .collect();
    report.tried = samples;
    report.found = found.into_iter().flatten().collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::make_rot;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn path4() -> FiniteBipartiteGraph {
        FiniteBipartiteGraph {
            left: vec![q(0, 1), q(1, 1)],
            right: vec![q(2, 1), q(3, 1)],
            adj: vec![vec![(0, 0), (1, 0)], vec![(0, 0)]],
        }
    }

    #[test]
    fn hopcroft_karp_small() {
        assert_eq!(max_matching_finite(&path4()).size(), 2);
        assert_eq!(max_matching_finite(&FiniteBipartiteGraph::default()).size(), 0);
    }

    #[test]
    fn discretize_rot() {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let fg = discretize(&g, 4);
        assert_eq!(fg.left.len(), 4);
        assert!(fg.right.len() <= 8);
        assert!(fg.adj.iter().all(|r| r.len() == 2));
        assert_eq!(max_matching_finite(&fg).size(), 4);
        assert_eq!(discretize(&g, 1).left.len(), 1);
    }

    #[test]
    fn empty_matching_samples_uncovered() {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let r = sample_validate(&g, &Matching::new(), 500, 7);
        assert!(r.is_clean());
        assert_eq!(r.uncovered_hits + r.skipped, 500);
    }

    #[test]
    fn corrupted_matching_is_caught() {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        // t on [0,1/2) and r on its preimage of [2,5/2): images coincide
        let bad = Matching::from_entries([
            (0, Region::interval(q(0, 1), q(1, 2))),
            (1, g.edge(1).map.preimage(&Region::interval(q(2, 1), q(5, 2)))),
        ]);
        let r = sample_validate(&g, &bad, 2000, 1);
        assert!(!r.is_clean());
        assert!(r.violations.iter().any(|v| v.side == Side::B));
    }

    #[test]
    fn bfs_finds_single_edges() {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let r = bfs_no_short_augmenting(&g, &Matching::new(), 0, &Region::empty(), 20, 3);
        assert_eq!(r.found.len(), 20);
        let perfect = Matching::full_edge(&g, 0);
        assert!(bfs_no_short_augmenting(&g, &perfect, 3, &Region::empty(), 20, 3).is_clean());
    }
}
