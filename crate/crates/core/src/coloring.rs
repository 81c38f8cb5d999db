//! Proper colorings of finite-degree graphs given by piecewise isometries,
//! defined outside a set of small measure.
//!
//! For one map `f` with domain `D`, every point `x` is separated from `f(x)` by
//! covering `D ∪ f(D)` with intervals short enough that no interval contains both
//! a point and its image; the color of a point is the index of its interval.
//! Fixed points of reflections are cut out first, which costs a little measure.
//! Several maps are combined by coloring each point with the tuple of its
//! per-map colors.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pwiso::{Piece, PwIsometry, Slope};
use crate::region::{Interval, Region};
use crate::scalar::Scalar;

/// The ball cover built for a single map.
#[derive(Clone, Debug)]
pub struct MapColoring {
    /// Shrink applied to the domain before covering (zero if none was needed).
    pub delta: Scalar,
    /// Intervals cut out around fixed points.
    pub excised: Vec<Interval>,
    /// `S_f = (D ∖ D′) ∪ f(D ∖ D′)`.
    pub loss: Region,
    /// Covering intervals, left to right; ball `i` carries local color `i + 1`.
    pub balls: Vec<Interval>,
}

impl MapColoring {
    pub fn colors(&self) -> usize {
        self.balls.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlmostColoring {
    pub kept: Region,
    pub lost: Region,
    /// `classes[c]` is the set of kept points with color `c`.
    pub classes: Vec<Region>,
}

impl AlmostColoring {
    pub fn color_count(&self) -> usize {
        self.classes.len()
    }

    pub fn color_of(&self, x: &Scalar) -> Option<usize> {
        self.classes.iter().position(|r| r.contains(x))
    }

    /// Sorted `(interval, color)` list covering `kept`.
    pub fn cells(&self) -> Vec<(Interval, usize)> {
        let mut cells: Vec<(Interval, usize)> = self
            .classes
            .iter()
            .enumerate()
            .flat_map(|(c, r)| r.intervals().iter().map(move |iv| (iv.clone(), c)))
            .collect();
        cells.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        cells
    }

    /// Points `x` of `kept ∩ dom f` with `f(x) ∈ kept` and the same color as `x`.
    pub fn monochromatic_region(&self, f: &PwIsometry) -> Region {
        let g = f.restrict(&self.kept);
        let g = g.restrict(&g.preimage(&self.kept));
        let cells = self.cells();
        let mut bad = Vec::new();
        for p in g.pieces() {
            for (src_cell, c) in overlapping_cells(&cells, &p.src) {
                let Some(sub) = src_cell.intersect(&p.src) else { continue };
                let img = p.image_of(&sub);
                for (dst_cell, d) in overlapping_cells(&cells, &img) {
                    if c != d {
                        continue;
                    }
                    if let Some(hit) = dst_cell.intersect(&img) {
                        // pull the offending image part back to the source side
                        let back = PwIsometry::new(vec![p.clone()]).preimage(&Region::interval(hit.lo, hit.hi));
                        bad.extend(back.into_intervals());
                    }
                }
            }
        }
        Region::from_intervals(bad)
    }

    pub fn is_proper_for(&self, maps: &[PwIsometry]) -> bool {
        maps.par_iter().all(|f| self.monochromatic_region(f).is_empty())
    }
}

fn overlapping_cells<'a>(cells: &'a [(Interval, usize)], iv: &'a Interval) -> impl Iterator<Item = (&'a Interval, usize)> + 'a {
    let start = cells.partition_point(|(c, _)| c.hi <= iv.lo);
    cells[start..].iter().take_while(move |(c, _)| c.lo < iv.hi).map(|(c, k)| (c, *k))
}

/// A piece of the shrunk domain with a positive lower bound on displacement.
struct Atom {
    lo: Scalar,
    hi: Scalar,
    h: Scalar,
}

fn is_identity(p: &Piece) -> bool {
    p.slope == Slope::Pos && p.offset.is_zero()
}

/// Splits a reflection piece (fixed point outside its closure) into atoms whose
/// distance to the fixed point doubles from one atom to the next.
fn reflection_atoms(p: &Piece, out: &mut Vec<Atom>) {
    let x0 = p.offset.half();
    let two = Scalar::int(2);
    let mut atoms = Vec::new();
    if p.src.lo >= x0 {
        let mut t = &p.src.lo - &x0;
        let mut lo = p.src.lo.clone();
        while lo < p.src.hi {
            let hi = (&x0 + &(&t * &two)).min_of(p.src.hi.clone());
            atoms.push(Atom { lo, hi: hi.clone(), h: &t * &two });
            lo = hi;
            t = &t * &two;
        }
    } else {
        let mut t = &x0 - &p.src.hi;
        let mut hi = p.src.hi.clone();
        while hi > p.src.lo {
            let lo = (&x0 - &(&t * &two)).max_of(p.src.lo.clone());
            atoms.push(Atom { lo: lo.clone(), hi, h: &t * &two });
            hi = lo;
            t = &t * &two;
        }
        atoms.reverse();
    }
    out.extend(atoms);
}

/// The ball cover of Lemma-style single-map colorings with losses below `budget`.
pub fn map_coloring(f: &PwIsometry, budget: &Scalar) -> Result<MapColoring> {
    if !budget.is_positive() {
        return Err(Error::NonPositiveEps);
    }
    if f.pieces().iter().any(is_identity) {
        return Err(Error::DisplacementZeroEverywhere { map: 0 });
    }
    let domain = f.domain();
    let fixed: Vec<Scalar> = f.pieces().iter().filter_map(Piece::fixed_point).collect();

    let (delta, excised, kept_domain) = if fixed.is_empty() {
        (Scalar::zero(), Vec::new(), domain.clone())
    } else {
        let quarter = budget * &Scalar::frac(1, 4);
        let shortest = domain.intervals().iter().map(Interval::len).min().expect("nonempty domain");
        let mut delta = shortest.half();
        let shrunk = loop {
            let s = domain.shrink(&delta);
            if domain.subtract(&s).measure() < quarter {
                break s;
            }
            delta = delta.half();
        };
        let width = budget * &Scalar::frac(1, 8 * fixed.len() as i64);
        let hw = width.half();
        let excised: Vec<Interval> = fixed.iter().map(|x0| Interval::new(x0 - &hw, x0 + &hw)).collect();
        let cut = shrunk.subtract(&Region::from_intervals(excised.iter().cloned()));
        (delta, excised, cut)
    };

    let removed = domain.subtract(&kept_domain);
    let loss = removed.union(&f.image(&removed));

    let g = f.restrict(&kept_domain);
    let mut atoms = Vec::new();
    for p in g.pieces() {
        match p.slope {
            Slope::Pos => atoms.push(Atom { lo: p.src.lo.clone(), hi: p.src.hi.clone(), h: p.offset.abs() }),
            Slope::Neg => reflection_atoms(p, &mut atoms),
        }
    }
    atoms.sort_by(|a, b| a.lo.cmp(&b.lo));

    let cover = kept_domain.union(&g.image_region());
    let mut balls = Vec::new();
    for comp in cover.intervals() {
        let mut p = comp.lo.clone();
        while p < comp.hi {
            let mut r = &comp.hi - &p;
            let start = atoms.partition_point(|a| a.hi <= p);
            for a in &atoms[start..] {
                if a.lo >= &p + &r {
                    break;
                }
                let gap = &a.lo - &p;
                r = r.min_of(a.h.clone().max_of(gap));
            }
            let hi = &p + &r;
            balls.push(Interval::new(p, hi.clone()));
            p = hi;
        }
    }
    Ok(MapColoring { delta, excised, loss, balls })
}

/// Coloring of the graph `(vertexset, Γf)` with loss below `eps`.
pub fn color_single_map(f: &PwIsometry, vertexset: &Region, eps: &Scalar) -> Result<AlmostColoring> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEps);
    }
    let mc = map_coloring(f, eps)?;
    Ok(combine(vertexset, std::slice::from_ref(&mc)))
}

/// Per-map budget `2^-k < eps / maps`, which keeps denominators small.
pub fn per_map_budget(eps: &Scalar, maps: usize) -> Scalar {
    let share = eps * &Scalar::frac(1, maps.max(1) as i64);
    Scalar::pow2_below(&share)
}

/// Product coloring over all maps, proper on `kept` with `measure(lost) < eps`.
pub fn almost_color(vertexset: &Region, maps: &[PwIsometry], eps: &Scalar) -> Result<AlmostColoring> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEps);
    }
    let budget = per_map_budget(eps, maps.len());
    let colorings: Vec<MapColoring> = maps
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            map_coloring(f, &budget).map_err(|e| match e {
                Error::DisplacementZeroEverywhere { .. } => Error::DisplacementZeroEverywhere { map: i },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(combine(vertexset, &colorings))
}

/// Interns the tuple of active per-map ball colors along a left-to-right sweep.
fn combine(vertexset: &Region, colorings: &[MapColoring]) -> AlmostColoring {
    let lost = Region::union_all(colorings.iter().map(|c| &c.loss)).intersect(vertexset);
    let kept = vertexset.subtract(&lost);

    // (position, is_start, map, local color); ends sort before starts at a tie
    let mut events: Vec<(Scalar, bool, u32, u32)> = Vec::new();
    for (j, mc) in colorings.iter().enumerate() {
        for (i, b) in mc.balls.iter().enumerate() {
            events.push((b.lo.clone(), true, j as u32, i as u32 + 1));
            events.push((b.hi.clone(), false, j as u32, i as u32 + 1));
        }
    }
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active: BTreeMap<u32, u32> = BTreeMap::new();
    let mut ids: HashMap<Vec<(u32, u32)>, usize> = HashMap::new();
    let mut segments: Vec<Vec<Interval>> = Vec::new();
    let mut k = 0;
    while k < events.len() {
        let pos = events[k].0.clone();
        while k < events.len() && events[k].0 == pos {
            let (_, start, j, c) = &events[k];
            if *start {
                active.insert(*j, *c);
            } else if active.get(j) == Some(c) {
                active.remove(j);
            }
            k += 1;
        }
        if active.is_empty() || k == events.len() {
            continue;
        }
        let next = events[k].0.clone();
        let key: Vec<(u32, u32)> = active.iter().map(|(a, b)| (*a, *b)).collect();
        let id = *ids.entry(key).or_insert_with(|| {
            segments.push(Vec::new());
            segments.len() - 1
        });
        segments[id].push(Interval::new(pos, next));
    }

    let mut classes = Vec::with_capacity(segments.len() + 1);
    let tupled: Vec<Region> = segments.into_iter().map(|s| Region::from_intervals(s).intersect(&kept)).collect();
    let free = kept.subtract(&Region::union_all(tupled.iter()));
    if !free.is_empty() || tupled.iter().all(Region::is_empty) {
        classes.push(free);
    }
    classes.extend(tupled.into_iter().filter(|r| !r.is_empty()));
    if kept.is_empty() {
        classes.clear();
    }
    AlmostColoring { kept, lost, classes }
}
