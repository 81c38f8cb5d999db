//! Matching improvement by flipping color classes of short augmenting paths,
//! the Y-layer counting check, and the ε-coverage driver.

use num_bigint::BigInt;
use num_traits::One;

use crate::coloring::{almost_color, AlmostColoring};
use crate::error::{Error, Result};
use crate::graph::{uncovered_both, DefinableBipartiteGraph, Matching, Side};
use crate::pathspace::{
    branching_bound, conflict_graph, enumerate_with, flip_budget, residual, Dir, MatchState, PathSpace, PathType,
    DEFAULT_BRANCH_CAP,
};
use crate::region::Region;
use crate::scalar::Scalar;

/// One nonempty flipping round.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipRound {
    pub k: u64,
    pub color: usize,
    pub flipped: Scalar,
    /// `ν` still augmenting among the current epoch's types after this round.
    pub remaining: Scalar,
    pub intervals: usize,
}

/// Summary of one pass over all colors of a freshly enumerated path space.
#[derive(Clone, Debug, PartialEq)]
pub struct Epoch {
    pub types: usize,
    pub nu: Scalar,
    pub conflict_maps: usize,
    pub colors: usize,
    pub lost: Scalar,
    /// Exact properness of the conflict coloring, when verification was requested.
    pub proper: Option<bool>,
    pub flipped: Scalar,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlipTrace {
    pub rounds: Vec<FlipRound>,
    pub epochs: Vec<Epoch>,
    /// Color iterations performed, empty ones included.
    pub total_rounds: u64,
    pub cap: BigInt,
    /// `d^{2K+1}`.
    pub flip_budget: BigInt,
    pub final_nu: Scalar,
    /// Starts of the augmenting paths left over (the exceptional set `Z`).
    pub residual_starts: Region,
}

/// A marked edge of `G` at an A-side point whose status changes are counted.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipProbe {
    pub edge: usize,
    pub point: Scalar,
    pub toggles: u64,
}

#[derive(Clone, Debug, Default)]
pub struct ImproveOptions {
    pub probes: Vec<FlipProbe>,
    pub verify_coloring: bool,
    pub branch_cap: Option<u64>,
    /// Tightens the round cap below the computed bound.
    pub max_rounds: Option<u64>,
}

/// A-side region of the edge used by step `i`, for the start vertices in `r`.
fn step_region_a(t: &PathType, i: usize, r: &Region) -> Region {
    match t.seq.steps[i].dir {
        Dir::Forward => t.footprint(i, r),
        Dir::Backward => t.footprint(i + 1, r),
    }
}

fn overlap_of(regions: &[Region]) -> Region {
    let mut seen = Region::empty();
    let mut bad = Region::empty();
    for r in regions {
        bad = bad.union(&seen.intersect(r));
        seen = seen.union(r);
    }
    bad
}

/// Flips several path families at once; their vertex footprints must be disjoint.
pub fn flip_many(m: &Matching, flips: &[(&PathType, Region)]) -> Result<Matching> {
    let mut footprints = Vec::new();
    for (t, r) in flips {
        for i in 0..=t.len() {
            footprints.push(t.footprint(i, r));
        }
    }
    let total: Scalar = footprints.iter().map(Region::measure).sum();
    if Region::union_all(footprints.iter()).measure() != total {
        return Err(Error::VertexDisjointnessViolated(overlap_of(&footprints)));
    }
    let mut out = m.clone();
    for (t, r) in flips {
        for (i, st) in t.seq.steps.iter().enumerate() {
            if st.matched {
                out.remove(st.edge, &step_region_a(t, i, r));
            }
        }
    }
    for (t, r) in flips {
        for (i, st) in t.seq.steps.iter().enumerate() {
            if !st.matched {
                out.add(st.edge, &step_region_a(t, i, r));
            }
        }
    }
    Ok(out)
}

/// Flips the paths of `ptype` started in `region`.
pub fn flip(m: &Matching, ptype: &PathType, region: &Region) -> Result<Matching> {
    let r = region.intersect(&ptype.start);
    if r.is_empty() {
        return Ok(m.clone());
    }
    flip_many(m, &[(ptype, r)])
}

fn record_probes(probes: &mut [FlipProbe], flips: &[(&PathType, Region)]) {
    if probes.is_empty() {
        return;
    }
    for (t, r) in flips {
        for (i, st) in t.seq.steps.iter().enumerate() {
            let touched: Vec<usize> = probes.iter().enumerate().filter(|(_, p)| p.edge == st.edge).map(|(j, _)| j).collect();
            if touched.is_empty() {
                continue;
            }
            let region = step_region_a(t, i, r);
            for j in touched {
                if region.contains(&probes[j].point) {
                    probes[j].toggles += 1;
                }
            }
        }
    }
}

/// Per-type start cells of every color class, in class order.
fn color_cells(ps: &PathSpace, col: &AlmostColoring) -> Vec<Vec<(usize, Region)>> {
    let stride = &ps.embedding.stride;
    let mut out = Vec::with_capacity(col.classes.len());
    for class in &col.classes {
        let mut per: std::collections::BTreeMap<usize, Vec<crate::region::Interval>> = Default::default();
        for iv in class.intervals() {
            let slot = iv.lo.checked_div(stride).expect("positive stride").floor();
            let slot: usize = slot.try_into().expect("slot fits");
            per.entry(slot).or_default().push(iv.clone());
        }
        out.push(
            per.into_iter()
                .map(|(slot, ivs)| (slot, ps.pull_back(slot, &Region::from_intervals(ivs))))
                .filter(|(_, r)| !r.is_empty())
                .collect(),
        );
    }
    out
}

pub fn improve(g: &DefinableBipartiteGraph, m: &Matching, k: usize, delta: &Scalar) -> Result<(Matching, FlipTrace)> {
    improve_with(g, m, k, delta, &mut ImproveOptions::default())
}

/// Flips color classes of short augmenting paths until their `ν` drops below `delta`.
///
/// Each epoch enumerates the augmenting paths of the current matching, colors
/// their conflict graph outside a set of `ν`-measure `delta/2`, and then flips
/// whatever is still augmenting in class `0, 1, …, C−1` in turn.
pub fn improve_with(
    g: &DefinableBipartiteGraph,
    m: &Matching,
    k: usize,
    delta: &Scalar,
    opts: &mut ImproveOptions,
) -> Result<(Matching, FlipTrace)> {
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    m.check(g)?;
    let d = g.degree_bound();
    let cap_branch = opts.branch_cap.unwrap_or(DEFAULT_BRANCH_CAP);
    let branching = branching_bound(d, k);
    if branching > BigInt::from(cap_branch) {
        return Err(Error::EnumerationCap { branching: branching.to_string(), cap: cap_branch.to_string() });
    }
    let n_budget = flip_budget(d, k);
    let mut trace = FlipTrace { flip_budget: n_budget.clone(), ..Default::default() };
    let mut cur = m.clone();
    let mut cap: Option<BigInt> = None;

    loop {
        let st = MatchState::new(g, &cur);
        let ps = enumerate_with(g, &st, k);
        let nu = ps.nu_total();
        if &nu < delta {
            trace.final_nu = nu;
            trace.residual_starts = ps.starts();
            return Ok((cur, trace));
        }
        let cg = conflict_graph(&ps);
        let maps = cg.edge_maps();
        let col = almost_color(&cg.vertices, &maps, &delta.half())?;
        let colors = col.color_count();
        let cap_value = cap
            .get_or_insert_with(|| {
                // C·N·⌈ν·2C/δ⌉
                let c = BigInt::from(colors.max(1));
                let ratio = (&nu * &Scalar::int(2 * colors.max(1) as i64)).checked_div(delta).expect("delta > 0");
                let bound = &c * &n_budget * ratio.ceil();
                match opts.max_rounds {
                    Some(r) if BigInt::from(r) < bound => BigInt::from(r),
                    _ => bound,
                }
            })
            .clone();
        trace.cap = cap_value.clone();
        let proper = opts.verify_coloring.then(|| col.is_proper_for(&maps));
        let cells = color_cells(&ps, &col);

        let mut epoch_flipped = Scalar::zero();
        let mut state = st;
        for (color, class) in cells.iter().enumerate() {
            trace.total_rounds += 1;
            if BigInt::from(trace.total_rounds) > cap_value {
                return Err(Error::IterationCapExceeded { rounds: trace.total_rounds, cap: cap_value.to_string() });
            }
            if class.is_empty() {
                continue;
            }
            let flips: Vec<(&PathType, Region)> = class
                .iter()
                .map(|(slot, cell)| (&ps.types[*slot], residual(&ps.types[*slot], cell, &state)))
                .filter(|(_, r)| !r.is_empty())
                .collect();
            if flips.is_empty() {
                continue;
            }
            let flipped: Scalar = flips.iter().map(|(_, r)| r.measure()).sum();
            cur = flip_many(&cur, &flips)?;
            cur.check(g)?;
            record_probes(&mut opts.probes, &flips);
            epoch_flipped += &flipped;
            let after = MatchState::new(g, &cur);
            let remaining: Scalar = ps.types.iter().map(|t| residual(t, &t.start, &after).measure()).sum();
            state = after;
            trace.rounds.push(FlipRound {
                k: trace.total_rounds - 1,
                color,
                flipped,
                remaining,
                intervals: cur.interval_count(),
            });
        }
        trace.epochs.push(Epoch {
            types: ps.len(),
            nu,
            conflict_maps: maps.len(),
            colors,
            lost: col.lost.measure(),
            proper,
            flipped: epoch_flipped.clone(),
        });
        if epoch_flipped.is_zero() {
            return Err(Error::IterationCapExceeded { rounds: trace.total_rounds, cap: cap_value.to_string() });
        }
    }
}

/// `Y_0 = start`, `Y_{2j+1} = N_G(Y_{2j})`, `Y_{2j+2} = N_M(Y_{2j+1})`, up to `Y_K`.
pub fn y_layers(g: &DefinableBipartiteGraph, m: &Matching, start: &Region, k: usize) -> Vec<Region> {
    let mut layers = vec![start.clone()];
    for i in 0..k {
        let prev = &layers[i];
        let next = if i % 2 == 0 { g.neighborhood_both(prev) } else { m.matched_neighborhood_both(g, prev) };
        layers.push(next);
    }
    layers
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountingReport {
    pub k: usize,
    pub residual_starts: Region,
    pub uncovered: Scalar,
    /// `μ(Y_0 ∖ Z)`.
    pub base: Scalar,
    /// `μ((Y_0 ∖ Z)_j)` for `j = 0..=K`.
    pub layers: Vec<Scalar>,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub holds: bool,
}

fn check_even_k(k: usize) -> Result<()> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("K must be even and at least 2, got {k}")));
    }
    Ok(())
}

/// Verifies `K·μ(Y_0 ∖ Z) = μ((Y_0 ∖ Z)_K)` exactly, `Z` being the starts of
/// augmenting paths of length at most `2K+1`.
pub fn counting_check(g: &DefinableBipartiteGraph, m: &Matching, k: usize) -> Result<CountingReport> {
    check_even_k(k)?;
    if !g.is_two_regular() {
        return Err(Error::NotTwoRegular(format!("{}; {}", g.degrees(Side::A), g.degrees(Side::B))));
    }
    m.check(g)?;
    let st = MatchState::new(g, m);
    let z = enumerate_with(g, &st, k).starts();
    let y0 = uncovered_both(g, m);
    let base = y0.subtract(&z);
    let layers: Vec<Scalar> = y_layers(g, m, &base, k).iter().map(Region::measure).collect();
    let lhs = &Scalar::int(k as i64) * &base.measure();
    let rhs = layers[k].clone();
    Ok(CountingReport {
        k,
        residual_starts: z,
        uncovered: y0.measure(),
        holds: lhs == rhs,
        base: base.measure(),
        layers,
        lhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub eps: Scalar,
    pub k: usize,
    pub delta: Scalar,
    /// Measure of the degree-1 vertices.
    pub defect: Scalar,
    pub uncovered: Scalar,
    pub uncovered_a: Scalar,
    pub uncovered_b: Scalar,
    pub residual_nu: Scalar,
    pub residual_starts: Region,
    /// `μ(Y_j)` grown from the uncovered vertices outside `Z`.
    pub layers: Vec<Scalar>,
}

/// Smallest even `K ≥ 2` with `T/K < slack/2`, where `T = μ(A) + μ(B)`.
pub fn choose_k(total: &Scalar, slack: &Scalar) -> usize {
    // K > 2T/slack
    let bound = (total * &Scalar::int(2)).checked_div(slack).expect("positive slack");
    let mut k = bound.floor() + BigInt::one();
    if &k % 2 == BigInt::one() {
        k += 1;
    }
    let k: usize = k.try_into().expect("K fits in usize");
    k.max(2)
}

/// Parameters `(K, δ, δ₀)` chosen for a run, after checking near-2-regularity.
pub fn coverage_plan(g: &DefinableBipartiteGraph, eps: &Scalar) -> Result<(usize, Scalar, Scalar)> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEps);
    }
    let mut defect = Scalar::zero();
    for side in [Side::A, Side::B] {
        let p = g.degrees(side);
        for (r, deg) in &p.strata {
            if r.is_empty() {
                continue;
            }
            match deg {
                2 => {}
                1 => defect += &r.measure(),
                _ => {
                    return Err(Error::NotNearTwoRegular(format!("degree {deg} on measure {} ({p})", r.measure())));
                }
            }
        }
    }
    if &defect >= eps {
        return Err(Error::NotNearTwoRegular(format!("degree-1 measure {defect} is not below epsilon {eps}")));
    }
    let slack = eps - &defect;
    let total = &g.a().measure() + &g.b().measure();
    Ok((choose_k(&total, &slack), slack.half(), defect))
}

/// A matching leaving less than `eps` uncovered on a graph that is 2-regular
/// outside a degree-1 set of measure below `eps`.
pub fn epsilon_matching(g: &DefinableBipartiteGraph, eps: &Scalar) -> Result<(Matching, CoverageReport, FlipTrace)> {
    epsilon_matching_with(g, eps, &mut ImproveOptions::default())
}

pub fn epsilon_matching_with(
    g: &DefinableBipartiteGraph,
    eps: &Scalar,
    opts: &mut ImproveOptions,
) -> Result<(Matching, CoverageReport, FlipTrace)> {
    let (k, delta, defect) = coverage_plan(g, eps)?;
    let (m, trace) = improve_with(g, &Matching::new(), k, &delta, opts)?;
    let report = coverage_report(g, &m, eps, k, &delta, &defect, &trace);
    Ok((m, report, trace))
}

pub fn coverage_report(
    g: &DefinableBipartiteGraph,
    m: &Matching,
    eps: &Scalar,
    k: usize,
    delta: &Scalar,
    defect: &Scalar,
    trace: &FlipTrace,
) -> CoverageReport {
    let ua = crate::graph::uncovered(g, m, Side::A);
    let ub = crate::graph::uncovered(g, m, Side::B);
    let base = ua.union(&ub).subtract(&trace.residual_starts);
    CoverageReport {
        eps: eps.clone(),
        k,
        delta: delta.clone(),
        defect: defect.clone(),
        uncovered: &ua.measure() + &ub.measure(),
        uncovered_a: ua.measure(),
        uncovered_b: ub.measure(),
        residual_nu: trace.final_nu.clone(),
        residual_starts: trace.residual_starts.clone(),
        layers: y_layers(g, m, &base, k).iter().map(Region::measure).collect(),
    }
}
