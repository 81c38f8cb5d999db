//! Cancellation: from equidecompositions `φ: A → A′`, `ψ: B → B′` and an
//! approximate `θ: A ⊔ A′ → B ⊔ B′`, build a piecewise isometry from almost all
//! of `A` onto almost all of `B`.
//!
//! The auxiliary graph `H` joins `a ∈ A` to `b ∈ B` whenever `θ` sends `a` or
//! `φ(a)` to `b` or `ψ(b)`. Every vertex has degree at most 2, so after removing
//! isolated vertices and matching mutually degree-1 pairs directly, the rest is
//! handled by the near-2-regular coverage driver.

use crate::error::{Error, Result};
use crate::flipper::{epsilon_matching_with, CoverageReport, FlipTrace, ImproveOptions};
use crate::graph::{DefinableBipartiteGraph, Edge, Matching, Side};
use crate::pwiso::PwIsometry;
use crate::region::Region;
use crate::scalar::Scalar;

/// A piecewise witness `f_i: X_i → Y_i`, total when `defect` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Equidecomposition {
    pub pieces: Vec<PwIsometry>,
    pub defect: Scalar,
}

impl Equidecomposition {
    pub fn total(pieces: Vec<PwIsometry>) -> Self {
        Equidecomposition { pieces, defect: Scalar::zero() }
    }

    pub fn partial(pieces: Vec<PwIsometry>, defect: Scalar) -> Self {
        Equidecomposition { pieces, defect }
    }

    /// All pieces as one map.
    pub fn map(&self) -> PwIsometry {
        PwIsometry::new(self.pieces.iter().flat_map(|p| p.pieces().iter().cloned()).collect())
    }

    pub fn domain(&self) -> Region {
        Region::union_all(self.pieces.iter().map(PwIsometry::domain).collect::<Vec<_>>().iter())
    }

    pub fn image(&self) -> Region {
        Region::union_all(self.pieces.iter().map(PwIsometry::image_region).collect::<Vec<_>>().iter())
    }

    /// Problems with this witness as a map from `x` to `y`.
    pub fn violations(&self, x: &Region, y: &Region) -> Vec<String> {
        let mut out = Vec::new();
        let f = self.map();
        let (src, img) = f.violations();
        let pieces_measure: Scalar = self.pieces.iter().map(PwIsometry::measure).sum();
        if !src.is_empty() || f.measure() != pieces_measure {
            out.push(format!("sources overlap on {src:?}"));
        }
        if !img.is_empty() {
            out.push(format!("images overlap on {img:?}"));
        }
        let outside = f.domain().subtract(x);
        if !outside.is_empty() {
            out.push(format!("domain leaves the source part on {outside:?}"));
        }
        let outside = f.image_region().subtract(y);
        if !outside.is_empty() {
            out.push(format!("image leaves the target part on {outside:?}"));
        }
        let miss_x = x.subtract(&f.domain()).measure();
        let miss_y = y.subtract(&f.image_region()).measure();
        for (side, miss) in [("source", miss_x), ("target", miss_y)] {
            let ok = if self.defect.is_zero() { miss.is_zero() } else { miss < self.defect };
            if !ok {
                out.push(format!("{side} misses measure {miss}, declared defect {}", self.defect));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CancellationInstance {
    pub a: Region,
    pub a2: Region,
    pub b: Region,
    pub b2: Region,
    pub phi: Equidecomposition,
    pub psi: Equidecomposition,
    pub theta: Equidecomposition,
}

impl CancellationInstance {
    pub fn new(
        a: Region,
        a2: Region,
        b: Region,
        b2: Region,
        phi: Equidecomposition,
        psi: Equidecomposition,
        theta: Equidecomposition,
    ) -> Result<Self> {
        let inst = CancellationInstance { a, a2, b, b2, phi, psi, theta };
        let v = inst.violations();
        if v.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InstanceInvalid(v.join("; ")))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let parts = [("A", &self.a), ("A'", &self.a2), ("B", &self.b), ("B'", &self.b2)];
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let o = parts[i].1.intersect(parts[j].1);
                if !o.is_empty() {
                    out.push(format!("parts {} and {} overlap on {o:?}", parts[i].0, parts[j].0));
                }
            }
        }
        if self.a.measure() != self.a2.measure() {
            out.push("A and A' have different measure".into());
        }
        if self.b.measure() != self.b2.measure() {
            out.push("B and B' have different measure".into());
        }
        let witnesses = [
            ("phi", &self.phi, self.a.clone(), self.a2.clone()),
            ("psi", &self.psi, self.b.clone(), self.b2.clone()),
            ("theta", &self.theta, self.a.union(&self.a2), self.b.union(&self.b2)),
        ];
        for (name, w, x, y) in witnesses {
            out.extend(w.violations(&x, &y).into_iter().map(|s| format!("{name}: {s}")));
        }
        out
    }
}

/// Edge ids of `H`, one per composite.
pub const H_EDGE_IDS: [&str; 4] = ["theta", "psi^-1.theta", "theta.phi", "psi^-1.theta.phi"];

/// The degree-≤2 graph on `A ⊔ B` built from the four composites of `θ`, `φ`, `ψ⁻¹`.
pub fn build_h(inst: &CancellationInstance) -> Result<DefinableBipartiteGraph> {
    let v = inst.violations();
    if !v.is_empty() {
        return Err(Error::InstanceInvalid(v.join("; ")));
    }
    let theta = inst.theta.map();
    let phi = inst.phi.map();
    let psi_inv = inst.psi.map().invert();
    let into_b = |f: PwIsometry| f.restrict(&f.preimage(&inst.b));
    let theta_a = theta.restrict(&inst.a);
    let theta_phi = theta.compose(&phi);
    let composites = [
        into_b(theta_a.clone()),
        into_b(psi_inv.compose(&theta_a)),
        into_b(theta_phi.clone()),
        into_b(psi_inv.compose(&theta_phi)),
    ];
    let mut edges: Vec<Edge> = Vec::new();
    for (id, f) in H_EDGE_IDS.iter().zip(composites) {
        let mut f = f;
        for e in &edges {
            let same = f.coinciding_region(&e.map);
            if !same.is_empty() {
                f = f.restrict(&f.domain().subtract(&same));
            }
        }
        if !f.is_empty() {
            edges.push(Edge { id: (*id).to_string(), map: f });
        }
    }
    Ok(DefinableBipartiteGraph::new(inst.a.clone(), inst.b.clone(), edges))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pruned {
    /// The remaining graph, with the same edge indices as `H`.
    pub graph: DefinableBipartiteGraph,
    pub forced: Matching,
    pub dropped: Region,
}

/// Removes isolated vertices and matches mutually degree-1 pairs directly.
pub fn prune(h: &DefinableBipartiteGraph) -> Pruned {
    let da = h.degrees(Side::A);
    let db = h.degrees(Side::B);
    let dropped = da.region_of_degree(0).union(&db.region_of_degree(0));
    let one_a = da.region_of_degree(1);
    let one_b = db.region_of_degree(1);
    let mut forced = Matching::new();
    for (i, e) in h.edges().iter().enumerate() {
        let sub = one_a.intersect(&e.map.preimage(&one_b));
        forced.add(i, &sub);
    }
    let a = h.a().subtract(&dropped).subtract(&forced.support_a());
    let b = h.b().subtract(&dropped).subtract(&forced.support_b(h));
    Pruned { graph: h.induced(&a, &b), forced, dropped }
}

#[derive(Clone, Debug)]
pub struct CancellationResult {
    pub h: DefinableBipartiteGraph,
    pub pruned: Pruned,
    pub matching: Matching,
    pub witness: PwIsometry,
    /// `μ(A ∖ dom) + μ(B ∖ im)`.
    pub defect: Scalar,
    pub missing_a: Scalar,
    pub missing_b: Scalar,
    pub report: CoverageReport,
    pub trace: FlipTrace,
}

pub fn cancellation_witness(inst: &CancellationInstance, eps: &Scalar) -> Result<CancellationResult> {
    cancellation_witness_with(inst, eps, &mut ImproveOptions::default())
}

pub fn cancellation_witness_with(
    inst: &CancellationInstance,
    eps: &Scalar,
    opts: &mut ImproveOptions,
) -> Result<CancellationResult> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEps);
    }
    let half = eps.half();
    if inst.theta.defect >= half {
        return Err(Error::DefectTooLarge { defect: Box::new(inst.theta.defect.clone()), eps: Box::new(eps.clone()) });
    }
    let h = build_h(inst)?;
    let pruned = prune(&h);
    let (m, report, trace) = epsilon_matching_with(&pruned.graph, &half, opts)?;
    let matching = pruned.forced.union(&m);
    matching.check(&h)?;
    let witness = matching.as_map(&h);
    let missing_a = inst.a.subtract(&witness.domain()).measure();
    let missing_b = inst.b.subtract(&witness.image_region()).measure();
    let defect = &missing_a + &missing_b;
    Ok(CancellationResult { h, pruned, matching, witness, defect, missing_a, missing_b, report, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{cancel_demo, cancel_demo_split};

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::frac(p, d)
    }

    fn iv(a: Scalar, b: Scalar) -> Region {
        Region::interval(a, b)
    }

    fn aligned() -> CancellationInstance {
        let a = iv(q(0, 1), q(1, 2));
        let a2 = iv(q(1, 1), q(3, 2));
        let b = iv(q(2, 1), q(5, 2));
        let b2 = iv(q(3, 1), q(7, 2));
        let phi = Equidecomposition::total(vec![PwIsometry::translation(&a, q(1, 1))]);
        let psi = Equidecomposition::total(vec![PwIsometry::translation(&b, q(1, 1))]);
        let theta = Equidecomposition::total(vec![
            PwIsometry::translation(&a, q(2, 1)),
            PwIsometry::translation(&a2, q(2, 1)),
        ]);
        CancellationInstance::new(a, a2, b, b2, phi, psi, theta).unwrap()
    }

    #[test]
    fn aligned_instance_gives_theta() {
        let inst = aligned();
        let h = build_h(&inst).unwrap();
        assert_eq!(h.edges().len(), 1);
        let res = cancellation_witness(&inst, &q(1, 10)).unwrap();
        assert!(res.defect.is_zero());
        assert_eq!(res.witness, inst.theta.map().restrict(&inst.a));
    }

    #[test]
    fn demo_is_two_regular() {
        let inst = cancel_demo(&Scalar::zero(), &cancel_demo_split()).unwrap();
        let h = build_h(&inst).unwrap();
        assert!(h.is_two_regular());
        let p = prune(&h);
        assert!(p.forced.is_empty());
        assert!(p.dropped.is_empty());
    }

    #[test]
    fn demo_defect_leaves_degree_one() {
        let d = q(1, 40);
        let inst = cancel_demo(&d, &cancel_demo_split()).unwrap();
        let h = build_h(&inst).unwrap();
        let low: Scalar = [Side::A, Side::B]
            .iter()
            .map(|s| {
                let p = h.degrees(*s);
                &p.region_of_degree(0).measure() + &p.region_of_degree(1).measure()
            })
            .sum();
        assert_eq!(low, d);
        assert!(h.degree_bound() <= 2);
    }

    #[test]
    fn overlapping_parts_are_invalid() {
        let inst = aligned();
        let r = CancellationInstance::new(
            inst.a.clone(),
            inst.a.clone(),
            inst.b.clone(),
            inst.b2.clone(),
            inst.phi.clone(),
            inst.psi.clone(),
            inst.theta.clone(),
        );
        assert!(matches!(r, Err(Error::InstanceInvalid(_))));
    }

    #[test]
    fn defect_too_large() {
        let inst = cancel_demo(&q(1, 10), &cancel_demo_split()).unwrap();
        assert!(matches!(cancellation_witness(&inst, &q(1, 10)), Err(Error::DefectTooLarge { .. })));
    }
}
