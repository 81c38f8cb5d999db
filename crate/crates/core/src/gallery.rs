//! Built-in instances: a decomposable rotation graph, the Laczkovich graph
//! with no measurable perfect matching, and a 2-cancellation demo.

use crate::cancellation::{CancellationInstance, Equidecomposition};
use crate::error::{Error, Result};
use crate::graph::{DefinableBipartiteGraph, Edge};
use crate::pwiso::{Piece, PwIsometry, Slope};
use crate::region::Region;
use crate::scalar::Scalar;

fn iv(lo: Scalar, hi: Scalar) -> Region {
    Region::interval(lo, hi)
}

/// `A = [0,1)`, `B = [2,3)`, edge `t: x ↦ x+2` and edge `r`, the rotation by
/// `alpha` shifted into `B`.
pub fn make_rot(alpha: Scalar) -> Result<DefinableBipartiteGraph> {
    if !alpha.is_positive() || alpha >= Scalar::one() {
        return Err(Error::InvalidArgument(format!("rotation amount {alpha} must lie in (0, 1)")));
    }
    let one = Scalar::one();
    let two = Scalar::int(2);
    let cut = &one - &alpha;
    let t = PwIsometry::translation(&iv(Scalar::zero(), one.clone()), two.clone());
    let r = PwIsometry::new(vec![
        Piece::new(Scalar::zero(), cut.clone(), Slope::Pos, &two + &alpha),
        Piece::new(cut, one.clone(), Slope::Pos, &one + &alpha),
    ]);
    Ok(DefinableBipartiteGraph::new(
        iv(Scalar::zero(), one),
        iv(two, Scalar::int(3)),
        vec![Edge { id: "t".into(), map: t }, Edge { id: "r".into(), map: r }],
    ))
}

/// The quotient of the edge circle `[0,1)` by the reflections `t ↦ −t` (A side)
/// and `t ↦ beta − t` (B side).
///
/// A is the half-circle fundamental domain `[0, 1/2)`; a B-orbit is represented by
/// its point in `[beta/2, beta/2 + 1/2)`, placed at `2 + b − beta/2`. A vertex `x`
/// owns the two edge points `x` and `1 − x`; tracking which representative each
/// one lands on gives four slope-±1 pieces. Pieces are grouped into three
/// injective edge maps (the natural pairing by edge point is not injective on B).
///
/// Graphs for `beta` and `1 − beta` are isomorphic, so the smaller of the two is used.
pub fn make_laczkovich(beta: Scalar) -> Result<DefinableBipartiteGraph> {
    if !beta.is_positive() || beta >= Scalar::one() {
        return Err(Error::InvalidArgument(format!("beta {beta} must lie in (0, 1)")));
    }
    let one = Scalar::one();
    let beta = {
        let other = &one - &beta;
        beta.min_of(other)
    };
    let half = Scalar::frac(1, 2);
    let hb = beta.half();
    let two = Scalar::int(2);
    let zero = Scalar::zero();

    let p1 = Piece::new(zero.clone(), hb.clone(), Slope::Neg, &two + &hb);
    let p2 = Piece::new(hb.clone(), half.clone(), Slope::Pos, &two - &hb);
    let p3 = Piece::new(&half - &hb, half.clone(), Slope::Neg, Scalar::int(3) - &hb);
    let p4 = Piece::new(zero.clone(), &half - &hb, Slope::Pos, &two + &hb);

    let edges = vec![
        Edge { id: "e1".into(), map: PwIsometry::new(vec![p1, p3]) },
        Edge { id: "e2".into(), map: PwIsometry::new(vec![p2]) },
        Edge { id: "e3".into(), map: PwIsometry::new(vec![p4]) },
    ];
    Ok(DefinableBipartiteGraph::new(iv(zero, half.clone()), iv(two.clone(), &two + &half), edges))
}

/// Warning text for parameters under which the Laczkovich graph degenerates.
pub fn laczkovich_warning(beta: &Scalar) -> Option<String> {
    beta.is_rational().then(|| {
        format!("beta = {beta} is rational: the rotation is periodic and the graph has definable perfect matchings")
    })
}

/// Default split point of the demo's scrambling map, `√2/4`. An irrational
/// split makes the components of the auxiliary graph bi-infinite paths.
pub fn cancel_demo_split() -> Scalar {
    Scalar::quad(0, 1, 1, 4)
}

/// `A = [0,1/2)`, `A′ = [1,3/2)`, `B = [2,5/2)`, `B′ = [3,7/2)` with `φ`, `ψ` the
/// unit shifts and `θ` a three-piece translation sending `A′` onto `B` and `A`
/// onto `B′` with its two halves (cut at `split`) exchanged.
///
/// A positive `defect` removes `[3/2 − defect/2, 3/2)` from `θ` and declares
/// `defect` as the witness defect, so each side misses exactly `defect/2`.
pub fn cancel_demo(defect: &Scalar, split: &Scalar) -> Result<CancellationInstance> {
    let zero = Scalar::zero();
    let half = Scalar::frac(1, 2);
    if defect.is_negative() || defect >= &half {
        return Err(Error::InvalidArgument(format!("defect {defect} must lie in [0, 1/2)")));
    }
    if !split.is_positive() || split >= &half {
        return Err(Error::InvalidArgument(format!("split {split} must lie in (0, 1/2)")));
    }
    let one = Scalar::one();
    let a = iv(zero.clone(), half.clone());
    let a2 = iv(one.clone(), Scalar::frac(3, 2));
    let b = iv(Scalar::int(2), Scalar::frac(5, 2));
    let b2 = iv(Scalar::int(3), Scalar::frac(7, 2));
    let phi = Equidecomposition::total(vec![PwIsometry::translation(&a, one.clone())]);
    let psi = Equidecomposition::total(vec![PwIsometry::translation(&b, one.clone())]);
    let removed = defect.half();
    let a2_kept = iv(one.clone(), Scalar::frac(3, 2) - &removed);
    let theta = Equidecomposition::partial(
        vec![
            PwIsometry::translation(&a2_kept, one),
            PwIsometry::translation(&iv(zero, split.clone()), Scalar::frac(7, 2) - split),
            PwIsometry::translation(&iv(split.clone(), half), Scalar::int(3) - split),
        ],
        defect.clone(),
    );
    CancellationInstance::new(a, a2, b, b2, phi, psi, theta)
}
