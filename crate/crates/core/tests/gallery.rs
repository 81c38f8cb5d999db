use defmatch::cancellation::{build_h, prune, H_EDGE_IDS};
use defmatch::gallery::{cancel_demo, cancel_demo_split, laczkovich_warning, make_laczkovich, make_rot};
use defmatch::graph::Side;
use defmatch::{Region, Scalar};

fn beta() -> Scalar {
    Scalar::sqrt2() - Scalar::one()
}

fn q(p: i64, d: i64) -> Scalar {
    Scalar::frac(p, d)
}

/// Pointwise degree of a vertex, counting edges by direct evaluation.
fn degree_at(g: &defmatch::DefinableBipartiteGraph, v: &Scalar, side: Side) -> usize {
    g.edges()
        .iter()
        .filter(|e| match side {
            Side::A => e.map.eval(v).is_some_and(|y| g.b().contains(&y)),
            Side::B => e.map.eval_inverse(v).is_some_and(|x| g.a().contains(&x)),
        })
        .count()
}

#[test]
fn rot_has_two_total_bijections() {
    let g = make_rot(beta()).unwrap();
    assert!(g.validate().is_empty());
    assert!(g.is_two_regular());
    for e in g.edges() {
        assert_eq!(e.map.domain(), *g.a());
        assert_eq!(e.map.image_region(), *g.b());
    }
    assert!(make_rot(Scalar::zero()).is_err());
    assert!(make_rot(Scalar::one()).is_err());
}

#[test]
fn laczkovich_is_two_regular_pointwise() {
    let g = make_laczkovich(beta()).unwrap();
    assert!(g.validate().is_empty());
    assert!(g.is_two_regular());
    assert_eq!(g.a().measure(), q(1, 2));
    assert_eq!(g.b().measure(), q(1, 2));
    for i in 0..200 {
        let x = Scalar::quad(2 * i + 1, 800, 0, 1);
        assert_eq!(degree_at(&g, &x, Side::A), 2, "A vertex {x}");
        let y = &Scalar::int(2) + &x;
        assert_eq!(degree_at(&g, &y, Side::B), 2, "B vertex {y}");
    }
}

#[test]
fn laczkovich_is_symmetric_in_beta() {
    let b = beta();
    let other = Scalar::one() - b.clone();
    assert_eq!(make_laczkovich(b).unwrap(), make_laczkovich(other).unwrap());
}

fn unit_mod(t: Scalar) -> Scalar {
    let one = Scalar::one();
    let mut t = t;
    while t.is_negative() {
        t += &one;
    }
    while t >= one {
        t -= &one;
    }
    t
}

#[test]
fn laczkovich_neighbours_follow_the_reflections() {
    // A-vertex x owns the edge points x and 1 − x; the B-class of an edge point p is
    // {p, beta − p} (mod 1), represented in [beta/2, beta/2 + 1/2) and placed at
    // 2 + rep − beta/2.
    let b = beta();
    let g = make_laczkovich(b.clone()).unwrap();
    let hb = b.half();
    let window_hi = &hb + &q(1, 2);
    let place = |p: Scalar| {
        let p = unit_mod(p);
        let alt = unit_mod(&b - &p);
        let r = if p >= hb && p < window_hi { p } else { alt };
        assert!(r >= hb && r < window_hi);
        &(&Scalar::int(2) + &r) - &hb
    };
    for i in 1..50 {
        let x = Scalar::quad(i, 100, 0, 1);
        let mut want = vec![place(x.clone()), place(&Scalar::one() - &x)];
        want.sort();
        let mut got: Vec<Scalar> = g.edges().iter().filter_map(|e| e.map.eval(&x)).collect();
        got.sort();
        assert_eq!(got, want, "x = {x}");
    }
}

#[test]
fn warning_only_for_rational_beta() {
    assert!(laczkovich_warning(&q(1, 3)).is_some());
    assert!(laczkovich_warning(&beta()).is_none());
}

#[test]
fn cancel_demo_structure() {
    let inst = cancel_demo(&Scalar::zero(), &cancel_demo_split()).unwrap();
    assert_eq!(inst.a, Region::interval(Scalar::zero(), q(1, 2)));
    assert!(inst.violations().is_empty());
    let h = build_h(&inst).unwrap();
    assert!(h.edges().iter().all(|e| H_EDGE_IDS.contains(&e.id.as_str())));
    assert!(h.is_two_regular());
    let pruned = prune(&h);
    assert!(pruned.dropped.is_empty());
    assert!(pruned.forced.is_empty());
}

#[test]
fn cancel_demo_defect_leaves_degree_one_mass() {
    let d = q(1, 40);
    let inst = cancel_demo(&d, &cancel_demo_split()).unwrap();
    let h = build_h(&inst).unwrap();
    let deg1 = &h.degrees(Side::A).region_of_degree(1).measure() + &h.degrees(Side::B).region_of_degree(1).measure();
    assert_eq!(deg1, d);
    assert!(h.degrees(Side::A).max_degree() <= 2 && h.degrees(Side::B).max_degree() <= 2);
    assert!(cancel_demo(&q(1, 2), &cancel_demo_split()).is_err());
    assert!(cancel_demo(&Scalar::zero(), &q(1, 2)).is_err());
}
