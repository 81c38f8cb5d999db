use proptest::prelude::*;

use defmatch::gallery::{cancel_demo, make_laczkovich, make_rot};
use defmatch::graph::{DefinableBipartiteGraph, Edge};
use defmatch::{io, Interval, Matching, Piece, PwIsometry, Region, Scalar, Slope};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-200i64..200, 1i64..60, -40i64..40, 1i64..30).prop_map(|(a, b, c, d)| Scalar::quad(a, b, c, d))
}

fn region() -> impl Strategy<Value = Region> {
    prop::collection::vec((scalar(), scalar()), 0..6).prop_map(|pairs| {
        Region::from_intervals(pairs.into_iter().filter(|(a, b)| a != b).map(|(a, b)| {
            if a < b {
                Interval::new(a, b)
            } else {
                Interval::new(b, a)
            }
        }))
    })
}

fn piece() -> impl Strategy<Value = Piece> {
    (scalar(), scalar(), any::<bool>(), scalar()).prop_filter_map("nonempty", |(a, b, pos, off)| {
        if a == b {
            return None;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Some(Piece::new(lo, hi, if pos { Slope::Pos } else { Slope::Neg }, off))
    })
}

proptest! {
    #[test]
    fn scalar_text_round_trip(s in scalar()) {
        let back: Scalar = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn scalar_order_matches_floats(a in scalar(), b in scalar()) {
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            prop_assert_eq!(a < b, x < y);
        }
        prop_assert_eq!(a.cmp(&b), (&a - &b).signum());
    }

    #[test]
    fn graph_file_round_trip(a in region(), b in region(), ps in prop::collection::vec(piece(), 0..4)) {
        let g = DefinableBipartiteGraph::new(a, b, vec![Edge { id: "e".into(), map: PwIsometry::new(ps) }]);
        let text = io::graph_to_json(&g);
        prop_assert_eq!(io::parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn matching_file_round_trip(r in region()) {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let m = Matching::from_entries([(0, r.intersect(g.a()))]);
        prop_assert_eq!(io::parse_matching(&g, &io::matching_to_json(&g, &m)).unwrap(), m);
    }

    #[test]
    fn region_measure_identities(x in region(), y in region()) {
        prop_assert_eq!(&x.subtract(&y).measure() + &x.intersect(&y).measure(), x.measure());
        prop_assert_eq!(x.symmetric_difference(&y), x.union(&y).subtract(&x.intersect(&y)));
    }
}

#[test]
fn gallery_files_round_trip() {
    let b = Scalar::sqrt2() - Scalar::one();
    for g in [make_rot(b.clone()).unwrap(), make_laczkovich(b).unwrap(), make_rot(Scalar::frac(2, 7)).unwrap()] {
        let text = io::graph_to_json(&g);
        let back = io::parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(io::graph_to_json(&back), text);
    }
    let inst = cancel_demo(&Scalar::frac(1, 40), &Scalar::frac(1, 5)).unwrap();
    let text = io::instance_to_json(&inst);
    assert_eq!(io::parse_instance(&text).unwrap(), inst);
    assert_eq!(io::instance_file(&inst).field, "Q");
}

#[test]
fn located_errors_name_the_edge_and_piece() {
    let text = r#"{"field":"Q","A":[["0","1"]],"B":[["2","3"]],"edges":[
        {"id":"good","pieces":[{"src":["0","1"],"slope":1,"offset":"2"}]},
        {"id":"bad","pieces":[{"src":["0","1/2"],"slope":1,"offset":"2"},{"src":["1/2","1"],"slope":1,"offset":"x"}]}]}"#;
    let err = io::parse_graph(text).unwrap_err().to_string();
    assert!(err.contains("\"bad\"") && err.contains("piece 1"), "{err}");
    let rt2 = r#"{"field":"Q","A":[["0","rt2"]],"B":[],"edges":[]}"#;
    assert!(io::parse_graph(rt2).unwrap_err().to_string().contains("A[0]"));
}
