//! SVG rendering of a graph and an optional matching.
//!
//! Each edge piece is drawn as the segment `{(x, f(x))}` in the square spanned
//! by the coordinate range of `A ∪ B`. Matched parts are overdrawn in a second
//! colour, and uncovered vertex regions are ticked along the two axes (A along
//! the horizontal axis, B along the vertical one).

use std::fmt::Write;

use crate::graph::{uncovered, DefinableBipartiteGraph, Matching, Side};
use crate::pwiso::Piece;
use crate::region::Region;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#4c72b0", "#55a868", "#8172b2", "#ccb974", "#64b5cd", "#937860"];

struct Frame {
    lo: f64,
    span: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / self.span * SIZE
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN + SIZE - (v - self.lo) / self.span * SIZE
    }
}

fn frame(g: &DefinableBipartiteGraph) -> Frame {
    let all = g.vertices();
    match all.hull() {
        Some(h) => {
            let lo = h.lo.to_f64();
            let span = (h.hi.to_f64() - lo).max(f64::MIN_POSITIVE);
            Frame { lo, span }
        }
        None => Frame { lo: 0.0, span: 1.0 },
    }
}

fn segment(out: &mut String, fr: &Frame, class: &str, colour: &str, width: f64, p: &Piece) {
    let (x0, x1) = (&p.src.lo, &p.src.hi);
    let _ = writeln!(
        out,
        r#"  <line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{colour}" stroke-width="{width}"/>"#,
        fr.x(x0.to_f64()),
        fr.y(p.eval(x0).to_f64()),
        fr.x(x1.to_f64()),
        fr.y(p.eval(x1).to_f64()),
    );
}

fn ticks(out: &mut String, fr: &Frame, r: &Region, side: Side) {
    for iv in r.intervals() {
        let (a, b) = (iv.lo.to_f64(), iv.hi.to_f64());
        let _ = match side {
            Side::A => writeln!(
                out,
                r##"  <rect class="uncovered" x="{:.3}" y="{:.3}" width="{:.3}" height="6" fill="#c44e52"/>"##,
                fr.x(a),
                MARGIN + SIZE + 2.0,
                (fr.x(b) - fr.x(a)).max(0.5),
            ),
            Side::B => writeln!(
                out,
                r##"  <rect class="uncovered" x="{:.3}" y="{:.3}" width="6" height="{:.3}" fill="#c44e52"/>"##,
                MARGIN - 8.0,
                fr.y(b),
                (fr.y(a) - fr.y(b)).max(0.5),
            ),
        };
    }
}

/// Renders `g` and, when given, the matching `m` as an SVG 1.1 document.
pub fn render(g: &DefinableBipartiteGraph, m: Option<&Matching>) -> String {
    let fr = frame(g);
    let total = SIZE + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        out,
        r##"  <rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#999" stroke-width="1"/>"##
    );
    for (i, e) in g.edges().iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(out, "  <!-- edge {} -->", e.id);
        for p in e.map.pieces() {
            segment(&mut out, &fr, "edge", colour, 1.5, p);
        }
    }
    if let Some(m) = m {
        for (idx, r) in m.entries() {
            let part = g.edge(idx).map.restrict(r);
            for p in part.pieces() {
                segment(&mut out, &fr, "match", "#dd8452", 4.0, p);
            }
        }
        ticks(&mut out, &fr, &uncovered(g, m, Side::A), Side::A);
        ticks(&mut out, &fr, &uncovered(g, m, Side::B), Side::B);
    }
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{make_laczkovich, make_rot};
    use crate::scalar::Scalar;

    fn count(s: &str, class: &str) -> usize {
        s.matches(&format!(r#"class="{class}""#)).count()
    }

    #[test]
    fn one_line_per_piece() {
        let rot = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let s = render(&rot, None);
        assert_eq!(count(&s, "edge"), 3);
        assert_eq!(count(&s, "match"), 0);
        let lac = make_laczkovich(Scalar::sqrt2() - Scalar::one()).unwrap();
        let pieces: usize = lac.edges().iter().map(|e| e.map.pieces().len()).sum();
        assert_eq!(count(&render(&lac, None), "edge"), pieces);
    }

    #[test]
    fn empty_matching_has_no_highlights() {
        let rot = make_rot(Scalar::frac(1, 3)).unwrap();
        let s = render(&rot, Some(&Matching::new()));
        assert_eq!(count(&s, "match"), 0);
        assert_eq!(count(&s, "uncovered"), 2);
    }

    #[test]
    fn full_matching_highlights_and_no_ticks() {
        let rot = make_rot(Scalar::frac(1, 3)).unwrap();
        let s = render(&rot, Some(&Matching::full_edge(&rot, 0)));
        assert_eq!(count(&s, "match"), 1);
        assert_eq!(count(&s, "uncovered"), 0);
    }
}
