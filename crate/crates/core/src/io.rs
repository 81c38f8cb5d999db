//! JSON file formats for graphs, matchings, cancellation instances and reports.
//!
//! All exact values are strings in the scalar text form (`"3/4"`,
//! `"1/2+1/4*rt2"`), so nothing passes through floating point.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cancellation::{CancellationInstance, CancellationResult, Equidecomposition};
use crate::flipper::{CountingReport, CoverageReport, FlipTrace};
use crate::oracle::{BfsReport, SampleReport};
use crate::error::{Error, Result};
use crate::graph::{DefinableBipartiteGraph, Edge, Matching};
use crate::pwiso::{Piece, PwIsometry, Slope};
use crate::region::{Interval, Region};
use crate::scalar::Scalar;

pub type PairFile = (String, String);

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PieceFile {
    pub src: PairFile,
    pub slope: i64,
    pub offset: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeFile {
    pub id: String,
    pub pieces: Vec<PieceFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphFile {
    pub field: String,
    #[serde(rename = "A")]
    pub a: Vec<PairFile>,
    #[serde(rename = "B")]
    pub b: Vec<PairFile>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntryFile {
    pub edge: String,
    pub region: Vec<PairFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatchingFile {
    pub entries: Vec<EntryFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WitnessFile {
    pub defect: String,
    pub pieces: Vec<Vec<PieceFile>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub field: String,
    #[serde(rename = "A")]
    pub a: Vec<PairFile>,
    #[serde(rename = "A2")]
    pub a2: Vec<PairFile>,
    #[serde(rename = "B")]
    pub b: Vec<PairFile>,
    #[serde(rename = "B2")]
    pub b2: Vec<PairFile>,
    pub phi: WitnessFile,
    pub psi: WitnessFile,
    pub theta: WitnessFile,
}

/// Scalar parsing that enforces the declared field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Rational,
    QuadraticRt2,
}

impl Field {
    fn parse(tag: &str) -> Result<Field> {
        match tag {
            "Q" => Ok(Field::Rational),
            "Q_rt2" => Ok(Field::QuadraticRt2),
            other => Err(Error::Parse(format!("unknown field tag {other:?} (expected \"Q\" or \"Q_rt2\")"))),
        }
    }

    fn scalar(self, s: &str, at: &str) -> Result<Scalar> {
        let v: Scalar = s.parse().map_err(|_| Error::Parse(format!("{at}: malformed scalar {s:?}")))?;
        if self == Field::Rational && !v.is_rational() {
            return Err(Error::Parse(format!("{at}: {s:?} is irrational but the field is Q")));
        }
        Ok(v)
    }

    fn region(self, pairs: &[PairFile], at: &str) -> Result<Region> {
        let mut ivs = Vec::with_capacity(pairs.len());
        for (i, (lo, hi)) in pairs.iter().enumerate() {
            let where_ = format!("{at}[{i}]");
            let lo = self.scalar(lo, &where_)?;
            let hi = self.scalar(hi, &where_)?;
            if lo >= hi {
                return Err(Error::Parse(format!("{where_}: empty interval [{lo}, {hi})")));
            }
            ivs.push(Interval::new(lo, hi));
        }
        Ok(Region::from_intervals(ivs))
    }

    fn map(self, pieces: &[PieceFile], at: &str) -> Result<PwIsometry> {
        let mut out = Vec::with_capacity(pieces.len());
        for (i, p) in pieces.iter().enumerate() {
            let where_ = format!("{at} piece {i}");
            let lo = self.scalar(&p.src.0, &where_)?;
            let hi = self.scalar(&p.src.1, &where_)?;
            if lo >= hi {
                return Err(Error::Parse(format!("{where_}: empty source [{lo}, {hi})")));
            }
            let slope = Slope::from_sign(p.slope)
                .ok_or_else(|| Error::Parse(format!("{where_}: slope must be 1 or -1, got {}", p.slope)))?;
            let offset = self.scalar(&p.offset, &where_)?;
            out.push(Piece::new(lo, hi, slope, offset));
        }
        Ok(PwIsometry::new(out))
    }
}

fn pair(iv: &Interval) -> PairFile {
    (iv.lo.to_string(), iv.hi.to_string())
}

pub fn region_file(r: &Region) -> Vec<PairFile> {
    r.intervals().iter().map(pair).collect()
}

pub fn pieces_file(f: &PwIsometry) -> Vec<PieceFile> {
    f.pieces()
        .iter()
        .map(|p| PieceFile { src: pair(&p.src), slope: p.slope.sign(), offset: p.offset.to_string() })
        .collect()
}

fn field_tag<'a, I: IntoIterator<Item = &'a Scalar>>(values: I) -> &'static str {
    if values.into_iter().all(Scalar::is_rational) {
        "Q"
    } else {
        "Q_rt2"
    }
}

fn region_scalars(r: &Region) -> impl Iterator<Item = &Scalar> {
    r.intervals().iter().flat_map(|iv| [&iv.lo, &iv.hi])
}

fn map_scalars(f: &PwIsometry) -> impl Iterator<Item = &Scalar> {
    f.pieces().iter().flat_map(|p| [&p.src.lo, &p.src.hi, &p.offset])
}

pub fn graph_file(g: &DefinableBipartiteGraph) -> GraphFile {
    let scalars = region_scalars(g.a()).chain(region_scalars(g.b())).chain(g.edges().iter().flat_map(|e| map_scalars(&e.map)));
    GraphFile {
        field: field_tag(scalars).to_string(),
        a: region_file(g.a()),
        b: region_file(g.b()),
        edges: g.edges().iter().map(|e| EdgeFile { id: e.id.clone(), pieces: pieces_file(&e.map) }).collect(),
    }
}

pub fn graph_from_file(f: &GraphFile) -> Result<DefinableBipartiteGraph> {
    let field = Field::parse(&f.field)?;
    let a = field.region(&f.a, "A")?;
    let b = field.region(&f.b, "B")?;
    let mut edges = Vec::with_capacity(f.edges.len());
    for e in &f.edges {
        let map = field.map(&e.pieces, &format!("edge {:?}", e.id))?;
        edges.push(Edge { id: e.id.clone(), map });
    }
    Ok(DefinableBipartiteGraph::new(a, b, edges))
}

pub fn graph_to_json(g: &DefinableBipartiteGraph) -> String {
    to_pretty(&graph_file(g))
}

pub fn parse_graph(text: &str) -> Result<DefinableBipartiteGraph> {
    let f: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph file: {e}")))?;
    graph_from_file(&f)
}

pub fn matching_file(g: &DefinableBipartiteGraph, m: &Matching) -> MatchingFile {
    MatchingFile {
        entries: m.entries().map(|(e, r)| EntryFile { edge: g.edge(e).id.clone(), region: region_file(r) }).collect(),
    }
}

pub fn matching_to_json(g: &DefinableBipartiteGraph, m: &Matching) -> String {
    to_pretty(&matching_file(g, m))
}

pub fn parse_matching(g: &DefinableBipartiteGraph, text: &str) -> Result<Matching> {
    let f: MatchingFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matching file: {e}")))?;
    let mut m = Matching::new();
    for (i, entry) in f.entries.iter().enumerate() {
        let e = g
            .edge_index(&entry.edge)
            .ok_or_else(|| Error::Parse(format!("entry {i}: unknown edge id {:?}", entry.edge)))?;
        let r = Field::QuadraticRt2.region(&entry.region, &format!("entry {i} region"))?;
        m.add(e, &r);
    }
    Ok(m)
}

pub fn parse_region(text: &str) -> Result<Region> {
    let pairs: Vec<PairFile> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("region: {e}")))?;
    Field::QuadraticRt2.region(&pairs, "region")
}

/// A region given directly as a pair list, or as the `residual_starts` of a report.
pub fn parse_region_or_report(text: &str) -> Result<Region> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("region file: {e}")))?;
    let list = match &v {
        Value::Array(_) => v.clone(),
        Value::Object(_) => ["/residual_starts", "/coverage/residual_starts", "/trace/residual_starts"]
            .iter()
            .find_map(|ptr| v.pointer(ptr).cloned())
            .ok_or_else(|| Error::Parse("report has no residual_starts".into()))?,
        _ => return Err(Error::Parse("expected a region list or a report".into())),
    };
    let pairs: Vec<PairFile> = serde_json::from_value(list).map_err(|e| Error::Parse(format!("region: {e}")))?;
    Field::QuadraticRt2.region(&pairs, "region")
}

fn witness_file(w: &Equidecomposition) -> WitnessFile {
    WitnessFile { defect: w.defect.to_string(), pieces: w.pieces.iter().map(pieces_file).collect() }
}

fn witness_from_file(field: Field, f: &WitnessFile, at: &str) -> Result<Equidecomposition> {
    let defect = field.scalar(&f.defect, &format!("{at} defect"))?;
    let pieces = f
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| field.map(p, &format!("{at} part {i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Equidecomposition::partial(pieces, defect))
}

pub fn instance_file(inst: &CancellationInstance) -> InstanceFile {
    let mut scalars: Vec<&Scalar> = Vec::new();
    for r in [&inst.a, &inst.a2, &inst.b, &inst.b2] {
        scalars.extend(region_scalars(r));
    }
    for w in [&inst.phi, &inst.psi, &inst.theta] {
        scalars.push(&w.defect);
        for p in &w.pieces {
            scalars.extend(map_scalars(p));
        }
    }
    InstanceFile {
        field: field_tag(scalars).to_string(),
        a: region_file(&inst.a),
        a2: region_file(&inst.a2),
        b: region_file(&inst.b),
        b2: region_file(&inst.b2),
        phi: witness_file(&inst.phi),
        psi: witness_file(&inst.psi),
        theta: witness_file(&inst.theta),
    }
}

pub fn instance_to_json(inst: &CancellationInstance) -> String {
    to_pretty(&instance_file(inst))
}

pub fn parse_instance(text: &str) -> Result<CancellationInstance> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance file: {e}")))?;
    let field = Field::parse(&f.field)?;
    CancellationInstance::new(
        field.region(&f.a, "A")?,
        field.region(&f.a2, "A2")?,
        field.region(&f.b, "B")?,
        field.region(&f.b2, "B2")?,
        witness_from_file(field, &f.phi, "phi")?,
        witness_from_file(field, &f.psi, "psi")?,
        witness_from_file(field, &f.theta, "theta")?,
    )
}

/// The output of a cancellation run: a single map plus its defect.
pub fn witness_to_json(witness: &PwIsometry, defect: &Scalar) -> String {
    to_pretty(&json!({ "defect": exact(defect), "pieces": pieces_file(witness) }))
}

pub fn parse_witness(text: &str) -> Result<(PwIsometry, Scalar)> {
    #[derive(Deserialize)]
    struct Exact {
        exact: String,
    }
    #[derive(Deserialize)]
    struct W {
        defect: Exact,
        pieces: Vec<PieceFile>,
    }
    let w: W = serde_json::from_str(text).map_err(|e| Error::Parse(format!("witness file: {e}")))?;
    let defect = Field::QuadraticRt2.scalar(&w.defect.exact, "defect")?;
    Ok((Field::QuadraticRt2.map(&w.pieces, "witness")?, defect))
}

/// An exact value with its labelled decimal approximation.
pub fn exact(s: &Scalar) -> Value {
    json!({ "exact": s.to_string(), "approx": s.approx_string() })
}

pub fn exact_region(r: &Region) -> Value {
    json!(region_file(r))
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn trace_json(t: &FlipTrace) -> Value {
    json!({
        "total_rounds": t.total_rounds,
        "cap": t.cap.to_string(),
        "flip_budget": t.flip_budget.to_string(),
        "final_nu": exact(&t.final_nu),
        "residual_starts": exact_region(&t.residual_starts),
        "epochs": t.epochs.iter().map(|e| json!({
            "types": e.types,
            "nu": exact(&e.nu),
            "conflict_maps": e.conflict_maps,
            "colors": e.colors,
            "lost": exact(&e.lost),
            "proper": e.proper,
            "flipped": exact(&e.flipped),
        })).collect::<Vec<_>>(),
        "rounds": t.rounds.iter().map(|r| json!({
            "k": r.k,
            "color": r.color,
            "flipped": exact(&r.flipped),
            "remaining": exact(&r.remaining),
            "intervals": r.intervals,
        })).collect::<Vec<_>>(),
    })
}

pub fn coverage_json(r: &CoverageReport) -> Value {
    json!({
        "epsilon": exact(&r.eps),
        "K": r.k,
        "delta": exact(&r.delta),
        "degree_one_mass": exact(&r.defect),
        "uncovered": exact(&r.uncovered),
        "uncovered_A": exact(&r.uncovered_a),
        "uncovered_B": exact(&r.uncovered_b),
        "residual_nu": exact(&r.residual_nu),
        "residual_starts": exact_region(&r.residual_starts),
        "layers": r.layers.iter().map(exact).collect::<Vec<_>>(),
    })
}

pub fn counting_json(r: &CountingReport) -> Value {
    json!({
        "K": r.k,
        "uncovered": exact(&r.uncovered),
        "residual_starts": exact_region(&r.residual_starts),
        "base": exact(&r.base),
        "layers": r.layers.iter().map(exact).collect::<Vec<_>>(),
        "lhs": exact(&r.lhs),
        "rhs": exact(&r.rhs),
        "holds": r.holds,
    })
}

pub fn cancellation_json(r: &CancellationResult) -> Value {
    json!({
        "defect": exact(&r.defect),
        "missing_A": exact(&r.missing_a),
        "missing_B": exact(&r.missing_b),
        "h_edges": r.h.edges().iter().map(|e| e.id.clone()).collect::<Vec<_>>(),
        "dropped": exact(&r.pruned.dropped.measure()),
        "forced": exact(&r.pruned.forced.covered_measure()),
        "coverage": coverage_json(&r.report),
        "trace": trace_json(&r.trace),
    })
}

pub fn sample_json(r: &SampleReport) -> Value {
    json!({
        "seed": r.seed,
        "samples": r.samples,
        "skipped": r.skipped,
        "uncovered_hits": r.uncovered_hits,
        "violations": r.violations.iter().map(|v| json!({
            "point": exact(&v.point),
            "side": format!("{:?}", v.side),
            "what": v.what,
        })).collect::<Vec<_>>(),
    })
}

pub fn bfs_json(r: &BfsReport) -> Value {
    json!({
        "seed": r.seed,
        "K": r.k,
        "tried": r.tried,
        "found": r.found.iter().map(|p| p.iter().map(exact).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{cancel_demo, cancel_demo_split, make_laczkovich, make_rot};

    #[test]
    fn graph_round_trip() {
        for g in [make_rot(Scalar::sqrt2() - Scalar::one()).unwrap(), make_laczkovich(Scalar::sqrt2() - Scalar::one()).unwrap()] {
            let text = graph_to_json(&g);
            assert_eq!(parse_graph(&text).unwrap(), g);
        }
        let g = make_rot(Scalar::frac(1, 3)).unwrap();
        assert_eq!(graph_file(&g).field, "Q");
    }

    #[test]
    fn rejects_bad_scalars_and_fields() {
        let bad = r#"{"field":"Q","A":[["0","1//2"]],"B":[],"edges":[]}"#;
        assert!(matches!(parse_graph(bad), Err(Error::Parse(_))));
        let irr = r#"{"field":"Q","A":[["0","rt2"]],"B":[],"edges":[]}"#;
        assert!(matches!(parse_graph(irr), Err(Error::Parse(_))));
        let tag = r#"{"field":"R","A":[],"B":[],"edges":[]}"#;
        assert!(matches!(parse_graph(tag), Err(Error::Parse(_))));
        let slope = r#"{"field":"Q","A":[["0","1"]],"B":[["2","3"]],"edges":[{"id":"e","pieces":[{"src":["0","1"],"slope":2,"offset":"2"}]}]}"#;
        assert!(matches!(parse_graph(slope), Err(Error::Parse(_))));
    }

    #[test]
    fn matching_round_trip() {
        let g = make_rot(Scalar::sqrt2() - Scalar::one()).unwrap();
        let m = Matching::from_entries([(1, Region::interval(Scalar::zero(), Scalar::sqrt2().half()))]);
        assert_eq!(parse_matching(&g, &matching_to_json(&g, &m)).unwrap(), m);
        assert!(parse_matching(&g, r#"{"entries":[{"edge":"zz","region":[]}]}"#).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let inst = cancel_demo(&Scalar::frac(1, 40), &cancel_demo_split()).unwrap();
        assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn region_or_report() {
        let r = Region::interval(Scalar::frac(1, 3), Scalar::frac(1, 2));
        let text = serde_json::to_string(&region_file(&r)).unwrap();
        assert_eq!(parse_region_or_report(&text).unwrap(), r);
        let rep = json!({ "residual_starts": region_file(&r) }).to_string();
        assert_eq!(parse_region_or_report(&rep).unwrap(), r);
    }

    #[test]
    fn witness_round_trip() {
        let f = PwIsometry::translation(&Region::interval(Scalar::zero(), Scalar::one()), Scalar::sqrt2());
        let (g, d) = parse_witness(&witness_to_json(&f, &Scalar::frac(1, 7))).unwrap();
        assert_eq!(g, f);
        assert_eq!(d, Scalar::frac(1, 7));
    }
}
