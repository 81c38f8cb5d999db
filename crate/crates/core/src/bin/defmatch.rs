use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use defmatch::cancellation::cancellation_witness_with;
use defmatch::flipper::{counting_check, epsilon_matching_with, improve_with, ImproveOptions};
use defmatch::gallery::{cancel_demo, cancel_demo_split, laczkovich_warning, make_laczkovich, make_rot};
use defmatch::graph::{uncovered_both, DefinableBipartiteGraph, Side};
use defmatch::io;
use defmatch::oracle::{bfs_no_short_augmenting, sample_validate};
use defmatch::{svg, Error, Matching, Region, Scalar};

#[derive(Parser)]
#[command(name = "defmatch", version, about = "Exact matchings in piecewise-isometric bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a graph file for structural violations.
    Validate { graph: PathBuf },
    /// Build a matching covering all but less than epsilon of the vertices.
    Match {
        graph: PathBuf,
        #[arg(long)]
        epsilon: Scalar,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Check every conflict colouring for properness (exact, slower).
        #[arg(long)]
        verify_coloring: bool,
    },
    /// Flip short augmenting paths of a given matching until their measure is below delta.
    Improve {
        graph: PathBuf,
        matching: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        delta: Scalar,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Lower the round cap below the computed bound.
        #[arg(long)]
        max_rounds: Option<u64>,
    },
    /// Check the layer-counting identity for a matching of a 2-regular graph.
    Counting {
        graph: PathBuf,
        matching: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Extract a witness that A and B are equidecomposable from a doubled instance.
    Cancel {
        instance: PathBuf,
        #[arg(long)]
        epsilon: Scalar,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write one of the built-in instances.
    Gallery {
        name: GalleryName,
        /// Rotation amount (rot), beta (laczkovich) or defect (cancel-demo).
        #[arg(long)]
        param: Option<Scalar>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a graph, and optionally a matching, as SVG.
    Render {
        graph: PathBuf,
        matching: Option<PathBuf>,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Validate a matching pointwise at random samples, and optionally search for short augmenting paths.
    Oracle {
        graph: PathBuf,
        matching: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "K")]
        k: Option<usize>,
        /// Region (or report with residual_starts) excluded from the path search.
        #[arg(long = "Z")]
        z: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GalleryName {
    Rot,
    Laczkovich,
    CancelDemo,
}

enum Failure {
    Usage(String),
    Domain(String),
    Bound(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::ScalarParse(_) | Error::Json(_) | Error::Io(_) | Error::NonPositiveEps => {
                Failure::Usage(e.to_string())
            }
            Error::IterationCapExceeded { .. } => Failure::Bound(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<DefinableBipartiteGraph, Failure> {
    io::parse_graph(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_matching(g: &DefinableBipartiteGraph, path: &Path) -> Result<Matching, Failure> {
    io::parse_matching(g, &read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: &Scalar) -> CmdResult {
    if v.is_positive() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn even_k(k: usize) -> CmdResult {
    if k >= 2 && k.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--K must be even and at least 2, got {k}")))
    }
}

fn emit_report(path: Option<&PathBuf>, mut body: Value, started: Instant) -> CmdResult {
    if let Some(p) = path {
        body["elapsed_ms"] = json!(started.elapsed().as_millis() as u64);
        write(p, &io::to_pretty(&body))?;
    }
    Ok(())
}

fn validate(graph: &Path) -> CmdResult {
    let g = load_graph(graph)?;
    let v = g.validate();
    println!("A: {}", g.degrees(Side::A));
    println!("B: {}", g.degrees(Side::B));
    if v.is_empty() {
        println!("valid");
        Ok(())
    } else {
        for x in &v {
            println!("violation: {x}");
        }
        Err(Failure::Domain(format!("{} violation(s)", v.len())))
    }
}

fn check_graph(g: &DefinableBipartiteGraph) -> CmdResult {
    let v = g.validate();
    if v.is_empty() {
        Ok(())
    } else {
        let text: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(Failure::Domain(format!("graph invalid: {}", text.join("; "))))
    }
}

fn run_match(
    graph: &Path,
    eps: &Scalar,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
    verify_coloring: bool,
) -> CmdResult {
    positive("epsilon", eps)?;
    let g = load_graph(graph)?;
    check_graph(&g)?;
    let started = Instant::now();
    let mut opts = ImproveOptions { verify_coloring, ..Default::default() };
    let (m, cov, trace) = epsilon_matching_with(&g, eps, &mut opts).map_err(|e| match e {
        Error::NotNearTwoRegular(_) => {
            Failure::Domain(format!("{e}\nA: {}\nB: {}", g.degrees(Side::A), g.degrees(Side::B)))
        }
        other => other.into(),
    })?;
    println!("K = {}, delta = {}", cov.k, cov.delta);
    println!("uncovered = {} (~{})", cov.uncovered, cov.uncovered.approx_string());
    println!("rounds = {}, epochs = {}", trace.total_rounds, trace.epochs.len());
    if let Some(p) = out {
        write(p, &io::matching_to_json(&g, &m))?;
    }
    let body = json!({
        "command": "match",
        "uncovered": io::exact(&cov.uncovered),
        "coverage": io::coverage_json(&cov),
        "trace": io::trace_json(&trace),
    });
    emit_report(report, body, started)
}

fn run_improve(
    graph: &Path,
    matching: &Path,
    k: usize,
    delta: &Scalar,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
    max_rounds: Option<u64>,
) -> CmdResult {
    even_k(k)?;
    positive("delta", delta)?;
    let g = load_graph(graph)?;
    check_graph(&g)?;
    let m = load_matching(&g, matching)?;
    let started = Instant::now();
    let mut opts = ImproveOptions { max_rounds, ..Default::default() };
    let (m2, trace) = improve_with(&g, &m, k, delta, &mut opts)?;
    let unc = uncovered_both(&g, &m2).measure();
    println!("residual nu = {} (~{})", trace.final_nu, trace.final_nu.approx_string());
    println!("uncovered = {} (~{})", unc, unc.approx_string());
    println!("rounds = {} (cap {})", trace.total_rounds, trace.cap);
    if let Some(p) = out {
        write(p, &io::matching_to_json(&g, &m2))?;
    }
    let body = json!({
        "command": "improve",
        "K": k,
        "delta": io::exact(delta),
        "uncovered": io::exact(&unc),
        "residual_starts": io::exact_region(&trace.residual_starts),
        "trace": io::trace_json(&trace),
    });
    emit_report(report, body, started)
}

fn run_counting(graph: &Path, matching: &Path, k: usize, report: Option<&PathBuf>) -> CmdResult {
    even_k(k)?;
    let g = load_graph(graph)?;
    let m = load_matching(&g, matching)?;
    let started = Instant::now();
    let r = counting_check(&g, &m, k)?;
    println!("uncovered = {}", r.uncovered);
    println!("Z = {:?}", r.residual_starts);
    for (i, l) in r.layers.iter().enumerate() {
        println!("layer {i}: {l} (~{})", l.approx_string());
    }
    println!("K * mu(Y0 \\ Z) = {}", r.lhs);
    println!("mu(Y_K)        = {}", r.rhs);
    println!("{}", if r.holds { "identity holds" } else { "identity FAILS" });
    let holds = r.holds;
    emit_report(report, json!({ "command": "counting", "counting": io::counting_json(&r) }), started)?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Domain("layer-counting identity does not hold".into()))
    }
}

fn run_cancel(instance: &Path, eps: &Scalar, out: Option<&PathBuf>, report: Option<&PathBuf>) -> CmdResult {
    positive("epsilon", eps)?;
    let inst = io::parse_instance(&read(instance)?).map_err(|e| match e {
        Error::InstanceInvalid(_) => Failure::Domain(e.to_string()),
        other => Failure::Usage(format!("{}: {other}", instance.display())),
    })?;
    let started = Instant::now();
    let r = cancellation_witness_with(&inst, eps, &mut ImproveOptions::default())?;
    println!("defect = {} (~{})", r.defect, r.defect.approx_string());
    println!("witness pieces = {}", r.witness.pieces().len());
    if let Some(p) = out {
        write(p, &io::witness_to_json(&r.witness, &r.defect))?;
    }
    emit_report(report, json!({ "command": "cancel", "cancellation": io::cancellation_json(&r) }), started)
}

fn run_gallery(name: GalleryName, param: Option<Scalar>, out: &Path) -> CmdResult {
    let default_irrational = Scalar::sqrt2() - Scalar::one();
    let text = match name {
        GalleryName::Rot => io::graph_to_json(&make_rot(param.unwrap_or(default_irrational))?),
        GalleryName::Laczkovich => {
            let beta = param.unwrap_or(default_irrational);
            if let Some(w) = laczkovich_warning(&beta) {
                eprintln!("warning: {w}");
            }
            io::graph_to_json(&make_laczkovich(beta)?)
        }
        GalleryName::CancelDemo => {
            let defect = param.unwrap_or_else(|| Scalar::frac(1, 40));
            io::instance_to_json(&cancel_demo(&defect, &cancel_demo_split())?)
        }
    };
    write(out, &text)
}

fn run_render(graph: &Path, matching: Option<&PathBuf>, svg_path: &Path) -> CmdResult {
    let g = load_graph(graph)?;
    let m = matching.map(|p| load_matching(&g, p)).transpose()?;
    write(svg_path, &svg::render(&g, m.as_ref()))
}

fn run_oracle(
    graph: &Path,
    matching: &Path,
    samples: usize,
    seed: u64,
    k: Option<usize>,
    z: Option<&PathBuf>,
) -> CmdResult {
    let g = load_graph(graph)?;
    let m = load_matching(&g, matching)?;
    let s = sample_validate(&g, &m, samples, seed);
    println!("samples = {}, skipped = {}, uncovered hits = {}", s.samples, s.skipped, s.uncovered_hits);
    for v in s.violations.iter().take(20) {
        println!("violation at {} ({:?}): {}", v.point, v.side, v.what);
    }
    let mut bad = s.violations.len();
    if let Some(k) = k {
        even_k(k)?;
        let zr = match z {
            Some(p) => io::parse_region_or_report(&read(p)?).map_err(|e| Failure::Usage(e.to_string()))?,
            None => Region::empty(),
        };
        let b = bfs_no_short_augmenting(&g, &m, k, &zr, samples, seed);
        println!("path search: tried {}, found {}", b.tried, b.found.len());
        for p in b.found.iter().take(5) {
            let pts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            println!("augmenting path: {}", pts.join(" -> "));
        }
        bad += b.found.len();
    }
    if bad == 0 {
        println!("clean");
        Ok(())
    } else {
        Err(Failure::Domain(format!("{bad} violation(s)")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Validate { graph } => validate(graph),
        Cmd::Match { graph, epsilon, out, report, verify_coloring } => {
            run_match(graph, epsilon, out.as_ref(), report.as_ref(), *verify_coloring)
        }
        Cmd::Improve { graph, matching, k, delta, out, report, max_rounds } => {
            run_improve(graph, matching, *k, delta, out.as_ref(), report.as_ref(), *max_rounds)
        }
        Cmd::Counting { graph, matching, k, report } => run_counting(graph, matching, *k, report.as_ref()),
        Cmd::Cancel { instance, epsilon, out, report } => run_cancel(instance, epsilon, out.as_ref(), report.as_ref()),
        Cmd::Gallery { name, param, out } => run_gallery(*name, param.clone(), out),
        Cmd::Render { graph, matching, svg } => run_render(graph, matching.as_ref(), svg),
        Cmd::Oracle { graph, matching, samples, seed, k, z } => {
            run_oracle(graph, matching, *samples, *seed, *k, z.as_ref())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Bound(msg)) => {
            eprintln!("bound violated: {msg}");
            ExitCode::from(3)
        }
    }
}
