//! Command-line front end. [`run`] takes the argument vector and returns the
//! exit code with everything that would be printed, so tests can drive it
//! without a process.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nhatlas::atlas::{validate_system, QOpenSet};
use nhatlas::catalog::{self, CatalogEntry, CatalogError, EDescriptor, FiniteTree, GeoFamily, RackFloor};
use nhatlas::nhcalc::{
    bumpeq_classes, maximality_certificate, nh_graph, nh_of, separation, separation_oracle, simplicity_at,
    sorted_check, Classification, MaximalityError, Necessary, NhFamily, OracleResult, Verdict,
};
use nhatlas::ratcore::{Ext, Interval, OpenIntervalSet};
use nhatlas::{Point, Rat, Scalar, System};
use nhatlas_flow::{
    accumulation_estimate, h_map_check, nh_predict, planar_demo, w_intersection_sample, AccEstimate, AccParams,
    AccShape, Coverage, Demo, DemoPoint, Recipe, SampledVerdict, WOutcome, WSpec,
};
use serde_json::{json, Value};

use crate::atlas_file::{export_atlas, parse_atlas, AtlasFileError};
use crate::render::{to_dot, to_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// Unknown verdicts and answers that lean on declared data.
pub const EXIT_TIER2: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "nhatlas", version, about = "Exact queries on non-Hausdorff 1-manifolds given by adjunction atlases")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Parse and validate an atlas file.
    Validate { file: PathBuf },
    /// Decide whether two points can be separated.
    Sep {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Cross-check against brute-force neighborhoods at radii 2^-1 .. 2^-R.
        #[arg(long, value_name = "R")]
        oracle_depth: Option<u32>,
    },
    /// Describe NH(p).
    Nh {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Members listed per family.
        #[arg(long, default_value_t = 4)]
        members: u64,
    },
    /// Non-separation graph on a point list.
    Graph {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        points: String,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Bump-equivalence classes of a point list.
    Classes {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Maximality certificate for a chart image.
    Maximality {
        file: PathBuf,
        #[arg(long)]
        chart: usize,
    },
    /// Check that NH sets of sample points in one chart are disjoint.
    Sorted {
        file: PathBuf,
        #[arg(long)]
        chart: usize,
        #[arg(long, allow_hyphen_values = true)]
        sample: String,
        #[arg(long, default_value_t = 32)]
        members: u64,
    },
    /// Local component count of an open set at a point of its closure.
    Simplicity {
        file: PathBuf,
        /// `CH:LO..HI` intervals, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Write a catalog system as an atlas file.
    Catalog {
        name: String,
        #[arg(allow_hyphen_values = true)]
        params: Option<String>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Numerical experiments with flow-built spaces.
    Flow {
        #[command(subcommand)]
        cmd: FlowCmd,
    },
    /// Draw the atlas as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// Points whose non-separated pairs are drawn as arcs.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
    },
}

#[derive(Debug, Args)]
struct FlowOpts {
    #[arg(long, env = "NHATLAS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// Write the sample cloud here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum FlowCmd {
    /// Estimate the accumulation set A(x, σ).
    Acc {
        #[arg(long)]
        recipe: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        opts: FlowOpts,
    },
    /// The slice of NH(<x, t, σ>) on floor τ.
    Predict {
        #[arg(long)]
        recipe: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[command(flatten)]
        opts: FlowOpts,
    },
    /// Search for a common point of two W sets.
    Wsect {
        #[arg(long)]
        recipe: String,
        /// `x=..,r=..,t=..,eps=..,sigma=a:b`
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[command(flatten)]
        opts: FlowOpts,
    },
    /// Check the floor-shifting homeomorphism on random points.
    Hcheck {
        #[arg(long)]
        recipe: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        #[command(flatten)]
        opts: FlowOpts,
    },
    /// Sampled separation in the planar demos.
    Demo {
        /// `sphere` or `prufer`
        #[arg(long)]
        name: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        c: f64,
        /// `0*` or `CH:x,y`
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Fail {
    Usage(String),
    Io(String),
    Parse(String),
    Validation(String, Vec<Value>),
    Failed(String, String),
}

impl Fail {
    fn record(&self) -> (i32, Value, String) {
        match self {
            Fail::Usage(m) => (EXIT_USAGE, json!({"error": "UsageError", "message": m}), m.clone()),
            Fail::Io(m) => (EXIT_ERROR, json!({"error": "IoError", "message": m}), m.clone()),
            Fail::Parse(m) => (EXIT_ERROR, json!({"error": "ParseError", "message": m}), m.clone()),
            Fail::Validation(m, v) => {
                (EXIT_ERROR, json!({"error": "ValidationError", "message": m, "violations": v}), m.clone())
            }
            Fail::Failed(kind, m) => (EXIT_ERROR, json!({"error": kind, "message": m}), m.clone()),
        }
    }
}

impl From<AtlasFileError> for Fail {
    fn from(e: AtlasFileError) -> Self {
        match &e {
            AtlasFileError::Io { .. } => Fail::Io(e.to_string()),
            AtlasFileError::Parse { .. } => Fail::Parse(e.to_string()),
            AtlasFileError::Validation(r) => Fail::Validation(
                e.to_string(),
                r.violations.iter().map(|v| json!({"kind": v.kind.to_string(), "detail": v.detail})).collect(),
            ),
        }
    }
}

fn failed(kind: &str) -> impl Fn(String) -> Fail + '_ {
    move |m| Fail::Failed(kind.to_string(), m)
}

/// A successful record: JSON for stdout, text for stderr, and whether it is
/// a tier-2 answer.
struct Done {
    record: Value,
    human: String,
    tier2: bool,
    raw: Option<String>,
}

impl Done {
    fn new(record: Value, human: impl Into<String>) -> Self {
        Done { record, human: human.into(), tier2: false, raw: None }
    }

    fn tier2(mut self, t: bool) -> Self {
        self.tier2 = t;
        self
    }
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Output { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Output {
                    code: EXIT_USAGE,
                    stdout: format!("{}\n", json!({"error": "UsageError", "message": text.trim()})),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok(d) => {
            let stdout = d.raw.unwrap_or_else(|| format!("{}\n", d.record));
            let code = if d.tier2 { EXIT_TIER2 } else { EXIT_OK };
            Output { code, stdout, stderr: with_newline(d.human) }
        }
        Err(f) => {
            let (code, rec, msg) = f.record();
            Output { code, stdout: format!("{rec}\n"), stderr: format!("error: {msg}\n") }
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.is_empty() && !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn dispatch(cmd: Cmd) -> Result<Done, Fail> {
    match cmd {
        Cmd::Validate { file } => validate(&file),
        Cmd::Sep { file, p, q, oracle_depth } => sep(&parse_atlas(&file)?, &p, &q, oracle_depth),
        Cmd::Nh { file, p, members } => nh(&parse_atlas(&file)?, &p, members),
        Cmd::Graph { file, points, dot } => graph(&parse_atlas(&file)?, &points, dot.as_deref()),
        Cmd::Classes { file, points } => classes(&parse_atlas(&file)?, &points),
        Cmd::Maximality { file, chart } => maximality(&parse_atlas(&file)?, chart),
        Cmd::Sorted { file, chart, sample, members } => sorted(&parse_atlas(&file)?, chart, &sample, members),
        Cmd::Simplicity { file, set, p } => simplicity(&parse_atlas(&file)?, &set, &p),
        Cmd::Catalog { name, params, output } => catalog_cmd(&name, params.as_deref(), output.as_deref()),
        Cmd::Flow { cmd } => flow(cmd),
        Cmd::Render { file, svg, points } => render(&parse_atlas(&file)?, &svg, points.as_deref()),
    }
}

// ---- argument parsing ----

pub fn parse_point(s: &str) -> Result<Point, String> {
    let (c, x) = s.split_once(':').ok_or_else(|| format!("point {s:?}: expected CHART:COORD"))?;
    let chart = c.trim().parse::<usize>().map_err(|_| format!("point {s:?}: bad chart id"))?;
    let coord = Rat::parse_exact(x).ok_or_else(|| format!("point {s:?}: bad rational coordinate"))?;
    Ok(Point::new(chart, coord))
}

pub fn parse_points(s: &str) -> Result<Vec<Point>, String> {
    items(s)?.into_iter().map(parse_point).collect()
}

pub fn parse_rats(s: &str) -> Result<Vec<Rat>, String> {
    items(s)?.into_iter().map(|v| Rat::parse_exact(v).ok_or_else(|| format!("bad rational {v:?}"))).collect()
}

/// Comma-separated items. Blank input is an empty list; a blank item is an error.
fn items(s: &str) -> Result<Vec<&str>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    if v.iter().any(|x| x.is_empty()) {
        return Err(format!("empty item in list {s:?}"));
    }
    Ok(v)
}

/// `CH:LO..HI,...` as an open set; endpoints may be `-inf` or `+inf`.
pub fn parse_set(s: &str) -> Result<QOpenSet<Rat>, String> {
    let mut by_chart: BTreeMap<usize, Vec<Interval<Rat>>> = BTreeMap::new();
    for it in items(s)? {
        let (c, rest) = it.split_once(':').ok_or_else(|| format!("interval {it:?}: expected CH:LO..HI"))?;
        let chart = c.trim().parse::<usize>().map_err(|_| format!("interval {it:?}: bad chart id"))?;
        let (lo, hi) = rest.split_once("..").ok_or_else(|| format!("interval {it:?}: expected LO..HI"))?;
        let end = |v: &str| Ext::<Rat>::parse_exact(v.trim()).ok_or_else(|| format!("interval {it:?}: bad endpoint {v:?}"));
        let iv = Interval::new(end(lo)?, end(hi)?).ok_or_else(|| format!("interval {it:?}: empty"))?;
        by_chart.entry(chart).or_default().push(iv);
    }
    if by_chart.is_empty() {
        return Err("empty set".into());
    }
    let mut u = QOpenSet::empty();
    for (c, ivs) in by_chart {
        u.sets.insert(c, OpenIntervalSet::from_intervals(ivs));
    }
    Ok(u)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    items(s)?.into_iter().map(|v| v.parse::<f64>().map_err(|_| format!("bad number {v:?}"))).collect()
}

fn parse_sigma(s: &str) -> Result<Vec<i64>, String> {
    s.split([',', ':'])
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<i64>().map_err(|_| format!("bad floor coefficient {v:?}")))
        .collect()
}

/// `x=..,r=..,t=..,eps=..,sigma=a:b`; `x` may list several coordinates
/// separated by `:`.
pub fn parse_wspec(s: &str) -> Result<WSpec<f64>, String> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for part in items(s)? {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("{part:?}: expected key=value"))?;
        if kv.insert(k.trim(), v.trim()).is_some() {
            return Err(format!("duplicate key {k:?}"));
        }
    }
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| format!("missing {k}="));
    let num = |k: &str| get(k)?.parse::<f64>().map_err(|_| format!("bad number for {k}="));
    for k in kv.keys() {
        if !["x", "r", "t", "eps", "sigma"].contains(k) {
            return Err(format!("unknown key {k:?}"));
        }
    }
    let center = get("x")?
        .split(':')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad coordinate {v:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WSpec { center, radius: num("r")?, t: num("t")?, eps: num("eps")?, sigma: parse_sigma(get("sigma")?)? })
}

fn parse_demo_point(s: &str) -> Result<DemoPoint<f64>, String> {
    if s.trim() == "0*" {
        return Ok(DemoPoint::ZeroStar);
    }
    let (c, xy) = s.split_once(':').ok_or_else(|| format!("demo point {s:?}: expected 0* or CH:x,y"))?;
    let chart = c.trim().parse::<u8>().map_err(|_| format!("demo point {s:?}: bad chart"))?;
    match parse_floats(xy)?.as_slice() {
        [x, y] => Ok(DemoPoint::at(chart, *x, *y)),
        _ => Err(format!("demo point {s:?}: expected two coordinates")),
    }
}

fn usage<T>(r: Result<T, String>) -> Result<T, Fail> {
    r.map_err(Fail::Usage)
}

// ---- exact commands ----

fn validate(file: &Path) -> Result<Done, Fail> {
    let s = parse_atlas(file)?;
    let report = validate_system(&s);
    let transitions = s.transitions().count();
    let cascades: usize = s.transitions().map(|t| t.cascades.len()).sum();
    let pieces: usize = s.transitions().map(|t| t.pieces.len()).sum();
    let human = format!(
        "{}: {} charts, {} transitions, {} pieces, {} cascades{}",
        file.display(),
        s.charts().len(),
        transitions,
        pieces,
        cascades,
        if report.unverified.is_empty() { String::new() } else { format!("; unverified: {}", report.unverified.join("; ")) }
    );
    let rec = json!({
        "command": "validate",
        "ok": true,
        "charts": s.charts().len(),
        "transitions": transitions,
        "pieces": pieces,
        "cascades": cascades,
        "unverified": report.unverified,
    });
    Ok(Done::new(rec, human).tier2(!report.unverified.is_empty()))
}

fn atlas_fail(e: impl std::fmt::Display) -> Fail {
    Fail::Failed("QueryError".into(), e.to_string())
}

fn sep(s: &System, p: &str, q: &str, depth: Option<u32>) -> Result<Done, Fail> {
    let (p, q) = (usage(parse_point(p))?, usage(parse_point(q))?);
    let r = separation(s, &p, &q).map_err(atlas_fail)?;
    let mut rec = json!({
        "command": "sep",
        "p": p.to_string(),
        "q": q.to_string(),
        "verdict": r.kind().to_string(),
        "tier2": r.tier2,
    });
    let mut human = format!("{p} vs {q}: {}", r.kind());
    match &r.verdict {
        Verdict::Separated { eps_star } => {
            rec["epsStar"] = json!(eps_star.fmt_exact());
            human += &format!(" (epsStar {})", eps_star.fmt_exact());
        }
        Verdict::NotSeparated(w) => {
            let (a, b) = w.points();
            rec["witness"] = json!({"at": a.to_string(), "limit": b.to_string(), "text": w.to_string()});
            human += &format!("\n  witness: {w}");
        }
        Verdict::Unknown { depth } => {
            rec["depth"] = json!(depth);
        }
        Verdict::Equal => {}
    }
    let unknown = matches!(r.verdict, Verdict::Unknown { .. });
    if unknown || r.tier2 {
        let flag = if unknown { "unknown" } else { "confirmed" };
        rec["flag"] = json!(flag);
        human += &format!("\n  declared data: {flag}");
    }
    if let Some(d) = depth {
        let o = separation_oracle(s, &p, &q, &r.verdict, d).map_err(atlas_fail)?;
        let (label, detail) = match &o {
            OracleResult::Consistent => ("consistent", None),
            OracleResult::Inconsistent(m) => ("inconsistent", Some(m.clone())),
            OracleResult::Inconclusive => ("inconclusive", None),
        };
        rec["oracle"] = json!({"depth": d, "result": label, "detail": detail});
        human += &format!("\n  oracle at depth {d}: {label}");
        if let OracleResult::Inconsistent(m) = o {
            return Err(Fail::Failed("OracleMismatch".into(), format!("{p} vs {q}: {m}")));
        }
    }
    Ok(Done::new(rec, human).tier2(unknown || r.tier2))
}

fn family_json(f: &NhFamily<Rat>, k: u64) -> Value {
    json!({
        "chart": f.chart,
        "expr": f.expr.to_string(),
        "start": f.start,
        "filter": f.filter.map(|p| json!({"modulus": p.modulus, "residue": p.residue})),
        "first": f.members(k).iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "limit": f.limit.as_ref().map(|l| l.to_string()),
        "limitIncluded": f.limit_included,
        "declared": f.declared,
    })
}

fn nh(s: &System, p: &str, k: u64) -> Result<Done, Fail> {
    let p = usage(parse_point(p))?;
    let d = nh_of(s, &p).map_err(atlas_fail)?;
    let rec = json!({
        "command": "nh",
        "point": d.point.to_string(),
        "isolated": d.isolated.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "families": d.families.iter().map(|f| family_json(f, k)).collect::<Vec<_>>(),
        "tier2": d.tier2,
    });
    Ok(Done::new(rec, d.to_string()).tier2(d.tier2))
}

fn graph(s: &System, points: &str, dot: Option<&Path>) -> Result<Done, Fail> {
    let pts = usage(parse_points(points))?;
    let g = nh_graph(s, &pts).map_err(atlas_fail)?;
    let text = to_dot(&g);
    let edges = g.edges();
    let mut rec = json!({
        "command": "graph",
        "points": g.points.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "edges": edges,
        "tier2": g.tier2,
    });
    match dot {
        Some(path) => {
            write_file(path, &text)?;
            rec["dot"] = json!(path.display().to_string());
        }
        None => rec["dotText"] = json!(text),
    }
    let human = format!("{} points, {} non-separated pairs", g.points.len(), edges.len());
    Ok(Done::new(rec, human).tier2(g.tier2))
}

fn classes(s: &System, points: &str) -> Result<Done, Fail> {
    let pts = usage(parse_points(points))?;
    let g = nh_graph(s, &pts).map_err(atlas_fail)?;
    let cl = bumpeq_classes(&g);
    let named: Vec<Vec<String>> = cl.iter().map(|c| c.iter().map(|&i| g.points[i].to_string()).collect()).collect();
    let human = named.iter().map(|c| format!("{{{}}}", c.join(", "))).collect::<Vec<_>>().join(" ");
    let rec = json!({"command": "classes", "classes": cl, "named": named, "tier2": g.tier2});
    Ok(Done::new(rec, human).tier2(g.tier2))
}

fn maximality(s: &System, chart: usize) -> Result<Done, Fail> {
    let c = maximality_certificate(s, chart).map_err(|e| match e {
        MaximalityError::CascadeTransition(..) => failed("Unsupported")(e.to_string()),
        other => atlas_fail(other),
    })?;
    let nec = match c.h_maximal_necessary {
        Necessary::Met => "met",
        Necessary::Failed => "failed",
    };
    let strs = |v: &[Point]| v.iter().map(|m| m.to_string()).collect::<Vec<_>>();
    let rec = json!({
        "command": "maximality",
        "chart": chart,
        "chMaximal": c.ch_maximal,
        "hMaximalNecessary": nec,
        "hausdorff": c.hausdorff,
        "components": c.components,
        "nh": strs(&c.nh),
        "boundary": strs(&c.boundary),
    });
    let human = format!(
        "chart {chart}: Ch-maximal {}, H-maximal necessary condition {nec}\n  NH(U) = {{{}}}\n  cl(U) - U = {{{}}}",
        c.ch_maximal,
        strs(&c.nh).join(", "),
        strs(&c.boundary).join(", ")
    );
    Ok(Done::new(rec, human))
}

fn sorted(s: &System, chart: usize, sample: &str, k: u64) -> Result<Done, Fail> {
    let pts: Vec<Point> = usage(parse_rats(sample))?.into_iter().map(|x| Point::new(chart, x)).collect();
    let v = sorted_check(s, &pts, k).map_err(atlas_fail)?;
    let viol: Vec<Value> =
        v.iter().map(|w| json!({"x": w.x.to_string(), "y": w.y.to_string(), "common": w.common.to_string()})).collect();
    let human = if v.is_empty() {
        format!("{} points: NH sets pairwise disjoint", pts.len())
    } else {
        v.iter().map(|w| format!("{} and {} share {}", w.x, w.y, w.common)).collect::<Vec<_>>().join("\n")
    };
    let rec = json!({"command": "sorted", "chart": chart, "ok": v.is_empty(), "violations": viol});
    Ok(Done::new(rec, human))
}

fn simplicity(s: &System, set: &str, p: &str) -> Result<Done, Fail> {
    let u = usage(parse_set(set))?;
    let p = usage(parse_point(p))?;
    let r = simplicity_at(s, &u, &p).map_err(|e| failed("QueryError")(e.to_string()))?;
    let class = match r.classification {
        Classification::Simple(n) => format!("Simple({n})"),
        Classification::NotFSimple => "NotFSimple".to_string(),
    };
    let counts: Vec<Value> = r.counts.iter().map(|(e, n)| json!([e.fmt_exact(), n])).collect();
    let rec = json!({
        "command": "simplicity",
        "point": r.point.to_string(),
        "classification": class,
        "stabilizationEps": r.stabilization_eps.as_ref().map(|e| e.fmt_exact()),
        "counts": counts,
    });
    Ok(Done::new(rec, format!("{}: {class}", r.point)))
}

fn catalog_entry(name: &str, params: Option<&str>) -> Result<CatalogEntry<Rat>, Fail> {
    let bad = |m: String| Fail::Usage(format!("{name} parameters: {m}"));
    let built = match (name, params) {
        (_, None) => catalog::by_name::<Rat>(name),
        ("psi_like", Some(k)) => catalog::make_psi_like(k.trim().parse().map_err(|_| bad(format!("bad k {k:?}")))?),
        ("tree", Some(spec)) => {
            let (kind, n) = spec.split_once(':').unwrap_or(("binary", spec));
            let n: u32 = n.trim().parse().map_err(|_| bad(format!("bad size {n:?}")))?;
            let t = match kind {
                "binary" => FiniteTree::complete_binary(n),
                "path" => FiniteTree::path(n as usize),
                _ => return Err(bad(format!("unknown tree kind {kind:?}"))),
            };
            catalog::make_tree(&t)
        }
        ("we", Some(v)) => catalog::make_we(&parse_rats(v).map_err(bad)?),
        ("fat_s1", Some(v)) => catalog::make_fat_s1(&parse_rats(v).map_err(bad)?),
        ("towel_rack", Some(v)) => catalog::make_towel_rack(&parse_rack(v).map_err(bad)?),
        ("cascade_e", Some(v)) => catalog::make_cascade_e(&parse_e(v).map_err(bad)?),
        (_, Some(_)) if catalog::NAMES.contains(&name) => return Err(bad("this entry takes no parameters".into())),
        _ => catalog::by_name::<Rat>(name),
    };
    built.map_err(|e| match e {
        CatalogError::UnknownEntry(n) => {
            Fail::Usage(format!("unknown catalog entry {n:?}; known: {}", catalog::NAMES.join(", ")))
        }
        other => Fail::Failed("CatalogError".into(), other.to_string()),
    })
}

/// `F:a,b|c;G:d`: floors separated by `;`, sets on a floor by `|`.
fn parse_rack(s: &str) -> Result<Vec<RackFloor<Rat>>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(|f| {
            let (n, sets) = f.split_once(':').ok_or_else(|| format!("floor {f:?}: expected F:set|set"))?;
            let floor = n.trim().parse::<u32>().map_err(|_| format!("floor {f:?}: bad floor number"))?;
            let sets = sets.split('|').map(parse_rats).collect::<Result<Vec<_>, _>>()?;
            Ok(RackFloor { floor, sets })
        })
        .collect()
}

/// `pts=a,b;geo=base:scale:ratio,...`
fn parse_e(s: &str) -> Result<EDescriptor<Rat>, String> {
    let mut e = EDescriptor { points: vec![], families: vec![] };
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("{part:?}: expected pts=.. or geo=.."))?;
        match k.trim() {
            "pts" => e.points.extend(parse_rats(v)?),
            "geo" => {
                for g in items(v)? {
                    let r: Vec<Rat> = g
                        .split(':')
                        .map(|x| Rat::parse_exact(x).ok_or_else(|| format!("bad rational {x:?}")))
                        .collect::<Result<_, _>>()?;
                    let [base, scale, ratio] = <[Rat; 3]>::try_from(r).map_err(|_| format!("family {g:?}: expected base:scale:ratio"))?;
                    e.families.push(GeoFamily { base, scale, ratio });
                }
            }
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    Ok(e)
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::Io(format!("cannot write {}: {e}", path.display())))
}

fn catalog_cmd(name: &str, params: Option<&str>, output: Option<&Path>) -> Result<Done, Fail> {
    let e = catalog_entry(name, params)?;
    let text = export_atlas(&e.system);
    let human = format!("{}: {} charts, {} expectations", e.name, e.system.charts().len(), e.expectations.len());
    match output {
        None => Ok(Done { record: Value::Null, human, tier2: false, raw: Some(text) }),
        Some(path) => {
            write_file(path, &text)?;
            let rec = json!({
                "command": "catalog",
                "name": e.name,
                "params": e.params,
                "charts": e.chart_names.iter().map(|(id, n)| json!({"id": id, "name": n})).collect::<Vec<_>>(),
                "output": path.display().to_string(),
            });
            Ok(Done::new(rec, human))
        }
    }
}

fn render(s: &System, svg: &Path, points: Option<&str>) -> Result<Done, Fail> {
    let arcs = match points {
        None => vec![],
        Some(list) => {
            let pts = usage(parse_points(list))?;
            let g = nh_graph(s, &pts).map_err(atlas_fail)?;
            g.edges().into_iter().map(|(a, b)| (g.points[a].clone(), g.points[b].clone())).collect()
        }
    };
    write_file(svg, &to_svg(s, &arcs))?;
    let rec = json!({"command": "render", "svg": svg.display().to_string(), "arcs": arcs.len()});
    Ok(Done::new(rec, format!("wrote {}", svg.display())))
}

// ---- flow commands ----

fn recipe(name: &str) -> Result<Recipe<f64>, Fail> {
    Recipe::named(name).map_err(|e| Fail::Usage(format!("recipe {name:?}: {e}")))
}

fn flow_fail(e: nhatlas_flow::FlowError) -> Fail {
    Fail::Failed("FlowError".into(), e.to_string())
}

fn coverage_json(c: &Coverage<f64>) -> Value {
    json!({"lo": c.lo, "hi": c.hi, "bins": c.bins, "occupied": c.occupied, "total": c.total, "fraction": c.fraction()})
}

fn estimate_json(e: &AccEstimate<f64>) -> Value {
    let mut v = json!({
        "shape": e.shape.label(),
        "radius": e.radius,
        "hull": [e.hull.0, e.hull.1],
        "coverage": coverage_json(&e.coverage),
        "window": e.window.as_ref().map(coverage_json),
        "samples": e.params.samples,
    });
    if let AccShape::Interval { lo, hi } | AccShape::UnboundedWindowCoverage { lo, hi } = e.shape {
        v["lo"] = json!(lo);
        v["hi"] = json!(hi);
    }
    v
}

fn shape_text(e: &AccEstimate<f64>) -> String {
    match e.shape {
        AccShape::Interval { lo, hi } => format!("interval [{lo:.6}, {hi:.6}]"),
        AccShape::UnboundedWindowCoverage { lo, hi } => format!("unbounded, window [{lo}, {hi}] covered"),
        _ => e.shape.label().to_string(),
    }
}

/// One row per sample: branch sign, k, t and the coordinates.
fn write_cloud(path: &Path, e: &AccEstimate<f64>) -> Result<(), Fail> {
    let cloud = e.cloud.as_ref().expect("cloud kept");
    let io = |err: csv::Error| Fail::Io(format!("cannot write {}: {err}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["branch".to_string(), "k".into(), "t".into()];
    header.extend((0..e.x.len()).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(io)?;
    let k_max = e.params.samples;
    for (i, y) in cloud.iter().enumerate() {
        let (sign, k) = if i < k_max { (1.0, i + 1) } else { (-1.0, i + 1 - k_max) };
        let mut row = vec![if sign > 0.0 { "+" } else { "-" }.to_string(), k.to_string(), (sign * e.params.gamma / k as f64).to_string()];
        row.extend(y.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|err| Fail::Io(format!("cannot write {}: {err}", path.display())))
}

fn acc_params(opts: &FlowOpts, bins: Option<usize>) -> AccParams<f64> {
    let mut p = AccParams::with_samples(opts.samples.unwrap_or(100_000));
    p.bins = bins;
    p.keep_cloud = opts.csv.is_some();
    p
}

fn flow(cmd: FlowCmd) -> Result<Done, Fail> {
    match cmd {
        FlowCmd::Acc { recipe: name, x, sigma, bins, opts } => {
            let r = recipe(&name)?;
            let (x, sigma) = (usage(parse_floats(&x))?, usage(parse_sigma(&sigma))?);
            let e = accumulation_estimate(&r, &x, &sigma, &acc_params(&opts, bins)).map_err(flow_fail)?;
            if let Some(p) = &opts.csv {
                write_cloud(p, &e)?;
            }
            let mut rec = estimate_json(&e);
            rec["command"] = json!("flow acc");
            rec["recipe"] = json!(r.name);
            rec["x"] = json!(x);
            rec["sigma"] = json!(sigma);
            Ok(Done::new(rec, format!("A({x:?}, {sigma:?}) for {}: {}", r.name, shape_text(&e))))
        }
        FlowCmd::Predict { recipe: name, x, t, sigma, tau, opts } => {
            let r = recipe(&name)?;
            let x = usage(parse_floats(&x))?;
            let (sigma, tau) = (usage(parse_sigma(&sigma))?, usage(parse_sigma(&tau))?);
            let pr = nh_predict(&r, &x, t, &sigma, &tau, &acc_params(&opts, None)).map_err(flow_fail)?;
            let mut rec = json!({
                "command": "flow predict",
                "recipe": r.name,
                "floor": pr.floor,
                "t": pr.t,
                "diff": pr.diff,
            });
            let human = match &pr.estimate {
                None => {
                    rec["shape"] = json!("empty");
                    format!("slice on floor {tau:?}: empty")
                }
                Some(e) => {
                    if let Some(p) = &opts.csv {
                        write_cloud(p, e)?;
                    }
                    rec["estimate"] = estimate_json(e);
                    rec["shape"] = json!(e.shape.label());
                    format!("slice on floor {tau:?} at t = {t}: {}", shape_text(e))
                }
            };
            Ok(Done::new(rec, human))
        }
        FlowCmd::Wsect { recipe: name, a, b, budget, opts } => {
            let r = recipe(&name)?;
            let (a, b) = (usage(parse_wspec(&a))?, usage(parse_wspec(&b))?);
            let out = w_intersection_sample(&r, &a, &b, budget, opts.seed).map_err(flow_fail)?;
            let (rec, human) = match &out {
                WOutcome::Witness { point, residuals, tries } => (
                    json!({
                        "command": "flow wsect",
                        "found": true,
                        "point": {"x": point.x, "t": point.t, "floor": point.floor},
                        "residuals": residuals,
                        "tries": tries,
                        "seed": opts.seed,
                    }),
                    format!("witness x = {:?}, t = {}, floor {:?} after {tries} tries", point.x, point.t, point.floor),
                ),
                WOutcome::Empty { exhausted, tries } => (
                    json!({"command": "flow wsect", "found": false, "exhausted": exhausted, "tries": tries, "seed": opts.seed}),
                    if *exhausted { format!("no witness in {tries} tries") } else { "disjoint".to_string() },
                ),
            };
            Ok(Done::new(rec, human))
        }
        FlowCmd::Hcheck { recipe: name, t, sigma, opts } => {
            let r = recipe(&name)?;
            let sigma = usage(parse_sigma(&sigma))?;
            let n = opts.samples.unwrap_or(10_000);
            let h = h_map_check(&r, t, &sigma, n, opts.seed).map_err(flow_fail)?;
            let ok = h.ok(1e-9);
            let rec = json!({
                "command": "flow hcheck",
                "recipe": r.name,
                "samples": h.samples,
                "roundtripMax": h.roundtrip_max,
                "wRecoveryMax": h.w_recovery_max,
                "floorsOk": h.floors_ok,
                "identityExact": h.identity_exact,
                "ok": ok,
                "seed": opts.seed,
            });
            if !ok {
                return Err(Fail::Failed("CheckFailed".into(), format!("h check failed: {rec}")));
            }
            Ok(Done::new(rec, format!("h round trip ok on {n} samples (max error {:.3e})", h.roundtrip_max)))
        }
        FlowCmd::Demo { name, c, p, q } => {
            let demo = match name.as_str() {
                "sphere" | "sphereBoundary" => Demo::SphereBoundary,
                "prufer" => Demo::Prufer { c },
                other => return Err(Fail::Usage(format!("unknown demo {other:?}; expected sphere or prufer"))),
            };
            let (a, b) = (usage(parse_demo_point(&p))?, usage(parse_demo_point(&q))?);
            let v = planar_demo(&demo, a, b)
                .ok_or_else(|| Fail::Usage(format!("{a} or {b} is not a point of the {} demo", demo.name())))?;
            let mut rec = json!({"command": "flow demo", "demo": demo.name(), "p": a.to_string(), "q": b.to_string(), "verdict": v.label()});
            match v {
                SampledVerdict::Separated { radius } => rec["radius"] = json!(radius),
                SampledVerdict::NotSeparated { down_to } => rec["downTo"] = json!(down_to),
                SampledVerdict::Equal => {}
            }
            Ok(Done::new(rec, format!("{a} vs {b}: {}", v.label())))
        }
    }
}
