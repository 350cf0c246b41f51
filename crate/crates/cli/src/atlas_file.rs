//! The JSON atlas format. Every number is an exact rational string `"p/q"`;
//! cascade endpoints are prefix expressions in `n` and `m`.

use std::fmt;
use std::path::Path;

use nhatlas::atlas::{validate_system, Chart, Transition, ValidationReport};
use nhatlas::ratcore::{
    AccDecl, Arity, Cascade, CascadeSpec, Declared, Expr, Ext, Interval, LimitPoint, Orientation, Progression, Tier,
};
use nhatlas::{Rat, RatPiece, Scalar, System};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasFile {
    pub version: u32,
    pub charts: Vec<ChartRec>,
    pub transitions: Vec<TransitionRec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartRec {
    pub id: usize,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRec {
    pub from: usize,
    pub to: usize,
    pub pieces: Vec<PieceRec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cascades: Vec<CascadeRec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceRec {
    pub dom: [String; 2],
    pub slope: String,
    pub offset: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CascadeRec {
    pub arity: u8,
    /// `[n]` or `[n, m]`.
    pub start: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterRec>,
    pub dom_lo: String,
    pub dom_hi: String,
    pub img_lo: String,
    pub img_hi: String,
    pub orientation: String,
    pub tier: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_acc: Option<DeclaredRec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterRec {
    pub modulus: u64,
    pub residue: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredRec {
    pub horizon: u64,
    pub tolerance: String,
    pub pairs: Vec<AccRec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccRec {
    pub dom: Vec<LimitRec>,
    pub img: Vec<LimitRec>,
}

/// A fixed point `"p/q"` or the family `expr(n)`, `n ≥ start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimitRec {
    Fixed(String),
    Family { family: String, start: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlasFileError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("parse error at {location}: {msg}")]
    Parse { location: String, msg: String },
    #[error("validation error: {}", summary(.0))]
    Validation(ValidationReport),
}

fn summary(r: &ValidationReport) -> String {
    r.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect::<Vec<_>>().join("; ")
}

fn perr(location: impl fmt::Display, msg: impl fmt::Display) -> AtlasFileError {
    AtlasFileError::Parse { location: location.to_string(), msg: msg.to_string() }
}

fn orientation_name(o: Orientation) -> &'static str {
    match o {
        Orientation::Preserve => "preserve",
        Orientation::Reverse => "reverse",
    }
}

fn limit_rec(p: &LimitPoint<Rat>) -> LimitRec {
    match p {
        LimitPoint::Fixed(e) => LimitRec::Fixed(e.fmt_exact()),
        LimitPoint::Family { expr, start } => LimitRec::Family { family: expr.to_string(), start: *start },
    }
}

fn cascade_rec(c: &Cascade<Rat>) -> CascadeRec {
    let sp = c.spec();
    let start = match sp.arity {
        Arity::One => vec![sp.start.0],
        Arity::Two => vec![sp.start.0, sp.start.1],
    };
    let (tier, declared_acc) = match &sp.tier {
        Tier::Analytic => ("analytic", None),
        Tier::Declared(d) => (
            "declared",
            Some(DeclaredRec {
                horizon: d.horizon,
                tolerance: d.tolerance.fmt_exact(),
                pairs: d
                    .acc
                    .iter()
                    .map(|a| AccRec { dom: a.dom.iter().map(limit_rec).collect(), img: a.img.iter().map(limit_rec).collect() })
                    .collect(),
            }),
        ),
    };
    CascadeRec {
        arity: if sp.arity == Arity::One { 1 } else { 2 },
        start,
        filter: sp.filter.map(|p| FilterRec { modulus: p.modulus, residue: p.residue }),
        dom_lo: sp.dom.0.to_string(),
        dom_hi: sp.dom.1.to_string(),
        img_lo: sp.img.0.to_string(),
        img_hi: sp.img.1.to_string(),
        orientation: orientation_name(sp.orientation).into(),
        tier: tier.into(),
        declared_acc,
    }
}

impl AtlasFile {
    pub fn from_system(s: &System) -> Self {
        AtlasFile {
            version: VERSION,
            charts: s
                .charts()
                .iter()
                .map(|c| ChartRec { id: c.id, lo: c.extent.lo.fmt_exact(), hi: c.extent.hi.fmt_exact() })
                .collect(),
            transitions: s
                .transitions()
                .map(|t| TransitionRec {
                    from: t.from,
                    to: t.to,
                    pieces: t
                        .pieces
                        .iter()
                        .map(|p| PieceRec {
                            dom: [p.dom.lo.fmt_exact(), p.dom.hi.fmt_exact()],
                            slope: p.slope.fmt_exact(),
                            offset: p.offset.fmt_exact(),
                        })
                        .collect(),
                    cascades: t.cascades.iter().map(cascade_rec).collect(),
                })
                .collect(),
        }
    }

    /// Builds the system without validating it.
    pub fn to_system(&self) -> Result<System, AtlasFileError> {
        if self.version != VERSION {
            return Err(perr("version", format!("unsupported version {}", self.version)));
        }
        let mut charts = Vec::new();
        for (i, c) in self.charts.iter().enumerate() {
            let at = format!("charts[{i}]");
            let extent = interval(&c.lo, &c.hi, &at)?;
            charts.push(Chart { id: c.id, extent });
        }
        let mut s = System::new(charts).map_err(|e| perr("charts", e))?;
        for (i, t) in self.transitions.iter().enumerate() {
            let at = format!("transitions[{i}]");
            let mut pieces = Vec::new();
            for (j, p) in t.pieces.iter().enumerate() {
                let at = format!("{at}.pieces[{j}]");
                let dom = interval(&p.dom[0], &p.dom[1], &format!("{at}.dom"))?;
                let slope = rational(&p.slope, &format!("{at}.slope"))?;
                if slope == Rat::from_int(0) {
                    return Err(perr(format!("{at}.slope"), "zero slope"));
                }
                let offset = rational(&p.offset, &format!("{at}.offset"))?;
                pieces.push(RatPiece::new(dom, slope, offset).ok_or_else(|| perr(&at, "degenerate piece"))?);
            }
            let mut cascades = Vec::new();
            for (j, c) in t.cascades.iter().enumerate() {
                cascades.push(cascade(c, &format!("{at}.cascades[{j}]"))?);
            }
            s.insert(Transition::new(t.from, t.to, pieces, cascades)).map_err(|e| perr(&at, e))?;
        }
        Ok(s)
    }
}

fn rational(v: &str, at: &str) -> Result<Rat, AtlasFileError> {
    Rat::parse_exact(v).ok_or_else(|| perr(at, format!("not an exact rational: {v:?}")))
}

fn ext(v: &str, at: &str) -> Result<Ext<Rat>, AtlasFileError> {
    Ext::parse_exact(v).ok_or_else(|| perr(at, format!("not an exact rational or ±inf: {v:?}")))
}

fn interval(lo: &str, hi: &str, at: &str) -> Result<Interval<Rat>, AtlasFileError> {
    let (l, h) = (ext(lo, &format!("{at}.lo"))?, ext(hi, &format!("{at}.hi"))?);
    Interval::new(l, h).ok_or_else(|| perr(at, format!("empty interval ({lo}, {hi})")))
}

fn expr(v: &str, at: &str) -> Result<Expr<Rat>, AtlasFileError> {
    v.parse().map_err(|e| perr(at, e))
}

fn limit_point(p: &LimitRec, at: &str) -> Result<LimitPoint<Rat>, AtlasFileError> {
    Ok(match p {
        LimitRec::Fixed(v) => LimitPoint::Fixed(ext(v, at)?),
        LimitRec::Family { family, start } => LimitPoint::Family { expr: expr(family, &format!("{at}.family"))?, start: *start },
    })
}

fn cascade(c: &CascadeRec, at: &str) -> Result<Cascade<Rat>, AtlasFileError> {
    let arity = match c.arity {
        1 => Arity::One,
        2 => Arity::Two,
        k => return Err(perr(format!("{at}.arity"), format!("arity must be 1 or 2, got {k}"))),
    };
    let start = match (arity, c.start.as_slice()) {
        (Arity::One, [n]) => (*n, 0),
        (Arity::Two, [n, m]) => (*n, *m),
        _ => return Err(perr(format!("{at}.start"), "start needs one index per variable")),
    };
    if let Some(f) = &c.filter {
        if f.modulus == 0 {
            return Err(perr(format!("{at}.filter.modulus"), "modulus must be positive"));
        }
    }
    let orientation = match c.orientation.as_str() {
        "preserve" => Orientation::Preserve,
        "reverse" => Orientation::Reverse,
        o => return Err(perr(format!("{at}.orientation"), format!("expected preserve or reverse, got {o:?}"))),
    };
    let tier = match (c.tier.as_str(), &c.declared_acc) {
        ("analytic", None) => Tier::Analytic,
        ("analytic", Some(_)) => return Err(perr(format!("{at}.declaredAcc"), "analytic cascades declare nothing")),
        ("declared", Some(d)) => {
            let mut acc = Vec::new();
            for (k, a) in d.pairs.iter().enumerate() {
                let at = format!("{at}.declaredAcc.pairs[{k}]");
                let dom = a.dom.iter().enumerate().map(|(i, p)| limit_point(p, &format!("{at}.dom[{i}]"))).collect::<Result<_, _>>()?;
                let img = a.img.iter().enumerate().map(|(i, p)| limit_point(p, &format!("{at}.img[{i}]"))).collect::<Result<_, _>>()?;
                acc.push(AccDecl { dom, img });
            }
            let tolerance = rational(&d.tolerance, &format!("{at}.declaredAcc.tolerance"))?;
            Tier::Declared(Declared { acc, horizon: d.horizon, tolerance })
        }
        ("declared", None) => return Err(perr(format!("{at}.declaredAcc"), "declared cascades need declaredAcc")),
        (t, _) => return Err(perr(format!("{at}.tier"), format!("expected analytic or declared, got {t:?}"))),
    };
    let spec = CascadeSpec {
        arity,
        start,
        filter: c.filter.as_ref().map(|f| Progression { modulus: f.modulus, residue: f.residue }),
        dom: (expr(&c.dom_lo, &format!("{at}.domLo"))?, expr(&c.dom_hi, &format!("{at}.domHi"))?),
        img: (expr(&c.img_lo, &format!("{at}.imgLo"))?, expr(&c.img_hi, &format!("{at}.imgHi"))?),
        orientation,
        tier,
    };
    Cascade::new(spec).map_err(|e| perr(at, e))
}

/// The canonical text of a system: pretty JSON with a trailing newline.
pub fn export_atlas(s: &System) -> String {
    let mut out = serde_json::to_string_pretty(&AtlasFile::from_system(s)).expect("atlas serializes");
    out.push('\n');
    out
}

/// Parse and validate atlas text.
pub fn parse_atlas_str(text: &str) -> Result<System, AtlasFileError> {
    let file: AtlasFile = serde_json::from_str(text)
        .map_err(|e| perr(format!("line {}, column {}", e.line(), e.column()), strip_position(&e.to_string())))?;
    let s = file.to_system()?;
    let report = validate_system(&s);
    if !report.ok() {
        return Err(AtlasFileError::Validation(report));
    }
    Ok(s)
}

pub fn parse_atlas(path: &Path) -> Result<System, AtlasFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AtlasFileError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_atlas_str(&text)
}

/// serde_json appends " at line L column C"; the location is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
