//! Worked examples as ready-made systems, each carrying the facts it should satisfy.

mod cascades;
mod finite;

use std::fmt;

use thiserror::Error;

pub use cascades::{make_cascade_e, make_mutual_sequences, make_nh_ordinal, make_psi_like, EDescriptor, GeoFamily};
pub use finite::{
    make_branching, make_doubly_branching, make_fat_s1, make_towel_rack, make_tree, make_two_origins, make_we,
    FiniteTree, RackFloor,
};

use crate::atlas::{AdjunctionSystem, AtlasError, Chart, MfdPoint};
use crate::nhcalc::{bumpeq_classes, nh_graph, nh_of, separation, sorted_check, VerdictKind};
use crate::ratcore::{CascadeError, Ext, Interval};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error("invalid rack: {0}")]
    InvalidRack(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown catalog entry {0}")]
    UnknownEntry(String),
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    /// Stated outright for the example.
    Stated,
    /// Worked out independently of the engine.
    Derived,
    /// Immediate from the construction.
    Trivial,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Stated => "stated",
            Source::Derived => "derived",
            Source::Trivial => "trivial",
        })
    }
}

/// Expected shape of one family in a non-Hausdorff set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyShape<T> {
    /// Leading members, canonical.
    pub first: Vec<MfdPoint<T>>,
    pub limit: Option<MfdPoint<T>>,
    pub included: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected<T> {
    Verdict { p: MfdPoint<T>, q: MfdPoint<T>, kind: VerdictKind },
    EpsStar { p: MfdPoint<T>, q: MfdPoint<T>, eps: T },
    Nh { p: MfdPoint<T>, isolated: Vec<MfdPoint<T>>, families: Vec<FamilyShape<T>> },
    /// Bumpeq classes of the sampled points, as index lists.
    Classes { points: Vec<MfdPoint<T>>, classes: Vec<Vec<usize>> },
    Sorted { points: Vec<MfdPoint<T>>, ok: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation<T> {
    pub label: String,
    pub expected: Expected<T>,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub passed: bool,
    pub actual: String,
}

impl<T: Scalar> Expectation<T> {
    pub fn new(label: impl Into<String>, source: Source, expected: Expected<T>) -> Self {
        Expectation { label: label.into(), expected, source }
    }

    /// Re-runs the query on `s`.
    pub fn check(&self, s: &AdjunctionSystem<T>) -> Outcome {
        match self.eval(s) {
            Ok(o) => o,
            Err(e) => Outcome { passed: false, actual: format!("error: {e}") },
        }
    }

    fn eval(&self, s: &AdjunctionSystem<T>) -> Result<Outcome, String> {
        let err = |e: &dyn std::error::Error| e.to_string();
        Ok(match &self.expected {
            Expected::Verdict { p, q, kind } => {
                let r = separation(s, p, q).map_err(|e| err(&e))?;
                Outcome { passed: r.kind() == *kind, actual: r.kind().to_string() }
            }
            Expected::EpsStar { p, q, eps } => {
                let r = separation(s, p, q).map_err(|e| err(&e))?;
                match r.verdict {
                    crate::nhcalc::Verdict::Separated { eps_star } => {
                        Outcome { passed: eps_star == *eps, actual: format!("Separated at {}", eps_star.fmt_exact()) }
                    }
                    v => Outcome { passed: false, actual: v.kind().to_string() },
                }
            }
            Expected::Nh { p, isolated, families } => {
                let d = nh_of(s, p).map_err(|e| err(&e))?;
                let mut want_iso = Vec::new();
                for q in isolated {
                    want_iso.push(s.canonical(q).map_err(|e| err(&e))?);
                }
                want_iso.sort();
                let mut got: Vec<FamilyShape<T>> = Vec::new();
                for f in &d.families {
                    let k = families.first().map_or(3, |x| x.first.len()) as u64;
                    let mut first = Vec::new();
                    for m in f.members(k) {
                        first.push(s.canonical(&m).map_err(|e| err(&e))?);
                    }
                    got.push(FamilyShape { first, limit: f.limit.clone(), included: f.limit_included });
                }
                let mut want = families.clone();
                want.sort_by(|a, b| a.first.cmp(&b.first));
                got.sort_by(|a, b| a.first.cmp(&b.first));
                Outcome { passed: d.isolated == want_iso && got == want, actual: d.to_string() }
            }
            Expected::Classes { points, classes } => {
                let g = nh_graph(s, points).map_err(|e| err(&e))?;
                let c = bumpeq_classes(&g);
                Outcome { passed: c == *classes, actual: format!("{c:?}") }
            }
            Expected::Sorted { points, ok } => {
                let v = sorted_check(s, points, 16).map_err(|e| err(&e))?;
                let actual = match v.first() {
                    None => "ok".to_string(),
                    Some(x) => format!("NH({}) and NH({}) share {}", x.x, x.y, x.common),
                };
                Outcome { passed: v.is_empty() == *ok, actual }
            }
        })
    }
}

/// A named system with its expectations.
#[derive(Clone, Debug)]
pub struct CatalogEntry<T> {
    pub name: String,
    pub params: String,
    pub system: AdjunctionSystem<T>,
    pub chart_names: Vec<(usize, String)>,
    pub expectations: Vec<Expectation<T>>,
}

impl<T: Scalar> CatalogEntry<T> {
    pub fn chart_name(&self, id: usize) -> String {
        self.chart_names.iter().find(|(c, _)| *c == id).map_or_else(|| format!("chart{id}"), |(_, n)| n.clone())
    }
}

pub(crate) fn pt<T: Scalar>(chart: usize, n: i64, d: i64) -> MfdPoint<T> {
    MfdPoint::new(chart, T::from_frac(n, d))
}

pub(crate) fn line_chart<T: Scalar>(id: usize) -> Chart<T> {
    Chart { id, extent: Interval::line() }
}

pub(crate) fn fin_chart<T: Scalar>(id: usize, lo: T, hi: T) -> Chart<T> {
    Chart { id, extent: Interval { lo: Ext::Fin(lo), hi: Ext::Fin(hi) } }
}

/// Every entry the command line can build by name, with default parameters.
pub fn by_name<T: Scalar>(name: &str) -> Result<CatalogEntry<T>, CatalogError> {
    let f = |n, d| T::from_frac(n, d);
    match name {
        "two_origins" => make_two_origins(),
        "branching" => make_branching(),
        "doubly_branching" => make_doubly_branching(),
        "towel_rack" => make_towel_rack(&[
            RackFloor { floor: 1, sets: vec![vec![f(0, 1), f(1, 2)]] },
            RackFloor { floor: 2, sets: vec![vec![f(0, 1)]] },
        ]),
        "we" => make_we(&[f(0, 1), f(1, 1)]),
        "fat_s1" => make_fat_s1(&[f(0, 1), f(1, 4)]),
        "nh_ordinal" => make_nh_ordinal(),
        "cascade_e" => make_cascade_e(&EDescriptor {
            points: vec![],
            families: vec![GeoFamily { base: f(0, 1), scale: f(1, 1), ratio: f(1, 2) }],
        }),
        "psi_like" => make_psi_like(2),
        "tree" => make_tree(&FiniteTree::complete_binary(3)),
        "mutual_sequences" => make_mutual_sequences(),
        other => Err(CatalogError::UnknownEntry(other.to_string())),
    }
}

pub const NAMES: &[&str] = &[
    "two_origins",
    "branching",
    "doubly_branching",
    "towel_rack",
    "we",
    "fat_s1",
    "nh_ordinal",
    "cascade_e",
    "psi_like",
    "tree",
    "mutual_sequences",
];
