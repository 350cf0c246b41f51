use super::{fin_chart, line_chart, pt, CatalogEntry, CatalogError, Expectation, Expected, Source};
use crate::atlas::{close_transitions, AdjunctionSystem, Chart, MfdPoint, Transition};
use crate::nhcalc::VerdictKind;
use crate::ratcore::{AffinePiece, Ext, Interval};
use crate::scalar::Scalar;

use VerdictKind::{Equal, NotSeparated, Separated};

fn ident<T: Scalar>(lo: Ext<T>, hi: Ext<T>) -> AffinePiece<T> {
    AffinePiece::identity(Interval { lo, hi })
}

/// Identity on the line with the given points removed.
fn identity_off<T: Scalar>(pts: &[T]) -> Vec<AffinePiece<T>> {
    let mut cuts: Vec<T> = pts.to_vec();
    cuts.sort();
    cuts.dedup();
    let mut bounds = vec![Ext::NegInf];
    bounds.extend(cuts.into_iter().map(Ext::Fin));
    bounds.push(Ext::PosInf);
    bounds.windows(2).map(|w| ident(w[0].clone(), w[1].clone())).collect()
}

fn verdict<T: Scalar>(label: &str, src: Source, p: MfdPoint<T>, q: MfdPoint<T>, kind: VerdictKind) -> Expectation<T> {
    Expectation::new(label, src, Expected::Verdict { p, q, kind })
}

fn lines<T: Scalar>(k: usize) -> Result<AdjunctionSystem<T>, CatalogError> {
    Ok(AdjunctionSystem::new((0..k).map(line_chart).collect())?)
}

pub fn make_two_origins<T: Scalar>() -> Result<CatalogEntry<T>, CatalogError> {
    let mut s = lines(2)?;
    s.glue(Transition::new(0, 1, identity_off(&[T::zero()]), vec![]))?;
    let exp = vec![
        Expectation::new(
            "NH of the origin is the other origin",
            Source::Stated,
            Expected::Nh { p: pt(0, 0, 1), isolated: vec![pt(1, 0, 1)], families: vec![] },
        ),
        verdict("the two origins", Source::Stated, pt(0, 0, 1), pt(1, 0, 1), NotSeparated),
        Expectation::new(
            "same-chart points",
            Source::Trivial,
            Expected::EpsStar { p: pt(0, 0, 1), q: pt(0, 3, 1), eps: T::from_frac(3, 2) },
        ),
        Expectation::new(
            "graph on both origins and 5",
            Source::Stated,
            Expected::Classes { points: vec![pt(0, 0, 1), pt(1, 0, 1), pt(0, 5, 1)], classes: vec![vec![0, 1], vec![2]] },
        ),
    ];
    Ok(CatalogEntry {
        name: "two_origins".into(),
        params: String::new(),
        system: s,
        chart_names: vec![(0, "R0".into()), (1, "R1".into())],
        expectations: exp,
    })
}

pub fn make_branching<T: Scalar>() -> Result<CatalogEntry<T>, CatalogError> {
    let mut s = lines(2)?;
    s.glue(Transition::new(0, 1, vec![ident(Ext::NegInf, Ext::Fin(T::zero()))], vec![]))?;
    let exp = vec![
        verdict("the two copies of 0", Source::Stated, pt(0, 0, 1), pt(1, 0, 1), NotSeparated),
        verdict("positive parts stay apart", Source::Derived, pt(0, 1, 1), pt(1, 1, 1), Separated),
        verdict("negative parts identified", Source::Stated, pt(0, -1, 1), pt(1, -1, 1), Equal),
        Expectation::new(
            "NH of 0 in the bottom copy",
            Source::Derived,
            Expected::Nh { p: pt(0, 0, 1), isolated: vec![pt(1, 0, 1)], families: vec![] },
        ),
    ];
    Ok(CatalogEntry {
        name: "branching".into(),
        params: String::new(),
        system: s,
        chart_names: vec![(0, "bottom".into()), (1, "top".into())],
        expectations: exp,
    })
}

pub fn make_doubly_branching<T: Scalar>() -> Result<CatalogEntry<T>, CatalogError> {
    let mut s = lines(3)?;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        s.glue(Transition::new(a, b, vec![ident(Ext::NegInf, Ext::Fin(T::zero()))], vec![]))?;
    }
    let exp = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|(a, b)| verdict(&format!("copies {a} and {b} of 0"), Source::Derived, pt(a, 0, 1), pt(b, 0, 1), NotSeparated))
        .collect();
    Ok(CatalogEntry {
        name: "doubly_branching".into(),
        params: String::new(),
        system: s,
        chart_names: (0..3).map(|i| (i, format!("R{i}"))).collect(),
        expectations: exp,
    })
}

/// The point sets lifted to one floor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RackFloor<T> {
    pub floor: u32,
    pub sets: Vec<Vec<T>>,
}

/// Floor 0 is chart 0; every lifted point `(x, floor)` gets its own copy of
/// the line, glued to everything off `x`.
pub fn make_towel_rack<T: Scalar>(rack: &[RackFloor<T>]) -> Result<CatalogEntry<T>, CatalogError> {
    let mut lifted: Vec<(u32, T)> = Vec::new();
    for f in rack {
        if f.floor == 0 {
            return Err(CatalogError::InvalidRack("floors start at 1".into()));
        }
        for set in &f.sets {
            for x in set {
                if !lifted.contains(&(f.floor, x.clone())) {
                    lifted.push((f.floor, x.clone()));
                }
            }
        }
    }
    let mut s = lines(lifted.len() + 1)?;
    for (i, (_, x)) in lifted.iter().enumerate() {
        s.glue(Transition::new(0, i + 1, identity_off(std::slice::from_ref(x)), vec![]))?;
    }
    close_transitions(&mut s)?;

    let mut names = vec![(0, "floor0".to_string())];
    names.extend(lifted.iter().enumerate().map(|(i, (a, x))| (i + 1, format!("lift({},{})", x.fmt_exact(), a))));
    let params = rack
        .iter()
        .map(|f| {
            let sets: Vec<String> = f
                .sets
                .iter()
                .map(|k| format!("{{{}}}", k.iter().map(|x| x.fmt_exact()).collect::<Vec<_>>().join(",")))
                .collect();
            format!("{}:{}", f.floor, sets.join(""))
        })
        .collect::<Vec<_>>()
        .join(";");

    let mut exp = Vec::new();
    // Expectations for the rack {{0,1/2}} on floor 1 and {{0}} on floor 2.
    let zero: Vec<usize> = (0..lifted.len()).filter(|i| lifted[*i].1.is_zero()).map(|i| i + 1).collect();
    if zero.len() == 2 && lifted.len() == 3 {
        exp.push(Expectation::new(
            "NH of 0 on floor 0 is its two lifts",
            Source::Stated,
            Expected::Nh { p: pt(0, 0, 1), isolated: zero.iter().map(|c| pt(*c, 0, 1)).collect(), families: vec![] },
        ));
        exp.push(verdict("the two lifts of 0", Source::Derived, pt(zero[0], 0, 1), pt(zero[1], 0, 1), NotSeparated));
        exp.push(Expectation::new(
            "floor 0 is sorted",
            Source::Stated,
            Expected::Sorted { points: vec![pt(0, 0, 1), pt(0, 1, 2), pt(0, 7, 1)], ok: true },
        ));
    }
    Ok(CatalogEntry { name: "towel_rack".into(), params, system: s, chart_names: names, expectations: exp })
}

fn distinct_sorted<T: Scalar>(e: &[T], what: &str) -> Result<Vec<T>, CatalogError> {
    let mut v = e.to_vec();
    v.sort();
    v.dedup();
    if v.len() != e.len() || v.len() < 2 {
        return Err(CatalogError::InvalidParams(format!("{what} needs at least two distinct points")));
    }
    Ok(v)
}

fn min_gap<T: Scalar>(v: &[T]) -> T {
    v.windows(2).map(|w| w[1].clone() - w[0].clone()).min().expect("two points")
}

/// Base line plus a shortcut chart `c_{x,y}` for each pair: its left half is
/// glued just left of `x`, its right half just right of `y`.
pub fn make_we<T: Scalar>(e: &[T]) -> Result<CatalogEntry<T>, CatalogError> {
    let e = distinct_sorted(e, "W_E")?;
    let r = min_gap(&e) / T::from_int(3);
    let mut pairs = Vec::new();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            pairs.push((e[i].clone(), e[j].clone()));
        }
    }
    let mut charts = vec![line_chart(0)];
    charts.extend((0..pairs.len()).map(|k| fin_chart(k + 1, -r.clone(), r.clone())));
    let mut s = AdjunctionSystem::new(charts)?;
    let z = || Ext::Fin(T::zero());
    for (k, (x, y)) in pairs.iter().enumerate() {
        let left = AffinePiece::translation(Interval { lo: Ext::Fin(-r.clone()), hi: z() }, x.clone());
        let right = AffinePiece::translation(Interval { lo: z(), hi: Ext::Fin(r.clone()) }, y.clone());
        s.glue(Transition::new(k + 1, 0, vec![left, right], vec![]))?;
    }
    close_transitions(&mut s)?;

    let mut names = vec![(0, "base".to_string())];
    names.extend(pairs.iter().enumerate().map(|(k, (x, y))| (k + 1, format!("c({},{})", x.fmt_exact(), y.fmt_exact()))));
    let params = e.iter().map(|x| x.fmt_exact()).collect::<Vec<_>>().join(",");

    let mut exp = Vec::new();
    if e == [T::zero(), T::one()] {
        exp.push(Expectation::new(
            "shortcut joins 0 and 1",
            Source::Stated,
            Expected::Classes { points: vec![pt(0, 0, 1), pt(0, 1, 1), pt(1, 0, 1)], classes: vec![vec![0, 1, 2]] },
        ));
        exp.push(verdict("0 and 1 on the base", Source::Stated, pt(0, 0, 1), pt(0, 1, 1), Separated));
        exp.push(verdict("0 and the shortcut point", Source::Stated, pt(0, 0, 1), pt(1, 0, 1), NotSeparated));
        exp.push(verdict("1 and the shortcut point", Source::Stated, pt(0, 1, 1), pt(1, 0, 1), NotSeparated));
        exp.push(verdict("1/2 and the shortcut point", Source::Derived, pt(0, 1, 2), pt(1, 0, 1), Separated));
        exp.push(Expectation::new(
            "NH(0) and NH(1) share the shortcut point",
            Source::Derived,
            Expected::Sorted { points: vec![pt(0, 0, 1), pt(0, 1, 1)], ok: false },
        ));
    }
    Ok(CatalogEntry { name: "we".into(), params, system: s, chart_names: names, expectations: exp })
}

/// `x mod 1` in `[0, 1)`.
fn unit<T: Scalar>(x: &T) -> T {
    let mut v = x.clone();
    while v.is_negative() {
        v = v + T::one();
    }
    while v >= T::one() {
        v = v - T::one();
    }
    v
}

/// Circle position `x` (mod 1) in the circle chart containing `(x-r, x+r)`.
fn circle_coord<T: Scalar>(x: &T, r: &T) -> (usize, T) {
    let half = T::from_frac(1, 2);
    let x0 = if *x >= half { x.clone() - T::one() } else { x.clone() };
    if x0.clone() - r.clone() > -half.clone() && x0.clone() + r.clone() < half {
        (0, x0)
    } else {
        let x1 = if x0.is_negative() { x0 + T::one() } else { x0 };
        (1, x1)
    }
}

/// The circle as two charts plus, for each pair `x < y` of `f`, the four
/// shortcut charts `c(x±, y±)` in the order `++, +-, -+, --`.
///
/// The left half of a shortcut approaches `x` from the side its sign names,
/// the right half approaches `y` likewise.
pub fn make_fat_s1<T: Scalar>(f: &[T]) -> Result<CatalogEntry<T>, CatalogError> {
    let norm: Vec<T> = f.iter().map(unit).collect();
    let pos = distinct_sorted(&norm, "fatS1")?;
    let mut gap = min_gap(&pos);
    let wrap = pos[0].clone() + T::one() - pos[pos.len() - 1].clone();
    if wrap < gap {
        gap = wrap;
    }
    let r = (gap / T::from_int(3)).min(T::from_frac(1, 8));
    let half = T::from_frac(1, 2);
    let mut charts: Vec<Chart<T>> = vec![fin_chart(0, -half.clone(), half.clone()), fin_chart(1, T::zero(), T::one())];
    let mut pairs = Vec::new();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            for (sx, sy) in [(true, true), (true, false), (false, true), (false, false)] {
                pairs.push((pos[i].clone(), sx, pos[j].clone(), sy));
            }
        }
    }
    let base = charts.len();
    charts.extend((0..pairs.len()).map(|k| fin_chart(base + k, -r.clone(), r.clone())));
    let mut s = AdjunctionSystem::new(charts)?;
    s.glue(Transition::new(
        0,
        1,
        vec![
            AffinePiece::translation(Interval { lo: Ext::Fin(-half.clone()), hi: Ext::Fin(T::zero()) }, T::one()),
            ident(Ext::Fin(T::zero()), Ext::Fin(half.clone())),
        ],
        vec![],
    ))?;
    let neg = Interval { lo: Ext::Fin(-r.clone()), hi: Ext::Fin(T::zero()) };
    let posi = Interval { lo: Ext::Fin(T::zero()), hi: Ext::Fin(r.clone()) };
    for (k, (x, sx, y, sy)) in pairs.iter().enumerate() {
        let (cx, ux) = circle_coord(x, &r);
        let (cy, uy) = circle_coord(y, &r);
        // u ∈ (-r, 0): x+ is x - u, x- is x + u. u ∈ (0, r): y+ is y + u, y- is y - u.
        let lp = if *sx {
            AffinePiece { dom: neg.clone(), slope: -T::one(), offset: ux }
        } else {
            AffinePiece::translation(neg.clone(), ux)
        };
        let rp = if *sy {
            AffinePiece::translation(posi.clone(), uy)
        } else {
            AffinePiece { dom: posi.clone(), slope: -T::one(), offset: uy }
        };
        if cx == cy {
            s.glue(Transition::new(base + k, cx, vec![lp, rp], vec![]))?;
        } else {
            s.glue(Transition::new(base + k, cx, vec![lp], vec![]))?;
            s.glue(Transition::new(base + k, cy, vec![rp], vec![]))?;
        }
    }
    close_transitions(&mut s)?;

    let sign = |b: bool| if b { "+" } else { "-" };
    let mut names = vec![(0, "S0".to_string()), (1, "S1".to_string())];
    names.extend(
        pairs
            .iter()
            .enumerate()
            .map(|(k, (x, sx, y, sy))| (base + k, format!("c({}{},{}{})", x.fmt_exact(), sign(*sx), y.fmt_exact(), sign(*sy)))),
    );
    let params = pos.iter().map(|x| x.fmt_exact()).collect::<Vec<_>>().join(",");

    let mut exp = Vec::new();
    if pos == [T::zero(), T::from_frac(1, 4)] {
        let c = |k: usize| pt(base + k, 0, 1);
        exp.push(verdict("c(0+,1/4+) and 0", Source::Stated, c(0), pt(0, 0, 1), NotSeparated));
        exp.push(verdict("c(0+,1/4+) and 1/4", Source::Stated, c(0), pt(0, 1, 4), NotSeparated));
        exp.push(verdict("c(0+,1/4+) and c(0+,1/4-)", Source::Stated, c(0), c(1), NotSeparated));
        exp.push(verdict("c(0+,1/4+) and c(0-,1/4-)", Source::Derived, c(0), c(3), Separated));
        exp.push(Expectation::new(
            "sampled graph is one class",
            Source::Derived,
            Expected::Classes {
                points: vec![pt(0, 0, 1), pt(0, 1, 4), c(0), c(1), c(2), c(3)],
                classes: vec![vec![0, 1, 2, 3, 4, 5]],
            },
        ));
    }
    Ok(CatalogEntry { name: "fat_s1".into(), params, system: s, chart_names: names, expectations: exp })
}

/// A rooted tree given by parent links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTree {
    pub parent: Vec<Option<usize>>,
}

impl FiniteTree {
    pub fn path(len: usize) -> Self {
        FiniteTree { parent: (0..len).map(|i| i.checked_sub(1)).collect() }
    }

    /// Heap-ordered complete binary tree with leaves at `depth`.
    pub fn complete_binary(depth: u32) -> Self {
        let n = (1usize << (depth + 1)) - 1;
        FiniteTree { parent: (0..n).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect() }
    }

    /// Root-to-node path, or an error on cycles and missing roots.
    fn path_to(&self, v: usize) -> Result<Vec<usize>, CatalogError> {
        let mut p = vec![v];
        let mut cur = v;
        while let Some(u) = self.parent[cur] {
            if u >= self.parent.len() || p.len() > self.parent.len() {
                return Err(CatalogError::InvalidParams("tree has a cycle or bad parent".into()));
            }
            p.push(u);
            cur = u;
        }
        p.reverse();
        Ok(p)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|v| !self.parent.contains(&Some(*v))).collect()
    }
}

/// One chart `(0, depth + 1)` per root-to-leaf branch; node `u` at depth `d`
/// occupies `(d, d+1)`, and branches agree along their common part.
pub fn make_tree<T: Scalar>(t: &FiniteTree) -> Result<CatalogEntry<T>, CatalogError> {
    let roots = t.parent.iter().filter(|p| p.is_none()).count();
    if roots != 1 {
        return Err(CatalogError::InvalidParams(format!("tree needs one root, found {roots}")));
    }
    let leaves = t.leaves();
    let paths = leaves.iter().map(|l| t.path_to(*l)).collect::<Result<Vec<_>, _>>()?;
    let charts = paths
        .iter()
        .enumerate()
        .map(|(i, p)| fin_chart(i, T::zero(), T::from_int(p.len() as i64)))
        .collect();
    let mut s = AdjunctionSystem::new(charts)?;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let shared = paths[i].iter().zip(&paths[j]).take_while(|(a, b)| a == b).count();
            if shared > 0 {
                s.glue(Transition::new(i, j, vec![ident(Ext::Fin(T::zero()), Ext::Fin(T::from_int(shared as i64)))], vec![]))?;
            }
        }
    }
    let names = leaves.iter().enumerate().map(|(i, l)| (i, format!("leaf{l}"))).collect();
    let params = t.parent.iter().map(|p| p.map_or("-".to_string(), |u| u.to_string())).collect::<Vec<_>>().join(",");

    let mut exp = Vec::new();
    if *t == FiniteTree::complete_binary(3) {
        exp.push(verdict("sibling leaves at 3", Source::Derived, pt(0, 3, 1), pt(1, 3, 1), NotSeparated));
        exp.push(verdict("siblings at depth 2", Source::Derived, pt(0, 2, 1), pt(2, 2, 1), NotSeparated));
        exp.push(verdict("siblings at depth 1", Source::Derived, pt(0, 1, 1), pt(4, 1, 1), NotSeparated));
        exp.push(verdict("cousins at depth 2, interior", Source::Derived, pt(0, 5, 2), pt(4, 5, 2), Separated));
        exp.push(verdict("root segment", Source::Trivial, pt(0, 1, 2), pt(7, 1, 2), Equal));
    }
    Ok(CatalogEntry { name: "tree".into(), params, system: s, chart_names: names, expectations: exp })
}
