use std::path::PathBuf;
use std::sync::OnceLock;

use nhatlas::catalog::{by_name, make_fat_s1, make_psi_like, make_towel_rack, make_we, RackFloor, NAMES};
use nhatlas::nhcalc::{separation, VerdictKind};
use nhatlas::{rat, Point, Rat, Scalar, System};
use nhatlas_cli::app::{parse_point, EXIT_ERROR, EXIT_OK, EXIT_TIER2, EXIT_USAGE};
use nhatlas_cli::{export_atlas, parse_atlas_str, run};
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

/// Every catalog system, written once.
fn files() -> &'static [(String, PathBuf, System)] {
    static F: OnceLock<(TempDir, Vec<(String, PathBuf, System)>)> = OnceLock::new();
    &F.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let v = NAMES
            .iter()
            .map(|n| {
                let s = by_name::<Rat>(n).unwrap().system;
                let p = dir.path().join(format!("{n}.json"));
                std::fs::write(&p, export_atlas(&s)).unwrap();
                (n.to_string(), p, s)
            })
            .collect();
        (dir, v)
    })
    .1
}

fn coord() -> impl Strategy<Value = Rat> {
    (-40i64..40, 1i64..6).prop_map(|(n, d)| rat(n, d))
}

#[derive(Debug, Clone)]
enum Arg {
    Good(usize, Rat),
    /// Chart id past the last chart.
    Missing(Rat),
    Garbled(String),
}

fn arg() -> impl Strategy<Value = Arg> {
    prop_oneof![
        6 => (0usize..16, coord()).prop_map(|(c, x)| Arg::Good(c, x)),
        1 => coord().prop_map(Arg::Missing),
        1 => "[a-z0-9/:]{0,6}".prop_filter("parses", |s| parse_point(s).is_err()).prop_map(Arg::Garbled),
    ]
}

fn render(a: &Arg, s: &System) -> String {
    match a {
        Arg::Good(c, x) => format!("{}:{}", s.charts()[c % s.charts().len()].id, x.fmt_exact()),
        Arg::Missing(x) => format!("{}:{}", 1000, x.fmt_exact()),
        Arg::Garbled(t) => t.clone(),
    }
}

fn code_of(args: &[String]) -> (i32, Value) {
    let out = run(std::iter::once("nhatlas".to_string()).chain(args.iter().cloned()));
    let v = serde_json::from_str(out.stdout.lines().next().unwrap_or("null")).unwrap_or(Value::Null);
    (out.code, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// `sep` exits 0, 1, 2 or 64 exactly as the argument classes predict.
    #[test]
    fn sep_exit_codes(sys in 0usize..64, a in arg(), b in arg(), missing_file in prop::bool::weighted(0.05)) {
        let (name, path, s) = &files()[sys % files().len()];
        let file = if missing_file { "/nonexistent/atlas.json".to_string() } else { path.display().to_string() };
        let (p, q) = (render(&a, s), render(&b, s));
        let (code, rec) = code_of(&["sep".into(), file, "--p".into(), p.clone(), "--q".into(), q.clone()]);
        let want = match (&a, &b) {
            (Arg::Garbled(_), _) | (_, Arg::Garbled(_)) if !missing_file => EXIT_USAGE,
            _ if missing_file => EXIT_ERROR,
            (Arg::Missing(_), _) | (_, Arg::Missing(_)) => EXIT_ERROR,
            _ => {
                let v = separation(s, &parse_point(&p).unwrap(), &parse_point(&q).unwrap());
                match v {
                    Err(_) => EXIT_ERROR,
                    Ok(v) if v.tier2 || v.kind() == VerdictKind::Unknown => EXIT_TIER2,
                    Ok(v) => {
                        prop_assert_eq!(rec["verdict"].as_str().map(String::from), Some(v.kind().to_string()));
                        EXIT_OK
                    }
                }
            }
        };
        prop_assert_eq!(code, want, "{}: sep {} {} -> {}", name, p, q, rec);
        prop_assert!(rec.is_object(), "stdout is one JSON record");
    }

    /// Every other query command on good, missing and garbled input.
    #[test]
    fn query_exit_codes(sys in 0usize..64, cmd in 0usize..5, a in arg(), b in arg(), chart in 0usize..20) {
        let (name, path, s) = &files()[sys % files().len()];
        let file = path.display().to_string();
        let (p, q) = (render(&a, s), render(&b, s));
        let args: Vec<String> = match cmd {
            0 => vec!["nh".into(), file, "--p".into(), p.clone()],
            1 => vec!["graph".into(), file, "--points".into(), format!("{p},{q}")],
            2 => vec!["classes".into(), file, "--points".into(), format!("{p},{q}")],
            3 => vec!["maximality".into(), file, "--chart".into(), chart.to_string()],
            _ => vec!["validate".into(), file],
        };
        let (code, rec) = code_of(&args);
        let garbled = matches!(a, Arg::Garbled(_)) || (matches!(b, Arg::Garbled(_)) && (cmd == 1 || cmd == 2));
        if garbled && cmd < 3 {
            prop_assert_eq!(code, EXIT_USAGE, "{} {:?}", name, args);
            prop_assert_eq!(&rec["error"], "UsageError");
        } else if rec.get("error").is_some() {
            prop_assert_eq!(code, EXIT_ERROR, "{} {:?}: {}", name, args, rec);
        } else {
            let tier2 = rec["tier2"].as_bool().unwrap_or(false) || !rec["unverified"].as_array().is_none_or(|u| u.is_empty());
            prop_assert_eq!(code, if tier2 { EXIT_TIER2 } else { EXIT_OK }, "{} {:?}: {}", name, args, rec);
        }
    }
}

fn rats(max: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::btree_set((-12i64..12, 1i64..5).prop_map(|(n, d)| rat(n, d)), 1..max)
        .prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Export, parse, export is the identity on text for parameterized systems.
    #[test]
    fn export_parse_export_is_stable(kind in 0usize..4, pts in rats(4), k in 1u64..4, two in prop::bool::ANY) {
        let e = match kind {
            0 => make_we::<Rat>(&pts),
            1 => make_fat_s1::<Rat>(&pts),
            2 => make_psi_like::<Rat>(k),
            _ => {
                let mut floors = vec![RackFloor { floor: 1, sets: vec![pts.clone()] }];
                if two {
                    floors.push(RackFloor { floor: 2, sets: vec![pts[..1].to_vec()] });
                }
                make_towel_rack::<Rat>(&floors)
            }
        };
        let Ok(e) = e else { return Ok(()) };
        let text = export_atlas(&e.system);
        let back = parse_atlas_str(&text).map_err(|err| TestCaseError::fail(format!("{err}")))?;
        prop_assert_eq!(export_atlas(&back), text);
    }

    #[test]
    fn points_print_and_parse_back(c in 0usize..100, x in coord()) {
        let p = Point::new(c, x);
        prop_assert_eq!(parse_point(&p.to_string()).unwrap(), p);
    }
}
