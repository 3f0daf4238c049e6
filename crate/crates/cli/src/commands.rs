use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use medlab_core::axioms::{validate_axioms, MedianTable};
use medlab_core::dynamics::{
    ai_closed_form, ai_recurrence, count_xi_bruteforce, phi_conjugation_check, phi_fixed_points,
    XiCounts, BRUTE_FORCE_MAX_N, COUNTS_MAX_N,
};
use medlab_core::generators::GeneratorSpec;
use medlab_core::groups::{
    group_closure, invariant_balanced_search, select_invariant_cube, DEFAULT_GROUP_CAP,
};
use medlab_core::io::{self, format_rational};
use medlab_core::measures::{
    balance_search, classify_balanced, is_balanced, rational, NotCubicalWitness, StartRecord,
    PRNG_ALGORITHM,
};
use medlab_core::walls::{detect_cube, enumerate_walls, CubeCertificate, CubeOutcome, NotCubeReason};
use medlab_core::{
    BitVector, Classification, Error, Measure, MedianAlgebra, PointId, SearchParams,
};
use serde_json::{json, Map, Value};

use crate::report::{digest, render};
use crate::{Command, GenKind, SearchArgs};

/// Above this size `validate` trusts the embedding instead of tabulating.
const AXIOM_TABLE_CAP: usize = 256;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

/// Stdout text plus exit code; a report can accompany a non-zero exit.
pub struct Output {
    pub text: String,
    pub code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        error: anyhow!(msg.into()),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_)
            | Error::Io(_)
            | Error::InvalidPoint(_)
            | Error::NotMedianClosed(..)
            | Error::EmptyAlgebra
            | Error::InvalidMeasure(_)
            | Error::InvalidAutomorphism(_)
            | Error::NotATree(_)
            | Error::TooManyPoints(..)
            | Error::DimensionTooLarge(..)
            | Error::OutOfRange(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

type CmdResult = Result<Output, Failure>;

pub fn run(command: Command, pretty: bool) -> CmdResult {
    match command {
        Command::Validate { algebra } => validate(&algebra, pretty),
        Command::Walls { algebra } => walls(&algebra, pretty),
        Command::Cube { algebra, points } => cube(&algebra, points.as_deref(), pretty),
        Command::Balance { algebra, search } => balance(&algebra, &search, pretty),
        Command::Classify { measure } => classify(&measure, pretty),
        Command::Formulas { n_max, csv } => formulas(n_max, csv, pretty),
        Command::Act {
            algebra,
            group,
            search,
        } => act(&algebra, &group, &search, pretty),
        Command::Gen { kind, output } => gen(kind, output.as_deref(), pretty),
    }
}

fn show(m: &MedianAlgebra, x: PointId) -> String {
    m.point(x).to_string()
}

fn weights_json(m: &MedianAlgebra, mu: &Measure) -> Value {
    let w: Map<String, Value> = m
        .ids()
        .filter(|&x| mu.weight(x) != &rational(0, 1))
        .map(|x| (show(m, x), Value::String(format_rational(mu.weight(x)))))
        .collect();
    Value::Object(w)
}

fn params_of(args: &SearchArgs) -> Result<SearchParams, Failure> {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    if args.max_iter == 0 {
        return Err(usage("--max-iter must be at least 1"));
    }
    Ok(SearchParams {
        starts: args.starts,
        seed: args.seed,
        tol: args.tol,
        max_iter: args.max_iter,
        max_denominator_log2: args.denominator_log2,
    })
}

fn params_json(p: &SearchParams, m: &MedianAlgebra) -> Value {
    json!({
        "starts": p.starts,
        "seed": p.seed,
        "tol": p.tol,
        "max_iter": p.max_iter,
        "denominator_log2": p.denominator_log2(m),
        "prng": PRNG_ALGORITHM,
    })
}

fn validate(path: &Path, pretty: bool) -> CmdResult {
    let m = io::load_algebra(path)?;
    let axioms_checked = m.len() <= AXIOM_TABLE_CAP;
    if axioms_checked {
        validate_axioms(&MedianTable::of_algebra(&m)).map_err(Error::Violation)?;
    }
    let (reduced, _) = m.reduce();
    if pretty {
        eprintln!(
            "{} points in {{0,1}}^{}, {} walls, reduced: {}",
            m.len(),
            m.dim(),
            reduced.dim(),
            m.is_reduced()
        );
    }
    let results = json!({
        "points": m.len(),
        "ambient_dim": m.dim(),
        "reduced": m.is_reduced(),
        "walls": reduced.dim(),
        "median_closed": true,
        "axioms_tabulated": axioms_checked,
    });
    Ok(Output::ok(render("validate", vec![digest(path)?], results)))
}

fn walls(path: &Path, pretty: bool) -> CmdResult {
    let m = io::load_algebra(path)?;
    let (reduced, _) = m.reduce();
    let walls = enumerate_walls(&reduced)?;
    let list: Vec<Value> = walls
        .iter()
        .map(|w| {
            let (pos, neg) = w.side_sizes();
            json!({
                "id": w.id,
                "side_sizes": [pos, neg],
                "positive": w.positive.iter().map(|x| show(&m, x)).collect::<Vec<_>>(),
            })
        })
        .collect();
    if pretty {
        eprintln!("{} walls", walls.len());
        for w in &walls {
            let (p, n) = w.side_sizes();
            eprintln!("  wall {:>3}: {p} | {n}", w.id);
        }
    }
    let results = json!({ "count": walls.len(), "walls": list });
    Ok(Output::ok(render("walls", vec![digest(path)?], results)))
}

fn certificate_json(m: &MedianAlgebra, cert: &CubeCertificate) -> Value {
    let iso: Vec<Value> = cert
        .points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let v = BitVector::new(cert.vertex_of(i), cert.dim()).expect("cube vertex");
            json!({ "point": show(m, p), "vertex": v.to_string() })
        })
        .collect();
    json!({
        "dim": cert.dim(),
        "walls": cert.walls.iter().map(|w| w.id).collect::<Vec<_>>(),
        "iso": iso,
    })
}

fn reason_json(m: &MedianAlgebra, r: &NotCubeReason) -> Value {
    match r {
        NotCubeReason::NotSeparated(a, b) => {
            json!({ "reason": "not_separated", "points": [show(m, *a), show(m, *b)] })
        }
        NotCubeReason::NonTransverse(i, j) => {
            json!({ "reason": "non_transverse", "walls": [i, j] })
        }
        NotCubeReason::Cardinality { points, walls } => {
            json!({ "reason": "cardinality", "points": points, "walls": walls })
        }
    }
}

fn cube(path: &Path, points: Option<&str>, pretty: bool) -> CmdResult {
    let m = io::load_algebra(path)?;
    let s = match points {
        None => m.full(),
        Some(list) => {
            let strs: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            m.subset_from_strs(&strs)?
        }
    };
    let results = match detect_cube(&m, &s)? {
        CubeOutcome::Cube(cert) => {
            if pretty {
                eprintln!("cube of dimension {}", cert.dim());
            }
            json!({ "is_cube": true, "certificate": certificate_json(&m, &cert) })
        }
        CubeOutcome::NotCube(reasons) => {
            if pretty {
                eprintln!("not a cube: {reasons:?}");
            }
            let rs: Vec<Value> = reasons.iter().map(|r| reason_json(&m, r)).collect();
            json!({ "is_cube": false, "reasons": rs })
        }
    };
    Ok(Output::ok(render("cube", vec![digest(path)?], results)))
}

fn witness_json(m: &MedianAlgebra, w: &NotCubicalWitness) -> Value {
    match w {
        NotCubicalWitness::SupportNotClosed(a, b, c, med) => json!({
            "witness": "support_not_median_closed",
            "triple": [show(m, *a), show(m, *b), show(m, *c)],
            "median": show(m, *med),
        }),
        NotCubicalWitness::SupportNotCube(reasons) => json!({
            "witness": "support_not_cube",
            "reasons": reasons.iter().map(|r| reason_json(m, r)).collect::<Vec<_>>(),
        }),
        NotCubicalWitness::NotUniform { point, weight } => json!({
            "witness": "not_uniform",
            "point": show(m, *point),
            "weight": format_rational(weight),
        }),
    }
}

fn loud_counterexample(context: &str) {
    eprintln!("!!! {context}: a verified balanced measure is NOT cubical.");
    eprintln!("!!! This contradicts the structure theorem; the report holds the witness.");
}

fn record_json(m: &MedianAlgebra, r: &StartRecord) -> Value {
    json!({
        "start_seed": r.start_seed,
        "converged": r.converged,
        "iterations": r.iterations,
        "residual": r.residual,
        "snapped": r.snapped.as_ref().map(|mu| weights_json(m, mu)),
        "cubical": r.is_cubical(),
        "cube_dim": r.cube_dim(),
        "witness": match &r.classification {
            Some(Classification::NotCubical(w)) => witness_json(m, w),
            _ => Value::Null,
        },
    })
}

fn balance(path: &Path, args: &SearchArgs, pretty: bool) -> CmdResult {
    let m = io::load_algebra(path)?;
    let params = params_of(args)?;
    let records = balance_search(&m, &params)?;
    let snapped = records.iter().filter(|r| r.snapped.is_some()).count();
    let non_cubical = records.iter().filter(|r| r.is_cubical() == Some(false)).count();
    if pretty {
        eprintln!("{:>6} {:>5} {:>6} {:>10} {:>8}", "seed", "conv", "iters", "residual", "cube_dim");
        for r in &records {
            let dim = r.cube_dim().map_or("-".to_owned(), |d| d.to_string());
            eprintln!(
                "{:>6} {:>5} {:>6} {:>10.2e} {:>8}",
                r.start_seed, r.converged, r.iterations, r.residual, dim
            );
        }
        eprintln!("{snapped}/{} starts snapped", records.len());
    }
    let results = json!({
        "params": params_json(&params, &m),
        "summary": {
            "starts": records.len(),
            "snapped": snapped,
            "non_cubical": non_cubical,
        },
        "records": records.iter().map(|r| record_json(&m, r)).collect::<Vec<_>>(),
    });
    let text = render("balance", vec![digest(path)?], results);
    if non_cubical > 0 {
        loud_counterexample(&format!("{non_cubical} start(s)"));
        return Ok(Output { text, code: 1 });
    }
    Ok(Output::ok(text))
}

fn classify(path: &Path, pretty: bool) -> CmdResult {
    let (m, mu) = io::load_measure(path)?;
    if !is_balanced(&m, &mu)? {
        return Err(Error::NotBalancedInput.into());
    }
    let class = classify_balanced(&m, &mu)?;
    let (results, code) = match &class {
        Classification::Cubical(cert) => {
            if pretty {
                eprintln!("cubical: uniform on a {}-cube", cert.cube.dim());
            }
            (
                json!({ "balanced": true, "cubical": true, "certificate": certificate_json(&m, &cert.cube) }),
                0,
            )
        }
        Classification::NotCubical(w) => {
            loud_counterexample("classify");
            (
                json!({ "balanced": true, "cubical": false, "witness": witness_json(&m, w) }),
                1,
            )
        }
    };
    Ok(Output {
        text: render("classify", vec![digest(path)?], results),
        code,
    })
}

fn grid_values() -> Vec<medlab_core::BigRational> {
    [(0, 1), (1, 5), (1, 3), (1, 2), (3, 4), (1, 1)]
        .iter()
        .map(|&(p, q)| rational(p, q))
        .collect()
}

struct FormulaRow {
    n: u32,
    brute: Option<XiCounts>,
    recurrence: XiCounts,
    closed: XiCounts,
    fixed: Vec<(String, f64, u32)>,
    conjugation: Option<bool>,
}

impl FormulaRow {
    fn agree(&self) -> bool {
        self.recurrence == self.closed && self.brute.as_ref().is_none_or(|b| *b == self.closed)
    }
}

fn formulas(n_max: u32, csv: bool, pretty: bool) -> CmdResult {
    if n_max == 0 || n_max > COUNTS_MAX_N {
        return Err(usage(format!("--n-max must lie in 1..={COUNTS_MAX_N}")));
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let brute = if n <= BRUTE_FORCE_MAX_N {
            Some(count_xi_bruteforce(n)?)
        } else {
            None
        };
        let conjugation = if n <= 5 {
            let mut all = true;
            for t in grid_values() {
                all &= phi_conjugation_check(n, &t)?;
            }
            Some(all)
        } else {
            None
        };
        let fixed = phi_fixed_points(n)?
            .into_iter()
            .map(|p| (p.value.to_string(), p.value.to_f64(), p.multiplicity))
            .collect();
        rows.push(FormulaRow {
            n,
            brute,
            recurrence: ai_recurrence(n)?,
            closed: ai_closed_form(n)?,
            fixed,
            conjugation,
        });
    }
    if pretty {
        for r in &rows {
            eprintln!(
                "n={:<3} a={} agree={} conj={:?}",
                r.n,
                r.closed,
                r.agree(),
                r.conjugation
            );
        }
    }
    let all_agree = rows.iter().all(FormulaRow::agree);
    let text = if csv {
        let mut out = String::from("n,a0,a1,a2,a3,bruteforce,agree,fixed_points,conjugation\n");
        for r in &rows {
            let [a0, a1, a2, a3] = r.closed.a;
            let fixed: Vec<&str> = r.fixed.iter().map(|f| f.0.as_str()).collect();
            let opt = |b: Option<bool>| b.map_or(String::new(), |v| v.to_string());
            writeln!(
                out,
                "{},{a0},{a1},{a2},{a3},{},{},{},{}",
                r.n,
                r.brute.is_some(),
                r.agree(),
                fixed.join(";"),
                opt(r.conjugation)
            )
            .expect("writing to a string");
        }
        out
    } else {
        let table: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "bruteforce": r.brute.as_ref().map(|b| b.a.map(|v| v.to_string())),
                    "recurrence": r.recurrence.a.map(|v| v.to_string()),
                    "closed_form": r.closed.a.map(|v| v.to_string()),
                    "agree": r.agree(),
                    "fixed_points": r.fixed.iter().map(|(s, x, k)| json!({
                        "value": s, "approx": x, "multiplicity": k,
                    })).collect::<Vec<_>>(),
                    "conjugation": r.conjugation,
                })
            })
            .collect();
        render("formulas", vec![], json!({ "all_agree": all_agree, "rows": table }))
    };
    Ok(Output {
        text,
        code: if all_agree { 0 } else { 1 },
    })
}

fn act(algebra: &Path, group: &Path, args: &SearchArgs, pretty: bool) -> CmdResult {
    let m = io::load_algebra(algebra)?;
    let (gm, gens) = io::load_group(group)?;
    if gm != m {
        return Err(usage(format!(
            "{} acts on a different algebra than {}",
            group.display(),
            algebra.display()
        )));
    }
    let params = params_of(args)?;
    let g = group_closure(&m, gens, DEFAULT_GROUP_CAP)?;
    let search = invariant_balanced_search(&m, &g, &params)?;
    let cube = select_invariant_cube(&m, &g, &search)?;
    let non_cubical = search
        .starts
        .iter()
        .filter(|s| s.record.is_cubical() == Some(false))
        .count();
    if pretty {
        eprintln!(
            "group of order {}, {} invariant balanced measure(s), invariant cube of dimension {}",
            g.order(),
            search.results.len(),
            cube.dim()
        );
    }
    let results = json!({
        "params": params_json(&params, &m),
        "group_order": g.order(),
        "unresolved_starts": search.unresolved(),
        "invariant_measures": search.results.iter().map(|(mu, c)| json!({
            "weights": weights_json(&m, mu),
            "cube_dim": c.cube.dim(),
        })).collect::<Vec<_>>(),
        "cube": {
            "points": cube.points.iter().map(|&p| show(&m, p)).collect::<Vec<_>>(),
            "certificate": certificate_json(&m, &cube),
            "setwise_invariant": true,
        },
    });
    let text = render("act", vec![digest(algebra)?, digest(group)?], results);
    if non_cubical > 0 {
        loud_counterexample(&format!("{non_cubical} invariant start(s)"));
        return Ok(Output { text, code: 1 });
    }
    Ok(Output::ok(text))
}

fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            let (a, b) = e
                .split_once('-')
                .ok_or_else(|| usage(format!("edge {e:?} is not of the form u-v")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("edge {e:?} has a non-numeric vertex")))
            };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn gen(kind: GenKind, output: Option<&Path>, pretty: bool) -> CmdResult {
    let spec = match kind {
        GenKind::Hypercube { n } => GeneratorSpec::Hypercube { n },
        GenKind::Tree { edges } => GeneratorSpec::Tree {
            edges: parse_edges(&edges)?,
        },
        GenKind::Grid { a, b } => GeneratorSpec::Grid { a, b },
        GenKind::Random { d, k, seed } => GeneratorSpec::RandomSubalgebra { d, k, seed },
    };
    let m = spec.build()?;
    if pretty {
        eprintln!("{}: {} points in {{0,1}}^{}", spec.label(), m.len(), m.dim());
    }
    let Some(path) = output else {
        return Ok(Output::ok(io::algebra_to_json(&m)));
    };
    io::save_algebra(&m, path)?;
    let mut results = json!({
        "output": path.display().to_string(),
        "spec": &spec,
        "points": m.len(),
        "ambient_dim": m.dim(),
    });
    if matches!(spec, GeneratorSpec::RandomSubalgebra { .. }) {
        results["prng"] = json!(PRNG_ALGORITHM);
    }
    Ok(Output::ok(render("gen", vec![], results)))
}
