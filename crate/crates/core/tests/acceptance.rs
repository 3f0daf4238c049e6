//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use medlab_core::axioms::{validate_axioms, MedianTable};
use medlab_core::dynamics::{
    ai_closed_form, ai_recurrence, count_xi_bruteforce, mu3_mass_identity_check,
    phi_conjugation_check, phi_fixed_points, phi_fixed_points_open, INITIAL_COUNTS,
};
use medlab_core::generators::{grid, hypercube, path, random_subalgebra, star, tree_with_vertices};
use medlab_core::groups::{
    brute_force_automorphisms, group_closure, invariant_cube, validate_automorphism,
    DEFAULT_GROUP_CAP,
};
use medlab_core::measures::{balance_search, phi, rational, wall_masses, StartRecord};
use medlab_core::walls::{brute_force_halfspaces, delta, enumerate_walls, gate_representative, is_transverse};
use medlab_core::{BigRational, Measure, MedianAlgebra, PointId, SearchParams, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn t_grid() -> Vec<BigRational> {
    [(0, 1), (1, 5), (1, 3), (1, 2), (3, 4), (1, 1)]
        .iter()
        .map(|&(p, q)| rational(p, q))
        .collect()
}

fn counts() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 1..=7 {
        let brute = count_xi_bruteforce(n).unwrap();
        let rec = ai_recurrence(n).unwrap();
        let closed = ai_closed_form(n).unwrap();
        if brute != rec || rec != closed || brute.total() != 1u128 << (2 * n) {
            bad.push(n);
        }
        if n == 1 && brute.a != INITIAL_COUNTS {
            bad.push(n);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs <= 60.0,
        format!("n = 1..7, mismatches at {bad:?}, {secs:.2}s"),
    )
}

fn conjugation() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=5 {
        for t in t_grid() {
            if !phi_conjugation_check(n, &t).unwrap() {
                bad.push(format!("({n}, {t})"));
            }
        }
    }
    outcome(bad.is_empty(), format!("30 exact checks, failures {bad:?}"))
}

fn mass_identity() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=5 {
        for t in t_grid() {
            if !mu3_mass_identity_check(n, &t).unwrap() {
                bad.push(format!("({n}, {t})"));
            }
        }
    }
    outcome(bad.is_empty(), format!("30 exact checks, failures {bad:?}"))
}

fn fixed_points() -> Outcome {
    let half = rational(1, 2);
    let mut bad = Vec::new();
    for n in 2..=30 {
        let open = phi_fixed_points_open(n).unwrap();
        if open.len() != 1 || open[0].value.as_rational() != Some(&half) {
            bad.push(n);
        }
    }
    let expected = [rational(0, 1), half.clone(), rational(1, 1)];
    for n in [1, 2] {
        let all: Vec<_> = phi_fixed_points(n)
            .unwrap()
            .into_iter()
            .map(|p| p.value.as_rational().cloned())
            .collect();
        if all != expected.iter().cloned().map(Some).collect::<Vec<_>>() {
            bad.push(n);
        }
    }
    outcome(bad.is_empty(), format!("n = 1..30, failures {bad:?}"))
}

fn two_point_scan() -> Outcome {
    let m = hypercube(1).unwrap();
    let den = 1i64 << 10;
    let mut found = Vec::new();
    for a in 0..=den {
        let mu = Measure::new(vec![rational(den - a, den), rational(a, den)]).unwrap();
        if phi(&m, &mu).unwrap() == mu {
            found.push(rational(a, den));
        }
    }
    let expected = vec![rational(0, 1), rational(1, 2), rational(1, 1)];
    let shown: Vec<String> = found.iter().map(|q| q.to_string()).collect();
    outcome(
        found == expected,
        format!("{} dyadic measures, fixed at mass of 1 = {shown:?}", den + 1),
    )
}

fn corpus() -> Vec<(String, MedianAlgebra)> {
    let mut out = Vec::new();
    for n in 0..=4 {
        out.push((format!("hypercube({n})"), hypercube(n).unwrap()));
    }
    for v in 1..=6 {
        out.push((format!("path({v})"), path(v).unwrap()));
    }
    for l in 1..=5 {
        out.push((format!("star({l})"), star(l).unwrap()));
    }
    out.push(("grid(2,3)".into(), grid(2, 3).unwrap()));
    out.push(("grid(3,3)".into(), grid(3, 3).unwrap()));
    for k in [3, 5, 8] {
        for seed in 0..10 {
            out.push((
                format!("random_subalgebra(6,{k},{seed})"),
                random_subalgebra(6, k, seed).unwrap(),
            ));
        }
    }
    out
}

struct SearchRun {
    name: String,
    algebra: MedianAlgebra,
    records: Vec<StartRecord>,
}

fn theorem_a(runs: &[SearchRun]) -> Outcome {
    let mut starts = 0;
    let mut snapped = 0;
    let mut counterexamples = Vec::new();
    for run in runs {
        for r in &run.records {
            starts += 1;
            if r.snapped.is_some() {
                snapped += 1;
            }
            if r.is_cubical() == Some(false) {
                counterexamples.push(format!("{} seed {}", run.name, r.start_seed));
            }
        }
    }
    let rate = 100.0 * snapped as f64 / starts as f64;
    outcome(
        counterexamples.is_empty(),
        format!(
            "{} algebras, {starts} starts, {snapped} snapped ({rate:.1}%, target 90%), \
             non-cubical {counterexamples:?}",
            runs.len()
        ),
    )
}

fn partition_set(sets: impl Iterator<Item = Subset>) -> BTreeSet<Vec<usize>> {
    sets.map(|s| s.iter().map(PointId::index).collect()).collect()
}

fn wall_oracle(corpus: &[(String, MedianAlgebra)]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, m) in corpus.iter().filter(|(_, m)| m.len() <= 14) {
        checked += 1;
        let walls = enumerate_walls(m).unwrap();
        let fast = partition_set(
            walls
                .iter()
                .flat_map(|w| [w.positive.clone(), w.negative()]),
        );
        let slow = partition_set(brute_force_halfspaces(m).unwrap().into_iter().map(|h| h.members));
        if fast != slow || fast.len() != 2 * walls.len() {
            bad.push(name.clone());
        }
    }
    outcome(bad.is_empty(), format!("{checked} algebras, mismatches {bad:?}"))
}

fn wall_masses_check(runs: &[SearchRun]) -> Outcome {
    let allowed = [rational(0, 1), rational(1, 2), rational(1, 1)];
    let half = rational(1, 2);
    let mut measures = 0;
    let mut full = 0;
    let mut bad = Vec::new();
    for run in runs {
        let m = &run.algebra;
        let walls = enumerate_walls(m).unwrap();
        let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
        for r in &run.records {
            let Some(mu) = &r.snapped else { continue };
            if !seen.insert(mu.weights().iter().map(|w| w.to_string()).collect()) {
                continue;
            }
            measures += 1;
            let masses = wall_masses(m, mu);
            if masses
                .iter()
                .any(|(p, n)| !allowed.contains(p) || !allowed.contains(n))
            {
                bad.push(format!("{} seed {}: mass outside {{0,1/2,1}}", run.name, r.start_seed));
            }
            if mu.support().len() == m.len() {
                full += 1;
                if masses.iter().any(|(p, n)| *p != half || *n != half) {
                    bad.push(format!("{}: full support, side mass not 1/2", run.name));
                }
                for (i, w1) in walls.iter().enumerate() {
                    for w2 in &walls[i + 1..] {
                        if !is_transverse(w1, w2).unwrap() {
                            bad.push(format!("{}: full support, walls not transverse", run.name));
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{measures} distinct balanced measures ({full} fully supported), failures {bad:?}"),
    )
}

fn perm_of(m: &MedianAlgebra, f: impl Fn(u64) -> u64) -> Vec<PointId> {
    m.points()
        .map(|p| {
            let img = medlab_core::BitVector::new(f(p.bits()), m.dim()).unwrap();
            m.id_of(img).unwrap()
        })
        .collect()
}

fn corollary_b() -> Outcome {
    let params = SearchParams {
        starts: 20,
        ..SearchParams::default()
    };
    let mut lines = Vec::new();
    let mut pass = true;

    let c2 = hypercube(2).unwrap();
    let rot = perm_of(&c2, |w| [0b01, 0b11, 0b00, 0b10][w as usize]);
    let g = group_closure(&c2, vec![validate_automorphism(&c2, rot).unwrap()], DEFAULT_GROUP_CAP)
        .unwrap();
    let cube = invariant_cube(&c2, &g, &params);
    let ok = cube.as_ref().is_ok_and(|c| c.point_set(4) == c2.full() && c.dim() == 2);
    pass &= ok;
    lines.push(format!("rotation on 2-cube: {}", if ok { "full 2-cube" } else { "FAILED" }));

    let (s, v) = tree_with_vertices(&[(0, 1), (0, 2), (0, 3)]).unwrap();
    let g = group_closure(&s, brute_force_automorphisms(&s).unwrap(), DEFAULT_GROUP_CAP).unwrap();
    let cube = invariant_cube(&s, &g, &params);
    let ok = g.order() == 6 && cube.as_ref().is_ok_and(|c| c.points == vec![v[0]]);
    pass &= ok;
    lines.push(format!("S3 on star: {}", if ok { "{center}" } else { "FAILED" }));

    let c3 = hypercube(3).unwrap();
    let swap01 = perm_of(&c3, |w| (w & 0b001) | ((w & 0b100) >> 1) | ((w & 0b010) << 1));
    let cycle = perm_of(&c3, |w| ((w << 1) & 0b110) | (w >> 2));
    let gens = vec![
        validate_automorphism(&c3, swap01).unwrap(),
        validate_automorphism(&c3, cycle).unwrap(),
    ];
    let g = group_closure(&c3, gens, DEFAULT_GROUP_CAP).unwrap();
    let cube = invariant_cube(&c3, &g, &params);
    let ok = g.order() == 6 && cube.as_ref().is_ok_and(|c| c.point_set(8) == c3.full());
    pass &= ok;
    lines.push(format!("S3 on 3-cube coordinates: {}", if ok { "full 3-cube" } else { "FAILED" }));

    outcome(pass, lines.join("; "))
}

fn median_interval(m: &MedianAlgebra, x: PointId, y: PointId) -> Subset {
    Subset::from_ids(m.len(), m.ids().filter(|&u| m.median(x, y, u) == u))
}

fn random_hull(m: &MedianAlgebra, rng: &mut ChaCha8Rng, max_gen: usize) -> Subset {
    let k = rng.gen_range(1..=max_gen);
    let s = Subset::from_ids(
        m.len(),
        (0..k).map(|_| PointId::from_index(rng.gen_range(0..m.len()))),
    );
    m.convex_hull(&s)
}

fn micro_suites() -> Outcome {
    const TRIALS: usize = 1000;
    let mut failures: Vec<String> = Vec::new();

    let small: Vec<(String, MedianAlgebra)> =
        corpus().into_iter().filter(|(_, m)| m.len() <= 16).collect();
    for (name, m) in &small {
        if validate_axioms(&MedianTable::of_algebra(m)).is_err() {
            failures.push(format!("Med 1-3 on {name}"));
        }
    }

    let pool: Vec<MedianAlgebra> = (0..40)
        .map(|i| random_subalgebra(3 + (i % 4) as usize, 2 + (i % 7) as usize, 1000 + i).unwrap())
        .chain([hypercube(4).unwrap(), grid(3, 3).unwrap(), star(4).unwrap()])
        .filter(|m| m.len() <= 16)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pick = |rng: &mut ChaCha8Rng| pool[rng.gen_range(0..pool.len())].clone();
    let mut helly_nonvacuous = 0;

    for trial in 0..TRIALS {
        let m = pick(&mut rng);
        let pt = |rng: &mut ChaCha8Rng| PointId::from_index(rng.gen_range(0..m.len()));
        let (x, y, z) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));

        // Interval laws.
        let ixz = m.interval(x, z);
        if ixz != median_interval(&m, x, z) {
            failures.push(format!("interval definition, trial {trial}"));
        }
        let ixy = m.interval(x, y);
        let iyz = m.interval(y, z);
        let y_in = ixz.contains(y);
        if y_in && !ixy.is_subset(&ixz) {
            failures.push(format!("interval monotonicity, trial {trial}"));
        }
        let meet_is_y = ixy.intersection(&iyz) == Subset::singleton(m.len(), y);
        if y_in != meet_is_y {
            failures.push(format!("interval meet law, trial {trial}"));
        }

        // Helly on three or four random convex sets.
        let sets: Vec<Subset> = (0..rng.gen_range(3..=4))
            .map(|_| random_hull(&m, &mut rng, 4))
            .collect();
        let pairwise = sets
            .iter()
            .enumerate()
            .all(|(i, a)| sets[i + 1..].iter().all(|b| !a.is_disjoint(b)));
        if pairwise {
            helly_nonvacuous += 1;
            let all = sets
                .iter()
                .skip(1)
                .fold(sets[0].clone(), |acc, s| acc.intersection(s));
            if all.is_empty() {
                failures.push(format!("Helly, trial {trial}"));
            }
        }

        // Gate uniqueness, by scanning every member of C.
        let c = random_hull(&m, &mut rng, 3);
        let gates: Vec<PointId> = c
            .iter()
            .filter(|&g| c.iter().all(|w| median_interval(&m, x, w).contains(g)))
            .collect();
        if gates.len() != 1 || m.gate(&c, x).ok() != Some(gates[0]) {
            failures.push(format!("gate uniqueness, trial {trial}"));
        }

        // Composition: C2 inside C1.
        let c1 = random_hull(&m, &mut rng, 4);
        let members = c1.to_vec();
        let c2 = m.convex_hull(&Subset::from_ids(
            m.len(),
            (0..rng.gen_range(1..=2)).map(|_| members[rng.gen_range(0..members.len())]),
        ));
        let direct = m.gate(&c2, x).unwrap();
        let via = m.gate(&c2, m.gate(&c1, x).unwrap()).unwrap();
        if !c2.is_subset(&c1) || direct != via {
            failures.push(format!("gate composition, trial {trial}"));
        }

        // Representative: Δ(A, B) = Δ(a, B), with half-spaces from the
        // brute-force scan.
        let a_set = random_hull(&m, &mut rng, 3);
        let rest = a_set.complement();
        if rest.is_empty() {
            continue;
        }
        let rest_ids = rest.to_vec();
        let b = Subset::from_ids(
            m.len(),
            (0..rng.gen_range(1..=3)).map(|_| rest_ids[rng.gen_range(0..rest_ids.len())]),
        );
        let halves = brute_force_halfspaces(&m).unwrap();
        let separating = |a: &Subset| -> BTreeSet<Vec<usize>> {
            partition_set(
                halves
                    .iter()
                    .filter(|h| a.is_subset(&h.members) && b.is_disjoint(&h.members))
                    .map(|h| h.members.clone()),
            )
        };
        match gate_representative(&m, &a_set, &b) {
            Ok(a) => {
                let single = Subset::singleton(m.len(), a);
                let fast = partition_set(delta(&m, &a_set, &b).unwrap().into_iter().map(|h| h.members));
                if !a_set.contains(a) || separating(&a_set) != separating(&single) || fast != separating(&a_set) {
                    failures.push(format!("representative, trial {trial}"));
                }
            }
            Err(e) => failures.push(format!("representative error {e}, trial {trial}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} algebras with exhaustive axioms, {TRIALS} trials per law \
             ({helly_nonvacuous} Helly trials with pairwise-meeting sets), failures {:?}",
            small.len(),
            &failures[..failures.len().min(5)]
        ),
    )
}

fn main() -> ExitCode {
    // Cargo passes harness flags (e.g. `--nocapture`, filters); none apply.
    let corpus = corpus();
    let params = SearchParams::default();
    let search_start = Instant::now();
    let runs: Vec<SearchRun> = corpus
        .iter()
        .map(|(name, m)| SearchRun {
            name: name.clone(),
            algebra: m.clone(),
            records: balance_search(m, &params).unwrap(),
        })
        .collect();
    let search_secs = search_start.elapsed().as_secs_f64();

    let results: Vec<(&str, Outcome)> = vec![
        ("1 a_i counts agree", counts()),
        ("2 conjugation identity", conjugation()),
        ("3 mass identity", mass_identity()),
        ("4 fixed points of phi", fixed_points()),
        ("5 balanced measures on {0,1}", two_point_scan()),
        ("6 balanced measures are cubical", theorem_a(&runs)),
        ("7 walls match brute force", wall_oracle(&corpus)),
        ("8 wall masses", wall_masses_check(&runs)),
        ("9 invariant cubes", corollary_b()),
        ("10 axiom and lemma suites", micro_suites()),
    ];
    let mut all = true;
    for (name, o) in &results {
        all &= o.pass;
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("(balance search over the corpus took {search_secs:.1}s)");
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
