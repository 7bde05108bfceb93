use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linrepair::blocks::{check_block_intersection_bound, random_family, Block};
use linrepair::code::{length_bound, max_spanning_family, random_mds_code, ArrayCode};
use linrepair::constructions::{
    build_exceptional, build_two_parity_code, hit_set_labels, published_hit_sets, regular_spread_converse_check,
    Construction, ExceptionalCase, Plan,
};
use linrepair::field::{Extension, Field};
use linrepair::geometry::{desarguesian_spread, is_spread, Pg3, TripleMode};
use linrepair::linalg::Subspace;
use linrepair::repair::{counting_bound, repair_report, Attainment, MDS_RETRY_CAP};
use linrepair::sim::simulate;

const BUDGET: u128 = 1_000_000;

fn report(criterion: u32, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = ok && elapsed <= limit;
    println!(
        "criterion {criterion}: {} ({detail}; {:.2}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
}

fn all_equal_bound(code: &ArrayCode, expected: i128) -> (bool, String) {
    let r = repair_report(code, BUDGET).expect("report");
    let a = &r.aggregates;
    let n = r.n as i128;
    let ok = r.search_mode.is_exhaustive()
        && r.bound == expected
        && a.beta_sum as i128 == n * expected
        && a.gamma_sum as i128 == n * expected
        && a.beta_max as i128 == expected
        && a.gamma_max as i128 == expected
        && r.all_attained()
        && r.violations.is_empty();
    (ok, format!("n={} bound={} beta_max={} gamma_max={}", r.n, r.bound, a.beta_max, a.gamma_max))
}

#[test]
fn criterion_01_bound_values() {
    let start = Instant::now();
    let got = [
        counting_bound(6, 2, 2, 3).unwrap(),
        counting_bound(7, 2, 2, 3).unwrap(),
        counting_bound(9, 2, 2, 4).unwrap(),
    ];
    let ok = got == [6, 8, 11];
    report(1, ok, start.elapsed(), Duration::from_secs(1), &format!("{got:?}"));
    assert!(ok);
    assert!(start.elapsed() < Duration::from_secs(1));
}

#[test]
fn criterion_02_two_parity_attainment() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let cases: Vec<(u32, usize)> = (8..=10).map(|n| (3, n)).chain((10..=17).map(|n| (4, n))).collect();
    for &(q, n) in &cases {
        let c = build_two_parity_code(q, 2, n).unwrap();
        let expected = 2 * (n as i128 - 1) - (q as i128 + 1);
        let (ok, detail) = all_equal_bound(&c.code, expected);
        if !ok {
            failures.push(format!("q={q} {detail}"));
        }
    }
    let ok = failures.is_empty();
    report(2, ok, start.elapsed(), Duration::from_secs(60), &format!("{} codes, failures {failures:?}", cases.len()));
    assert!(ok, "{failures:?}");
    assert!(start.elapsed() < Duration::from_secs(60));
}

#[test]
fn criterion_03_exceptional_cases() {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (case, expected) in [(ExceptionalCase::Q3N6, 6), (ExceptionalCase::Q3N7, 8), (ExceptionalCase::Q4N9, 11)] {
        let c = build_exceptional(case).unwrap();
        let (good, detail) = all_equal_bound(&c.code, expected);
        ok &= good;
        let Plan::Exceptional(plan) = &c.plan else { panic!("wrong plan") };
        let published = published_hit_sets(case.q()).unwrap();
        for (b, want) in plan.hit_sets.iter().zip(published.iter()) {
            let got: BTreeSet<String> = hit_set_labels(&c.ext, b).into_iter().collect();
            let want: BTreeSet<String> = want.iter().map(|s| s.to_string()).collect();
            ok &= got == want;
        }
        notes.push(format!("{case}: {detail}"));
    }
    report(3, ok, start.elapsed(), Duration::from_secs(10), &notes.join("; "));
    assert!(ok, "{notes:?}");
    assert!(start.elapsed() < Duration::from_secs(10));
}

#[test]
fn criterion_04_lower_bound_on_random_codes() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tested = 0;
    let mut violations = Vec::new();
    for (q, ell, r) in [(2u32, 2usize, 2usize), (3, 2, 2), (2, 2, 3), (2, 3, 2)] {
        let field = Field::of_order(q).unwrap();
        let max_n = length_bound(q, ell as u32, r as u32).unwrap() as usize;
        let lengths: Vec<usize> = (r + 1..=max_n).collect();
        let mut done = 0;
        let mut turn = 0;
        let mut dead: BTreeSet<usize> = BTreeSet::new();
        while done < 50 && dead.len() < lengths.len() {
            let n = lengths[turn % lengths.len()];
            turn += 1;
            if dead.contains(&n) {
                continue;
            }
            let Some(code) = random_mds_code(&field, n, ell, r, MDS_RETRY_CAP, &mut rng).unwrap() else {
                dead.insert(n);
                continue;
            };
            let rep = repair_report(&code, BUDGET).unwrap();
            assert!(rep.search_mode.is_exhaustive());
            for x in &rep.nodes {
                if (x.beta as i128) < rep.bound || x.gamma < x.beta {
                    violations.push(format!("q={q} ℓ={ell} r={r} n={n} node {}", x.node));
                }
            }
            violations.extend(rep.violations);
            done += 1;
            tested += 1;
        }
    }
    let ok = tested >= 200 && violations.is_empty();
    report(4, ok, start.elapsed(), Duration::from_secs(300), &format!("{tested} codes, {} violations", violations.len()));
    assert!(ok, "{violations:?}");
    assert!(start.elapsed() < Duration::from_secs(300));
}

#[test]
fn criterion_05_strictness_for_three_parities() {
    let start = Instant::now();
    let sweep = linrepair::repair::verify_strictness_sweep(2, 2, 3, 50, 77, BUDGET).unwrap();
    let ok = sweep.codes_tested >= 50
        && sweep.equality_cases == 0
        && sweep.violations.is_empty()
        && sweep.min_slack.is_some_and(|s| s > 0);
    report(
        5,
        ok,
        start.elapsed(),
        Duration::from_secs(120),
        &format!(
            "{} codes, per length {:?}, no code for {:?}, min slack {:?}",
            sweep.codes_tested, sweep.per_length, sweep.generation_failures, sweep.min_slack
        ),
    );
    assert!(ok, "{sweep:?}");
    assert!(start.elapsed() < Duration::from_secs(120));
}

#[test]
fn criterion_06_length_bound_is_sharp() {
    let start = Instant::now();
    let f2 = Field::of_order(2).unwrap();
    let family = max_spanning_family(&f2, 2, 2, BUDGET).unwrap();
    let ext = Extension::standard(3, 2).unwrap();
    let des = desarguesian_spread(&ext).spread.members;
    let code = ArrayCode::from_subspaces(ext.base().clone(), &des).unwrap();
    let pairwise = (0..des.len())
        .all(|i| (i + 1..des.len()).all(|j| des[i].intersect_dim(ext.base(), &des[j]).unwrap() == 0));
    let ok = family.len() == 5
        && des.len() == 10
        && length_bound(3, 2, 2).unwrap() == 10
        && pairwise
        && code.is_mds(BUDGET).unwrap().is_mds();
    report(
        6,
        ok,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("GF(2) maximum {}, GF(3) spread {}", family.len(), des.len()),
    );
    assert!(ok);
    assert!(start.elapsed() < Duration::from_secs(10));
}

fn random_skew_triple(pg: &Pg3, rng: &mut ChaCha8Rng) -> [Subspace; 3] {
    let f = pg.field();
    loop {
        let pick: Vec<&Subspace> = pg.lines().choose_multiple(rng, 3).collect();
        let skew = (0..3).all(|i| (i + 1..3).all(|j| pick[i].intersect_dim(f, pick[j]).unwrap() == 0));
        if skew {
            return [pick[0].clone(), pick[1].clone(), pick[2].clone()];
        }
    }
}

#[test]
fn criterion_07_geometry_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut problems = Vec::new();
    for q in [2u32, 3, 4] {
        let ext = Extension::standard(q, 2).unwrap();
        let spread = desarguesian_spread(&ext).spread;
        let pg = Pg3::new(ext.base().clone()).unwrap();
        let f = pg.field();
        if spread.len() != (q * q + 1) as usize || !is_spread(f, &spread.members).unwrap().is_spread() {
            problems.push(format!("q={q}: spread size {}", spread.len()));
        }
        if !pg.is_regular_spread(&spread, TripleMode::auto(q, 1)).unwrap().regular {
            problems.push(format!("q={q}: Desarguesian spread not regular"));
        }
        let outside: Vec<&Subspace> = pg.lines().iter().filter(|l| !spread.contains(l)).collect();
        for _ in 0..50 {
            let m = outside.choose(&mut rng).unwrap();
            let reg = pg.transversal_regulus(m, &spread).unwrap();
            if reg.lines.len() != q as usize + 1 || !reg.lines.iter().all(|l| spread.contains(l)) {
                problems.push(format!("q={q}: R(m) has {} lines", reg.lines.len()));
            }
        }
        let mut reguli = Vec::new();
        for _ in 0..100 {
            let [a, b, c] = random_skew_triple(&pg, &mut rng);
            let reg = pg.regulus_through(&a, &b, &c).unwrap();
            let mut other: Vec<&Subspace> = reg.lines.iter().collect();
            other.shuffle(&mut rng);
            let again = pg.regulus_through(other[0], other[1], other[2]).unwrap();
            if again != reg || reg.lines.len() != q as usize + 1 || !reg.contains(&a) {
                problems.push(format!("q={q}: regulus through a triple is not unique"));
            }
            reguli.push(reg);
        }
        for _ in 0..100 {
            let x = reguli.choose(&mut rng).unwrap();
            let y = reguli.choose(&mut rng).unwrap();
            if x == y {
                continue;
            }
            let common = x.lines.iter().filter(|l| y.contains(l)).count();
            if common > 2 {
                problems.push(format!("q={q}: two reguli share {common} lines"));
            }
        }
    }
    let ok = problems.is_empty();
    report(7, ok, start.elapsed(), Duration::from_secs(120), &format!("problems {problems:?}"));
    assert!(ok, "{problems:?}");
    assert!(start.elapsed() < Duration::from_secs(120));
}

#[test]
fn criterion_08_spread_converse() {
    let start = Instant::now();
    let rep = regular_spread_converse_check(3, u128::MAX, 0, 0, BUDGET).unwrap();
    let five = rep.below.iter().find(|b| b.n == 5).expect("n = 5 searched");
    let admissible_ok = rep.threshold == 6
        && rep.max_n == 10
        && rep.admissible.iter().all(|a| a.lines_in_spread && a.attained);
    // As worded: no node of any 5-line code reaches α_i = 4.
    let literal = five.subsets_checked == 252 && five.codes_with_attaining_node == 0;
    // The bound itself (every node attaining) is never met below the threshold.
    let bound_form = rep.below.iter().all(|b| b.codes_all_attaining == 0);
    let ok = admissible_ok && literal;
    report(
        8,
        ok,
        start.elapsed(),
        Duration::from_secs(600),
        &format!(
            "n=6..10 attained: {admissible_ok}; 5-line codes with an attaining node: {} of {} (e.g. {:?}); \
             5-line codes meeting the bound: {}; any shorter code meeting the bound: {}",
            five.codes_with_attaining_node,
            five.subsets_checked,
            five.example_attaining_node,
            five.codes_all_attaining,
            !bound_form
        ),
    );
    assert!(admissible_ok && bound_form, "{rep:?}");
    assert!(literal, "a 5-line code has a node with α_i = 4: {:?}", five.example_attaining_node);
    assert!(start.elapsed() < Duration::from_secs(600));
}

fn labelled_family(groups: &[Vec<&str>]) -> Vec<Block> {
    let ground: BTreeSet<&str> = groups.iter().flatten().copied().collect();
    let ground: Vec<&str> = ground.into_iter().collect();
    groups
        .iter()
        .map(|g| g.iter().map(|s| ground.iter().position(|x| x == s).unwrap()).collect())
        .collect()
}

#[test]
fn criterion_09_block_intersection_checker() {
    let start = Instant::now();
    let mut ok = true;
    let q3 = labelled_family(&published_hit_sets(3).unwrap());
    let r3 = check_block_intersection_bound(&q3);
    ok &= r3.holds == Some(true) && r3.t == 4 && r3.required == 6 && r3.n_effective == 6;
    let q4 = labelled_family(&published_hit_sets(4).unwrap());
    let r4 = check_block_intersection_bound(&q4);
    ok &= r4.holds == Some(true) && r4.t == 5 && r4.required == 9 && r4.n_effective == 9;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    let mut violations = 0;
    while checked < 10_000 {
        let t = rng.gen_range(2..8);
        let n = rng.gen_range(t + 1..=3 * t + 3);
        let Some(fam) = random_family(&mut rng, n, t, 10) else { continue };
        let r = check_block_intersection_bound(&fam);
        if r.hypothesis_violation.is_some() {
            continue;
        }
        checked += 1;
        if r.holds != Some(true) {
            violations += 1;
        }
    }
    ok &= violations == 0;
    report(
        9,
        ok,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("published families {:?}/{:?}, {checked} random families, {violations} violations", r3.holds, r4.holds),
    );
    assert!(ok);
    assert!(start.elapsed() < Duration::from_secs(60));
}

fn all_constructions() -> Vec<(String, Construction)> {
    let mut out = Vec::new();
    for n in 8..=10 {
        out.push((format!("q3n{n}"), build_two_parity_code(3, 2, n).unwrap()));
    }
    for n in 10..=17 {
        out.push((format!("q4n{n}"), build_two_parity_code(4, 2, n).unwrap()));
    }
    for case in ExceptionalCase::ALL {
        out.push((case.to_string(), build_exceptional(case).unwrap()));
    }
    out
}

#[test]
fn criterion_10_simulator_fidelity() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut trials = 0;
    for (name, c) in all_constructions() {
        let n = c.code.n();
        let expected = 2 * (n - 1) - (c.code.q() as usize + 1);
        for t in 0..100 {
            let w = &c.witnesses[t % n];
            let s = simulate(&c.code, w, 1, 1000 + t as u64).unwrap();
            trials += 1;
            if !s.passed() || s.downloaded != expected || s.accessed != expected {
                failures.push(format!("{name} trial {t}: {s:?}"));
            }
        }
    }
    let ok = failures.is_empty();
    report(10, ok, start.elapsed(), Duration::from_secs(60), &format!("{trials} trials, {} failures", failures.len()));
    assert!(ok, "{failures:?}");
    assert!(start.elapsed() < Duration::from_secs(60));
}

#[test]
fn planted_witnesses_hit_every_attainment_flag() {
    for (_, c) in all_constructions() {
        let r = repair_report(&c.code, BUDGET).unwrap();
        assert_eq!(r.attainment.beta_avg, Attainment::Attained);
    }
}
