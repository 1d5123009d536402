//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line.
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run.

use std::time::{Duration, Instant};

use cryptocomb::braid::{random_braid_with, random_knot_with, BraidWord, MarkovMove, RelationKind, Sign};
use cryptocomb::compose::{compose, ComposeVariant};
use cryptocomb::entropy::{entropy_report, info_flow, psi_values, EntropyError, SimpleGraph};
use cryptocomb::fixtures;
use cryptocomb::jones::{derive_key, jones_polynomial, jones_with, mu_power, r_matrix, JonesOptions};
use cryptocomb::laurent::LaurentPoly;
use cryptocomb::protocol::{eve_attack, random_braids, run_multi_party, run_two_party, ProtocolConfig};
use cryptocomb::pushgame::{
    class_count, closed_form_count, count_solutions, decide_colorable, enumerate_solutions, exact_count, hexagonal,
    invariant_vector, k4_triangles, proper_coloring, random_board, random_colorable_board, solvable_by_invariant,
    solve, triangular, Colorability, PushPlan, SimplexBoard,
};
use cryptocomb::succession::{
    bernoulli_form, joint_norep, limit_succession, power_sum, simulate_urn, succ_binom_rep, succ_norep,
    succ_uniform_rep, Prior, Replacement, UrnModel,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Criteria that cannot hold as stated. See the README for the analysis.
const KNOWN_RED: &[&str] = &["push counts: Triangular(4) all-heads to all-tails has 2 solutions"];

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn jones(b: &BraidWord) -> Result<LaurentPoly, String> {
    jones_with(b, &JonesOptions { strand_cap: 12, ..JonesOptions::simplifying() })
        .map(|r| r.polynomial)
        .map_err(|e| format!("{e} on {:?}", b.signed_word()))
}

fn jones_example() -> Outcome {
    let start = Instant::now();
    let r = jones_polynomial(&fixtures::example_knot_four_strands()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(r.trace_part == LaurentPoly::from_t_terms(fixtures::EXAMPLE_KNOT_TRACE), || {
        format!("trace part {}", r.trace_part)
    })?;
    check(r.exponent_sum == -5, || format!("exponent sum {}", r.exponent_sum))?;
    check(r.polynomial == LaurentPoly::from_t_terms(fixtures::EXAMPLE_KNOT_JONES), || {
        format!("polynomial {}", r.polynomial)
    })?;
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:?}", r.polynomial))
}

fn key_value() -> Outcome {
    let p = LaurentPoly::from_t_terms(fixtures::EXAMPLE_KNOT_JONES);
    let key = derive_key(&p, 3).map_err(|e| e.to_string())?;
    // Σ a_i α_i^3 over the listed terms, by hand
    let oracle: i64 = fixtures::EXAMPLE_KNOT_JONES.iter().map(|&(e, c)| c * e.pow(3)).sum();
    check(key == BigInt::from(108) && key == BigInt::from(oracle), || format!("key {key}, oracle {oracle}"))?;
    Ok("108".into())
}

fn unknot() -> Outcome {
    let j = jones_polynomial(&fixtures::unknot()).map_err(|e| e.to_string())?.polynomial;
    check(j == LaurentPoly::one(), || format!("Jones {j}"))?;
    // diagonal of R is (1, 0, 1 - t, 1) and of μ⊗μ is (1, t, t, t²)
    let t = |c: i64, e: i64| LaurentPoly::t_monomial(c, e);
    let by_hand = &(&t(1, 0) + &(&(&t(1, 0) - &t(1, 1)) * &t(1, 1))) + &t(1, 2);
    let trace = r_matrix().mul(&mu_power(2)).map_err(|e| e.to_string())?.trace();
    let one_plus_t = LaurentPoly::from_t_terms([(0, 1), (1, 1)]);
    check(trace == by_hand && trace == one_plus_t, || format!("trace {trace}"))?;
    Ok("V = 1, tr = 1 + t".into())
}

fn random_move(rng: &mut ChaCha8Rng, b: &BraidWord) -> Option<BraidWord> {
    match rng.gen_range(0..5) {
        0 => {
            let len = rng.gen_range(1..=3);
            let gamma = random_braid_with(rng, b.strands(), len).ok()?;
            b.markov_move(&MarkovMove::Conjugate(gamma)).ok()
        }
        1 if b.strands() < 6 => {
            let sign = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
            b.markov_move(&MarkovMove::Stabilize(sign)).ok()
        }
        2 if b.can_destabilize() => b.markov_move(&MarkovMove::Destabilize).ok(),
        3 => {
            let sites = b.relation_sites(RelationKind::FarCommute);
            let &(p, d) = sites.get(rng.gen_range(0..sites.len().max(1)))?;
            b.apply_relation(p, RelationKind::FarCommute, d).ok()
        }
        _ => {
            let sites = b.relation_sites(RelationKind::BraidRelation);
            let &(p, d) = sites.get(rng.gen_range(0..sites.len().max(1)))?;
            b.apply_relation(p, RelationKind::BraidRelation, d).ok()
        }
    }
}

fn markov_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let plain = JonesOptions::default();
    let (mut applied, mut failures) = (0, 0);
    while applied < 600 {
        let mut b = random_knot_with(&mut rng, 5, 10);
        let base = jones_with(&b, &plain).map_err(|e| e.to_string())?.polynomial;
        for _ in 0..12 {
            let Some(next) = random_move(&mut rng, &b) else { continue };
            if next.strands() > 6 {
                continue;
            }
            applied += 1;
            if jones_with(&next, &plain).map_err(|e| e.to_string())?.polynomial != base {
                failures += 1;
            }
            b = next;
        }
    }
    check(failures == 0, || format!("{failures} of {applied} moves changed the polynomial"))?;
    Ok(format!("{applied} moves, 0 failures"))
}

fn composition() -> Outcome {
    let corpus = random_braids(50, 100, 4, 8);
    let mut pairs = 0;
    for pair in corpus.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let product = &jones(a)? * &jones(b)?;
        for v in [ComposeVariant::Conjugate, ComposeVariant::Shift] {
            let c = compose(a, b, v).map_err(|e| e.to_string())?;
            check(jones(&c)? == product, || format!("{v:?} on {:?} and {:?}", a.signed_word(), b.signed_word()))?;
        }
        pairs += 1;
    }
    let small = random_braids(20, 60, 3, 6);
    let mut triples = 0;
    for t in small.chunks(3) {
        let (a, b, c) = (&t[0], &t[1], &t[2]);
        let v = ComposeVariant::Conjugate;
        let left = compose(&compose(a, b, v).map_err(|e| e.to_string())?, c, v).map_err(|e| e.to_string())?;
        let right = compose(a, &compose(b, c, v).map_err(|e| e.to_string())?, v).map_err(|e| e.to_string())?;
        check(jones(&left)? == jones(&right)?, || format!("triple {triples}"))?;
        triples += 1;
    }
    Ok(format!("{pairs} pairs x 2 variants, {triples} triples"))
}

fn protocol() -> Outcome {
    let mut eve = 0;
    for s in 0..100u64 {
        let b = random_braids(1000 + s, 3, 3, 6);
        let cfg = ProtocolConfig { seed: s, ..ProtocolConfig::default() };
        let out = run_two_party(&b[0], &b[1], &b[2], &cfg).map_err(|e| format!("session {s}: {e}"))?;
        let stolen = eve_attack(&out.transcript, cfg.key_power).map_err(|e| format!("eve {s}: {e}"))?;
        if &stolen == out.shared_key() {
            eve += 1;
        }
    }
    for s in 0..50u64 {
        let b = random_braids(5000 + s, 3, 3, 5);
        let cfg = ProtocolConfig { seed: s, ..ProtocolConfig::default() };
        run_multi_party(&b[0], &b[1..], &cfg).map_err(|e| format!("three-party {s}: {e}"))?;
    }
    check(eve == 100, || format!("eve recovered {eve}/100"))?;
    Ok("100/100 two-party, 50/50 three-party, eve 100/100".into())
}

fn succession_table() -> Outcome {
    let u = |g, k| succ_uniform_rep(g, k).map_err(|e| e.to_string());
    let b = |g, k| succ_binom_rep(g, k).map_err(|e| e.to_string());
    let cases = [
        (u(2, 2)?, ratio(9, 10)),
        (u(3, 3)?, ratio(49, 54)),
        (u(5, 3)?, ratio(979, 1125)),
        (b(3, 3)?, ratio(22, 27)),
        (b(5, 3)?, ratio(18, 25)),
        (joint_norep(5, 3, Prior::Uniform).map_err(|e| e.to_string())?, ratio(1, 2)),
        (succ_norep(5, 3, Prior::Uniform).map_err(|e| e.to_string())?, ratio(4, 5)),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        check(got == want, || format!("entry {i}: {got} != {want}"))?;
    }
    for g in 1..12u64 {
        for k in 0..g {
            let joint = joint_norep(g, k, Prior::Binomial).map_err(|e| e.to_string())?;
            check(joint == BigRational::new(1.into(), BigInt::from(2).pow(k as u32)), || format!("joint {g} {k}"))?;
            let cond = succ_norep(g, k, Prior::Binomial).map_err(|e| e.to_string())?;
            check(cond == ratio(1, 2), || format!("conditional {g} {k}"))?;
        }
    }
    Ok("all exact".into())
}

fn succession_limits() -> Outcome {
    for prior in [Prior::Uniform, Prior::Binomial] {
        for k in [1u64, 2, 3, 5, 10] {
            let limit = limit_succession(k, prior);
            let gap = |g| -> Result<BigRational, String> {
                let v = UrnModel::new(g, prior, Replacement::With)
                    .and_then(|m| m.succession(k))
                    .map_err(|e| e.to_string())?;
                Ok(num_traits::Signed::abs(&(v - &limit)))
            };
            let (a, b, c) = (gap(10)?, gap(100)?, gap(1000)?);
            check(a > b && b > c, || format!("{prior:?} k={k}: gaps {a}, {b}, {c}"))?;
        }
    }
    let mut grid = 0;
    for g in 2..=20u64 {
        let mut prev = BigRational::zero();
        for k in 1..=200u64 {
            let v = succ_uniform_rep(g, k).map_err(|e| e.to_string())?;
            let base = ratio(g as i64 - 1, g as i64);
            let bound = BigRational::one() - BigRational::from_integer((g - 1).into()) * Pow::pow(&base, k as u32);
            check(v > bound, || format!("bound fails at G={g}, k={k}"))?;
            check(v > prev, || format!("not increasing at G={g}, k={k}"))?;
            prev = v;
            grid += 1;
        }
    }
    let configs = [
        (2, Prior::Uniform, Replacement::With, 2),
        (5, Prior::Uniform, Replacement::With, 3),
        (4, Prior::Binomial, Replacement::With, 2),
        (5, Prior::Uniform, Replacement::Without, 3),
        (5, Prior::Binomial, Replacement::Without, 3),
        (8, Prior::Binomial, Replacement::With, 4),
    ];
    for (i, &(g, prior, rep, k)) in configs.iter().enumerate() {
        let model = UrnModel::new(g, prior, rep).map_err(|e| e.to_string())?;
        let exact = model.succession(k).map_err(|e| e.to_string())?;
        let est = simulate_urn(&model, k, 100_000, 77 + i as u64).map_err(|e| e.to_string())?;
        let want = cryptocomb::succession::to_f64(&exact);
        check((est.estimate - want).abs() <= 3.0 * est.stderr, || format!("{model:?} k={k}: {est:?} vs {want}"))?;
    }
    Ok(format!("limits ok, {grid} grid points, 6 simulations within 3 stderr"))
}

fn faulhaber() -> Outcome {
    for k in 0..=12u32 {
        for g in 0..=50u64 {
            let lhs = bernoulli_form(k, g);
            let rhs = BigRational::from_integer(power_sum(k, g));
            check(lhs == rhs, || format!("k={k}, G={g}"))?;
        }
    }
    Ok("k <= 12, G <= 50".into())
}

fn verify_plans(board: &SimplexBoard, target: &[u64], plans: &[PushPlan]) -> Result<(), String> {
    for p in plans {
        let end = board.apply(p).map_err(|e| e.to_string())?;
        check(end.labels() == target, || format!("plan {:?} misses the target", p.0))?;
    }
    Ok(())
}

fn push_counts_t4() -> Outcome {
    let t4 = triangular(4, 2).map_err(|e| e.to_string())?;
    let all_tails = [1; 10];
    let count = count_solutions(&t4, &all_tails).map_err(|e| e.to_string())?;
    let plans = enumerate_solutions(&t4, &all_tails, 16).map_err(|e| e.to_string())?;
    verify_plans(&t4, &all_tails, &plans)?;
    let c = proper_coloring(&t4).ok_or("no coloring")?;
    let inv = invariant_vector(&t4.with_labels(all_tails.to_vec()).map_err(|e| e.to_string())?, &c)
        .map_err(|e| e.to_string())?;
    let reachable = t4.push(0, 1).and_then(|b| b.push(5, 1)).map_err(|e| e.to_string())?;
    let other = enumerate_solutions(&t4, reachable.labels(), 16).map_err(|e| e.to_string())?;
    verify_plans(&t4, reachable.labels(), &other)?;
    check(count == BigInt::from(2), || {
        format!(
            "{count} solutions: all-tails has invariant {inv:?}, all-heads has [0, 0], so the pair is unsolvable; \
             a reachable T4 target has {} verified solutions",
            other.len()
        )
    })?;
    Ok("2".into())
}

fn push_counts() -> Outcome {
    let t5 = triangular(5, 2).map_err(|e| e.to_string())?;
    let plans = enumerate_solutions(&t5, &[1; 15], 16).map_err(|e| e.to_string())?;
    check(plans.len() == 8, || format!("T5 has {} solutions", plans.len()))?;
    verify_plans(&t5, &[1; 15], &plans)?;
    let mut boards = 0;
    for (i, m) in [2u64, 3, 5, 6].into_iter().enumerate() {
        for seed in 0..30 {
            let b = random_colorable_board(2, 4 + (seed as usize % 14), m, 100 * i as u64 + seed);
            let closed = closed_form_count(&b).map_err(|e| e.to_string())?;
            check(closed == exact_count(&b), || format!("m={m} seed={seed}: {closed} vs {}", exact_count(&b)))?;
            boards += 1;
        }
    }
    Ok(format!("T5 = 8 verified, closed form on {boards} boards"))
}

fn criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(451);
    let mut pairs = 0;
    let mut solvable = 0;
    for seed in 0..20u64 {
        let m = [2u64, 3, 4, 5][seed as usize % 4];
        let b = random_colorable_board(2, 6 + seed as usize, m, 900 + seed);
        let c = proper_coloring(&b).ok_or("generator promised a coloring")?;
        for _ in 0..500 {
            let start: Vec<u64> = (0..b.vertex_count()).map(|_| rng.gen_range(0..m)).collect();
            let from = b.with_labels(start).map_err(|e| e.to_string())?;
            let target: Vec<u64> = if rng.gen_bool(0.5) {
                let plan = PushPlan((0..b.region_count()).map(|_| rng.gen_range(0..m)).collect());
                from.apply(&plan).map_err(|e| e.to_string())?.labels().to_vec()
            } else {
                (0..b.vertex_count()).map(|_| rng.gen_range(0..m)).collect()
            };
            let by_invariant = solvable_by_invariant(&from, &c, &target).map_err(|e| e.to_string())?;
            let by_solver = solve(&from, &target).map_err(|e| e.to_string())?.is_some();
            check(by_invariant == by_solver, || format!("board {seed}: {by_invariant} vs {by_solver}"))?;
            solvable += usize::from(by_solver);
            pairs += 1;
        }
    }
    let b = random_colorable_board(2, 25, 6, 31);
    let c = proper_coloring(&b).ok_or("no coloring")?;
    let mut cur = b.clone();
    let want = invariant_vector(&b, &c).map_err(|e| e.to_string())?;
    for i in 0..10_000 {
        cur = cur.push(rng.gen_range(0..cur.region_count()), 1).map_err(|e| e.to_string())?;
        if i % 10 == 0 || i == 9_999 {
            check(invariant_vector(&cur, &c).map_err(|e| e.to_string())? == want, || format!("push {i}"))?;
        }
    }
    Ok(format!("{pairs} pairs over 20 boards ({solvable} solvable), 10000 pushes"))
}

fn colorability() -> Outcome {
    let mut corpus = vec![k4_triangles(2)];
    corpus.extend((2..=7).map(|r| triangular(r, 2).expect("valid")));
    corpus.extend((1..=3).map(|s| hexagonal(s, 2).expect("valid")));
    for v in 4..=12usize {
        for seed in 0..40u64 {
            let most = v * (v - 1) * (v - 2) / 6;
            let r = (v.div_ceil(3) + seed as usize % (2 * v)).min(most);
            corpus.push(random_board(2, v, r, 2, 1000 * v as u64 + seed));
        }
        for seed in 0..10u64 {
            let b = random_colorable_board(2, 3 + seed as usize, 2, 77 * v as u64 + seed);
            if b.vertex_count() <= 12 {
                corpus.push(b);
            }
        }
    }
    let (mut yes, mut no) = (0, 0);
    for (i, b) in corpus.iter().enumerate() {
        let oracle = proper_coloring(b).is_some();
        let got = decide_colorable(b);
        let agree = matches!((got, oracle), (Colorability::Yes, true) | (Colorability::No, false));
        check(agree, || format!("board {i}: decided {got:?}, backtracking says {oracle}"))?;
        if oracle {
            yes += 1;
        } else {
            no += 1;
        }
    }
    check(decide_colorable(&k4_triangles(2)) == Colorability::No, || "K4".into())?;
    check(class_count(&k4_triangles(2)) < BigInt::from(4), || "K4 class count".into())?;
    Ok(format!("{} boards ({yes} colorable, {no} not)", corpus.len()))
}

fn entropy() -> Outcome {
    for n in 2..=8 {
        let f = info_flow(&SimpleGraph::complete(n));
        check(f == ratio(1, 1), || format!("IF(K_{n}) = {f}"))?;
    }
    let empty = SimpleGraph::edgeless(5);
    check(info_flow(&empty).is_zero(), || "edgeless IF".into())?;
    check(entropy_report(&empty) == Err(EntropyError::ZeroPsi), || "edgeless entropy".into())?;
    let k2 = entropy_report(&SimpleGraph::complete(2)).map_err(|e| e.to_string())?;
    check((k2.entropy_bits - 1.0).abs() <= 1e-12, || format!("H(K_2) = {}", k2.entropy_bits))?;
    let p3 = psi_values(&SimpleGraph::path(3));
    check(p3 == vec![ratio(3, 4), ratio(1, 1), ratio(3, 4)], || format!("{p3:?}"))?;
    Ok("IF(K_2..K_8) = 1, IF(edgeless) = 0, H(K_2) = 1, P3 = (3/4, 1, 3/4)".into())
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("Jones worked example", jones_example),
        ("key value 108", key_value),
        ("unknot normalization", unknot),
        ("Markov and relation invariance", markov_invariance),
        ("composition multiplicativity and associativity", composition),
        ("protocol soundness", protocol),
        ("succession exact table", succession_table),
        ("succession limits, bound and simulation", succession_limits),
        ("Faulhaber and Bernoulli", faulhaber),
        ("push counts: Triangular(4) all-heads to all-tails has 2 solutions", push_counts_t4),
        ("push counts: Triangular(5) and closed form", push_counts),
        ("criterion equivalence and invariance", criterion),
        ("colorability", colorability),
        ("entropy endpoints", entropy),
    ];
    let start = Instant::now();
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let known = KNOWN_RED.contains(&name);
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(why) if known => println!("FAIL  {name}: {why} (known, unattainable) [{:.2?}]", t.elapsed()),
            Err(why) => println!("FAIL  {name}: {why} [{:.2?}]", t.elapsed()),
        }
        if outcome.is_err() != known {
            unexpected.push(name);
        }
    }
    let total = start.elapsed();
    let in_time = total < Duration::from_secs(300);
    println!("{}  whole suite under 5 minutes: {total:.2?}", if in_time { "PASS" } else { "FAIL" });
    assert!(in_time);
    assert!(unexpected.is_empty(), "unexpected outcomes: {unexpected:?}");
}
