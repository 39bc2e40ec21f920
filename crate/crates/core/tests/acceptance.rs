//! Acceptance criteria AC1 to AC9. Prints one PASS/FAIL line per criterion
//! and exits non-zero on any failure not recorded as a known limitation.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mmetric::blocks::{block_type, is_archimedean, BlockId};
use mmetric::graph::{find_nonmetric_cycle, shortest_path_completion, strong_amalgamation, validate_metric, MGraph};
use mmetric::lstar::{extract_obstruction, lstar_expand, repair_orphans, star_completion, validate_lstar, StarOutcome};
use mmetric::monoid::{
    build_infinitesimal, build_truncated, check_associativity, check_four_values, inf, validate_monoid,
    DistanceMonoid, DistanceSet, Q,
};
use mmetric::mus::{bound_n_of_s, check_mus_property, compute_mus, important_indices, MusViolation};
use mmetric::oracle::{
    enumerate_completions, oracle_best_subsequence, oracle_blocks, oracle_four_values, oracle_lstar_completable,
    EnumerationBudget,
};
use mmetric::order::{check_convex_order, make_convex_order};
use mmetric::{Elem, LStar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_metric, random_partial, trunc, ultra};

/// Result of one criterion: failures, plus a known limitation if any.
struct Outcome {
    failures: Vec<String>,
    known: Option<String>,
    summary: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), known: None, summary: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }
}

fn q(v: i64) -> Q {
    Q::from_integer(v)
}

fn ac1() -> Outcome {
    let mut o = Outcome::new();
    let m = trunc(&[1, 3, 5]);
    let e = |s: &str| m.parse_element(s).unwrap();
    let blocks = m.blocks().unwrap();
    let got: Vec<Vec<Elem>> = blocks.nonzero_blocks().into_iter().map(|b| blocks.members(b).unwrap()).collect();
    o.check(got == vec![vec![e("1")], vec![e("3"), e("5")]], || format!("blocks {:?}", got));
    for ell in ["3", "5"] {
        let t = block_type(&m, BlockId(1), e(ell)).unwrap();
        let members = t.finite_members().map(|s| s.to_vec());
        o.check(members == Some(vec![e(ell)]), || format!("t([1], {}) = {:?}", ell, members));
    }
    o.summary = "blocks [1] [3 5], t([1],3)={3}, t([1],5)={5}".into();
    o
}

fn ac2() -> Outcome {
    let mut o = Outcome::new();
    let m = build_infinitesimal();
    let s = DistanceSet::new(&m, [inf(0, 1), inf(1, 0), inf(2, 3)]).unwrap();
    let mus = compute_mus(&m, &s).unwrap();
    let (b1, b2) = (BlockId(1), BlockId(2));
    for b in [b1, b2] {
        let v = check_mus_property(&m, &s, b, mus.get(b), 6).unwrap();
        o.check(v.holds(), || format!("compute_mus value {} for block {:?}: {:?}", m.label(mus.get(b)), b, v));
    }
    let ref1 = check_mus_property(&m, &s, b1, inf(0, 3), 6).unwrap();
    o.check(ref1.holds(), || format!("reference 3dx: {:?}", ref1));
    // The reference value 1+3dx for the second block is refuted by
    // e = dx: dx + (1+3dx) = 1+4dx < 2+3dx, yet dx + 3 exceeds 2+3dx.
    let ref2 = check_mus_property(&m, &s, b2, inf(1, 3), 6).unwrap();
    let expected = MusViolation { ell: inf(2, 3), e: inf(0, 1), b: inf(3, 0) };
    match ref2.witness() {
        Some(w) if *w == expected => {
            o.known = Some(format!(
                "reference mus(B2)=1+3dx fails: e={} gives e+(1+3dx)={} < {} but e+{} >= {}",
                m.label(w.e),
                m.label(m.sum(w.e, inf(1, 3))),
                m.label(w.ell),
                m.label(w.b),
                m.label(w.ell)
            ));
        }
        other => o.check(false, || format!("unexpected verdict for 1+3dx: {:?}", other)),
    }
    o.summary = format!(
        "compute_mus gives {} and {}, both pass; reference 3dx passes",
        m.label(mus.get(b1)),
        m.label(mus.get(b2))
    );
    o
}

fn ac3() -> Outcome {
    let mut o = Outcome::new();
    let mut count = 0;
    for mask in 1u32..(1 << 10) {
        if mask.count_ones() > 4 {
            continue;
        }
        let values: Vec<Q> = (1..=10).filter(|i| mask >> (i - 1) & 1 == 1).map(q).collect();
        let fast = check_four_values(&values).holds();
        let assoc = check_associativity(&build_truncated(&values).unwrap()).holds();
        let brute = oracle_four_values(&values);
        o.check(fast == assoc && fast == brute, || {
            format!("{:?}: four-values {}, associative {}, oracle {}", values, fast, assoc, brute)
        });
        count += 1;
    }
    o.summary = format!("{} sets, zero disagreements", count);
    o
}

fn compare_completion(o: &mut Outcome, g: &MGraph, budget: &EnumerationBudget) {
    let all = enumerate_completions(g, budget).unwrap();
    match find_nonmetric_cycle(g) {
        Some(w) => o.check(w.is_valid_in(g) && all.is_empty(), || format!("cycle but completions exist: {:?}", g)),
        None => {
            let best = shortest_path_completion(g).unwrap();
            let dominates = all.iter().all(|c| c.edges().into_iter().all(|(u, v, e)| best.dist(u, v).unwrap() >= e));
            o.check(!all.is_empty() && all.contains(&best) && dominates, || {
                format!("shortest-path completion disagrees with enumeration: {:?}", g)
            });
        }
    }
}

fn ac4() -> Outcome {
    let mut o = Outcome::new();
    let budget = EnumerationBudget::default();
    o.check(!check_four_values(&[q(1), q(2), q(4)]).holds(), || "{1,2,4} unexpectedly valid".into());
    let nearest = trunc(&[1, 2, 5]);
    o.check(validate_monoid(&nearest).is_valid(), || "{1,2,5} is not a valid monoid".into());
    let monoids = vec![trunc(&[1, 3]), nearest, trunc(&[1, 2, 3, 4]), ultra(4)];
    let mut exhaustive = 0usize;
    for m in &monoids {
        let labels = m.nonzero_elements().unwrap();
        let radix = labels.len() + 1;
        for n in 1..=4usize {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let total = radix.pow(pairs.len() as u32);
            for code in 0..total {
                let mut g = MGraph::with_size(m.clone(), n);
                let mut c = code;
                for &(u, v) in &pairs {
                    if c % radix > 0 {
                        g.set_dist(u, v, labels[c % radix - 1]).unwrap();
                    }
                    c /= radix;
                }
                compare_completion(&mut o, &g, &budget);
                exhaustive += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..10_000 {
        let m = &monoids[i % monoids.len()];
        let density = rng.gen_range(0.3..=0.9);
        let g = random_partial(&mut rng, m, 5, density);
        compare_completion(&mut o, &g, &budget);
    }
    o.summary = format!("{} exhaustive graphs, 10000 random 5-vertex graphs", exhaustive);
    o
}

fn ac5() -> Outcome {
    let mut o = Outcome::new();
    let budget = EnumerationBudget::default();
    let monoids = common::table_monoids();
    let classes: Vec<Vec<Vec<Elem>>> = monoids.iter().map(|m| oracle_blocks(m, &budget).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 10_000 {
        let k = rng.gen_range(0..monoids.len());
        let m = &monoids[k];
        let values = m.nonzero_elements().unwrap();
        let size = rng.gen_range(1..=values.len());
        let s = DistanceSet::new(m, values.choose_multiple(&mut rng, size).copied()).unwrap();
        let pool: Vec<Elem> = s.iter().collect();
        let ell = *pool.choose(&mut rng).unwrap();
        let below: Vec<Elem> = pool.iter().copied().filter(|&e| e < ell).collect();
        if below.is_empty() {
            continue;
        }
        let len = rng.gen_range(0..=12);
        let seq: Vec<Elem> = (0..len).map(|_| *below.choose(&mut rng).unwrap()).collect();
        if m.sum_all(seq.iter().copied()) >= ell {
            continue;
        }
        let mus = compute_mus(m, &s).unwrap();
        let n = bound_n_of_s(m, &s, &mus).unwrap().n_of_s;
        let kept = important_indices(m, &s, &mus, ell, &seq).unwrap();
        let increasing = kept.windows(2).all(|w| w[0] < w[1]) && kept.iter().all(|&i| i < seq.len());
        o.check(increasing, || format!("not a subsequence: {:?} of {:?}", kept, seq));
        o.check(kept.len() < n, || format!("length {} not below n(S) = {}", kept.len(), n));
        if kept.len() < seq.len() {
            let sum = m.sum_all(kept.iter().map(|&i| seq[i]));
            let a = (0..seq.len()).filter(|i| !kept.contains(i)).map(|i| seq[i]).max().unwrap();
            let block = classes[k].iter().find(|c| c.contains(&a)).unwrap();
            let ok = block.iter().all(|&b| m.sum(b, sum) < ell);
            o.check(ok, || format!("replacement fails for {:?} ell {:?} kept {:?}", seq, ell, kept));
        }
        let best = oracle_best_subsequence(m, ell, &seq, n, &budget).unwrap();
        o.check(best.contains(&kept), || format!("{:?} not among the oracle's subsequences for {:?}", kept, seq));
        done += 1;
    }
    o.summary = format!("{} instances", done);
    o
}

fn lstar_monoids() -> Vec<Arc<DistanceMonoid>> {
    vec![trunc(&[1, 3]), trunc(&[1, 3, 5]), ultra(4)]
}

/// Runs AC6 and collects the completed structures for AC9.
fn ac6(completed: &mut Vec<LStar>) -> Outcome {
    let mut o = Outcome::new();
    let monoids = lstar_monoids();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut deleted = 0;
    for i in 0..1000 {
        let m = &monoids[i % monoids.len()];
        let n = rng.gen_range(1..=6);
        let mut g = random_metric(&mut rng, m, n);
        g.set_order(make_convex_order(&g).unwrap()).unwrap();
        let full = lstar_expand(&g).unwrap();
        let mut s = full.clone();
        let p = rng.gen_range(0.0..=1.0);
        for (u, v, _) in full.dist_entries() {
            if rng.gen_bool(p) {
                s.remove_dist(u, v);
                deleted += 1;
            }
        }
        match star_completion(&s) {
            Ok(StarOutcome::Completed(c)) => {
                let kept = s.dist_entries().all(|(u, v, e)| c.dist(u, v) == Some(e));
                o.check(kept, || format!("retained distance changed in {:?}", s));
                let report = validate_lstar(&c);
                o.check(report.is_valid(), || format!("invalid completion: {:?}", report));
                let (h, _) = c.original_graph();
                o.check(h.is_complete() && validate_metric(&h).unwrap().holds(), || {
                    format!("originals not a complete metric space: {:?}", h)
                });
                completed.push(c);
            }
            other => o.check(false, || format!("completion failed: {:?}", other)),
        }
    }
    o.summary = format!("1000 of 1000 completed, {} distances deleted", deleted);
    o
}

fn planted(k: usize) -> LStar {
    let m = trunc(&[1, 3]);
    let mut s = LStar::new(m.clone()).unwrap();
    let vs: Vec<usize> = (1..=k).map(|i| s.add_original(format!("v{}", i)).unwrap()).collect();
    let b = s.add_ball("b", BlockId(1)).unwrap();
    for &v in &vs {
        s.set_up(v, BlockId(1), b).unwrap();
    }
    for w in vs.windows(2) {
        s.set_dist(w[0], w[1], m.parse_element("1").unwrap()).unwrap();
    }
    s.set_dist(vs[0], vs[k - 1], m.parse_element("3").unwrap()).unwrap();
    s
}

fn ac7() -> Outcome {
    let mut o = Outcome::new();
    let budget = EnumerationBudget { max_vertices: 18, ..EnumerationBudget::default() };
    let mut largest = 0;
    for k in 5..=50 {
        let s = planted(k);
        o.check(matches!(star_completion(&s), Ok(StarOutcome::NonCompletable { .. })), || {
            format!("planted k={} was completed", k)
        });
        let ob = extract_obstruction(&s).unwrap();
        largest = largest.max(ob.structure.len());
        o.check(ob.bound == 18, || format!("k={}: bound {}", k, ob.bound));
        o.check(ob.structure.len() <= 18, || format!("k={}: {} vertices", k, ob.structure.len()));
        let fixed = repair_orphans(&ob.structure);
        o.check(matches!(star_completion(&fixed), Ok(StarOutcome::NonCompletable { .. })), || {
            format!("k={}: obstruction completes", k)
        });
        o.check(!oracle_lstar_completable(&fixed, &budget).unwrap(), || {
            format!("k={}: oracle completes the obstruction", k)
        });
    }
    o.summary = format!("k = 5..50, largest obstruction {} vertices, bound 18", largest);
    o
}

fn ac8() -> Outcome {
    let mut o = Outcome::new();
    let monoids = lstar_monoids();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut built = 0;
    while built < 1000 {
        let m = &monoids[built % monoids.len()];
        let n1 = rng.gen_range(1..=4);
        let a = random_metric(&mut rng, m, n1);
        let shared = rng.gen_range(0..=n1);
        let extra = rng.gen_range(1..=3);
        let mut b = random_metric(&mut rng, m, shared + extra);
        for u in 0..shared {
            for v in u + 1..shared {
                b.remove_dist(u, v);
                b.set_dist(u, v, a.dist(u, v).unwrap()).unwrap();
            }
        }
        if !validate_metric(&b).unwrap().holds() {
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..shared).map(|i| (i, i)).collect();
        let am = strong_amalgamation(&a, &b, &pairs).unwrap();
        let g = &am.graph;
        o.check(validate_metric(g).unwrap().holds() && g.is_complete(), || format!("amalgam not metric: {:?}", g));
        o.check(g.len() == n1 + extra, || format!("{} vertices, expected {}", g.len(), n1 + extra));
        let iso1 = (0..n1).all(|u| (0..n1).all(|v| g.dist(am.embed1[u], am.embed1[v]) == a.dist(u, v)));
        let iso2 = (0..b.len()).all(|u| (0..b.len()).all(|v| g.dist(am.embed2[u], am.embed2[v]) == b.dist(u, v)));
        o.check(iso1 && iso2, || "factor does not embed isometrically".into());
        let images: BTreeSet<usize> = am.embed1.iter().chain(&am.embed2).copied().collect();
        o.check(images.len() == g.len(), || "extra identification".into());
        built += 1;
    }
    o.summary = "1000 amalgams".into();
    o
}

fn ac9(completed: &[LStar]) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut made = 0;
    for m in common::table_monoids() {
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let mut g = random_metric(&mut rng, &m, n);
            g.set_order(make_convex_order(&g).unwrap()).unwrap();
            o.check(check_convex_order(&g).unwrap().holds(), || format!("make_convex_order output not convex: {:?}", g));
            made += 1;
        }
    }
    for c in completed {
        let (mut h, originals) = c.original_graph();
        let order: Vec<usize> =
            c.order().iter().filter_map(|v| originals.iter().position(|x| x == v)).collect();
        h.set_order(order).unwrap();
        o.check(check_convex_order(&h).unwrap().holds(), || format!("complete_order output not convex: {:?}", h));
    }
    let archimedean: Vec<Arc<DistanceMonoid>> = vec![trunc(&[1, 2, 3, 4]), trunc(&[2, 3, 4]), trunc(&[1, 2]), ultra(2)];
    let mut arbitrary = 0;
    for m in &archimedean {
        o.check(is_archimedean(m).unwrap().holds(), || format!("{:?} is not archimedean", m.kind()));
        for _ in 0..250 {
            let n = rng.gen_range(1..=6);
            let mut g = random_metric(&mut rng, m, n);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            g.set_order(order).unwrap();
            o.check(check_convex_order(&g).unwrap().holds(), || format!("order on archimedean monoid fails: {:?}", g));
            arbitrary += 1;
        }
    }
    o.summary = format!(
        "{} made orders, {} completed orders, {} arbitrary archimedean orders",
        made,
        completed.len(),
        arbitrary
    );
    o
}

fn report(name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let took = start.elapsed();
    let in_time = took < limit;
    let pass = o.failures.is_empty() && in_time && o.known.is_none();
    let status = if pass { "PASS" } else { "FAIL" };
    println!("{} {}  {} ({:.2?}, limit {:?})", name, status, o.summary, took, limit);
    if let Some(k) = &o.known {
        println!("    known limitation: {}", k);
    }
    if !in_time {
        println!("    over time limit");
    }
    for f in o.failures.iter().filter(|f| !f.is_empty()) {
        println!("    {}", f);
    }
    if o.failures.len() > 5 {
        println!("    ... {} failures in total", o.failures.len());
    }
    // a recorded limitation alone does not fail the run
    o.failures.is_empty() && in_time
}

fn main() -> ExitCode {
    let mut ok = true;
    let mut completed = Vec::new();
    ok &= report("AC1", Duration::from_secs(1), ac1);
    ok &= report("AC2", Duration::from_secs(5), ac2);
    ok &= report("AC3", Duration::from_secs(60), ac3);
    ok &= report("AC4", Duration::from_secs(300), ac4);
    ok &= report("AC5", Duration::from_secs(120), ac5);
    ok &= report("AC6", Duration::from_secs(120), || ac6(&mut completed));
    ok &= report("AC7", Duration::from_secs(60), ac7);
    ok &= report("AC8", Duration::from_secs(60), ac8);
    ok &= report("AC9", Duration::from_secs(30), || ac9(&completed));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
