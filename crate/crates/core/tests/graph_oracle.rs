mod common;

use mmetric::graph::{find_nonmetric_cycle, shortest_path_completion, strong_amalgamation};
use mmetric::monoid::DistanceSet;
use mmetric::mus::{bound_n_of_s, compute_mus, important_indices};
use mmetric::oracle::{enumerate_completions, oracle_best_subsequence, EnumerationBudget};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_metric, random_partial, table_monoids};

#[test]
fn completion_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let budget = EnumerationBudget::default();
    for m in table_monoids() {
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let g = random_partial(&mut rng, &m, n, 0.6);
            let all = enumerate_completions(&g, &budget).unwrap();
            match find_nonmetric_cycle(&g) {
                Some(w) => {
                    assert!(w.is_valid_in(&g));
                    assert!(all.is_empty());
                }
                None => {
                    let best = shortest_path_completion(&g).unwrap();
                    assert!(all.contains(&best));
                    for c in &all {
                        for (u, v, e) in c.edges() {
                            assert!(best.dist(u, v).unwrap() >= e);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn greedy_summands_are_among_the_valid_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let budget = EnumerationBudget::default();
    let mut checked = 0;
    for m in table_monoids() {
        let values = m.nonzero_elements().unwrap();
        for _ in 0..300 {
            let k = rng.gen_range(1..=values.len());
            let s = DistanceSet::new(&m, values.choose_multiple(&mut rng, k).copied()).unwrap();
            let pool: Vec<_> = s.iter().collect();
            let len = rng.gen_range(0..=8);
            let seq: Vec<_> = (0..len).map(|_| *pool.choose(&mut rng).unwrap()).collect();
            let total = m.sum_all(seq.iter().copied());
            let Some(&ell) = pool.iter().find(|&&e| e > total) else { continue };
            let mus = compute_mus(&m, &s).unwrap();
            let n = bound_n_of_s(&m, &s, &mus).unwrap().n_of_s;
            let kept = important_indices(&m, &s, &mus, ell, &seq).unwrap();
            assert!(kept.len() < n);
            assert!(oracle_best_subsequence(&m, ell, &seq, n, &budget).unwrap().contains(&kept));
            checked += 1;
        }
    }
    assert!(checked > 300);
}

#[test]
fn strong_amalgams_are_metric_and_embed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in table_monoids() {
        for _ in 0..50 {
            let n1 = rng.gen_range(1..=4);
            let a = random_metric(&mut rng, &m, n1);
            let shared = rng.gen_range(0..=n1);
            let extra = rng.gen_range(1..=3);
            // the second factor agrees with the first on the shared part
            let mut b = loop {
                let cand = random_metric(&mut rng, &m, shared + extra);
                let agrees = (0..shared).all(|u| (0..shared).all(|v| cand.dist(u, v) == a.dist(u, v)));
                if agrees {
                    break cand;
                }
                let mut fixed = cand.clone();
                for u in 0..shared {
                    for v in u + 1..shared {
                        fixed.remove_dist(u, v);
                        fixed.set_dist(u, v, a.dist(u, v).unwrap()).unwrap();
                    }
                }
                if mmetric::graph::validate_metric(&fixed).unwrap().holds() {
                    break fixed;
                }
            };
            b.clear_order();
            let pairs: Vec<(usize, usize)> = (0..shared).map(|i| (i, i)).collect();
            let am = strong_amalgamation(&a, &b, &pairs).unwrap();
            assert!(mmetric::graph::validate_metric(&am.graph).unwrap().holds());
            assert_eq!(am.graph.len(), n1 + extra);
            for u in 0..n1 {
                for v in 0..n1 {
                    assert_eq!(am.graph.dist(am.embed1[u], am.embed1[v]), a.dist(u, v));
                }
            }
            for u in 0..b.len() {
                for v in 0..b.len() {
                    assert_eq!(am.graph.dist(am.embed2[u], am.embed2[v]), b.dist(u, v));
                }
            }
        }
    }
}
