mod common;

use std::collections::BTreeSet;

use mmetric::blocks::block_type;
use mmetric::lstar::{
    extract_obstruction, lstar_expand, orphans, repair_orphans, star_completion, validate_lstar, StarOutcome,
};
use mmetric::oracle::{oracle_block_type, oracle_blocks, oracle_lstar_completable, EnumerationBudget};
use mmetric::order::{check_convex_order, make_convex_order};
use mmetric::LStar;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_metric, table_monoids};

fn random_structure<R: Rng>(rng: &mut R) -> Option<LStar> {
    let monoids = table_monoids();
    let m = monoids.choose(rng).unwrap();
    let n = rng.gen_range(2..=5);
    let mut g = random_metric(rng, m, n);
    g.set_order(make_convex_order(&g).unwrap()).unwrap();
    let mut s = lstar_expand(&g).unwrap();
    let pairs: Vec<(usize, usize, _)> = s.dist_entries().collect();
    for (u, v, _) in pairs {
        if rng.gen_bool(0.5) {
            s.remove_dist(u, v);
        }
    }
    // occasionally disturb a remaining distance so that some inputs fail
    if rng.gen_bool(0.5) {
        let pairs: Vec<(usize, usize, _)> = s.dist_entries().collect();
        if let Some(&(u, v, _)) = pairs.choose(rng) {
            let e = *m.nonzero_elements().unwrap().choose(rng).unwrap();
            s.remove_dist(u, v);
            s.set_dist(u, v, e).unwrap();
        }
    }
    (validate_lstar(&s).is_valid() && orphans(&s).is_empty()).then_some(s)
}

#[test]
fn star_completion_agrees_with_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = EnumerationBudget::default();
    let (mut yes, mut no) = (0, 0);
    for _ in 0..400 {
        let Some(s) = random_structure(&mut rng) else { continue };
        let oracle = oracle_lstar_completable(&s, &budget).unwrap();
        match star_completion(&s).unwrap() {
            StarOutcome::Completed(c) => {
                assert!(oracle, "completed a structure the oracle rejects: {:?}", s);
                assert!(validate_lstar(&c).is_valid());
                for (u, v, e) in s.dist_entries() {
                    assert_eq!(c.dist(u, v), Some(e));
                }
                yes += 1;
            }
            StarOutcome::NonCompletable { witness, plan } => {
                assert!(!oracle, "missed a completion of {:?}", s);
                assert!(witness.is_valid_in(&plan.graph));
                no += 1;
            }
        }
    }
    assert!(yes > 50 && no > 20, "{} completable, {} not", yes, no);
}

#[test]
fn obstructions_are_small_and_non_completable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let budget = EnumerationBudget::default();
    let mut seen = 0;
    for _ in 0..400 {
        let Some(s) = random_structure(&mut rng) else { continue };
        if matches!(star_completion(&s).unwrap(), StarOutcome::Completed(_)) {
            continue;
        }
        let o = extract_obstruction(&s).unwrap();
        assert!(o.structure.len() <= o.bound);
        let fixed = repair_orphans(&o.structure);
        assert!(!oracle_lstar_completable(&fixed, &budget).unwrap());
        seen += 1;
    }
    assert!(seen > 20);
}

#[test]
fn expansions_of_random_spaces_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in table_monoids() {
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let mut g = random_metric(&mut rng, &m, n);
            g.set_order(make_convex_order(&g).unwrap()).unwrap();
            assert!(check_convex_order(&g).unwrap().holds());
            let s = lstar_expand(&g).unwrap();
            assert!(validate_lstar(&s).is_valid());
            assert!(orphans(&s).is_empty());
        }
    }
}

#[test]
fn block_types_match_realisability() {
    let budget = EnumerationBudget::default();
    for m in table_monoids() {
        let blocks = m.blocks().unwrap();
        let brute = oracle_blocks(&m, &budget).unwrap();
        let fast: Vec<Vec<_>> = blocks.nonzero_blocks().into_iter().map(|b| blocks.members(b).unwrap()).collect();
        assert_eq!(brute, fast);
        for b in blocks.ball_blocks() {
            let members = blocks.members(b).unwrap();
            for ell in m.nonzero_elements().unwrap() {
                if blocks.block_of(ell) <= b {
                    continue;
                }
                let t = block_type(&m, b, ell).unwrap();
                let want: BTreeSet<_> = t.finite_members().unwrap().iter().copied().collect();
                assert_eq!(oracle_block_type(&m, &members, ell, &budget).unwrap(), want, "{:?} {:?}", b, ell);
            }
        }
    }
}
