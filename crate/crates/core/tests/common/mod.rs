#![allow(dead_code)]

use std::sync::Arc;

use mmetric::graph::{validate_metric, MGraph};
use mmetric::monoid::{build_truncated, build_ultrametric, DistanceMonoid, Q};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn trunc(vals: &[i64]) -> Arc<DistanceMonoid> {
    let qs: Vec<Q> = vals.iter().map(|&v| Q::from_integer(v)).collect();
    Arc::new(build_truncated(&qs).unwrap())
}

pub fn ultra(n: usize) -> Arc<DistanceMonoid> {
    Arc::new(build_ultrametric(n).unwrap())
}

pub fn table_monoids() -> Vec<Arc<DistanceMonoid>> {
    vec![trunc(&[1, 3]), trunc(&[1, 3, 5]), trunc(&[1, 2, 5]), trunc(&[1, 2, 3, 4]), ultra(4)]
}

/// Uniform random labelling of some pairs of `n` vertices.
pub fn random_partial<R: Rng>(rng: &mut R, m: &Arc<DistanceMonoid>, n: usize, density: f64) -> MGraph {
    let values = m.nonzero_elements().unwrap();
    let mut g = MGraph::with_size(m.clone(), n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                g.set_dist(u, v, *values.choose(rng).unwrap()).unwrap();
            }
        }
    }
    g
}

/// A random complete metric space on `n` vertices, by rejection.
pub fn random_metric<R: Rng>(rng: &mut R, m: &Arc<DistanceMonoid>, n: usize) -> MGraph {
    loop {
        let g = random_partial(rng, m, n, 1.0);
        if validate_metric(&g).unwrap().holds() {
            return g;
        }
    }
}
