//! Balls and convex orders of complete spaces.

use alloc::vec::Vec;

use crate::blocks::BlockId;
use crate::error::{precondition, Result};
use crate::graph::MGraph;
use crate::Verdict;

/// `a ~_B b` but `a ≁_B c`, with `c` strictly between `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvexWitness {
    pub block: BlockId,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

/// Ball of each vertex for the block `b`, named by its first member in
/// vertex order. Needs a complete space.
pub fn ball_classes(g: &MGraph, b: BlockId) -> Result<Vec<usize>> {
    if !g.is_complete() {
        return Err(precondition!("balls need a total distance function"));
    }
    let blocks = g.monoid().blocks()?;
    let n = g.len();
    let mut class = alloc::vec![usize::MAX; n];
    for u in 0..n {
        if class[u] != usize::MAX {
            continue;
        }
        class[u] = u;
        for v in u + 1..n {
            if class[v] == usize::MAX && blocks.block_of(g.dist(u, v).expect("complete")) <= b {
                class[v] = u;
            }
        }
    }
    Ok(class)
}

/// Whether every ball of every block is an interval of the space's order.
pub fn check_convex_order(g: &MGraph) -> Result<Verdict<ConvexWitness>> {
    let order = g.order().ok_or_else(|| precondition!("the space has no order"))?;
    if !g.is_complete() {
        return Err(precondition!("balls need a total distance function"));
    }
    let blocks = g.monoid().blocks()?;
    for b in blocks.ball_blocks() {
        let class = ball_classes(g, b)?;
        for (i, &a) in order.iter().enumerate() {
            // the last member of a's ball after position i
            let Some(j) = order.iter().rposition(|&x| class[x] == class[a]).filter(|&j| j > i) else { continue };
            if let Some(&c) = order[i + 1..j].iter().find(|&&c| class[c] != class[a]) {
                return Ok(Verdict::Fails(ConvexWitness { block: b, a, b: order[j], c }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// A convex order: vertices sorted by their balls from the largest
/// non-maximal block down, ties broken by vertex order.
pub fn make_convex_order(g: &MGraph) -> Result<Vec<usize>> {
    let blocks = g.monoid().blocks()?;
    let mut levels = blocks.ball_blocks();
    levels.reverse();
    let classes: Vec<Vec<usize>> = levels.iter().map(|&b| ball_classes(g, b)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&v| {
        let mut key: Vec<usize> = classes.iter().map(|c| c[v]).collect();
        key.push(v);
        key
    });
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{build_truncated, build_ultrametric, DistanceMonoid, Q};
    use alloc::sync::Arc;
    use alloc::vec;

    fn example() -> MGraph {
        let m = Arc::new(build_truncated(&[Q::from_integer(1), Q::from_integer(3), Q::from_integer(5)]).unwrap());
        let mut g = MGraph::with_size(m.clone(), 3);
        let e = |s: &str| m.parse_element(s).unwrap();
        g.set_dist(0, 1, e("1")).unwrap();
        g.set_dist(0, 2, e("3")).unwrap();
        g.set_dist(1, 2, e("3")).unwrap();
        g
    }

    #[test]
    fn convexity_of_example() {
        let mut g = example();
        g.set_order(vec![0, 2, 1]).unwrap();
        assert_eq!(
            check_convex_order(&g).unwrap(),
            Verdict::Fails(ConvexWitness { block: BlockId(1), a: 0, b: 1, c: 2 })
        );
        g.set_order(vec![0, 1, 2]).unwrap();
        assert!(check_convex_order(&g).unwrap().holds());
        assert_eq!(make_convex_order(&g).unwrap(), vec![0, 1, 2]);
        g.clear_order();
        assert!(check_convex_order(&g).is_err());
    }

    #[test]
    fn archimedean_orders_are_convex() {
        let m = Arc::new(build_truncated(&[Q::from_integer(1), Q::from_integer(2)]).unwrap());
        let mut g = MGraph::with_size(m.clone(), 3);
        for (u, v) in [(0, 1), (0, 2), (1, 2)] {
            g.set_dist(u, v, m.parse_element("1").unwrap()).unwrap();
        }
        assert_eq!(make_convex_order(&g).unwrap(), vec![0, 1, 2]);
        g.set_order(vec![2, 0, 1]).unwrap();
        assert!(check_convex_order(&g).unwrap().holds());
    }

    #[test]
    fn ultrametric_balls_are_contiguous() {
        let m: Arc<DistanceMonoid> = Arc::new(build_ultrametric(4).unwrap());
        let mut g = MGraph::with_size(m.clone(), 4);
        let e = |s: &str| m.parse_element(s).unwrap();
        g.set_dist(0, 2, e("1")).unwrap();
        g.set_dist(1, 3, e("1")).unwrap();
        for (u, v) in [(0, 1), (0, 3), (2, 1), (2, 3)] {
            g.set_dist(u, v, e("2")).unwrap();
        }
        let order = make_convex_order(&g).unwrap();
        assert_eq!(order, vec![0, 2, 1, 3]);
        g.set_order(order).unwrap();
        assert!(check_convex_order(&g).unwrap().holds());
    }
}
