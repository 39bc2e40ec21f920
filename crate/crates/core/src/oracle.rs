//! Brute-force reference implementations.
//!
//! Everything here is a direct transcription of a definition by exhaustive
//! search, written without the main algorithms, so that the two can be
//! compared. Only finite monoids are supported and every search refuses
//! inputs beyond its [`EnumerationBudget`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::MGraph;
use crate::lstar::LStar;
use crate::monoid::{DistanceMonoid, Elem, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_vertices: usize,
    pub max_monoid_size: usize,
    pub max_sum_length: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_vertices: 5, max_monoid_size: 8, max_sum_length: 12 }
    }
}

impl EnumerationBudget {
    fn check_monoid(&self, m: &DistanceMonoid) -> Result<Vec<Elem>> {
        let elems = m.elements().ok_or_else(|| Error::Unsupported("the oracle needs a finite monoid".into()))?;
        if elems.len() > self.max_monoid_size {
            return Err(Error::Budget(format!("monoid has {} elements, budget is {}", elems.len(), self.max_monoid_size)));
        }
        Ok(elems)
    }

    fn check_vertices(&self, n: usize) -> Result<()> {
        if n > self.max_vertices {
            return Err(Error::Budget(format!("{} vertices, budget is {}", n, self.max_vertices)));
        }
        Ok(())
    }
}

fn triangle_ok(m: &DistanceMonoid, a: Elem, b: Elem, c: Elem) -> bool {
    m.leq(a, m.sum(b, c)) && m.leq(b, m.sum(a, c)) && m.leq(c, m.sum(a, b))
}

/// Every metric completion of `g`, in lexicographic order of the assigned
/// values.
pub fn enumerate_completions(g: &MGraph, budget: &EnumerationBudget) -> Result<Vec<MGraph>> {
    let elems = budget.check_monoid(g.monoid())?;
    budget.check_vertices(g.len())?;
    let m = g.monoid();
    let n = g.len();
    let nonzero: Vec<Elem> = elems.into_iter().filter(|&e| !m.is_zero(e)).collect();
    let mut d: Vec<Vec<Option<Elem>>> = (0..n).map(|u| (0..n).map(|v| g.dist(u, v)).collect()).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    fill(m, &pairs, 0, &nonzero, &mut d, &mut |d: &Vec<Vec<Option<Elem>>>| {
        let mut c = g.clone();
        for &(u, v) in &pairs {
            if c.dist(u, v).is_none() {
                c.set_dist(u, v, d[u][v].expect("filled")).expect("fresh pair");
            }
        }
        out.push(c);
    });
    Ok(out)
}

/// Assigns pairs from `i` on; after each pair, every triangle whose three
/// sides are known is checked.
fn fill(
    m: &DistanceMonoid,
    pairs: &[(usize, usize)],
    i: usize,
    values: &[Elem],
    d: &mut Vec<Vec<Option<Elem>>>,
    emit: &mut dyn FnMut(&Vec<Vec<Option<Elem>>>),
) {
    let n = d.len();
    let consistent = |d: &Vec<Vec<Option<Elem>>>, u: usize, v: usize| {
        (0..n).filter(|&w| w != u && w != v).all(|w| match (d[u][v], d[u][w], d[w][v]) {
            (Some(a), Some(b), Some(c)) => triangle_ok(m, a, b, c),
            _ => true,
        })
    };
    if i == pairs.len() {
        emit(d);
        return;
    }
    let (u, v) = pairs[i];
    if d[u][v].is_some() {
        if consistent(d, u, v) {
            fill(m, pairs, i + 1, values, d, emit);
        }
        return;
    }
    for &e in values {
        d[u][v] = Some(e);
        d[v][u] = Some(e);
        if consistent(d, u, v) {
            fill(m, pairs, i + 1, values, d, emit);
        }
    }
    d[u][v] = None;
    d[v][u] = None;
}

/// The 4-values condition read literally: for all `a, b, c, d` in the set,
/// if some `x` makes `a b x` and `c d x` triangles, some `y` makes `a c y`
/// and `b d y` triangles.
pub fn oracle_four_values(values: &[Q]) -> bool {
    let tri = |p: Q, q: Q, r: Q| p <= q + r && q <= p + r && r <= p + q;
    let s = values;
    for &a in s {
        for &b in s {
            for &c in s {
                for &d in s {
                    let has_x = s.iter().any(|&x| tri(a, b, x) && tri(c, d, x));
                    let has_y = s.iter().any(|&y| tri(a, c, y) && tri(b, d, y));
                    if has_x && !has_y {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Whether some multiple of `a` reaches `b`.
fn reaches(m: &DistanceMonoid, a: Elem, b: Elem, limit: usize) -> bool {
    let mut acc = a;
    for _ in 0..=limit {
        if m.leq(b, acc) {
            return true;
        }
        acc = m.sum(acc, a);
    }
    false
}

/// Nonzero blocks as sorted element lists: classes of mutual domination.
pub fn oracle_blocks(m: &DistanceMonoid, budget: &EnumerationBudget) -> Result<Vec<Vec<Elem>>> {
    let elems = budget.check_monoid(m)?;
    let nonzero: Vec<Elem> = elems.iter().copied().filter(|&e| !m.is_zero(e)).collect();
    let mut classes: Vec<Vec<Elem>> = Vec::new();
    for &a in &nonzero {
        match classes.iter_mut().find(|c| {
            let r = c[0];
            reaches(m, a, r, elems.len()) && reaches(m, r, a, elems.len())
        }) {
            Some(c) => c.push(a),
            None => classes.push(vec![a]),
        }
    }
    for c in &mut classes {
        c.sort();
    }
    classes.sort();
    Ok(classes)
}

fn class_of(classes: &[Vec<Elem>], e: Elem) -> Option<&Vec<Elem>> {
    classes.iter().find(|c| c.contains(&e))
}

/// All index sets `I` of `seq` of size below `n` such that, when `I` is a
/// proper subset, `ℓ ≻ b ⊕ Σ_{i∈I} seq_i` for every `b` in the block of the
/// largest dropped element.
pub fn oracle_best_subsequence(
    m: &DistanceMonoid,
    ell: Elem,
    seq: &[Elem],
    n: usize,
    budget: &EnumerationBudget,
) -> Result<Vec<Vec<usize>>> {
    budget.check_monoid(m)?;
    if seq.len() > budget.max_sum_length {
        return Err(Error::Budget(format!("{} summands, budget is {}", seq.len(), budget.max_sum_length)));
    }
    let classes = oracle_blocks(m, budget)?;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << seq.len()) {
        let kept: Vec<usize> = (0..seq.len()).filter(|i| mask >> i & 1 == 1).collect();
        if kept.len() >= n {
            continue;
        }
        let total = kept.iter().fold(m.zero(), |acc, &i| m.sum(acc, seq[i]));
        let dropped = (0..seq.len()).filter(|i| mask >> i & 1 == 0).map(|i| seq[i]).max();
        let ok = match dropped {
            None => m.cmp(total, ell).is_lt(),
            Some(a) => class_of(&classes, a)
                .map(|c| c.iter().all(|&b| m.cmp(m.sum(b, total), ell).is_lt()))
                .unwrap_or(false),
        };
        if ok {
            out.push(kept);
        }
    }
    Ok(out)
}

/// Distances realisable between `x'` and `y'` when `x, x'` and `y, y'`
/// each lie within distance `max B` of one another, `d(x, y) = ℓ`, and the
/// two pairs are further apart than `max B`.
pub fn oracle_block_type(m: &DistanceMonoid, block: &[Elem], ell: Elem, budget: &EnumerationBudget) -> Result<BTreeSet<Elem>> {
    let elems = budget.check_monoid(m)?;
    let top = *block.iter().max().ok_or_else(|| Error::Input("empty block".into()))?;
    let near: Vec<Elem> = elems.iter().copied().filter(|&e| m.leq(e, top)).collect();
    let far: Vec<Elem> = elems.iter().copied().filter(|&e| !m.leq(e, top)).collect();
    if !far.contains(&ell) {
        return Err(Error::Precondition(format!("{} is not beyond the block", m.label(ell))));
    }
    // points 0 = x, 1 = x', 2 = y, 3 = y'; zero distances allowed within a pair
    let mut out = BTreeSet::new();
    for &dxx in &near {
        for &dyy in &near {
            for &dxy2 in &far {
                for &dx2y in &far {
                    for &target in &far {
                        let d = [[m.zero(), dxx, ell, dxy2], [dxx, m.zero(), dx2y, target], [ell, dx2y, m.zero(), dyy], [dxy2, target, dyy, m.zero()]];
                        let ok = (0..4).all(|a| {
                            (0..4).all(|b| (0..4).all(|c| m.leq(d[a][c], m.sum(d[a][b], d[b][c]))))
                        });
                        if ok {
                            out.insert(target);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Whether the original distances of `s` extend to a metric in which
/// every function and type of `s` is respected: originals share a ball of
/// `B` exactly when their distance is at most `max B`, and originals in
/// balls related by a type are at a distance in that type.
pub fn oracle_lstar_completable(s: &LStar, budget: &EnumerationBudget) -> Result<bool> {
    let m = s.monoid();
    let elems = budget.check_monoid(m)?;
    let originals = s.originals();
    budget.check_vertices(originals.len())?;
    let classes = oracle_blocks(m, budget)?;
    // ball levels: every class except the largest
    let levels: Vec<&Vec<Elem>> = classes.iter().take(classes.len().saturating_sub(1)).collect();
    let ball_ids: BTreeMap<Elem, usize> =
        levels.iter().enumerate().map(|(i, c)| (c[0], i + 1)).collect();
    let mut ups: Vec<Vec<usize>> = Vec::new();
    for &v in &originals {
        let mut row = Vec::new();
        for c in &levels {
            let b = crate::blocks::BlockId(ball_ids[&c[0]]);
            row.push(s.up(v, b).ok_or_else(|| Error::Precondition(format!("`{}` has no ball at every level", s.id(v))))?);
        }
        ups.push(row);
    }
    let hit: BTreeSet<usize> = ups.iter().flatten().copied().collect();
    if s.balls().iter().any(|b| !hit.contains(b)) {
        return Err(Error::Precondition("the structure has balls without original vertices".into()));
    }
    let k = originals.len();
    let mut g = MGraph::new(s.monoid_arc().clone(), originals.iter().map(|&v| s.id(v).into()).collect())?;
    for i in 0..k {
        for j in i + 1..k {
            if let Some(e) = s.dist(originals[i], originals[j]) {
                g.set_dist(i, j, e)?;
            }
        }
    }
    let _ = elems;
    let admissible = |c: &MGraph| {
        (0..k).all(|i| {
            (i + 1..k).all(|j| {
                let d = c.dist(i, j).expect("complete");
                levels.iter().enumerate().all(|(l, blk)| {
                    let top = *blk.last().expect("nonempty");
                    let same = ups[i][l] == ups[j][l];
                    if same != m.leq(d, top) {
                        return false;
                    }
                    same || s.type_of(ups[i][l], ups[j][l]).is_none_or(|t| t.contains(d))
                })
            })
        })
    };
    Ok(enumerate_completions(&g, budget)?.iter().any(admissible))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::build_truncated;
    use alloc::sync::Arc;

    fn trunc(vals: &[i64]) -> Arc<DistanceMonoid> {
        Arc::new(build_truncated(&vals.iter().map(|&v| Q::from_integer(v)).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn completions_of_a_path() {
        let m = trunc(&[1, 3]);
        let mut g = MGraph::with_size(m.clone(), 3);
        let one = m.parse_element("1").unwrap();
        g.set_dist(0, 1, one).unwrap();
        g.set_dist(0, 2, one).unwrap();
        let cs = enumerate_completions(&g, &EnumerationBudget::default()).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].dist(1, 2), Some(one));

        g.set_dist(1, 2, m.parse_element("3").unwrap()).unwrap();
        assert!(enumerate_completions(&g, &EnumerationBudget::default()).unwrap().is_empty());
        g.remove_dist(1, 2);
        g.set_dist(1, 2, one).unwrap();
        assert_eq!(enumerate_completions(&g, &EnumerationBudget::default()).unwrap(), vec![g.clone()]);
    }

    #[test]
    fn budgets_refuse() {
        let m = trunc(&[1, 3]);
        let g = MGraph::with_size(m, 6);
        assert!(matches!(enumerate_completions(&g, &EnumerationBudget::default()), Err(Error::Budget(_))));
        let big = trunc(&[1, 2, 3, 4, 5, 6, 7, 8]);
        assert!(matches!(oracle_blocks(&big, &EnumerationBudget::default()), Err(Error::Budget(_))));
    }

    #[test]
    fn four_values() {
        let q = |v: &[i64]| v.iter().map(|&x| Q::from_integer(x)).collect::<Vec<_>>();
        assert!(oracle_four_values(&q(&[1, 2, 3, 4])));
        assert!(!oracle_four_values(&q(&[1, 2, 4])));
        assert!(oracle_four_values(&q(&[7])));
    }

    #[test]
    fn blocks() {
        let m = trunc(&[1, 3, 5]);
        let e = |s: &str| m.parse_element(s).unwrap();
        assert_eq!(
            oracle_blocks(&m, &EnumerationBudget::default()).unwrap(),
            vec![vec![e("1")], vec![e("3"), e("5")]]
        );
    }

    #[test]
    fn best_subsequences() {
        let b = EnumerationBudget::default();
        let m = trunc(&[1, 3]);
        let e = |s: &str| m.parse_element(s).unwrap();
        let seq = vec![e("1"); 4];
        let all = oracle_best_subsequence(&m, e("3"), &seq, 3, &b).unwrap();
        assert!(all.contains(&vec![0]));
        assert_eq!(oracle_best_subsequence(&m, e("3"), &[], 3, &b).unwrap(), vec![Vec::<usize>::new()]);

        let m = trunc(&[1, 3, 5]);
        let e = |s: &str| m.parse_element(s).unwrap();
        let seq = vec![e("1"), e("1"), e("3")];
        assert!(oracle_best_subsequence(&m, e("5"), &seq, 4, &b).unwrap().contains(&vec![0, 2]));
    }

    #[test]
    fn block_types_by_realisation() {
        let m = trunc(&[1, 3, 5]);
        let e = |s: &str| m.parse_element(s).unwrap();
        let b = EnumerationBudget::default();
        let one = vec![e("1")];
        assert_eq!(oracle_block_type(&m, &one, e("3"), &b).unwrap(), [e("3")].into_iter().collect());
        assert_eq!(oracle_block_type(&m, &one, e("5"), &b).unwrap(), [e("5")].into_iter().collect());
    }
}
