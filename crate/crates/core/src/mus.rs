//! Maximum useful distances, important summands and the bounds derived
//! from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::blocks::{is_archimedean, BlockId};
use crate::error::{input_err, precondition, Error, Result};
use crate::monoid::{sum_closure, DistanceMonoid, DistanceSet, Elem, Q};
use crate::Verdict;

/// Intermediate values of the recursion for one `ℓ ∈ S` and one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MusStep {
    pub block: BlockId,
    /// `d_i(ℓ)`; zero when no element of the block helps reach `ℓ`.
    pub d: Elem,
    /// `X_i(ℓ)`.
    pub x: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MusTable {
    pub per_block: BTreeMap<BlockId, Elem>,
    /// Per `ℓ ∈ S`, the steps over blocks in decreasing order.
    pub trace: Vec<(Elem, Vec<MusStep>)>,
}

impl MusTable {
    pub fn get(&self, b: BlockId) -> Elem {
        self.per_block[&b]
    }
}

/// Computes `mus(B, S)` for every nonzero block `B`.
pub fn compute_mus(m: &DistanceMonoid, s: &DistanceSet) -> Result<MusTable> {
    let blocks = m.blocks()?;
    let mut desc = blocks.nonzero_blocks();
    desc.reverse();
    let zero = m.zero();
    let mut trace = Vec::with_capacity(s.len());
    let mut best: BTreeMap<BlockId, Option<Elem>> = desc.iter().map(|&b| (b, None)).collect();

    for ell in s.iter() {
        let b_ell = blocks.block_of(ell);
        let mut steps = Vec::with_capacity(desc.len());
        let mut prev: BTreeSet<Elem> = BTreeSet::new();
        for &bi in &desc {
            let (d, x) = if bi > b_ell {
                (blocks.canonical(bi), BTreeSet::new())
            } else if bi == b_ell {
                (ell, x_set(m, s, bi, ell))
            } else {
                let d = prev.iter().map(|&e| least_reaching(m, bi, ell, e)).max().unwrap_or(zero);
                let xb = x_set(m, s, bi, d);
                let x = prev.iter().flat_map(|&a| xb.iter().map(move |&b| (a, b))).map(|(a, b)| m.sum(a, b)).collect();
                (d, x)
            };
            if d != zero {
                let slot = best.get_mut(&bi).expect("block listed");
                *slot = Some(slot.map_or(d, |cur| cur.max(d)));
            }
            steps.push(MusStep { block: bi, d, x: x.iter().copied().collect() });
            prev = x;
        }
        trace.push((ell, steps));
    }

    let per_block = best.into_iter().map(|(b, v)| (b, v.unwrap_or_else(|| blocks.canonical(b)))).collect();
    Ok(MusTable { per_block, trace })
}

/// `X(B, e)`: sums of elements of `B ∩ S` (including the empty sum) that stay `⪯ e`.
fn x_set(m: &DistanceMonoid, s: &DistanceSet, b: BlockId, e: Elem) -> BTreeSet<Elem> {
    let blocks = m.blocks().expect("blocks computed");
    let gens: Vec<Elem> = s.iter().filter(|&x| blocks.block_of(x) == b).collect();
    let mut out = BTreeSet::new();
    out.insert(m.zero());
    let mut frontier = alloc::vec![m.zero()];
    while let Some(a) = frontier.pop() {
        for &g in &gens {
            let c = m.sum(a, g);
            if c <= e && out.insert(c) {
                frontier.push(c);
            }
        }
    }
    out
}

/// `f(B, ℓ, e)`: the least `a ∈ B` with `ℓ ⪯ e ⊕ a`, the block's canonical
/// element when every member qualifies but none is least, zero when none does.
fn least_reaching(m: &DistanceMonoid, b: BlockId, ell: Elem, e: Elem) -> Elem {
    let blocks = m.blocks().expect("blocks computed");
    if let Some(members) = blocks.members(b) {
        return members.into_iter().find(|&a| ell <= m.sum(e, a)).unwrap_or(m.zero());
    }
    let (Elem::Inf(er, ei), Elem::Inf(lr, li)) = (e, ell) else {
        unreachable!("infinitesimal elements")
    };
    let canonical = blocks.canonical(b);
    if b == BlockId(1) {
        match er.cmp(&lr) {
            core::cmp::Ordering::Greater => canonical,
            core::cmp::Ordering::Equal if li > ei => Elem::Inf(Q::zero(), li - ei),
            core::cmp::Ordering::Equal => canonical,
            core::cmp::Ordering::Less => m.zero(),
        }
    } else {
        let gap = lr - er;
        if gap.is_positive() {
            let inf = if li > ei { li - ei } else { Q::zero() };
            Elem::Inf(gap, inf)
        } else {
            canonical
        }
    }
}

/// A failure of the defining property: `e ⊕ candidate ≺ ℓ` although `e ⊕ b ⪰ ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MusViolation {
    pub ell: Elem,
    pub e: Elem,
    pub b: Elem,
}

/// Checks that `candidate` may serve as `mus(block, S)`: for every `ℓ ∈ S`
/// and every sum `e` of at most `max_summands` elements of `S`, either
/// `e ⊕ candidate ⪰ ℓ` or `e ⊕ b ≺ ℓ` for all `b` in the block.
pub fn check_mus_property(
    m: &DistanceMonoid,
    s: &DistanceSet,
    block: BlockId,
    candidate: Elem,
    max_summands: usize,
) -> Result<Verdict<MusViolation>> {
    let blocks = m.blocks()?;
    if block.is_zero() || blocks.block_of(candidate) != block {
        return Err(input_err!("{} is not in block {}", m.label(candidate), blocks.describe(m, block)));
    }
    let sums = sum_closure(m, s, max_summands.max(1))?;
    for ell in s.iter() {
        for &e in &sums.values {
            if m.sum(e, candidate) >= ell || !blocks.exists_reaching(m, block, e, ell) {
                continue;
            }
            let b = reaching_member(m, block, e, ell);
            return Ok(Verdict::Fails(MusViolation { ell, e, b }));
        }
    }
    Ok(Verdict::Holds)
}

fn reaching_member(m: &DistanceMonoid, block: BlockId, e: Elem, ell: Elem) -> Elem {
    let blocks = m.blocks().expect("blocks computed");
    if let Some(top) = blocks.max_element(block) {
        return top;
    }
    let (Elem::Inf(er, ei), Elem::Inf(lr, li)) = (e, ell) else {
        unreachable!("infinitesimal elements")
    };
    let one = Q::from_integer(1);
    if block == BlockId(1) {
        Elem::Inf(Q::zero(), if li > ei { li - ei + one } else { one })
    } else {
        Elem::Inf(if lr > er { lr - er + one } else { one }, Q::zero())
    }
}

/// The quantities `n_i`, `n(S)` and `2(m+1)·n(S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub per_block_n: BTreeMap<BlockId, usize>,
    pub n_of_s: usize,
    /// Number of nonzero blocks of the monoid.
    pub m: usize,
    pub obstruction_bound: usize,
}

/// Least `n ≥ 1` with `n × a ⪰ target`, if any.
pub fn least_multiple_reaching(m: &DistanceMonoid, a: Elem, target: Elem) -> Option<usize> {
    match (m.len(), a, target) {
        (Some(len), ..) => {
            let mut acc = a;
            for n in 1..=len + 1 {
                if acc >= target {
                    return Some(n);
                }
                acc = m.sum(acc, a);
            }
            None
        }
        (None, Elem::Inf(ar, ai), Elem::Inf(tr, ti)) => {
            let ceil_div = |num: Q, den: Q| -> usize {
                let q = num / den;
                let c = q.ceil().to_integer();
                c.max(1) as usize
            };
            if ar.is_zero() {
                if !tr.is_zero() || ai.is_zero() {
                    return if (tr, ti) <= (ar, ai) { Some(1) } else { None };
                }
                Some(ceil_div(ti, ai))
            } else {
                let n = ceil_div(tr, ar);
                let nq = Q::from_integer(n as i64);
                if nq * ar > tr || nq * ai >= ti {
                    Some(n)
                } else {
                    Some(n + 1)
                }
            }
        }
        _ => None,
    }
}

pub fn bound_n_of_s(m: &DistanceMonoid, s: &DistanceSet, mus: &MusTable) -> Result<Bounds> {
    let blocks = m.blocks()?;
    let mut per_block_n = BTreeMap::new();
    for b in blocks.nonzero_blocks() {
        let Some(least) = s.iter().find(|&x| blocks.block_of(x) == b) else { continue };
        let n = least_multiple_reaching(m, least, mus.get(b))
            .ok_or_else(|| Error::Internal("multiples of a block member never reach its mus".into()))?;
        per_block_n.insert(b, n);
    }
    let n_of_s = 1 + per_block_n.values().sum::<usize>();
    let mcount = blocks.count_nonzero();
    Ok(Bounds { per_block_n, n_of_s, m: mcount, obstruction_bound: 2 * (mcount + 1) * n_of_s })
}

/// Indices of the important summands of `seq` with respect to `ℓ`.
///
/// Greedy: per block a counter starts at zero; a summand is kept while its
/// block's counter is strictly below that block's mus.
pub fn important_indices(
    m: &DistanceMonoid,
    s: &DistanceSet,
    mus: &MusTable,
    ell: Elem,
    seq: &[Elem],
) -> Result<Vec<usize>> {
    if !s.contains(ell) {
        return Err(precondition!("{} is not in the distance set", m.label(ell)));
    }
    if let Some(&e) = seq.iter().find(|&&e| !s.contains(e)) {
        return Err(precondition!("summand {} is not in the distance set", m.label(e)));
    }
    let total = m.sum_all(seq.iter().copied());
    if total >= ell {
        return Err(precondition!("{} does not exceed the sum {}", m.label(ell), m.label(total)));
    }
    let blocks = m.blocks()?;
    let mut counters: BTreeMap<BlockId, Elem> = BTreeMap::new();
    let mut kept = Vec::new();
    for (i, &e) in seq.iter().enumerate() {
        let b = blocks.block_of(e);
        let c = counters.entry(b).or_insert_with(|| m.zero());
        if *c < mus.get(b) {
            *c = m.sum(*c, e);
            kept.push(i);
        }
    }
    Ok(kept)
}

pub fn important_subsequence(
    m: &DistanceMonoid,
    s: &DistanceSet,
    mus: &MusTable,
    ell: Elem,
    seq: &[Elem],
) -> Result<Vec<Elem>> {
    Ok(important_indices(m, s, mus, ell, seq)?.into_iter().map(|i| seq[i]).collect())
}

/// Upper bound on the number of vertices of a non-metric cycle with
/// distances in `S`, for archimedean monoids.
pub fn bound_cycle_length_archimedean(m: &DistanceMonoid, s: &DistanceSet) -> Result<usize> {
    if !is_archimedean(m)?.holds() {
        return Err(precondition!("the monoid is not archimedean"));
    }
    let mut bound = 1;
    for a in s.iter() {
        for b in s.iter() {
            let k = least_multiple_reaching(m, b, a)
                .ok_or_else(|| Error::Internal("archimedean monoid without dominating multiple".into()))?;
            bound = bound.max(k);
        }
    }
    Ok(bound)
}
