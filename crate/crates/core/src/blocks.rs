//! Archimedean blocks and block-types.
//!
//! Two nonzero elements share a block when each is dominated by some finite
//! multiple of the other. Blocks are `⪯`-intervals and are numbered in
//! increasing order, with [`BlockId::ZERO`] reserved for `{0}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use crate::error::{precondition, Error, Result};
use crate::monoid::{DistanceMonoid, Elem, Q};
use crate::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub usize);

impl BlockId {
    pub const ZERO: BlockId = BlockId(0);

    pub fn is_zero(self) -> bool {
        self == BlockId::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Layout {
    /// `of_elem[i]` is the block of element `i`; `ranges[b]` the inclusive
    /// index interval of block `b`.
    Finite { of_elem: Vec<usize>, ranges: Vec<(u32, u32)> },
    /// Block 1 holds `b·dx` (b > 0), block 2 every element with positive real part.
    Infinitesimal,
}

const INFINITESIMALS: BlockId = BlockId(1);
const STANDARD: BlockId = BlockId(2);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    layout: Layout,
}

/// Computes the block decomposition of `m`.
///
/// Fails when the mutual-domination relation of a table is not a partition
/// into intervals, which only happens for tables violating the axioms.
pub fn decompose(m: &DistanceMonoid) -> Result<BlockDecomposition> {
    let Some(n) = m.len() else {
        return Ok(BlockDecomposition { layout: Layout::Infinitesimal });
    };
    let dom: Vec<u32> = (0..n as u32).map(|i| dominance(m, Elem::Idx(i))).collect();
    let same = |a: usize, b: usize| dom[a] >= b as u32 && dom[b] >= a as u32;
    let mut of_elem = alloc::vec![0usize; n];
    let mut ranges = alloc::vec![(0u32, 0u32)];
    let mut start = 1;
    while start < n {
        let mut end = start;
        while end + 1 < n && same(start, end + 1) {
            end += 1;
        }
        // each element of the interval must relate to every other and to nothing outside
        for a in start..=end {
            for b in 1..n {
                if same(a, b) != (start..=end).contains(&b) {
                    return Err(Error::Unsupported(format!(
                        "elements #{} and #{} break the interval structure of blocks",
                        a, b
                    )));
                }
            }
            of_elem[a] = ranges.len();
        }
        ranges.push((start as u32, end as u32));
        start = end + 1;
    }
    Ok(BlockDecomposition { layout: Layout::Finite { of_elem, ranges } })
}

/// Largest element reached by the multiples of `r` (finite monoids).
fn dominance(m: &DistanceMonoid, r: Elem) -> u32 {
    let n = m.len().expect("finite monoid");
    let mut seen = alloc::vec![false; n];
    let mut acc = r;
    let mut best = r;
    while let Elem::Idx(i) = acc {
        if seen[i as usize] {
            break;
        }
        seen[i as usize] = true;
        best = best.max(acc);
        acc = m.sum(acc, r);
    }
    match best {
        Elem::Idx(i) => i,
        Elem::Inf(..) => unreachable!(),
    }
}

impl BlockDecomposition {
    /// Nonzero blocks in increasing order.
    pub fn nonzero_blocks(&self) -> Vec<BlockId> {
        (1..=self.count_nonzero()).map(BlockId).collect()
    }

    pub fn count_nonzero(&self) -> usize {
        match &self.layout {
            Layout::Finite { ranges, .. } => ranges.len() - 1,
            Layout::Infinitesimal => 2,
        }
    }

    /// Largest block, or the zero block for the trivial monoid.
    pub fn max_block(&self) -> BlockId {
        BlockId(self.count_nonzero())
    }

    pub fn is_maximal(&self, b: BlockId) -> bool {
        b == self.max_block()
    }

    /// Nonzero non-maximal blocks, in increasing order.
    pub fn ball_blocks(&self) -> Vec<BlockId> {
        let max = self.max_block();
        self.nonzero_blocks().into_iter().filter(|&b| b != max).collect()
    }

    pub fn block_of(&self, e: Elem) -> BlockId {
        match (&self.layout, e) {
            (Layout::Finite { of_elem, .. }, Elem::Idx(i)) => BlockId(of_elem[i as usize]),
            (Layout::Infinitesimal, Elem::Inf(a, b)) => {
                if !a.is_zero() {
                    STANDARD
                } else if !b.is_zero() {
                    INFINITESIMALS
                } else {
                    BlockId::ZERO
                }
            }
            _ => panic!("element {:?} does not belong to this decomposition", e),
        }
    }

    pub fn contains(&self, b: BlockId, e: Elem) -> bool {
        self.block_of(e) == b
    }

    /// The next smaller block, `None` for the zero block.
    pub fn predecessor(&self, b: BlockId) -> Option<BlockId> {
        b.0.checked_sub(1).map(BlockId)
    }

    /// Members of a block, finite monoids only.
    pub fn members(&self, b: BlockId) -> Option<Vec<Elem>> {
        match &self.layout {
            Layout::Finite { ranges, .. } => {
                let (lo, hi) = *ranges.get(b.0)?;
                Some((lo..=hi).map(Elem::Idx).collect())
            }
            Layout::Infinitesimal => None,
        }
    }

    pub fn min_element(&self, b: BlockId) -> Option<Elem> {
        match &self.layout {
            Layout::Finite { ranges, .. } => ranges.get(b.0).map(|r| Elem::Idx(r.0)),
            Layout::Infinitesimal => b.is_zero().then(|| Elem::Inf(Q::zero(), Q::zero())),
        }
    }

    pub fn max_element(&self, b: BlockId) -> Option<Elem> {
        match &self.layout {
            Layout::Finite { ranges, .. } => ranges.get(b.0).map(|r| Elem::Idx(r.1)),
            Layout::Infinitesimal => b.is_zero().then(|| Elem::Inf(Q::zero(), Q::zero())),
        }
    }

    /// A fixed element of the block: its least element when there is one,
    /// `dx` and `1` for the two nonzero blocks of the infinitesimal monoid.
    pub fn canonical(&self, b: BlockId) -> Elem {
        match &self.layout {
            Layout::Finite { ranges, .. } => Elem::Idx(ranges[b.0].0),
            Layout::Infinitesimal => match b {
                BlockId::ZERO => Elem::Inf(Q::zero(), Q::zero()),
                INFINITESIMALS => Elem::Inf(Q::zero(), Q::one()),
                _ => Elem::Inf(Q::one(), Q::zero()),
            },
        }
    }

    /// Whether some `x ∈ b` satisfies `target ⪯ e ⊕ x`.
    pub fn exists_reaching(&self, m: &DistanceMonoid, b: BlockId, e: Elem, target: Elem) -> bool {
        match (&self.layout, e, target) {
            (Layout::Finite { ranges, .. }, ..) => target <= m.sum(e, Elem::Idx(ranges[b.0].1)),
            (Layout::Infinitesimal, Elem::Inf(er, ei), Elem::Inf(tr, ti)) => match b {
                BlockId::ZERO => (er, ei) >= (tr, ti),
                INFINITESIMALS => er >= tr,
                _ => true,
            },
            _ => panic!("mixed element representations"),
        }
    }

    /// Human-readable block content, such as `[3 5]` or `[infinitesimals]`.
    pub fn describe(&self, m: &DistanceMonoid, b: BlockId) -> String {
        match self.members(b) {
            Some(ms) => {
                let labels: Vec<String> = ms.iter().map(|&e| m.label(e)).collect();
                format!("[{}]", labels.join(" "))
            }
            None => match b {
                BlockId::ZERO => String::from("[0]"),
                INFINITESIMALS => String::from("[infinitesimals]"),
                _ => String::from("[standard]"),
            },
        }
    }
}

/// Whether every nonzero element dominates every other under finite
/// multiples; on failure returns `(r, s)` with `n × r ≺ s` for all `n`.
pub fn is_archimedean(m: &DistanceMonoid) -> Result<Verdict<(Elem, Elem)>> {
    let blocks = m.blocks()?;
    if blocks.count_nonzero() <= 1 {
        return Ok(if m.is_finite() { Verdict::Holds } else { Verdict::HoldsAnalytically });
    }
    let r = blocks.canonical(BlockId(1));
    let s = blocks.canonical(BlockId(2));
    Ok(Verdict::Fails((r, s)))
}

/// Members of a block-type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeMembers {
    /// Explicit increasing list.
    Finite(Vec<Elem>),
    /// Every element `r + b·dx` with the given real part `r > 0`.
    SameReal(Q),
}

/// `t(B, ℓ)`: the distances that can appear between two balls of diameter
/// `B` once `ℓ` appears between them.
///
/// Equality ignores the representative.
#[derive(Clone, Debug)]
pub struct BlockType {
    pub block: BlockId,
    pub rep: Elem,
    pub members: TypeMembers,
}

impl PartialEq for BlockType {
    fn eq(&self, other: &Self) -> bool {
        self.block == other.block && self.members == other.members
    }
}

impl Eq for BlockType {}

impl PartialOrd for BlockType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BlockType {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.block, &self.members).cmp(&(other.block, &other.members))
    }
}

impl BlockType {
    pub fn contains(&self, e: Elem) -> bool {
        match (&self.members, e) {
            (TypeMembers::Finite(v), _) => v.binary_search(&e).is_ok(),
            (TypeMembers::SameReal(r), Elem::Inf(a, _)) => a == *r,
            _ => false,
        }
    }

    /// `self ⊇ other`.
    pub fn includes(&self, other: &BlockType) -> bool {
        match (&self.members, &other.members) {
            (_, TypeMembers::Finite(v)) => v.iter().all(|&e| self.contains(e)),
            (TypeMembers::SameReal(a), TypeMembers::SameReal(b)) => a == b,
            (TypeMembers::Finite(_), TypeMembers::SameReal(_)) => false,
        }
    }

    pub fn max(&self) -> Option<Elem> {
        match &self.members {
            TypeMembers::Finite(v) => v.last().copied(),
            TypeMembers::SameReal(_) => None,
        }
    }

    /// Explicit members, when finite.
    pub fn finite_members(&self) -> Option<&[Elem]> {
        match &self.members {
            TypeMembers::Finite(v) => Some(v),
            TypeMembers::SameReal(_) => None,
        }
    }
}

/// Computes `t(B, ℓ) = { ℓ' ∈ B_ℓ : ∃ b ∈ B ∪ {0}. ℓ' ⪯ ℓ ⊕ b ∧ ℓ ⪯ ℓ' ⊕ b }`.
pub fn block_type(m: &DistanceMonoid, b: BlockId, ell: Elem) -> Result<BlockType> {
    let blocks = m.blocks()?;
    let outer = blocks.block_of(ell);
    if outer <= b {
        return Err(precondition!(
            "block-type needs {} in a block above {}",
            m.label(ell),
            blocks.describe(m, b)
        ));
    }
    let members = match blocks.members(outer) {
        Some(candidates) => {
            // within B ∪ {0} the largest element is the strongest witness
            let w = blocks.max_element(b).expect("finite block");
            let lhs = m.sum(ell, w);
            TypeMembers::Finite(candidates.into_iter().filter(|&x| x <= lhs && ell <= m.sum(x, w)).collect())
        }
        None => match ell {
            Elem::Inf(r, _) if b == INFINITESIMALS => TypeMembers::SameReal(r),
            _ => TypeMembers::Finite(alloc::vec![ell]),
        },
    };
    Ok(BlockType { block: b, rep: ell, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{build_infinitesimal, build_truncated, build_ultrametric, inf, DistanceMonoid};
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn trunc(ns: &[i64]) -> DistanceMonoid {
        build_truncated(&ns.iter().map(|&n| Q::from_integer(n)).collect::<Vec<_>>()).unwrap()
    }

    fn el(m: &DistanceMonoid, s: &str) -> Elem {
        m.parse_element(s).unwrap()
    }

    fn described(m: &DistanceMonoid) -> Vec<String> {
        let b = m.blocks().unwrap();
        b.nonzero_blocks().into_iter().map(|id| b.describe(m, id)).collect()
    }

    #[test]
    fn blocks_of_examples() {
        assert_eq!(described(&trunc(&[1, 3, 5])), vec!["[1]", "[3 5]"]);
        assert_eq!(described(&build_ultrametric(4).unwrap()), vec!["[1]", "[2]", "[3]"]);
        assert_eq!(described(&trunc(&[1, 2, 3, 4])), vec!["[1 2 3 4]"]);
        let m = build_infinitesimal();
        let b = m.blocks().unwrap();
        assert_eq!(b.block_of(inf(0, 3)), BlockId(1));
        assert_eq!(b.block_of(inf(2, 3)), BlockId(2));
        assert_eq!(b.ball_blocks(), vec![BlockId(1)]);
    }

    #[test]
    fn archimedean_examples() {
        assert_eq!(is_archimedean(&trunc(&[1, 2, 3, 4])).unwrap(), Verdict::Holds);
        let m = trunc(&[1, 3]);
        assert_eq!(is_archimedean(&m).unwrap(), Verdict::Fails((el(&m, "1"), el(&m, "3"))));
        assert_eq!(is_archimedean(&build_infinitesimal()).unwrap(), Verdict::Fails((inf(0, 1), inf(1, 0))));
    }

    #[test]
    fn block_types_of_example() {
        let m = trunc(&[1, 3, 5]);
        let t3 = block_type(&m, BlockId(1), el(&m, "3")).unwrap();
        let t5 = block_type(&m, BlockId(1), el(&m, "5")).unwrap();
        assert_eq!(t3.finite_members().unwrap(), &[el(&m, "3")]);
        assert_eq!(t5.finite_members().unwrap(), &[el(&m, "5")]);
        assert!(block_type(&m, BlockId(2), el(&m, "3")).is_err());
        assert!(block_type(&m, BlockId(1), el(&m, "1")).is_err());
    }

    #[test]
    fn infinitesimal_block_types() {
        let m = build_infinitesimal();
        let t = block_type(&m, BlockId(1), inf(2, 3)).unwrap();
        assert!(t.contains(inf(2, 0)) && t.contains(inf(2, 7)) && !t.contains(inf(3, 3)));
        assert_eq!(t, block_type(&m, BlockId(1), inf(2, 0)).unwrap());
        let z = block_type(&m, BlockId::ZERO, inf(2, 3)).unwrap();
        assert!(z.contains(inf(2, 3)) && !z.contains(inf(2, 4)));
        assert!(t.includes(&z) && !z.includes(&t));
    }

    fn table_monoids() -> Vec<DistanceMonoid> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << 7) {
            let vals: Vec<i64> = (1..=7).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            if vals.len() <= 7 {
                let m = trunc(&vals);
                if crate::monoid::validate_monoid(&m).is_valid() {
                    out.push(m);
                }
            }
        }
        for n in 1..=8 {
            out.push(build_ultrametric(n).unwrap());
        }
        out
    }

    #[test]
    fn blocks_are_intervals_and_partition() {
        for m in table_monoids() {
            let b = m.blocks().unwrap();
            let mut covered = Vec::new();
            for id in b.nonzero_blocks() {
                let ms = b.members(id).unwrap();
                assert!(ms.windows(2).all(|w| matches!((w[0], w[1]), (Elem::Idx(x), Elem::Idx(y)) if y == x + 1)));
                covered.extend(ms);
            }
            assert_eq!(covered, m.nonzero_elements().unwrap());
            let arch = is_archimedean(&m).unwrap().holds();
            assert_eq!(arch, b.count_nonzero() <= 1);
        }
    }

    #[test]
    fn block_type_observation_clauses() {
        for m in table_monoids() {
            let b = m.blocks().unwrap();
            let nz = b.nonzero_blocks();
            for &bb in &nz {
                let above: Vec<Elem> = m.nonzero_elements().unwrap().into_iter().filter(|&e| b.block_of(e) > bb).collect();
                for &l in &above {
                    let t = block_type(&m, bb, l).unwrap();
                    assert!(t.contains(l));
                    assert!(t.finite_members().unwrap().iter().all(|&x| b.block_of(x) == b.block_of(l)));
                    for &l2 in &above {
                        let t2 = block_type(&m, bb, l2).unwrap();
                        let meet = t.finite_members().unwrap().iter().any(|&x| t2.contains(x));
                        assert!(t == t2 || !meet, "types over {:?} overlap for {:?} {:?}", bb, l, l2);
                    }
                    for &bigger in nz.iter().filter(|&&x| x > bb && x < b.block_of(l)) {
                        assert!(block_type(&m, bigger, l).unwrap().includes(&t));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn inflationary_on_valid_tables(vals in proptest::collection::btree_set(1i64..12, 1..5)) {
            let v: Vec<i64> = vals.into_iter().collect();
            let m = trunc(&v);
            if crate::monoid::validate_monoid(&m).is_valid() {
                for a in m.elements().unwrap() {
                    for c in m.elements().unwrap() {
                        prop_assert!(a <= m.sum(a, c));
                    }
                }
            }
        }
    }
}
