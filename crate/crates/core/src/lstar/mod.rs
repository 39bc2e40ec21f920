//! Ball-vertex expansions of ordered spaces.
//!
//! An [`LStar`] structure has original vertices carrying distances and ball
//! vertices, one per ball of each nonzero non-maximal block. A single map
//! `up` holds both kinds of unary function: for an original `v` it gives the
//! ball `f_B(v)`, and for a ball `b` of block `B` it gives `f_{B,B'}(b)`.
//! Pairs of balls of the same block may carry a block-type.

mod complete;

pub use complete::{
    complete_order, extract_obstruction, star_completion, CompletionPlan, Obstruction, StarOutcome, WitnessPath,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::blocks::{block_type, BlockId, BlockType};
use crate::error::{input_err, precondition, Result};
use crate::graph::MGraph;
use crate::monoid::{DistanceMonoid, Elem};
use crate::order::{ball_classes, check_convex_order};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Original,
    Ball(BlockId),
}

#[derive(Clone, Debug)]
pub struct LStar {
    monoid: Arc<DistanceMonoid>,
    ids: Vec<String>,
    kinds: Vec<VertexKind>,
    index: BTreeMap<String, usize>,
    dist: BTreeMap<(usize, usize), Elem>,
    up: BTreeMap<(usize, BlockId), usize>,
    types: BTreeMap<(usize, usize), BlockType>,
    order: Vec<usize>,
}

impl PartialEq for LStar {
    fn eq(&self, other: &Self) -> bool {
        *self.monoid == *other.monoid
            && self.ids == other.ids
            && self.kinds == other.kinds
            && self.dist == other.dist
            && self.up == other.up
            && self.types == other.types
            && self.order == other.order
    }
}

impl Eq for LStar {}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl LStar {
    pub fn new(monoid: Arc<DistanceMonoid>) -> Result<Self> {
        monoid.blocks()?;
        Ok(LStar {
            monoid,
            ids: Vec::new(),
            kinds: Vec::new(),
            index: BTreeMap::new(),
            dist: BTreeMap::new(),
            up: BTreeMap::new(),
            types: BTreeMap::new(),
            order: Vec::new(),
        })
    }

    pub fn monoid(&self) -> &DistanceMonoid {
        &self.monoid
    }

    pub fn monoid_arc(&self) -> &Arc<DistanceMonoid> {
        &self.monoid
    }

    /// Nonzero non-maximal blocks, increasing.
    pub fn ball_blocks(&self) -> Vec<BlockId> {
        self.monoid.blocks().expect("checked at construction").ball_blocks()
    }

    fn add_vertex(&mut self, id: String, kind: VertexKind) -> Result<usize> {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(input_err!("invalid vertex id {:?}", id));
        }
        if self.index.contains_key(&id) {
            return Err(input_err!("duplicate vertex `{}`", id));
        }
        let v = self.ids.len();
        self.index.insert(id.clone(), v);
        self.ids.push(id);
        self.kinds.push(kind);
        Ok(v)
    }

    pub fn add_original(&mut self, id: impl Into<String>) -> Result<usize> {
        self.add_vertex(id.into(), VertexKind::Original)
    }

    pub fn add_ball(&mut self, id: impl Into<String>, block: BlockId) -> Result<usize> {
        if !self.ball_blocks().contains(&block) {
            return Err(input_err!("balls exist only for nonzero non-maximal blocks"));
        }
        self.add_vertex(id.into(), VertexKind::Ball(block))
    }

    /// `id`, or `id` followed by enough primes to be unused.
    pub fn fresh_id(&self, id: &str) -> String {
        let mut s = id.to_string();
        while self.index.contains_key(&s) {
            s.push('\'');
        }
        s
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    pub fn is_original(&self, v: usize) -> bool {
        self.kinds[v] == VertexKind::Original
    }

    pub fn originals(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_original(v)).collect()
    }

    pub fn balls(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| !self.is_original(v)).collect()
    }

    pub fn balls_of(&self, b: BlockId) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.kinds[v] == VertexKind::Ball(b)).collect()
    }

    pub fn dist(&self, u: usize, v: usize) -> Option<Elem> {
        self.dist.get(&key(u, v)).copied()
    }

    pub fn set_dist(&mut self, u: usize, v: usize, e: Elem) -> Result<()> {
        if u >= self.len() || v >= self.len() || u == v {
            return Err(input_err!("distance needs two distinct vertices"));
        }
        if !self.is_original(u) || !self.is_original(v) {
            return Err(input_err!("distances join original vertices only"));
        }
        if !self.monoid.contains(e) || self.monoid.is_zero(e) {
            return Err(input_err!("distances must be nonzero monoid elements"));
        }
        match self.dist.insert(key(u, v), e) {
            Some(old) if old != e => {
                self.dist.insert(key(u, v), old);
                Err(input_err!("contradictory distances between `{}` and `{}`", self.ids[u], self.ids[v]))
            }
            _ => Ok(()),
        }
    }

    pub fn remove_dist(&mut self, u: usize, v: usize) {
        self.dist.remove(&key(u, v));
    }

    /// Defined distances `(u, v, d)` with `u < v`.
    pub fn dist_entries(&self) -> impl Iterator<Item = (usize, usize, Elem)> + '_ {
        self.dist.iter().map(|(&(u, v), &e)| (u, v, e))
    }

    /// `f_B(v)` for originals, `f_{B',B}(v)` for balls of a block `B' ≺ B`.
    pub fn up(&self, v: usize, b: BlockId) -> Option<usize> {
        self.up.get(&(v, b)).copied()
    }

    pub fn set_up(&mut self, v: usize, b: BlockId, ball: usize) -> Result<()> {
        if v >= self.len() || ball >= self.len() {
            return Err(input_err!("function refers to a missing vertex"));
        }
        if self.kinds[ball] != VertexKind::Ball(b) {
            return Err(input_err!("`{}` is not a ball of the requested block", self.ids[ball]));
        }
        match self.kinds[v] {
            VertexKind::Original => {}
            VertexKind::Ball(b0) if b0 < b => {}
            VertexKind::Ball(_) => {
                return Err(input_err!("ball `{}` can only point to balls of larger blocks", self.ids[v]));
            }
        }
        match self.up.insert((v, b), ball) {
            Some(old) if old != ball => {
                self.up.insert((v, b), old);
                Err(input_err!("`{}` already points to `{}`", self.ids[v], self.ids[old]))
            }
            _ => Ok(()),
        }
    }

    /// Entries `(v, B, ball)` of all unary functions.
    pub fn up_entries(&self) -> impl Iterator<Item = (usize, BlockId, usize)> + '_ {
        self.up.iter().map(|(&(v, b), &ball)| (v, b, ball))
    }

    /// The ball of block `b` that `v` lies in: `v` itself for balls of `b`.
    pub fn image(&self, v: usize, b: BlockId) -> Option<usize> {
        match self.kinds[v] {
            VertexKind::Ball(b0) if b0 == b => Some(v),
            VertexKind::Ball(b0) if b0 > b => None,
            _ => self.up(v, b),
        }
    }

    pub fn type_of(&self, u: usize, v: usize) -> Option<&BlockType> {
        self.types.get(&key(u, v))
    }

    pub fn set_type(&mut self, u: usize, v: usize, t: BlockType) -> Result<()> {
        if u >= self.len() || v >= self.len() || u == v {
            return Err(input_err!("block-types relate two distinct balls"));
        }
        if self.kinds[u] != VertexKind::Ball(t.block) || self.kinds[v] != VertexKind::Ball(t.block) {
            return Err(input_err!("`{}` and `{}` are not balls of the type's block", self.ids[u], self.ids[v]));
        }
        match self.types.get(&key(u, v)) {
            Some(old) if *old != t => {
                Err(input_err!("contradictory block-types between `{}` and `{}`", self.ids[u], self.ids[v]))
            }
            _ => {
                self.types.insert(key(u, v), t);
                Ok(())
            }
        }
    }

    pub fn type_entries(&self) -> impl Iterator<Item = (usize, usize, &BlockType)> + '_ {
        self.types.iter().map(|(&(u, v), t)| (u, v, t))
    }

    /// The linear order, as a chain over the vertices it covers.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn set_order(&mut self, chain: Vec<usize>) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &v in &chain {
            if v >= self.len() || !seen.insert(v) {
                return Err(input_err!("order repeats or refers to a missing vertex"));
            }
        }
        self.order = chain;
        Ok(())
    }

    /// Distances among originals as a graph, with the originals in index order.
    pub fn original_graph(&self) -> (MGraph, Vec<usize>) {
        let originals = self.originals();
        let ids = originals.iter().map(|&v| self.ids[v].clone()).collect();
        let mut g = MGraph::new(self.monoid.clone(), ids).expect("ids are unique");
        let pos: BTreeMap<usize, usize> = originals.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (u, v, e) in self.dist_entries() {
            g.set_dist(pos[&u], pos[&v], e).expect("valid distance");
        }
        (g, originals)
    }

    /// Substructure on `set`, keeping relative vertex order.
    pub fn induced(&self, set: &BTreeSet<usize>) -> LStar {
        let mut out = LStar::new(self.monoid.clone()).expect("valid monoid");
        let mut map = BTreeMap::new();
        for &v in set {
            let nv = out.add_vertex(self.ids[v].clone(), self.kinds[v]).expect("ids are unique");
            map.insert(v, nv);
        }
        for (u, v, e) in self.dist_entries() {
            if let (Some(&a), Some(&b)) = (map.get(&u), map.get(&v)) {
                out.dist.insert(key(a, b), e);
            }
        }
        for (v, b, ball) in self.up_entries() {
            if let (Some(&a), Some(&c)) = (map.get(&v), map.get(&ball)) {
                out.up.insert((a, b), c);
            }
        }
        for (u, v, t) in self.type_entries() {
            if let (Some(&a), Some(&b)) = (map.get(&u), map.get(&v)) {
                out.types.insert(key(a, b), t.clone());
            }
        }
        out.order = self.order.iter().filter_map(|v| map.get(v).copied()).collect();
        out
    }
}

/// Builds the expansion of a complete, convexly ordered space.
pub fn lstar_expand(space: &MGraph) -> Result<LStar> {
    if !check_convex_order(space)?.holds() {
        return Err(precondition!("the order is not convex"));
    }
    let order = space.order().expect("checked above").to_vec();
    let m = space.monoid_arc().clone();
    let mut s = LStar::new(m.clone())?;
    for id in space.ids() {
        s.add_original(id.clone())?;
    }
    for (u, v, e) in space.edges() {
        s.set_dist(u, v, e)?;
    }
    let levels = s.ball_blocks();
    let mut ball_of: BTreeMap<(BlockId, usize), usize> = BTreeMap::new();
    let mut chain = order.clone();
    for &b in &levels {
        let class = ball_classes(space, b)?;
        let mut seen = BTreeMap::new();
        for &v in &order {
            let c = class[v];
            let ball = match seen.get(&c) {
                Some(&ball) => ball,
                None => {
                    let id = s.fresh_id(&format!("B{}#{}", b.0, seen.len() + 1));
                    let ball = s.add_ball(id, b)?;
                    seen.insert(c, ball);
                    chain.push(ball);
                    ball
                }
            };
            s.set_up(v, b, ball)?;
            ball_of.insert((b, v), ball);
        }
        // balls of one block pairwise: their type is read off any pair of members
        let reps: Vec<(usize, usize)> = order.iter().filter(|&&v| class[v] == v).map(|&v| (v, seen[&v])).collect();
        for (i, &(x, bx)) in reps.iter().enumerate() {
            for &(y, by) in &reps[i + 1..] {
                let t = block_type(&m, b, space.dist(x, y).expect("complete"))?;
                s.set_type(bx, by, t)?;
            }
        }
    }
    for (i, &b) in levels.iter().enumerate() {
        for &b2 in &levels[i + 1..] {
            for v in 0..space.len() {
                s.set_up(ball_of[&(b, v)], b2, ball_of[&(b2, v)])?;
            }
        }
    }
    s.set_order(chain)?;
    Ok(s)
}

/// Smallest substructure containing `seed` and closed under the functions.
pub fn closure_of(s: &LStar, seed: &[usize]) -> Result<LStar> {
    Ok(s.induced(&closure_set(s, seed)?))
}

pub(crate) fn closure_set(s: &LStar, seed: &[usize]) -> Result<BTreeSet<usize>> {
    let mut set = BTreeSet::new();
    let mut stack = Vec::new();
    for &v in seed {
        if v >= s.len() {
            return Err(input_err!("seed vertex out of range"));
        }
        if set.insert(v) {
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        for (_, &ball) in s.up.range((v, BlockId(0))..=(v, BlockId(usize::MAX))) {
            if set.insert(ball) {
                stack.push(ball);
            }
        }
    }
    Ok(set)
}

/// Balls that no original vertex maps to.
pub fn orphans(s: &LStar) -> Vec<usize> {
    let hit: BTreeSet<usize> =
        s.up_entries().filter(|&(v, _, _)| s.is_original(v)).map(|(_, _, ball)| ball).collect();
    s.balls().into_iter().filter(|b| !hit.contains(b)).collect()
}

/// Adds, for each orphan ball, an original vertex inside it together with
/// fresh balls of all smaller blocks. Smaller orphans are repaired first,
/// since their new vertex may also adopt larger orphans.
pub fn repair_orphans(s: &LStar) -> LStar {
    let mut out = s.clone();
    let levels = out.ball_blocks();
    loop {
        let mut pending = orphans(&out);
        pending.sort_by_key(|&b| (out.kind(b), b));
        let Some(&b) = pending.first() else { return out };
        let VertexKind::Ball(bb) = out.kind(b) else { unreachable!("orphans are balls") };
        let id = out.fresh_id(&format!("o:{}", out.id(b)));
        let o = out.add_original(id).expect("fresh id");
        out.set_up(o, bb, b).expect("ball of the block");
        let mut chain: Vec<(BlockId, usize)> = Vec::new();
        for &lower in levels.iter().filter(|&&x| x < bb) {
            let id = out.fresh_id(&format!("{}.{}", out.id(o), lower.0));
            let nb = out.add_ball(id, lower).expect("fresh id");
            out.set_up(o, lower, nb).expect("ball of the block");
            chain.push((lower, nb));
        }
        chain.push((bb, b));
        for &higher in levels.iter().filter(|&&x| x > bb) {
            if let Some(hb) = out.up(b, higher) {
                out.set_up(o, higher, hb).expect("ball of the block");
                chain.push((higher, hb));
            }
        }
        for (i, &(lb, lball)) in chain.iter().enumerate() {
            for &(hb, hball) in &chain[i + 1..] {
                if lb < bb {
                    out.set_up(lball, hb, hball).expect("fresh ball");
                }
            }
        }
    }
}

/// `t(u, v)`: the first defined value over blocks in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockDistance {
    /// The actual distance.
    Exact(Elem),
    /// Any element of the whole block.
    Block(BlockId),
    Type(BlockType),
    Undefined,
}

impl BlockDistance {
    pub fn contains(&self, m: &DistanceMonoid, e: Elem) -> bool {
        match self {
            BlockDistance::Exact(d) => *d == e,
            BlockDistance::Block(b) => m.blocks().map(|bl| bl.block_of(e) == *b).unwrap_or(false),
            BlockDistance::Type(t) => t.contains(e),
            BlockDistance::Undefined => false,
        }
    }

    /// Block containing every admissible distance.
    pub fn outer_block(&self, m: &DistanceMonoid) -> Option<BlockId> {
        let blocks = m.blocks().ok()?;
        match self {
            BlockDistance::Exact(d) => Some(blocks.block_of(*d)),
            BlockDistance::Block(b) => Some(*b),
            BlockDistance::Type(t) => Some(blocks.block_of(t.rep)),
            BlockDistance::Undefined => None,
        }
    }

    /// Level at which witnesses are searched: vertices in the same ball of
    /// this block may stand in for the endpoints.
    pub fn witness_level(&self, m: &DistanceMonoid) -> Option<BlockId> {
        let blocks = m.blocks().ok()?;
        match self {
            BlockDistance::Exact(_) => Some(BlockId::ZERO),
            BlockDistance::Block(b) => blocks.predecessor(*b),
            BlockDistance::Type(t) => Some(t.block),
            BlockDistance::Undefined => None,
        }
    }
}

pub fn block_distance(s: &LStar, u: usize, v: usize) -> Result<BlockDistance> {
    if u == v {
        return Err(precondition!("block distance needs two distinct vertices"));
    }
    if let Some(d) = s.dist(u, v) {
        return Ok(BlockDistance::Exact(d));
    }
    ball_distance(s, u, v)
}

/// As [`block_distance`] but ignoring the actual distance.
pub fn ball_distance(s: &LStar, u: usize, v: usize) -> Result<BlockDistance> {
    if u == v {
        return Err(precondition!("block distance needs two distinct vertices"));
    }
    let blocks = s.monoid().blocks()?;
    for b in blocks.nonzero_blocks() {
        if blocks.is_maximal(b) {
            return Ok(BlockDistance::Block(b));
        }
        let (Some(x), Some(y)) = (s.image(u, b), s.image(v, b)) else { continue };
        if x == y {
            return Ok(BlockDistance::Block(b));
        }
        if let Some(t) = s.type_of(x, y) {
            return Ok(BlockDistance::Type(t.clone()));
        }
    }
    Ok(BlockDistance::Undefined)
}

/// Originals that share `v`'s ball at `level` (just `v` at the zero level).
fn ball_mates(s: &LStar, v: usize, level: BlockId) -> Vec<usize> {
    if level.is_zero() {
        return if s.is_original(v) { alloc::vec![v] } else { Vec::new() };
    }
    let Some(ball) = s.image(v, level) else { return Vec::new() };
    s.originals().into_iter().filter(|&x| s.up(x, level) == Some(ball)).collect()
}

/// Whether some `u' ~ u`, `v' ~ v` at the witness level carry an actual
/// distance admissible for `t(u, v)`.
pub fn is_witnessed(s: &LStar, u: usize, v: usize) -> Result<bool> {
    let t = block_distance(s, u, v)?;
    witnessed_for(s, u, v, &t)
}

pub(crate) fn witnessed_for(s: &LStar, u: usize, v: usize, t: &BlockDistance) -> Result<bool> {
    let m = s.monoid();
    let level = match t {
        BlockDistance::Exact(_) => return Ok(true),
        BlockDistance::Undefined => return Err(precondition!("t(u, v) is undefined")),
        _ => t.witness_level(m).expect("defined"),
    };
    let us = ball_mates(s, u, level);
    let vs = ball_mates(s, v, level);
    Ok(us.iter().any(|&a| vs.iter().any(|&b| a != b && s.dist(a, b).is_some_and(|d| t.contains(m, d)))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Clause {
    FunctionTotality,
    ChainCoherence,
    WalkCoherence,
    RelationCoherence,
    TypeMonotonicity,
}

impl Clause {
    pub fn name(self) -> &'static str {
        match self {
            Clause::FunctionTotality => "function-totality",
            Clause::ChainCoherence => "chain-coherence",
            Clause::WalkCoherence => "walk-coherence",
            Clause::RelationCoherence => "relation-coherence",
            Clause::TypeMonotonicity => "type-monotonicity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LStarReport {
    pub violations: Vec<Violation>,
}

impl LStarReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Necessary consistency conditions for membership in the class of
/// substructures of expansions.
pub fn validate_lstar(s: &LStar) -> LStarReport {
    let m = s.monoid();
    let blocks = m.blocks().expect("checked at construction");
    let levels = s.ball_blocks();
    let mut out = Vec::new();
    let mut push = |clause, detail: String| out.push(Violation { clause, detail });

    for v in 0..s.len() {
        let needed: Vec<BlockId> = match s.kind(v) {
            VertexKind::Original => levels.clone(),
            VertexKind::Ball(b) => levels.iter().copied().filter(|&x| x > b).collect(),
        };
        for b in needed {
            if s.up(v, b).is_none() {
                push(Clause::FunctionTotality, format!("`{}` has no ball for {}", s.id(v), blocks.describe(m, b)));
            }
        }
    }

    for (v, b, ball) in s.up_entries() {
        for (_, b2, target) in s.up_entries().filter(|&(w, b2, _)| w == v && b2 > b) {
            if let Some(via) = s.up(ball, b2) {
                if via != target {
                    push(
                        Clause::ChainCoherence,
                        format!("`{}` reaches `{}` directly but `{}` through `{}`", s.id(v), s.id(target), s.id(via), s.id(ball)),
                    );
                }
            }
        }
    }

    for (u, v, d) in s.dist_entries() {
        let db = blocks.block_of(d);
        for &b in &levels {
            let (fu, fv) = (s.up(u, b), s.up(v, b));
            let (Some(fu), Some(fv)) = (fu, fv) else { continue };
            if db <= b && fu != fv {
                push(
                    Clause::WalkCoherence,
                    format!("`{}`–`{}` at distance {} lie in different balls of {}", s.id(u), s.id(v), m.label(d), blocks.describe(m, b)),
                );
            }
            if fu != fv {
                if let Some(t) = s.type_of(fu, fv) {
                    if !t.contains(d) {
                        push(
                            Clause::RelationCoherence,
                            format!("distance {} between `{}` and `{}` is outside the type of `{}`–`{}`", m.label(d), s.id(u), s.id(v), s.id(fu), s.id(fv)),
                        );
                    }
                }
            }
        }
    }

    for (x, y, t) in s.type_entries() {
        for &b2 in levels.iter().filter(|&&b2| b2 > t.block) {
            let (Some(fx), Some(fy)) = (s.up(x, b2), s.up(y, b2)) else { continue };
            if fx == fy {
                continue;
            }
            match s.type_of(fx, fy) {
                Some(t2) if t2.includes(t) => {}
                _ => push(
                    Clause::TypeMonotonicity,
                    format!("type of `{}`–`{}` is not contained in the type of their images at {}", s.id(x), s.id(y), blocks.describe(m, b2)),
                ),
            }
        }
    }
    out.sort_by(|a, b| a.clause.cmp(&b.clause));
    LStarReport { violations: out }
}
