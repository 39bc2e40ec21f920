//! Completions of L* structures and obstructions to them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{ball_distance, block_distance, closure_set, orphans, repair_orphans, validate_lstar, witnessed_for};
use super::{BlockDistance, LStar, VertexKind};
use crate::blocks::{block_type, BlockId};
use crate::error::{precondition, Error, Result};
use crate::graph::{find_nonmetric_cycle, validate_metric, CycleWitness, MGraph};
use crate::monoid::{sum_closure, DistanceMonoid, DistanceSet, Elem};
use crate::mus::{bound_n_of_s, compute_mus, important_indices};
use crate::order::ball_classes;

/// Path `u – x – y – v` labelled `a, b, a` standing in for a missing distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessPath {
    /// Endpoints as vertices of the structure.
    pub u: usize,
    pub v: usize,
    /// Inner vertices in the plan graph, for paths used by the witness.
    pub interior: Option<[usize; 2]>,
    /// Index into [`CompletionPlan::targets`].
    pub target: usize,
}

/// Everything built on the way to a completion.
#[derive(Clone, Debug)]
pub struct CompletionPlan {
    /// Requirements that had to be realised by paths, without repeats.
    pub targets: Vec<BlockDistance>,
    pub s: DistanceSet,
    pub s_prime: DistanceSet,
    /// `a(t)` and `b(t)`, parallel to `targets`.
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    /// Originals with their actual distances, plus the witness paths that
    /// the non-metric cycle runs through.
    pub graph: MGraph,
    /// Structure vertex of each of the first `originals.len()` graph vertices.
    pub originals: Vec<usize>,
    /// One per unwitnessed pair.
    pub paths: Vec<WitnessPath>,
}

impl CompletionPlan {
    /// Every distance of the full graph with all witness paths.
    pub fn labels(&self) -> BTreeSet<Elem> {
        let mut out: BTreeSet<Elem> = self.graph.edges().into_iter().map(|(_, _, e)| e).collect();
        for p in &self.paths {
            out.insert(self.a[p.target]);
            out.insert(self.b[p.target]);
        }
        out
    }

    /// Adds the inner vertices of path `k` to the plan graph.
    fn materialize(&mut self, k: usize) -> Result<()> {
        if self.paths[k].interior.is_some() {
            return Ok(());
        }
        let pos = |v: usize| self.originals.iter().position(|&x| x == v).expect("original");
        let (u, v) = (pos(self.paths[k].u), pos(self.paths[k].v));
        let (a, b) = (self.a[self.paths[k].target], self.b[self.paths[k].target]);
        let x = self.graph.add_vertex(fresh_id(&self.graph, k, 'x'))?;
        let y = self.graph.add_vertex(fresh_id(&self.graph, k, 'y'))?;
        self.graph.set_dist(u, x, a)?;
        self.graph.set_dist(x, y, b)?;
        self.graph.set_dist(y, v, a)?;
        self.paths[k].interior = Some([x, y]);
        Ok(())
    }
}

fn fresh_id(g: &MGraph, k: usize, side: char) -> alloc::string::String {
    let mut id = format!("~{}{}", k, side);
    while g.index_of(&id).is_some() {
        id.push('\'');
    }
    id
}

/// One step between originals: an actual distance or a whole witness path.
#[derive(Clone, Copy, Debug)]
enum Hop {
    Direct,
    Path(usize),
}

/// Shortest distances among originals, with witness paths collapsed to
/// single steps of length `a ⊕ b ⊕ a`. Inner path vertices have degree two,
/// so this decides metricity of the full graph without building it.
struct Network<'a> {
    m: &'a DistanceMonoid,
    n: usize,
    /// Shortest single step per ordered pair.
    step: Vec<Option<(Elem, Hop)>>,
    dist: Vec<Option<Elem>>,
    next: Vec<usize>,
}

impl<'a> Network<'a> {
    fn new(plan: &'a CompletionPlan, gpos: &BTreeMap<usize, usize>) -> Self {
        let m = plan.graph.monoid();
        let n = plan.originals.len();
        let mut step: Vec<Option<(Elem, Hop)>> = alloc::vec![None; n * n];
        let mut offer = |i: usize, j: usize, e: Elem, h: Hop| {
            for (x, y) in [(i, j), (j, i)] {
                if step[x * n + y].is_none_or(|(old, _)| e < old) {
                    step[x * n + y] = Some((e, h));
                }
            }
        };
        for (i, j, e) in plan.graph.edges() {
            offer(i, j, e, Hop::Direct);
        }
        for (k, p) in plan.paths.iter().enumerate() {
            let (a, b) = (plan.a[p.target], plan.b[p.target]);
            offer(gpos[&p.u], gpos[&p.v], m.sum(m.sum(a, b), a), Hop::Path(k));
        }
        let mut dist: Vec<Option<Elem>> = step.iter().map(|s| s.map(|(e, _)| e)).collect();
        let mut next: Vec<usize> = (0..n * n).map(|ij| ij % n).collect();
        for k in 0..n {
            for i in 0..n {
                let Some(dik) = dist[i * n + k] else { continue };
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let Some(dkj) = dist[k * n + j] else { continue };
                    let via = m.sum(dik, dkj);
                    if dist[i * n + j].is_none_or(|d| via < d) {
                        dist[i * n + j] = Some(via);
                        next[i * n + j] = next[i * n + k];
                    }
                }
            }
        }
        Network { m, n, step, dist, next }
    }

    fn d(&self, i: usize, j: usize) -> Option<Elem> {
        if i == j {
            Some(self.m.zero())
        } else {
            self.dist[i * self.n + j]
        }
    }

    /// Witness paths along the shortest route from `i` to `j`.
    fn route_paths(&self, i: usize, j: usize, out: &mut BTreeSet<usize>) {
        let mut x = i;
        for _ in 0..self.n {
            if x == j {
                return;
            }
            let y = self.next[x * self.n + j];
            if let Some((_, Hop::Path(k))) = self.step[x * self.n + y] {
                out.insert(k);
            }
            x = y;
        }
    }

    /// Paths to materialise so that the plan graph shows a non-metric
    /// cycle, or `None` when the full graph is metric.
    fn violation(&self, plan: &CompletionPlan, gpos: &BTreeMap<usize, usize>) -> Option<BTreeSet<usize>> {
        let m = self.m;
        let mut out = BTreeSet::new();
        for (i, j, e) in plan.graph.edges() {
            if self.d(i, j).is_some_and(|d| d < e) {
                self.route_paths(i, j, &mut out);
                return Some(out);
            }
        }
        for (k, p) in plan.paths.iter().enumerate() {
            let (a, b) = (plan.a[p.target], plan.b[p.target]);
            let (u, v) = (gpos[&p.u], gpos[&p.v]);
            let Some(duv) = self.d(u, v) else { continue };
            // the inner edge against the rest of the cycle, then an outer edge
            let inner = m.sum(m.sum(a, duv), a);
            let outer = m.sum(m.sum(b, a), duv);
            if inner < b || outer < a {
                out.insert(k);
                self.route_paths(u, v, &mut out);
                return Some(out);
            }
        }
        None
    }

    /// Shortest-path completion restricted to the originals.
    fn completion(&self, plan: &CompletionPlan) -> Result<MGraph> {
        let m = self.m;
        let pad = m.max_element().unwrap_or_else(|| {
            let mut all: Vec<Elem> = plan.graph.edges().into_iter().map(|(_, _, e)| e).collect();
            for p in &plan.paths {
                all.extend([plan.a[p.target], plan.b[p.target], plan.a[p.target]]);
            }
            if all.is_empty() {
                m.blocks().map(|b| b.canonical(b.max_block())).unwrap_or(m.zero())
            } else {
                m.sum_all(all)
            }
        });
        let mut h = plan.graph.clone();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if h.dist(i, j).is_none() {
                    h.set_dist(i, j, self.d(i, j).unwrap_or(pad))?;
                }
            }
        }
        Ok(h)
    }
}

#[derive(Clone, Debug)]
pub enum StarOutcome {
    Completed(LStar),
    NonCompletable { plan: CompletionPlan, witness: CycleWitness },
}

/// A small non-completable substructure.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub structure: LStar,
    /// `2(m+1)·n(S'')` for the distances `S''` of the plan graph.
    pub bound: usize,
    pub n_of_s: usize,
    pub ell: Elem,
    pub important: Vec<Elem>,
    pub witness: CycleWitness,
}

fn representative(m: &DistanceMonoid, t: &BlockDistance) -> Elem {
    let blocks = m.blocks().expect("valid monoid");
    match t {
        BlockDistance::Exact(d) => *d,
        BlockDistance::Block(b) => blocks.canonical(*b),
        BlockDistance::Type(t) => t.rep,
        BlockDistance::Undefined => unreachable!("targets are defined"),
    }
}

/// Block the outer labels `a` of a witness path are drawn from.
fn a_block(m: &DistanceMonoid, t: &BlockDistance) -> BlockId {
    let blocks = m.blocks().expect("valid monoid");
    match t {
        BlockDistance::Type(t) => t.block,
        BlockDistance::Block(b) => blocks.predecessor(*b).filter(|p| !p.is_zero()).unwrap_or(*b),
        _ => unreachable!("targets are blocks or types"),
    }
}

fn pick_b(m: &DistanceMonoid, e: &BTreeSet<Elem>, mus: &crate::mus::MusTable, t: &BlockDistance) -> Elem {
    let blocks = m.blocks().expect("valid monoid");
    let max = match t {
        BlockDistance::Type(t) => t.max(),
        BlockDistance::Block(b) => blocks.max_element(*b),
        _ => None,
    };
    if let Some(x) = max.filter(|x| e.contains(x)) {
        return x;
    }
    let outer = t.outer_block(m).expect("defined target");
    let floor = mus.get(outer);
    let inside: Vec<Elem> = e.iter().copied().filter(|&x| t.contains(m, x)).collect();
    inside
        .iter()
        .copied()
        .find(|&x| x >= floor)
        .or_else(|| inside.last().copied())
        .unwrap_or_else(|| representative(m, t))
}

/// Tries to complete `s` into a full substructure of an expansion.
///
/// Missing requirements are realised by witness paths between originals;
/// the shortest-path completion of the resulting graph then decides.
pub fn star_completion(s: &LStar) -> Result<StarOutcome> {
    let report = validate_lstar(s);
    if let Some(v) = report.violations.first() {
        return Err(precondition!("inconsistent structure: {}: {}", v.clause.name(), v.detail));
    }
    if !orphans(s).is_empty() {
        return Err(precondition!("the structure has balls without original vertices"));
    }
    let m = s.monoid_arc().clone();
    let blocks = m.blocks()?;
    let originals = s.originals();
    if originals.len() > 1 && blocks.count_nonzero() == 0 {
        return Err(Error::Unsupported("the trivial monoid has no two-point spaces".into()));
    }

    let mut pending: Vec<(usize, usize, BlockDistance)> = Vec::new();
    for (i, &u) in originals.iter().enumerate() {
        for &v in &originals[i + 1..] {
            let t = match block_distance(s, u, v)? {
                BlockDistance::Exact(d) => {
                    let star = ball_distance(s, u, v)?;
                    if star != BlockDistance::Undefined && !star.contains(&m, d) {
                        pending.push((u, v, star));
                    }
                    continue;
                }
                BlockDistance::Undefined => BlockDistance::Block(blocks.max_block()),
                t => t,
            };
            if !witnessed_for(s, u, v, &t)? {
                pending.push((u, v, t));
            }
        }
    }
    let targets: Vec<BlockDistance> =
        pending.iter().map(|(_, _, t)| t.clone()).collect::<BTreeSet<_>>().into_iter().collect();

    let mut sset = DistanceSet::new(&m, s.dist_entries().map(|(_, _, e)| e))?;
    for b in blocks.nonzero_blocks() {
        sset.insert(blocks.canonical(b));
    }
    for t in &targets {
        sset.insert(representative(&m, t));
    }
    let mus = compute_mus(&m, &sset)?;
    let n = bound_n_of_s(&m, &sset, &mus)?.n_of_s;
    let e = sum_closure(&m, &sset, 2 * n)?.values;
    let bs: Vec<Elem> = targets.iter().map(|t| pick_b(&m, &e, &mus, t)).collect();

    let mut s_prime = sset.clone();
    for &b in &bs {
        s_prime.insert(b);
    }
    let mus2 = compute_mus(&m, &s_prime)?;
    let n2 = bound_n_of_s(&m, &s_prime, &mus2)?.n_of_s;
    let e2 = sum_closure(&m, &s_prime, 2 * n2)?.values;
    let as_: Vec<Elem> = targets
        .iter()
        .map(|t| {
            let ab = a_block(&m, t);
            let floor = mus2.get(ab);
            e2.iter().copied().find(|&x| blocks.block_of(x) == ab && x >= floor).unwrap_or(floor)
        })
        .collect();

    let gpos: BTreeMap<usize, usize> = originals.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let paths: Vec<WitnessPath> = pending
        .iter()
        .map(|(u, v, t)| WitnessPath {
            u: *u,
            v: *v,
            interior: None,
            target: targets.binary_search(t).expect("collected above"),
        })
        .collect();
    let (graph, _) = s.original_graph();
    let mut plan = CompletionPlan { targets, s: sset, s_prime, a: as_, b: bs, graph, originals, paths };

    let net = Network::new(&plan, &gpos);
    if let Some(route_paths) = net.violation(&plan, &gpos) {
        for k in route_paths {
            plan.materialize(k)?;
        }
        let witness = find_nonmetric_cycle(&plan.graph)
            .ok_or_else(|| Error::Internal("violated edge has no cycle in the plan graph".into()))?;
        return Ok(StarOutcome::NonCompletable { plan, witness });
    }
    let h = net.completion(&plan)?;
    lift(s, &plan.originals, &h).map(StarOutcome::Completed)
}

fn internal(what: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Internal(format!("{}: {}", what, e))
}

/// Copies the completed distances `h` back into `s`, deriving balls, links
/// and types from them and checking they agree with what `s` already has.
fn lift(s: &LStar, originals: &[usize], h: &MGraph) -> Result<LStar> {
    let m = s.monoid_arc().clone();
    let mut out = s.clone();
    for i in 0..originals.len() {
        for j in i + 1..originals.len() {
            let d = h.dist(i, j).expect("complete");
            out.set_dist(originals[i], originals[j], d).map_err(internal("completion changes a distance"))?;
        }
    }
    let levels = s.ball_blocks();
    for &b in &levels {
        let class = ball_classes(h, b)?;
        let mut ball_of_class: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &v) in originals.iter().enumerate() {
            let ball = s.up(v, b).expect("validated totality");
            if *ball_of_class.entry(class[i]).or_insert(ball) != ball {
                return Err(Error::Internal("completion merges two balls".into()));
            }
        }
        let distinct: BTreeSet<usize> = ball_of_class.values().copied().collect();
        if distinct.len() != ball_of_class.len() {
            return Err(Error::Internal("completion splits a ball".into()));
        }
        let reps: Vec<(usize, usize)> = ball_of_class.iter().map(|(&c, &ball)| (c, ball)).collect();
        for (i, &(c1, b1)) in reps.iter().enumerate() {
            for &(c2, b2) in &reps[i + 1..] {
                let t = block_type(&m, b, h.dist(c1, c2).expect("complete"))?;
                out.set_type(b1, b2, t).map_err(internal("completion changes a block-type"))?;
            }
        }
        for &b2 in levels.iter().filter(|&&x| x > b) {
            for &v in originals {
                let (lo, hi) = (s.up(v, b).expect("total"), s.up(v, b2).expect("total"));
                out.set_up(lo, b2, hi).map_err(internal("completion changes a link"))?;
            }
        }
    }
    if !validate_lstar(&out).is_valid() {
        return Err(Error::Internal("completion is inconsistent".into()));
    }
    if !validate_metric(&out.original_graph().0)?.holds() {
        return Err(Error::Internal("completion is not metric".into()));
    }
    let mut base: Vec<usize> = s.order().to_vec();
    let chained: BTreeSet<usize> = base.iter().copied().collect();
    base.extend((0..out.len()).filter(|v| !chained.contains(v)));
    let order = complete_order(&out, &base)?;
    out.set_order(order)?;
    Ok(out)
}

/// Total convex order of a complete structure extending its current chain.
///
/// Originals are sorted by the `base` positions of their balls from the
/// largest block down, then by their own position; balls follow, smaller
/// blocks first, each sorted the same way.
pub fn complete_order(s: &LStar, base: &[usize]) -> Result<Vec<usize>> {
    let n = s.len();
    let mut pos = alloc::vec![usize::MAX; n];
    for (i, &v) in base.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(precondition!("base order is not a permutation of the vertices"));
        }
        pos[v] = i;
    }
    if pos.contains(&usize::MAX) {
        return Err(precondition!("base order is not a permutation of the vertices"));
    }
    let extends = |order: &[usize]| {
        let mut at = alloc::vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            at[v] = i;
        }
        s.order().windows(2).all(|w| at[w[0]] < at[w[1]])
    };
    if !extends(base) {
        return Err(precondition!("base order does not extend the structure's order"));
    }
    let mut levels = s.ball_blocks();
    levels.reverse();
    let chain_key = |v: usize, from: Option<BlockId>| -> Result<Vec<usize>> {
        let mut key = Vec::new();
        for &b in levels.iter().filter(|&&b| from.is_none_or(|f| b >= f)) {
            let ball = s.image(v, b).ok_or_else(|| precondition!("`{}` has no ball for every block", s.id(v)))?;
            key.push(pos[ball]);
        }
        key.push(pos[v]);
        Ok(key)
    };
    let mut keyed = Vec::with_capacity(n);
    for v in 0..n {
        let k = match s.kind(v) {
            VertexKind::Original => (0, chain_key(v, None)?),
            VertexKind::Ball(b) => (b.0, chain_key(v, Some(b))?),
        };
        keyed.push((k, v));
    }
    keyed.sort();
    let order: Vec<usize> = keyed.into_iter().map(|(_, v)| v).collect();
    if !extends(&order) {
        return Err(precondition!("the order cannot be extended to a convex order"));
    }
    Ok(order)
}

/// Extracts a non-completable substructure whose size is bounded in terms
/// of the distances involved.
pub fn extract_obstruction(s: &LStar) -> Result<Obstruction> {
    let repaired = repair_orphans(s);
    let (plan, witness) = match star_completion(&repaired)? {
        StarOutcome::Completed(_) => return Err(precondition!("the structure is completable")),
        StarOutcome::NonCompletable { plan, witness } => (plan, witness),
    };
    let m = s.monoid();
    let g = &plan.graph;
    let (ell, seq) = witness.labels(g);
    let all = DistanceSet::new(m, plan.labels())?;
    let mus = compute_mus(m, &all)?;
    let bounds = bound_n_of_s(m, &all, &mus)?;
    let kept = important_indices(m, &all, &mus, ell, &seq)?;

    let no = plan.originals.len();
    let to_structure = |gv: usize| -> Vec<usize> {
        if gv < no {
            return alloc::vec![plan.originals[gv]];
        }
        let p = plan
            .paths
            .iter()
            .find(|p| p.interior.is_some_and(|x| x.contains(&gv)))
            .expect("inner vertex of a path");
        alloc::vec![p.u, p.v]
    };
    let vs = &witness.vertices;
    let mut seed: BTreeSet<usize> = BTreeSet::new();
    seed.extend(to_structure(vs[0]));
    seed.extend(to_structure(*vs.last().expect("nonempty")));
    for &i in &kept {
        seed.extend(to_structure(vs[i]));
        seed.extend(to_structure(vs[i + 1]));
    }
    let seed: Vec<usize> = seed.into_iter().collect();
    let closed = closure_set(&repaired, &seed)?;
    let inside: BTreeSet<usize> = closed.into_iter().filter(|&v| v < s.len()).collect();
    Ok(Obstruction {
        structure: s.induced(&inside),
        bound: bounds.obstruction_bound,
        n_of_s: bounds.n_of_s,
        ell,
        important: kept.iter().map(|&i| seq[i]).collect(),
        witness,
    })
}
