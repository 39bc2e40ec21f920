//! Partial monoid-valued distance graphs, shortest-path completion,
//! non-metric cycles and amalgamation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{input_err, precondition, Error, Result};
use crate::monoid::{DistanceMonoid, Elem};
use crate::Verdict;

/// A vertex set with a partial symmetric distance function and an
/// optional linear order.
///
/// Distances are nonzero and undefined on the diagonal; [`MGraph::dist`]
/// nevertheless reports `0` for `u == v` to keep triangle checks uniform.
#[derive(Clone, Debug)]
pub struct MGraph {
    monoid: Arc<DistanceMonoid>,
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    dist: Vec<Option<Elem>>,
    order: Option<Vec<usize>>,
}

impl PartialEq for MGraph {
    fn eq(&self, other: &Self) -> bool {
        *self.monoid == *other.monoid && self.ids == other.ids && self.dist == other.dist && self.order == other.order
    }
}

impl Eq for MGraph {}

impl MGraph {
    pub fn new(monoid: Arc<DistanceMonoid>, ids: Vec<String>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(input_err!("invalid vertex id {:?}", id));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(input_err!("duplicate vertex `{}`", id));
            }
        }
        let n = ids.len();
        Ok(MGraph { monoid, ids, index, dist: vec![None; n * n], order: None })
    }

    /// Graph on vertices named `0..n` without edges.
    pub fn with_size(monoid: Arc<DistanceMonoid>, n: usize) -> Self {
        Self::new(monoid, (0..n).map(|i| i.to_string()).collect()).expect("distinct numeric ids")
    }

    pub fn monoid(&self) -> &DistanceMonoid {
        &self.monoid
    }

    pub fn monoid_arc(&self) -> &Arc<DistanceMonoid> {
        &self.monoid
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

    pub fn add_vertex(&mut self, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(input_err!("invalid vertex id {:?}", id));
        }
        if self.index.contains_key(&id) {
            return Err(input_err!("duplicate vertex `{}`", id));
        }
        let n = self.len();
        let mut dist = vec![None; (n + 1) * (n + 1)];
        for u in 0..n {
            for v in 0..n {
                dist[u * (n + 1) + v] = self.dist[u * n + v];
            }
        }
        self.dist = dist;
        self.index.insert(id.clone(), n);
        self.ids.push(id);
        if let Some(o) = &mut self.order {
            o.push(n);
        }
        Ok(n)
    }

    /// Defined distance, `0` on the diagonal.
    pub fn dist(&self, u: usize, v: usize) -> Option<Elem> {
        if u == v {
            Some(self.monoid.zero())
        } else {
            self.dist[u * self.len() + v]
        }
    }

    /// Sets `d(u, v) = d(v, u) = e`; conflicting redefinitions are errors.
    pub fn set_dist(&mut self, u: usize, v: usize, e: Elem) -> Result<()> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(input_err!("vertex out of range"));
        }
        if u == v {
            return Err(input_err!("self-distance at `{}`", self.ids[u]));
        }
        if !self.monoid.contains(e) || self.monoid.is_zero(e) {
            return Err(input_err!("distance between `{}` and `{}` must be a nonzero element", self.ids[u], self.ids[v]));
        }
        match self.dist[u * n + v] {
            Some(old) if old != e => Err(input_err!(
                "contradictory distances {} and {} between `{}` and `{}`",
                self.monoid.label(old),
                self.monoid.label(e),
                self.ids[u],
                self.ids[v]
            )),
            _ => {
                self.dist[u * n + v] = Some(e);
                self.dist[v * n + u] = Some(e);
                Ok(())
            }
        }
    }

    pub fn remove_dist(&mut self, u: usize, v: usize) {
        let n = self.len();
        self.dist[u * n + v] = None;
        self.dist[v * n + u] = None;
    }

    /// Defined pairs `(u, v, d)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, Elem)> {
        let n = self.len();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if let Some(e) = self.dist[u * n + v] {
                    out.push((u, v, e));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        let n = self.len();
        (0..n).all(|u| (u + 1..n).all(|v| self.dist[u * n + v].is_some()))
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    /// Installs a linear order given as a permutation of the vertices.
    pub fn set_order(&mut self, order: Vec<usize>) -> Result<()> {
        let mut seen = vec![false; self.len()];
        for &v in &order {
            if v >= self.len() || seen[v] {
                return Err(input_err!("order is not a permutation of the vertices"));
            }
            seen[v] = true;
        }
        if order.len() != self.len() {
            return Err(input_err!("order lists {} of {} vertices", order.len(), self.len()));
        }
        self.order = Some(order);
        Ok(())
    }

    pub fn clear_order(&mut self) {
        self.order = None;
    }

    /// Substructure induced on `vertices`, in the given sequence.
    pub fn induced(&self, vertices: &[usize]) -> MGraph {
        let ids = vertices.iter().map(|&v| self.ids[v].clone()).collect();
        let mut g = MGraph::new(self.monoid.clone(), ids).expect("ids of an existing graph");
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate() {
                if i != j {
                    if let Some(e) = self.dist(u, v) {
                        g.dist[i * vertices.len() + j] = Some(e);
                    }
                }
            }
        }
        if let Some(order) = &self.order {
            let pos: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            g.order = Some(order.iter().filter_map(|v| pos.get(v).copied()).collect());
        }
        g
    }

    /// `⊕`-length of a walk given as a vertex sequence.
    pub fn walk_length(&self, walk: &[usize]) -> Option<Elem> {
        walk.windows(2).try_fold(self.monoid.zero(), |acc, w| Some(self.monoid.sum(acc, self.dist(w[0], w[1])?)))
    }
}

/// A non-metric cycle `v_1 … v_n`: `d(v_1, v_n)` exceeds the length of the
/// path `v_1 v_2 … v_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub vertices: Vec<usize>,
}

impl CycleWitness {
    pub fn violated_edge(&self) -> (usize, usize) {
        (self.vertices[0], *self.vertices.last().expect("nonempty cycle"))
    }

    /// `(ℓ, path labels)` in the graph the witness was taken from.
    pub fn labels(&self, g: &MGraph) -> (Elem, Vec<Elem>) {
        let (a, b) = self.violated_edge();
        let ell = g.dist(a, b).expect("violated edge is defined");
        let seq = self.vertices.windows(2).map(|w| g.dist(w[0], w[1]).expect("cycle edge is defined")).collect();
        (ell, seq)
    }

    /// Whether the witness really is a non-metric cycle of `g`.
    pub fn is_valid_in(&self, g: &MGraph) -> bool {
        let v = &self.vertices;
        if v.len() < 3 {
            return false;
        }
        let mut sorted = v.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != v.len() || v.iter().any(|&x| x >= g.len()) {
            return false;
        }
        let (a, b) = self.violated_edge();
        match (g.dist(a, b), g.walk_length(v)) {
            (Some(ell), Some(len)) => ell > len,
            _ => false,
        }
    }
}

/// First triangle `(a, b, c)` with `d(a, c) ≻ d(a, b) ⊕ d(b, c)`.
pub fn validate_metric(g: &MGraph) -> Result<Verdict<(usize, usize, usize)>> {
    if !g.is_complete() {
        return Err(precondition!("distance function is not total"));
    }
    let m = g.monoid();
    let n = g.len();
    for a in 0..n {
        for c in 0..n {
            if a == c {
                continue;
            }
            let ac = g.dist(a, c).expect("complete");
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                if ac > m.sum(g.dist(a, b).expect("complete"), g.dist(b, c).expect("complete")) {
                    return Ok(Verdict::Fails((a, b, c)));
                }
            }
        }
    }
    Ok(Verdict::Holds)
}

/// All-pairs minimum walk lengths over `(min, ⊕)`; `None` when disconnected.
fn all_pairs(g: &MGraph) -> Vec<Option<Elem>> {
    let m = g.monoid();
    let n = g.len();
    let mut d: Vec<Option<Elem>> = (0..n * n).map(|k| g.dist(k / n, k % n)).collect();
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i * n + k] else { continue };
            for j in 0..n {
                let Some(kj) = d[k * n + j] else { continue };
                let via = m.sum(ik, kj);
                if d[i * n + j].map_or(true, |cur| via < cur) {
                    d[i * n + j] = Some(via);
                }
            }
        }
    }
    d
}

/// A non-metric cycle of `g`, if any, shrunk until it has no chords.
pub fn find_nonmetric_cycle(g: &MGraph) -> Option<CycleWitness> {
    let n = g.len();
    let d = all_pairs(g);
    let (u, v) = g.edges().into_iter().find(|&(u, v, e)| d[u * n + v].is_some_and(|best| best < e)).map(|(u, v, _)| (u, v))?;
    let path = shortest_path_avoiding(g, u, v);
    Some(shrink(g, path))
}

/// Minimum-length simple path from `u` to `v` that does not use the edge `uv`.
fn shortest_path_avoiding(g: &MGraph, u: usize, v: usize) -> Vec<usize> {
    let m = g.monoid();
    let n = g.len();
    // layered relaxation keeps exact parents, so walks are reconstructed faithfully
    let mut layers: Vec<Vec<Option<(Elem, usize)>>> = vec![vec![None; n]];
    layers[0][u] = Some((m.zero(), u));
    for _ in 1..n {
        let prev = layers.last().expect("nonempty");
        let mut next = prev.clone();
        for (x, px) in prev.iter().enumerate() {
            let Some((dx, _)) = *px else { continue };
            for y in 0..n {
                if y == x || (x == u && y == v) || (x == v && y == u) {
                    continue;
                }
                let Some(w) = g.dist(x, y) else { continue };
                let cand = m.sum(dx, w);
                if next[y].map_or(true, |(cur, _)| cand < cur) {
                    next[y] = Some((cand, x));
                }
            }
        }
        layers.push(next);
    }
    let mut walk = vec![v];
    let mut cur = v;
    for layer in layers.iter().rev() {
        if cur == u {
            break;
        }
        let (_, p) = layer[cur].expect("reachable");
        if p != cur {
            walk.push(p);
            cur = p;
        }
    }
    walk.reverse();
    remove_loops(walk)
}

fn remove_loops(walk: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    for x in walk {
        if let Some(pos) = out.iter().position(|&y| y == x) {
            out.truncate(pos + 1);
        } else {
            out.push(x);
        }
    }
    out
}

/// Replaces a non-metric cycle by a smaller one across a chord until none remain.
fn shrink(g: &MGraph, mut cycle: Vec<usize>) -> CycleWitness {
    let m = g.monoid();
    'outer: loop {
        let k = cycle.len();
        for i in 0..k {
            for j in i + 2..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                if g.dist(cycle[i], cycle[j]).is_none() {
                    continue;
                }
                // the two cycles through the chord: one of them is non-metric
                let inner: Vec<usize> = cycle[i..=j].to_vec();
                let mut outer: Vec<usize> = cycle[..=i].to_vec();
                outer.extend_from_slice(&cycle[j..]);
                for cand in [inner, outer] {
                    if let Some(c) = nonmetric_rotation(g, m, &cand) {
                        cycle = c;
                        continue 'outer;
                    }
                }
            }
        }
        return CycleWitness { vertices: cycle };
    }
}

/// Rotates a closed cycle so that its violated edge is `(first, last)`.
fn nonmetric_rotation(g: &MGraph, m: &DistanceMonoid, cycle: &[usize]) -> Option<Vec<usize>> {
    let k = cycle.len();
    let edge = |i: usize| g.dist(cycle[i], cycle[(i + 1) % k]).expect("cycle edges are defined");
    let labels: Vec<Elem> = (0..k).map(edge).collect();
    for i in 0..k {
        let rest = m.sum_all((1..k).map(|s| labels[(i + s) % k]));
        if labels[i] > rest {
            // edge i joins cycle[i] and cycle[i+1]; walk the long way round
            let mut path = Vec::with_capacity(k);
            for s in 0..k {
                path.push(cycle[(i + 1 + s) % k]);
            }
            return Some(path);
        }
    }
    None
}

/// Shortest-path completion, or a non-metric cycle when none exists.
///
/// Pairs in different components receive the largest element of a finite
/// monoid, or the sum of all edge labels otherwise; both keep every new
/// triangle metric.
pub fn shortest_path_completion(g: &MGraph) -> core::result::Result<MGraph, CycleWitness> {
    if let Some(w) = find_nonmetric_cycle(g) {
        return Err(w);
    }
    let m = g.monoid();
    let n = g.len();
    let d = all_pairs(g);
    let pad = m.max_element().unwrap_or_else(|| {
        let edges = g.edges();
        if edges.is_empty() {
            m.blocks().map(|b| b.canonical(b.max_block())).unwrap_or(m.zero())
        } else {
            m.sum_all(edges.into_iter().map(|(_, _, e)| e))
        }
    });
    let mut out = g.clone();
    for u in 0..n {
        for v in u + 1..n {
            if out.dist(u, v).is_none() {
                let e = d[u * n + v].unwrap_or(pad);
                out.set_dist(u, v, e).expect("fresh pair");
            }
        }
    }
    Ok(out)
}

/// An amalgam together with the embeddings of both factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgam {
    pub graph: MGraph,
    pub embed1: Vec<usize>,
    pub embed2: Vec<usize>,
}

/// Glues `b1` and `b2` along `pairs` (vertex of `b1`, vertex of `b2`)
/// without adding any distances across the factors.
pub fn free_amalgamation(b1: &MGraph, b2: &MGraph, pairs: &[(usize, usize)]) -> Result<Amalgam> {
    if *b1.monoid != *b2.monoid {
        return Err(input_err!("factors use different monoids"));
    }
    let mut to1: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen1 = vec![false; b1.len()];
    for &(x, y) in pairs {
        if x >= b1.len() || y >= b2.len() {
            return Err(input_err!("correspondence refers to a missing vertex"));
        }
        if seen1[x] || to1.insert(y, x).is_some() {
            return Err(input_err!("correspondence is not injective"));
        }
        seen1[x] = true;
    }
    for &(x, y) in pairs {
        for &(x2, y2) in pairs {
            if x != x2 && b1.dist(x, x2) != b2.dist(y, y2) {
                return Err(input_err!(
                    "`{}`–`{}` and `{}`–`{}` carry different distances",
                    b1.id(x),
                    b1.id(x2),
                    b2.id(y),
                    b2.id(y2)
                ));
            }
        }
    }
    let mut g = b1.clone();
    g.order = None;
    let mut embed2 = Vec::with_capacity(b2.len());
    for y in 0..b2.len() {
        if let Some(&x) = to1.get(&y) {
            embed2.push(x);
            continue;
        }
        let mut id = b2.id(y).to_string();
        while g.index_of(&id).is_some() {
            id.push('\'');
        }
        embed2.push(g.add_vertex(id)?);
    }
    for (u, v, e) in b2.edges() {
        g.set_dist(embed2[u], embed2[v], e)?;
    }
    Ok(Amalgam { graph: g, embed1: (0..b1.len()).collect(), embed2 })
}

/// Free amalgamation of two metric spaces followed by shortest-path completion.
pub fn strong_amalgamation(b1: &MGraph, b2: &MGraph, pairs: &[(usize, usize)]) -> Result<Amalgam> {
    for (name, b) in [("first", b1), ("second", b2)] {
        if !validate_metric(b)?.holds() {
            return Err(precondition!("{} factor is not a metric space", name));
        }
    }
    let free = free_amalgamation(b1, b2, pairs)?;
    let graph = shortest_path_completion(&free.graph)
        .map_err(|_| Error::Internal("free amalgam of metric spaces has a non-metric cycle".into()))?;
    Ok(Amalgam { graph, ..free })
}
