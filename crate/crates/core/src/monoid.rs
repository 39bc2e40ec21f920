//! Distance monoids: representation, axiom checks and the 4-values condition.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::blocks::{self, BlockDecomposition};
use crate::error::{input_err, Error, Result};
use crate::Verdict;

/// Exact rational numbers.
pub type Q = Ratio<i64>;

/// An element of some distance monoid.
///
/// The derived ordering coincides with `⪯` of the owning monoid: finite
/// monoids number their elements in increasing order, and infinitesimal
/// elements compare lexicographically, real part first. Elements of
/// different monoids must not be mixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    /// Position in a finite monoid's element list.
    Idx(u32),
    /// `real + inf·dx`.
    Inf(Q, Q),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonoidKind {
    Table,
    TruncatedRationals,
    Ultrametric,
    Infinitesimal,
}

impl MonoidKind {
    pub fn name(self) -> &'static str {
        match self {
            MonoidKind::Table => "table",
            MonoidKind::TruncatedRationals => "truncated-rationals",
            MonoidKind::Ultrametric => "ultrametric",
            MonoidKind::Infinitesimal => "infinitesimal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Finite {
    labels: Vec<String>,
    /// Rational value per element, truncated-rationals only (index 0 is zero).
    values: Vec<Q>,
    /// Row-major `n × n` sum table of element indices.
    table: Vec<u32>,
}

impl Finite {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn sum(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.len() + b as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Finite(Finite),
    Infinitesimal,
}

/// A linearly ordered commutative monoid with least element `0`.
///
/// Either a finite Cayley table (which may fail the axioms; see
/// [`validate_monoid`]) or the infinite monoid of non-negative rationals
/// extended by an infinitesimal `dx`.
#[derive(Clone, Debug)]
pub struct DistanceMonoid {
    kind: MonoidKind,
    repr: Repr,
    blocks: Option<BlockDecomposition>,
}

impl PartialEq for DistanceMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.repr == other.repr
    }
}

impl Eq for DistanceMonoid {}

impl DistanceMonoid {
    /// Builds a table monoid from element labels in strictly increasing `⪯`
    /// order and the full sum table (`sum[i][j]` is the index of `e_i ⊕ e_j`).
    ///
    /// Only the shape is checked here; axioms are checked by
    /// [`validate_monoid`].
    pub fn from_table(labels: Vec<String>, sum: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(input_err!("table monoid needs at least the element 0"));
        }
        if labels[0] != "0" {
            return Err(input_err!("first element must be `0`, found `{}`", labels[0]));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(input_err!("invalid element label {:?}", l));
            }
            if labels[..i].contains(l) {
                return Err(input_err!("duplicate element `{}`", l));
            }
        }
        if sum.len() != n {
            return Err(input_err!("sum table has {} rows, expected {}", sum.len(), n));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in sum.iter().enumerate() {
            if row.len() != n {
                return Err(input_err!("sum row {} has {} entries, expected {}", i, row.len(), n));
            }
            for &x in row {
                if x >= n {
                    return Err(input_err!("sum row {} refers to unknown element #{}", i, x));
                }
                table.push(x as u32);
            }
        }
        let repr = Repr::Finite(Finite { labels, values: Vec::new(), table });
        Ok(Self::assemble(MonoidKind::Table, repr))
    }

    fn assemble(kind: MonoidKind, repr: Repr) -> Self {
        let mut m = DistanceMonoid { kind, repr, blocks: None };
        m.blocks = blocks::decompose(&m).ok();
        m
    }

    pub fn kind(&self) -> MonoidKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.repr, Repr::Finite(_))
    }

    /// Number of elements including zero, `None` for infinite monoids.
    pub fn len(&self) -> Option<usize> {
        match &self.repr {
            Repr::Finite(f) => Some(f.len()),
            Repr::Infinitesimal => None,
        }
    }

    pub fn zero(&self) -> Elem {
        match self.repr {
            Repr::Finite(_) => Elem::Idx(0),
            Repr::Infinitesimal => Elem::Inf(Q::zero(), Q::zero()),
        }
    }

    pub fn is_zero(&self, e: Elem) -> bool {
        e == self.zero()
    }

    /// All elements in increasing order, finite monoids only.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        self.len().map(|n| (0..n as u32).map(Elem::Idx).collect())
    }

    pub fn nonzero_elements(&self) -> Option<Vec<Elem>> {
        self.len().map(|n| (1..n as u32).map(Elem::Idx).collect())
    }

    /// Largest element, if the monoid is finite.
    pub fn max_element(&self) -> Option<Elem> {
        self.len().map(|n| Elem::Idx(n as u32 - 1))
    }

    /// Whether `e` is an element of this monoid.
    pub fn contains(&self, e: Elem) -> bool {
        match (&self.repr, e) {
            (Repr::Finite(f), Elem::Idx(i)) => (i as usize) < f.len(),
            (Repr::Infinitesimal, Elem::Inf(a, b)) => !a.is_negative() && !b.is_negative(),
            _ => false,
        }
    }

    pub fn sum(&self, a: Elem, b: Elem) -> Elem {
        match (&self.repr, a, b) {
            (Repr::Finite(f), Elem::Idx(x), Elem::Idx(y)) => Elem::Idx(f.sum(x, y)),
            (Repr::Infinitesimal, Elem::Inf(a1, b1), Elem::Inf(a2, b2)) => Elem::Inf(a1 + a2, b1 + b2),
            _ => panic!("element {:?} or {:?} does not belong to this monoid", a, b),
        }
    }

    /// Left fold of `⊕` over `items`; the empty sum is zero.
    pub fn sum_all<I: IntoIterator<Item = Elem>>(&self, items: I) -> Elem {
        items.into_iter().fold(self.zero(), |acc, x| self.sum(acc, x))
    }

    /// `n × r`.
    pub fn multiple(&self, n: usize, r: Elem) -> Elem {
        (0..n).fold(self.zero(), |acc, _| self.sum(acc, r))
    }

    pub fn cmp(&self, a: Elem, b: Elem) -> Ordering {
        a.cmp(&b)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        a <= b
    }

    /// Cached block decomposition; fails only for tables violating the axioms.
    pub fn blocks(&self) -> Result<&BlockDecomposition> {
        self.blocks.as_ref().ok_or_else(|| {
            Error::Unsupported("the block relation of this table is not a partition into intervals".into())
        })
    }

    /// Rational value of an element of a truncated-rationals monoid.
    pub fn rational_value(&self, e: Elem) -> Option<Q> {
        match (&self.repr, e) {
            (Repr::Finite(f), Elem::Idx(i)) if !f.values.is_empty() => f.values.get(i as usize).copied(),
            _ => None,
        }
    }

    /// The positive values a truncated-rationals monoid was built from.
    pub fn truncated_values(&self) -> Option<&[Q]> {
        match &self.repr {
            Repr::Finite(f) if self.kind == MonoidKind::TruncatedRationals => Some(&f.values[1..]),
            _ => None,
        }
    }

    pub fn label(&self, e: Elem) -> String {
        match (&self.repr, e) {
            (Repr::Finite(f), Elem::Idx(i)) => f.labels[i as usize].clone(),
            (Repr::Infinitesimal, Elem::Inf(a, b)) => format_infinitesimal(a, b),
            _ => format!("{:?}", e),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match &self.repr {
            Repr::Finite(f) => Some(&f.labels),
            Repr::Infinitesimal => None,
        }
    }

    /// Parses an element written in this monoid's syntax.
    pub fn parse_element(&self, s: &str) -> Result<Elem> {
        let s = s.trim();
        match &self.repr {
            Repr::Finite(f) => {
                if let Some(i) = f.labels.iter().position(|l| l == s) {
                    return Ok(Elem::Idx(i as u32));
                }
                if !f.values.is_empty() {
                    if let Some(q) = parse_rational(s) {
                        if let Some(i) = f.values.iter().position(|v| *v == q) {
                            return Ok(Elem::Idx(i as u32));
                        }
                    }
                }
                Err(input_err!("`{}` is not an element of the monoid", s))
            }
            Repr::Infinitesimal => parse_infinitesimal(s).ok_or_else(|| input_err!("`{}` is not of the form a+bdx", s)),
        }
    }
}

/// The monoid `({0} ∪ S, ⊕_S, ≤, 0)` with `a ⊕_S b = sup{x ∈ S : x ≤ a + b}`.
///
/// The result may violate associativity; check with [`validate_monoid`].
pub fn build_truncated(values: &[Q]) -> Result<DistanceMonoid> {
    if values.is_empty() {
        return Err(input_err!("value set is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_positive()) {
        return Err(input_err!("value {} is not positive", v));
    }
    let mut sorted: Vec<Q> = values.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted.insert(0, Q::zero());
    let n = sorted.len();
    let mut table = Vec::with_capacity(n * n);
    for a in &sorted {
        for b in &sorted {
            let bound = a + b;
            // 0 ⊕ 0 is the only sum below the least positive value
            let idx = sorted.iter().rposition(|x| *x <= bound).unwrap_or(0);
            table.push(idx as u32);
        }
    }
    let labels = sorted.iter().map(|q| q.to_string()).collect();
    let repr = Repr::Finite(Finite { labels, values: sorted, table });
    Ok(DistanceMonoid::assemble(MonoidKind::TruncatedRationals, repr))
}

/// `([n], max, ≤, 0)`.
pub fn build_ultrametric(n: usize) -> Result<DistanceMonoid> {
    if n == 0 {
        return Err(input_err!("ultrametric monoid needs n >= 1"));
    }
    if n > u32::MAX as usize {
        return Err(input_err!("ultrametric size {} too large", n));
    }
    let mut table = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            table.push(a.max(b) as u32);
        }
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    let repr = Repr::Finite(Finite { labels, values: Vec::new(), table });
    Ok(DistanceMonoid::assemble(MonoidKind::Ultrametric, repr))
}

/// Non-negative rationals extended by an infinitesimal `dx`: elements
/// `a + b·dx`, componentwise sum, real part compared first.
pub fn build_infinitesimal() -> DistanceMonoid {
    DistanceMonoid::assemble(MonoidKind::Infinitesimal, Repr::Infinitesimal)
}

/// `a + b·dx` as an element of [`build_infinitesimal`].
pub fn inf(a: i64, b: i64) -> Elem {
    Elem::Inf(Q::from_integer(a), Q::from_integer(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    Commutativity,
    Associativity,
    Identity,
    LeastZero,
    Monotonicity,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Commutativity => "commutativity",
            Axiom::Associativity => "associativity",
            Axiom::Identity => "identity",
            Axiom::LeastZero => "least-zero",
            Axiom::Monotonicity => "monotonicity",
        }
    }
}

/// Concrete counterexample to one axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomWitness {
    /// `a ⊕ b ≠ b ⊕ a`.
    Pair(Elem, Elem),
    /// `(a ⊕ b) ⊕ c ≠ a ⊕ (b ⊕ c)`.
    Triple(Elem, Elem, Elem),
    /// `a ⊕ 0 ≠ a` or `0 ⊕ a ≠ a`.
    Identity(Elem),
    /// An element below zero.
    BelowZero(Elem),
    /// `lo ⪯ hi` but `lo ⊕ with ⋠ hi ⊕ with`.
    Monotone { lo: Elem, hi: Elem, with: Elem },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub checks: Vec<(Axiom, Verdict<AxiomWitness>)>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|(_, v)| v.holds())
    }

    pub fn verdict(&self, axiom: Axiom) -> &Verdict<AxiomWitness> {
        &self.checks.iter().find(|(a, _)| *a == axiom).expect("every axiom is checked").1
    }
}

/// Checks every distance-monoid axiom, by enumeration for finite monoids.
pub fn validate_monoid(m: &DistanceMonoid) -> ValidityReport {
    let all = [Axiom::Commutativity, Axiom::Associativity, Axiom::Identity, Axiom::LeastZero, Axiom::Monotonicity];
    let Some(elems) = m.elements() else {
        return ValidityReport { checks: all.iter().map(|&a| (a, Verdict::HoldsAnalytically)).collect() };
    };
    let zero = m.zero();
    let mut checks = Vec::new();

    let comm = elems
        .iter()
        .flat_map(|&a| elems.iter().map(move |&b| (a, b)))
        .find(|&(a, b)| m.sum(a, b) != m.sum(b, a));
    checks.push((Axiom::Commutativity, verdict(comm.map(|(a, b)| AxiomWitness::Pair(a, b)))));

    let assoc = match check_associativity(m) {
        Verdict::Fails((a, b, c)) => Some(AxiomWitness::Triple(a, b, c)),
        _ => None,
    };
    checks.push((Axiom::Associativity, verdict(assoc)));

    let ident = elems.iter().copied().find(|&a| m.sum(a, zero) != a || m.sum(zero, a) != a);
    checks.push((Axiom::Identity, verdict(ident.map(AxiomWitness::Identity))));

    // element order is the index order, so zero is least iff it is listed first
    let below = elems.iter().copied().find(|&a| a < zero);
    checks.push((Axiom::LeastZero, verdict(below.map(AxiomWitness::BelowZero))));

    let mut mono = None;
    'outer: for (i, &lo) in elems.iter().enumerate() {
        for &hi in &elems[i..] {
            for &with in &elems {
                if m.sum(lo, with) > m.sum(hi, with) || m.sum(with, lo) > m.sum(with, hi) {
                    mono = Some(AxiomWitness::Monotone { lo, hi, with });
                    break 'outer;
                }
            }
        }
    }
    checks.push((Axiom::Monotonicity, verdict(mono)));

    ValidityReport { checks }
}

fn verdict<W>(w: Option<W>) -> Verdict<W> {
    match w {
        Some(w) => Verdict::Fails(w),
        None => Verdict::Holds,
    }
}

/// Exhaustive associativity check; the first failing triple in element
/// order is returned as witness.
pub fn check_associativity(m: &DistanceMonoid) -> Verdict<(Elem, Elem, Elem)> {
    let Some(elems) = m.elements() else {
        return Verdict::HoldsAnalytically;
    };
    for &a in &elems {
        for &b in &elems {
            let ab = m.sum(a, b);
            for &c in &elems {
                if m.sum(ab, c) != m.sum(a, m.sum(b, c)) {
                    return Verdict::Fails((a, b, c));
                }
            }
        }
    }
    Verdict::Holds
}

/// A failure of the 4-values condition: triangles `a–b–x` and `c–d–x` are
/// metric, but no `y` makes both `a–c–y` and `b–d–y` metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourValuesWitness {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
    pub x: Q,
}

/// Decides the 4-values condition for a finite set of positive rationals.
///
/// For fixed sides `p, q` the admissible third sides form the interval
/// `[|p − q|, p + q]`, so each existential reduces to an interval query on
/// the sorted value set.
pub fn check_four_values(values: &[Q]) -> Verdict<FourValuesWitness> {
    let mut s: Vec<Q> = values.to_vec();
    s.sort();
    s.dedup();
    let first_in = |lo: Q, hi: Q| -> Option<Q> {
        let i = s.partition_point(|v| *v < lo);
        s.get(i).copied().filter(|v| *v <= hi)
    };
    for &a in &s {
        for &b in &s {
            for &c in &s {
                for &d in &s {
                    let x_lo = (a - b).abs().max((c - d).abs());
                    let x_hi = (a + b).min(c + d);
                    let Some(x) = first_in(x_lo, x_hi) else { continue };
                    let y_lo = (a - c).abs().max((b - d).abs());
                    let y_hi = (a + c).min(b + d);
                    if first_in(y_lo, y_hi).is_none() {
                        return Verdict::Fails(FourValuesWitness { a, b, c, d, x });
                    }
                }
            }
        }
    }
    Verdict::Holds
}

/// A finite set of nonzero monoid elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceSet {
    values: BTreeSet<Elem>,
}

impl DistanceSet {
    pub fn new(m: &DistanceMonoid, values: impl IntoIterator<Item = Elem>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for v in values {
            if !m.contains(v) {
                return Err(input_err!("{:?} is not an element of the monoid", v));
            }
            if m.is_zero(v) {
                return Err(input_err!("distance sets contain only nonzero elements"));
            }
            set.insert(v);
        }
        Ok(DistanceSet { values: set })
    }

    /// Parses a comma-separated list of element labels.
    pub fn parse(m: &DistanceMonoid, list: &str) -> Result<Self> {
        let elems = list
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| m.parse_element(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, elems)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.values.iter().copied()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.values.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn insert(&mut self, e: Elem) {
        self.values.insert(e);
    }

    pub fn as_set(&self) -> &BTreeSet<Elem> {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumClosure {
    pub values: BTreeSet<Elem>,
    /// Whether sums of more than `length_cap` summands add nothing new.
    pub stabilized: bool,
}

/// All `⊕`-sums of between one and `length_cap` elements of `s`.
pub fn sum_closure(m: &DistanceMonoid, s: &DistanceSet, length_cap: usize) -> Result<SumClosure> {
    if length_cap == 0 {
        return Err(input_err!("length cap must be at least 1"));
    }
    let mut values: BTreeSet<Elem> = s.as_set().clone();
    let mut frontier: Vec<Elem> = values.iter().copied().collect();
    let mut level = 1;
    loop {
        let mut fresh = BTreeSet::new();
        for &x in &frontier {
            for y in s.iter() {
                let z = m.sum(x, y);
                if !values.contains(&z) {
                    fresh.insert(z);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(SumClosure { values, stabilized: true });
        }
        if level == length_cap {
            return Ok(SumClosure { values, stabilized: false });
        }
        level += 1;
        frontier = fresh.iter().copied().collect();
        values.extend(fresh);
    }
}

/// Parses `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| Q::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Q::from_integer),
    }
}

fn parse_infinitesimal(s: &str) -> Option<Elem> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let coeff = |t: &str| -> Option<Q> {
        if t.is_empty() {
            Some(Q::one())
        } else {
            parse_rational(t)
        }
    };
    let (real, inf) = match s.strip_suffix("dx") {
        None => (parse_rational(&s)?, Q::zero()),
        Some(head) => match head.rfind('+') {
            Some(pos) => (parse_rational(&head[..pos])?, coeff(&head[pos + 1..])?),
            None => (Q::zero(), coeff(head)?),
        },
    };
    (!real.is_negative() && !inf.is_negative()).then_some(Elem::Inf(real, inf))
}

fn format_infinitesimal(a: Q, b: Q) -> String {
    let dx = |b: Q| if b.is_one() { "dx".to_string() } else { format!("{}dx", b) };
    match (a.is_zero(), b.is_zero()) {
        (_, true) => a.to_string(),
        (true, false) => dx(b),
        (false, false) => format!("{}+{}", a, dx(b)),
    }
}

impl fmt::Display for MonoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
