//! Line-oriented text formats for monoids, graphs and L* structures.
//!
//! Lines are `key: value` pairs or section headers (`edges:`, `balls:`,
//! `fmap:`, `flinks:`, `types:`, `sum:`) followed by one entry per line. A
//! `#` at the start of a line or after whitespace starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mmetric::blocks::{block_type, BlockId};
use mmetric::lstar::{LStar, VertexKind};
use mmetric::monoid::{build_infinitesimal, build_truncated, build_ultrametric, parse_rational, validate_monoid};
use mmetric::{DistanceMonoid, MGraph, MonoidKind};

use crate::CliError;

/// One meaningful line with its 1-based number.
struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Line { no: i + 1, text: strip_comment(l).trim() })
        .filter(|l| !l.text.is_empty())
        .collect()
}

fn syntax(no: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Syntax(format!("line {}: {}", no, msg))
}

/// Splits `key: rest` when the first token is a `key:` from `keys`.
fn header<'a>(text: &'a str, keys: &[&str]) -> Option<(&'a str, &'a str)> {
    let (first, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let key = first.strip_suffix(':')?;
    keys.contains(&key).then(|| (key, rest.trim()))
}

/// `key: value` lines plus sections, in file order.
struct Document<'a> {
    singles: Vec<(usize, &'a str, &'a str)>,
    sections: Vec<(usize, &'a str, Vec<Line<'a>>)>,
}

fn document<'a>(text: &'a str, single: &[&str], sections: &[&str]) -> Result<Document<'a>, CliError> {
    let all: Vec<&str> = single.iter().chain(sections).copied().collect();
    let mut doc = Document { singles: Vec::new(), sections: Vec::new() };
    let mut current: Option<usize> = None;
    for line in lines(text) {
        match header(line.text, &all) {
            Some((key, rest)) if sections.contains(&key) => {
                if doc.sections.iter().any(|(_, k, _)| *k == key) {
                    return Err(syntax(line.no, format!("section `{}` appears twice", key)));
                }
                if !rest.is_empty() {
                    return Err(syntax(line.no, format!("section `{}` takes entries on the following lines", key)));
                }
                doc.sections.push((line.no, key, Vec::new()));
                current = Some(doc.sections.len() - 1);
            }
            Some((key, rest)) => {
                if doc.singles.iter().any(|(_, k, _)| *k == key) {
                    return Err(syntax(line.no, format!("key `{}` appears twice", key)));
                }
                doc.singles.push((line.no, key, rest));
                current = None;
            }
            None => match current {
                Some(i) => doc.sections[i].2.push(line),
                None => {
                    if line.text.split_whitespace().next().is_some_and(|t| t.ends_with(':')) {
                        return Err(syntax(line.no, format!("unknown key `{}`", line.text)));
                    }
                    return Err(syntax(line.no, "entry outside of any section"));
                }
            },
        }
    }
    Ok(doc)
}

impl<'a> Document<'a> {
    fn single(&self, key: &str) -> Option<(usize, &'a str)> {
        self.singles.iter().find(|(_, k, _)| *k == key).map(|&(no, _, v)| (no, v))
    }

    fn section(&self, key: &str) -> &[Line<'a>] {
        self.sections.iter().find(|(_, k, _)| *k == key).map(|(_, _, v)| v.as_slice()).unwrap_or(&[])
    }
}

/// Parses a monoid file; table monoids must satisfy every axiom.
pub fn parse_monoid(text: &str) -> Result<DistanceMonoid, CliError> {
    let m = parse_monoid_unchecked(text)?;
    if m.kind() == MonoidKind::Table {
        let report = validate_monoid(&m);
        if let Some((axiom, _)) = report.checks.iter().find(|(_, v)| !v.holds()) {
            return Err(CliError::Syntax(format!("table violates {}", axiom.name())));
        }
    }
    Ok(m)
}

/// Parses a monoid file without checking the axioms.
pub fn parse_monoid_unchecked(text: &str) -> Result<DistanceMonoid, CliError> {
    let doc = document(text, &["kind", "elements", "values", "n"], &["sum"])?;
    let (kno, kind) = doc.single("kind").ok_or_else(|| CliError::Syntax("missing `kind:`".into()))?;
    let need = |key: &str| doc.single(key).ok_or_else(|| syntax(kno, format!("kind `{}` needs `{}:`", kind, key)));
    let m = match kind {
        "table" => {
            let (eno, elems) = need("elements")?;
            let labels: Vec<String> = elems.split_whitespace().map(String::from).collect();
            let index = |no: usize, l: &str| {
                labels.iter().position(|x| x == l).ok_or_else(|| syntax(no, format!("unknown element `{}`", l)))
            };
            let mut rows = Vec::new();
            for line in doc.section("sum") {
                rows.push(line.text.split_whitespace().map(|t| index(line.no, t)).collect::<Result<Vec<_>, _>>()?);
            }
            DistanceMonoid::from_table(labels, rows).map_err(|e| syntax(eno, e))?
        }
        "truncated-rationals" => {
            let (vno, vals) = need("values")?;
            let mut qs = Vec::new();
            for t in vals.split_whitespace() {
                qs.push(parse_rational(t).ok_or_else(|| syntax(vno, format!("`{}` is not a rational", t)))?);
            }
            if qs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(syntax(vno, "values must be strictly increasing"));
            }
            build_truncated(&qs).map_err(|e| syntax(vno, e))?
        }
        "ultrametric" => {
            let (nno, n) = need("n")?;
            let n: usize = n.parse().map_err(|_| syntax(nno, format!("`{}` is not a size", n)))?;
            build_ultrametric(n).map_err(|e| syntax(nno, e))?
        }
        "infinitesimal" => build_infinitesimal(),
        other => return Err(syntax(kno, format!("unknown kind `{}`", other))),
    };
    let allowed: &[&str] = match kind {
        "table" => &["kind", "elements"],
        "truncated-rationals" => &["kind", "values"],
        "ultrametric" => &["kind", "n"],
        _ => &["kind"],
    };
    if let Some((no, key, _)) = doc.singles.iter().find(|(_, k, _)| !allowed.contains(k)) {
        return Err(syntax(*no, format!("`{}:` does not apply to kind `{}`", key, kind)));
    }
    if kind != "table" && !doc.section("sum").is_empty() {
        return Err(CliError::Syntax(format!("`sum:` does not apply to kind `{}`", kind)));
    }
    Ok(m)
}

pub fn print_monoid(m: &DistanceMonoid) -> String {
    let mut out = format!("kind: {}\n", m.kind().name());
    match m.kind() {
        MonoidKind::Table => {
            let labels = m.labels().expect("finite");
            let _ = writeln!(out, "elements: {}", labels.join(" "));
            out.push_str("sum:\n");
            let elems = m.elements().expect("finite");
            for &a in &elems {
                let row: Vec<String> = elems.iter().map(|&b| m.label(m.sum(a, b))).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        MonoidKind::TruncatedRationals => {
            let vals: Vec<String> = m.truncated_values().expect("truncated").iter().map(|q| q.to_string()).collect();
            let _ = writeln!(out, "values: {}", vals.join(" "));
        }
        MonoidKind::Ultrametric => {
            let _ = writeln!(out, "n: {}", m.len().expect("finite"));
        }
        MonoidKind::Infinitesimal => {}
    }
    out
}

pub fn load_monoid(path: &Path) -> Result<DistanceMonoid, CliError> {
    parse_monoid(&read(path)?).map_err(|e| e.in_file(path))
}

pub fn load_monoid_unchecked(path: &Path) -> Result<DistanceMonoid, CliError> {
    parse_monoid_unchecked(&read(path)?).map_err(|e| e.in_file(path))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))
}

/// A graph together with the monoid reference it was read with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFile {
    pub monoid_ref: String,
    pub graph: MGraph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LStarFile {
    pub monoid_ref: String,
    pub structure: LStar,
}

/// Resolves a monoid reference relative to the directory of the file
/// mentioning it and loads the monoid.
fn monoid_for(doc: &Document, base: &Path) -> Result<(String, Arc<DistanceMonoid>), CliError> {
    let (no, r) = doc.single("monoid").ok_or_else(|| CliError::Syntax("missing `monoid:`".into()))?;
    if r.is_empty() {
        return Err(syntax(no, "empty monoid reference"));
    }
    let path = resolve(base, r);
    let m = load_monoid(&path)?;
    Ok((r.to_string(), Arc::new(m)))
}

pub fn resolve(base: &Path, reference: &str) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn vertex_list(doc: &Document, key: &str) -> Option<(usize, Vec<String>)> {
    doc.single(key).map(|(no, v)| (no, v.split_whitespace().map(String::from).collect()))
}

/// Parses a graph file; `base` is the directory monoid references are
/// resolved against.
pub fn parse_graph(text: &str, base: &Path) -> Result<GraphFile, CliError> {
    let doc = document(text, &["monoid", "vertices", "order"], &["edges"])?;
    let (monoid_ref, m) = monoid_for(&doc, base)?;
    let (vno, ids) = vertex_list(&doc, "vertices").ok_or_else(|| CliError::Syntax("missing `vertices:`".into()))?;
    let mut g = MGraph::new(m.clone(), ids).map_err(|e| syntax(vno, e))?;
    for line in doc.section("edges") {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        let [u, v, label] = toks[..] else {
            return Err(syntax(line.no, "edge lines read `u v LABEL`"));
        };
        let ui = g.index_of(u).ok_or_else(|| syntax(line.no, format!("unknown vertex `{}`", u)))?;
        let vi = g.index_of(v).ok_or_else(|| syntax(line.no, format!("unknown vertex `{}`", v)))?;
        let e = m.parse_element(label).map_err(|e| syntax(line.no, e))?;
        g.set_dist(ui, vi, e).map_err(|e| syntax(line.no, e))?;
    }
    if let Some((ono, order)) = vertex_list(&doc, "order") {
        let idx = order
            .iter()
            .map(|v| g.index_of(v).ok_or_else(|| syntax(ono, format!("unknown vertex `{}`", v))))
            .collect::<Result<Vec<_>, _>>()?;
        g.set_order(idx).map_err(|e| syntax(ono, e))?;
    }
    Ok(GraphFile { monoid_ref, graph: g })
}

pub fn load_graph(path: &Path) -> Result<GraphFile, CliError> {
    parse_graph(&read(path)?, parent(path)).map_err(|e| e.in_file(path))
}

fn parent(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

pub fn print_graph(monoid_ref: &str, g: &MGraph) -> String {
    let m = g.monoid();
    let mut out = format!("monoid: {}\nvertices: {}\n", monoid_ref, g.ids().join(" "));
    if let Some(order) = g.order() {
        let ids: Vec<&str> = order.iter().map(|&v| g.id(v)).collect();
        let _ = writeln!(out, "order: {}", ids.join(" "));
    }
    out.push_str("edges:\n");
    for (u, v, e) in g.edges() {
        let _ = writeln!(out, "{} {} {}", g.id(u), g.id(v), m.label(e));
    }
    out
}

fn block_number(no: usize, t: &str) -> Result<BlockId, CliError> {
    t.parse().map(BlockId).map_err(|_| syntax(no, format!("`{}` is not a block number", t)))
}

pub fn parse_lstar(text: &str, base: &Path) -> Result<LStarFile, CliError> {
    let doc = document(text, &["monoid", "vertices", "order"], &["edges", "balls", "fmap", "flinks", "types"])?;
    let (monoid_ref, m) = monoid_for(&doc, base)?;
    let mut s = LStar::new(m.clone()).map_err(|e| CliError::Syntax(e.to_string()))?;
    let (vno, ids) = vertex_list(&doc, "vertices").ok_or_else(|| CliError::Syntax("missing `vertices:`".into()))?;
    for id in ids {
        s.add_original(id).map_err(|e| syntax(vno, e))?;
    }
    for line in doc.section("balls") {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        let [id, b] = toks[..] else { return Err(syntax(line.no, "ball lines read `id block`")) };
        s.add_ball(id, block_number(line.no, b)?).map_err(|e| syntax(line.no, e))?;
    }
    let vertex = |s: &LStar, no: usize, id: &str| {
        s.index_of(id).ok_or_else(|| syntax(no, format!("unknown vertex `{}`", id)))
    };
    for line in doc.section("edges") {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        let [u, v, label] = toks[..] else { return Err(syntax(line.no, "edge lines read `u v LABEL`")) };
        let (u, v) = (vertex(&s, line.no, u)?, vertex(&s, line.no, v)?);
        let e = m.parse_element(label).map_err(|e| syntax(line.no, e))?;
        s.set_dist(u, v, e).map_err(|e| syntax(line.no, e))?;
    }
    for (section, originals) in [("fmap", true), ("flinks", false)] {
        for line in doc.section(section) {
            let toks: Vec<&str> = line.text.split_whitespace().collect();
            let [v, b, ball] = toks[..] else {
                return Err(syntax(line.no, format!("{} lines read `vertex block ball`", section)));
            };
            let v = vertex(&s, line.no, v)?;
            if s.is_original(v) != originals {
                let want = if originals { "an original vertex" } else { "a ball" };
                return Err(syntax(line.no, format!("`{}` is not {}", s.id(v), want)));
            }
            let ball = vertex(&s, line.no, ball)?;
            s.set_up(v, block_number(line.no, b)?, ball).map_err(|e| syntax(line.no, e))?;
        }
    }
    for line in doc.section("types") {
        let toks: Vec<&str> = line.text.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(syntax(line.no, "type lines read `ball ball LABEL...`"));
        }
        let (x, y) = (vertex(&s, line.no, toks[0])?, vertex(&s, line.no, toks[1])?);
        let VertexKind::Ball(b) = s.kind(x) else {
            return Err(syntax(line.no, format!("`{}` is not a ball", toks[0])));
        };
        let labels = toks[2..].iter().map(|t| m.parse_element(t)).collect::<Result<Vec<_>, _>>().map_err(|e| syntax(line.no, e))?;
        let t = block_type(&m, b, labels[0]).map_err(|e| syntax(line.no, e))?;
        let listed: BTreeSet<_> = labels.iter().copied().collect();
        let consistent = match t.finite_members() {
            Some(members) => members.iter().copied().collect::<BTreeSet<_>>() == listed,
            None => listed.iter().all(|&e| t.contains(e)),
        };
        if !consistent {
            return Err(syntax(line.no, "listed distances are not a block-type"));
        }
        s.set_type(x, y, t).map_err(|e| syntax(line.no, e))?;
    }
    if let Some((ono, order)) = vertex_list(&doc, "order") {
        let idx = order.iter().map(|v| vertex(&s, ono, v)).collect::<Result<Vec<_>, _>>()?;
        s.set_order(idx).map_err(|e| syntax(ono, e))?;
    }
    Ok(LStarFile { monoid_ref, structure: s })
}

pub fn load_lstar(path: &Path) -> Result<LStarFile, CliError> {
    parse_lstar(&read(path)?, parent(path)).map_err(|e| e.in_file(path))
}

pub fn print_lstar(monoid_ref: &str, s: &LStar) -> String {
    let m = s.monoid();
    let names = |vs: &[usize]| vs.iter().map(|&v| s.id(v)).collect::<Vec<_>>().join(" ");
    let mut out = format!("monoid: {}\nvertices: {}\n", monoid_ref, names(&s.originals()));
    if !s.order().is_empty() {
        let _ = writeln!(out, "order: {}", names(s.order()));
    }
    out.push_str("edges:\n");
    for (u, v, e) in s.dist_entries() {
        let _ = writeln!(out, "{} {} {}", s.id(u), s.id(v), m.label(e));
    }
    out.push_str("balls:\n");
    for b in s.balls() {
        let VertexKind::Ball(block) = s.kind(b) else { unreachable!() };
        let _ = writeln!(out, "{} {}", s.id(b), block.0);
    }
    let mut fmap = String::from("fmap:\n");
    let mut flinks = String::from("flinks:\n");
    for (v, b, ball) in s.up_entries() {
        let target = if s.is_original(v) { &mut fmap } else { &mut flinks };
        let _ = writeln!(target, "{} {} {}", s.id(v), b.0, s.id(ball));
    }
    out.push_str(&fmap);
    out.push_str(&flinks);
    out.push_str("types:\n");
    for (x, y, t) in s.type_entries() {
        let labels: Vec<String> = match t.finite_members() {
            Some(ms) => ms.iter().map(|&e| m.label(e)).collect(),
            None => vec![m.label(t.rep)],
        };
        let _ = writeln!(out, "{} {} {}", s.id(x), s.id(y), labels.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_keep_hashes_inside_ids() {
        assert_eq!(strip_comment("B1#1 1 # note"), "B1#1 1 ");
        assert_eq!(strip_comment("# whole"), "");
    }

    #[test]
    fn monoid_kinds() {
        let m = parse_monoid("kind: ultrametric\nn: 4\n").unwrap();
        assert_eq!(m.len(), Some(4));
        let m = parse_monoid("# comment\nkind: truncated-rationals\nvalues: 1 3 5\n").unwrap();
        assert_eq!(parse_monoid(&print_monoid(&m)).unwrap(), m);
        let t = "kind: table\nelements: 0 a\nsum:\n0 a\na a\n";
        let m = parse_monoid(t).unwrap();
        assert_eq!(print_monoid(&m), t);
        assert!(parse_monoid("kind: table\nelements: 0 a a\nsum:\n0 a a\na a a\na a a\n").is_err());
        assert!(parse_monoid("kind: truncated-rationals\nvalues: 3 1\n").is_err());
        assert!(parse_monoid("kind: nope\n").is_err());
        assert!(parse_monoid("kind: infinitesimal\nn: 3\n").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_monoid("kind: ultrametric\n\nn: x\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{}", e);
    }
}
