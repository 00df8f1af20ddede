//! Directed graphs with finitely many vertices and edge multiplicities in
//! `{0, 1, 2, ..., inf}`.
//!
//! A [`Graph`] is stored as its vertex matrix. Parallel edges are never
//! individually named; every move and invariant works on multiplicities.

use std::collections::HashSet;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of edges between an ordered pair of vertices.
///
/// `Fin(n) < Inf` for every `n`, which makes the derived ordering usable
/// for canonical forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mult {
    Fin(u64),
    Inf,
}

impl Mult {
    pub const ZERO: Mult = Mult::Fin(0);
    pub const ONE: Mult = Mult::Fin(1);

    pub fn is_zero(self) -> bool {
        self == Mult::ZERO
    }

    pub fn is_inf(self) -> bool {
        self == Mult::Inf
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Mult::Fin(n) => Some(n),
            Mult::Inf => None,
        }
    }
}

impl Default for Mult {
    fn default() -> Self {
        Mult::ZERO
    }
}

impl From<u64> for Mult {
    fn from(n: u64) -> Self {
        Mult::Fin(n)
    }
}

impl Add for Mult {
    type Output = Mult;

    fn add(self, rhs: Mult) -> Mult {
        match (self, rhs) {
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.checked_add(b).expect("edge multiplicity overflow")),
            _ => Mult::Inf,
        }
    }
}

impl std::iter::Sum for Mult {
    fn sum<I: Iterator<Item = Mult>>(iter: I) -> Mult {
        iter.fold(Mult::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mult::Fin(n) => write!(f, "{n}"),
            Mult::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultParseError {
    #[error("negative multiplicity `{0}`")]
    Negative(String),
    #[error("invalid multiplicity `{0}`")]
    Invalid(String),
}

impl FromStr for Mult {
    type Err = MultParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Mult::Inf);
        }
        if let Some(rest) = s.strip_prefix('-') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                return Err(MultParseError::Negative(s.to_string()));
            }
        }
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(MultParseError::Invalid(s.to_string()));
        }
        s.parse::<u64>()
            .map(Mult::Fin)
            .map_err(|_| MultParseError::Invalid(s.to_string()))
    }
}

impl Serialize for Mult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Mult::Fin(n) => serializer.serialize_u64(*n),
            Mult::Inf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Mult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MultVisitor;

        impl Visitor<'_> for MultVisitor {
            type Value = Mult;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Mult, E> {
                Ok(Mult::Fin(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Mult, E> {
                if v < 0 {
                    Err(E::custom(format!("negative multiplicity {v}")))
                } else {
                    Ok(Mult::Fin(v as u64))
                }
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Mult, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(MultVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("undeclared vertex `{0}`")]
    UndeclaredVertex(String),
}

/// A directed graph on a finite, ordered vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: Vec<String>,
    // row-major, vertices.len() squared
    mult: Vec<Mult>,
}

impl Graph {
    /// Edgeless graph on the given labels.
    pub fn new<I, S>(labels: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vertices: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let n = vertices.len();
        Ok(Graph { vertices, mult: vec![Mult::ZERO; n * n] })
    }

    /// Builds a finite graph from a square matrix, naming vertices `v0, v1, ...`.
    pub fn from_matrix(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        let mut g = Graph::new((0..n).map(|i| format!("v{i}"))).expect("labels are distinct");
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "vertex matrix must be square");
            for (j, &m) in row.iter().enumerate() {
                g.set(i, j, Mult::Fin(m));
            }
        }
        g
    }

    /// Like [`Graph::from_matrix`] but entries may be infinite.
    pub fn from_mult_matrix(rows: &[Vec<Mult>]) -> Self {
        let n = rows.len();
        let mut g = Graph::new((0..n).map(|i| format!("v{i}"))).expect("labels are distinct");
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "vertex matrix must be square");
            for (j, &m) in row.iter().enumerate() {
                g.set(i, j, m);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn label(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    pub fn require(&self, label: &str) -> Result<usize, GraphError> {
        self.index_of(label).ok_or_else(|| GraphError::UndeclaredVertex(label.to_string()))
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> Mult {
        self.mult[from * self.len() + to]
    }

    #[inline]
    pub fn set(&mut self, from: usize, to: usize, m: Mult) {
        let n = self.len();
        self.mult[from * n + to] = m;
    }

    pub fn mult_by_label(&self, from: &str, to: &str) -> Result<Mult, GraphError> {
        Ok(self.get(self.require(from)?, self.require(to)?))
    }

    pub fn set_by_label(&mut self, from: &str, to: &str, m: Mult) -> Result<(), GraphError> {
        let (i, j) = (self.require(from)?, self.require(to)?);
        self.set(i, j, m);
        Ok(())
    }

    /// Appends a vertex with no edges and returns its index.
    pub fn add_vertex(&mut self, label: impl Into<String>) -> Result<usize, GraphError> {
        let label = label.into();
        if self.index_of(&label).is_some() {
            return Err(GraphError::DuplicateVertex(label));
        }
        let n = self.len();
        let mut mult = vec![Mult::ZERO; (n + 1) * (n + 1)];
        for i in 0..n {
            mult[i * (n + 1)..i * (n + 1) + n].copy_from_slice(&self.mult[i * n..(i + 1) * n]);
        }
        self.vertices.push(label);
        self.mult = mult;
        Ok(n)
    }

    /// Removes a vertex together with every edge touching it.
    pub fn remove_vertex(&mut self, idx: usize) {
        let n = self.len();
        let mut mult = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != idx) {
            for j in (0..n).filter(|&j| j != idx) {
                mult.push(self.get(i, j));
            }
        }
        self.vertices.remove(idx);
        self.mult = mult;
    }

    /// Returns a copy with vertices renamed through `rename`.
    pub fn relabeled(&self, rename: impl Fn(&str) -> String) -> Result<Graph, GraphError> {
        let mut g = Graph::new(self.vertices.iter().map(|v| rename(v)))?;
        g.mult.clone_from(&self.mult);
        Ok(g)
    }

    /// Returns a copy whose vertex `i` is `self`'s vertex `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Graph {
        let n = self.len();
        assert_eq!(order.len(), n);
        let mut mult = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                mult.push(self.get(i, j));
            }
        }
        Graph { vertices: order.iter().map(|&i| self.vertices[i].clone()).collect(), mult }
    }

    pub fn row(&self, i: usize) -> &[Mult] {
        let n = self.len();
        &self.mult[i * n..(i + 1) * n]
    }

    pub fn out_total(&self, v: usize) -> Mult {
        self.row(v).iter().copied().sum()
    }

    pub fn in_total(&self, v: usize) -> Mult {
        (0..self.len()).map(|u| self.get(u, v)).sum()
    }

    /// True iff no multiplicity is infinite.
    pub fn is_finite(&self) -> bool {
        !self.mult.iter().any(|m| m.is_inf())
    }

    pub fn edge_count(&self) -> Mult {
        self.mult.iter().copied().sum()
    }

    /// Sum of finite multiplicities, with each infinite entry counted once.
    pub fn total_multiplicity(&self) -> u64 {
        self.mult
            .iter()
            .map(|m| match m {
                Mult::Fin(n) => *n,
                Mult::Inf => 1,
            })
            .sum()
    }

    pub fn is_regular(&self, v: usize) -> bool {
        matches!(self.out_total(v), Mult::Fin(n) if n > 0)
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.in_total(v).is_zero()
    }

    /// Label not yet used in the graph, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        (1..)
            .map(|k| format!("{base}.{k}"))
            .find(|c| self.index_of(c).is_none())
            .expect("unbounded label supply")
    }

    /// Same graph up to a reordering of the vertex list.
    pub fn same_up_to_order(&self, other: &Graph) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let Some(map) = self
            .vertices
            .iter()
            .map(|v| other.index_of(v))
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.get(i, j) == other.get(map[i], map[j])))
    }

    /// Parses the line-based text format or its JSON mirror.
    pub fn parse(text: &str) -> Result<Graph, ParseError> {
        if text.trim_start().starts_with('{') {
            Graph::from_json(text)
        } else {
            parse_text(text)
        }
    }

    /// Line-based text form; edges listed in row-major declaration order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("vertices:");
        for v in &self.vertices {
            out.push(' ');
            out.push_str(v);
        }
        for i in 0..self.len() {
            for j in 0..self.len() {
                let m = self.get(i, j);
                if !m.is_zero() {
                    out.push_str(&format!("\nedge {} {} {}", self.vertices[i], self.vertices[j], m));
                }
            }
        }
        out
    }

    pub fn to_json_value(&self) -> GraphJson {
        let mut edges = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                let m = self.get(i, j);
                if !m.is_zero() {
                    edges.push(EdgeJson { src: self.vertices[i].clone(), dst: self.vertices[j].clone(), mult: m });
                }
            }
        }
        GraphJson { vertices: self.vertices.clone(), edges }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph, ParseError> {
        let raw: GraphJson = serde_json::from_str(text)
            .map_err(|e| ParseError { line: e.line(), kind: ParseErrorKind::Json(e.to_string()) })?;
        Graph::try_from(raw)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Serialized shape of the JSON mirror of the graph file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub src: String,
    pub dst: String,
    pub mult: Mult,
}

impl TryFrom<GraphJson> for Graph {
    type Error = ParseError;

    fn try_from(raw: GraphJson) -> Result<Self, Self::Error> {
        let at = |kind| ParseError { line: 0, kind };
        let mut g = Graph::new(raw.vertices).map_err(|e| match e {
            GraphError::DuplicateVertex(v) => at(ParseErrorKind::DuplicateVertex(v)),
            GraphError::UndeclaredVertex(v) => at(ParseErrorKind::UndeclaredVertex(v)),
        })?;
        let mut seen = HashSet::new();
        for e in raw.edges {
            let i = g.index_of(&e.src).ok_or_else(|| at(ParseErrorKind::UndeclaredVertex(e.src.clone())))?;
            let j = g.index_of(&e.dst).ok_or_else(|| at(ParseErrorKind::UndeclaredVertex(e.dst.clone())))?;
            if e.mult.is_zero() {
                return Err(at(ParseErrorKind::ZeroMultiplicity));
            }
            if !seen.insert((i, j)) {
                return Err(at(ParseErrorKind::DuplicateEdge(e.src, e.dst)));
            }
            g.set(i, j, e.mult);
        }
        Ok(g)
    }
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        g.to_json_value()
    }
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        Graph::try_from(raw).map_err(de::Error::custom)
    }
}

/// Parse failure; `line` is 1-based (0 when no line applies).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("undeclared vertex `{0}`")]
    UndeclaredVertex(String),
    #[error("negative multiplicity `{0}`")]
    NegativeMultiplicity(String),
    #[error("edge multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("repeated edge line for `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("missing `vertices:` line")]
    MissingVertices,
    #[error("more than one `vertices:` line")]
    RepeatedVertices,
    #[error("invalid JSON graph: {0}")]
    Json(String),
}

fn parse_text(text: &str) -> Result<Graph, ParseError> {
    let mut graph: Option<Graph> = None;
    let mut seen_edges = HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |kind| ParseError { line: lineno + 1, kind };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            if graph.is_some() {
                return Err(err(ParseErrorKind::RepeatedVertices));
            }
            let g = Graph::new(rest.split_whitespace()).map_err(|e| match e {
                GraphError::DuplicateVertex(v) => err(ParseErrorKind::DuplicateVertex(v)),
                GraphError::UndeclaredVertex(v) => err(ParseErrorKind::UndeclaredVertex(v)),
            })?;
            graph = Some(g);
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["edge", src, dst, mult] => {
                let Some(g) = graph.as_mut() else {
                    return Err(err(ParseErrorKind::UndeclaredVertex(src.to_string())));
                };
                let i = g.index_of(src).ok_or_else(|| err(ParseErrorKind::UndeclaredVertex(src.to_string())))?;
                let j = g.index_of(dst).ok_or_else(|| err(ParseErrorKind::UndeclaredVertex(dst.to_string())))?;
                let m: Mult = mult.parse().map_err(|e| match e {
                    MultParseError::Negative(s) => err(ParseErrorKind::NegativeMultiplicity(s)),
                    MultParseError::Invalid(s) => err(ParseErrorKind::Syntax(format!("invalid multiplicity `{s}`"))),
                })?;
                if m.is_zero() {
                    return Err(err(ParseErrorKind::ZeroMultiplicity));
                }
                if !seen_edges.insert((i, j)) {
                    return Err(err(ParseErrorKind::DuplicateEdge(src.to_string(), dst.to_string())));
                }
                g.set(i, j, m);
            }
            ["edge", ..] => {
                return Err(err(ParseErrorKind::Syntax("expected `edge <src> <dst> <mult>`".into())));
            }
            _ => return Err(err(ParseErrorKind::Syntax(format!("unrecognized line `{line}`")))),
        }
    }
    graph.ok_or(ParseError { line: 0, kind: ParseErrorKind::MissingVertices })
}

/// Vertex matrix over `N ∪ {inf}` in declared vertex order.
pub fn vertex_matrix(g: &Graph) -> Vec<Vec<Mult>> {
    (0..g.len()).map(|i| g.row(i).to_vec()).collect()
}

/// Partition of the vertex set into regular vertices, sinks and infinite emitters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VertexClasses {
    pub regular: Vec<String>,
    pub sinks: Vec<String>,
    pub infinite_emitters: Vec<String>,
}

impl VertexClasses {
    pub fn singular_count(&self) -> usize {
        self.sinks.len() + self.infinite_emitters.len()
    }
}

pub fn classify_vertices(g: &Graph) -> VertexClasses {
    let mut classes = VertexClasses::default();
    for v in 0..g.len() {
        let label = g.label(v).to_string();
        match g.out_total(v) {
            Mult::Fin(0) => classes.sinks.push(label),
            Mult::Inf => classes.infinite_emitters.push(label),
            Mult::Fin(_) => classes.regular.push(label),
        }
    }
    classes
}

/// Indices of regular vertices, in declared order.
pub fn regular_indices(g: &Graph) -> Vec<usize> {
    (0..g.len()).filter(|&v| g.is_regular(v)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub strongly_connected: bool,
    pub has_cycle: bool,
    pub is_single_cycle: bool,
    pub cofinal: bool,
    pub condition_l: bool,
    pub simple: bool,
    pub purely_infinite_simple: bool,
    pub finite_dimensional: bool,
}

/// `reach[i][j]` iff there is a path of length at least one from `i` to `j`.
pub(crate) fn reachability(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut stack: Vec<usize> = (0..n).filter(|&w| !g.get(s, w).is_zero()).collect();
        while let Some(v) = stack.pop() {
            if row[v] {
                continue;
            }
            row[v] = true;
            stack.extend((0..n).filter(|&w| !g.get(v, w).is_zero() && !row[w]));
        }
    }
    reach
}

/// Computes the structural predicates.
///
/// The simplicity test is: every vertex reaches every vertex lying on a
/// cycle and every singular vertex (cofinality, equivalently no nontrivial
/// hereditary saturated subset), and every cycle has an exit (Condition L).
pub fn structural_report(g: &Graph) -> StructuralReport {
    let n = g.len();
    let reach = reachability(g);
    let reaches = |a: usize, b: usize| a == b || reach[a][b];

    let on_cycle: Vec<bool> = (0..n).map(|v| reach[v][v]).collect();
    let has_cycle = on_cycle.iter().any(|&c| c);
    let strongly_connected = n > 0 && (0..n).all(|a| (0..n).all(|b| reaches(a, b)));
    let out_one: Vec<bool> = (0..n).map(|v| g.out_total(v) == Mult::ONE).collect();
    let is_single_cycle = strongly_connected && has_cycle && out_one.iter().all(|&b| b);

    // A cycle without an exit is exactly a cyclic strongly connected
    // component in which every vertex emits a single edge.
    let condition_l = (0..n).filter(|&v| on_cycle[v]).all(|v| {
        let component: Vec<usize> = (0..n).filter(|&w| reaches(v, w) && reaches(w, v)).collect();
        !component.iter().all(|&w| out_one[w])
    });

    let targets: Vec<usize> = (0..n).filter(|&v| on_cycle[v] || !g.is_regular(v)).collect();
    let cofinal = n > 0 && (0..n).all(|v| targets.iter().all(|&t| reaches(v, t)));
    let simple = cofinal && condition_l;

    StructuralReport {
        strongly_connected,
        has_cycle,
        is_single_cycle,
        cofinal,
        condition_l,
        simple,
        purely_infinite_simple: simple && has_cycle,
        finite_dimensional: g.is_finite() && !has_cycle,
    }
}

/// Number of distinct return paths based at `v` (closed paths that leave
/// `v` and do not pass through `v` before returning), capped at `cap`.
pub fn return_path_count(g: &Graph, v: usize, cap: u64) -> u64 {
    let n = g.len();
    let mul = |m: Mult, k: u64| -> u64 {
        match m {
            Mult::Fin(a) => a.saturating_mul(k).min(cap),
            Mult::Inf if k > 0 => cap,
            Mult::Inf => 0,
        }
    };
    // paths[w] = number of paths from w that first arrive at v; least fixed point.
    let mut paths = vec![0u64; n];
    loop {
        let mut changed = false;
        for w in (0..n).filter(|&w| w != v) {
            let mut total = mul(g.get(w, v), 1);
            for u in (0..n).filter(|&u| u != v) {
                total = (total + mul(g.get(w, u), paths[u])).min(cap);
            }
            if total != paths[w] {
                paths[w] = total;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut total = mul(g.get(v, v), 1);
    for w in (0..n).filter(|&w| w != v) {
        total = (total + mul(g.get(v, w), paths[w])).min(cap);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Graph {
        Graph::parse(s).unwrap()
    }

    #[test]
    fn parses_loops() {
        let g = parse("vertices: v\nedge v v 2");
        assert_eq!(g.len(), 1);
        assert_eq!(g.get(0, 0), Mult::Fin(2));
    }

    #[test]
    fn parses_infinite_edges() {
        let g = parse("vertices: v w\nedge v w inf\nedge w v 2");
        assert_eq!(vertex_matrix(&g), vec![vec![Mult::ZERO, Mult::Inf], vec![Mult::Fin(2), Mult::ZERO]]);
        assert!(!g.is_finite());
    }

    #[test]
    fn rejects_undeclared_vertex() {
        let err = Graph::parse("edge v v 2").unwrap_err();
        assert!(err.to_string().contains("undeclared vertex"), "{err}");
        let err = Graph::parse("vertices: v\nedge v w 1").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, ParseErrorKind::UndeclaredVertex("w".into()));
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            ("vertices: v v", ParseErrorKind::DuplicateVertex("v".into())),
            ("vertices: v\nedge v v -1", ParseErrorKind::NegativeMultiplicity("-1".into())),
            ("vertices: v\nedge v v 0", ParseErrorKind::ZeroMultiplicity),
            ("vertices: v\nedge v v 1\nedge v v 2", ParseErrorKind::DuplicateEdge("v".into(), "v".into())),
            ("# nothing", ParseErrorKind::MissingVertices),
            ("vertices: v\nvertices: w", ParseErrorKind::RepeatedVertices),
        ];
        for (text, kind) in cases {
            assert_eq!(Graph::parse(text).unwrap_err().kind, kind, "{text}");
        }
        assert!(matches!(Graph::parse("vertices: v\nedge v v x").unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(Graph::parse("vertices: v\nedge v v").unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(Graph::parse("vertices: v\nnode v").unwrap_err().kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse("# E_2\n\nvertices: v\n  # loops\nedge v v 2\n");
        assert_eq!(g.get(0, 0), Mult::Fin(2));
    }

    #[test]
    fn serializes() {
        assert_eq!(parse("vertices: v\nedge v v 2").to_text(), "vertices: v\nedge v v 2");
        assert_eq!(parse("vertices: v").to_text(), "vertices: v");
        let text = parse("vertices: v w\nedge v w inf\nedge w v 2").to_text();
        assert!(text.contains("edge v w inf"));
    }

    #[test]
    fn json_mirror() {
        let g = parse("vertices: v w\nedge v w inf\nedge w v 2");
        let json = g.to_json();
        assert_eq!(json, r#"{"vertices":["v","w"],"edges":[{"src":"v","dst":"w","mult":"inf"},{"src":"w","dst":"v","mult":2}]}"#);
        assert_eq!(Graph::parse(&json).unwrap(), g);
        let err = Graph::parse(r#"{"vertices":["v"],"edges":[{"src":"v","dst":"v","mult":-3}]}"#).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Json(_)));
        let err = Graph::parse(r#"{"vertices":["v"],"edges":[{"src":"v","dst":"x","mult":1}]}"#).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredVertex("x".into()));
    }

    #[test]
    fn vertex_matrices() {
        assert_eq!(vertex_matrix(&Graph::from_matrix(&[vec![5]])), vec![vec![Mult::Fin(5)]]);
        // loop at u, u <-> v
        let g = parse("vertices: u v\nedge u u 1\nedge u v 1\nedge v u 1");
        assert_eq!(
            vertex_matrix(&g),
            vec![vec![Mult::ONE, Mult::ONE], vec![Mult::ONE, Mult::ZERO]]
        );
    }

    #[test]
    fn vertex_classes() {
        let c = classify_vertices(&parse("vertices: v\nedge v v 2"));
        assert_eq!(c.regular, vec!["v"]);
        assert!(c.sinks.is_empty() && c.infinite_emitters.is_empty());

        let c = classify_vertices(&parse("vertices: v w\nedge v w inf\nedge w v 2"));
        assert_eq!(c.regular, vec!["w"]);
        assert_eq!(c.infinite_emitters, vec!["v"]);

        let c = classify_vertices(&parse("vertices: v w\nedge v w 1"));
        assert_eq!(c.sinks, vec!["w"]);
        assert_eq!(c.singular_count(), 1);
    }

    #[test]
    fn reports() {
        let r = structural_report(&Graph::from_matrix(&[vec![2]]));
        assert!(r.strongly_connected && !r.is_single_cycle && r.simple && r.purely_infinite_simple);

        let r = structural_report(&Graph::from_matrix(&[vec![1]]));
        assert!(r.strongly_connected && r.is_single_cycle && !r.simple && !r.condition_l);

        let r = structural_report(&parse("vertices: v w\nedge v w 1"));
        assert!(!r.has_cycle && r.finite_dimensional && r.simple && !r.purely_infinite_simple);

        // an infinite emitter feeding a sink is not simple
        let r = structural_report(&parse("vertices: v w\nedge v w inf"));
        assert!(!r.simple && !r.finite_dimensional);

        let r = structural_report(&parse("vertices: v w\nedge v w inf\nedge w v 2"));
        assert!(r.simple && r.purely_infinite_simple && r.strongly_connected);

        let r = structural_report(&parse("vertices: v\nedge v v inf"));
        assert!(r.simple && r.purely_infinite_simple);

        // two disjoint E_2's
        let r = structural_report(&Graph::from_matrix(&[vec![2, 0], vec![0, 2]]));
        assert!(!r.cofinal && !r.simple && r.condition_l);
    }

    #[test]
    fn return_paths() {
        let g = Graph::from_matrix(&[vec![1, 1], vec![1, 0]]);
        assert_eq!(return_path_count(&g, 0, 2), 2);
        assert_eq!(return_path_count(&g, 1, 2), 2);
        assert_eq!(return_path_count(&Graph::from_matrix(&[vec![1]]), 0, 2), 1);
        assert_eq!(return_path_count(&Graph::from_matrix(&[vec![2]]), 0, 2), 2);
        let cycle = Graph::from_matrix(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(return_path_count(&cycle, 0, 2), 1);
        let g = Graph::from_matrix(&[vec![0, 2], vec![1, 0]]);
        assert_eq!(return_path_count(&g, 1, 5), 2);
        assert_eq!(return_path_count(&parse("vertices: v w\nedge v w inf\nedge w v 1"), 0, 3), 3);
    }

    #[test]
    fn vertex_editing() {
        let mut g = Graph::from_matrix(&[vec![0, 1], vec![2, 0]]);
        let k = g.add_vertex("x").unwrap();
        g.set(k, 0, Mult::ONE);
        assert_eq!(g.get(1, 0), Mult::Fin(2));
        assert!(g.add_vertex("x").is_err());
        g.remove_vertex(0);
        assert_eq!(g.vertices(), ["v1", "x"]);
        assert_eq!(g.get(0, 1), Mult::ZERO);
        assert_eq!(g.fresh_label("x"), "x.1");
    }
}
