//! The standard graph moves and their inverses, plus the Cuntz splice.
//!
//! All bookkeeping is on multiplicities: a partition of the edges leaving
//! (or entering) a vertex is, for every parallel class, a composition of its
//! multiplicity into one part per block. An infinite class may be split as
//! any composition with at least one infinite part.
//!
//! Conventions fixed here:
//!
//! - **S** removes a *regular* source (the graph must keep one vertex).
//! - **O** splits a non-sink `v` into `v, v.1, ...`; block `i` is emitted from
//!   copy `i`, every edge into `v` is copied into each copy. At most one block
//!   may be infinite.
//! - **I** splits a *regular*, non-source `v`; block `i` of the incoming edges
//!   lands on copy `i`, every edge out of `v` is copied onto each copy.
//! - **R** deletes a regular `v` that emits one edge to some `w != v` and
//!   redirects edges into `v` onto `w`.
//! - **S-1**, **O-1**, **I-1**, **R-1** reverse these. The merged vertex of an
//!   amalgamation keeps the label of the first group member.
//! - **CS** attaches `v.1` and `v.2` with `v <-> v.1 <-> v.2` and a loop at
//!   each new vertex, at a vertex with two distinct return paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::VertexBoundExceeded;
use crate::graph::{return_path_count, Graph, Mult};

/// Out- or in-edge multiplicities of one block, keyed by the other endpoint.
pub type Block = BTreeMap<String, Mult>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "S")]
    S,
    #[serde(rename = "S-1")]
    SInv,
    #[serde(rename = "O")]
    O,
    #[serde(rename = "O-1")]
    OInv,
    #[serde(rename = "I")]
    I,
    #[serde(rename = "I-1")]
    IInv,
    #[serde(rename = "R")]
    R,
    #[serde(rename = "R-1")]
    RInv,
    #[serde(rename = "CS")]
    CS,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::S,
        MoveKind::SInv,
        MoveKind::O,
        MoveKind::OInv,
        MoveKind::I,
        MoveKind::IInv,
        MoveKind::R,
        MoveKind::RInv,
        MoveKind::CS,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::S => "S",
            MoveKind::SInv => "S-1",
            MoveKind::O => "O",
            MoveKind::OInv => "O-1",
            MoveKind::I => "I",
            MoveKind::IInv => "I-1",
            MoveKind::R => "R",
            MoveKind::RInv => "R-1",
            MoveKind::CS => "CS",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoveKind {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('^', "").replace("inv", "-1");
        MoveKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| MoveError::Syntax(format!("unknown move kind `{s}`")))
    }
}

/// One concrete move, with every parameter needed to apply it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MoveInstance {
    #[serde(rename = "S")]
    SourceRemoval { at: String },
    /// Adds a fresh source emitting `out[w]` edges to each `w`.
    #[serde(rename = "S-1")]
    SourceAddition { out: BTreeMap<String, u64> },
    /// Blocks map ranges to multiplicities; block 0 stays on `at`.
    #[serde(rename = "O")]
    OutSplit { at: String, blocks: Vec<Block> },
    #[serde(rename = "O-1")]
    OutAmalgamation { group: Vec<String> },
    /// Blocks map sources to multiplicities; block 0 stays on `at`.
    #[serde(rename = "I")]
    InSplit { at: String, blocks: Vec<Block> },
    #[serde(rename = "I-1")]
    InAmalgamation { group: Vec<String> },
    #[serde(rename = "R")]
    Reduction { at: String },
    /// Inserts a fresh vertex `x` with one edge `x -> at`; for each source
    /// `u` listed, the `u -> at` edges become `keep` edges `u -> at` and
    /// `redirect` edges `u -> x`. Unlisted sources keep all their edges.
    #[serde(rename = "R-1")]
    Delay { at: String, split: BTreeMap<String, (Mult, Mult)> },
    #[serde(rename = "CS")]
    CuntzSplice { at: String },
}

impl MoveInstance {
    pub fn kind(&self) -> MoveKind {
        match self {
            MoveInstance::SourceRemoval { .. } => MoveKind::S,
            MoveInstance::SourceAddition { .. } => MoveKind::SInv,
            MoveInstance::OutSplit { .. } => MoveKind::O,
            MoveInstance::OutAmalgamation { .. } => MoveKind::OInv,
            MoveInstance::InSplit { .. } => MoveKind::I,
            MoveInstance::InAmalgamation { .. } => MoveKind::IInv,
            MoveInstance::Reduction { .. } => MoveKind::R,
            MoveInstance::Delay { .. } => MoveKind::RInv,
            MoveInstance::CuntzSplice { .. } => MoveKind::CS,
        }
    }

    /// Same move with every vertex label passed through `f`.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> MoveInstance {
        let map_block = |b: &Block| b.iter().map(|(k, v)| (f(k), *v)).collect::<Block>();
        match self {
            MoveInstance::SourceRemoval { at } => MoveInstance::SourceRemoval { at: f(at) },
            MoveInstance::SourceAddition { out } => {
                MoveInstance::SourceAddition { out: out.iter().map(|(k, v)| (f(k), *v)).collect() }
            }
            MoveInstance::OutSplit { at, blocks } => {
                MoveInstance::OutSplit { at: f(at), blocks: blocks.iter().map(map_block).collect() }
            }
            MoveInstance::OutAmalgamation { group } => {
                MoveInstance::OutAmalgamation { group: group.iter().map(|v| f(v)).collect() }
            }
            MoveInstance::InSplit { at, blocks } => {
                MoveInstance::InSplit { at: f(at), blocks: blocks.iter().map(map_block).collect() }
            }
            MoveInstance::InAmalgamation { group } => {
                MoveInstance::InAmalgamation { group: group.iter().map(|v| f(v)).collect() }
            }
            MoveInstance::Reduction { at } => MoveInstance::Reduction { at: f(at) },
            MoveInstance::Delay { at, split } => {
                MoveInstance::Delay { at: f(at), split: split.iter().map(|(k, v)| (f(k), *v)).collect() }
            }
            MoveInstance::CuntzSplice { at } => MoveInstance::CuntzSplice { at: f(at) },
        }
    }
}

fn fmt_block(b: &Block) -> String {
    b.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

impl fmt::Display for MoveInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveInstance::SourceRemoval { at } | MoveInstance::Reduction { at } | MoveInstance::CuntzSplice { at } => {
                write!(f, "{} at {at}", self.kind())
            }
            MoveInstance::SourceAddition { out } => {
                let out: Vec<String> = out.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "S-1 out {{{}}}", out.join(","))
            }
            MoveInstance::OutSplit { at, blocks } | MoveInstance::InSplit { at, blocks } => {
                let blocks: Vec<String> = blocks.iter().map(|b| format!("{{{}}}", fmt_block(b))).collect();
                write!(f, "{} at {at} blocks {}", self.kind(), blocks.join(" | "))
            }
            MoveInstance::OutAmalgamation { group } | MoveInstance::InAmalgamation { group } => {
                write!(f, "{} group {{{}}}", self.kind(), group.join(","))
            }
            MoveInstance::Delay { at, split } => {
                let split: Vec<String> = split.iter().map(|(u, (k, r))| format!("{u}={k}|{r}")).collect();
                write!(f, "R-1 at {at} split {{{}}}", split.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("invalid {kind} move: {reason}")]
    Invalid { kind: MoveKind, reason: String },
    #[error(transparent)]
    Bound(#[from] VertexBoundExceeded),
    #[error("{0}")]
    Syntax(String),
}

fn invalid(kind: MoveKind, reason: impl Into<String>) -> MoveError {
    MoveError::Invalid { kind, reason: reason.into() }
}

/// Enumeration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveBounds {
    pub max_partition_blocks: usize,
    /// Largest finite multiplicity a move may invent: finite parts split off
    /// an infinite class, and the edges of an added source.
    pub max_new_mult: u64,
    /// Moves whose result would exceed this many vertices are not listed.
    pub max_vertices: usize,
}

impl Default for MoveBounds {
    fn default() -> Self {
        MoveBounds { max_partition_blocks: 3, max_new_mult: 1, max_vertices: 8 }
    }
}

/// The result of applying a move, with the labels of new vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub graph: Graph,
    pub created: Vec<String>,
}

fn vertex(g: &Graph, kind: MoveKind, label: &str) -> Result<usize, MoveError> {
    g.index_of(label).ok_or_else(|| invalid(kind, format!("no vertex `{label}`")))
}

/// Whether `parts` is a composition of `total`: finite parts sum exactly,
/// an infinite total needs at least one infinite part.
fn composes(parts: impl IntoIterator<Item = Mult>, total: Mult) -> bool {
    parts.into_iter().sum::<Mult>() == total
}

fn is_single_target(g: &Graph, v: usize) -> Option<usize> {
    if g.out_total(v) != Mult::ONE {
        return None;
    }
    (0..g.len()).find(|&w| g.get(v, w) == Mult::ONE)
}

/// Checks a partition: blocks keyed by endpoint labels, covering
/// `class(x)` for every vertex `x`, `what` naming the edge set.
fn check_partition(
    g: &Graph,
    kind: MoveKind,
    blocks: &[Block],
    class: impl Fn(usize) -> Mult,
    what: &str,
) -> Result<(), MoveError> {
    if blocks.len() < 2 {
        return Err(invalid(kind, "a partition needs at least two blocks"));
    }
    for b in blocks {
        for label in b.keys() {
            vertex(g, kind, label)?;
        }
        if b.values().all(|m| m.is_zero()) {
            return Err(invalid(kind, "partition blocks must be nonempty"));
        }
    }
    for x in 0..g.len() {
        let parts = blocks.iter().map(|b| b.get(g.label(x)).copied().unwrap_or(Mult::ZERO));
        if !composes(parts, class(x)) {
            return Err(invalid(kind, format!("partition must cover {what}")));
        }
    }
    Ok(())
}

fn group_indices(g: &Graph, kind: MoveKind, group: &[String]) -> Result<Vec<usize>, MoveError> {
    if group.len() < 2 {
        return Err(invalid(kind, "an amalgamation needs at least two vertices"));
    }
    let idx = group.iter().map(|l| vertex(g, kind, l)).collect::<Result<Vec<_>, _>>()?;
    if idx.iter().collect::<BTreeSet<_>>().len() != idx.len() {
        return Err(invalid(kind, "group lists a vertex twice"));
    }
    Ok(idx)
}

/// Checks every precondition of `m` on `g`.
pub fn validate_move(g: &Graph, m: &MoveInstance) -> Result<(), MoveError> {
    let kind = m.kind();
    match m {
        MoveInstance::SourceRemoval { at } => {
            let v = vertex(g, kind, at)?;
            if !g.is_source(v) {
                return Err(invalid(kind, "not a source"));
            }
            if !g.is_regular(v) {
                return Err(invalid(kind, "only regular sources may be removed"));
            }
            if g.len() < 2 {
                return Err(invalid(kind, "cannot remove the last vertex"));
            }
        }
        MoveInstance::SourceAddition { out } => {
            for label in out.keys() {
                vertex(g, kind, label)?;
            }
            if out.values().sum::<u64>() == 0 {
                return Err(invalid(kind, "the added source must emit at least one edge"));
            }
        }
        MoveInstance::OutSplit { at, blocks } => {
            let v = vertex(g, kind, at)?;
            if g.out_total(v).is_zero() {
                return Err(invalid(kind, "cannot outsplit a sink"));
            }
            check_partition(g, kind, blocks, |x| g.get(v, x), &format!("s^-1({at})"))?;
            if blocks.iter().filter(|b| b.values().any(|m| m.is_inf())).count() > 1 {
                return Err(invalid(kind, "at most one block may be infinite"));
            }
        }
        MoveInstance::InSplit { at, blocks } => {
            let v = vertex(g, kind, at)?;
            if !g.is_regular(v) {
                return Err(invalid(kind, "insplitting needs a regular vertex"));
            }
            if g.is_source(v) {
                return Err(invalid(kind, "cannot insplit a source"));
            }
            check_partition(g, kind, blocks, |u| g.get(u, v), &format!("r^-1({at})"))?;
        }
        MoveInstance::OutAmalgamation { group } => {
            let idx = group_indices(g, kind, group)?;
            let first = idx[0];
            if idx.iter().any(|&gi| (0..g.len()).any(|u| g.get(u, gi) != g.get(u, first))) {
                return Err(invalid(kind, "group members must receive identical edges"));
            }
            if idx.iter().any(|&gi| g.out_total(gi).is_zero()) {
                return Err(invalid(kind, "group members must not be sinks"));
            }
            if idx.iter().filter(|&&gi| g.out_total(gi).is_inf()).count() > 1 {
                return Err(invalid(kind, "at most one group member may be an infinite emitter"));
            }
        }
        MoveInstance::InAmalgamation { group } => {
            let idx = group_indices(g, kind, group)?;
            let first = idx[0];
            if idx.iter().any(|&gi| g.row(gi) != g.row(first)) {
                return Err(invalid(kind, "group members must emit identical edges"));
            }
            if !g.is_regular(first) {
                return Err(invalid(kind, "group members must be regular"));
            }
            if idx.iter().any(|&gi| g.is_source(gi)) {
                return Err(invalid(kind, "group members must not be sources"));
            }
        }
        MoveInstance::Reduction { at } => {
            let v = vertex(g, kind, at)?;
            match is_single_target(g, v) {
                None => return Err(invalid(kind, "vertex must emit exactly one edge")),
                Some(w) if w == v => return Err(invalid(kind, "the single edge must not be a loop")),
                Some(_) => {}
            }
        }
        MoveInstance::Delay { at, split } => {
            let w = vertex(g, kind, at)?;
            for (label, &(keep, redirect)) in split {
                let u = vertex(g, kind, label)?;
                if g.get(u, w).is_zero() {
                    return Err(invalid(kind, format!("no edge {label} -> {at}")));
                }
                if !composes([keep, redirect], g.get(u, w)) {
                    return Err(invalid(kind, format!("split of {label} -> {at} must add up to its multiplicity")));
                }
            }
        }
        MoveInstance::CuntzSplice { at } => {
            let v = vertex(g, kind, at)?;
            if return_path_count(g, v, 2) < 2 {
                return Err(invalid(kind, "vertex is not the base of two distinct return paths"));
            }
        }
    }
    Ok(())
}

fn block_mult(b: &Block, g: &Graph, x: usize) -> Mult {
    b.get(g.label(x)).copied().unwrap_or(Mult::ZERO)
}

/// Applies `m`, returning the new graph and the labels of created vertices.
pub fn apply(g: &Graph, m: &MoveInstance) -> Result<Applied, MoveError> {
    validate_move(g, m)?;
    let n = g.len();
    let mut out = g.clone();
    let mut created = Vec::new();
    let add = |out: &mut Graph, base: &str, created: &mut Vec<String>| {
        let label = out.fresh_label(base);
        created.push(label.clone());
        out.add_vertex(label).expect("fresh label")
    };
    match m {
        MoveInstance::SourceRemoval { at } => {
            out.remove_vertex(g.index_of(at).expect("validated"));
        }
        MoveInstance::SourceAddition { out: edges } => {
            let s = add(&mut out, "u", &mut created);
            for (label, &k) in edges {
                out.set(s, g.index_of(label).expect("validated"), Mult::Fin(k));
            }
        }
        MoveInstance::OutSplit { at, blocks } => {
            let v = g.index_of(at).expect("validated");
            let mut idx = vec![v];
            for _ in 1..blocks.len() {
                idx.push(add(&mut out, at, &mut created));
            }
            for (i, b) in blocks.iter().enumerate() {
                for x in (0..n).filter(|&x| x != v) {
                    out.set(idx[i], x, block_mult(b, g, x));
                }
                for &j in &idx {
                    out.set(idx[i], j, block_mult(b, g, v));
                }
            }
            for u in (0..n).filter(|&u| u != v) {
                for &j in &idx {
                    out.set(u, j, g.get(u, v));
                }
            }
        }
        MoveInstance::InSplit { at, blocks } => {
            let v = g.index_of(at).expect("validated");
            let mut idx = vec![v];
            for _ in 1..blocks.len() {
                idx.push(add(&mut out, at, &mut created));
            }
            for (i, b) in blocks.iter().enumerate() {
                for u in (0..n).filter(|&u| u != v) {
                    out.set(u, idx[i], block_mult(b, g, u));
                }
                for &j in &idx {
                    out.set(j, idx[i], block_mult(b, g, v));
                }
            }
            for x in (0..n).filter(|&x| x != v) {
                for &j in &idx {
                    out.set(j, x, g.get(v, x));
                }
            }
        }
        MoveInstance::OutAmalgamation { group } => {
            let idx: Vec<usize> = group.iter().map(|l| g.index_of(l).expect("validated")).collect();
            let v = idx[0];
            for x in (0..n).filter(|x| !idx.contains(x)) {
                out.set(v, x, idx.iter().map(|&gi| g.get(gi, x)).sum());
            }
            out.set(v, v, idx.iter().map(|&gi| g.get(gi, v)).sum());
            remove_all(&mut out, &idx[1..]);
        }
        MoveInstance::InAmalgamation { group } => {
            let idx: Vec<usize> = group.iter().map(|l| g.index_of(l).expect("validated")).collect();
            let v = idx[0];
            for u in (0..n).filter(|u| !idx.contains(u)) {
                out.set(u, v, idx.iter().map(|&gi| g.get(u, gi)).sum());
            }
            out.set(v, v, idx.iter().map(|&gi| g.get(v, gi)).sum());
            remove_all(&mut out, &idx[1..]);
        }
        MoveInstance::Reduction { at } => {
            let v = g.index_of(at).expect("validated");
            let w = is_single_target(g, v).expect("validated");
            for u in (0..n).filter(|&u| u != v) {
                out.set(u, w, g.get(u, w) + g.get(u, v));
            }
            out.remove_vertex(v);
        }
        MoveInstance::Delay { at, split } => {
            let w = g.index_of(at).expect("validated");
            let x = add(&mut out, at, &mut created);
            for (label, &(keep, redirect)) in split {
                let u = g.index_of(label).expect("validated");
                out.set(u, w, keep);
                out.set(u, x, redirect);
            }
            out.set(x, w, Mult::ONE);
        }
        MoveInstance::CuntzSplice { at } => {
            let v = g.index_of(at).expect("validated");
            let v1 = add(&mut out, at, &mut created);
            let v2 = add(&mut out, at, &mut created);
            for (a, b) in [(v, v1), (v1, v), (v1, v2), (v2, v1), (v1, v1), (v2, v2)] {
                out.set(a, b, Mult::ONE);
            }
        }
    }
    Ok(Applied { graph: out, created })
}

fn remove_all(g: &mut Graph, idx: &[usize]) {
    let mut idx = idx.to_vec();
    idx.sort_unstable_by(|a, b| b.cmp(a));
    for i in idx {
        g.remove_vertex(i);
    }
}

/// Applies `m` and returns only the resulting graph.
pub fn apply_move(g: &Graph, m: &MoveInstance) -> Result<Graph, MoveError> {
    apply(g, m).map(|a| a.graph)
}

/// The instance undoing `m`, valid on `applied.graph`. The result of the
/// round trip is isomorphic to `before` (labels of re-created vertices may
/// differ). The Cuntz splice has no inverse.
pub fn inverse_of(before: &Graph, m: &MoveInstance, applied: &Applied) -> Option<MoveInstance> {
    let idx = |l: &str| before.index_of(l).expect("move was valid on `before`");
    Some(match m {
        MoveInstance::SourceRemoval { at } => {
            let v = idx(at);
            let out = (0..before.len())
                .filter_map(|w| before.get(v, w).finite().filter(|&k| k > 0).map(|k| (before.label(w).to_string(), k)))
                .collect();
            MoveInstance::SourceAddition { out }
        }
        MoveInstance::SourceAddition { .. } => MoveInstance::SourceRemoval { at: applied.created[0].clone() },
        MoveInstance::OutSplit { at, .. } => MoveInstance::OutAmalgamation {
            group: std::iter::once(at.clone()).chain(applied.created.iter().cloned()).collect(),
        },
        MoveInstance::InSplit { at, .. } => MoveInstance::InAmalgamation {
            group: std::iter::once(at.clone()).chain(applied.created.iter().cloned()).collect(),
        },
        MoveInstance::OutAmalgamation { group } => {
            let gi: Vec<usize> = group.iter().map(|l| idx(l)).collect();
            let blocks = gi
                .iter()
                .map(|&i| {
                    let mut b: Block = (0..before.len())
                        .filter(|x| !gi.contains(x))
                        .map(|x| (before.label(x).to_string(), before.get(i, x)))
                        .collect();
                    b.insert(group[0].clone(), before.get(i, gi[0]));
                    b.retain(|_, m| !m.is_zero());
                    b
                })
                .collect();
            MoveInstance::OutSplit { at: group[0].clone(), blocks }
        }
        MoveInstance::InAmalgamation { group } => {
            let gi: Vec<usize> = group.iter().map(|l| idx(l)).collect();
            let blocks = gi
                .iter()
                .map(|&i| {
                    let mut b: Block = (0..before.len())
                        .filter(|u| !gi.contains(u))
                        .map(|u| (before.label(u).to_string(), before.get(u, i)))
                        .collect();
                    b.insert(group[0].clone(), before.get(gi[0], i));
                    b.retain(|_, m| !m.is_zero());
                    b
                })
                .collect();
            MoveInstance::InSplit { at: group[0].clone(), blocks }
        }
        MoveInstance::Reduction { at } => {
            let v = idx(at);
            let w = is_single_target(before, v)?;
            let split = (0..before.len())
                .filter(|&u| u != v && !before.get(u, v).is_zero())
                .map(|u| (before.label(u).to_string(), (before.get(u, w), before.get(u, v))))
                .collect();
            MoveInstance::Delay { at: before.label(w).to_string(), split }
        }
        MoveInstance::Delay { .. } => MoveInstance::Reduction { at: applied.created[0].clone() },
        MoveInstance::CuntzSplice { .. } => return None,
    })
}

/// All compositions of `total` into `k` parts. Infinite totals use parts
/// from `0..=max_new` and `inf`, with at least one infinite part.
fn compositions(total: Mult, k: usize, max_new: u64) -> Vec<Vec<Mult>> {
    fn rec(rem: u64, k: usize, cur: &mut Vec<Mult>, out: &mut Vec<Vec<Mult>>) {
        if k == 1 {
            cur.push(Mult::Fin(rem));
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=rem {
            cur.push(Mult::Fin(a));
            rec(rem - a, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    match total {
        Mult::Fin(m) => rec(m, k, &mut Vec::with_capacity(k), &mut out),
        Mult::Inf => {
            let choices: Vec<Mult> = (0..=max_new).map(Mult::Fin).chain([Mult::Inf]).collect();
            let mut cur = vec![0usize; k];
            loop {
                let parts: Vec<Mult> = cur.iter().map(|&c| choices[c]).collect();
                if parts.iter().any(|m| m.is_inf()) {
                    out.push(parts);
                }
                let Some(pos) = (0..k).find(|&i| cur[i] + 1 < choices.len()) else { break };
                cur[pos] += 1;
                cur[..pos].iter_mut().for_each(|c| *c = 0);
            }
        }
    }
    out
}

/// Every way to partition the classes `(label, multiplicity)` into `k`
/// nonempty blocks, normalized so block order is irrelevant.
fn partitions(classes: &[(String, Mult)], k: usize, max_new: u64) -> BTreeSet<Vec<Block>> {
    let per_class: Vec<Vec<Vec<Mult>>> = classes.iter().map(|(_, m)| compositions(*m, k, max_new)).collect();
    let mut found = BTreeSet::new();
    let mut choice = vec![0usize; classes.len()];
    if per_class.iter().any(Vec::is_empty) {
        return found;
    }
    loop {
        let mut blocks = vec![Block::new(); k];
        for (c, (label, _)) in classes.iter().enumerate() {
            for (b, &m) in per_class[c][choice[c]].iter().enumerate() {
                if !m.is_zero() {
                    blocks[b].insert(label.clone(), m);
                }
            }
        }
        if blocks.iter().all(|b| !b.is_empty()) {
            blocks.sort();
            found.insert(blocks);
        }
        let Some(pos) = (0..classes.len()).find(|&i| choice[i] + 1 < per_class[i].len()) else { break };
        choice[pos] += 1;
        choice[..pos].iter_mut().for_each(|c| *c = 0);
    }
    found
}

fn subsets_of_size_at_least_two(items: &[usize]) -> Vec<Vec<usize>> {
    let n = items.len();
    (0u32..(1 << n))
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| items[i]).collect())
        .collect()
}

/// Every valid move on `g` within `bounds`, sorted.
pub fn enumerate_moves(g: &Graph, bounds: &MoveBounds) -> Result<Vec<MoveInstance>, MoveError> {
    let n = g.len();
    if n > bounds.max_vertices {
        return Err(VertexBoundExceeded { actual: n, bound: bounds.max_vertices }.into());
    }
    let label = |i: usize| g.label(i).to_string();
    let room = |extra: usize| n + extra <= bounds.max_vertices;
    let mut found = BTreeSet::new();

    for v in 0..n {
        if g.is_source(v) && g.is_regular(v) && n >= 2 {
            found.insert(MoveInstance::SourceRemoval { at: label(v) });
        }
        if let Some(w) = is_single_target(g, v) {
            if w != v {
                found.insert(MoveInstance::Reduction { at: label(v) });
            }
        }
        if room(2) && return_path_count(g, v, 2) >= 2 {
            found.insert(MoveInstance::CuntzSplice { at: label(v) });
        }
    }

    if room(1) {
        let choices = bounds.max_new_mult + 1;
        let total = (choices as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        for code in 1..total.min(1 << 20) {
            let mut c = code;
            let mut out = BTreeMap::new();
            for w in 0..n {
                let k = (c % choices as u128) as u64;
                c /= choices as u128;
                if k > 0 {
                    out.insert(label(w), k);
                }
            }
            found.insert(MoveInstance::SourceAddition { out });
        }
    }

    for v in 0..n {
        let out_classes: Vec<(String, Mult)> =
            (0..n).filter(|&x| !g.get(v, x).is_zero()).map(|x| (label(x), g.get(v, x))).collect();
        let in_classes: Vec<(String, Mult)> =
            (0..n).filter(|&u| !g.get(u, v).is_zero()).map(|u| (label(u), g.get(u, v))).collect();
        for k in 2..=bounds.max_partition_blocks {
            if !room(k - 1) {
                break;
            }
            if !out_classes.is_empty() {
                for blocks in partitions(&out_classes, k, bounds.max_new_mult) {
                    if blocks.iter().filter(|b| b.values().any(|m| m.is_inf())).count() <= 1 {
                        found.insert(MoveInstance::OutSplit { at: label(v), blocks });
                    }
                }
            }
            if g.is_regular(v) && !in_classes.is_empty() {
                for blocks in partitions(&in_classes, k, bounds.max_new_mult) {
                    found.insert(MoveInstance::InSplit { at: label(v), blocks });
                }
            }
        }
    }

    // Amalgamations: vertices with identical columns (rows), all subsets.
    let mut by_column: BTreeMap<Vec<Mult>, Vec<usize>> = BTreeMap::new();
    let mut by_row: BTreeMap<Vec<Mult>, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_column.entry((0..n).map(|u| g.get(u, v)).collect()).or_default().push(v);
        by_row.entry(g.row(v).to_vec()).or_default().push(v);
    }
    for members in by_column.values().filter(|m| m.len() >= 2) {
        for group in subsets_of_size_at_least_two(members) {
            let m = MoveInstance::OutAmalgamation { group: group.iter().map(|&i| label(i)).collect() };
            if validate_move(g, &m).is_ok() {
                found.insert(m);
            }
        }
    }
    for members in by_row.values().filter(|m| m.len() >= 2) {
        for group in subsets_of_size_at_least_two(members) {
            let m = MoveInstance::InAmalgamation { group: group.iter().map(|&i| label(i)).collect() };
            if validate_move(g, &m).is_ok() {
                found.insert(m);
            }
        }
    }

    if room(1) {
        for w in 0..n {
            let sources: Vec<usize> = (0..n).filter(|&u| !g.get(u, w).is_zero()).collect();
            let options: Vec<Vec<(Mult, Mult)>> =
                sources.iter().map(|&u| delay_options(g.get(u, w), bounds.max_new_mult)).collect();
            let mut choice = vec![0usize; sources.len()];
            loop {
                let split: BTreeMap<String, (Mult, Mult)> = sources
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| (label(u), options[i][choice[i]]))
                    .filter(|(_, (_, r))| !r.is_zero())
                    .collect();
                found.insert(MoveInstance::Delay { at: label(w), split });
                let Some(pos) = (0..sources.len()).find(|&i| choice[i] + 1 < options[i].len()) else { break };
                choice[pos] += 1;
                choice[..pos].iter_mut().for_each(|c| *c = 0);
            }
        }
    }

    Ok(found.into_iter().collect())
}

/// `(keep, redirect)` pairs for one parallel class.
fn delay_options(total: Mult, max_new: u64) -> Vec<(Mult, Mult)> {
    compositions(total, 2, max_new).into_iter().map(|p| (p[0], p[1])).collect()
}

fn parse_mult(s: &str) -> Result<Mult, MoveError> {
    s.trim().parse().map_err(|_| MoveError::Syntax(format!("bad multiplicity `{s}`")))
}

/// Parses a partition such as `e:v->v=1|1;e:v->w=2|0` into blocks. For an
/// outsplit every class must start at `at` and blocks are keyed by range;
/// for an insplit every class must end at `at` and blocks are keyed by source.
pub fn parse_partition(kind: MoveKind, at: &str, spec: &str) -> Result<Vec<Block>, MoveError> {
    let mut blocks: Vec<Block> = Vec::new();
    for class in spec.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let class = class.strip_prefix("e:").unwrap_or(class);
        let (edge, parts) =
            class.split_once('=').ok_or_else(|| MoveError::Syntax(format!("expected `src->dst=a|b` in `{class}`")))?;
        let (src, dst) =
            edge.split_once("->").ok_or_else(|| MoveError::Syntax(format!("expected `src->dst` in `{edge}`")))?;
        let (src, dst) = (src.trim(), dst.trim());
        let key = match kind {
            MoveKind::O if src == at => dst,
            MoveKind::I if dst == at => src,
            MoveKind::O | MoveKind::I => {
                return Err(MoveError::Syntax(format!("class {src}->{dst} is not incident to `{at}` as required")))
            }
            _ => return Err(MoveError::Syntax(format!("{kind} moves take no partition"))),
        };
        let parts = parts.split('|').map(parse_mult).collect::<Result<Vec<_>, _>>()?;
        if blocks.is_empty() {
            blocks = vec![Block::new(); parts.len()];
        } else if blocks.len() != parts.len() {
            return Err(MoveError::Syntax("every class must list the same number of blocks".into()));
        }
        for (b, m) in blocks.iter_mut().zip(parts) {
            if !m.is_zero() {
                b.insert(key.to_string(), m);
            }
        }
    }
    Ok(blocks)
}

/// Parses `v=1,w=2` (the edges of an added source).
pub fn parse_source_out(spec: &str) -> Result<BTreeMap<String, u64>, MoveError> {
    spec.split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (v, k) = item.split_once('=').ok_or_else(|| MoveError::Syntax(format!("expected `v=k` in `{item}`")))?;
            let k = k.trim().parse().map_err(|_| MoveError::Syntax(format!("bad multiplicity `{k}`")))?;
            Ok((v.trim().to_string(), k))
        })
        .collect()
}

/// Parses `u=keep|redirect;...` for a delay.
pub fn parse_delay_split(spec: &str) -> Result<BTreeMap<String, (Mult, Mult)>, MoveError> {
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (u, rest) =
                item.split_once('=').ok_or_else(|| MoveError::Syntax(format!("expected `u=keep|redirect` in `{item}`")))?;
            let (keep, redirect) =
                rest.split_once('|').ok_or_else(|| MoveError::Syntax(format!("expected `keep|redirect` in `{rest}`")))?;
            Ok((u.trim().to_string(), (parse_mult(keep)?, parse_mult(redirect)?)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Graph {
        Graph::parse(s).unwrap()
    }

    fn loops(n: u64) -> Graph {
        Graph::from_matrix(&[vec![n]])
    }

    fn block(items: &[(&str, Mult)]) -> Block {
        items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn cuntz_splice_on_the_two_vertex_example() {
        let g = Graph::from_matrix(&[vec![1, 1], vec![1, 0]]);
        let m = MoveInstance::CuntzSplice { at: "v0".into() };
        validate_move(&g, &m).unwrap();
        let h = apply_move(&g, &m).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h.edge_count(), Mult::Fin(9));
        let other = MoveInstance::CuntzSplice { at: "v1".into() };
        assert!(validate_move(&g, &other).is_ok());
        assert!(validate_move(&Graph::from_matrix(&[vec![1]]), &MoveInstance::CuntzSplice { at: "v0".into() }).is_err());
    }

    #[test]
    fn source_removal_requires_a_source() {
        let g = parse("vertices: u v\nedge u v 1\nedge v v 2");
        let err = validate_move(&g, &MoveInstance::SourceRemoval { at: "v".into() }).unwrap_err();
        assert!(err.to_string().contains("not a source"));
        let h = apply_move(&g, &MoveInstance::SourceRemoval { at: "u".into() }).unwrap();
        assert!(h.same_up_to_order(&parse("vertices: v\nedge v v 2")));
    }

    #[test]
    fn outsplit_of_two_loops() {
        let g = parse("vertices: v\nedge v v 2");
        let m = MoveInstance::OutSplit {
            at: "v".into(),
            blocks: vec![block(&[("v", Mult::ONE)]), block(&[("v", Mult::ONE)])],
        };
        let a = apply(&g, &m).unwrap();
        assert_eq!(a.created, vec!["v.1".to_string()]);
        assert_eq!(a.graph, parse("vertices: v v.1\nedge v v 1\nedge v v.1 1\nedge v.1 v 1\nedge v.1 v.1 1"));
    }

    #[test]
    fn partition_must_cover() {
        let g = parse("vertices: v w\nedge v v 1\nedge v w 1\nedge w v 1");
        let m = MoveInstance::OutSplit { at: "v".into(), blocks: vec![block(&[("v", Mult::ONE)]), Block::new()] };
        assert!(validate_move(&g, &m).is_err());
        let m = MoveInstance::OutSplit {
            at: "v".into(),
            blocks: vec![block(&[("v", Mult::ONE)]), block(&[("v", Mult::ONE)])],
        };
        let err = validate_move(&g, &m).unwrap_err().to_string();
        assert!(err.contains("partition must cover s^-1(v)"), "{err}");
    }

    #[test]
    fn reduction_and_delay() {
        let g = parse("vertices: u v w\nedge u v 2\nedge v w 1\nedge w u 1\nedge w w 1");
        let m = MoveInstance::Reduction { at: "v".into() };
        let a = apply(&g, &m).unwrap();
        assert_eq!(a.graph, parse("vertices: u w\nedge u w 2\nedge w u 1\nedge w w 1"));
        let inv = inverse_of(&g, &m, &a).unwrap();
        let back = apply_move(&a.graph, &inv).unwrap();
        assert!(crate::canon::graphs_isomorphic(&g, &back).unwrap());
        assert!(validate_move(&g, &MoveInstance::Reduction { at: "w".into() }).is_err());
    }

    #[test]
    fn amalgamation_inverts_splitting() {
        let g = Graph::from_matrix(&[vec![1, 2], vec![1, 0]]);
        let bounds = MoveBounds::default();
        for m in enumerate_moves(&g, &bounds).unwrap() {
            if m.kind() == MoveKind::CS {
                continue;
            }
            let a = apply(&g, &m).unwrap();
            let inv = inverse_of(&g, &m, &a).unwrap();
            let back = apply(&a.graph, &inv).unwrap_or_else(|e| panic!("{m}: inverse {inv} failed: {e}"));
            assert!(crate::canon::graphs_isomorphic(&g, &back.graph).unwrap(), "{m}");
        }
    }

    #[test]
    fn enumeration_examples() {
        let bounds = MoveBounds { max_partition_blocks: 2, ..MoveBounds::default() };
        let moves = enumerate_moves(&loops(2), &bounds).unwrap();
        let expected = MoveInstance::OutSplit {
            at: "v0".into(),
            blocks: vec![block(&[("v0", Mult::ONE)]), block(&[("v0", Mult::ONE)])],
        };
        assert!(moves.contains(&expected));

        let g = parse("vertices: a b c\nedge a c 1\nedge b c 1\nedge c c 2");
        let moves = enumerate_moves(&g, &bounds).unwrap();
        let s: Vec<_> = moves.iter().filter(|m| m.kind() == MoveKind::S).collect();
        assert_eq!(s.len(), 2);

        let cs: Vec<_> = moves.iter().filter(|m| m.kind() == MoveKind::CS).collect();
        assert_eq!(cs, vec![&MoveInstance::CuntzSplice { at: "c".into() }]);
        for m in &moves {
            validate_move(&g, m).unwrap();
        }
    }

    #[test]
    fn enumeration_rejects_large_graphs() {
        let g = Graph::from_matrix(&vec![vec![1; 9]; 9]);
        assert!(matches!(enumerate_moves(&g, &MoveBounds::default()), Err(MoveError::Bound(_))));
    }

    #[test]
    fn infinite_compositions() {
        let parts = compositions(Mult::Inf, 2, 1);
        assert!(parts.contains(&vec![Mult::Inf, Mult::ZERO]));
        assert!(parts.contains(&vec![Mult::ONE, Mult::Inf]));
        assert!(parts.contains(&vec![Mult::Inf, Mult::Inf]));
        assert!(!parts.contains(&vec![Mult::ONE, Mult::ONE]));
        assert_eq!(compositions(Mult::Fin(3), 2, 1).len(), 4);
    }

    #[test]
    fn outsplit_with_infinite_blocks() {
        let g = parse("vertices: v w\nedge v w inf\nedge w v 2");
        let two_inf = MoveInstance::OutSplit {
            at: "v".into(),
            blocks: vec![block(&[("w", Mult::Inf)]), block(&[("w", Mult::Inf)])],
        };
        assert!(validate_move(&g, &two_inf).is_err());
        let ok = MoveInstance::OutSplit {
            at: "v".into(),
            blocks: vec![block(&[("w", Mult::Inf)]), block(&[("w", Mult::ONE)])],
        };
        let h = apply_move(&g, &ok).unwrap();
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn partition_syntax() {
        let blocks = parse_partition(MoveKind::O, "v", "e:v->v=1|1;e:v->w=2|0").unwrap();
        assert_eq!(blocks, vec![
            block(&[("v", Mult::ONE), ("w", Mult::Fin(2))]),
            block(&[("v", Mult::ONE)])
        ]);
        assert!(parse_partition(MoveKind::O, "v", "w->v=1|1").is_err());
        assert!(parse_partition(MoveKind::I, "v", "w->v=1|inf").is_ok());
        assert!(parse_partition(MoveKind::I, "v", "w->v=1|1;v->v=1").is_err());
        assert_eq!(parse_source_out("v=1, w=2").unwrap().len(), 2);
        assert_eq!(parse_delay_split("u=1|inf").unwrap()["u"], (Mult::ONE, Mult::Inf));
        assert_eq!("O-1".parse::<MoveKind>().unwrap(), MoveKind::OInv);
        assert_eq!("r^-1".parse::<MoveKind>().unwrap(), MoveKind::RInv);
    }

    #[test]
    fn serde_round_trip() {
        let m = MoveInstance::Delay {
            at: "w".into(),
            split: [("u".to_string(), (Mult::Inf, Mult::ONE))].into_iter().collect(),
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"kind\":\"R-1\""));
        assert_eq!(serde_json::from_str::<MoveInstance>(&text).unwrap(), m);
    }
}
