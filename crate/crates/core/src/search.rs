//! Bounded bidirectional breadth-first search for move sequences.
//!
//! States are graphs up to isomorphism, keyed by [`CanonicalForm`]. The
//! search grows one tree from each endpoint and stops when they meet. The
//! backward half is turned around with the inverse of each move, so a
//! returned [`MovePath`] only ever applies moves forwards from `start`.
//!
//! Not finding a path says nothing about equivalence: the move relation is
//! infinite and the bounds may simply be too small.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{canonical_form, find_isomorphism, CanonicalForm};
use crate::graph::Graph;
use crate::ktheory::{invariants_cstar, InvariantBundle};
use crate::moves::{apply, enumerate_moves, inverse_of, validate_move, MoveBounds, MoveError, MoveInstance, MoveKind};

/// A move sequence certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovePath {
    pub start: Graph,
    pub steps: Vec<MoveInstance>,
    pub end: Graph,
}

impl fmt::Display for MovePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "path of length {}", self.steps.len())?;
        for (i, s) in self.steps.iter().enumerate() {
            write!(f, "\n  {}. {s}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_depth: usize,
    pub max_vertices: usize,
    pub max_total_multiplicity: u64,
    pub max_partition_blocks: usize,
    pub max_new_mult: u64,
    pub allow_cs: bool,
    /// Give up after this many distinct states.
    pub max_states: usize,
    /// Check on every generated state that the move preserved K-theory,
    /// and spot-check deduplication with an explicit isomorphism.
    pub self_test: bool,
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_depth: 6,
            max_vertices: 8,
            max_total_multiplicity: 40,
            max_partition_blocks: 3,
            max_new_mult: 1,
            allow_cs: false,
            max_states: 200_000,
            self_test: true,
            threads: 1,
        }
    }
}

impl SearchOptions {
    fn move_bounds(&self) -> MoveBounds {
        MoveBounds {
            max_partition_blocks: self.max_partition_blocks,
            max_new_mult: self.max_new_mult,
            max_vertices: self.max_vertices,
        }
    }

    fn admits(&self, g: &Graph) -> bool {
        g.len() <= self.max_vertices && g.total_multiplicity() <= self.max_total_multiplicity
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(MovePath),
    Inconclusive { explored: usize, reason: String },
}

impl SearchOutcome {
    pub fn path(&self) -> Option<&MovePath> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            SearchOutcome::Inconclusive { .. } => None,
        }
    }
}

impl fmt::Display for SearchOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchOutcome::Found(p) => write!(f, "{p}"),
            SearchOutcome::Inconclusive { explored, reason } => {
                write!(f, "inconclusive at bounds ({reason}; {explored} states explored)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("{which} graph is outside the search bounds ({detail})")]
    Bounds { which: &'static str, detail: String },
    #[error("options: {0}")]
    Options(String),
    #[error("move engine self-test failed: {0}")]
    SelfTest(String),
    #[error(transparent)]
    Move(#[from] MoveError),
}

#[derive(Clone)]
struct State {
    graph: Graph,
    depth: usize,
    parent: Option<(CanonicalForm, MoveInstance)>,
}

struct Tree {
    states: HashMap<CanonicalForm, State>,
    frontier: Vec<CanonicalForm>,
    depth: usize,
}

impl Tree {
    fn new() -> Self {
        Tree { states: HashMap::new(), frontier: Vec::new(), depth: 0 }
    }

    fn insert_root(&mut self, key: CanonicalForm, graph: Graph, depth: usize, parent: Option<(CanonicalForm, MoveInstance)>) {
        if !self.states.contains_key(&key) {
            self.states.insert(key.clone(), State { graph, depth, parent });
            self.frontier.push(key);
        }
    }

    /// Moves from the root down to `key`, with the graph each applies to.
    fn chain(&self, key: &CanonicalForm) -> Vec<(Graph, MoveInstance)> {
        let mut out = Vec::new();
        let mut cur = key.clone();
        while let Some((parent, m)) = self.states[&cur].parent.clone() {
            out.push((self.states[&parent].graph.clone(), m));
            cur = parent;
        }
        out.reverse();
        out
    }
}

fn same_invariants(a: &InvariantBundle, b: &InvariantBundle, cs: bool) -> bool {
    let sign_ok = match (a.det_sign, b.det_sign) {
        (Some(x), Some(y)) => if cs { x.flipped() == y } else { x == y },
        (None, None) => true,
        _ => false,
    };
    a.k0 == b.k0
        && sign_ok
        && (a.det_sign.is_some() || (a.k1_topological == b.k1_topological && a.singular_count == b.singular_count))
}

type Child = (CanonicalForm, Graph, MoveInstance);

fn expand_one(g: &Graph, opts: &SearchOptions) -> Result<Vec<Child>, SearchError> {
    let parent_inv = opts.self_test.then(|| invariants_cstar(g));
    let mut out = Vec::new();
    for m in enumerate_moves(g, &opts.move_bounds())? {
        if m.kind() == MoveKind::CS {
            continue;
        }
        let child = apply(g, &m)?.graph;
        if !opts.admits(&child) {
            continue;
        }
        if let Some(pi) = &parent_inv {
            let ci = invariants_cstar(&child);
            if !same_invariants(pi, &ci, false) {
                return Err(SearchError::SelfTest(format!("{m} changed the invariants of\n{g}\n({pi} became {ci})")));
            }
        }
        out.push((canonical_form(&child), child, m));
    }
    Ok(out)
}

fn expand_all(graphs: &[Graph], opts: &SearchOptions) -> Result<Vec<Vec<Child>>, SearchError> {
    let threads = opts.threads.max(1);
    if threads == 1 || graphs.len() < 2 {
        return graphs.iter().map(|g| expand_one(g, opts)).collect();
    }
    let chunk = graphs.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = graphs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|g| expand_one(g, opts)).collect::<Result<Vec<_>, _>>()))
            .collect();
        let mut out = Vec::with_capacity(graphs.len());
        for h in handles {
            out.extend(h.join().expect("search worker panicked")?);
        }
        Ok(out)
    })
}

fn check_inputs(g: &Graph, h: &Graph, opts: &SearchOptions) -> Result<(), SearchError> {
    if opts.max_depth == 0 || opts.max_vertices == 0 || opts.max_partition_blocks < 2 || opts.max_total_multiplicity == 0 {
        return Err(SearchError::Options(
            "bounds must be positive and max_partition_blocks at least 2".into(),
        ));
    }
    for (which, x) in [("first", g), ("second", h)] {
        if x.len() > opts.max_vertices {
            return Err(SearchError::Bounds { which, detail: format!("{} vertices > {}", x.len(), opts.max_vertices) });
        }
        if x.total_multiplicity() > opts.max_total_multiplicity {
            return Err(SearchError::Bounds {
                which,
                detail: format!("total multiplicity {} > {}", x.total_multiplicity(), opts.max_total_multiplicity),
            });
        }
    }
    Ok(())
}

/// Searches for moves turning `g` into a graph isomorphic to `h`.
///
/// With `allow_cs`, when both graphs are finite and their determinant
/// signs differ, exactly one Cuntz splice is applied to `g` first, at each
/// admissible vertex in turn.
pub fn find_move_path(g: &Graph, h: &Graph, opts: &SearchOptions) -> Result<SearchOutcome, SearchError> {
    check_inputs(g, h, opts)?;
    let target = canonical_form(h);
    let mut fwd = Tree::new();
    let mut bwd = Tree::new();

    let (ig, ih) = (invariants_cstar(g), invariants_cstar(h));
    let splice = opts.allow_cs
        && matches!((ig.det_sign, ih.det_sign), (Some(a), Some(b)) if a != b);
    let root = canonical_form(g);
    fwd.states.insert(root.clone(), State { graph: g.clone(), depth: 0, parent: None });
    if splice {
        for m in enumerate_moves(g, &opts.move_bounds())?.into_iter().filter(|m| m.kind() == MoveKind::CS) {
            let child = apply(g, &m)?.graph;
            if !opts.admits(&child) {
                continue;
            }
            if opts.self_test {
                let ci = invariants_cstar(&child);
                if !same_invariants(&ig, &ci, true) {
                    return Err(SearchError::SelfTest(format!("{m} did not flip the sign while keeping K0")));
                }
            }
            fwd.insert_root(canonical_form(&child), child, 1, Some((root.clone(), m)));
        }
        fwd.depth = 1;
        if fwd.frontier.is_empty() {
            return Ok(SearchOutcome::Inconclusive {
                explored: 1,
                reason: "no Cuntz splice site within the vertex bound".into(),
            });
        }
    } else {
        fwd.frontier.push(root);
    }
    bwd.insert_root(target.clone(), h.clone(), 0, None);

    let mut merges = 0usize;
    loop {
        if let Some(meet) = meeting(&fwd, &bwd) {
            return Ok(SearchOutcome::Found(build_path(g, h, &fwd, &bwd, &meet)?));
        }
        if fwd.depth + bwd.depth >= opts.max_depth {
            return Ok(inconclusive(&fwd, &bwd, format!("depth bound {} reached", opts.max_depth)));
        }
        if fwd.frontier.is_empty() || bwd.frontier.is_empty() {
            return Ok(inconclusive(&fwd, &bwd, "state space within bounds exhausted".into()));
        }
        if fwd.states.len() + bwd.states.len() > opts.max_states {
            return Ok(inconclusive(&fwd, &bwd, format!("state bound {} reached", opts.max_states)));
        }
        let tree = if fwd.frontier.len() <= bwd.frontier.len() { &mut fwd } else { &mut bwd };
        step(tree, opts, &mut merges)?;
    }
}

fn inconclusive(fwd: &Tree, bwd: &Tree, reason: String) -> SearchOutcome {
    SearchOutcome::Inconclusive { explored: fwd.states.len() + bwd.states.len(), reason }
}

/// Smallest key present in both trees, if any.
fn meeting(fwd: &Tree, bwd: &Tree) -> Option<CanonicalForm> {
    let (small, large) = if fwd.states.len() <= bwd.states.len() { (fwd, bwd) } else { (bwd, fwd) };
    let mut best: Option<(usize, &CanonicalForm)> = None;
    for (key, st) in &small.states {
        if let Some(other) = large.states.get(key) {
            let len = st.depth + other.depth;
            if best.map_or(true, |(l, k)| (len, key) < (l, k)) {
                best = Some((len, key));
            }
        }
    }
    best.map(|(_, k)| k.clone())
}

fn step(tree: &mut Tree, opts: &SearchOptions, merges: &mut usize) -> Result<(), SearchError> {
    let mut frontier = std::mem::take(&mut tree.frontier);
    frontier.sort();
    let graphs: Vec<Graph> = frontier.iter().map(|k| tree.states[k].graph.clone()).collect();
    let children = expand_all(&graphs, opts)?;
    let depth = tree.depth + 1;
    for (parent, kids) in frontier.iter().zip(children) {
        for (key, graph, m) in kids {
            match tree.states.get(&key) {
                Some(existing) => {
                    *merges += 1;
                    if opts.self_test && *merges % 16 == 1 && find_isomorphism(&existing.graph, &graph).is_none() {
                        return Err(SearchError::SelfTest(format!(
                            "canonical form merged non-isomorphic graphs\n{}\nand\n{graph}",
                            existing.graph
                        )));
                    }
                }
                None => {
                    tree.states.insert(key.clone(), State { graph, depth, parent: Some((parent.clone(), m)) });
                    tree.frontier.push(key);
                }
            }
        }
    }
    tree.depth = depth;
    Ok(())
}

/// Renames the labels of `m`, which is valid on `stored`, onto `actual`.
fn translate(m: &MoveInstance, stored: &Graph, actual: &Graph) -> Result<MoveInstance, SearchError> {
    let map = find_isomorphism(stored, actual)
        .ok_or_else(|| SearchError::SelfTest("replayed state is not isomorphic to the stored one".into()))?;
    let rename: BTreeMap<&str, &str> =
        (0..stored.len()).map(|i| (stored.label(i), actual.label(map[i]))).collect();
    Ok(m.relabel(|l| rename.get(l).map_or_else(|| l.to_string(), |s| s.to_string())))
}

fn build_path(g: &Graph, h: &Graph, fwd: &Tree, bwd: &Tree, meet: &CanonicalForm) -> Result<MovePath, SearchError> {
    let mut steps = Vec::new();
    let mut cur = g.clone();
    for (_, m) in fwd.chain(meet) {
        cur = apply(&cur, &m)?.graph;
        steps.push(m);
    }
    // Walk the backward tree from the meeting point towards `h`, undoing
    // each move that was used to reach the state.
    let mut key = meet.clone();
    while let Some((parent, m)) = bwd.states[&key].parent.clone() {
        let before = &bwd.states[&parent].graph;
        let applied = apply(before, &m)?;
        let inv = inverse_of(before, &m, &applied)
            .ok_or_else(|| SearchError::SelfTest(format!("{m} has no inverse")))?;
        let inv = translate(&inv, &applied.graph, &cur)?;
        cur = apply(&cur, &inv)?.graph;
        steps.push(inv);
        key = parent;
    }
    Ok(MovePath { start: g.clone(), steps, end: h.clone() })
}

/// Replays a path step by step; the error names the failing step.
pub fn replay(p: &MovePath) -> Result<Graph, (usize, MoveError)> {
    let mut cur = p.start.clone();
    for (i, m) in p.steps.iter().enumerate() {
        validate_move(&cur, m).map_err(|e| (i, e))?;
        cur = apply(&cur, m).map_err(|e| (i, e))?.graph;
    }
    Ok(cur)
}

/// True iff every step is valid where applied and the final graph is
/// isomorphic to `p.end`.
pub fn replay_and_check(p: &MovePath) -> bool {
    replay(p).is_ok_and(|last| find_isomorphism(&last, &p.end).is_some())
}
