//! Graph isomorphism and canonical forms for small graphs.
//!
//! Both routines are brute force over vertex permutations. They prune with
//! vertex invariants (degree multisets and loop counts) but make no attempt
//! at anything cleverer; the search module never goes beyond a handful of
//! vertices.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Graph, Mult};

pub const DEFAULT_MAX_VERTICES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph has {actual} vertices, above the bound of {bound}")]
pub struct VertexBoundExceeded {
    pub actual: usize,
    pub bound: usize,
}

fn check_bound(g: &Graph, bound: usize) -> Result<(), VertexBoundExceeded> {
    if g.len() > bound {
        Err(VertexBoundExceeded { actual: g.len(), bound })
    } else {
        Ok(())
    }
}

/// Isomorphism-invariant summary of one vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct VertexSignature {
    looped: Mult,
    out: Vec<Mult>,
    inc: Vec<Mult>,
}

fn signatures(g: &Graph) -> Vec<VertexSignature> {
    let n = g.len();
    (0..n)
        .map(|v| {
            let mut out: Vec<Mult> = (0..n).filter(|&w| w != v).map(|w| g.get(v, w)).collect();
            let mut inc: Vec<Mult> = (0..n).filter(|&w| w != v).map(|w| g.get(w, v)).collect();
            out.sort();
            inc.sort();
            VertexSignature { looped: g.get(v, v), out, inc }
        })
        .collect()
}

/// Returns `map` with `map[i]` the vertex of `h` that vertex `i` of `g` is
/// sent to, when one exists.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    let n = g.len();
    if n != h.len() {
        return None;
    }
    let sg = signatures(g);
    let sh = signatures(h);
    let mut a = sg.clone();
    let mut b = sh.clone();
    a.sort();
    b.sort();
    if a != b {
        return None;
    }
    // Most constrained vertices first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| sh.iter().filter(|s| **s == sg[v]).count());

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(
        depth: usize,
        order: &[usize],
        g: &Graph,
        h: &Graph,
        sg: &[VertexSignature],
        sh: &[VertexSignature],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for w in 0..h.len() {
            if used[w] || sg[v] != sh[w] {
                continue;
            }
            let consistent = order[..depth]
                .iter()
                .all(|&u| g.get(v, u) == h.get(w, map[u]) && g.get(u, v) == h.get(map[u], w));
            if !consistent {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if extend(depth + 1, order, g, h, sg, sh, map, used) {
                return true;
            }
            used[w] = false;
            map[v] = usize::MAX;
        }
        false
    }

    extend(0, &order, g, h, &sg, &sh, &mut map, &mut used).then_some(map)
}

/// True iff some vertex bijection carries one multiplicity map onto the other.
pub fn graphs_isomorphic(g: &Graph, h: &Graph) -> Result<bool, VertexBoundExceeded> {
    graphs_isomorphic_within(g, h, DEFAULT_MAX_VERTICES)
}

pub fn graphs_isomorphic_within(g: &Graph, h: &Graph, bound: usize) -> Result<bool, VertexBoundExceeded> {
    check_bound(g, bound)?;
    check_bound(h, bound)?;
    Ok(find_isomorphism(g, h).is_some())
}

/// Label-free representative of an isomorphism class.
///
/// `code` lists the permuted vertex matrix layer by layer: for position
/// `p`, row `p` up to the diagonal, then column `p` above it. The minimum
/// code over all admissible orderings is kept.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub n: usize,
    pub code: Vec<Mult>,
}

impl CanonicalForm {
    pub fn to_graph(&self) -> Graph {
        let n = self.n;
        let mut g = Graph::new((0..n).map(|i| format!("v{i}"))).expect("labels are distinct");
        let mut it = self.code.iter().copied();
        for p in 0..n {
            for q in 0..=p {
                g.set(p, q, it.next().expect("code length"));
            }
            for q in 0..p {
                g.set(q, p, it.next().expect("code length"));
            }
        }
        g
    }
}

/// Iterated colour refinement; colours are ranks of isomorphism-invariant
/// signatures, so equal inputs up to relabelling give equal colourings.
fn refine_colours(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let base = signatures(g);
    let mut colour = rank(&base);
    loop {
        let sigs: Vec<(usize, Vec<(Mult, usize)>, Vec<(Mult, usize)>)> = (0..n)
            .map(|v| {
                let mut out: Vec<(Mult, usize)> =
                    (0..n).filter(|&w| w != v).map(|w| (g.get(v, w), colour[w])).collect();
                let mut inc: Vec<(Mult, usize)> =
                    (0..n).filter(|&w| w != v).map(|w| (g.get(w, v), colour[w])).collect();
                out.sort();
                inc.sort();
                (colour[v], out, inc)
            })
            .collect();
        let next = rank(&sigs);
        let classes = |c: &[usize]| c.iter().copied().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

fn rank<T: Ord + Clone>(items: &[T]) -> Vec<usize> {
    let mut distinct: Vec<T> = items.to_vec();
    distinct.sort();
    distinct.dedup();
    let index: BTreeMap<&T, usize> = distinct.iter().enumerate().map(|(i, t)| (t, i)).collect();
    items.iter().map(|t| index[t]).collect()
}

/// Canonical form together with the vertex order that realizes it.
pub fn canonical_labeling(g: &Graph) -> (CanonicalForm, Vec<usize>) {
    let n = g.len();
    let colour = refine_colours(g);
    // Positions are filled in colour order; position p may only hold a vertex of slot_colour[p].
    let mut slot_colour = colour.clone();
    slot_colour.sort();

    struct Search<'a> {
        g: &'a Graph,
        colour: &'a [usize],
        slot_colour: &'a [usize],
        best: Option<Vec<Mult>>,
        best_order: Vec<usize>,
        order: Vec<usize>,
        used: Vec<bool>,
        code: Vec<Mult>,
    }

    impl Search<'_> {
        fn run(&mut self, p: usize, tied: bool) {
            let n = self.g.len();
            if p == n {
                if self.best.as_ref().map_or(true, |b| self.code < *b) {
                    self.best = Some(self.code.clone());
                    self.best_order = self.order.clone();
                }
                return;
            }
            let start = self.code.len();
            for v in 0..n {
                if self.used[v] || self.colour[v] != self.slot_colour[p] {
                    continue;
                }
                self.order.push(v);
                for q in 0..=p {
                    self.code.push(self.g.get(v, self.order[q]));
                }
                for q in 0..p {
                    self.code.push(self.g.get(self.order[q], v));
                }
                let mut next_tied = tied;
                let mut prune = false;
                if tied {
                    if let Some(best) = &self.best {
                        let layer = &self.code[start..];
                        let best_layer = &best[start..start + layer.len()];
                        match layer.cmp(best_layer) {
                            std::cmp::Ordering::Greater => prune = true,
                            std::cmp::Ordering::Less => next_tied = false,
                            std::cmp::Ordering::Equal => {}
                        }
                    }
                }
                if !prune {
                    self.used[v] = true;
                    self.run(p + 1, next_tied);
                    self.used[v] = false;
                }
                self.code.truncate(start);
                self.order.pop();
            }
        }
    }

    let mut search = Search {
        g,
        colour: &colour,
        slot_colour: &slot_colour,
        best: None,
        best_order: Vec::new(),
        order: Vec::with_capacity(n),
        used: vec![false; n],
        code: Vec::with_capacity(n * n),
    };
    search.run(0, true);
    let code = search.best.unwrap_or_default();
    (CanonicalForm { n, code }, search.best_order)
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    canonical_labeling(g).0
}
