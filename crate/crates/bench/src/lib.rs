//! Shared fixtures for the benchmarks.

use gac_core::{Graph, IntMatrix};

/// The graph with one vertex and `n` loops, whose algebra is O_n.
pub fn cuntz(n: u64) -> Graph {
    Graph::from_matrix(&[vec![n]])
}

/// A dense graph on `n` vertices with entries below `max_mult`, drawn from a
/// fixed linear congruential stream so every run sees the same input.
pub fn dense_graph(n: usize, max_mult: u64, seed: u64) -> Graph {
    let mut state = seed;
    let rows: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| next(&mut state) % max_mult).collect()).collect();
    Graph::from_matrix(&rows)
}

/// A square integer matrix with entries in `-bound..=bound`.
pub fn dense_matrix(n: usize, bound: i64, seed: u64) -> IntMatrix {
    let mut state = seed;
    let span = (2 * bound + 1) as u64;
    let rows: Vec<Vec<i64>> =
        (0..n).map(|_| (0..n).map(|_| (next(&mut state) % span) as i64 - bound).collect()).collect();
    IntMatrix::from_rows(&rows)
}

fn next(state: &mut u64) -> u64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    *state >> 33
}
