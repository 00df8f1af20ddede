use gac_core::canon::graphs_isomorphic;
use gac_core::ktheory::{bowen_franks, det_identity_minus_transpose};
use gac_core::moves::{apply, inverse_of};
use gac_core::{
    classify_vertices, enumerate_moves, invariants_cstar, structural_report, validate_move, DetSign, Graph, MoveBounds,
    MoveKind, Mult,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_finite(rng: &mut StdRng, max_n: usize, max_mult: u64) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let rows: Vec<Vec<u64>> = (0..n)
        .map(|_| (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(1..=max_mult) } else { 0 }).collect())
        .collect();
    Graph::from_matrix(&rows)
}

fn random_infinite(rng: &mut StdRng, max_n: usize) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let mut rows: Vec<Vec<Mult>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match rng.gen_range(0..6) {
                    0 => Mult::Inf,
                    1 | 2 => Mult::Fin(rng.gen_range(1..=2)),
                    _ => Mult::ZERO,
                })
                .collect()
        })
        .collect();
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    rows[i][j] = Mult::Inf;
    Graph::from_mult_matrix(&rows)
}

fn small_bounds() -> MoveBounds {
    MoveBounds { max_partition_blocks: 2, max_new_mult: 1, max_vertices: 7 }
}

#[test]
fn moves_preserve_bowen_franks_and_sign() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 2000 {
        let g = random_finite(&mut rng, 4, 2);
        let bf = bowen_franks(&g).unwrap();
        let det = det_identity_minus_transpose(&g).unwrap();
        for m in enumerate_moves(&g, &small_bounds()).unwrap() {
            if m.kind() == MoveKind::CS {
                continue;
            }
            let h = apply(&g, &m).unwrap().graph;
            assert_eq!(bowen_franks(&h).unwrap(), bf, "{m} on\n{g}");
            let dh = det_identity_minus_transpose(&h).unwrap();
            assert_eq!(DetSign::of(&dh), DetSign::of(&det), "{m} on\n{g}");
            if m.kind() == MoveKind::S {
                assert_eq!(dh, det, "source removal keeps the determinant");
            }
            checked += 1;
        }
    }
}

#[test]
fn every_move_is_undone_by_its_inverse() {
    let mut rng = StdRng::seed_from_u64(12);
    for round in 0..60 {
        let g = if round % 3 == 0 { random_infinite(&mut rng, 3) } else { random_finite(&mut rng, 3, 2) };
        for m in enumerate_moves(&g, &small_bounds()).unwrap() {
            let applied = apply(&g, &m).unwrap();
            let Some(inv) = inverse_of(&g, &m, &applied) else {
                assert_eq!(m.kind(), MoveKind::CS);
                continue;
            };
            validate_move(&applied.graph, &inv).unwrap_or_else(|e| panic!("{m} then {inv}: {e}"));
            let back = apply(&applied.graph, &inv).unwrap().graph;
            assert!(graphs_isomorphic(&g, &back).unwrap(), "{m} then {inv} on\n{g}");
        }
    }
}

#[test]
fn cuntz_splice_flips_the_sign() {
    let mut rng = StdRng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 300 {
        let g = random_finite(&mut rng, 5, 3);
        let before = invariants_cstar(&g);
        for m in enumerate_moves(&g, &MoveBounds { max_vertices: 8, ..small_bounds() }).unwrap() {
            if m.kind() != MoveKind::CS {
                continue;
            }
            let after = invariants_cstar(&apply(&g, &m).unwrap().graph);
            assert_eq!(after.k0, before.k0);
            assert_eq!(after.det, before.det.as_ref().map(|d| -d), "det is negated exactly");
            checked += 1;
        }
    }
}

#[test]
fn moves_on_infinite_graphs_preserve_k_theory_and_singular_count() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..150 {
        let g = random_infinite(&mut rng, 3);
        let before = invariants_cstar(&g);
        for m in enumerate_moves(&g, &small_bounds()).unwrap() {
            let h = apply(&g, &m).unwrap().graph;
            let after = invariants_cstar(&h);
            assert_eq!(after.k0, before.k0, "{m} on\n{g}");
            assert_eq!(after.k1_topological, before.k1_topological, "{m} on\n{g}");
            assert_eq!(
                classify_vertices(&h).singular_count(),
                classify_vertices(&g).singular_count(),
                "{m} on\n{g}"
            );
        }
    }
}

#[test]
fn moves_preserve_simplicity() {
    let mut rng = StdRng::seed_from_u64(15);
    for _ in 0..200 {
        let g = random_finite(&mut rng, 3, 2);
        let simple = structural_report(&g).simple;
        for m in enumerate_moves(&g, &small_bounds()).unwrap() {
            let h = apply(&g, &m).unwrap().graph;
            assert_eq!(structural_report(&h).simple, simple, "{m} on\n{g}");
        }
    }
}
