use std::collections::BTreeMap;

use gac_core::exactalg::{
    coker_with_coefficients, cokernel, determinant, kernel_rank, rank, smith_normal_form, AbGroup, IntMatrix,
};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Laplace expansion along the first row, memoized over column subsets.
fn laplace_det(m: &IntMatrix) -> BigInt {
    let n = m.rows();
    assert_eq!(n, m.cols());
    // minor[mask] = det of rows (n - |mask|).. with columns in mask
    let mut minor: BTreeMap<u32, BigInt> = BTreeMap::new();
    minor.insert(0, BigInt::one());
    for size in 1..=n {
        let row = n - size;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let mut acc = BigInt::zero();
            let mut sign_pos = 0;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let term = m.get(row, col) * &minor[&(mask & !(1 << col))];
                if sign_pos % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
                sign_pos += 1;
            }
            minor.insert(mask, acc);
        }
    }
    minor[&((1u32 << n) - 1)].clone()
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect()).collect();
    if rows == 0 {
        return IntMatrix::zeros(0, cols);
    }
    IntMatrix::from_rows(&data)
}

fn random_unimodular(rng: &mut StdRng, n: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for _ in 0..3 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let k: i64 = rng.gen_range(-2..=2);
        let mut e = IntMatrix::identity(n);
        e.set(i, j, BigInt::from(k));
        u = e.mul(&u);
    }
    u
}

#[test]
fn snf_contract_on_random_matrices() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let (r, c) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let m = random_matrix(&mut rng, r, c, 9);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d, "D = UMV for {m}");
        assert!(snf.d.is_diagonal());
        assert_eq!(laplace_det(&snf.u).abs(), BigInt::one());
        assert_eq!(laplace_det(&snf.v).abs(), BigInt::one());
        let diag = snf.d.diagonal();
        assert!(diag.iter().all(|d| !d.is_negative()));
        let nonzero: Vec<&BigInt> = diag.iter().take_while(|d| !d.is_zero()).collect();
        assert!(diag[nonzero.len()..].iter().all(Zero::is_zero), "zeros trail");
        for w in nonzero.windows(2) {
            assert!(w[1].is_multiple_of(w[0]), "chain {diag:?}");
        }
        if r == c {
            let det = laplace_det(&m);
            if !det.is_zero() {
                let prod: BigInt = diag.iter().product();
                assert_eq!(prod, det.abs());
            }
        }
        assert_eq!(kernel_rank(&m) + rank(&m), c);
        assert_eq!(coker_with_coefficients(&m, &AbGroup::free(1)), cokernel(&m));
    }
}

#[test]
fn cokernel_is_invariant_under_unimodular_change_of_basis() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = random_matrix(&mut rng, r, c, 9);
        let (u, v) = (random_unimodular(&mut rng, r), random_unimodular(&mut rng, c));
        assert_eq!(cokernel(&u.mul(&m).mul(&v)), cokernel(&m));
    }
}

fn factorize(mut n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

/// Invariant factors computed from the primary decomposition.
fn invariant_factors_by_factoring(orders: &[u64]) -> Vec<BigUint> {
    let mut powers: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &n in orders {
        for (p, e) in factorize(n) {
            powers.entry(p).or_default().push(p.pow(e));
        }
    }
    let len = powers.values().map(Vec::len).max().unwrap_or(0);
    for v in powers.values_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.resize(len, 1);
    }
    let mut factors: Vec<BigUint> =
        (0..len).map(|i| powers.values().map(|v| BigUint::from(v[i])).product()).collect();
    factors.reverse();
    factors
}

proptest! {
    #[test]
    fn group_canonical_form_matches_factoring(orders in prop::collection::vec(1u64..200, 0..6), free in 0usize..3) {
        let g = AbGroup::from_parts(orders.iter().map(|&n| BigUint::from(n)), [], free, 0);
        prop_assert_eq!(g.torsion().to_vec(), invariant_factors_by_factoring(&orders));
        let shuffled: Vec<u64> = orders.iter().rev().copied().collect();
        let h = AbGroup::from_parts(shuffled.iter().map(|&n| BigUint::from(n)), [], free, 0);
        prop_assert_eq!(&g, &h);
        prop_assert_eq!(g.to_string().parse::<AbGroup>().unwrap(), g);
    }

    #[test]
    fn determinant_matches_laplace(n in 0usize..7, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, n, 9);
        prop_assert_eq!(determinant(&m).unwrap().0, laplace_det(&m));
    }

    #[test]
    fn sums_of_cyclic_groups(a in 1u64..60, b in 1u64..60) {
        let sum = AbGroup::cyclic(a).direct_sum(&AbGroup::cyclic(b));
        let g = a.gcd(&b);
        let l = a.lcm(&b);
        prop_assert_eq!(sum, AbGroup::cyclic(g).direct_sum(&AbGroup::cyclic(l)));
    }
}
