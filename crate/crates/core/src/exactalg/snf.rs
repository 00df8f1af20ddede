use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::group::AbGroup;
use super::matrix::IntMatrix;

/// `d = u * m * v` with `u`, `v` unimodular and `d` diagonal, nonnegative,
/// each diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries, in chain order.
    pub fn invariant_factors(&self) -> Vec<BigUint> {
        self.d
            .diagonal()
            .into_iter()
            .filter(|x| !x.is_zero())
            .map(|x| x.magnitude().clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.d.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

fn min_nonzero(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = d.get(i, j);
            if x.is_zero() {
                continue;
            }
            if best.map_or(true, |(bi, bj)| x.magnitude() < d.get(bi, bj).magnitude()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry on the cross through `(t, t)`.
fn min_on_cross(d: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let mut best_abs: Option<BigUint> = (!d.get(t, t).is_zero()).then(|| d.get(t, t).magnitude().clone());
    let candidates = (t + 1..d.rows()).map(|i| (i, t)).chain((t + 1..d.cols()).map(|j| (t, j)));
    for (i, j) in candidates {
        let x = d.get(i, j);
        if x.is_zero() {
            continue;
        }
        if best_abs.as_ref().map_or(true, |b| x.magnitude() < b) {
            best = (i, j);
            best_abs = Some(x.magnitude().clone());
        }
    }
    best
}

/// Smith normal form with transforms, using smallest-magnitude pivots.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_nonzero(&d, t) else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let pivot = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -(d.get(i, t) / &pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -(d.get(t, j) / &pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                let (i, j) = min_on_cross(&d, t);
                d.swap_rows(t, i);
                u.swap_rows(t, i);
                d.swap_cols(t, j);
                v.swap_cols(t, j);
                continue;
            }
            // Pivot must divide the rest of the block; fold an offending row in.
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(d.get(i, j) % &pivot).is_zero()));
            match offending {
                Some(i) => {
                    d.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfResult { u, d, v }
}

pub fn rank(m: &IntMatrix) -> usize {
    smith_normal_form(m).rank()
}

/// Rank of the (free) kernel of `m : Z^cols -> Z^rows`.
pub fn kernel_rank(m: &IntMatrix) -> usize {
    m.cols() - rank(m)
}

/// Cokernel of `m : Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> AbGroup {
    let snf = smith_normal_form(m);
    let factors = snf.invariant_factors();
    AbGroup::from_parts(factors, Vec::new(), m.rows() - snf.rank(), 0)
}

/// Cokernel of `m` acting on `g^cols -> g^rows`.
pub fn coker_with_coefficients(m: &IntMatrix, g: &AbGroup) -> AbGroup {
    let snf = smith_normal_form(m);
    let factors = snf.invariant_factors();
    factors
        .iter()
        .fold(g.power(m.rows() - factors.len()), |acc, d| acc.direct_sum(&g.quotient_by(d)))
}

/// Kernel of `m` acting on `g^cols -> g^rows`.
pub fn kernel_with_coefficients(m: &IntMatrix, g: &AbGroup) -> AbGroup {
    let snf = smith_normal_form(m);
    let factors = snf.invariant_factors();
    factors
        .iter()
        .fold(g.power(m.cols() - factors.len()), |acc, d| acc.direct_sum(&g.torsion_of(d)))
}
