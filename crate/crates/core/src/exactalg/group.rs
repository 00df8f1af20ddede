use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Rank of a free abelian summand: finite, or countably infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Finite(usize),
    Countable,
}

impl Rank {
    pub fn is_zero(self) -> bool {
        self == Rank::Finite(0)
    }

    fn times(self, n: usize) -> Rank {
        match self {
            _ if n == 0 => Rank::Finite(0),
            Rank::Finite(r) => Rank::Finite(r * n),
            Rank::Countable => Rank::Countable,
        }
    }
}

impl Add for Rank {
    type Output = Rank;

    fn add(self, rhs: Rank) -> Rank {
        match (self, rhs) {
            (Rank::Finite(a), Rank::Finite(b)) => Rank::Finite(a + b),
            _ => Rank::Countable,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Countable => f.write_str("w"),
        }
    }
}

/// Descriptor of an abelian group of the form
///
/// `Z/d1 + ... + Z/dk + (Z/e1)^w + ... + (Z/em)^w + Z^r + D^s`
///
/// where `D` is a symbolic divisible torsion-free summand, `w` means
/// countably many copies, and both torsion lists are invariant-factor
/// chains (each entry at least 2 and dividing the next). Cyclic summands of
/// prime-power order that occur countably often absorb finite copies of
/// themselves, so two descriptors are equal exactly when the groups they
/// describe are isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbGroup {
    torsion: Vec<BigUint>,
    torsion_countable: Vec<BigUint>,
    free_rank: Rank,
    divisible_rank: usize,
}

impl AbGroup {
    pub fn trivial() -> Self {
        AbGroup { torsion: Vec::new(), torsion_countable: Vec::new(), free_rank: Rank::Finite(0), divisible_rank: 0 }
    }

    pub fn free(rank: usize) -> Self {
        AbGroup { free_rank: Rank::Finite(rank), ..AbGroup::trivial() }
    }

    pub fn free_countable() -> Self {
        AbGroup { free_rank: Rank::Countable, ..AbGroup::trivial() }
    }

    pub fn divisible(rank: usize) -> Self {
        AbGroup { divisible_rank: rank, ..AbGroup::trivial() }
    }

    /// `Z/n`, with `Z/0 = Z` and `Z/1 = 0`.
    pub fn cyclic(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            AbGroup::free(1)
        } else {
            AbGroup::from_parts(vec![n], Vec::new(), 0, 0)
        }
    }

    /// Countably many copies of `Z/n`.
    pub fn cyclic_countable(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            AbGroup::free_countable()
        } else {
            AbGroup::from_parts(Vec::new(), vec![n], 0, 0)
        }
    }

    /// Canonicalizing constructor. Orders equal to 1 are dropped; free
    /// summands go through `free_rank`, never as order 0.
    pub fn from_parts(
        torsion: impl IntoIterator<Item = BigUint>,
        torsion_countable: impl IntoIterator<Item = BigUint>,
        free_rank: usize,
        divisible_rank: usize,
    ) -> Self {
        let (torsion, torsion_countable) = canonical_torsion(torsion.into_iter().collect(), torsion_countable.into_iter().collect());
        AbGroup { torsion, torsion_countable, free_rank: Rank::Finite(free_rank), divisible_rank }
    }

    pub fn torsion(&self) -> &[BigUint] {
        &self.torsion
    }

    pub fn torsion_countable(&self) -> &[BigUint] {
        &self.torsion_countable
    }

    pub fn free_rank(&self) -> Rank {
        self.free_rank
    }

    pub fn divisible_rank(&self) -> usize {
        self.divisible_rank
    }

    pub fn is_trivial(&self) -> bool {
        *self == AbGroup::trivial()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty() && self.torsion_countable.is_empty() && self.divisible_rank == 0
    }

    pub fn direct_sum(&self, other: &AbGroup) -> AbGroup {
        let (torsion, torsion_countable) = canonical_torsion(
            self.torsion.iter().chain(&other.torsion).cloned().collect(),
            self.torsion_countable.iter().chain(&other.torsion_countable).cloned().collect(),
        );
        AbGroup {
            torsion,
            torsion_countable,
            free_rank: self.free_rank + other.free_rank,
            divisible_rank: self.divisible_rank + other.divisible_rank,
        }
    }

    /// Direct sum of `n` copies.
    pub fn power(&self, n: usize) -> AbGroup {
        let torsion = self.torsion.iter().flat_map(|d| std::iter::repeat(d.clone()).take(n)).collect();
        let countable = if n == 0 { Vec::new() } else { self.torsion_countable.clone() };
        let (torsion, torsion_countable) = canonical_torsion(torsion, countable);
        AbGroup {
            torsion,
            torsion_countable,
            free_rank: self.free_rank.times(n),
            divisible_rank: self.divisible_rank * n,
        }
    }

    /// `G / dG`; `d = 0` leaves the group unchanged.
    pub fn quotient_by(&self, d: &BigUint) -> AbGroup {
        if d.is_zero() {
            return self.clone();
        }
        let mut torsion: Vec<BigUint> = self.torsion.iter().map(|q| q.gcd(d)).collect();
        let mut countable: Vec<BigUint> = self.torsion_countable.iter().map(|q| q.gcd(d)).collect();
        match self.free_rank {
            Rank::Finite(r) => torsion.extend(std::iter::repeat(d.clone()).take(r)),
            Rank::Countable => countable.push(d.clone()),
        }
        // divisible summands vanish
        let (torsion, torsion_countable) = canonical_torsion(torsion, countable);
        AbGroup { torsion, torsion_countable, free_rank: Rank::Finite(0), divisible_rank: 0 }
    }

    /// The `d`-torsion subgroup `{x : d x = 0}`; `d = 0` gives the whole group.
    pub fn torsion_of(&self, d: &BigUint) -> AbGroup {
        if d.is_zero() {
            return self.clone();
        }
        let torsion = self.torsion.iter().map(|q| q.gcd(d)).collect();
        let countable = self.torsion_countable.iter().map(|q| q.gcd(d)).collect();
        let (torsion, torsion_countable) = canonical_torsion(torsion, countable);
        AbGroup { torsion, torsion_countable, free_rank: Rank::Finite(0), divisible_rank: 0 }
    }
}

impl Default for AbGroup {
    fn default() -> Self {
        AbGroup::trivial()
    }
}

/// Pairwise coprime set whose products generate every input.
pub(crate) fn coprime_base(values: &[BigUint]) -> Vec<BigUint> {
    let one = BigUint::one();
    let mut base: Vec<BigUint> = Vec::new();
    let mut pending: Vec<BigUint> = values.iter().filter(|v| **v > one).cloned().collect();
    while let Some(x) = pending.pop() {
        if x <= one {
            continue;
        }
        match base.iter().position(|b| b.gcd(&x) > one) {
            None => base.push(x),
            Some(pos) => {
                if base[pos] == x {
                    continue;
                }
                let b = base.swap_remove(pos);
                let g = b.gcd(&x);
                pending.push(&b / &g);
                pending.push(&x / &g);
                pending.push(g);
            }
        }
    }
    base.sort();
    base
}

fn valuation(x: &BigUint, b: &BigUint) -> (u32, BigUint) {
    let mut e = 0;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(b);
        if !r.is_zero() {
            return (e, rest);
        }
        rest = q;
        e += 1;
    }
}

/// Canonical invariant-factor chains for a finite and a countable torsion
/// part, computed over a coprime base so no integer factoring is needed.
fn canonical_torsion(finite: Vec<BigUint>, countable: Vec<BigUint>) -> (Vec<BigUint>, Vec<BigUint>) {
    let one = BigUint::one();
    debug_assert!(finite.iter().chain(&countable).all(|x| !x.is_zero()), "zero order in torsion list");
    let finite: Vec<BigUint> = finite.into_iter().filter(|x| *x > one).collect();
    let countable: Vec<BigUint> = countable.into_iter().filter(|x| *x > one).collect();
    let all: Vec<BigUint> = finite.iter().chain(&countable).cloned().collect();
    let base = coprime_base(&all);

    let exponents = |x: &BigUint| -> Vec<(usize, u32)> {
        let mut rest = x.clone();
        let mut out = Vec::new();
        for (i, b) in base.iter().enumerate() {
            let (e, r) = valuation(&rest, b);
            rest = r;
            if e > 0 {
                out.push((i, e));
            }
        }
        assert!(rest.is_one(), "coprime base does not cover {x}");
        out
    };

    let mut omega: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
    for x in &countable {
        for (i, e) in exponents(x) {
            omega.entry(i).or_default().insert(e);
        }
    }
    let mut fin: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for x in &finite {
        for (i, e) in exponents(x) {
            if !omega.get(&i).is_some_and(|s| s.contains(&e)) {
                fin.entry(i).or_default().push(e);
            }
        }
    }
    let omega: BTreeMap<usize, Vec<u32>> = omega.into_iter().map(|(i, s)| (i, s.into_iter().collect())).collect();
    (chain(&base, fin), chain(&base, omega))
}

fn chain(base: &[BigUint], mut per_base: BTreeMap<usize, Vec<u32>>) -> Vec<BigUint> {
    let len = per_base.values().map(Vec::len).max().unwrap_or(0);
    for exps in per_base.values_mut() {
        exps.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut out: Vec<BigUint> = (0..len)
        .map(|j| {
            per_base
                .iter()
                .filter_map(|(&i, exps)| exps.get(j).map(|&e| base[i].pow(e)))
                .fold(BigUint::one(), |acc, x| acc * x)
        })
        .collect();
    out.reverse();
    out
}

impl fmt::Display for AbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        terms.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        terms.extend(self.torsion_countable.iter().map(|d| format!("(Z/{d})^w")));
        match self.free_rank {
            Rank::Finite(0) => {}
            Rank::Finite(1) => terms.push("Z".into()),
            r => terms.push(format!("Z^{r}")),
        }
        if self.divisible_rank > 0 {
            terms.push(format!("D^{}", self.divisible_rank));
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid abelian group term `{0}`")]
pub struct AbGroupParseError(pub String);

fn parse_exponent(s: &str, term: &str) -> Result<Option<usize>, AbGroupParseError> {
    match s {
        "w" | "ω" => Ok(None),
        _ => s.parse().map(Some).map_err(|_| AbGroupParseError(term.to_string())),
    }
}

impl FromStr for AbGroup {
    type Err = AbGroupParseError;

    /// Accepts the display form, e.g. `Z/2 + (Z/3)^w + Z^3 + D^1`; `0` is
    /// the trivial group and `(Z/n)^k` means `k` copies.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut acc = AbGroup::trivial();
        if s.trim().is_empty() {
            return Err(AbGroupParseError(s.to_string()));
        }
        for raw in s.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            let bad = || AbGroupParseError(raw.trim().to_string());
            let (body, exp) = match term.rsplit_once('^') {
                Some((body, exp)) => (body.to_string(), parse_exponent(exp, raw.trim())?),
                None => (term.clone(), Some(1)),
            };
            let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).map(str::to_string).unwrap_or(body);
            let piece = match body.as_str() {
                "0" if exp == Some(1) => AbGroup::trivial(),
                "Z" => match exp {
                    Some(r) => AbGroup::free(r),
                    None => AbGroup::free_countable(),
                },
                "D" => AbGroup::divisible(exp.ok_or_else(bad)?),
                _ => {
                    let order = body.strip_prefix("Z/").ok_or_else(bad)?;
                    let order: BigUint = order.parse().map_err(|_| bad())?;
                    match exp {
                        Some(k) => AbGroup::cyclic(order).power(k),
                        None => AbGroup::cyclic_countable(order),
                    }
                }
            };
            acc = acc.direct_sum(&piece);
        }
        Ok(acc)
    }
}

impl Serialize for AbGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AbGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> AbGroup {
        s.parse().unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn canonicalizes_to_invariant_factors() {
        assert_eq!(g("Z/2 + Z/3"), g("Z/6"));
        assert_ne!(g("Z/2 + Z/4"), g("Z/8"));
        assert_eq!(g("Z/4 + Z/6").torsion(), big(&[2, 12]));
        assert_eq!(g("Z/12 + Z/18 + Z/5").torsion(), big(&[6, 180]));
        assert_eq!(g("Z + Z"), AbGroup::free(2));
        assert_eq!(g("Z/1"), AbGroup::trivial());
        assert_eq!(g("Z/0"), AbGroup::free(1));
    }

    #[test]
    fn countable_summands_absorb() {
        assert_eq!(g("Z/2 + (Z/2)^w"), g("(Z/2)^w"));
        assert_eq!(g("Z/4 + (Z/2)^w").torsion(), big(&[4]));
        assert_eq!(g("Z/6 + (Z/2)^w"), g("Z/3 + (Z/2)^w"));
        assert_eq!(g("Z^3 + Z^w"), AbGroup::free_countable());
        assert_eq!(g("(Z/6)^w"), g("(Z/2)^w + (Z/3)^w"));
    }

    #[test]
    fn display_round_trip() {
        for s in ["0", "Z/2 + Z^3 + D^1", "Z/2 + Z/4 + (Z/3)^w + Z^w", "Z", "D^2"] {
            assert_eq!(g(s).to_string(), s);
        }
        assert_eq!(g("(Z/2)^3").to_string(), "Z/2 + Z/2 + Z/2");
        assert!("Q".parse::<AbGroup>().is_err());
        assert!("Z/x".parse::<AbGroup>().is_err());
        assert!("".parse::<AbGroup>().is_err());
    }

    #[test]
    fn quotients() {
        let two = BigUint::from(2u32);
        assert_eq!(g("Z/2 + Z").quotient_by(&two), g("Z/2 + Z/2"));
        assert_eq!(g("Z/9").quotient_by(&BigUint::from(6u32)), g("Z/3"));
        assert!(g("D^1").quotient_by(&two).is_trivial());
        assert_eq!(g("Z/2 + Z^w").quotient_by(&BigUint::from(3u32)), g("(Z/3)^w"));
        assert_eq!(g("Z/2 + Z^w").quotient_by(&two), g("(Z/2)^w"));
        assert_eq!(g("Z + D^1").quotient_by(&BigUint::zero()), g("Z + D^1"));
    }

    #[test]
    fn torsion_subgroups() {
        let two = BigUint::from(2u32);
        assert_eq!(g("Z/4").torsion_of(&two), g("Z/2"));
        assert!(g("Z^2 + D^1").torsion_of(&two).is_trivial());
        assert_eq!(g("(Z/6)^w").torsion_of(&BigUint::from(4u32)), g("(Z/2)^w"));
    }

    #[test]
    fn powers() {
        assert_eq!(g("Z/2 + D^1").power(2), g("Z/2 + Z/2 + D^2"));
        assert!(g("Z^w").power(0).is_trivial());
        assert_eq!(g("(Z/2)^w").power(3), g("(Z/2)^w"));
    }

    #[test]
    fn coprime_bases() {
        assert_eq!(coprime_base(&big(&[12, 18])), big(&[2, 3]));
        assert_eq!(coprime_base(&big(&[4, 6])), big(&[2, 3]));
        assert_eq!(coprime_base(&big(&[35, 10])), big(&[2, 5, 7]));
    }
}
