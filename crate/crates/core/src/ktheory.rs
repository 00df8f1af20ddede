//! K-theory of graph C*-algebras and Leavitt path algebras.
//!
//! Every invariant comes from one integer matrix, the presentation matrix
//! `Z^{reg} -> Z^{E^0}`: its column for a regular vertex `v` is
//! `delta_v - (edges out of v counted by range)`. The cokernel is K0 and the
//! kernel is the topological K1; the Leavitt K1 adds the cokernel of the
//! same matrix acting on copies of the field's unit group.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exactalg::{
    coker_with_coefficients, cokernel, determinant, kernel_rank, kernel_with_coefficients, AbGroup, AbGroupParseError,
    DetSign, IntMatrix,
};
use crate::graph::{classify_vertices, regular_indices, structural_report, Graph, Mult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KTheoryError {
    #[error("graph has an infinite multiplicity from `{0}` to `{1}`")]
    InfiniteMultiplicity(String, String),
}

/// Presentation matrix with rows indexed by all vertices and columns by the
/// regular vertices, both in declared order.
pub fn presentation_matrix(g: &Graph) -> IntMatrix {
    let reg = regular_indices(g);
    let mut m = IntMatrix::zeros(g.len(), reg.len());
    for (col, &v) in reg.iter().enumerate() {
        for w in 0..g.len() {
            let edges = g.get(v, w).finite().expect("regular vertices emit finitely many edges");
            let delta = i64::from(v == w);
            m.set(w, col, BigInt::from(delta) - BigInt::from(edges));
        }
    }
    m
}

/// `I - A^t` for a finite graph.
pub fn identity_minus_transpose(g: &Graph) -> Result<IntMatrix, KTheoryError> {
    let n = g.len();
    let mut m = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let Mult::Fin(a) = g.get(j, i) else {
                return Err(KTheoryError::InfiniteMultiplicity(g.label(j).into(), g.label(i).into()));
            };
            m.set(i, j, BigInt::from(i64::from(i == j)) - BigInt::from(a));
        }
    }
    Ok(m)
}

/// `coker(I - A^t)` of a finite graph.
pub fn bowen_franks(g: &Graph) -> Result<AbGroup, KTheoryError> {
    Ok(cokernel(&identity_minus_transpose(g)?))
}

/// Exact `det(I - A^t)` of a finite graph.
pub fn det_identity_minus_transpose(g: &Graph) -> Result<BigInt, KTheoryError> {
    let m = identity_minus_transpose(g)?;
    Ok(determinant(&m).expect("I - A^t is square").0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GraphClass {
    #[serde(rename = "finite")]
    Finite,
    #[serde(rename = "finite-vertices-infinite-edges")]
    InfiniteEdges,
}

impl GraphClass {
    pub fn of(g: &Graph) -> GraphClass {
        if g.is_finite() {
            GraphClass::Finite
        } else {
            GraphClass::InfiniteEdges
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphClass::Finite => "finite",
            GraphClass::InfiniteEdges => "finite-vertices-infinite-edges",
        })
    }
}

fn serialize_opt_bigint<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.collect_str(x),
        None => s.serialize_none(),
    }
}

/// Invariants of `C*(E)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantBundle {
    pub k0: AbGroup,
    pub k1_topological: AbGroup,
    /// `det(I - A^t)`, present only for finite graphs.
    #[serde(serialize_with = "serialize_opt_bigint")]
    pub det: Option<BigInt>,
    pub det_sign: Option<DetSign>,
    pub singular_count: usize,
    /// Whether the positive cone is all of K0; set only for simple graphs.
    pub cone_full: Option<bool>,
    pub graph_class: GraphClass,
}

impl fmt::Display for InvariantBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K0 = {}, K1 = {}, det sign = ", self.k0, self.k1_topological)?;
        match self.det_sign {
            Some(s) => write!(f, "{s}")?,
            None => f.write_str("n/a")?,
        }
        write!(f, ", singular = {}", self.singular_count)
    }
}

pub fn invariants_cstar(g: &Graph) -> InvariantBundle {
    let m = presentation_matrix(g);
    let k0 = cokernel(&m);
    let k1_topological = AbGroup::free(kernel_rank(&m));
    let det = det_identity_minus_transpose(g).ok();
    let report = structural_report(g);
    InvariantBundle {
        k0,
        k1_topological,
        det_sign: det.as_ref().map(DetSign::of),
        det,
        singular_count: classify_vertices(g).singular_count(),
        cone_full: report.simple.then_some(report.has_cycle),
        graph_class: GraphClass::of(g),
    }
}

/// Invariants of `L_K(E)`; K0 agrees with the C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeavittInvariants {
    #[serde(flatten)]
    pub bundle: InvariantBundle,
    pub field: String,
    /// Absent when the field's unit group is not known.
    pub k1_algebraic: Option<AbGroup>,
}

impl fmt::Display for LeavittInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, K1_alg = ", self.bundle)?;
        match &self.k1_algebraic {
            Some(k1) => write!(f, "{k1}"),
            None => f.write_str("unknown (field units not given)"),
        }
    }
}

pub fn invariants_leavitt(g: &Graph, k: &FieldDescriptor) -> LeavittInvariants {
    let bundle = invariants_cstar(g);
    let k1_algebraic = k.units.as_ref().map(|units| k1_algebraic(g, units));
    LeavittInvariants { bundle, field: k.name.clone(), k1_algebraic }
}

/// `ker(M) + coker(M on units^{reg} -> units^{E^0})`.
pub fn k1_algebraic(g: &Graph, units: &AbGroup) -> AbGroup {
    let m = presentation_matrix(g);
    AbGroup::free(kernel_rank(&m)).direct_sum(&coker_with_coefficients(&m, units))
}

/// The two outer terms of the long exact sequence around `K_n(L_K(E))`.
///
/// `K_n(L_K(E))` is an extension of `upper` by `lower`; the extension
/// itself is not determined here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnBounds {
    /// Cokernel of the presentation matrix on `K_n(K)`.
    pub lower: AbGroup,
    /// Kernel of the presentation matrix on `K_{n-1}(K)`.
    pub upper: AbGroup,
}

pub fn kn_alg_bounds(g: &Graph, kn_field: &AbGroup, kn_minus1_field: &AbGroup) -> KnBounds {
    kn_alg_bounds_for_matrix(&presentation_matrix(g), kn_field, kn_minus1_field)
}

pub fn kn_alg_bounds_for_matrix(m: &IntMatrix, kn_field: &AbGroup, kn_minus1_field: &AbGroup) -> KnBounds {
    KnBounds {
        lower: coker_with_coefficients(m, kn_field),
        upper: kernel_with_coefficients(m, kn_minus1_field),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("unknown field `{0}` (expected C, R, Q, F_<q>, F_q:<q>, numberfield:<name> or custom:...)")]
    Unknown(String),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("invalid custom field option `{0}`")]
    BadOption(String),
    #[error(transparent)]
    Units(#[from] AbGroupParseError),
}

/// A field, described by the structure of its unit group `K^x = K1(K)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldDescriptor {
    pub name: String,
    pub units: Option<AbGroup>,
    pub no_free_quotients: bool,
    pub is_number_field: bool,
}

impl FieldDescriptor {
    /// `C^x` modelled as one divisible summand.
    pub fn complex() -> Self {
        FieldDescriptor { name: "C".into(), units: Some(AbGroup::divisible(1)), no_free_quotients: true, is_number_field: false }
    }

    /// `R^x = Z/2 + (divisible)`.
    pub fn real() -> Self {
        FieldDescriptor {
            name: "R".into(),
            units: Some(AbGroup::cyclic(2u32).direct_sum(&AbGroup::divisible(1))),
            no_free_quotients: true,
            is_number_field: false,
        }
    }

    /// `Q^x = Z/2 + Z^w`.
    pub fn rational() -> Self {
        FieldDescriptor {
            name: "Q".into(),
            units: Some(AbGroup::cyclic(2u32).direct_sum(&AbGroup::free_countable())),
            no_free_quotients: false,
            is_number_field: true,
        }
    }

    pub fn finite_field(q: u64) -> Result<Self, FieldError> {
        if !is_prime_power(q) {
            return Err(FieldError::NotPrimePower(q));
        }
        Ok(FieldDescriptor {
            name: format!("F_{q}"),
            units: Some(AbGroup::cyclic(q - 1)),
            no_free_quotients: true,
            is_number_field: false,
        })
    }

    /// A number field. With `roots` (the number of roots of unity) the unit
    /// group is `Z/roots + Z^w`; without it the units are left unknown.
    pub fn number_field(name: &str, roots: Option<u64>) -> Self {
        FieldDescriptor {
            name: format!("numberfield:{name}"),
            units: roots.map(|w| AbGroup::cyclic(w).direct_sum(&AbGroup::free_countable())),
            no_free_quotients: false,
            is_number_field: true,
        }
    }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..).take_while(|p| p * p <= q).find(|p| q % p == 0).unwrap_or(q);
    let mut rest = q;
    while rest % p == 0 {
        rest /= p;
    }
    rest == 1
}

fn parse_bool(key: &str, v: &str) -> Result<bool, FieldError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(FieldError::BadOption(format!("{key}={v}"))),
    }
}

impl FromStr for FieldDescriptor {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "C" => return Ok(FieldDescriptor::complex()),
            "R" => return Ok(FieldDescriptor::real()),
            "Q" => return Ok(FieldDescriptor::rational()),
            _ => {}
        }
        if let Some(q) = s.strip_prefix("F_q:").or_else(|| s.strip_prefix("F_")) {
            let q: u64 = q.parse().map_err(|_| FieldError::Unknown(s.into()))?;
            return FieldDescriptor::finite_field(q);
        }
        if let Some(rest) = s.strip_prefix("numberfield:") {
            let (name, opt) = rest.split_once(':').map_or((rest, None), |(n, o)| (n, Some(o)));
            let roots = match opt {
                None => None,
                Some(o) => {
                    let w = o.strip_prefix("roots=").ok_or_else(|| FieldError::BadOption(o.into()))?;
                    Some(w.parse().map_err(|_| FieldError::BadOption(o.into()))?)
                }
            };
            if name.is_empty() {
                return Err(FieldError::Unknown(s.into()));
            }
            return Ok(FieldDescriptor::number_field(name, roots));
        }
        if let Some(rest) = s.strip_prefix("custom:") {
            let mut field = FieldDescriptor { name: "custom".into(), units: None, no_free_quotients: false, is_number_field: false };
            for opt in rest.split(',').filter(|o| !o.trim().is_empty()) {
                let (key, value) = opt.split_once('=').ok_or_else(|| FieldError::BadOption(opt.into()))?;
                match key.trim() {
                    "units" => field.units = Some(value.parse()?),
                    "nfq" => field.no_free_quotients = parse_bool(key, value.trim())?,
                    "numfield" => field.is_number_field = parse_bool(key, value.trim())?,
                    "name" => field.name = value.trim().to_string(),
                    _ => return Err(FieldError::BadOption(opt.into())),
                }
            }
            return Ok(field);
        }
        Err(FieldError::Unknown(s.into()))
    }
}
