//! Genus-2 curves, the sixteen nodes of their Kummer quartic, and checks
//! that a given quartic is singular exactly there.
//!
//! For the curve `y^2 = prod (x - s_j)` with sextic coefficients `f_0..f_6`
//! the node attached to the 2-torsion class `[p_i - p_j]` is
//!
//! ```text
//! (1 : s_i + s_j : s_i s_j : F0(s_i, s_j) / (s_i - s_j)^2)
//! F0(u, v) = 2f0 + f1(u+v) + 2f2 uv + f3 uv(u+v) + 2f4 (uv)^2 + f5 (uv)^2 (u+v) + 2f6 (uv)^3
//! ```
//!
//! and the node of the origin is `(0:0:0:1)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{ExactError, Field, PrimeField, Rationals};
use crate::groebner::{buchberger, hilbert_degree_codim, HilbertInvariants, MonomialOrder};
use crate::polyring::{PolyError, PolyRing, ProjectivePoint, SparsePolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KummerError {
    #[error("Weierstrass roots must be pairwise distinct (roots {0} and {1} coincide)")]
    RepeatedRoots(usize, usize),
    #[error("a genus-2 curve needs six roots, got {0}")]
    RootCount(usize),
    #[error("invalid node label {0:?}")]
    InvalidLabel(String),
    #[error("quartic must be a nonzero homogeneous quartic in 4 variables")]
    NotAQuartic,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Label of a 2-torsion class: the origin or `[p_i - p_j]` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeLabel {
    Zero,
    Pair(u8, u8),
}

impl NodeLabel {
    /// Unordered pair `{i, j}` with `1 <= i, j <= 6`, `i != j`.
    pub fn pair(i: u8, j: u8) -> Result<Self, KummerError> {
        let (a, b) = (i.min(j), i.max(j));
        if a == b || a < 1 || b > 6 {
            return Err(KummerError::InvalidLabel(format!("{i}{j}")));
        }
        Ok(NodeLabel::Pair(a, b))
    }

    /// All sixteen labels in basis order: `0, 12, 13, ..., 56`.
    pub fn all() -> Vec<NodeLabel> {
        let mut v = vec![NodeLabel::Zero];
        for i in 1..=6u8 {
            for j in i + 1..=6 {
                v.push(NodeLabel::Pair(i, j));
            }
        }
        v
    }

    /// Position in [`NodeLabel::all`].
    pub fn index(self) -> usize {
        match self {
            NodeLabel::Zero => 0,
            NodeLabel::Pair(i, j) => {
                let (i, j) = (i as usize, j as usize);
                // Pairs (1, *) occupy 1..=5, (2, *) 6..=9, and so on.
                let before: usize = (1..i).map(|k| 6 - k).sum();
                1 + before + (j - i - 1)
            }
        }
    }

    pub fn contains(self, k: u8) -> bool {
        matches!(self, NodeLabel::Pair(i, j) if i == k || j == k)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Zero => write!(f, "0"),
            NodeLabel::Pair(i, j) => write!(f, "{i}{j}"),
        }
    }
}

impl FromStr for NodeLabel {
    type Err = KummerError;

    /// Accepts `0`, `12`, `E12`, `E_12`, `{1,2}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KummerError::InvalidLabel(s.to_string());
        let digits: Vec<u8> = s
            .trim()
            .trim_start_matches(['E', 'e'])
            .chars()
            .filter(|c| !matches!(c, '_' | '{' | '}' | ',' | ' '))
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect::<Result<_, _>>()?;
        match digits.as_slice() {
            [0] => Ok(NodeLabel::Zero),
            [i, j] => NodeLabel::pair(*i, *j).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// `y^2 = prod_{j=1..6} (x - s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Genus2Curve<F: Field> {
    field: F,
    roots: Vec<F::Elem>,
    sextic: Vec<F::Elem>,
}

impl<F: Field> Genus2Curve<F> {
    pub fn new(field: F, roots: Vec<F::Elem>) -> Result<Self, KummerError> {
        if roots.len() != 6 {
            return Err(KummerError::RootCount(roots.len()));
        }
        for i in 0..6 {
            for j in i + 1..6 {
                if roots[i] == roots[j] {
                    return Err(KummerError::RepeatedRoots(i + 1, j + 1));
                }
            }
        }
        let sextic = expand_monic(&field, &roots);
        Ok(Genus2Curve { field, roots, sextic })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn roots(&self) -> &[F::Elem] {
        &self.roots
    }

    /// `f_0, ..., f_6` with `f_6 = 1`.
    pub fn sextic_coefficients(&self) -> &[F::Elem] {
        &self.sextic
    }

    /// The symmetric biquadratic `F0(u, v)` of the sextic.
    pub fn f0_form(&self, u: &F::Elem, v: &F::Elem) -> F::Elem {
        let k = &self.field;
        let c = &self.sextic;
        let two = k.from_i64(2);
        let s = k.add(u, v);
        let p = k.mul(u, v);
        let p2 = k.mul(&p, &p);
        let p3 = k.mul(&p2, &p);
        let terms = [
            k.mul(&two, &c[0]),
            k.mul(&c[1], &s),
            k.mul(&two, &k.mul(&c[2], &p)),
            k.mul(&c[3], &k.mul(&p, &s)),
            k.mul(&two, &k.mul(&c[4], &p2)),
            k.mul(&c[5], &k.mul(&p2, &s)),
            k.mul(&two, &k.mul(&c[6], &p3)),
        ];
        terms.iter().fold(k.zero(), |acc, t| k.add(&acc, t))
    }

    pub fn node_coordinates(&self, label: NodeLabel) -> Result<ProjectivePoint<F>, KummerError> {
        let k = &self.field;
        let coords = match label {
            NodeLabel::Zero => vec![k.zero(), k.zero(), k.zero(), k.one()],
            NodeLabel::Pair(i, j) => {
                let u = &self.roots[i as usize - 1];
                let v = &self.roots[j as usize - 1];
                let d = k.sub(u, v);
                let w = k.div(&self.f0_form(u, v), &k.mul(&d, &d))?;
                vec![k.one(), k.add(u, v), k.mul(u, v), w]
            }
        };
        Ok(ProjectivePoint::new(k.clone(), coords)?)
    }

    /// All sixteen nodes in label order.
    pub fn nodes(&self) -> Result<Vec<Node<F>>, KummerError> {
        NodeLabel::all()
            .into_iter()
            .map(|label| {
                Ok(Node {
                    label,
                    point: self.node_coordinates(label)?,
                })
            })
            .collect()
    }
}

impl Genus2Curve<Rationals> {
    pub fn from_integers(roots: &[i64]) -> Result<Self, KummerError> {
        Self::new(Rationals, roots.iter().map(|&r| Rationals.from_i64(r)).collect())
    }

    /// Reduction modulo `p`; fails if two roots collide mod `p`.
    pub fn reduce(&self, field: PrimeField) -> Result<Genus2Curve<PrimeField>, KummerError> {
        let roots = self
            .roots
            .iter()
            .map(|r| field.from_rational(r))
            .collect::<Result<Vec<_>, _>>()?;
        Genus2Curve::new(field, roots)
    }
}

fn expand_monic<F: Field>(k: &F, roots: &[F::Elem]) -> Vec<F::Elem> {
    // Coefficients low degree first; multiply by (x - r) for each root.
    let mut c = vec![k.one()];
    for r in roots {
        let mut next = vec![k.zero(); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] = k.add(&next[i + 1], a);
            next[i] = k.sub(&next[i], &k.mul(a, r));
        }
        c = next;
    }
    c
}

/// A labelled node with its point in `P^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Node<F: Field> {
    pub label: NodeLabel,
    pub point: ProjectivePoint<F>,
}

/// A homogeneous quartic in `X, Y, Z, W` over a prime field.
#[derive(Debug, Clone, PartialEq)]
pub struct KummerQuartic {
    f: SparsePolynomial<PrimeField>,
}

pub const VARIABLES: [&str; 4] = ["X", "Y", "Z", "W"];

impl KummerQuartic {
    pub fn new(f: SparsePolynomial<PrimeField>) -> Result<Self, KummerError> {
        if f.ring().nvars() != 4 || f.is_zero() || !f.is_homogeneous() || f.total_degree() != Some(4) {
            return Err(KummerError::NotAQuartic);
        }
        Ok(KummerQuartic { f })
    }

    /// Parses the quartic in the ring `F_p[X, Y, Z, W]`.
    pub fn parse(field: PrimeField, text: &str) -> Result<Self, KummerError> {
        let ring = PolyRing::new(field, &VARIABLES);
        Self::new(ring.parse(text)?)
    }

    pub fn polynomial(&self) -> &SparsePolynomial<PrimeField> {
        &self.f
    }

    pub fn ring(&self) -> &Arc<PolyRing<PrimeField>> {
        self.f.ring()
    }

    pub fn field(&self) -> PrimeField {
        *self.f.field()
    }

    /// `f` followed by its four partial derivatives.
    pub fn singular_locus_generators(&self) -> Vec<SparsePolynomial<PrimeField>> {
        let mut gens = vec![self.f.clone()];
        gens.extend(self.f.partial_derivatives());
        gens
    }
}

/// Whether `f` and all its partials vanish at `pt`.
pub fn verify_node(q: &KummerQuartic, pt: &ProjectivePoint<PrimeField>) -> bool {
    q.singular_locus_generators()
        .iter()
        .all(|g| g.evaluate(pt).map(|v| v == 0).unwrap_or(false))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeEvidence {
    pub label: String,
    pub point: String,
    pub on_surface: bool,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularLocusEvidence {
    pub basis_size: usize,
    pub codim: Option<usize>,
    pub degree: Option<i64>,
    pub note: Option<String>,
}

/// Outcome of [`verify_sixteen_nodes`] with all intermediate evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeVerificationReport {
    pub prime: u64,
    pub nodes: Vec<NodeEvidence>,
    pub pairwise_distinct: bool,
    pub singular_locus: SingularLocusEvidence,
    pub passed: bool,
    pub first_failure: Option<String>,
}

pub const EXPECTED_NODE_CODIM: usize = 3;
pub const EXPECTED_NODE_DEGREE: i64 = 16;

/// Checks that the sixteen formula nodes are distinct singular points of
/// `q` and that the singular locus has codimension 3 and degree 16.
pub fn verify_sixteen_nodes(q: &KummerQuartic, curve: &Genus2Curve<PrimeField>) -> Result<NodeVerificationReport, KummerError> {
    let nodes = curve.nodes()?;
    let mut failures = Vec::new();

    let mut pairwise_distinct = true;
    'outer: for (a, na) in nodes.iter().enumerate() {
        for nb in &nodes[a + 1..] {
            if na.point == nb.point {
                pairwise_distinct = false;
                failures.push(format!(
                    "nodes {} and {} coincide at {}",
                    na.label, nb.label, na.point
                ));
                break 'outer;
            }
        }
    }

    let evidence: Vec<NodeEvidence> = nodes
        .iter()
        .map(|n| {
            let on_surface = q.polynomial().evaluate(&n.point).map(|v| v == 0).unwrap_or(false);
            NodeEvidence {
                label: n.label.to_string(),
                point: n.point.to_string(),
                on_surface,
                singular: verify_node(q, &n.point),
            }
        })
        .collect();
    if let Some(bad) = evidence.iter().find(|e| !e.singular) {
        failures.push(format!("node {} at {} is not a singular point", bad.label, bad.point));
    }

    let gb = buchberger(&q.singular_locus_generators(), &MonomialOrder::grevlex(4))
        .expect("generators share one ring");
    let singular_locus = match hilbert_degree_codim(&gb) {
        Ok(HilbertInvariants { codim, degree, .. }) => {
            if (codim, degree) != (EXPECTED_NODE_CODIM, EXPECTED_NODE_DEGREE) {
                failures.push(format!(
                    "singular locus has codim {codim} and degree {degree}, expected {EXPECTED_NODE_CODIM} and {EXPECTED_NODE_DEGREE}"
                ));
            }
            SingularLocusEvidence {
                basis_size: gb.len(),
                codim: Some(codim),
                degree: Some(degree),
                note: None,
            }
        }
        Err(e) => {
            failures.push(format!("singular locus: {e}"));
            SingularLocusEvidence {
                basis_size: gb.len(),
                codim: None,
                degree: None,
                note: Some(e.to_string()),
            }
        }
    };

    Ok(NodeVerificationReport {
        prime: q.field().modulus(),
        nodes: evidence,
        pairwise_distinct,
        singular_locus,
        passed: failures.is_empty(),
        first_failure: failures.into_iter().next(),
    })
}

/// Parses a root literal: an integer or `a/b`.
pub fn parse_root(text: &str) -> Result<BigRational, KummerError> {
    let bad = || KummerError::InvalidLabel(format!("root {text:?}"));
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n = n.trim().parse::<num_bigint::BigInt>().map_err(|_| bad())?;
            let d = d.trim().parse::<num_bigint::BigInt>().map_err(|_| bad())?;
            if d == 0.into() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}
