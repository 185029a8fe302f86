//! The rank-17 Picard Q-space of the Kummer surface spanned by the pulled
//! back plane class `L` and the sixteen exceptional curves, with tropes,
//! the switch involution `theta*`, and the even-eight test.
//!
//! Basis order is `L, E0, E12, E13, ..., E56`. The pairing is `L^2 = 4`,
//! `L.E = 0`, `E_a.E_b = -2 delta_ab`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactalg::{ExactError, HermiteBasis, IntegerMatrix};
use crate::kummer::NodeLabel;

pub const RANK: usize = 17;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PicError {
    #[error("class expression, at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid trope label {0:?}")]
    InvalidTrope(String),
    #[error("class {0} has a coordinate with denominator other than 1 or 2")]
    NotHalfIntegral(String),
    #[error("an even eight needs 8 distinct node labels, got {0}")]
    EvenEightCardinality(usize),
    #[error("generator list is empty")]
    NoGenerators,
    #[error("polarization has square {found}, expected 2s = {expected}")]
    PolarizationMismatch { expected: String, found: String },
    #[error("s must be a positive integer")]
    InvalidParams,
    #[error("expected {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// A rational combination of `L` and the node classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    coords: Vec<BigRational>,
}

impl DivisorClass {
    pub fn zero() -> Self {
        DivisorClass {
            coords: vec![BigRational::zero(); RANK],
        }
    }

    pub fn basis(i: usize) -> Self {
        let mut d = Self::zero();
        d.coords[i] = BigRational::one();
        d
    }

    pub fn l() -> Self {
        Self::basis(0)
    }

    pub fn e(label: NodeLabel) -> Self {
        Self::basis(1 + label.index())
    }

    pub fn from_coords(coords: Vec<BigRational>) -> Result<Self, PicError> {
        if coords.len() != RANK {
            return Err(PicError::Dimension {
                expected: RANK,
                found: coords.len(),
            });
        }
        Ok(DivisorClass { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self, PicError> {
        Self::from_coords(coords.iter().map(|&c| q(c)).collect())
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn coeff_l(&self) -> &BigRational {
        &self.coords[0]
    }

    pub fn coeff_e(&self, label: NodeLabel) -> &BigRational {
        &self.coords[1 + label.index()]
    }

    pub fn add(&self, other: &Self) -> Self {
        DivisorClass {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        DivisorClass {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        DivisorClass {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        DivisorClass {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&q(c))
    }

    pub fn pairing(&self, other: &Self) -> BigRational {
        let mut acc = &self.coords[0] * &other.coords[0] * q(4);
        for (a, b) in self.coords[1..].iter().zip(&other.coords[1..]) {
            acc -= a * b * q(2);
        }
        acc
    }

    pub fn square(&self) -> BigRational {
        self.pairing(self)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Coordinates times two, as integers; fails unless every denominator
    /// divides 2.
    pub fn doubled_integer_coords(&self) -> Result<Vec<BigInt>, PicError> {
        self.coords
            .iter()
            .map(|c| {
                let d = c * q(2);
                if d.is_integer() {
                    Ok(d.to_integer())
                } else {
                    Err(PicError::NotHalfIntegral(self.to_string()))
                }
            })
            .collect()
    }

    /// Reads `a L - sum_{n in S} E_n` with integral `a`; `None` for any
    /// other shape.
    pub fn as_l_minus_nodes(&self) -> Option<(BigInt, Vec<NodeLabel>)> {
        if !self.coords[0].is_integer() {
            return None;
        }
        let mut nodes = Vec::new();
        for label in NodeLabel::all() {
            let c = self.coeff_e(label);
            if *c == q(-1) {
                nodes.push(label);
            } else if !c.is_zero() {
                return None;
            }
        }
        Some((self.coords[0].to_integer(), nodes))
    }

    /// Reads `1/2 sum_{n in S} E_n`; `None` for any other shape.
    pub fn as_half_node_sum(&self) -> Option<Vec<NodeLabel>> {
        if !self.coords[0].is_zero() {
            return None;
        }
        let mut nodes = Vec::new();
        for label in NodeLabel::all() {
            let c = self.coeff_e(label);
            if *c == half() {
                nodes.push(label);
            } else if !c.is_zero() {
                return None;
            }
        }
        Some(nodes)
    }
}

fn basis_name(i: usize) -> String {
    if i == 0 {
        "L".to_string()
    } else {
        format!("E{}", NodeLabel::all()[i - 1])
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            if a.is_one() {
            } else if a.is_integer() {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a} ")?;
            }
            write!(f, "{}", basis_name(i))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for DivisorClass {
    type Err = PicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_class(s)
    }
}

/// A trope, indexed by `[p_i]` or by `[p_i + p_j - p_6]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TropeLabel {
    Single(u8),
    /// `T_{ij6}` with `1 <= i < j <= 5`.
    Triple(u8, u8),
}

impl TropeLabel {
    pub fn single(i: u8) -> Result<Self, PicError> {
        if (1..=6).contains(&i) {
            Ok(TropeLabel::Single(i))
        } else {
            Err(PicError::InvalidTrope(i.to_string()))
        }
    }

    /// Any three distinct indices; `T_ijk = T_lmn` for complementary triples.
    pub fn triple(a: u8, b: u8, c: u8) -> Result<Self, PicError> {
        let bad = || PicError::InvalidTrope(format!("{a}{b}{c}"));
        let mut t = [a, b, c];
        t.sort_unstable();
        if t[0] < 1 || t[2] > 6 || t[0] == t[1] || t[1] == t[2] {
            return Err(bad());
        }
        if t[2] != 6 {
            let rest: Vec<u8> = (1..=5).filter(|k| !t.contains(k)).collect();
            t = [rest[0], rest[1], 6];
        }
        Ok(TropeLabel::Triple(t[0], t[1]))
    }

    /// `T1..T6, T126, T136, ..., T456`.
    pub fn all() -> Vec<TropeLabel> {
        let mut v: Vec<_> = (1..=6).map(TropeLabel::Single).collect();
        for i in 1..=5u8 {
            for j in i + 1..=5 {
                v.push(TropeLabel::Triple(i, j));
            }
        }
        v
    }

    pub fn index(self) -> usize {
        TropeLabel::all().iter().position(|&t| t == self).expect("valid trope")
    }

    /// The six nodes lying on this trope.
    pub fn nodes(self) -> Vec<NodeLabel> {
        let pair = |a: u8, b: u8| NodeLabel::Pair(a.min(b), a.max(b));
        match self {
            TropeLabel::Single(i) => {
                let mut v = vec![NodeLabel::Zero];
                v.extend((1..=6).filter(|&k| k != i).map(|k| pair(i, k)));
                v
            }
            TropeLabel::Triple(i, j) => {
                let r: Vec<u8> = (1..=5).filter(|&k| k != i && k != j).collect();
                vec![
                    pair(i, 6),
                    pair(j, 6),
                    pair(i, j),
                    pair(r[0], r[1]),
                    pair(r[1], r[2]),
                    pair(r[0], r[2]),
                ]
            }
        }
    }
}

impl fmt::Display for TropeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TropeLabel::Single(i) => write!(f, "T{i}"),
            TropeLabel::Triple(i, j) => write!(f, "T{i}{j}6"),
        }
    }
}

impl FromStr for TropeLabel {
    type Err = PicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PicError::InvalidTrope(s.to_string());
        let digits: Vec<u8> = s
            .trim()
            .trim_start_matches('T')
            .chars()
            .filter(|c| !matches!(c, '_' | '{' | '}' | ','))
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect::<Result<_, _>>()?;
        match digits.as_slice() {
            [i] => TropeLabel::single(*i).map_err(|_| bad()),
            [a, b, c] => TropeLabel::triple(*a, *b, *c).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// `T = 1/2 (L - sum of the six nodes on T)`.
pub fn trope(label: TropeLabel) -> DivisorClass {
    let mut d = DivisorClass::l();
    for n in label.nodes() {
        d = d.sub(&DivisorClass::e(n));
    }
    d.scale(&half())
}

// 2-torsion points and theta characteristics as subsets of {1..6} up to
// complement: node {i,j} is {i,j}, node 0 is the empty set; trope T_i is {i},
// T_ijk is {i,j,k}.
fn node_subset(n: NodeLabel) -> u8 {
    match n {
        NodeLabel::Zero => 0,
        NodeLabel::Pair(i, j) => (1 << (i - 1)) | (1 << (j - 1)),
    }
}

fn trope_from_subset(mut s: u8) -> TropeLabel {
    if s.count_ones() > 3 || (s.count_ones() == 3 && s & 0b100000 == 0) {
        s ^= 0b111111;
    }
    let idx: Vec<u8> = (0..6).filter(|k| s & (1 << k) != 0).map(|k| k + 1).collect();
    match idx.as_slice() {
        [i] => TropeLabel::Single(*i),
        [i, j, 6] => TropeLabel::Triple(*i, *j),
        _ => unreachable!("odd subsets only"),
    }
}

/// The switch for `beta = [p4 + p5 - p6]`: as subsets, `alpha -> alpha + {1,2,3}`.
pub fn theta_partner(n: NodeLabel) -> TropeLabel {
    trope_from_subset(node_subset(n) ^ 0b000111)
}

/// A rational linear map of the 17-dimensional space; column `c` is the
/// image of basis vector `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    columns: Vec<DivisorClass>,
}

impl Involution {
    pub fn from_images(columns: Vec<DivisorClass>) -> Result<Self, PicError> {
        if columns.len() != RANK {
            return Err(PicError::Dimension {
                expected: RANK,
                found: columns.len(),
            });
        }
        Ok(Involution { columns })
    }

    pub fn image_of_basis(&self, i: usize) -> &DivisorClass {
        &self.columns[i]
    }

    pub fn apply(&self, d: &DivisorClass) -> DivisorClass {
        let mut out = DivisorClass::zero();
        for (c, col) in d.coords().iter().zip(&self.columns) {
            if !c.is_zero() {
                out = out.add(&col.scale(c));
            }
        }
        out
    }

    /// Row-major matrix `m[r][c]`.
    pub fn matrix(&self) -> Vec<Vec<BigRational>> {
        (0..RANK)
            .map(|r| self.columns.iter().map(|col| col.coords()[r].clone()).collect())
            .collect()
    }

    /// Basis vectors `i` with `inv(inv(e_i)) != e_i`.
    pub fn involution_defects(&self) -> Vec<usize> {
        (0..RANK)
            .filter(|&i| self.apply(&self.columns[i]) != DivisorClass::basis(i))
            .collect()
    }

    pub fn is_involution(&self) -> bool {
        self.involution_defects().is_empty()
    }

    /// Basis pairs `i <= j` whose pairing is not preserved. There are
    /// `17 * 18 / 2 = 153` pairs.
    pub fn isometry_defects(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..RANK {
            for j in i..RANK {
                let before = DivisorClass::basis(i).pairing(&DivisorClass::basis(j));
                if self.columns[i].pairing(&self.columns[j]) != before {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn is_isometry(&self) -> bool {
        self.isometry_defects().is_empty()
    }
}

/// `theta*` from the node/trope swap and `theta*(L) = 3L - E0 - sum E_ij`.
pub fn build_theta_star() -> Involution {
    let mut cols = Vec::with_capacity(RANK);
    let mut l_image = DivisorClass::l().scale_int(3);
    for n in NodeLabel::all() {
        l_image = l_image.sub(&DivisorClass::e(n));
    }
    cols.push(l_image);
    for n in NodeLabel::all() {
        cols.push(trope(theta_partner(n)));
    }
    Involution { columns: cols }
}

pub fn is_invariant(inv: &Involution, d: &DivisorClass) -> bool {
    inv.apply(d) == *d
}

/// `chi(D) = 2 + D^2 / 2` on a K3 surface.
pub fn chi_k3(d: &DivisorClass) -> BigRational {
    q(2) + d.square() / q(2)
}

/// A polarization of square `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarizedSurfaceParams {
    s: u32,
}

impl PolarizedSurfaceParams {
    pub fn new(s: u32) -> Result<Self, PicError> {
        if s == 0 {
            return Err(PicError::InvalidParams);
        }
        Ok(PolarizedSurfaceParams { s })
    }

    pub fn s(&self) -> u32 {
        self.s
    }
}

/// `H.M = 3s` and `M^2 = 4s - 4`.
pub fn numerical_ulrich(p: PolarizedSurfaceParams, h: &DivisorClass, m: &DivisorClass) -> Result<bool, PicError> {
    let s = i64::from(p.s);
    let h2 = h.square();
    if h2 != q(2 * s) {
        return Err(PicError::PolarizationMismatch {
            expected: (2 * s).to_string(),
            found: h2.to_string(),
        });
    }
    Ok(h.pairing(m) == q(3 * s) && m.square() == q(4 * s - 4))
}

/// `H_X = 2L - 1/2 sum E`.
pub fn polarization() -> DivisorClass {
    let mut d = DivisorClass::l().scale_int(2);
    for n in NodeLabel::all() {
        d = d.sub(&DivisorClass::e(n).scale(&half()));
    }
    d
}

/// The twelve nodes subtracted from `3L` in the Ulrich class of the
/// degree-8 Kummer surface.
pub const DEFAULT_M_NODES: [NodeLabel; 12] = [
    NodeLabel::Zero,
    NodeLabel::Pair(1, 6),
    NodeLabel::Pair(2, 6),
    NodeLabel::Pair(3, 6),
    NodeLabel::Pair(4, 6),
    NodeLabel::Pair(5, 6),
    NodeLabel::Pair(1, 2),
    NodeLabel::Pair(1, 3),
    NodeLabel::Pair(1, 4),
    NodeLabel::Pair(1, 5),
    NodeLabel::Pair(2, 4),
    NodeLabel::Pair(3, 5),
];

/// `3L - sum_{n in labels} E_n`.
pub fn three_l_minus(labels: &[NodeLabel]) -> DivisorClass {
    labels
        .iter()
        .fold(DivisorClass::l().scale_int(3), |d, &n| d.sub(&DivisorClass::e(n)))
}

/// `L`, the sixteen nodes and the sixteen tropes.
pub fn default_generators() -> Vec<DivisorClass> {
    let mut g = vec![DivisorClass::l()];
    g.extend(NodeLabel::all().into_iter().map(DivisorClass::e));
    g.extend(TropeLabel::all().into_iter().map(trope));
    g
}

pub fn node_generators() -> Vec<DivisorClass> {
    NodeLabel::all().into_iter().map(DivisorClass::e).collect()
}

/// Membership of `1/2 sum E` over eight nodes in the integer span of a
/// generator set, decided on doubled coordinates.
#[derive(Debug, Clone)]
pub struct EvenEightTester {
    basis: HermiteBasis,
}

impl EvenEightTester {
    pub fn new(generators: &[DivisorClass]) -> Result<Self, PicError> {
        if generators.is_empty() {
            return Err(PicError::NoGenerators);
        }
        let rows = generators
            .iter()
            .map(DivisorClass::doubled_integer_coords)
            .collect::<Result<Vec<_>, _>>()?;
        let m = IntegerMatrix::new(RANK, rows)?;
        Ok(EvenEightTester {
            basis: HermiteBasis::new(&m),
        })
    }

    pub fn test(&self, labels: &[NodeLabel]) -> Result<bool, PicError> {
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if labels.len() != 8 || sorted.len() != 8 {
            return Err(PicError::EvenEightCardinality(sorted.len()));
        }
        // Doubling 1/2 sum E gives 0/1 coordinates.
        let mut target = vec![BigInt::zero(); RANK];
        for n in sorted {
            target[1 + n.index()] = BigInt::one();
        }
        Ok(self.basis.contains(&target)?)
    }
}

pub fn even_eight_test(labels: &[NodeLabel], generators: &[DivisorClass]) -> Result<bool, PicError> {
    EvenEightTester::new(generators)?.test(labels)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenEightSweep {
    pub subsets_checked: usize,
    /// Positive subsets as bitmasks over node indices.
    pub positives: Vec<u16>,
    /// Positive subsets whose complement tested negative.
    pub complement_failures: Vec<u16>,
}

impl EvenEightSweep {
    pub fn complement_closed(&self) -> bool {
        self.complement_failures.is_empty()
    }
}

pub fn labels_of_mask(mask: u16) -> Vec<NodeLabel> {
    NodeLabel::all()
        .into_iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .map(|(_, n)| n)
        .collect()
}

/// Runs the tester over all `C(16, 8) = 12870` eight-subsets.
pub fn even_eight_sweep(tester: &EvenEightTester) -> Result<EvenEightSweep, PicError> {
    let mut positive = std::collections::BTreeSet::new();
    let mut checked = 0;
    for mask in 0..=u16::MAX {
        if mask.count_ones() != 8 {
            continue;
        }
        checked += 1;
        if tester.test(&labels_of_mask(mask))? {
            positive.insert(mask);
        }
    }
    let complement_failures = positive.iter().copied().filter(|m| !positive.contains(&!m)).collect();
    Ok(EvenEightSweep {
        subsets_checked: checked,
        positives: positive.into_iter().collect(),
        complement_failures,
    })
}

/// Node/trope pairings; row per node, column per trope in
/// [`TropeLabel::all`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceTable {
    pub entries: Vec<Vec<i64>>,
}

impl IncidenceTable {
    pub fn row_sums(&self) -> Vec<i64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<i64> {
        (0..16).map(|c| self.entries.iter().map(|r| r[c]).sum()).collect()
    }

    /// Every entry is 0 or 1 and every row and column has six ones.
    pub fn is_16_6(&self) -> bool {
        self.entries.iter().flatten().all(|&x| x == 0 || x == 1)
            && self.row_sums().iter().all(|&s| s == 6)
            && self.column_sums().iter().all(|&s| s == 6)
    }
}

pub fn incidence_configuration() -> IncidenceTable {
    let tropes: Vec<DivisorClass> = TropeLabel::all().into_iter().map(trope).collect();
    let entries = NodeLabel::all()
        .into_iter()
        .map(|n| {
            let e = DivisorClass::e(n);
            tropes
                .iter()
                .map(|t| {
                    let v = e.pairing(t);
                    // Non-integral values can't occur for these classes;
                    // mark them so the table is rejected.
                    if v.is_integer() {
                        v.to_integer().to_i64().unwrap_or(i64::MIN)
                    } else {
                        i64::MIN
                    }
                })
                .collect()
        })
        .collect();
    IncidenceTable { entries }
}

// Class expressions: `2L - 1/2(E13 + E14) + T246 - 3*E0`.
struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

fn parse_class(text: &str) -> Result<DivisorClass, PicError> {
    let mut p = ExprParser { s: text.as_bytes(), pos: 0 };
    let d = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(d)
}

impl ExprParser<'_> {
    fn err(&self, msg: &str) -> PicError {
        PicError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits")
    }

    fn expr(&mut self) -> Result<DivisorClass, PicError> {
        let mut acc = DivisorClass::zero();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = acc.add(&t.scale_int(sign));
            sign = match self.peek() {
                Some(b'-') => -1,
                Some(b'+') => 1,
                _ => return Ok(acc),
            };
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Result<Option<BigRational>, PicError> {
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Ok(None);
        }
        let n: BigInt = self.digits().parse().expect("digits");
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.ws();
            let d = self.digits();
            if d.is_empty() {
                return Err(self.err("expected denominator"));
            }
            let d: BigInt = d.parse().expect("digits");
            if d.is_zero() {
                return Err(self.err("zero denominator"));
            }
            return Ok(Some(BigRational::new(n, d)));
        }
        Ok(Some(BigRational::from_integer(n)))
    }

    fn term(&mut self) -> Result<DivisorClass, PicError> {
        let coeff = self.number()?;
        if coeff.is_some() && self.peek() == Some(b'*') {
            self.pos += 1;
        }
        let atom = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Some(inner)
            }
            Some(b'L' | b'E' | b'T') => Some(self.generator()?),
            _ => None,
        };
        match (coeff, atom) {
            (Some(c), Some(a)) => Ok(a.scale(&c)),
            (None, Some(a)) => Ok(a),
            (Some(c), None) if c.is_zero() => Ok(DivisorClass::zero()),
            (Some(_), None) => Err(self.err("a nonzero constant is not a divisor class")),
            (None, None) => Err(self.err("expected a term")),
        }
    }

    fn generator(&mut self) -> Result<DivisorClass, PicError> {
        let start = self.pos;
        let head = self.s[self.pos];
        self.pos += 1;
        if head == b'L' {
            return Ok(DivisorClass::l());
        }
        if self.s.get(self.pos) == Some(&b'_') {
            self.pos += 1;
        }
        let digits = self.digits().to_string();
        if digits.is_empty() {
            self.pos = start;
            return Err(self.err("expected a label after generator name"));
        }
        let fail = |p: &Self| PicError::Parse {
            pos: start,
            msg: format!("unknown generator {}", String::from_utf8_lossy(&p.s[start..p.pos])),
        };
        if head == b'E' {
            let n: NodeLabel = digits.parse().map_err(|_| fail(self))?;
            Ok(DivisorClass::e(n))
        } else {
            let t: TropeLabel = digits.parse().map_err(|_| fail(self))?;
            Ok(trope(t))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> DivisorClass {
        s.parse().unwrap()
    }

    fn n(s: &str) -> NodeLabel {
        s.parse().unwrap()
    }

    fn t(s: &str) -> TropeLabel {
        s.parse().unwrap()
    }

    fn m() -> DivisorClass {
        three_l_minus(&DEFAULT_M_NODES)
    }

    #[test]
    fn pairings() {
        assert_eq!(c("L").square(), q(4));
        assert_eq!(c("E12").pairing(&c("E13")), q(0));
        assert_eq!(c("E12").square(), q(-2));
        assert_eq!(polarization().square(), q(8));
    }

    #[test]
    fn trope_examples() {
        let t6 = trope(t("T6"));
        assert_eq!(t6.square(), q(-2));
        assert_eq!(t6.pairing(&c("L")), q(2));
        assert_eq!(trope(t("T246")).pairing(&c("E24")), q(1));
        for tr in TropeLabel::all() {
            assert_eq!(trope(tr).square(), q(-2));
            assert_eq!(trope(tr).pairing(&c("L")), q(2));
        }
        // L = 2T6 + E0 + E16 + E26 + E36 + E46 + E56.
        assert_eq!(c("2T6 + E0 + E16 + E26 + E36 + E46 + E56"), c("L"));
    }

    #[test]
    fn trope_labels() {
        assert_eq!(t("T123"), TropeLabel::Triple(4, 5));
        assert_eq!(t("T642"), TropeLabel::Triple(2, 4));
        assert_eq!(t("T_{356}"), TropeLabel::Triple(3, 5));
        assert!("T7".parse::<TropeLabel>().is_err());
        assert!("T112".parse::<TropeLabel>().is_err());
        assert!("T12".parse::<TropeLabel>().is_err());
        let all = TropeLabel::all();
        assert_eq!(all.len(), 16);
        for (k, tr) in all.iter().enumerate() {
            assert_eq!(tr.index(), k);
            assert_eq!(tr.to_string().parse::<TropeLabel>().unwrap(), *tr);
        }
    }

    #[test]
    fn swap_table() {
        let table = [
            ("0", "T456"),
            ("12", "T3"),
            ("13", "T2"),
            ("14", "T156"),
            ("15", "T146"),
            ("16", "T236"),
            ("23", "T1"),
            ("24", "T256"),
            ("25", "T246"),
            ("26", "T136"),
            ("34", "T356"),
            ("35", "T346"),
            ("36", "T126"),
            ("45", "T6"),
            ("46", "T5"),
            ("56", "T4"),
        ];
        for (node, tr) in table {
            assert_eq!(theta_partner(n(node)), t(tr), "node {node}");
        }
        let theta = build_theta_star();
        assert_eq!(theta.apply(&c("E0")), trope(t("T456")));
        assert_eq!(theta.apply(&theta.apply(&c("E12"))), c("E12"));
        assert_eq!(theta.apply(&c("L")).square(), q(4));
    }

    #[test]
    fn theta_is_an_isometric_involution_swapping_nodes_and_tropes() {
        let theta = build_theta_star();
        assert!(theta.is_involution());
        assert!(theta.is_isometry());
        let tropes: Vec<_> = TropeLabel::all().into_iter().map(trope).collect();
        for node in NodeLabel::all() {
            assert!(tropes.contains(&theta.apply(&DivisorClass::e(node))));
        }
        for tr in &tropes {
            assert!(node_generators().contains(&theta.apply(tr)));
        }
    }

    #[test]
    fn ulrich_numerics() {
        let h = polarization();
        let p = PolarizedSurfaceParams::new(4).unwrap();
        assert!(numerical_ulrich(p, &h, &m()).unwrap());
        assert!(!numerical_ulrich(p, &h, &h).unwrap());
        let even_class = c("2L - 1/2(E13+E14+E15+E16+E23+E24+E25+E26)");
        assert!(numerical_ulrich(p, &h, &even_class).unwrap());
        let p3 = PolarizedSurfaceParams::new(3).unwrap();
        assert!(matches!(numerical_ulrich(p3, &h, &m()), Err(PicError::PolarizationMismatch { .. })));
        assert!(PolarizedSurfaceParams::new(0).is_err());
    }

    #[test]
    fn riemann_roch() {
        let h = polarization();
        assert_eq!(chi_k3(&DivisorClass::zero()), q(2));
        assert_eq!(chi_k3(&m().sub(&h)), q(0));
        assert_eq!(chi_k3(&m().sub(&h.scale_int(2))), q(0));
        assert_eq!(chi_k3(&m()), q(8));
        assert_eq!(chi_k3(&h), q(6));
    }

    #[test]
    fn invariance() {
        let theta = build_theta_star();
        assert!(is_invariant(&theta, &polarization()));
        assert!(is_invariant(&theta, &m()));
        assert!(!is_invariant(&theta, &c("E0")));
        // theta*M written out with tropes.
        assert_eq!(c("L + T6 + T1 + T246 + T356"), m());
    }

    #[test]
    fn even_eight_examples() {
        let gens = default_generators();
        let eight = |s: &str| s.split_whitespace().map(n).collect::<Vec<_>>();
        assert!(even_eight_test(&eight("13 14 15 16 23 24 25 26"), &gens).unwrap());
        assert!(!even_eight_test(&eight("0 12 13 14 15 16 23 24"), &gens).unwrap());
        assert!(!even_eight_test(&eight("13 14 15 16 23 24 25 26"), &node_generators()).unwrap());
        assert!(matches!(
            even_eight_test(&eight("13 14 15 16 23 24 25"), &gens),
            Err(PicError::EvenEightCardinality(7))
        ));
        assert!(matches!(
            even_eight_test(&eight("13 13 15 16 23 24 25 26"), &gens),
            Err(PicError::EvenEightCardinality(7))
        ));
        assert_eq!(even_eight_test(&eight("13 14 15 16 23 24 25 26"), &[]), Err(PicError::NoGenerators));
    }

    #[test]
    fn sweep_is_complement_closed() {
        let sweep = even_eight_sweep(&EvenEightTester::new(&default_generators()).unwrap()).unwrap();
        assert_eq!(sweep.subsets_checked, 12870);
        assert_eq!(sweep.positives.len(), 30);
        assert!(sweep.complement_closed());
        let nodes_only = even_eight_sweep(&EvenEightTester::new(&node_generators()).unwrap()).unwrap();
        assert!(nodes_only.positives.is_empty());
    }

    #[test]
    fn even_eight_oracle_by_hand() {
        // 2(T1 - T2) = -E13 - E14 - E15 - E16 + E23 + E24 + E25 + E26, so
        // 1/2 of the eight equals (T2 - T1) + E23 + E24 + E25 + E26.
        let lhs = c("1/2(E13+E14+E15+E16+E23+E24+E25+E26)");
        assert_eq!(lhs, c("T2 - T1 + E23 + E24 + E25 + E26"));
    }

    #[test]
    fn incidence() {
        let table = incidence_configuration();
        assert!(table.is_16_6());
        for i in 0..6 {
            assert_eq!(table.entries[0][i], 1);
        }
        assert_eq!(table.entries[n("12").index()][t("T3").index()], 0);
    }

    #[test]
    fn expressions() {
        assert_eq!(c("2L - 1/2(E13 + E14)"), c("2*L - 1/2 * E13 - 1/2 E_14"));
        assert_eq!(c("0"), DivisorClass::zero());
        assert_eq!(c("-E0+E0"), DivisorClass::zero());
        assert_eq!(c("T6"), trope(TropeLabel::Single(6)));
        assert_eq!(c("T123"), c("T456"));
        for bad in ["", "3", "2L +", "E77", "T7", "L)", "1/0 L", "X", "(L"] {
            assert!(bad.parse::<DivisorClass>().is_err(), "{bad:?}");
        }
        let h = polarization();
        assert_eq!(h.to_string().parse::<DivisorClass>().unwrap(), h);
        assert_eq!(m().to_string(), "3L - E0 - E12 - E13 - E14 - E15 - E16 - E24 - E26 - E35 - E36 - E46 - E56");
    }

    #[test]
    fn shapes() {
        let h = polarization();
        let (a, nodes) = h.scale_int(2).sub(&m()).as_l_minus_nodes().unwrap();
        assert_eq!(a, BigInt::one());
        assert_eq!(nodes, vec![n("23"), n("25"), n("34"), n("45")]);
        assert!(h.as_l_minus_nodes().is_none());
        let even_class = c("2L - 1/2(E13+E14+E15+E16+E23+E24+E25+E26)");
        let eight = even_class.sub(&h).as_half_node_sum().unwrap();
        assert_eq!(eight.len(), 8);
        assert!(eight.contains(&NodeLabel::Zero));
        assert!(m().sub(&h).as_half_node_sum().is_none());
    }
}
