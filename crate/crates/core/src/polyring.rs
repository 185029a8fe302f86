//! Sparse multivariate polynomials over an exact field.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is the
//! graded reverse lexicographic order with the first variable largest. The
//! printed form lists terms from the largest monomial down, in the same shape
//! Macaulay2 prints (`7056*X^4-2016*X^2*Y^2+...`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::exactalg::{ExactError, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("polynomials live in different rings")]
    RingMismatch,
    #[error("point has {found} coordinates, ring has {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("projective point with all coordinates zero")]
    ZeroPoint,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`, if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Lexicographic comparison with the first variable largest.
    pub fn cmp_lex(&self, other: &Monomial) -> Ordering {
        self.0.cmp(&other.0)
    }

    /// Graded reverse lexicographic comparison.
    pub fn cmp_grevlex(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_grevlex(other)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree `d` in `n` variables, largest first in
/// graded reverse lexicographic order.
pub fn monomial_basis(d: u32, n: usize) -> Vec<Monomial> {
    fn fill(rest: u32, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i + 1 == cur.len() {
            cur[i] = rest;
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in 0..=rest {
            cur[i] = e;
            fill(rest - e, i + 1, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        return if d == 0 { vec![Monomial(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    fill(d, 0, &mut vec![0; n], &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Variable names plus scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyRing<F: Field> {
    field: F,
    names: Vec<String>,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F, names: &[&str]) -> Arc<Self> {
        Arc::new(PolyRing {
            field,
            names: names.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var(self: &Arc<Self>, i: usize) -> SparsePolynomial<F> {
        SparsePolynomial::monomial(self, Monomial::var(self.nvars(), i), self.field.one())
    }

    /// Parses the `7056*X^4-2016*X^2*Y^2+...` text format. A trailing `;`
    /// and arbitrary whitespace (including newlines) are accepted.
    pub fn parse(self: &Arc<Self>, text: &str) -> Result<SparsePolynomial<F>, PolyError> {
        Parser {
            ring: self,
            src: text.as_bytes(),
            pos: 0,
        }
        .parse()
    }
}

/// A polynomial stored as monomial → nonzero coefficient.
#[derive(Debug, Clone)]
pub struct SparsePolynomial<F: Field> {
    ring: Arc<PolyRing<F>>,
    terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> PartialEq for SparsePolynomial<F> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.same_ring(other)
    }
}

impl<F: Field> SparsePolynomial<F> {
    pub fn zero(ring: &Arc<PolyRing<F>>) -> Self {
        SparsePolynomial {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<PolyRing<F>>, c: F::Elem) -> Self {
        Self::monomial(ring, Monomial::one(ring.nvars()), c)
    }

    pub fn monomial(ring: &Arc<PolyRing<F>>, m: Monomial, c: F::Elem) -> Self {
        let mut p = Self::zero(ring);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(
        ring: &Arc<PolyRing<F>>,
        terms: impl IntoIterator<Item = (Monomial, F::Elem)>,
    ) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn ring(&self) -> &Arc<PolyRing<F>> {
        &self.ring
    }

    pub fn field(&self) -> &F {
        &self.ring.field
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms from the largest monomial down.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &F::Elem)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field().zero())
    }

    /// Leading term in graded reverse lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &F::Elem)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: F::Elem) {
        assert_eq!(m.nvars(), self.ring.nvars(), "monomial arity");
        let f = self.ring.field.clone();
        if f.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = f.add(old, &c);
                if f.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let f = self.field().clone();
        SparsePolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = self.field().clone();
        if f.is_zero(c) {
            return Self::zero(&self.ring);
        }
        SparsePolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), f.mul(a, c))).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &F::Elem) -> Self {
        let f = self.field().clone();
        if f.is_zero(c) {
            return Self::zero(&self.ring);
        }
        SparsePolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), f.mul(a, c))).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let f = self.field().clone();
        let mut out = Self::zero(&self.ring);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), f.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, i: usize) -> Self {
        let f = self.field().clone();
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, f.mul(c, &f.from_i64(e as i64)));
        }
        out
    }

    /// One partial derivative per ring variable, in variable order.
    pub fn partial_derivatives(&self) -> Vec<Self> {
        (0..self.ring.nvars()).map(|i| self.partial_derivative(i)).collect()
    }

    /// Value at an affine coordinate vector.
    pub fn evaluate_affine(&self, coords: &[F::Elem]) -> Result<F::Elem, PolyError> {
        if coords.len() != self.ring.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.ring.nvars(),
                found: coords.len(),
            });
        }
        let f = self.field();
        Ok(self.terms.iter().fold(f.zero(), |acc, (m, c)| {
            let v = m
                .0
                .iter()
                .zip(coords)
                .fold(c.clone(), |v, (&e, x)| f.mul(&v, &f.pow(x, e)));
            f.add(&acc, &v)
        }))
    }

    /// Value at the normalized affine representative of a projective point.
    pub fn evaluate(&self, pt: &ProjectivePoint<F>) -> Result<F::Elem, PolyError> {
        self.evaluate_affine(pt.coords())
    }

    /// Coefficient-wise image in another ring with the same variables.
    pub fn map_coefficients<G: Field>(
        &self,
        target: &Arc<PolyRing<G>>,
        map: impl Fn(&F::Elem) -> Result<G::Elem, ExactError>,
    ) -> Result<SparsePolynomial<G>, PolyError> {
        if target.nvars() != self.ring.nvars() {
            return Err(PolyError::RingMismatch);
        }
        let mut out = SparsePolynomial::zero(target);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), map(c)?);
        }
        Ok(out)
    }

    fn check_ring(&self, other: &Self) -> Result<(), PolyError> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(PolyError::RingMismatch)
        }
    }
}

impl<F: Field> fmt::Display for SparsePolynomial<F> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let f = self.field();
        for (k, (m, c)) in self.terms().enumerate() {
            let mut coeff = f.format(c);
            let negative = coeff.starts_with('-');
            if negative {
                coeff.remove(0);
            }
            if negative {
                write!(out, "-")?;
            } else if k > 0 {
                write!(out, "+")?;
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .zip(&self.ring.names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, name)| if *e == 1 { name.clone() } else { format!("{name}^{e}") })
                .collect();
            match (coeff == "1", factors.is_empty()) {
                (_, true) => write!(out, "{coeff}")?,
                (true, false) => write!(out, "{}", factors.join("*"))?,
                (false, false) => write!(out, "{coeff}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

struct Parser<'a, F: Field> {
    ring: &'a Arc<PolyRing<F>>,
    src: &'a [u8],
    pos: usize,
}

impl<F: Field> Parser<'_, F> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digit string"))
    }

    fn parse(mut self) -> Result<SparsePolynomial<F>, PolyError> {
        let field = self.ring.field.clone();
        let mut poly = SparsePolynomial::zero(self.ring);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                None | Some(b';') if !first => break,
                None => return self.err("empty polynomial"),
                _ if first => 1,
                _ => return self.err("expected '+' or '-'"),
            };
            first = false;
            let (m, c) = self.term()?;
            let c = if sign < 0 { -c } else { c };
            poly.add_term(m, field.from_rational(&c)?);
        }
        if self.peek() == Some(b';') {
            self.pos += 1;
        }
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Monomial, BigRational), PolyError> {
        let mut coeff = BigRational::from_integer(1.into());
        let mut mono = Monomial::one(self.ring.nvars());
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_digit() => {
                    let num = self.number()?;
                    let mut q = BigRational::from_integer(num);
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let den = self.number()?;
                        if den == BigInt::from(0) {
                            return self.err("zero denominator");
                        }
                        q /= BigRational::from_integer(den);
                    }
                    coeff *= q;
                }
                Some(b) if b.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                    let Some(i) = self.ring.names.iter().position(|n| n == name) else {
                        self.pos = start;
                        return self.err(format!("unknown variable {name}"));
                    };
                    let mut e = 1u32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let n = self.number()?;
                        e = match u32::try_from(n) {
                            Ok(e) => e,
                            Err(_) => return self.err("exponent too large"),
                        };
                    }
                    mono.0[i] += e;
                }
                _ => return self.err("expected a coefficient or variable"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((mono, coeff))
    }
}

/// A point of projective space, normalized so the first nonzero coordinate is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectivePoint<F: Field> {
    field: F,
    coords: Vec<F::Elem>,
}

impl<F: Field> ProjectivePoint<F> {
    pub fn new(field: F, coords: Vec<F::Elem>) -> Result<Self, PolyError> {
        let Some(lead) = coords.iter().find(|c| !field.is_zero(c)) else {
            return Err(PolyError::ZeroPoint);
        };
        let inv = field.inv(lead)?;
        let coords = coords.iter().map(|c| field.mul(c, &inv)).collect();
        Ok(ProjectivePoint { field, coords })
    }

    pub fn from_i64(field: F, coords: &[i64]) -> Result<Self, PolyError> {
        let c = coords.iter().map(|&x| field.from_i64(x)).collect();
        Self::new(field, c)
    }

    pub fn coords(&self) -> &[F::Elem] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn map_field<G: Field>(
        &self,
        target: G,
        map: impl Fn(&F::Elem) -> Result<G::Elem, ExactError>,
    ) -> Result<ProjectivePoint<G>, PolyError> {
        let coords = self.coords.iter().map(map).collect::<Result<Vec<_>, _>>()?;
        ProjectivePoint::new(target, coords)
    }
}

impl<F: Field> fmt::Display for ProjectivePoint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| self.field.format(c)).collect();
        write!(f, "({})", parts.join(":"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{PrimeField, Rationals};

    fn ring() -> Arc<PolyRing<PrimeField>> {
        PolyRing::new(PrimeField::default(), &["X", "Y", "Z", "W"])
    }

    #[test]
    fn grevlex_order() {
        let m = |e: &[u32]| Monomial::new(e.to_vec());
        // X > Y > Z > W in degree one.
        assert!(m(&[1, 0, 0, 0]) > m(&[0, 1, 0, 0]));
        assert!(m(&[0, 0, 1, 0]) > m(&[0, 0, 0, 1]));
        // Y^2 > X*Z in grevlex (the reverse of lex).
        assert!(m(&[0, 2, 0, 0]) > m(&[1, 0, 1, 0]));
        assert_eq!(m(&[0, 2, 0, 0]).cmp_lex(&m(&[1, 0, 1, 0])), Ordering::Less);
        assert!(m(&[0, 0, 0, 2]) > m(&[1, 0, 0, 0]));
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(monomial_basis(1, 4).len(), 4);
        assert_eq!(monomial_basis(2, 4).len(), 10);
        assert_eq!(monomial_basis(4, 4).len(), 35);
        assert_eq!(monomial_basis(0, 4), vec![Monomial::one(4)]);
        let names: Vec<_> = monomial_basis(1, 4).into_iter().map(|m| m.0).collect();
        assert_eq!(names[0], vec![1, 0, 0, 0]);
        assert_eq!(names[3], vec![0, 0, 0, 1]);
    }

    #[test]
    fn parse_and_print_round_trip() {
        let r = ring();
        let p = r.parse("7056*X^4-2016*X^2*Y^2+144*Y^4\n -4*X*Z*W^2;").unwrap();
        assert_eq!(p.num_terms(), 4);
        assert_eq!(p.to_string(), "7056*X^4-2016*X^2*Y^2+144*Y^4-4*X*Z*W^2");
        assert_eq!(r.parse(&p.to_string()).unwrap(), p);
        assert_eq!(r.parse("-X+X").unwrap().to_string(), "0");
        assert_eq!(r.parse("1/2*X").unwrap().to_string(), "-16001*X");
    }

    #[test]
    fn parse_errors() {
        let r = ring();
        assert!(matches!(r.parse("X+Q"), Err(PolyError::Parse { .. })));
        assert!(matches!(r.parse(""), Err(PolyError::Parse { .. })));
        assert!(matches!(r.parse("X Y"), Err(PolyError::Parse { .. })));
        assert!(matches!(r.parse("X^"), Err(PolyError::Parse { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let r = ring();
        let f = *r.field();
        let pt = ProjectivePoint::from_i64(f, &[1, 1, -2, -44]).unwrap();
        assert_eq!(r.var(0).evaluate(&pt).unwrap(), 1);
        let q = r.parse("X^2+Y^2").unwrap();
        let e1 = ProjectivePoint::from_i64(f, &[1, 0, 0, 0]).unwrap();
        assert_eq!(q.evaluate(&e1).unwrap(), 1);
        assert!(matches!(
            q.evaluate_affine(&[1, 2]),
            Err(PolyError::DimensionMismatch { expected: 4, found: 2 })
        ));
    }

    #[test]
    fn derivative_examples() {
        let r = ring();
        let d = r.var(0).partial_derivatives();
        assert_eq!(d[0].to_string(), "1");
        assert!(d[1..].iter().all(SparsePolynomial::is_zero));
        let d = r.parse("X^4").unwrap().partial_derivatives();
        assert_eq!(d[0].to_string(), "4*X^3");
        assert!(d[1..].iter().all(SparsePolynomial::is_zero));
    }

    #[test]
    fn projective_normalization() {
        let q = Rationals;
        let p = ProjectivePoint::from_i64(q, &[0, 2, 4, -6]).unwrap();
        assert_eq!(p.to_string(), "(0:1:2:-3)");
        assert_eq!(ProjectivePoint::from_i64(q, &[0, 0, 0, 0]), Err(PolyError::ZeroPoint));
    }

    #[test]
    fn ring_mismatch() {
        let a = ring();
        let b = PolyRing::new(PrimeField::default(), &["a", "b", "c", "d"]);
        assert_eq!(a.var(0).add(&b.var(0)), Err(PolyError::RingMismatch));
    }
}
