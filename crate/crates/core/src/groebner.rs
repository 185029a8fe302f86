//! Buchberger's algorithm, normal forms and Hilbert-series invariants.
//!
//! Pair selection uses the normal strategy (smallest lcm degree first, ties
//! broken by lexicographic comparison of the lcm, then by pair indices). The
//! product criterion and Buchberger's chain criterion prune S-pairs.

use std::cmp::Ordering;
use std::sync::Arc;

use thiserror::Error;

use crate::exactalg::{ExactError, Field};
use crate::polyring::{Monomial, PolyError, PolyRing, SparsePolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("polynomials live in different rings")]
    RingMismatch,
    #[error("ideal is not homogeneous")]
    NonHomogeneous,
    #[error("ideal is the whole ring")]
    UnitIdeal,
    #[error("empty generator list")]
    NoGenerators,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

impl From<PolyError> for GroebnerError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::Exact(e) => GroebnerError::Exact(e),
            _ => GroebnerError::RingMismatch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    GrevLex,
    Lex,
}

/// A monomial order: a kind plus variable precedence (`precedence[0]` is
/// the largest variable).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialOrder {
    kind: OrderKind,
    precedence: Vec<usize>,
}

impl MonomialOrder {
    pub fn grevlex(nvars: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::GrevLex,
            precedence: (0..nvars).collect(),
        }
    }

    pub fn lex(nvars: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::Lex,
            precedence: (0..nvars).collect(),
        }
    }

    /// Order with a custom variable precedence, which must be a permutation.
    pub fn with_precedence(kind: OrderKind, precedence: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; precedence.len()];
        for &v in &precedence {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return None;
            }
        }
        Some(MonomialOrder { kind, precedence })
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn nvars(&self) -> usize {
        self.precedence.len()
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (ea, eb) = (a.exponents(), b.exponents());
        let lex = || {
            for &v in &self.precedence {
                match ea[v].cmp(&eb[v]) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        };
        match self.kind {
            OrderKind::Lex => lex(),
            OrderKind::GrevLex => a.degree().cmp(&b.degree()).then_with(|| {
                for &v in self.precedence.iter().rev() {
                    match ea[v].cmp(&eb[v]) {
                        Ordering::Equal => continue,
                        o => return o.reverse(),
                    }
                }
                Ordering::Equal
            }),
        }
    }
}

/// Terms sorted strictly decreasing in a fixed monomial order.
#[derive(Debug, Clone, PartialEq)]
struct Poly<E> {
    terms: Vec<(Monomial, E)>,
}

impl<E: Clone> Poly<E> {
    fn from_sparse<F: Field<Elem = E>>(p: &SparsePolynomial<F>, order: &MonomialOrder) -> Self {
        let mut terms: Vec<(Monomial, E)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Poly { terms }
    }

    fn to_sparse<F: Field<Elem = E>>(&self, ring: &Arc<PolyRing<F>>) -> SparsePolynomial<F> {
        SparsePolynomial::from_terms(ring, self.terms.iter().cloned())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }
}

/// `a - c * m * b`, merging two sorted term lists.
fn sub_scaled<F: Field>(
    field: &F,
    order: &MonomialOrder,
    a: &[(Monomial, F::Elem)],
    c: &F::Elem,
    m: &Monomial,
    b: &[(Monomial, F::Elem)],
) -> Vec<(Monomial, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut i = 0;
    let mut bs = b.iter().map(|(bm, bc)| (bm.mul(m), field.neg(&field.mul(bc, c)))).peekable();
    while i < a.len() || bs.peek().is_some() {
        let ord = match (a.get(i), bs.peek()) {
            (Some(x), Some(y)) => order.cmp(&x.0, &y.0),
            (Some(_), None) => Ordering::Greater,
            _ => Ordering::Less,
        };
        match ord {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => out.push(bs.next().expect("peeked")),
            Ordering::Equal => {
                let (_, y) = bs.next().expect("peeked");
                let s = field.add(&a[i].1, &y);
                if !field.is_zero(&s) {
                    out.push((a[i].0.clone(), s));
                }
                i += 1;
            }
        }
    }
    out
}

fn make_monic<F: Field>(field: &F, p: &mut Poly<F::Elem>) {
    if let Some((_, lc)) = p.terms.first() {
        let inv = field.inv(lc).expect("leading coefficient is nonzero");
        for (_, c) in p.terms.iter_mut() {
            *c = field.mul(c, &inv);
        }
    }
}

/// Full multivariate division remainder of `f` by `divisors` (all monic).
fn reduce_full<F: Field>(
    field: &F,
    order: &MonomialOrder,
    f: &Poly<F::Elem>,
    divisors: &[Poly<F::Elem>],
) -> Poly<F::Elem> {
    let mut rest = f.terms.clone();
    let mut rem = Vec::new();
    while let Some((m, c)) = rest.first().cloned() {
        match divisors.iter().find(|g| g.lm().divides(&m)) {
            Some(g) => {
                let q = m.div(g.lm()).expect("divisible");
                rest = sub_scaled(field, order, &rest, &c, &q, &g.terms);
            }
            None => {
                rem.push(rest.remove(0));
            }
        }
    }
    Poly { terms: rem }
}

fn s_poly<F: Field>(field: &F, order: &MonomialOrder, f: &Poly<F::Elem>, g: &Poly<F::Elem>) -> Poly<F::Elem> {
    let lcm = f.lm().lcm(g.lm());
    let mf = lcm.div(f.lm()).expect("lcm");
    let mg = lcm.div(g.lm()).expect("lcm");
    let inv_f = field.inv(&f.terms[0].1).expect("nonzero");
    let inv_g = field.inv(&g.terms[0].1).expect("nonzero");
    let a: Vec<_> = f.terms.iter().map(|(m, c)| (m.mul(&mf), field.mul(c, &inv_f))).collect();
    Poly {
        terms: sub_scaled(field, order, &a, &inv_g, &mg, &g.terms),
    }
}

/// A Gröbner basis together with its order.
#[derive(Debug, Clone)]
pub struct GroebnerBasis<F: Field> {
    ring: Arc<PolyRing<F>>,
    order: MonomialOrder,
    polys: Vec<Poly<F::Elem>>,
    reduced: bool,
}

impl<F: Field> GroebnerBasis<F> {
    pub fn ring(&self) -> &Arc<PolyRing<F>> {
        &self.ring
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn generators(&self) -> Vec<SparsePolynomial<F>> {
        self.polys.iter().map(|p| p.to_sparse(&self.ring)).collect()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.polys.iter().map(|p| p.lm().clone()).collect()
    }

    /// Whether the basis is `{1}`.
    pub fn is_unit(&self) -> bool {
        self.polys.iter().any(|p| p.lm().degree() == 0)
    }

    /// S-polynomial of generators `i` and `j`.
    pub fn s_polynomial(&self, i: usize, j: usize) -> SparsePolynomial<F> {
        s_poly(self.ring.field(), &self.order, &self.polys[i], &self.polys[j]).to_sparse(&self.ring)
    }

    pub fn normal_form(&self, f: &SparsePolynomial<F>) -> Result<SparsePolynomial<F>, GroebnerError> {
        if !f.same_ring(&SparsePolynomial::zero(&self.ring)) {
            return Err(GroebnerError::RingMismatch);
        }
        let p = Poly::from_sparse(f, &self.order);
        Ok(reduce_full(self.ring.field(), &self.order, &p, &self.polys).to_sparse(&self.ring))
    }

    pub fn contains(&self, f: &SparsePolynomial<F>) -> Result<bool, GroebnerError> {
        Ok(self.normal_form(f)?.is_zero())
    }
}

#[derive(Debug, Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn buchberger<F: Field>(
    gens: &[SparsePolynomial<F>],
    order: &MonomialOrder,
) -> Result<GroebnerBasis<F>, GroebnerError> {
    let first = gens.first().ok_or(GroebnerError::NoGenerators)?;
    let ring = first.ring().clone();
    if gens.iter().any(|g| !g.same_ring(first)) {
        return Err(GroebnerError::RingMismatch);
    }
    let field = ring.field().clone();

    let mut basis: Vec<Poly<F::Elem>> = Vec::new();
    let mut pending: Vec<Pair> = Vec::new();
    let mut inputs: Vec<Poly<F::Elem>> = gens
        .iter()
        .map(|g| Poly::from_sparse(g, order))
        .filter(|p| !p.is_zero())
        .collect();
    inputs.sort_by(|a, b| order.cmp(a.lm(), b.lm()));

    let push = |basis: &mut Vec<Poly<F::Elem>>, pending: &mut Vec<Pair>, mut h: Poly<F::Elem>| {
        make_monic(&field, &mut h);
        let k = basis.len();
        for (i, g) in basis.iter().enumerate() {
            pending.push(Pair {
                i,
                j: k,
                lcm: g.lm().lcm(h.lm()),
            });
        }
        basis.push(h);
    };

    for p in inputs {
        let h = reduce_full(&field, order, &p, &basis);
        if !h.is_zero() {
            push(&mut basis, &mut pending, h);
        }
    }

    while !pending.is_empty() {
        let pick = (0..pending.len())
            .min_by(|&a, &b| {
                let (pa, pb) = (&pending[a], &pending[b]);
                pa.lcm
                    .degree()
                    .cmp(&pb.lcm.degree())
                    .then_with(|| pa.lcm.cmp_lex(&pb.lcm))
                    .then_with(|| (pa.i, pa.j).cmp(&(pb.i, pb.j)))
            })
            .expect("nonempty");
        let pair = pending.swap_remove(pick);
        let (gi, gj) = (&basis[pair.i], &basis[pair.j]);
        if gi.lm().is_coprime(gj.lm()) {
            continue;
        }
        let is_pending = |a: usize, b: usize| {
            let (a, b) = (a.min(b), a.max(b));
            pending.iter().any(|p| p.i == a && p.j == b)
        };
        let chain = (0..basis.len()).any(|k| {
            k != pair.i
                && k != pair.j
                && basis[k].lm().divides(&pair.lcm)
                && !is_pending(pair.i, k)
                && !is_pending(pair.j, k)
        });
        if chain {
            continue;
        }
        let s = s_poly(&field, order, gi, gj);
        let h = reduce_full(&field, order, &s, &basis);
        if !h.is_zero() {
            push(&mut basis, &mut pending, h);
        }
    }

    Ok(GroebnerBasis {
        polys: interreduce(&field, order, basis),
        ring,
        order: order.clone(),
        reduced: true,
    })
}

/// Minimalizes and fully interreduces a Gröbner basis.
fn interreduce<F: Field>(field: &F, order: &MonomialOrder, mut basis: Vec<Poly<F::Elem>>) -> Vec<Poly<F::Elem>> {
    basis.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    let mut minimal: Vec<Poly<F::Elem>> = Vec::new();
    for p in basis {
        if !minimal.iter().any(|q| q.lm().divides(p.lm())) {
            minimal.push(p);
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<_> = minimal
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, p)| p.clone())
            .collect();
        let head = Poly {
            terms: minimal[k].terms[..1].to_vec(),
        };
        let tail = Poly {
            terms: minimal[k].terms[1..].to_vec(),
        };
        let mut reduced = head;
        reduced.terms.extend(reduce_full(field, order, &tail, &others).terms);
        make_monic(field, &mut reduced);
        out.push(reduced);
    }
    out
}

pub fn normal_form<F: Field>(
    f: &SparsePolynomial<F>,
    g: &GroebnerBasis<F>,
) -> Result<SparsePolynomial<F>, GroebnerError> {
    g.normal_form(f)
}

/// Whether `f` lies in the ideal generated by `gens` (grevlex basis).
pub fn ideal_membership<F: Field>(f: &SparsePolynomial<F>, gens: &[SparsePolynomial<F>]) -> Result<bool, GroebnerError> {
    let gb = buchberger(gens, &MonomialOrder::grevlex(f.ring().nvars()))?;
    gb.contains(f)
}

/// Numerator `N(t)` of the Hilbert series `N(t) / (1 - t)^n` of
/// `k[x_1..x_n] / I` for a monomial ideal `I`, as coefficients in `t`.
///
/// Splits on a variable shared by two generators:
/// `N(I) = N(I + x) + t * N(I : x)`.
pub fn hilbert_numerator(gens: &[Monomial]) -> Vec<i64> {
    let gens = minimalize(gens.to_vec());
    let Some(n) = gens.first().map(Monomial::nvars) else {
        return vec![1];
    };
    let shared = (0..n)
        .map(|v| (v, gens.iter().filter(|m| m.exponents()[v] > 0).count()))
        .filter(|&(_, c)| c >= 2)
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    let Some((v, _)) = shared else {
        // Pairwise coprime: a complete intersection.
        return gens.iter().fold(vec![1], |acc, m| {
            let mut factor = vec![0; m.degree() as usize + 1];
            factor[0] = 1;
            factor[m.degree() as usize] -= 1;
            poly_mul(&acc, &factor)
        });
    };
    let x = Monomial::var(n, v);
    let mut plus = gens.clone();
    plus.push(x.clone());
    let colon: Vec<Monomial> = gens
        .iter()
        .map(|m| {
            let mut e = m.exponents().to_vec();
            e[v] = e[v].saturating_sub(1);
            Monomial::new(e)
        })
        .collect();
    let a = hilbert_numerator(&plus);
    let mut b = vec![0];
    b.extend(hilbert_numerator(&colon));
    poly_add(&a, &b)
}

fn minimalize(mut gens: Vec<Monomial>) -> Vec<Monomial> {
    gens.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp_lex(b)));
    gens.dedup();
    let mut out: Vec<Monomial> = Vec::new();
    for m in gens {
        if !out.iter().any(|g| g.divides(&m)) {
            out.push(m);
        }
    }
    out
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_add(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    trim(out)
}

fn trim(mut v: Vec<i64>) -> Vec<i64> {
    while v.len() > 1 && *v.last().expect("nonempty") == 0 {
        v.pop();
    }
    v
}

/// Codimension and degree read off a Hilbert series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertInvariants {
    pub codim: usize,
    pub degree: i64,
    /// Krull dimension of the quotient ring.
    pub krull_dim: usize,
}

/// Codimension and degree of a homogeneous ideal from its reduced Gröbner
/// basis. A reduced set of `k` points in `P^{n-1}` has codimension `n - 1`
/// and degree `k`.
pub fn hilbert_degree_codim<F: Field>(g: &GroebnerBasis<F>) -> Result<HilbertInvariants, GroebnerError> {
    if g.generators().iter().any(|p| !p.is_homogeneous()) {
        return Err(GroebnerError::NonHomogeneous);
    }
    if g.is_unit() {
        return Err(GroebnerError::UnitIdeal);
    }
    let n = g.ring().nvars();
    let mut num = hilbert_numerator(&g.leading_monomials());
    let mut codim = 0;
    // Divide out (1 - t) while t = 1 is a root.
    while num.iter().sum::<i64>() == 0 {
        let mut q = vec![0; num.len() - 1];
        let mut acc = 0;
        for (i, c) in num.iter().enumerate().take(num.len() - 1) {
            acc += c;
            q[i] = acc;
        }
        num = q;
        codim += 1;
    }
    Ok(HilbertInvariants {
        codim,
        degree: num.iter().sum(),
        krull_dim: n - codim,
    })
}
