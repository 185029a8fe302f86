//! Exact scalars and exact linear algebra.
//!
//! Two scalar domains are provided behind the [`Field`] trait: prime fields
//! `F_p` with word-sized elements, and the rationals backed by
//! arbitrary-precision integers. Lattice questions over `Z` go through
//! [`IntegerMatrix`] and its Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// The prime used by default for all geometric computations.
pub const DEFAULT_PRIME: u64 = 32003;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not an odd prime below 2^31")]
    NotPrime(u64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not rectangular")]
    Ragged,
    #[error("denominator {0} is not invertible modulo {1}")]
    BadReduction(BigInt, u64),
    #[error("empty generator set")]
    EmptyGenerators,
}

/// A field with exact arithmetic.
///
/// Elements carry no reference to their field; the field value is passed to
/// every operation. This keeps prime-field elements a single machine word.
#[allow(clippy::wrong_self_convention)]
pub trait Field: Clone + fmt::Debug + PartialEq {
    type Elem: Clone + PartialEq + Eq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ExactError>;
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    fn from_rational(&self, q: &BigRational) -> Result<Self::Elem, ExactError>;
    /// Canonical signed text form (prime-field elements use the symmetric
    /// representative in `(-p/2, p/2]`).
    fn format(&self, a: &Self::Elem) -> String;

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(n))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ExactError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, mut e: u32) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// Deterministic primality by trial division; moduli are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `Z/pZ` for an odd prime `p < 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, ExactError> {
        if p == 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(ExactError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn element(&self, value: i64) -> PrimeFieldElement {
        PrimeFieldElement {
            value: value.rem_euclid(self.p as i64) as u64,
            modulus: self.p,
        }
    }

    /// Symmetric representative in `(-p/2, p/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: DEFAULT_PRIME }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Result<u64, ExactError> {
        mod_inverse(*a, self.p)
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits")
    }
    fn from_rational(&self, q: &BigRational) -> Result<u64, ExactError> {
        let den = self.from_bigint(q.denom());
        if den == 0 {
            return Err(ExactError::BadReduction(q.denom().clone(), self.p));
        }
        Ok(self.mul(&self.from_bigint(q.numer()), &self.inv(&den)?))
    }
    fn format(&self, a: &u64) -> String {
        self.signed(*a).to_string()
    }
}

/// A residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeFieldElement {
    pub value: u64,
    pub modulus: u64,
}

impl PrimeFieldElement {
    pub fn inverse(&self) -> Result<PrimeFieldElement, ExactError> {
        Ok(PrimeFieldElement {
            value: mod_inverse(self.value, self.modulus)?,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for PrimeFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// Inverse of `a` modulo `p` by the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, p: u64) -> Result<u64, ExactError> {
    let a = a % p;
    if a == 0 {
        return Err(ExactError::DivisionByZero);
    }
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "modulus must be prime");
    Ok(t0.rem_euclid(p as i128) as u64)
}

/// The field of rational numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational, ExactError> {
        if a.is_zero() {
            Err(ExactError::DivisionByZero)
        } else {
            Ok(a.recip())
        }
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn from_rational(&self, q: &BigRational) -> Result<BigRational, ExactError> {
        Ok(q.clone())
    }
    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
}

/// Dense matrix over an exact field, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> ExactMatrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        ExactMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    /// Builds a matrix from rows; `cols` fixes the width when there are no rows.
    pub fn from_rows(field: F, cols: usize, rows: Vec<Vec<F::Elem>>) -> Result<Self, ExactError> {
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * cols);
        for row in rows {
            if row.len() != cols {
                return Err(ExactError::Ragged);
            }
            entries.extend(row);
        }
        Ok(ExactMatrix {
            field,
            rows: nrows,
            cols,
            entries,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>, ExactError> {
        if v.len() != self.cols {
            return Err(ExactError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect())
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || f.is_zero(m.get(i, c)) {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space. Each vector has a 1 in one free
    /// column (free columns ascending) and zeros in the other free columns.
    pub fn kernel_basis(&self) -> Vec<Vec<F::Elem>> {
        let f = &self.field;
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = f.neg(reduced.get(r, free));
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Dense matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    cols: usize,
    rows: Vec<Vec<BigInt>>,
}

impl IntegerMatrix {
    pub fn new(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<Self, ExactError> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ExactError::Ragged);
        }
        Ok(IntegerMatrix { cols, rows })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self, ExactError> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::new(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
        IntegerMatrix { cols: n, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }
    pub fn ncols(&self) -> usize {
        self.cols
    }
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }
    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.rows[r][c]
    }

    pub fn transpose(&self) -> Self {
        let rows = (0..self.cols)
            .map(|c| self.rows.iter().map(|r| r[c].clone()).collect())
            .collect();
        IntegerMatrix {
            cols: self.rows.len(),
            rows,
        }
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix, ExactError> {
        if self.cols != other.nrows() {
            return Err(ExactError::DimensionMismatch {
                expected: self.cols,
                found: other.nrows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.cols)
                    .map(|c| {
                        r.iter()
                            .zip(&other.rows)
                            .fold(BigInt::zero(), |acc, (a, o)| acc + a * &o[c])
                    })
                    .collect()
            })
            .collect();
        Ok(IntegerMatrix {
            cols: other.cols,
            rows,
        })
    }

    /// Row-style Hermite normal form with zero rows removed.
    ///
    /// Pivot search takes, in the leftmost column with a nonzero entry, the
    /// row of smallest absolute value (lowest index on ties). Pivots are
    /// positive and entries above each pivot are reduced into `[0, pivot)`.
    pub fn hermite_normal_form(&self) -> IntegerMatrix {
        let mut rows = self.rows.clone();
        let rank = echelonize(&mut rows, self.cols, None);
        rows.truncate(rank);
        IntegerMatrix {
            cols: self.cols,
            rows,
        }
    }

    /// Basis of `{x in Z^cols : self * x = 0}`, saturated in `Z^cols` and
    /// returned in Hermite normal form.
    pub fn integer_kernel(&self) -> IntegerMatrix {
        // Row i of the work matrix is (column i of self | e_i). Unimodular row
        // operations that zero the left block leave kernel vectors on the right.
        let m = self.rows.len();
        let n = self.cols;
        let mut work: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigInt> = self.rows.iter().map(|r| r[i].clone()).collect();
                row.extend((0..n).map(|j| BigInt::from((i == j) as i64)));
                row
            })
            .collect();
        let rank = echelonize(&mut work, m + n, Some(m));
        let kernel: Vec<Vec<BigInt>> = work[rank..].iter().map(|r| r[m..].to_vec()).collect();
        IntegerMatrix {
            cols: n,
            rows: kernel,
        }
        .hermite_normal_form()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt, ExactError> {
        let n = self.rows.len();
        if n != self.cols {
            return Err(ExactError::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Integer row echelonization in place; returns the rank over the first
/// `pivot_cols` columns (all columns when `None`). Rows past the rank are
/// zero on those columns. Entries above pivots are reduced.
fn echelonize(rows: &mut [Vec<BigInt>], ncols: usize, pivot_cols: Option<usize>) -> usize {
    let limit = pivot_cols.unwrap_or(ncols);
    let mut r = 0;
    for c in 0..limit {
        if r == rows.len() {
            break;
        }
        loop {
            let pivot = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let mut clean = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let (head, tail) = rows.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r < rows.len() && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -&*x;
                }
            }
            for i in 0..r {
                let q = rows[i][c].div_floor(&rows[r][c]);
                if q.is_zero() {
                    continue;
                }
                let (head, tail) = rows.split_at_mut(r);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= &q * y;
                }
            }
            r += 1;
        }
    }
    r
}

/// Whether `target` lies in the integer span of the rows of `generators`.
pub fn hermite_membership(generators: &IntegerMatrix, target: &[BigInt]) -> Result<bool, ExactError> {
    if generators.nrows() == 0 {
        return Err(ExactError::EmptyGenerators);
    }
    HermiteBasis::new(generators).contains(target)
}

/// A Hermite-reduced lattice basis kept around for repeated membership tests.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    hnf: IntegerMatrix,
    pivots: Vec<usize>,
}

impl HermiteBasis {
    pub fn new(generators: &IntegerMatrix) -> Self {
        let hnf = generators.hermite_normal_form();
        let pivots = hnf
            .rows()
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero row"))
            .collect();
        HermiteBasis { hnf, pivots }
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.hnf
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Back-substitution against the echelon rows.
    pub fn contains(&self, target: &[BigInt]) -> Result<bool, ExactError> {
        if target.len() != self.hnf.ncols() {
            return Err(ExactError::DimensionMismatch {
                expected: self.hnf.ncols(),
                found: target.len(),
            });
        }
        let mut rest = target.to_vec();
        for (row, &c) in self.hnf.rows().iter().zip(&self.pivots) {
            if rest[..c].iter().any(|x| !x.is_zero()) {
                return Ok(false);
            }
            let (q, r) = rest[c].div_mod_floor(&row[c]);
            if !r.is_zero() {
                return Ok(false);
            }
            for (x, y) in rest.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        Ok(rest.iter().all(Zero::is_zero))
    }
}
