//! The K3 lattice `U^3 + E8(-1)^2` with the Enriques involution and its
//! invariant sublattice.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{self, CorpusError, Entry};
use crate::exactalg::{ExactError, IntegerMatrix};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("Gram matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("{labels} labels for a rank {rank} lattice")]
    Labels { labels: usize, rank: usize },
    #[error("involution is not an isometric involution of this lattice")]
    InvalidInvolution,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Numbers of positive, negative and zero diagonal entries after
/// congruence diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.positive, self.negative)?;
        if self.zero > 0 {
            write!(f, " +{} degenerate", self.zero)?;
        }
        Ok(())
    }
}

/// A symmetric integer bilinear form on `Z^n` with named basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGram {
    gram: IntegerMatrix,
    labels: Vec<String>,
}

impl LatticeGram {
    pub fn new(gram: IntegerMatrix, labels: Vec<String>) -> Result<Self, LatticeError> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(LatticeError::NotSquare {
                rows: n,
                cols: gram.ncols(),
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram.get(i, j) != gram.get(j, i) {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        if labels.len() != n {
            return Err(LatticeError::Labels {
                labels: labels.len(),
                rank: n,
            });
        }
        Ok(LatticeGram { gram, labels })
    }

    pub fn from_i64(rows: &[Vec<i64>], labels: &[&str]) -> Result<Self, LatticeError> {
        let gram = if rows.is_empty() {
            IntegerMatrix::new(0, vec![])?
        } else {
            IntegerMatrix::from_i64_rows(rows)?
        };
        Self::new(gram, labels.iter().map(ToString::to_string).collect())
    }

    /// Reads a Gram matrix from the corpus and names its basis
    /// `{prefix}{k}{suffix}` for `k = 1..`.
    pub fn from_corpus(entry: Entry, prefix: &str, suffix: &str) -> Result<Self, LatticeError> {
        let rows = corpus::parse_integer_matrix(&corpus::load(entry)?)?;
        let labels = (1..=rows.len()).map(|k| format!("{prefix}{k}{suffix}")).collect();
        let gram = IntegerMatrix::from_i64_rows(&rows)?;
        Self::new(gram, labels)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn gram(&self) -> &IntegerMatrix {
        &self.gram
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn relabel(mut self, labels: Vec<String>) -> Result<Self, LatticeError> {
        if labels.len() != self.rank() {
            return Err(LatticeError::Labels {
                labels: labels.len(),
                rank: self.rank(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    /// The same module with the form multiplied by `k`.
    pub fn scaled(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        let rows = self.gram.rows().iter().map(|r| r.iter().map(|x| x * &k).collect()).collect();
        LatticeGram {
            gram: IntegerMatrix::new(self.rank(), rows).expect("square"),
            labels: self.labels.clone(),
        }
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.determinant().expect("square")
    }

    pub fn pairing(&self, u: &[BigInt], v: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                acc += ui * self.gram.get(i, j) * vj;
            }
        }
        acc
    }

    /// Even in the lattice sense: every diagonal entry is even.
    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram.get(i, i).is_even())
    }

    pub fn all_entries_even(&self) -> bool {
        self.gram.rows().iter().flatten().all(Integer::is_even)
    }

    /// Sylvester signature by symmetric elimination over the rationals.
    pub fn signature(&self) -> Signature {
        let n = self.rank();
        let mut a: Vec<Vec<BigRational>> = self
            .gram
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect();
        let mut sig = Signature {
            positive: 0,
            negative: 0,
            zero: 0,
        };
        for k in 0..n {
            if a[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                    a.swap(k, j);
                    for row in a.iter_mut() {
                        row.swap(k, j);
                    }
                } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                    // Replace e_k by e_k + e_j; the new diagonal is 2 a_kj.
                    let src = a[j].clone();
                    for (x, v) in a[k].iter_mut().zip(src) {
                        *x += v;
                    }
                    for row in a.iter_mut() {
                        let v = row[j].clone();
                        row[k] += v;
                    }
                }
            }
            let pivot = a[k][k].clone();
            if pivot.is_zero() {
                sig.zero += 1;
                continue;
            }
            if pivot.is_positive() {
                sig.positive += 1;
            } else {
                sig.negative += 1;
            }
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &pivot;
                let pivot_row = a[k].clone();
                for (x, v) in a[i].iter_mut().zip(&pivot_row).skip(k) {
                    *x -= &f * v;
                }
                for row in a.iter_mut().skip(k) {
                    let v = &f * &row[k];
                    row[i] -= v;
                }
            }
        }
        sig
    }

    /// Gram matrix of the sublattice spanned by the rows of `basis`.
    pub fn restrict(&self, basis: &IntegerMatrix, labels: Vec<String>) -> Result<Self, LatticeError> {
        let b = basis.rows();
        let rows = b.iter().map(|u| b.iter().map(|v| self.pairing(u, v)).collect()).collect();
        Self::new(IntegerMatrix::new(b.len(), rows)?, labels)
    }
}

pub fn direct_sum(parts: &[LatticeGram]) -> LatticeGram {
    let n: usize = parts.iter().map(LatticeGram::rank).sum();
    let mut rows = vec![vec![BigInt::zero(); n]; n];
    let mut labels = Vec::with_capacity(n);
    let mut off = 0;
    for p in parts {
        for i in 0..p.rank() {
            for j in 0..p.rank() {
                rows[off + i][off + j] = p.gram.get(i, j).clone();
            }
        }
        labels.extend(p.labels.iter().cloned());
        off += p.rank();
    }
    LatticeGram {
        gram: IntegerMatrix::new(n, rows).expect("square"),
        labels,
    }
}

/// `U + U + U + E8(-1) + E8(-1)` with basis
/// `v1, v2, v1', v2', v1'', v2'', e1'..e8', e1''..e8''`.
pub fn k3_lattice() -> Result<LatticeGram, LatticeError> {
    Ok(direct_sum(&[
        LatticeGram::from_corpus(Entry::UGram, "v", "")?,
        LatticeGram::from_corpus(Entry::UGram, "v", "'")?,
        LatticeGram::from_corpus(Entry::UGram, "v", "''")?,
        LatticeGram::from_corpus(Entry::E8MinusOneGram, "e", "'")?,
        LatticeGram::from_corpus(Entry::E8MinusOneGram, "e", "''")?,
    ]))
}

/// Integer linear map; row `i` is the image of basis vector `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeInvolution {
    matrix: IntegerMatrix,
}

impl LatticeInvolution {
    pub fn new(matrix: IntegerMatrix) -> Self {
        LatticeInvolution { matrix }
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.matrix.ncols();
        let mut out = vec![BigInt::zero(); n];
        for (vi, row) in v.iter().zip(self.matrix.rows()) {
            if vi.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o += vi * r;
            }
        }
        out
    }

    pub fn is_involution(&self) -> bool {
        let sq = self.matrix.mul(&self.matrix);
        matches!(sq, Ok(m) if m == IntegerMatrix::identity(self.matrix.nrows()))
    }

    pub fn preserves(&self, lat: &LatticeGram) -> bool {
        let rows = self.matrix.rows();
        if rows.len() != lat.rank() || self.matrix.ncols() != lat.rank() {
            return false;
        }
        (0..rows.len()).all(|i| (i..rows.len()).all(|j| lat.pairing(&rows[i], &rows[j]) == *lat.gram.get(i, j)))
    }
}

/// `v -> -v` on the first `U`, and swaps the primed and double-primed
/// copies of `U` and of `E8(-1)`.
pub fn build_vartheta() -> LatticeInvolution {
    let n = 22;
    let mut rows = vec![vec![BigInt::zero(); n]; n];
    rows[0][0] = -BigInt::one();
    rows[1][1] = -BigInt::one();
    let mut swap = |a: usize, b: usize| {
        rows[a][b] = BigInt::one();
        rows[b][a] = BigInt::one();
    };
    for k in 0..2 {
        swap(2 + k, 4 + k);
    }
    for k in 0..8 {
        swap(6 + k, 14 + k);
    }
    LatticeInvolution::new(IntegerMatrix::new(n, rows).expect("square"))
}

/// The fixed sublattice with its basis (rows, in ambient coordinates).
#[derive(Debug, Clone)]
pub struct InvariantSublattice {
    pub basis: IntegerMatrix,
    pub lattice: LatticeGram,
}

impl InvariantSublattice {
    /// Whether `(inv - id)` kills every basis vector.
    pub fn fixed_by(&self, inv: &LatticeInvolution) -> bool {
        self.basis.rows().iter().all(|v| inv.apply(v) == *v)
    }

    /// Whether the span equals its rational saturation in the ambient `Z^n`.
    pub fn is_primitive(&self) -> bool {
        let complement = self.basis.integer_kernel();
        let saturated = if complement.nrows() == 0 {
            IntegerMatrix::identity(self.basis.ncols())
        } else {
            complement.integer_kernel()
        };
        saturated.hermite_normal_form() == self.basis.hermite_normal_form()
    }

    /// All Hermite pivots of the basis equal 1.
    pub fn unit_pivots(&self) -> bool {
        self.basis
            .hermite_normal_form()
            .rows()
            .iter()
            .all(|r| r.iter().find(|x| !x.is_zero()).is_some_and(One::is_one))
    }
}

/// Saturated integral kernel of `inv - id` with the restricted form.
pub fn invariant_sublattice(lat: &LatticeGram, inv: &LatticeInvolution) -> Result<InvariantSublattice, LatticeError> {
    if !inv.is_involution() || !inv.preserves(lat) {
        return Err(LatticeError::InvalidInvolution);
    }
    let n = lat.rank();
    // x (M - I) = 0  <=>  (M - I)^T x = 0.
    let rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = inv.matrix.get(j, i).clone();
                    if i == j {
                        v -= 1;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let basis = IntegerMatrix::new(n, rows)?.integer_kernel();
    let labels = (1..=basis.nrows()).map(|k| format!("f{k}")).collect();
    let lattice = lat.restrict(&basis, labels)?;
    Ok(InvariantSublattice { basis, lattice })
}

/// Comparison of the computed fixed lattice with the explicit basis
/// `v_i' + v_i''`, `e_j' + e_j''` and the model `U(2) + E8(-2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelCheck {
    pub model_basis_fixed: bool,
    pub gram_matches_model: bool,
    pub spans_fixed_lattice: bool,
}

impl ModelCheck {
    pub fn passed(&self) -> bool {
        self.model_basis_fixed && self.gram_matches_model && self.spans_fixed_lattice
    }
}

pub fn model_check(lat: &LatticeGram, inv: &LatticeInvolution, fixed: &InvariantSublattice) -> Result<ModelCheck, LatticeError> {
    let n = lat.rank();
    let mut rows = Vec::new();
    for (a, b) in (2..4).map(|k| (k, k + 2)).chain((6..14).map(|k| (k, k + 8))) {
        let mut v = vec![BigInt::zero(); n];
        v[a] = BigInt::one();
        v[b] = BigInt::one();
        rows.push(v);
    }
    let model_basis = IntegerMatrix::new(n, rows)?;
    let labels = (1..=10).map(|k| format!("m{k}")).collect();
    let restricted = lat.restrict(&model_basis, labels)?;
    let u = LatticeGram::from_corpus(Entry::UGram, "u", "")?;
    let e8 = LatticeGram::from_corpus(Entry::E8MinusOneGram, "e", "")?;
    let model = direct_sum(&[u.scaled(2), e8.scaled(2)]);
    Ok(ModelCheck {
        model_basis_fixed: model_basis.rows().iter().all(|v| inv.apply(v) == *v),
        gram_matches_model: restricted.gram == model.gram,
        spans_fixed_lattice: model_basis.hermite_normal_form() == fixed.basis.hermite_normal_form(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HorikawaReport {
    pub ambient_rank: usize,
    pub ambient_determinant: String,
    pub ambient_signature: Signature,
    pub involution_valid: bool,
    pub rank: usize,
    pub determinant: String,
    pub signature: Signature,
    pub all_entries_even: bool,
    pub fixed_by_involution: bool,
    pub primitive: bool,
    pub unit_pivots: bool,
    pub model: ModelCheck,
}

impl HorikawaReport {
    /// Rank 10, determinant -1024, signature (1,9), even entries, plus the
    /// structural checks.
    pub fn passed(&self) -> bool {
        self.involution_valid
            && self.rank == 10
            && self.determinant == "-1024"
            && (self.signature.positive, self.signature.negative, self.signature.zero) == (1, 9, 0)
            && self.all_entries_even
            && self.fixed_by_involution
            && self.primitive
            && self.model.passed()
    }
}

pub fn horikawa_report() -> Result<HorikawaReport, LatticeError> {
    let lat = k3_lattice()?;
    let inv = build_vartheta();
    let involution_valid = inv.is_involution() && inv.preserves(&lat);
    let fixed = invariant_sublattice(&lat, &inv)?;
    let model = model_check(&lat, &inv, &fixed)?;
    Ok(HorikawaReport {
        ambient_rank: lat.rank(),
        ambient_determinant: lat.determinant().to_string(),
        ambient_signature: lat.signature(),
        involution_valid,
        rank: fixed.lattice.rank(),
        determinant: fixed.lattice.determinant().to_string(),
        signature: fixed.lattice.signature(),
        all_entries_even: fixed.lattice.all_entries_even(),
        fixed_by_involution: fixed.fixed_by(&inv),
        primitive: fixed.is_primitive(),
        unit_pivots: fixed.unit_pivots(),
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> LatticeGram {
        LatticeGram::from_corpus(Entry::UGram, "v", "").unwrap()
    }

    fn e8() -> LatticeGram {
        LatticeGram::from_corpus(Entry::E8MinusOneGram, "e", "").unwrap()
    }

    fn sig(p: usize, n: usize) -> Signature {
        Signature {
            positive: p,
            negative: n,
            zero: 0,
        }
    }

    #[test]
    fn small_sums() {
        let uu = direct_sum(&[u(), u()]);
        assert_eq!(uu.rank(), 4);
        assert_eq!(uu.determinant(), BigInt::one());
        assert_eq!(uu.signature(), sig(2, 2));
        assert_eq!(direct_sum(&[]).rank(), 0);
        assert_eq!(u().determinant(), BigInt::from(-1));
        assert_eq!(uu.labels(), ["v1", "v2", "v1", "v2"]);
    }

    #[test]
    fn e8_is_even_unimodular_negative_definite() {
        let e = e8();
        assert_eq!(e.determinant(), BigInt::one());
        assert_eq!(e.signature(), sig(0, 8));
        assert!(e.is_even());
        assert_eq!(e.scaled(-1).signature(), sig(8, 0));
    }

    #[test]
    fn k3_lattice_invariants() {
        let lat = k3_lattice().unwrap();
        assert_eq!(lat.rank(), 22);
        assert_eq!(lat.determinant(), BigInt::from(-1));
        assert_eq!(lat.signature(), sig(3, 19));
        assert_eq!(lat.labels()[2], "v1'");
        assert_eq!(lat.labels()[21], "e8''");
    }

    #[test]
    fn signature_with_zero_diagonal_and_degenerate_forms() {
        let h = LatticeGram::from_i64(&[vec![0, 2], vec![2, 0]], &["a", "b"]).unwrap();
        assert_eq!(h.signature(), sig(1, 1));
        let deg = LatticeGram::from_i64(&[vec![0, 0], vec![0, 3]], &["a", "b"]).unwrap();
        assert_eq!(
            deg.signature(),
            Signature {
                positive: 1,
                negative: 0,
                zero: 1
            }
        );
    }

    #[test]
    fn gram_validation() {
        assert!(matches!(
            LatticeGram::from_i64(&[vec![0, 1], vec![2, 0]], &["a", "b"]),
            Err(LatticeError::NotSymmetric(0, 1))
        ));
        assert!(matches!(
            LatticeGram::from_i64(&[vec![0, 1], vec![1, 0]], &["a"]),
            Err(LatticeError::Labels { .. })
        ));
    }

    #[test]
    fn vartheta() {
        let lat = k3_lattice().unwrap();
        let t = build_vartheta();
        assert!(t.is_involution());
        assert!(t.preserves(&lat));
        let mut v1 = vec![BigInt::zero(); 22];
        v1[0] = BigInt::one();
        let image = t.apply(&v1);
        assert_eq!(image[0], BigInt::from(-1));
        assert!(image[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn fixed_lattice() {
        let r = horikawa_report().unwrap();
        assert_eq!(r.rank, 10);
        assert_eq!(r.determinant, "-1024");
        assert_eq!(r.signature, sig(1, 9));
        assert!(r.all_entries_even);
        assert!(r.fixed_by_involution && r.primitive && r.unit_pivots);
        assert!(r.model.passed());
        assert!(r.passed());
    }

    #[test]
    fn non_primitive_basis_detected() {
        let basis = IntegerMatrix::from_i64_rows(&[vec![2, 0]]).unwrap();
        let lattice = LatticeGram::from_i64(&[vec![0]], &["x"]).unwrap();
        let s = InvariantSublattice { basis, lattice };
        assert!(!s.is_primitive());
        assert!(!s.unit_pivots());
    }

    #[test]
    fn bad_involution_rejected() {
        let lat = u();
        let flip = LatticeInvolution::new(IntegerMatrix::from_i64_rows(&[vec![-1, 0], vec![0, 1]]).unwrap());
        assert!(flip.is_involution());
        // (a, b) -> (-a, b) sends a.b = 1 to -1.
        assert!(!flip.preserves(&lat));
        assert!(matches!(invariant_sublattice(&lat, &flip), Err(LatticeError::InvalidInvolution)));
    }
}
