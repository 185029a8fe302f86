//! Effectivity checks by counting forms through node points, and the
//! Ulrich certificate that chains them with the lattice checks.
//!
//! On the Kummer surface with `H_X = 2L - 1/2 sum E`, a class `M` of square
//! 12 with `M.H_X = 12` is Ulrich exactly when neither `M - H_X` nor
//! `2H_X - M` is effective. For `M = 3L - (twelve nodes)` these become
//! statements about linear and quadratic forms through node subsets.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::enriques::{self, EnriquesError, EnriquesReport, XSide};
use crate::exactalg::{ExactError, ExactMatrix, Field, PrimeField, Rationals};
use crate::kummer::{verify_sixteen_nodes, Genus2Curve, KummerError, KummerQuartic, NodeLabel, VARIABLES};
use crate::piclattice::{
    build_theta_star, chi_k3, default_generators, is_invariant, numerical_ulrich, polarization, three_l_minus,
    DivisorClass, EvenEightTester, PicError, PolarizedSurfaceParams,
};
use crate::polyring::{monomial_basis, Monomial, PolyRing, ProjectivePoint, SparsePolynomial};

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("point {0} is repeated")]
    RepeatedPoint(String),
    #[error("points must lie in P^3, got {0} coordinates")]
    PointDimension(usize),
    #[error("unsupported class shape: {0}")]
    UnsupportedShape(String),
    #[error("expected {expected} node classes, found {found}")]
    Cardinality { expected: usize, found: usize },
    #[error("certificate is not certified ({0})")]
    NotCertified(String),
    #[error("certificate does not record theta*-invariance of H_X and M")]
    NotInvariant,
    #[error(transparent)]
    Kummer(#[from] KummerError),
    #[error(transparent)]
    Pic(#[from] PicError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Enriques(#[from] EnriquesError),
}

/// Values of the degree-`d` monomials (columns, [`monomial_basis`] order)
/// at the points (rows, input order).
#[derive(Debug, Clone)]
pub struct EvaluationMatrix {
    pub monomials: Vec<Monomial>,
    pub matrix: ExactMatrix<PrimeField>,
}

fn eval_monomial(field: &PrimeField, m: &Monomial, coords: &[u64]) -> u64 {
    m.exponents()
        .iter()
        .zip(coords)
        .fold(field.one(), |acc, (&e, c)| field.mul(&acc, &field.pow(c, e)))
}

pub fn evaluation_matrix(d: u32, points: &[ProjectivePoint<PrimeField>]) -> Result<EvaluationMatrix, CohomologyError> {
    let field = points.first().map_or_else(PrimeField::default, |p| *p.field());
    for (i, p) in points.iter().enumerate() {
        if p.dim() != 4 {
            return Err(CohomologyError::PointDimension(p.dim()));
        }
        if points[..i].contains(p) {
            return Err(CohomologyError::RepeatedPoint(p.to_string()));
        }
    }
    let monomials = monomial_basis(d, 4);
    let rows = points
        .iter()
        .map(|p| monomials.iter().map(|m| eval_monomial(&field, m, p.coords())).collect())
        .collect();
    let matrix = ExactMatrix::from_rows(field, monomials.len(), rows)?;
    Ok(EvaluationMatrix { monomials, matrix })
}

/// Dimension of the degree-`d` forms through `points`, with one such form
/// when the space is nonzero.
#[derive(Debug, Clone)]
pub struct FormsThroughPoints {
    pub h0: usize,
    pub rank: usize,
    pub witness: Option<SparsePolynomial<PrimeField>>,
}

pub fn forms_through_points(d: u32, points: &[ProjectivePoint<PrimeField>]) -> Result<FormsThroughPoints, CohomologyError> {
    let ev = evaluation_matrix(d, points)?;
    let field = *ev.matrix.field();
    let kernel = ev.matrix.kernel_basis();
    let witness = kernel.first().map(|v| {
        let ring = PolyRing::new(field, &VARIABLES);
        let mut f = SparsePolynomial::zero(&ring);
        for (m, c) in ev.monomials.iter().zip(v) {
            f.add_term(m.clone(), *c);
        }
        f
    });
    Ok(FormsThroughPoints {
        h0: kernel.len(),
        rank: ev.monomials.len() - kernel.len(),
        witness,
    })
}

pub fn h0_forms_through_points(d: u32, points: &[ProjectivePoint<PrimeField>]) -> Result<usize, CohomologyError> {
    Ok(forms_through_points(d, points)?.h0)
}

/// Generators of the vanishing ideal of `points`, truncated in degree
/// `r + 1` where `r` is the first degree at which the points impose
/// independent conditions. The truncation has the saturation of the full
/// ideal, so its Hilbert polynomial is the constant `points.len()`.
pub fn vanishing_ideal(points: &[ProjectivePoint<PrimeField>]) -> Result<Vec<SparsePolynomial<PrimeField>>, CohomologyError> {
    let mut d = 0;
    while evaluation_matrix(d, points)?.matrix.rank() < points.len() {
        d += 1;
    }
    let ev = evaluation_matrix(d + 1, points)?;
    let field = *ev.matrix.field();
    let ring = PolyRing::new(field, &VARIABLES);
    Ok(ev
        .matrix
        .kernel_basis()
        .into_iter()
        .map(|v| {
            let mut f = SparsePolynomial::zero(&ring);
            for (m, c) in ev.monomials.iter().zip(v) {
                f.add_term(m.clone(), c);
            }
            f
        })
        .collect())
}

/// One effectivity computation and what it means.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectivityCheck {
    pub class: String,
    pub degree: u32,
    pub nodes: Vec<String>,
    pub points: Vec<String>,
    pub h0: usize,
    pub witness: Option<String>,
    pub interpretation: String,
}

fn node_points(
    nodes: &[(NodeLabel, ProjectivePoint<PrimeField>)],
    labels: &[NodeLabel],
) -> Vec<ProjectivePoint<PrimeField>> {
    labels
        .iter()
        .map(|l| nodes.iter().find(|(k, _)| k == l).expect("all sixteen labels present").1.clone())
        .collect()
}

/// `2H_X - M` must read `L - (four nodes)`; counts linear forms through them.
pub fn check_two_h_minus_m(
    nodes: &[(NodeLabel, ProjectivePoint<PrimeField>)],
    m: &DivisorClass,
) -> Result<EffectivityCheck, CohomologyError> {
    let class = polarization().scale_int(2).sub(m);
    let shape = class.as_l_minus_nodes();
    let Some((_, four)) = shape.filter(|(a, _)| *a == 1.into()) else {
        return Err(CohomologyError::UnsupportedShape(format!("2H_X - M = {class}, expected L - E_a - E_b - E_c - E_d")));
    };
    if four.len() != 4 {
        return Err(CohomologyError::Cardinality {
            expected: 4,
            found: four.len(),
        });
    }
    let points = node_points(nodes, &four);
    let r = forms_through_points(1, &points)?;
    Ok(EffectivityCheck {
        class: class.to_string(),
        degree: 1,
        nodes: four.iter().map(ToString::to_string).collect(),
        points: points.iter().map(ToString::to_string).collect(),
        h0: r.h0,
        witness: r.witness.map(|w| w.to_string()),
        interpretation: if r.h0 == 0 {
            "no plane through the four nodes: 2H_X - M is not effective".into()
        } else {
            "a plane passes through the four nodes: 2H_X - M is effective".into()
        },
    })
}

/// `2(M - H_X)` must read `2L - (twelve nodes) + (the four nodes of
/// 2H_X - M)`; counts quadrics through the twelve.
pub fn check_m_minus_h(
    nodes: &[(NodeLabel, ProjectivePoint<PrimeField>)],
    m: &DivisorClass,
) -> Result<EffectivityCheck, CohomologyError> {
    let h = polarization();
    let unsupported = |c: &DivisorClass| {
        CohomologyError::UnsupportedShape(format!("2(M - H_X) = {c}, expected 2L - (twelve nodes) + (four nodes)"))
    };
    let doubled = m.sub(&h).scale_int(2);
    let Some((_, four)) = h.scale_int(2).sub(m).as_l_minus_nodes() else {
        return Err(unsupported(&doubled));
    };
    let mut untwisted = doubled.clone();
    for &n in &four {
        untwisted = untwisted.sub(&DivisorClass::e(n));
    }
    let Some((_, twelve)) = untwisted.as_l_minus_nodes().filter(|(a, _)| *a == 2.into()) else {
        return Err(unsupported(&doubled));
    };
    if twelve.len() != 12 {
        return Err(CohomologyError::Cardinality {
            expected: 12,
            found: twelve.len(),
        });
    }
    if twelve.iter().any(|n| four.contains(n)) {
        return Err(unsupported(&doubled));
    }
    let points = node_points(nodes, &twelve);
    let r = forms_through_points(2, &points)?;
    Ok(EffectivityCheck {
        class: untwisted.to_string(),
        degree: 2,
        nodes: twelve.iter().map(ToString::to_string).collect(),
        points: points.iter().map(ToString::to_string).collect(),
        h0: r.h0,
        witness: r.witness.map(|w| w.to_string()),
        interpretation: if r.h0 == 0 {
            "no quadric through the twelve nodes: |2(M - H_X)| is empty, so M - H_X is not effective".into()
        } else {
            "a quadric passes through the twelve nodes: 2L minus the twelve nodes is effective, so the non-effectivity of M - H_X is not established".into()
        },
    })
}

/// How `M` is specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MRecipe {
    /// `3L` minus these node classes.
    Nodes(Vec<NodeLabel>),
    Class(DivisorClass),
}

impl MRecipe {
    pub fn class(&self) -> DivisorClass {
        match self {
            MRecipe::Nodes(labels) => three_l_minus(labels),
            MRecipe::Class(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub justification: String,
    pub inputs_digest: String,
    pub value: Value,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refutation {
    NodeVerification,
    Numerical,
    EvenEight,
    Invariance,
    Effectivity,
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refutation::NodeVerification => "node-verification",
            Refutation::Numerical => "numerical",
            Refutation::EvenEight => "even-eight",
            Refutation::Invariance => "invariance",
            Refutation::Effectivity => "effectivity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Refuted { reason: Refutation, failed_check: String },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceIdentity {
    pub roots: Vec<String>,
    pub prime: u64,
    pub quartic_sha256: String,
}

/// A logical step recorded rather than computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedInference {
    pub statement: String,
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateBody {
    pub surface: SurfaceIdentity,
    pub h_x: String,
    pub m: String,
    pub x_side: Option<XSide>,
    pub checks: Vec<CheckRecord>,
    pub inferences: Vec<RecordedInference>,
    pub verdict: Verdict,
    pub enriques: Option<EnriquesReport>,
}

impl CertificateBody {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// SHA-256 of the compact JSON body.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("serializable").as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateHeader {
    pub tool: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub body_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UlrichCertificate {
    pub header: CertificateHeader,
    pub body: CertificateBody,
}

impl UlrichCertificate {
    pub fn new(body: CertificateBody, timestamp_unix: u64) -> Self {
        UlrichCertificate {
            header: CertificateHeader {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp_unix,
                body_sha256: body.digest(),
            },
            body,
        }
    }

    pub fn integrity_ok(&self) -> bool {
        self.header.body_sha256 == self.body.digest()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest_of(parts: &[&str]) -> String {
    sha256_hex(parts.join("\n").as_bytes())
}

pub const INVARIANCE_CHECKS: [&str; 2] = ["theta-invariance-h", "theta-invariance-m"];

/// Runs every check in order and stops after the first failing stage:
/// nodes, numerics, the even-eight shortcut, `theta*`-invariance,
/// effectivity.
pub fn certify_ulrich(
    curve: &Genus2Curve<Rationals>,
    quartic: &KummerQuartic,
    recipe: &MRecipe,
) -> Result<CertificateBody, CohomologyError> {
    let field = quartic.field();
    let curve_p = curve.reduce(field)?;
    let h = polarization();
    let m = recipe.class();
    let quartic_text = quartic.polynomial().to_string();
    let surface = SurfaceIdentity {
        roots: curve.roots().iter().map(ToString::to_string).collect(),
        prime: field.modulus(),
        quartic_sha256: sha256_hex(quartic_text.as_bytes()),
    };
    let classes = digest_of(&[&h.to_string(), &m.to_string()]);
    let mut checks = Vec::new();
    let mut inferences = Vec::new();
    let mut x_side = None;

    let finish = |checks: Vec<CheckRecord>, inferences, x_side, verdict| CertificateBody {
        surface: surface.clone(),
        h_x: h.to_string(),
        m: m.to_string(),
        x_side,
        checks,
        inferences,
        verdict,
        enriques: None,
    };
    let refuted = |reason, name: &str| Verdict::Refuted {
        reason,
        failed_check: name.to_string(),
    };

    // Stage 1: the quartic is singular exactly at the formula nodes.
    let report = verify_sixteen_nodes(quartic, &curve_p)?;
    let roots_text: Vec<String> = surface.roots.clone();
    checks.push(CheckRecord {
        name: "sixteen-nodes".into(),
        justification: "formula nodes are distinct singular points of f and the singular locus has codim 3, degree 16".into(),
        inputs_digest: digest_of(&[&quartic_text, &roots_text.join(","), &field.modulus().to_string()]),
        value: json!({
            "codim": report.singular_locus.codim,
            "degree": report.singular_locus.degree,
            "pairwise_distinct": report.pairwise_distinct,
            "first_failure": report.first_failure,
        }),
        pass: report.passed,
    });
    if !report.passed {
        return Ok(finish(checks, inferences, x_side, refuted(Refutation::NodeVerification, "sixteen-nodes")));
    }
    let nodes: Vec<(NodeLabel, ProjectivePoint<PrimeField>)> =
        curve_p.nodes()?.into_iter().map(|n| (n.label, n.point)).collect();

    // Stage 2: numerics.
    let s = PolarizedSurfaceParams::new(4)?;
    let h2 = h.square();
    let mh = m.pairing(&h);
    let m2 = m.square();
    let chi1 = chi_k3(&m.sub(&h));
    let chi2 = chi_k3(&m.sub(&h.scale_int(2)));
    let q = |n: i64| num_rational::BigRational::from_integer(n.into());
    let numeric = [
        ("h-squared", "polarization of degree 2s = 8", &h2, q(8)),
        ("m-dot-h", "Ulrich numerics: M.H_X = 3s", &mh, q(12)),
        ("m-squared", "Ulrich numerics: M^2 = 4s - 4", &m2, q(12)),
        ("chi-m-minus-h", "Riemann-Roch on a K3: chi(D) = 2 + D^2/2", &chi1, q(0)),
        ("chi-m-minus-2h", "Riemann-Roch on a K3: chi(D) = 2 + D^2/2", &chi2, q(0)),
    ];
    let mut first_numeric_failure = None;
    for (name, why, value, want) in numeric {
        let pass = *value == want;
        if !pass && first_numeric_failure.is_none() {
            first_numeric_failure = Some(name);
        }
        checks.push(CheckRecord {
            name: name.into(),
            justification: why.into(),
            inputs_digest: classes.clone(),
            value: json!(value.to_string()),
            pass,
        });
    }
    let nu = numerical_ulrich(s, &h, &m)?;
    checks.push(CheckRecord {
        name: "numerical-ulrich".into(),
        justification: "H_X.M = 3s and M^2 = 4s - 4 with s = 4".into(),
        inputs_digest: classes.clone(),
        value: json!(nu),
        pass: nu,
    });
    if let Some(name) = first_numeric_failure.or(if nu { None } else { Some("numerical-ulrich") }) {
        return Ok(finish(checks, inferences, x_side, refuted(Refutation::Numerical, name)));
    }
    x_side = Some(XSide {
        h_squared: 8,
        m_dot_h: 12,
        m_squared: 12,
    });

    // Stage 3: M - H_X = 1/2 (eight nodes) is effective when the eight are even.
    if let Some(eight) = m.sub(&h).as_half_node_sum().filter(|e| e.len() == 8) {
        let tester = EvenEightTester::new(&default_generators())?;
        let even = tester.test(&eight)?;
        let labels: Vec<String> = eight.iter().map(ToString::to_string).collect();
        checks.push(CheckRecord {
            name: "even-eight".into(),
            justification: "half the sum of an even eight is an integral class, so M - H_X = 1/2 sum E is effective".into(),
            inputs_digest: digest_of(&[&m.sub(&h).to_string()]),
            value: json!({ "eight": labels, "divisible_by_two": even }),
            pass: !even,
        });
        if even {
            return Ok(finish(checks, inferences, x_side, refuted(Refutation::EvenEight, "even-eight")));
        }
    }

    // Stage 4: theta*-invariance.
    let theta = build_theta_star();
    let mut invariance_failure = None;
    for (name, class, label) in [(INVARIANCE_CHECKS[0], &h, "H_X"), (INVARIANCE_CHECKS[1], &m, "M")] {
        let ok = is_invariant(&theta, class);
        if !ok && invariance_failure.is_none() {
            invariance_failure = Some(name);
        }
        checks.push(CheckRecord {
            name: name.into(),
            justification: format!("theta* fixes {label}: coefficientwise equality after the node/trope swap"),
            inputs_digest: digest_of(&[&class.to_string()]),
            value: json!(theta.apply(class).to_string()),
            pass: ok,
        });
    }
    if let Some(name) = invariance_failure {
        return Ok(finish(checks, inferences, x_side, refuted(Refutation::Invariance, name)));
    }

    // Stage 5: effectivity over F_p.
    let two_h = check_two_h_minus_m(&nodes, &m)?;
    let m_h = check_m_minus_h(&nodes, &m)?;
    inferences.push(RecordedInference {
        statement: "if M - H_X is effective then so is 2(M - H_X)".into(),
        basis: "sums of effective divisors are effective".into(),
    });
    inferences.push(RecordedInference {
        statement: format!(
            "H^0(2L - sum of {{{}}}) = H^0(2(M - H_X)) after adding E_{{{}}}",
            m_h.nodes.join(","),
            two_h.nodes.join(",")
        ),
        basis: "each added exceptional curve is a fixed component".into(),
    });
    inferences.push(RecordedInference {
        statement: "vanishing over F_p implies vanishing in characteristic 0".into(),
        basis: "upper semicontinuity of h^0 under reduction".into(),
    });
    for (name, why, check) in [
        ("two-h-minus-m-not-effective", "linear forms through the four nodes of 2H_X - M", &two_h),
        ("m-minus-h-not-effective", "quadrics through the twelve nodes of 2(M - H_X)", &m_h),
    ] {
        checks.push(CheckRecord {
            name: name.into(),
            justification: why.into(),
            inputs_digest: digest_of(&[&check.class, &check.points.join(",")]),
            value: serde_json::to_value(check).expect("serializable"),
            pass: check.h0 == 0,
        });
    }
    let verdict = match (two_h.h0, m_h.h0) {
        (0, 0) => Verdict::Certified,
        (0, _) => refuted(Refutation::Effectivity, "m-minus-h-not-effective"),
        _ => refuted(Refutation::Effectivity, "two-h-minus-m-not-effective"),
    };
    let mut body = finish(checks, inferences, x_side, verdict);
    if body.verdict.is_certified() {
        body.enriques = Some(descend_to_enriques(&body)?);
    }
    Ok(body)
}

/// The Y-side report for a certified body.
pub fn descend_to_enriques(body: &CertificateBody) -> Result<EnriquesReport, CohomologyError> {
    if let Verdict::Refuted { reason, .. } = &body.verdict {
        return Err(CohomologyError::NotCertified(reason.to_string()));
    }
    let invariant = INVARIANCE_CHECKS
        .iter()
        .all(|name| body.check(name).is_some_and(|c| c.pass));
    if !invariant {
        return Err(CohomologyError::NotInvariant);
    }
    let x = body
        .x_side
        .ok_or_else(|| CohomologyError::NotCertified("no numerical data".into()))?;
    Ok(enriques::descend(x, true, invariant)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{builtin, Entry};
    use crate::piclattice::DEFAULT_M_NODES;

    fn field() -> PrimeField {
        PrimeField::default()
    }

    fn pt(c: &[i64]) -> ProjectivePoint<PrimeField> {
        ProjectivePoint::from_i64(field(), c).unwrap()
    }

    fn curve() -> Genus2Curve<Rationals> {
        Genus2Curve::from_integers(&[1, -1, 2, -2, 3, -3]).unwrap()
    }

    fn quartic() -> KummerQuartic {
        KummerQuartic::parse(field(), builtin(Entry::KummerQuartic)).unwrap()
    }

    fn nodes() -> Vec<(NodeLabel, ProjectivePoint<PrimeField>)> {
        curve()
            .reduce(field())
            .unwrap()
            .nodes()
            .unwrap()
            .into_iter()
            .map(|n| (n.label, n.point))
            .collect()
    }

    fn points_of(labels: &str) -> Vec<ProjectivePoint<PrimeField>> {
        let all = nodes();
        labels
            .split_whitespace()
            .map(|l| {
                let l: NodeLabel = l.parse().unwrap();
                all.iter().find(|(k, _)| *k == l).unwrap().1.clone()
            })
            .collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(h0_forms_through_points(1, &[]).unwrap(), 4);
        let three = [pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0]), pt(&[0, 0, 1, 0])];
        let r = forms_through_points(1, &three).unwrap();
        assert_eq!(r.h0, 1);
        assert_eq!(r.witness.unwrap().to_string(), "W");
        assert!(matches!(
            h0_forms_through_points(1, &[pt(&[1, 2, 3, 4]), pt(&[2, 4, 6, 8])]),
            Err(CohomologyError::RepeatedPoint(_))
        ));
        let p2 = ProjectivePoint::from_i64(field(), &[1, 2]).unwrap();
        assert!(matches!(h0_forms_through_points(1, &[p2]), Err(CohomologyError::PointDimension(2))));
    }

    #[test]
    fn published_vanishing_in_degree_one() {
        assert_eq!(h0_forms_through_points(1, &points_of("23 25 34 45")).unwrap(), 0);
    }

    #[test]
    fn nodes_on_a_trope_plane_lie_on_a_plane() {
        // T6 contains 0, 16, 26, 36, 46, 56.
        let r = forms_through_points(1, &points_of("16 26 36 46")).unwrap();
        assert_eq!(r.h0, 1);
        let plane = r.witness.unwrap();
        for p in points_of("0 16 26 36 46 56") {
            assert_eq!(plane.evaluate(&p).unwrap(), 0);
        }
    }

    #[test]
    fn quadrics_through_eight_nodes() {
        let h0 = h0_forms_through_points(2, &points_of("0 12 13 14 15 16 23 24")).unwrap();
        assert!(h0 >= 2);
        assert_eq!(h0, 3);
    }

    #[test]
    fn quadric_through_the_twelve_default_nodes() {
        // 2L - (twelve nodes) = T6 + T1 + T246 + T356 is effective, and the
        // evaluation matrix sees the corresponding quadric.
        let twelve: Vec<String> = DEFAULT_M_NODES.iter().map(ToString::to_string).collect();
        let r = forms_through_points(2, &points_of(&twelve.join(" "))).unwrap();
        assert_eq!((r.h0, r.rank), (1, 9));
        let q = r.witness.unwrap();
        for p in points_of(&twelve.join(" ")) {
            assert_eq!(q.evaluate(&p).unwrap(), 0);
        }
        let sum: DivisorClass = "T6 + T1 + T246 + T356".parse().unwrap();
        let lhs = three_l_minus(&DEFAULT_M_NODES).sub(&DivisorClass::l());
        assert_eq!(sum, lhs);
    }

    #[test]
    fn permutation_and_rescaling_invariance() {
        let mut pts = points_of("0 12 13 14 15 16 23");
        let a = h0_forms_through_points(2, &pts).unwrap();
        pts.reverse();
        let scaled: Vec<_> = pts
            .iter()
            .map(|p| {
                let c: Vec<u64> = p.coords().iter().map(|x| field().mul(x, &5)).collect();
                ProjectivePoint::new(field(), c).unwrap()
            })
            .collect();
        assert_eq!(h0_forms_through_points(2, &scaled).unwrap(), a);
        assert!(a >= 10 - 7);
    }

    #[test]
    fn degree_one_matches_determinant_oracle() {
        // h0(1, S) = 4 - rank of the 4x4 coordinate matrix; for four
        // points the rank is 4 iff the determinant is nonzero.
        let all = nodes();
        let f = field();
        for a in 0..16 {
            for b in a + 1..16 {
                for c in b + 1..16 {
                    for d in c + 1..16 {
                        let pts: Vec<_> = [a, b, c, d].iter().map(|&i| all[i].1.clone()).collect();
                        let h0 = h0_forms_through_points(1, &pts).unwrap();
                        let det = det4(&f, &pts);
                        assert_eq!(h0 == 0, det != 0, "{a} {b} {c} {d}");
                    }
                }
            }
        }
    }

    fn det4(f: &PrimeField, pts: &[ProjectivePoint<PrimeField>]) -> u64 {
        // Laplace expansion over permutations.
        let mut total = 0u64;
        let perms = permutations(4);
        for p in perms {
            let mut term = f.one();
            for (r, &c) in p.iter().enumerate() {
                term = f.mul(&term, &pts[r].coords()[c]);
            }
            if parity(&p) {
                term = f.neg(&term);
            }
            total = f.add(&total, &term);
        }
        total
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn parity(p: &[usize]) -> bool {
        let mut odd = false;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    odd = !odd;
                }
            }
        }
        odd
    }

    #[test]
    fn shape_checks() {
        let m = three_l_minus(&DEFAULT_M_NODES);
        let two = check_two_h_minus_m(&nodes(), &m).unwrap();
        assert_eq!(two.nodes, ["23", "25", "34", "45"]);
        assert_eq!(two.h0, 0);
        let mh = check_m_minus_h(&nodes(), &m).unwrap();
        assert_eq!(mh.nodes.len(), 12);
        assert_eq!(mh.h0, 1);
        let weird: DivisorClass = "2L - E0".parse().unwrap();
        assert!(matches!(check_two_h_minus_m(&nodes(), &weird), Err(CohomologyError::UnsupportedShape(_))));
        assert!(matches!(check_m_minus_h(&nodes(), &weird), Err(CohomologyError::UnsupportedShape(_))));
        // Four nodes on the T6 plane: 2H - M' = L - (16 + 26 + 36 + 46).
        let others: Vec<NodeLabel> = NodeLabel::all()
            .into_iter()
            .filter(|n| !["16", "26", "36", "46"].contains(&n.to_string().as_str()))
            .collect();
        let coplanar = check_two_h_minus_m(&nodes(), &three_l_minus(&others)).unwrap();
        assert_eq!(coplanar.h0, 1);
        assert!(coplanar.witness.is_some());
    }

    #[test]
    fn default_recipe_fails_only_the_quadric_check() {
        let body = certify_ulrich(&curve(), &quartic(), &MRecipe::Nodes(DEFAULT_M_NODES.to_vec())).unwrap();
        let failing: Vec<&str> = body.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert_eq!(failing, ["m-minus-h-not-effective"]);
        assert_eq!(
            body.verdict,
            Verdict::Refuted {
                reason: Refutation::Effectivity,
                failed_check: "m-minus-h-not-effective".into()
            }
        );
        assert!(descend_to_enriques(&body).is_err());
    }

    #[test]
    fn even_eight_recipe_is_refuted() {
        let m: DivisorClass = "2L - 1/2(E13+E14+E15+E16+E23+E24+E25+E26)".parse().unwrap();
        let body = certify_ulrich(&curve(), &quartic(), &MRecipe::Class(m)).unwrap();
        assert!(body.check("numerical-ulrich").unwrap().pass);
        assert_eq!(
            body.verdict,
            Verdict::Refuted {
                reason: Refutation::EvenEight,
                failed_check: "even-eight".into()
            }
        );
        assert!(body.check("two-h-minus-m-not-effective").is_none());
    }

    #[test]
    fn eleven_labels_fail_numerics() {
        let body = certify_ulrich(&curve(), &quartic(), &MRecipe::Nodes(DEFAULT_M_NODES[..11].to_vec())).unwrap();
        assert!(matches!(
            body.verdict,
            Verdict::Refuted {
                reason: Refutation::Numerical,
                ..
            }
        ));
        assert!(!body.check("m-squared").unwrap().pass);
    }

    #[test]
    fn non_invariant_recipe() {
        // 2H - M = L - (23, 24, 34, 45): both vanishings hold, but M is not
        // theta*-invariant.
        let four = ["23", "24", "34", "45"];
        let labels: Vec<NodeLabel> = NodeLabel::all()
            .into_iter()
            .filter(|n| !four.contains(&n.to_string().as_str()))
            .collect();
        let body = certify_ulrich(&curve(), &quartic(), &MRecipe::Nodes(labels.clone())).unwrap();
        assert!(matches!(
            body.verdict,
            Verdict::Refuted {
                reason: Refutation::Invariance,
                ..
            }
        ));
        let n = nodes();
        let m = three_l_minus(&labels);
        assert_eq!(check_two_h_minus_m(&n, &m).unwrap().h0, 0);
        assert_eq!(check_m_minus_h(&n, &m).unwrap().h0, 0);
    }

    #[test]
    fn certificate_digest_is_stable() {
        let recipe = MRecipe::Nodes(DEFAULT_M_NODES.to_vec());
        let a = certify_ulrich(&curve(), &quartic(), &recipe).unwrap();
        let b = certify_ulrich(&curve(), &quartic(), &recipe).unwrap();
        assert_eq!(a.digest(), b.digest());
        let mut cert = UlrichCertificate::new(a, 0);
        assert!(cert.integrity_ok());
        cert.body.m = "L".into();
        assert!(!cert.integrity_ok());
    }

    #[test]
    fn descent_requires_certified_invariant_body() {
        let recipe = MRecipe::Nodes(DEFAULT_M_NODES.to_vec());
        let mut body = certify_ulrich(&curve(), &quartic(), &recipe).unwrap();
        assert!(matches!(descend_to_enriques(&body), Err(CohomologyError::NotCertified(_))));
        // A hand-marked body exercises the descent arithmetic.
        body.verdict = Verdict::Certified;
        let r = descend_to_enriques(&body).unwrap();
        assert_eq!((r.h_y.self_intersection, r.n.self_intersection, r.h0_h_y), (4, 6, 3));
        body.checks.retain(|c| c.name != "theta-invariance-m");
        assert!(matches!(descend_to_enriques(&body), Err(CohomologyError::NotInvariant)));
    }
}
