//! Numerics on the Enriques quotient `Y = X / theta` and the bookkeeping
//! that carries an Ulrich class on `X` down to `Y`.
//!
//! `K_Y` is numerically trivial, so `N` and `N + K_Y` share every number
//! here.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnriquesError {
    #[error("{0} is odd; the class does not come from the quotient")]
    Odd(i64),
    #[error("self-intersection {0} is odd, impossible on an Enriques surface")]
    OddSquare(i64),
    #[error("descent premise failed: {0}")]
    Premise(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnriquesName {
    #[serde(rename = "H_Y")]
    HY,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "N+K_Y")]
    NKY,
    #[serde(rename = "O_Y")]
    Trivial,
}

impl fmt::Display for EnriquesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnriquesName::HY => "H_Y",
            EnriquesName::N => "N",
            EnriquesName::NKY => "N+K_Y",
            EnriquesName::Trivial => "O_Y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnriquesClass {
    pub name: EnriquesName,
    pub self_intersection: i64,
    pub dot_with_h: i64,
}

/// `x / 2` for an even pairing on the double cover.
pub fn halve(x_pairing: i64) -> Result<i64, EnriquesError> {
    if x_pairing % 2 != 0 {
        return Err(EnriquesError::Odd(x_pairing));
    }
    Ok(x_pairing / 2)
}

/// `chi(D) = 1 + D^2 / 2`.
pub fn chi_enriques(d: &EnriquesClass) -> Result<i64, EnriquesError> {
    if d.self_intersection % 2 != 0 {
        return Err(EnriquesError::OddSquare(d.self_intersection));
    }
    Ok(1 + d.self_intersection / 2)
}

/// The facts a descent step may rest on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Citation {
    /// The certificate on `X` verified every Ulrich condition.
    UlrichCertificate,
    /// A `theta`-invariant class lies in the invariant lattice and is a
    /// pullback from `Y` (Horikawa).
    InvariantLatticePullback,
    /// `sigma_* sigma^* N = N + (N + K_Y)` for the étale double cover.
    ProjectionFormula,
    /// The pushforward of an Ulrich bundle along a finite map of
    /// polarized varieties is Ulrich.
    FinitePushforward,
    /// A direct summand of an Ulrich bundle is Ulrich.
    DirectSummand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentInference {
    pub premise: String,
    pub conclusion: String,
    pub citation: Citation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub chain: Vec<DescentInference>,
    pub failed_premise: Option<String>,
}

impl Transfer {
    pub fn succeeded(&self) -> bool {
        self.failed_premise.is_none()
    }
}

pub const CONCLUSION: &str = "N is H_Y-Ulrich";

pub fn ulrich_transfer(certified: bool, invariant: bool) -> Transfer {
    if !certified {
        return Transfer {
            chain: vec![],
            failed_premise: Some("M is certified H_X-Ulrich".into()),
        };
    }
    if !invariant {
        return Transfer {
            chain: vec![],
            failed_premise: Some("H_X and M are theta*-invariant".into()),
        };
    }
    let chain = vec![
        DescentInference {
            premise: "H_X and M are theta*-invariant".into(),
            conclusion: "H_X = sigma^* H_Y and M = sigma^* N".into(),
            citation: Citation::InvariantLatticePullback,
        },
        DescentInference {
            premise: "M is H_X-Ulrich and M = sigma^* N".into(),
            conclusion: "sigma_* M = N + (N + K_Y) is H_Y-Ulrich".into(),
            citation: Citation::FinitePushforward,
        },
        DescentInference {
            premise: "sigma_* M = N + (N + K_Y) is H_Y-Ulrich".into(),
            conclusion: format!("{CONCLUSION}, and so is N + K_Y"),
            citation: Citation::DirectSummand,
        },
    ];
    Transfer {
        chain,
        failed_premise: None,
    }
}

/// The Y-side report built from X-side pairings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnriquesReport {
    pub h_y: EnriquesClass,
    pub n: EnriquesClass,
    pub n_plus_k_y: EnriquesClass,
    pub chi_h_y: i64,
    /// `h^0(H_Y) = h^0(K_Y + H_Y)`; higher cohomology of an ample class
    /// of positive square vanishes on an Enriques surface.
    pub h0_h_y: i64,
    pub h0_k_y_plus_h_y: i64,
    pub chi_n: i64,
    pub transfer: Transfer,
    pub conclusion: String,
    pub also_ulrich: String,
}

/// X-side pairings of the certified classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSide {
    pub h_squared: i64,
    pub m_dot_h: i64,
    pub m_squared: i64,
}

pub fn descend(x: XSide, certified: bool, invariant: bool) -> Result<EnriquesReport, EnriquesError> {
    let transfer = ulrich_transfer(certified, invariant);
    if let Some(p) = &transfer.failed_premise {
        return Err(EnriquesError::Premise(p.clone()));
    }
    let hy2 = halve(x.h_squared)?;
    let n_h = halve(x.m_dot_h)?;
    let n2 = halve(x.m_squared)?;
    let h_y = EnriquesClass {
        name: EnriquesName::HY,
        self_intersection: hy2,
        dot_with_h: hy2,
    };
    let n = EnriquesClass {
        name: EnriquesName::N,
        self_intersection: n2,
        dot_with_h: n_h,
    };
    let n_plus_k_y = EnriquesClass {
        name: EnriquesName::NKY,
        ..n
    };
    let chi_h_y = chi_enriques(&h_y)?;
    Ok(EnriquesReport {
        h_y,
        n,
        n_plus_k_y,
        chi_h_y,
        h0_h_y: chi_h_y,
        h0_k_y_plus_h_y: chi_h_y,
        chi_n: chi_enriques(&n)?,
        transfer,
        conclusion: CONCLUSION.to_string(),
        also_ulrich: "N+K_Y is H_Y-Ulrich".to_string(),
    })
}

impl fmt::Display for EnriquesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "H_Y^2 = {}", self.h_y.self_intersection)?;
        writeln!(f, "N.H_Y = {}", self.n.dot_with_h)?;
        writeln!(f, "N^2 = {}", self.n.self_intersection)?;
        writeln!(f, "h0(H_Y) = h0(K_Y + H_Y) = {}", self.h0_h_y)?;
        for (k, step) in self.transfer.chain.iter().enumerate() {
            writeln!(f, "  {}. {} => {}", k + 1, step.premise, step.conclusion)?;
        }
        writeln!(f, "conclusion: {}", self.conclusion)?;
        write!(f, "also: {}", self.also_ulrich)
    }
}
