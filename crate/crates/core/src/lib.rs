//! Exact re-derivation of an Ulrich line bundle on a Kummer quartic that
//! covers an Enriques surface.
//!
//! The crate is organized bottom-up: exact scalars and linear algebra
//! ([`exactalg`]), sparse polynomials ([`polyring`]), a Buchberger engine
//! ([`groebner`]), the genus-2 Kummer geometry ([`kummer`]), the rank-17
//! Picard lattice ([`piclattice`]), the K3 lattice and its Enriques
//! involution ([`abstractlattice`]), the effectivity checks and certificate
//! ([`cohomology`]), the Enriques-side bookkeeping ([`enriques`]) and the
//! command-line surface ([`cli`]).

pub mod exactalg;
pub mod polyring;
pub mod groebner;
pub mod corpus;
pub mod kummer;
pub mod piclattice;
pub mod abstractlattice;
pub mod enriques;
pub mod cohomology;
pub mod cli;
