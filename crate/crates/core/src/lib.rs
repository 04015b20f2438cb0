//! Topological signal processing on simplicial complexes, together with a
//! matrix-level simulator of the quantum circuits that implement the same
//! filters.
//!
//! The crate is organized bottom-up:
//!
//! * [`complex`] builds clique complexes of graphs and answers membership
//!   queries.
//! * [`homology`] derives boundary matrices, Hodge Laplacians, Betti numbers
//!   and the exact Hodge projectors.
//! * [`spectral_filter`] evaluates simplicial filters classically and checks
//!   the constraints a quantum realization imposes on them.
//! * [`qsp_poly`] designs bounded polynomials (phase factors, certified
//!   pseudoinverse and projection approximants).
//! * [`encoding`] maps simplices to basis states (direct and compact) and
//!   produces projected unitary encodings of boundary operators.
//! * [`qsvt`] runs singular value transformation sequences, linear
//!   combinations of unitaries, and the end-to-end filtering pipeline, with
//!   exact oracle-call accounting.
//! * [`resources`] turns filter parameters into gate/ancilla estimates and
//!   cross-checks them against the simulator's counters.
//!
//! With the default `parallel` feature the embarrassingly parallel loops
//! (block extraction, grid certification, batch spectra) run on rayon; without
//! it everything degrades to sequential loops with identical results.

pub mod complex;
pub mod encoding;
pub mod error;
pub mod homology;
pub mod linalg;
pub mod par;
pub mod qsp_poly;
pub mod qsvt;
pub mod resources;
pub mod spectral_filter;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
