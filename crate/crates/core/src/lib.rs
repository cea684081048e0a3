//! Desk-scale numerical verification of lattice Yang-Mills stability bounds.
//!
//! The crate covers U(N) numerics ([`group`]), hypercubic lattice geometry and
//! the enhanced temporal gauge ([`lattice`]), the Wilson plaquette action
//! ([`action`]), class-function integration over U(N) ([`weyl`]), the
//! single-plaquette partition functions and their closed-form bounds
//! ([`bounds`]), Monte Carlo estimates of full partition functions and
//! plaquette-field generating functionals ([`partition`]), and the lattice
//! free scalar field ([`scalar`]).

pub mod action;
pub mod bounds;
pub mod error;
pub mod group;
pub mod lattice;
pub mod partition;
pub mod quad;
pub mod special;
pub mod rng;
pub mod scalar;
pub mod weyl;

pub use error::{Error, Result};
