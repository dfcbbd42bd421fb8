//! Norms on the first cohomology of triangulated hyperbolic 3-manifolds.
//!
//! This crate computes, for a cusped (or closed, with ingested data) hyperbolic
//! 3-manifold `M` given by an ideal triangulation, the family of norms on
//! `Im(H¹_c(M) → H¹(M))` that enter the comparison inequalities
//!
//! ```text
//!   π/√vol(M) · ‖φ‖_Th  ≤  ‖φ‖_L²  ≤  max{ 10π/√sys(M), 4.86π√(1 + d²/2) } · ‖φ‖_Th
//! ```
//!
//! together with the intermediate chain `π‖φ‖_Th ≤ ‖φ‖_LA = ‖φ‖_L¹ ≤ √vol·‖φ‖_L²`,
//! the L∞ comparison `‖φ‖_L∞ ≤ max{ 5/√sys, 2.43√(1+d²/2) }·‖φ‖_L²`, and the
//! sharpness functionals `D_i ≤ D_s` (infimum/supremum over harmonic classes of
//! `π‖φ‖_Th/(√vol·‖φ‖_L²)`).
//!
//! The pipeline: parse a triangulated manifold, build a truncated metric mesh
//! (Regge edge lengths on a simplicial complex), compute harmonic cochain
//! representatives with relative boundary conditions, evaluate L¹/L²/L∞ by
//! Whitney reconstruction, evaluate the Thurston norm from ingested ball data or
//! a dual-surface χ₋ bound, and assemble the inequality report.

pub mod bessel;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod hyper;
pub mod io;
pub mod lattice;
pub mod link;
pub mod lobachevsky;
pub mod manifold;
pub mod mesh;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
