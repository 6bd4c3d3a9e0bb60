//! Quantum macroscopicity toolkit.
//!
//! Computes the extensive size `N_ext = F/(4 A0^2)` and the entangled size
//! `N_ent = F/(4 sum_i Var(A_i))` of a state with respect to an extensive
//! observable, where `F` is the quantum Fisher information. Inputs can be
//! explicit density matrices, thermal oscillator models, Wigner-function grids
//! or matter-wave fringe scans.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod diffraction;
pub mod fisher;
pub mod measures;
pub mod oscillator;
pub mod quantum;
pub mod wigner;

pub use num_complex::Complex64;
