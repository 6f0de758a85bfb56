//! Finite abelian groups, characteristic functions of distributions on them,
//! and numerical checks of Gaussian characterization results for linear forms.

pub mod group;
pub mod homs;
pub mod dist;
pub mod feq;
pub mod harness;
pub mod cli;
