//! Symbolic-numeric toolkit for k-symplectic Lie systems.

pub mod expr;
pub mod geom;
pub mod ksymp;
pub mod liealg;
mod linalg;
pub mod motion;
pub mod prolong;
pub mod registry;
