//! Exact computations in the bounded homotopy category of permutation
//! modules over a prime field: finite permutation groups, G-sets, the
//! tensor category of (signed) permutation modules, modular fixed-points
//! functors with a Brauer-quotient oracle, chain-complex homotopy decision
//! procedures, Koszul objects, and the set-level Balmer spectrum assembled
//! as a stratified poset.

pub mod group;
pub mod gset;
pub mod homotopy;
pub mod linalg;
pub mod permcat;
pub mod spectrum;
pub mod suites;
