//! Uniform spanning tree pattern fields on weighted graphs.
//!
//! The crate computes transfer currents `T(e, f)` from Green functions and
//! uses them as the kernel of the determinantal edge process of the
//! (weighted) uniform spanning tree: edge and pattern probabilities, joint
//! cumulants, counting statistics, Wilson sampling, forest and unicycle
//! identities, sandpile minimal-pattern probabilities and the intensity of
//! pattern fields. Exhaustive enumeration on small graphs serves as the
//! ground truth for all of it.
//!
//! `no_std` with `alloc`; IO, CLI and parallel drivers live in the `ustfield`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod builders;
pub mod dpp;
pub mod fields;
pub mod forests;
pub mod graph;
pub mod green;
pub mod linalg;
pub mod oracle;
pub mod sandpile;
pub mod stats;
