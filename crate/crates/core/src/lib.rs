//! Generalized metric spaces over distance monoids.
//!
//! A distance monoid is a linearly ordered commutative monoid `(M, ⊕, ⪯, 0)`
//! with `0` least and `⊕` monotone. This crate covers:
//!
//! - [`monoid`]: finite Cayley-table monoids and the parametric built-ins
//!   (truncated rationals, ultrametric, infinitesimal), axiom checks and the
//!   4-values condition.
//! - [`blocks`]: archimedean block decomposition and block-types.
//! - [`mus`]: maximum useful distances, important summands and the derived
//!   size bounds.
//! - [`graph`] and [`order`]: partial distance graphs, shortest-path
//!   completion, non-metric cycles, amalgamation and convex orders.
//! - [`lstar`]: ball-vertex expansions, their completion and bounded
//!   obstructions.
//! - [`oracle`]: brute-force reference enumerations used by the tests.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blocks;
pub mod error;
pub mod graph;
pub mod lstar;
pub mod monoid;
pub mod mus;
pub mod oracle;
pub mod order;

pub use blocks::{BlockDecomposition, BlockId, BlockType};
pub use error::{Error, Result};
pub use graph::{CycleWitness, MGraph};
pub use lstar::LStar;
pub use monoid::{DistanceMonoid, Elem, MonoidKind, Q};

/// Outcome of a decision procedure that may produce a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    /// Checked by enumeration.
    Holds,
    /// Known to hold for the parametric family without enumeration.
    HoldsAnalytically,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Fails(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}
