//! Finite unital rings, their radical and idempotent structure, and bounded
//! checks of the Armendariz, weak Armendariz and J-Armendariz conditions.

pub mod checker;
pub mod constructions;
pub mod error;
pub mod poly;
pub mod ring;
pub mod structure;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use poly::NcPoly;
pub use ring::{Elem, FiniteRing, TableRing};
