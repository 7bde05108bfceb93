//! Linear array codes over finite fields and the geometry of their repair.
//!
//! Node `i` of an `(n, k, ℓ)` array code with `r = n − k` parity checks is a
//! block `H_i ∈ F_q^{rℓ×ℓ}` of the parity-check matrix. Its column space
//! `ℋ_i` and the projective points of its columns drive everything below.

pub mod blocks;
pub mod code;
pub mod constructions;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod repair;
pub mod sim;

pub use error::{Error, Result};
