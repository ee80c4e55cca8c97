//! Steady states, dissipation rates, and topological dissipation bounds for
//! slowly driven spins coupled to a heat bath.

// Validation uses `!(x > 0.0)` on purpose: it rejects NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod bounds;
pub mod config;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod geometry;
pub mod model;
pub mod multiband;
pub mod rates;
pub mod symmetry;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
