//! Analysis toolkit for LT fountain codes under the Poisson reception model.
//!
//! In the Poisson model every `d`-subset of the `k` input symbols is received
//! independently with probability `p_d = n·Ω_d / C(k, d)`, so the number of
//! received output symbols is random with mean `n`. The crate provides:
//!
//! - [`degree_dist`]: degree distributions (ideal/robust soliton, JSON I/O)
//! - [`sampler`]: sampling code instances and XOR payload encoding
//! - [`peeling`]: the belief-propagation (peeling) decoder with ripple tracking
//! - [`asymptotic`]: the limiting recoverable fraction `z*`
//! - [`finite_length`]: exact failure probability by dynamic programming,
//!   a generating-polynomial engine and a brute-force oracle for tiny `k`
//! - [`bounds`]: concentration tails and fixed-count sandwich bounds
//! - [`montecarlo`]: a seeded, parallel simulation harness

pub mod asymptotic;
pub mod bigfloat;
pub mod bounds;
pub mod degree_dist;
pub mod error;
pub mod fft;
pub mod finite_length;
pub mod montecarlo;
pub mod numeric;
pub mod peeling;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
