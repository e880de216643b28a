//! Particle Fokker-Planck solver for rarefied monatomic gas flows.

// `!(x > 0.0)` rejects NaN as well; index loops mirror the tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod closure;
pub mod config;
pub mod diagnostics;
pub mod domain;
pub mod gas;
pub mod integrator;
pub mod poly;
pub mod rng;
pub mod scenario;
pub mod testkit;
