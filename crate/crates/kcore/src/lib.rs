//! k-core stripping on sparse random r-uniform hypergraphs.
//!
//! This crate bundles the pieces needed to study the k-core peeling process
//! near its emergence threshold:
//!
//! * [`numeric`] — Poisson tail functions, the truncated-Poisson mean
//!   `g_k`, its inverse, and the density `h(mu) = mu / f_{k-1}(mu)^{r-1}`
//!   whose minimum locates the threshold.
//! * [`thresholds`] — the critical point solver (`mu_rk`, `c_rk`, core
//!   fractions `alpha`/`beta`, core average degree `zeta`) and a battery of
//!   closed-form identity checks.
//! * [`hypergraph`] — seeded samplers for uniform simple hypergraphs, the
//!   allocation-partition (AP) configuration model, and heavy degree
//!   sequences conditioned to a fixed copy total.
//! * [`stripping`] — the peeling engines: parallel rounds, the sequential
//!   one-edge-per-step variant with full trajectory instrumentation, a naive
//!   reference core finder, and per-round removal statistics.
//! * [`depth`] — layered certificates bounding how many deletions are needed
//!   to reach a given non-core vertex, plus an exhaustive oracle for tiny
//!   instances.
//! * [`stats`] / [`diagnostics`] — log-log scaling fits with bootstrap
//!   confidence intervals, and per-round contraction diagnostics.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature is
//! on by default. All randomized routines take explicit 64-bit seeds and use
//! the pinned generator from [`rng`], so outputs are reproducible across
//! platforms.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod depth;
pub mod diagnostics;
mod error;
pub mod hypergraph;
mod math;
pub mod numeric;
mod params;
pub mod rng;
pub mod stats;
pub mod stripping;
pub mod thresholds;

pub use error::Error;
pub use params::{ParamsRK, RealTol};
