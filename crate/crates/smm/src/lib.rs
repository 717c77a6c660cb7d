//! Scrambled quasi-Monte Carlo point sets and simulation-based moment estimators.
//!
//! The crate is organised in layers:
//!
//! - [`rng`]: a counter-based hash generator used for pseudo-random draws and
//!   for the random bits consumed by scrambling. Every random quantity in the
//!   crate is a pure function of a `u64` key, so runs are reproducible across
//!   thread counts and platforms.
//! - [`qmc`]: Sobol point construction from direction numbers, Owen-style
//!   nested uniform scrambling, digital shifts, star discrepancy, and the
//!   inverse normal CDF used to map uniforms to gaussian shocks.
//! - [`samplers`]: a small façade that turns a draw specification
//!   (method, sample sizes, dimension, seed) into uniform or gaussian shock
//!   arrays with a fixed memory layout.
//! - [`models`]: simulable models (mean/variance, binary choice, ARMA(1,1),
//!   and a heterogeneous income process) behind a common trait.
//! - [`estimators`]: the method-of-moments objective, a Nelder–Mead
//!   minimiser, the estimation drivers, and standard-error machinery.
//! - [`harness`]: Monte Carlo replication studies, integration-rate studies,
//!   and the preset experiment tables, with CSV/JSON output.

pub mod estimators;
pub mod harness;
pub mod models;
pub mod qmc;
pub mod rng;
pub mod samplers;
