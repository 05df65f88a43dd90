//! Dependent-entry random projections and sketches.
//!
//! Everything in this crate is `no_std` + `alloc`: samplers for processes
//! adapted to a latent sequence, exact d-separation over small DAGs,
//! complexity measures of matrix sets with the matching deviation bounds,
//! concrete sketching operators, and a Monte-Carlo harness that checks the
//! inequalities those bounds rest on.
//!
//! File formats, the command line and thread-pool execution live in the
//! `depsketch` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod complexity;
pub mod error;
pub mod exec;
pub mod fft;
pub mod graph;
pub mod linalg;
pub mod processes;
pub mod rng;
pub mod stats;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use linalg::Matrix;
