//! Simulator for EPR-pair bit commitment and collective coin flipping.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! the command line or JSON lives in the `eprcommit-cli` companion crate.

#![no_std]

extern crate alloc;

pub mod adversary;
pub mod encoding;
pub mod error;
pub mod multiparty;
pub mod protocol;
pub mod qsim;
pub mod randomness;
pub mod replay;
pub mod rng;

pub use error::{Error, Result};
