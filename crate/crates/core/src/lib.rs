//! Asymptotic secret-key rates for the four-coherent-state CV-QKD protocol
//! with postselection, when part of the observed loss and noise comes from
//! a detector the eavesdropper cannot touch.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod error;
pub mod exec;
pub mod fock;
pub mod information;
pub mod quadrature;
pub mod rate;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use exec::Execution;
