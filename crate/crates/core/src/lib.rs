//! Desk-scale simulation toolkit for coherent-detector blinding attacks on a
//! continuous-variable QKD receiver.
//!
//! The crate models the full estimation chain of a polarization-diverse
//! coherent receiver: discrete-modulation security proof quantities
//! ([`constellation`], [`secproof`]), the optoelectronic front end with a
//! clipping ADC ([`rxsim`]), the reduced DSP pipeline and excess-noise
//! estimators ([`dsp`]), blinding-waveform design ([`blindwave`]), and the
//! experiment orchestration that sweeps noise and blinding powers
//! ([`harness`]).

pub mod blindwave;
pub mod config;
pub mod constellation;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod io;
pub mod rxsim;
pub mod secproof;

pub use error::{Error, Result};
