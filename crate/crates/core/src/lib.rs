//! Workbench for continuous-spectrum nonlinear Fourier transforms in
//! fiber-optic communication.
//!
//! The crate bundles:
//! - classical forward scattering solvers for the Zakharov-Shabat system
//!   ([`scattering`]) and a layer-peeling synthesis that inverts them
//!   ([`synthesis`]),
//! - an NFDM-QAM modem operating on the continuous spectrum ([`modem`]),
//! - a reproducible burst-dataset generator with a bit-exact file format
//!   ([`dataset`]),
//! - a from-scratch Conv1D/LSTM autoencoder with backprop and Adam for
//!   learned forward/inverse transforms ([`nn`]),
//! - evaluation harnesses mirroring RMSE-by-energy and back-to-back BER
//!   protocols ([`eval`]).

pub mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod rng;
pub mod scattering;
pub mod synthesis;

pub use error::{Error, Result};
pub use grid::{NonlinearGrid, SpectrumKind, SpectrumSamples, TimeGrid, TimeSignal};
