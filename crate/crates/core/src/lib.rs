//! Simulation toolkit for the ((5,5,2)) codeword-stabilized quantum code.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevec`] – dense pure-state and density-matrix engine.
//! * [`error_model`] – single-qubit unitary errors and their Pauli expansion.
//! * [`code552`] – codewords, encoder, per-location decoders and brute-force
//!   verification of the error-correcting properties.
//! * [`nmr_noise`] – NMR Hamiltonian, dephasing channels and FID spectra.
//! * [`experiment`] – the three benchmark settings, observables and fits.
//! * [`report`] – CSV / JSON serialisation of sweep results.
//!
//! Sweeps are evaluated with rayon when the `parallel` feature is enabled
//! (the default); see [`parallel::Execution`].

pub mod code552;
pub mod error;
pub mod error_model;
pub mod experiment;
pub mod nmr_noise;
pub mod parallel;
pub mod report;
pub mod statevec;

pub use error::{Result, SimError};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for unitaries and density operators.
pub type CMatrix = nalgebra::DMatrix<C64>;
