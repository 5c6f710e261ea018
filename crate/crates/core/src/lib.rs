//! Quantum reservoir computing for discrete chaotic maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`chaos`] generates logistic and Hénon orbits, normalises them into
//!   supervised datasets and estimates the largest Lyapunov exponent.
//! * [`quantum`] is a dense, exact simulator for a transverse XY chain:
//!   Hamiltonian construction, unitary and dephasing propagation, qubit
//!   encoding, injection and partial traces.
//! * [`reservoir`] runs the layered encode/evolve/discard protocol over a
//!   window of past values and produces Pauli-X feature vectors.
//! * [`readout`] fits the ridge readout and scores predictions.
//! * [`experiments`] holds the sweep, grid, noise and ensemble drivers.
//! * [`io`] and [`cli`] deal with configuration, manifests and artifacts.

pub mod chaos;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod quantum;
pub mod readout;
pub mod reservoir;
pub mod seeding;

pub use error::{QrcError, Result};
