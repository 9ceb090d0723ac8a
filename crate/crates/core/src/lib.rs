//! Orthogonal polynomials on the unit circle driven by Verblunsky coefficients
//! of arbitrary modulus (no coefficient on the circle itself).
//!
//! [`verblunsky`] holds the Szegő recurrence and the Carathéodory function,
//! [`schur`] the Schur algorithm and its inverse, [`analysis`] the sum rule,
//! zero counts and moment diagnostics, and [`cli`] the command-line front end.

pub mod poly;
pub mod verblunsky;
pub mod schur;
pub mod analysis;
pub mod cli;
