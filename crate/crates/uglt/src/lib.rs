//! Numerical toolkit for the generalized locally Toeplitz (GLT) calculus.
//!
//! The crate builds lattice grids over hypercubes, bounded domains and
//! unbounded domains of finite measure, assembles multilevel Toeplitz and
//! diagonal sampling matrices, implements the restriction/extension
//! (selection) operators between grids together with their exact algebraic
//! identities, and provides the spectral machinery (pseudo-metrics,
//! Wasserstein comparison of empirical spectral measures, g.a.c.s.
//! certificates) needed to validate spectral-symbol claims numerically.
//!
//! The `examples/` directory is the primary tour of the API; the `uglt`
//! binary exposes the same capabilities as subcommands.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod grid;
pub mod selection;
pub mod sequence;
pub mod spectral;

pub use error::{Error, Result};
