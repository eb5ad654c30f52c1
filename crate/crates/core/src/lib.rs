//! Models and solvers for intelligent-reflecting-surface (IRS) assisted links.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws geometry-driven fading channels and composes effective
//!   channels through one or more surfaces.
//! * [`irs_models`] turns a surface configuration (independent phase shifts,
//!   reactance networks, far-field scattering profiles) into a reflection
//!   operator, and models hardware impairments.
//! * [`codebook`] partitions a surface into tiles with precomputed transmission
//!   modes so that mode selection composes channels by summation.
//! * [`optim`] holds the generic machinery: manifold ascent, alternating
//!   optimisation, quadratic penalty, exhaustive search and branch-and-bound.
//! * [`scenarios`] wires everything into the secure-transmission and SWIPT
//!   power-minimisation problems.
//!
//! Monte-Carlo batches go through [`parallel`], which uses rayon when the
//! `parallel` feature is enabled and falls back to a sequential loop otherwise.

pub mod channel;
pub mod codebook;
pub mod error;
pub mod irs_models;
pub mod linalg;
pub mod optim;
pub mod parallel;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};
pub use num_complex::Complex64;
