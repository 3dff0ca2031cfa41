//! Numerical toolkit for Wiener amalgam spaces of (quasi)analytic ultradistributions.
//!
//! The crate evaluates, at desk scale, the computable objects of the theory:
//! Gevrey sequences and their associated functions, moderate weights, sampled
//! fields with a 2π-normalised Fourier transform, concrete local spaces,
//! uniformly concentrated partitions of unity (UCPUs) on lattices, continuous
//! and discrete amalgam norms, and the duality, retraction, interpolation and
//! short-time Fourier identities that tie them together.
//!
//! Every check reports a *slack* with the convention that a check passes when
//! `slack >= -tolerance`.

pub mod amalgam;
pub mod cli;
pub mod duality_interp;
pub mod error;
pub mod field;
pub mod gevrey;
pub mod local_norms;
pub mod numeric;
pub mod ucpu;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
