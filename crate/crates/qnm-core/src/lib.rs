//! Quasinormal modes of open electromagnetic resonators.
//!
//! Analytic modes of a dielectric slab and of a sphere, four ways of
//! normalizing them, and a discretized 1D solver with perfectly matched
//! layers whose full spectrum (modes plus numerical modes) is complete.
//!
//! The crate builds without `std` (it needs `alloc`).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod consts;
mod error;
pub mod fdfd1d;
pub mod linalg;
pub mod materials;
pub mod mie;
pub mod norms;
pub mod slab1d;
pub mod specfun;

pub use error::{Error, Result};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use num_complex::Complex64 as C64;

pub use materials::MaterialModel;
pub use mie::{MieMode, Polarization, SphereGeometry};
pub use norms::{NormMethod, NormResult, PmlMap};
pub use slab1d::{SlabGeometry, SlabMode};
