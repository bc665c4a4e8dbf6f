//! Steady-state optical response of one-dimensional cold-atom lattices coupled
//! to linear and ring cavities.
//!
//! Two models of the coupled atom-cavity system are implemented side by side:
//!
//! * the **open Dicke model** (ODM), where all atoms couple to a fixed cavity
//!   mode function and the atomic distribution enters only through bunching
//!   parameters ([`bunching`], [`odm`]);
//! * the **transfer matrix model** (TMM), where pairs of counter-propagating
//!   field amplitudes are propagated through 2×2 matrices for mirrors, free
//!   space and atomic layers ([`mat2`], [`tmm`], [`ring`]).
//!
//! At low optical density the two models produce identical transmission,
//! reflection and absorption spectra; at high optical density the TMM
//! additionally resolves photonic band gaps formed by multiple Bragg
//! reflections inside the lattice. [`bloch`] evolves site populations under
//! Wannier-Bloch oscillations and feeds the resulting time-dependent bunching
//! back into the cavity response. [`scan`] orchestrates deterministic
//! parameter sweeps and all file I/O.

pub mod bloch;
pub mod bunching;
pub mod config;
pub mod error;
pub mod mat2;
pub mod odm;
pub mod params;
pub mod ring;
pub mod scan;
pub mod tmm;

pub use error::{Error, Result};
pub use params::{DerivedParams, Geometry, PhysParams};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
