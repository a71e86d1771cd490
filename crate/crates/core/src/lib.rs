//! Fluctuation-induced lateral (motive) forces, radiative heat transfer and
//! friction between two parallel plates made of reciprocal or nonreciprocal
//! (magneto-optical) materials.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used by every physics module.
//! * [`materials`]: permittivity models (Lorentz oscillator, magnetised plasma, tables).
//! * [`fresnel`]: reflection matrices of a vacuum/half-space interface via 4×4 mode matching.
//! * [`flux`]: the per-wavevector heat-flux kernel between two plates.
//! * [`observables`]: integrated force, heat transfer, friction and spectral bounds.
//! * [`nearfield`]: closed-form near-field asymptotes and the `g` ratio function.
//! * [`engine`]: the dilute single-frequency heat-engine model.
//!
//! Frequencies inside the material models are photon energies in eV; all
//! conversions to SI go through [`constants::Constants`].

pub mod constants;
pub mod engine;
pub mod error;
pub mod flux;
pub mod fresnel;
pub mod materials;
pub mod nearfield;
pub mod observables;
pub mod quadrature;
pub mod thermal;

pub use error::{Error, Result};
