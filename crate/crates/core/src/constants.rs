//! Physical constants and unit conversions.
//!
//! Material parameters are photon energies in eV. Every conversion between
//! eV and SI angular frequencies or wavenumbers goes through a [`Constants`]
//! value so that the whole pipeline shares a single table.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Reduced Planck constant in eV·s.
    pub hbar_ev_s: f64,
    /// Reduced Planck constant in J·s.
    pub hbar_j_s: f64,
    /// Speed of light in m/s.
    pub c_m_s: f64,
    /// Boltzmann constant in eV/K.
    pub kb_ev_k: f64,
}

/// CODATA 2018 exact/recommended values.
pub const CODATA: Constants = Constants {
    hbar_ev_s: 6.582_119_569e-16,
    hbar_j_s: 1.054_571_817e-34,
    c_m_s: 299_792_458.0,
    kb_ev_k: 8.617_333_262e-5,
};

impl Default for Constants {
    fn default() -> Self {
        CODATA
    }
}

impl Constants {
    /// Angular frequency in rad/s of a photon with energy `e` in eV.
    #[inline]
    pub fn ev_to_rad_s(&self, e: f64) -> f64 {
        e / self.hbar_ev_s
    }

    #[inline]
    pub fn rad_s_to_ev(&self, omega: f64) -> f64 {
        omega * self.hbar_ev_s
    }

    /// Vacuum wavenumber ω/c in 1/m for a photon energy in eV.
    #[inline]
    pub fn k0_from_ev(&self, e: f64) -> f64 {
        self.ev_to_rad_s(e) / self.c_m_s
    }

    /// Thermal energy k_B T in eV.
    #[inline]
    pub fn thermal_ev(&self, t_kelvin: f64) -> f64 {
        self.kb_ev_k * t_kelvin
    }
}
