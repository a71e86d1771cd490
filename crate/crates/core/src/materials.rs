//! Permittivity models.
//!
//! Lab frame: x is the static magnetic-field axis, z the surface normal.
//! All frequencies are photon energies in eV.

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Cyclotron energy of the n-InSb preset per tesla.
pub const INSB_OMEGA_B_PER_TESLA: f64 = 0.0153 / 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    pub eps_inf: f64,
    pub omega_lo: f64,
    pub omega_to: f64,
    pub gamma: f64,
}

impl LorentzParams {
    pub const SIC: LorentzParams = LorentzParams {
        eps_inf: 6.7,
        omega_lo: 0.12,
        omega_to: 0.098,
        gamma: 5.88e-4,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_inf > 0.0
            && self.omega_to > 0.0
            && self.omega_lo > self.omega_to
            && self.gamma >= 0.0
            && self.omega_lo.is_finite()
            && self.gamma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Lorentz parameters need eps_inf > 0, omega_LO > omega_TO > 0, gamma >= 0: {self:?}"
            )))
        }
    }

    /// Frequency at which ε = −1 (surface phonon polariton against vacuum).
    pub fn surface_mode(&self) -> f64 {
        ((self.eps_inf * self.omega_lo.powi(2) + self.omega_to.powi(2)) / (self.eps_inf + 1.0))
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetoPlasmaParams {
    pub omega_p: f64,
    pub omega_tau: f64,
    /// Cyclotron energy; its sign carries the field orientation.
    pub omega_b: f64,
}

impl MagnetoPlasmaParams {
    /// n-InSb in a field of `tesla` along +x.
    pub fn insb(tesla: f64) -> Self {
        Self {
            omega_p: 0.51,
            omega_tau: 4.1357e-3,
            omega_b: INSB_OMEGA_B_PER_TESLA * tesla,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega_p > 0.0
            && self.omega_tau > 0.0
            && self.omega_p.is_finite()
            && self.omega_tau.is_finite()
            && self.omega_b.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "magneto-plasma parameters need omega_p > 0, omega_tau > 0, finite omega_b: {self:?}"
            )))
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            omega_b: -self.omega_b,
            ..*self
        }
    }
}

/// A 3×3 complex permittivity tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricTensor(pub Matrix3<Complex64>);

impl DielectricTensor {
    pub fn isotropic(eps: Complex64) -> Self {
        Self(Matrix3::from_diagonal_element(eps))
    }

    pub fn identity() -> Self {
        Self::isotropic(ONE)
    }

    /// Tensor with the structure [[ε_p,0,0],[0,ε_d,−iε_f],[0,iε_f,ε_d]].
    pub fn gyrotropic(eps_p: Complex64, eps_d: Complex64, eps_f: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self(Matrix3::new(
            eps_p,
            z,
            z,
            z,
            eps_d,
            -I * eps_f,
            z,
            I * eps_f,
            eps_d,
        ))
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// The tensor seen after the reflection z → −z, M ε M with M = diag(1, 1, −1).
    pub fn mirrored_z(&self) -> Self {
        let mut m = self.0;
        for k in 0..2 {
            m[(k, 2)] = -m[(k, 2)];
            m[(2, k)] = -m[(2, k)];
        }
        Self(m)
    }

    /// ε_d, i.e. the zz entry.
    pub fn eps_d(&self) -> Complex64 {
        self.0[(2, 2)]
    }

    /// ε_f recovered from the yz entry (−iε_f).
    pub fn eps_f(&self) -> Complex64 {
        I * self.0[(1, 2)]
    }

    fn scale(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0)
    }

    /// Reciprocal media have symmetric permittivity tensors.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.scale();
        (0..3).all(|i| (0..3).all(|j| (self.0[(i, j)] - self.0[(j, i)]).norm() <= tol))
    }

    pub fn is_isotropic(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.scale();
        let d = self.0[(0, 0)];
        (0..3).all(|i| {
            (0..3).all(|j| {
                let expect = if i == j { d } else { Complex64::new(0.0, 0.0) };
                (self.0[(i, j)] - expect).norm() <= tol
            })
        })
    }

    /// (ε − ε†)/(2i), Hermitian.
    pub fn anti_hermitian_part(&self) -> Matrix3<Complex64> {
        (self.0 - self.0.adjoint()) / (2.0 * I)
    }
}

/// True iff every eigenvalue of (ε − ε†)/(2i) is ≥ −1e−12.
pub fn passivity_check(t: &DielectricTensor) -> bool {
    if t.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return false;
    }
    let a = t.anti_hermitian_part();
    // Enforce exact Hermiticity before the symmetric solver.
    let a = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(a);
    eig.eigenvalues.iter().all(|&l| l >= -1e-12)
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("frequency must be positive, got {omega} eV")))
    }
}

/// ε(ω) = ε_∞(ω² − ω_LO² + iωγ)/(ω² − ω_TO² + iωγ).
pub fn lorentz_eps(omega: f64, p: &LorentzParams) -> Result<Complex64> {
    check_omega(omega)?;
    let w2 = omega * omega;
    let num = Complex64::new(w2 - p.omega_lo * p.omega_lo, omega * p.gamma);
    let den = Complex64::new(w2 - p.omega_to * p.omega_to, omega * p.gamma);
    if den.norm() == 0.0 {
        return Err(Error::Domain(format!(
            "lossless Lorentz pole at omega = omega_TO = {omega} eV"
        )));
    }
    Ok(p.eps_inf * num / den)
}

/// (ε_p, ε_d, ε_f) of a magnetised Drude plasma.
pub fn magnetoplasma_components(
    omega: f64,
    p: &MagnetoPlasmaParams,
) -> Result<(Complex64, Complex64, Complex64)> {
    check_omega(omega)?;
    let wp2 = p.omega_p * p.omega_p;
    let z = Complex64::new(omega, p.omega_tau);
    let eps_p = ONE - wp2 / (omega * z);
    if p.omega_b == 0.0 {
        return Ok((eps_p, eps_p, Complex64::new(0.0, 0.0)));
    }
    let den = z * z - p.omega_b * p.omega_b;
    let eps_d = ONE - wp2 * (ONE + I * (p.omega_tau / omega)) / den;
    let eps_f = -p.omega_b * wp2 / (omega * den);
    Ok((eps_p, eps_d, eps_f))
}

pub fn magnetoplasma_tensor(omega: f64, p: &MagnetoPlasmaParams) -> Result<DielectricTensor> {
    let (eps_p, eps_d, eps_f) = magnetoplasma_components(omega, p)?;
    Ok(DielectricTensor::gyrotropic(eps_p, eps_d, eps_f))
}

/// Scalar permittivity sampled on a strictly increasing grid of positive
/// frequencies; interpolated linearly in log ω, real and imaginary parts
/// independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedModel {
    omega: Vec<f64>,
    eps: Vec<Complex64>,
}

impl TabulatedModel {
    pub fn new(omega: Vec<f64>, eps: Vec<Complex64>) -> Result<Self> {
        if omega.len() != eps.len() || omega.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated permittivity needs at least two (omega, eps) samples of equal length"
                    .into(),
            ));
        }
        if omega[0] <= 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated frequencies must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { omega, eps })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.omega.iter().copied().zip(self.eps.iter().copied())
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::OutOfRange {
                omega_ev: omega,
                min_ev: lo,
                max_ev: hi,
            });
        }
        let idx = self.omega.partition_point(|&w| w <= omega).clamp(1, self.omega.len() - 1);
        let (w0, w1) = (self.omega[idx - 1], self.omega[idx]);
        let t = (omega / w0).ln() / (w1 / w0).ln();
        let (e0, e1) = (self.eps[idx - 1], self.eps[idx]);
        Ok(Complex64::new(
            e0.re + t * (e1.re - e0.re),
            e0.im + t * (e1.im - e0.im),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MaterialModel {
    Lorentz(LorentzParams),
    MagnetoPlasma(MagnetoPlasmaParams),
    IsotropicConstant { eps: Complex64 },
    Tabulated(TabulatedModel),
}

impl MaterialModel {
    /// Built-in presets: `SiC`, `InSb-B10T`, and generally `InSb-B<x>T`
    /// for a field of x tesla (negative values reverse the field).
    pub fn preset(name: &str) -> Result<Self> {
        if name.eq_ignore_ascii_case("SiC") {
            return Ok(Self::Lorentz(LorentzParams::SIC));
        }
        if name.eq_ignore_ascii_case("InSb") {
            return Ok(Self::MagnetoPlasma(MagnetoPlasmaParams::insb(0.0)));
        }
        if let Some(field) = name
            .strip_prefix("InSb-B")
            .and_then(|rest| rest.strip_suffix('T'))
            .and_then(|b| b.parse::<f64>().ok())
            .filter(|b| b.is_finite())
        {
            return Ok(Self::MagnetoPlasma(MagnetoPlasmaParams::insb(field)));
        }
        Err(Error::Config(format!(
            "unknown material preset '{name}' (known: SiC, InSb, InSb-B<field>T)"
        )))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Lorentz(p) => p.validate(),
            Self::MagnetoPlasma(p) => p.validate(),
            Self::IsotropicConstant { eps } => {
                if eps.re.is_finite() && eps.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("constant permittivity must be finite".into()))
                }
            }
            Self::Tabulated(_) => Ok(()),
        }
    }

    pub fn tensor(&self, omega: f64) -> Result<DielectricTensor> {
        match self {
            Self::Lorentz(p) => lorentz_eps(omega, p).map(DielectricTensor::isotropic),
            Self::MagnetoPlasma(p) => magnetoplasma_tensor(omega, p),
            Self::IsotropicConstant { eps } => {
                check_omega(omega)?;
                Ok(DielectricTensor::isotropic(*eps))
            }
            Self::Tabulated(t) => {
                check_omega(omega)?;
                t.eval(omega).map(DielectricTensor::isotropic)
            }
        }
    }

    /// True when the model is reciprocal at every frequency.
    pub fn is_reciprocal(&self) -> bool {
        match self {
            Self::MagnetoPlasma(p) => p.omega_b == 0.0,
            _ => true,
        }
    }

    /// Same material with the magnetic field reversed.
    pub fn field_reversed(&self) -> Self {
        match self {
            Self::MagnetoPlasma(p) => Self::MagnetoPlasma(p.reversed()),
            other => other.clone(),
        }
    }

    /// Characteristic frequencies (eV) where the response varies sharply.
    pub fn features(&self) -> Vec<f64> {
        let mut out = match self {
            Self::Lorentz(p) => vec![p.omega_to, p.omega_lo, p.surface_mode()],
            Self::MagnetoPlasma(p) => {
                let b = p.omega_b.abs();
                let sp = p.omega_p / std::f64::consts::SQRT_2;
                let mut v = vec![p.omega_p, sp];
                if b > 0.0 {
                    let root = (0.25 * b * b + 0.5 * p.omega_p * p.omega_p).sqrt();
                    v.extend([b, root + 0.5 * b, root - 0.5 * b]);
                }
                v
            }
            Self::IsotropicConstant { .. } => vec![],
            Self::Tabulated(t) => {
                let (lo, hi) = t.range();
                vec![lo, hi]
            }
        };
        out.retain(|w| *w > 0.0 && w.is_finite());
        out
    }

    /// Valid frequency range in eV, if restricted.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            Self::Tabulated(t) => Some(t.range()),
            _ => None,
        }
    }
}

/// Material description as written in configuration files.
///
/// ```toml
/// preset = "InSb-B10T"
/// ```
/// or an inline model:
/// ```toml
/// model = "lorentz"
/// eps_inf = 6.7
/// omega_lo = 0.12
/// omega_to = 0.098
/// gamma = 5.88e-4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Preset { preset: String },
    Inline(InlineMaterial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum InlineMaterial {
    Lorentz {
        eps_inf: f64,
        omega_lo: f64,
        omega_to: f64,
        gamma: f64,
    },
    MagnetoPlasma {
        omega_p: f64,
        omega_tau: f64,
        #[serde(default)]
        omega_b: Option<f64>,
        /// Field in tesla; converted with the InSb cyclotron ratio when
        /// `omega_b` is absent.
        #[serde(default)]
        field_tesla: Option<f64>,
    },
    Constant {
        eps_re: f64,
        #[serde(default)]
        eps_im: f64,
    },
    Tabulated {
        omega: Vec<f64>,
        eps_re: Vec<f64>,
        eps_im: Vec<f64>,
    },
}

impl MaterialSpec {
    pub fn build(&self) -> Result<MaterialModel> {
        let model = match self {
            Self::Preset { preset } => MaterialModel::preset(preset)?,
            Self::Inline(InlineMaterial::Lorentz {
                eps_inf,
                omega_lo,
                omega_to,
                gamma,
            }) => MaterialModel::Lorentz(LorentzParams {
                eps_inf: *eps_inf,
                omega_lo: *omega_lo,
                omega_to: *omega_to,
                gamma: *gamma,
            }),
            Self::Inline(InlineMaterial::MagnetoPlasma {
                omega_p,
                omega_tau,
                omega_b,
                field_tesla,
            }) => {
                let omega_b = match (omega_b, field_tesla) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config(
                            "give either omega_b or field_tesla, not both".into(),
                        ))
                    }
                    (Some(b), None) => *b,
                    (None, Some(t)) => INSB_OMEGA_B_PER_TESLA * t,
                    (None, None) => 0.0,
                };
                MaterialModel::MagnetoPlasma(MagnetoPlasmaParams {
                    omega_p: *omega_p,
                    omega_tau: *omega_tau,
                    omega_b,
                })
            }
            Self::Inline(InlineMaterial::Constant { eps_re, eps_im }) => {
                MaterialModel::IsotropicConstant {
                    eps: Complex64::new(*eps_re, *eps_im),
                }
            }
            Self::Inline(InlineMaterial::Tabulated {
                omega,
                eps_re,
                eps_im,
            }) => {
                if eps_re.len() != eps_im.len() {
                    return Err(Error::Config(
                        "eps_re and eps_im must have the same length".into(),
                    ));
                }
                let eps = eps_re
                    .iter()
                    .zip(eps_im)
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect();
                MaterialModel::Tabulated(TabulatedModel::new(omega.clone(), eps)?)
            }
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn lorentz_zero_at_lo_without_damping() {
        let p = LorentzParams {
            gamma: 0.0,
            ..LorentzParams::SIC
        };
        assert_eq!(lorentz_eps(p.omega_lo, &p).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lorentz_limits() {
        let p = LorentzParams::SIC;
        let hi = lorentz_eps(1e4, &p).unwrap();
        assert!((hi.re - 6.7).abs() < 1e-6 && hi.im.abs() < 1e-6);
        let lo = lorentz_eps(1e-9, &p).unwrap();
        let static_eps = 6.7 * 0.12f64.powi(2) / 0.098f64.powi(2);
        assert!((lo.re - static_eps).abs() < 1e-6);
        assert!((static_eps - 10.046).abs() < 1e-3);
        assert!(lorentz_eps(0.0, &p).is_err());
        assert!(lorentz_eps(-1.0, &p).is_err());
    }

    #[test]
    fn sic_surface_mode_is_minus_one() {
        let p = LorentzParams {
            gamma: 0.0,
            ..LorentzParams::SIC
        };
        let e = lorentz_eps(p.surface_mode(), &p).unwrap();
        assert!((e.re + 1.0).abs() < 1e-10);
    }

    #[test]
    fn magnetoplasma_isotropic_limit() {
        let p = MagnetoPlasmaParams::insb(0.0);
        let t = magnetoplasma_tensor(0.05, &p).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0), (1, 2), (2, 1)] {
            assert_eq!(t.get(i, j), Complex64::new(0.0, 0.0));
        }
        assert_eq!(t.get(1, 1), t.get(0, 0));
        assert!(t.is_isotropic(0.0));
    }

    #[test]
    fn magnetoplasma_structure_and_values() {
        let p = MagnetoPlasmaParams::insb(10.0);
        assert_eq!(p.omega_b, 0.0153);
        let t = magnetoplasma_tensor(0.05, &p).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
            assert_eq!(t.get(i, j), zero);
        }
        // Independent evaluation of the three scalar formulas.
        let eps_d = Complex64::new(-112.57934323643687, 11.32116231739725);
        let eps_p = Complex64::new(-102.33303610129111, 8.547088748082192);
        let eps_f = Complex64::new(-34.23451587045126, 6.295949414832064);
        assert!(close(t.get(0, 0), eps_p, 1e-12));
        assert!(close(t.get(1, 1), eps_d, 1e-12));
        assert!(close(t.get(2, 2), eps_d, 1e-12));
        assert!(close(t.get(1, 2), -I * eps_f, 1e-12));
        assert!(close(t.get(2, 1), I * eps_f, 1e-12));
        assert!(close(t.eps_f(), eps_f, 1e-12));
        assert!(!t.is_symmetric(1e-12));
        assert!(passivity_check(&t));
    }

    #[test]
    fn field_reversal_is_transpose() {
        let p = MagnetoPlasmaParams::insb(10.0);
        for &w in &[0.003, 0.0153, 0.05, 0.3, 0.9] {
            let a = magnetoplasma_tensor(w, &p).unwrap();
            let b = magnetoplasma_tensor(w, &p.reversed()).unwrap();
            assert_eq!(a.0, b.transpose().0);
        }
    }

    #[test]
    fn passivity_examples() {
        let sic = lorentz_eps(0.1, &LorentzParams::SIC).unwrap();
        assert!(passivity_check(&DielectricTensor::isotropic(sic)));
        assert!(passivity_check(&DielectricTensor::identity()));
        assert!(!passivity_check(&DielectricTensor::isotropic(Complex64::new(1.0, -0.1))));
    }

    #[test]
    fn mirror_flips_gyrotropy() {
        let p = MagnetoPlasmaParams::insb(10.0);
        let t = magnetoplasma_tensor(0.05, &p).unwrap();
        let m = t.mirrored_z();
        assert_eq!(m.eps_f(), -t.eps_f());
        assert_eq!(m.mirrored_z(), t);
    }

    #[test]
    fn tabulated_interpolation() {
        let t = TabulatedModel::new(
            vec![0.01, 0.1, 1.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 2.0),
                Complex64::new(5.0, 0.0),
            ],
        )
        .unwrap();
        let geo = t.eval((0.01f64 * 0.1).sqrt()).unwrap();
        assert!(close(geo, Complex64::new(2.0, 1.0), 1e-12));
        assert_eq!(t.eval(0.1).unwrap(), Complex64::new(3.0, 2.0));
        assert!(matches!(t.eval(2.0), Err(Error::OutOfRange { .. })));
        assert!(t.eval(0.001).is_err());
        assert!(TabulatedModel::new(vec![0.1, 0.1], vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn presets() {
        assert_eq!(
            MaterialModel::preset("SiC").unwrap(),
            MaterialModel::Lorentz(LorentzParams::SIC)
        );
        match MaterialModel::preset("InSb-B10T").unwrap() {
            MaterialModel::MagnetoPlasma(p) => {
                assert_eq!(p.omega_b, 0.0153);
                assert_eq!(p.omega_tau, 4.1357e-3);
            }
            m => panic!("{m:?}"),
        }
        match MaterialModel::preset("InSb-B-5T").unwrap() {
            MaterialModel::MagnetoPlasma(p) => assert!((p.omega_b + 0.00765).abs() < 1e-15),
            m => panic!("{m:?}"),
        }
        assert!(MaterialModel::preset("Gold").is_err());
    }

    #[test]
    fn spec_from_toml() {
        let s: MaterialSpec = toml::from_str("preset = \"SiC\"").unwrap();
        assert_eq!(s.build().unwrap(), MaterialModel::Lorentz(LorentzParams::SIC));
        let s: MaterialSpec = toml::from_str(
            "model = \"magneto_plasma\"\nomega_p = 0.51\nomega_tau = 4.1357e-3\nfield_tesla = 10.0",
        )
        .unwrap();
        assert_eq!(
            s.build().unwrap(),
            MaterialModel::MagnetoPlasma(MagnetoPlasmaParams::insb(10.0))
        );
        let s: MaterialSpec = toml::from_str(
            "model = \"lorentz\"\neps_inf = 1.0\nomega_lo = 0.1\nomega_to = 0.2\ngamma = 0.0",
        )
        .unwrap();
        assert!(s.build().is_err());
    }
}
