//! Small-gap asymptotics.
//!
//! When d is small against the thermal wavelength and the skin depths only
//! the quasistatic p-wave reflection r^∞(ω, θ) survives. With κ = k d the
//! radial integrals reduce to the moments
//!
//! R_m(x) = ∫₀^∞ dκ κ^m e^{−2κ} / |1 − x e^{−2κ}|²,   x = r₁^∞ r₂^∞,
//!
//! so that
//!
//! F_y/A = ħ/(2π³d³) ∫dω (n₁ − n₂) ∫dθ sin θ Im r₁ Im r₂ R₂(x)
//! H/A   = ħ/(2π³d²) ∫dω ω (n₁ − n₂) ∫dθ Im r₁ Im r₂ R₁(x)
//! Γ/A   = −ħ/(2π³d⁴) ∫dω ∂n₁/∂ω ∫dθ sin²θ Im r₁ Im r₂ R₃(x)
//!
//! and the force/heat ratio per angle is sin θ g(x)/(ω d) with g = R₂/R₁.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::flux::CavityConfig;
use crate::fresnel::quasistatic_rpp;
use crate::materials::MaterialModel;
use crate::observables::{omega_window, Estimate};
use crate::quadrature::{integrate_vector, QuadratureSpec};
use crate::thermal::{occupation_derivative_rad_s, occupation_difference};

/// Upper limit of the κ integrals beyond the resonance, e^{−2κ} ≈ 1e−35.
const KAPPA_TAIL: f64 = 40.0;

/// R₁, R₂, R₃ at one x.
pub fn r_moments(x: Complex64, rel_tol: f64) -> Result<[f64; 3]> {
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain(format!("x = {x} is not finite")));
    }
    if x.im == 0.0 && x.re >= 1.0 {
        return Err(Error::Domain(format!(
            "x = {} lies on the resonance line x ≥ 1",
            x.re
        )));
    }
    let mag = x.norm();
    let mut pts = vec![0.0];
    let mut top = KAPPA_TAIL;
    if mag > 1.0 {
        // |1 − x e^{−2κ}| is smallest at κ* = ln|x|/2 with width ~ |arg x|.
        let star = 0.5 * mag.ln();
        let width = x.arg().abs().max(1e-12);
        for f in [-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0] {
            let p = star + f * width;
            if p > 0.0 {
                pts.push(p);
            }
        }
        top += star;
    }
    pts.push(top);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let r = integrate_vector::<3, _, _>(
        |k| {
            let e = (-2.0 * k).exp();
            let den = (Complex64::new(1.0, 0.0) - x * e).norm_sqr();
            let w = e / den;
            Ok([k * w, k * k * w, k * k * k * w])
        },
        &pts,
        |v| v.map(|c| rel_tol * c.abs()),
        4000,
    )?;
    Ok(r.value)
}

/// g(x) = R₂(x)/R₁(x).
///
/// g(0) = 1, g is positive, and g(x) → ln|x|/2 as |x| → ∞. Real x ≥ 1 is
/// the quasistatic perfect-resonance line and is rejected.
pub fn g_ratio(x: Complex64) -> Result<f64> {
    let [r1, r2, _] = r_moments(x, 1e-12)?;
    if !(r1 > 0.0) {
        return Err(Error::Domain(format!("R1({x}) vanishes")));
    }
    Ok(r2 / r1)
}

/// Quasistatic reflection coefficients of a plate pair.
pub trait QuasiStaticReflector {
    /// (r₁^∞, r₂^∞) at photon energy `omega_ev` and direction θ of k_⊥.
    fn reflections(&self, omega_ev: f64, theta: f64) -> Result<(Complex64, Complex64)>;

    /// Frequency interval (eV) outside which Im r₁ Im r₂ vanishes.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Frequencies (eV) where the reflections vary sharply.
    fn features(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Electrostatic limit of two material half-spaces; plate 1 below the gap.
#[derive(Debug, Clone)]
pub struct MaterialReflector {
    pub plate1: MaterialModel,
    pub plate2: MaterialModel,
}

impl MaterialReflector {
    pub fn new(cavity: &CavityConfig) -> Self {
        Self {
            plate1: cavity.plate1.clone(),
            plate2: cavity.plate2.clone(),
        }
    }
}

impl QuasiStaticReflector for MaterialReflector {
    fn reflections(&self, omega_ev: f64, theta: f64) -> Result<(Complex64, Complex64)> {
        let e1 = self.plate1.tensor(omega_ev)?.mirrored_z();
        let e2 = self.plate2.tensor(omega_ev)?;
        Ok((quasistatic_rpp(theta, &e1)?, quasistatic_rpp(theta, &e2)?))
    }

    fn features(&self) -> Vec<f64> {
        let mut f = self.plate1.features();
        f.extend(self.plate2.features());
        f
    }
}

/// Small-gap values of F_y/A, H/A and Γ/A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteSet {
    pub force_per_area: Estimate,
    pub heat_per_area: Estimate,
    pub friction_per_area: Estimate,
}

/// Angular integrals [∫Im Im R₁, ∫sin θ Im Im R₂, ∫sin²θ Im Im R₃,
/// ∫|sin θ| |Im Im| R₂] at one frequency.
fn angular<R: QuasiStaticReflector + ?Sized>(
    refl: &R,
    omega_ev: f64,
    rel: f64,
    max_panels: usize,
) -> Result<([f64; 4], [f64; 4], bool)> {
    // θ and −θ share one node, so reciprocal plates cancel exactly.
    let pts: Vec<f64> = (0..=4).map(|i| PI * i as f64 / 4.0).collect();
    let half = |theta: f64| -> Result<[f64; 4]> {
        let (r1, r2) = refl.reflections(omega_ev, theta)?;
        let im = r1.im * r2.im;
        if im == 0.0 {
            return Ok([0.0; 4]);
        }
        let [m1, m2, m3] = r_moments(r1 * r2, rel * 0.1)?;
        let s = theta.sin();
        Ok([im * m1, s * im * m2, s * s * im * m3, s.abs() * im.abs() * m2])
    };
    let r = integrate_vector::<4, _, _>(
        |theta| {
            let (a, b) = (half(theta)?, half(-theta)?);
            Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
        },
        &pts,
        |v| {
            let t = |x: f64| (rel * x.abs()).max(f64::MIN_POSITIVE);
            [t(v[0]), t(v[3]), t(v[2]), t(v[3])]
        },
        max_panels,
    )?;
    Ok((r.value, r.error, r.converged))
}

/// Evaluates the three asymptotes for an arbitrary reflector between
/// plates at t1 and t2, over the photon-energy interval `window` (eV).
pub fn asymptotes_with<R: QuasiStaticReflector + ?Sized>(
    refl: &R,
    d: f64,
    t1: f64,
    t2: f64,
    window: (f64, f64),
    spec: &QuadratureSpec,
    consts: &Constants,
) -> Result<AsymptoteSet> {
    spec.validate()?;
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("gap must be positive, got {d}")));
    }
    let (mut lo, mut hi) = window;
    if let Some((a, b)) = refl.support() {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let zero = Estimate::exact(0.0);
    if !(hi > lo) {
        return Ok(AsymptoteSet {
            force_per_area: zero,
            heat_per_area: zero,
            friction_per_area: zero,
        });
    }
    let mut pts = vec![lo, hi];
    pts.extend(refl.features().into_iter().filter(|&f| f > lo && f < hi));
    let mut e = 1e-3;
    while e < hi {
        if e > lo {
            pts.push(e);
        }
        e *= 10.0;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    let rel = spec.rel_tol * 0.3;
    let pre = consts.hbar_j_s / (2.0 * PI.powi(3));
    let jac = 1.0 / consts.hbar_ev_s;
    let mut inner_ok = true;
    let r = integrate_vector::<8, _, _>(
        |e| {
            let dn = occupation_difference(e, t1, t2, consts);
            let dn1 = occupation_derivative_rad_s(e, t1, consts);
            if dn == 0.0 && dn1 == 0.0 {
                return Ok([0.0; 8]);
            }
            let (v, err, ok) = angular(refl, e, rel, spec.max_subdivisions)?;
            inner_ok &= ok;
            let omega = consts.ev_to_rad_s(e);
            let w = [
                pre * omega * dn / (d * d),
                pre * dn / d.powi(3),
                -pre * dn1 / d.powi(4),
                pre * dn.abs() / d.powi(3),
            ];
            let mut out = [0.0; 8];
            for i in 0..4 {
                out[i] = jac * w[i] * v[i];
                out[4 + i] = jac * w[i].abs() * err[i];
            }
            Ok(out)
        },
        &pts,
        |v| {
            let t = |x: f64| (spec.rel_tol * x.abs()).max(spec.abs_tol).max(f64::MIN_POSITIVE);
            [
                t(v[0]),
                t(v[3]),
                t(v[2]),
                t(v[3]),
                f64::INFINITY,
                f64::INFINITY,
                f64::INFINITY,
                f64::INFINITY,
            ]
        },
        spec.max_subdivisions,
    )?;
    let est = |i: usize| Estimate {
        value: r.value[i],
        error: r.error[i] + r.value[4 + i],
        converged: r.converged && inner_ok,
    };
    Ok(AsymptoteSet {
        heat_per_area: est(0),
        force_per_area: est(1),
        friction_per_area: est(2),
    })
}

/// Small-gap asymptotes of a material cavity.
pub fn asymptotes(cavity: &CavityConfig, spec: &QuadratureSpec, consts: &Constants) -> Result<AsymptoteSet> {
    cavity.validate()?;
    let window = omega_window(cavity, consts);
    asymptotes_with(
        &MaterialReflector::new(cavity),
        cavity.d,
        cavity.t1,
        cavity.t2,
        window,
        spec,
        consts,
    )
}

/// F_y/A ∝ d⁻³ in the small-gap limit.
pub fn force_asymptote(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    asymptotes(cavity, spec, &Constants::default()).map(|a| a.force_per_area)
}

/// H/A ∝ d⁻² in the small-gap limit.
pub fn heat_asymptote(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    asymptotes(cavity, spec, &Constants::default()).map(|a| a.heat_per_area)
}

/// Γ/A ∝ d⁻⁴ in the small-gap limit.
pub fn friction_asymptote(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    asymptotes(cavity, spec, &Constants::default()).map(|a| a.friction_per_area)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Reference values from 40-digit evaluation of Im Li₃(x)/Im Li₂(x).
    const G_ORACLE: &[(f64, f64, f64)] = &[
        (-0.5, 0.0, 1.10592551111457),
        (0.5, 0.0, 0.839995520135653),
        (0.9, 0.0, 0.564458932249467),
        (-10.0, 0.0, 1.75081786701997),
        (-1e4, 0.0, 4.78370384017141),
        (-1e6, 0.0, 7.02681899603635),
        (0.0, 1e4, 4.73907785272813),
        (1.0, -1e4, 4.73907217263772),
        (-0.01, 0.0, 1.00249033296290),
        (-1.0, 0.0, 1.18656911041563),
        (-100.0, 0.0, 2.65188203269100),
    ];

    #[test]
    fn g_matches_polylog_oracle() {
        for &(re, im, want) in G_ORACLE {
            let g = g_ratio(c(re, im)).unwrap();
            assert!(((g - want) / want).abs() < 1e-9, "g({re}+{im}i) = {g}, want {want}");
        }
    }

    #[test]
    fn g_limits() {
        assert!((g_ratio(c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        let g = g_ratio(c(-1e4, 0.0)).unwrap();
        let lim = (1e4f64).ln() / 2.0;
        assert!(((g - lim) / lim).abs() < 0.1);
        assert!(g_ratio(c(1.0, 0.0)).is_err());
        assert!(g_ratio(c(3.0, 0.0)).is_err());
    }

    #[test]
    fn moments_at_zero() {
        let [r1, r2, r3] = r_moments(c(0.0, 0.0), 1e-13).unwrap();
        assert!((r1 - 0.25).abs() < 1e-13);
        assert!((r2 - 0.25).abs() < 1e-13);
        assert!((r3 - 0.375).abs() < 1e-13);
    }
}
