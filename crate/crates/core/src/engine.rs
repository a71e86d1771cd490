//! Heat-engine thermodynamics of a sliding plate pair.
//!
//! In the dilute single-frequency model the nonreciprocal plate reflects as
//! Im r₂^∞(ω) = r_n (1 + α sin θ) ω̄ δ̃(ω − ω̄), which gives
//!
//! F/A = C α η_c ħ ω̄/d³,  H/A = 2 C η_c ħ ω̄²/d²,  Γ/A = (3/2) C ħ/d⁴
//!
//! with C = −(ω̄/8π²) ∂n₁/∂ω̄ r_n Im r₁^∞. Moving plate 2 at velocity v
//! delivers P = v(F − Γv) and draws 𝓗 = H(1 + v/v_c) from the hot plate,
//! v_c = 2η_c ω̄ d/α.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::nearfield::QuasiStaticReflector;
use crate::thermal::occupation_derivative_rad_s;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    /// Nonreciprocity strength, |α| ≤ 1.
    pub alpha: f64,
    pub r_n: f64,
    /// rad/s
    pub omega_bar: f64,
    /// Im r₁^∞ at ω̄.
    pub im_r1: f64,
    /// Hot plate temperature, K.
    pub t1: f64,
    /// T₁ − T₂ > 0, K.
    pub dt: f64,
    /// Gap, m.
    pub d: f64,
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.alpha.abs() <= 1.0) {
            return bad(format!("|alpha| must not exceed 1, got {}", self.alpha));
        }
        if !(self.omega_bar > 0.0 && self.omega_bar.is_finite()) {
            return bad(format!("omega_bar must be positive, got {}", self.omega_bar));
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return bad(format!("t1 must be positive, got {}", self.t1));
        }
        if !(self.dt > 0.0 && self.dt < self.t1) {
            return bad(format!("dt must lie in (0, t1), got {}", self.dt));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad(format!("gap must be positive, got {}", self.d));
        }
        if !(self.r_n.is_finite() && self.im_r1.is_finite()) {
            return bad("r_n and im_r1 must be finite".into());
        }
        Ok(())
    }

    /// True when ΔT/T₁ is small enough for the linear treatment.
    pub fn small_gradient(&self) -> bool {
        self.dt / self.t1 <= 0.2
    }

    pub fn t2(&self) -> f64 {
        self.t1 - self.dt
    }

    /// Carnot efficiency ΔT/T₁.
    pub fn eta_c(&self) -> f64 {
        self.dt / self.t1
    }

    /// 2 η_c ω̄ d/α; infinite for α = 0.
    pub fn v_c(&self) -> f64 {
        2.0 * self.eta_c() * self.omega_bar * self.d / self.alpha
    }

    /// Speed beyond which higher orders in v matter.
    pub fn validity_speed(&self) -> f64 {
        0.3 * self.omega_bar * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiluteFgh {
    /// N/m²
    pub force_per_area: f64,
    /// W/m²
    pub heat_per_area: f64,
    /// N·s/m³
    pub friction_per_area: f64,
    /// The common prefactor C (dimensionless).
    pub c: f64,
}

/// Closed-form force, heat and friction of the dilute model.
pub fn dilute_fgh(p: &EngineParams, consts: &Constants) -> Result<DiluteFgh> {
    p.validate()?;
    let e = consts.rad_s_to_ev(p.omega_bar);
    let dn = occupation_derivative_rad_s(e, p.t1, consts);
    let w = p.omega_bar;
    let c = -w / (8.0 * std::f64::consts::PI.powi(2)) * dn * p.r_n * p.im_r1;
    let hbar = consts.hbar_j_s;
    let eta = p.eta_c();
    Ok(DiluteFgh {
        force_per_area: c * p.alpha * eta * hbar * w / p.d.powi(3),
        heat_per_area: 2.0 * c * eta * hbar * w * w / (p.d * p.d),
        friction_per_area: 1.5 * c * hbar / p.d.powi(4),
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// 𝓗 > 0: heat flows from the hot plate.
    Engine,
    /// 𝓗 ≤ 0: the motion pumps heat out of the cold plate.
    Refrigerator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnginePoint {
    /// m/s
    pub v: f64,
    /// W/m²
    pub power_per_area: f64,
    /// P/𝓗, absent outside the engine regime.
    pub efficiency: Option<f64>,
    /// 𝓗, W/m²
    pub heat_in_per_area: f64,
    pub regime: Regime,
    /// |v| ≤ 0.3 ω̄ d.
    pub valid: bool,
}

/// Power, Onsager-corrected heat and efficiency at velocity v.
pub fn efficiency_curve(p: &EngineParams, v: f64, consts: &Constants) -> Result<EnginePoint> {
    let fgh = dilute_fgh(p, consts)?;
    Ok(engine_point(p, &fgh, v))
}

pub fn engine_point(p: &EngineParams, fgh: &DiluteFgh, v: f64) -> EnginePoint {
    let power = v * (fgh.force_per_area - fgh.friction_per_area * v);
    // H (1 + v/v_c) = H + F v/η_c, which also covers α = 0.
    let heat_in = fgh.heat_per_area + fgh.force_per_area * v / p.eta_c();
    let regime = if heat_in > 0.0 { Regime::Engine } else { Regime::Refrigerator };
    EnginePoint {
        v,
        power_per_area: power,
        efficiency: (regime == Regime::Engine).then(|| power / heat_in),
        heat_in_per_area: heat_in,
        regime,
        valid: v.abs() <= p.validity_speed(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPowerPoint {
    /// α η_c ω̄ d/3
    pub v_mp: f64,
    /// η_c α²/(2(6 + α²))
    pub eta_mp: f64,
    /// Golden-section maximiser of P(v).
    pub v_numeric: f64,
    /// η from [`efficiency_curve`] at `v_mp`.
    pub eta_at_v_mp: f64,
}

/// Velocity and efficiency at maximum power.
pub fn max_power_point(p: &EngineParams, consts: &Constants) -> Result<MaxPowerPoint> {
    p.validate()?;
    if p.alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "alpha = 0 gives no motive force and no engine".into(),
        ));
    }
    let fgh = dilute_fgh(p, consts)?;
    let eta_c = p.eta_c();
    let v_mp = p.alpha * eta_c * p.omega_bar * p.d / 3.0;
    let eta_mp = eta_c * p.alpha * p.alpha / (2.0 * (6.0 + p.alpha * p.alpha));
    // P > 0 between 0 and F/Γ.
    let stall = fgh.force_per_area / fgh.friction_per_area;
    let (a, b) = if stall > 0.0 { (0.0, stall) } else { (stall, 0.0) };
    let v_numeric = golden_argmax(|v| engine_point(p, &fgh, v).power_per_area, a, b);
    let eta_at_v_mp = engine_point(p, &fgh, v_mp).efficiency.unwrap_or(f64::NAN);
    Ok(MaxPowerPoint {
        v_mp,
        eta_mp,
        v_numeric,
        eta_at_v_mp,
    })
}

/// Argmax of a unimodal function on [a, b] by golden-section search.
pub fn golden_argmax(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let scale = a.abs().max(b.abs());
    while (b - a).abs() > 1e-13 * scale {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Reflector of the dilute model: Im r₁ constant, Im r₂ a rectangular
/// window of relative width `width` around ω̄ normalized to unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiluteReflector {
    pub alpha: f64,
    pub r_n: f64,
    pub im_r1: f64,
    /// ω̄ in eV.
    pub omega_bar_ev: f64,
    /// Window width over ω̄.
    pub width: f64,
}

impl DiluteReflector {
    pub fn new(p: &EngineParams, width: f64, consts: &Constants) -> Self {
        Self {
            alpha: p.alpha,
            r_n: p.r_n,
            im_r1: p.im_r1,
            omega_bar_ev: consts.rad_s_to_ev(p.omega_bar),
            width,
        }
    }

    fn edges(&self) -> (f64, f64) {
        let half = 0.5 * self.width * self.omega_bar_ev;
        (self.omega_bar_ev - half, self.omega_bar_ev + half)
    }
}

impl QuasiStaticReflector for DiluteReflector {
    fn reflections(&self, omega_ev: f64, theta: f64) -> Result<(Complex64, Complex64)> {
        let (lo, hi) = self.edges();
        let window = if omega_ev >= lo && omega_ev <= hi { 1.0 / self.width } else { 0.0 };
        let r1 = Complex64::new(0.0, self.im_r1);
        let r2 = Complex64::new(0.0, self.r_n * (1.0 + self.alpha * theta.sin()) * window);
        Ok((r1, r2))
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some(self.edges())
    }
}
