//! Per-wavevector heat flux between two plates.
//!
//! Plate 1 fills z < 0, plate 2 fills z > d. The flux kernel at a fixed
//! (ω, k_x, k_y) is
//!
//! K = Tr[(1 − r₂†r₂) D (1 − r₁r₁†) D†]                 (k_⊥ < k_0)
//! K = e^{−2|k_z|d} Tr[(r₂† − r₂) D (r₁ − r₁†) D†]       (k_⊥ > k_0)
//!
//! with D = (1 − r₁r₂e^{2ik_z d})⁻¹. Here r₂ reflects up-going waves back
//! down and r₁ reflects down-going waves back up, both in the (s, p) basis
//! of [`crate::fresnel`]. The flux density per lateral wavevector is
//! S(k_y)/A = ∫dk_x/(8π) K.


use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::fresnel::{
    quasistatic_rpp, reflection_with, PlanarMode, ReflectionMatrix, SolverChoice,
};
use crate::materials::{DielectricTensor, MaterialModel};
use crate::quadrature::{integrate_vector, QuadratureSpec};

/// Points of the coarse grid used to locate cavity resonances.
pub const RESONANCE_SCAN_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Lower plate, z < 0.
    pub plate1: MaterialModel,
    /// Upper plate, z > d.
    pub plate2: MaterialModel,
    /// Gap in metres.
    pub d: f64,
    /// Temperature of plate 1 in kelvin.
    pub t1: f64,
    pub t2: f64,
}

impl CavityConfig {
    pub fn new(plate1: MaterialModel, plate2: MaterialModel, d: f64, t1: f64, t2: f64) -> Result<Self> {
        let c = Self {
            plate1,
            plate2,
            d,
            t1,
            t2,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(format!("gap must be positive, got {}", self.d)));
        }
        if !(self.t1 >= 0.0 && self.t2 >= 0.0 && self.t1.is_finite() && self.t2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperatures must be non-negative, got {} K and {} K",
                self.t1, self.t2
            )));
        }
        self.plate1.validate()?;
        self.plate2.validate()
    }

    pub fn with_gap(&self, d: f64) -> Self {
        Self { d, ..self.clone() }
    }

    pub fn with_temperatures(&self, t1: f64, t2: f64) -> Self {
        Self {
            t1,
            t2,
            ..self.clone()
        }
    }

    pub fn is_reciprocal(&self) -> bool {
        self.plate1.is_reciprocal() && self.plate2.is_reciprocal()
    }

    /// Characteristic frequencies of both plates (eV), sorted.
    pub fn features(&self) -> Vec<f64> {
        let mut f = self.plate1.features();
        f.extend(self.plate2.features());
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        f.dedup();
        f
    }
}

/// S(k_y)/A at one (ω, k_y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    /// rad/s
    pub omega: f64,
    /// rad/m
    pub k_y: f64,
    /// 1/m
    pub s_per_area: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// (1 − r₁r₂e^{2ik_z d})⁻¹.
pub fn cavity_operator(
    r1: &ReflectionMatrix,
    r2: &ReflectionMatrix,
    mode: &PlanarMode,
    d: f64,
) -> Result<Matrix2<Complex64>> {
    let phase = round_trip_phase(mode, d);
    invert_cavity(&(r1.0 * r2.0), phase)
}

fn round_trip_phase(mode: &PlanarMode, d: f64) -> Complex64 {
    let kz = mode.kz();
    if mode.is_propagating() {
        Complex64::from_polar(1.0, 2.0 * kz.re * d)
    } else {
        Complex64::new((-2.0 * kz.im * d).exp(), 0.0)
    }
}

fn invert_cavity(r1r2: &Matrix2<Complex64>, phase: Complex64) -> Result<Matrix2<Complex64>> {
    let m = Matrix2::identity() - r1r2 * phase;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let inv = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det;
    let norm1 = |a: &Matrix2<Complex64>| {
        (0..2)
            .map(|j| a[(0, j)].norm() + a[(1, j)].norm())
            .fold(0.0, f64::max)
    };
    let condition = norm1(&m) * norm1(&inv);
    if !(condition <= 1e14) {
        return Err(Error::Resonance { condition });
    }
    Ok(inv)
}

/// The braced integrand of the flux density at one mode.
pub fn flux_kernel(
    mode: &PlanarMode,
    r1: &ReflectionMatrix,
    r2: &ReflectionMatrix,
    d: f64,
) -> Result<f64> {
    let phase = round_trip_phase(mode, d);
    kernel_from(mode.is_propagating(), r1, r2, phase)
}

fn kernel_from(
    propagating: bool,
    r1: &ReflectionMatrix,
    r2: &ReflectionMatrix,
    phase: Complex64,
) -> Result<f64> {
    if !propagating && phase.re == 0.0 {
        return Ok(0.0);
    }
    let id = Matrix2::<Complex64>::identity();
    let (a, b, weight) = if propagating {
        (
            id - r2.0.adjoint() * r2.0,
            id - r1.0 * r1.0.adjoint(),
            1.0,
        )
    } else {
        (
            r2.0.adjoint() - r2.0,
            r1.0 - r1.0.adjoint(),
            phase.re,
        )
    };
    // Grazing incidence: both plates are perfect mirrors and D is singular.
    if a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) || b.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let dmat = invert_cavity(&(r1.0 * r2.0), phase)?;
    let m = a * dmat * b * dmat.adjoint();
    Ok(weight * (m[(0, 0)] + m[(1, 1)]).re)
}

/// Everything about a cavity that depends on frequency only.
#[derive(Debug, Clone)]
pub struct FrequencyContext {
    pub omega_ev: f64,
    /// rad/s
    pub omega: f64,
    /// 1/m
    pub k0: f64,
    pub d: f64,
    /// Plate 1 seen through the mirror z → −z.
    pub eps_lower: DielectricTensor,
    pub eps_upper: DielectricTensor,
    pub solver: SolverChoice,
}

impl FrequencyContext {
    pub fn new(
        cavity: &CavityConfig,
        omega_ev: f64,
        consts: &Constants,
        solver: SolverChoice,
    ) -> Result<Self> {
        Ok(Self {
            omega_ev,
            omega: consts.ev_to_rad_s(omega_ev),
            k0: consts.k0_from_ev(omega_ev),
            d: cavity.d,
            eps_lower: cavity.plate1.tensor(omega_ev)?.mirrored_z(),
            eps_upper: cavity.plate2.tensor(omega_ev)?,
            solver,
        })
    }

    pub fn mode(&self, kx: f64, ky: f64) -> PlanarMode {
        PlanarMode {
            omega: self.omega,
            k0: self.k0,
            kx,
            ky,
        }
    }

    /// (r₁, r₂) at one in-plane wavevector.
    pub fn reflections(&self, kx: f64, ky: f64) -> Result<(ReflectionMatrix, ReflectionMatrix)> {
        let mode = self.mode(kx, ky);
        let r1 = reflection_with(&mode, &self.eps_lower, self.solver)?.p_flipped();
        let r2 = reflection_with(&mode, &self.eps_upper, self.solver)?;
        Ok((r1, r2))
    }

    pub fn kernel(&self, kx: f64, ky: f64) -> Result<f64> {
        let (r1, r2) = self.reflections(kx, ky)?;
        let mode = self.mode(kx, ky);
        kernel_from(mode.is_propagating(), &r1, &r2, round_trip_phase(&mode, self.d))
    }

    /// Kernel in polar coordinates.
    pub fn kernel_polar(&self, k: f64, theta: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        self.kernel(k * c, k * s)
    }

    /// Quasistatic round-trip coefficient r₁^∞ r₂^∞ along direction θ.
    pub fn quasistatic_round_trip(&self, theta: f64) -> Option<Complex64> {
        let r1 = quasistatic_rpp(theta, &self.eps_lower).ok()?;
        let r2 = quasistatic_rpp(theta, &self.eps_upper).ok()?;
        Some(r1 * r2)
    }

    /// Radii in (k_lo, k_hi) near which 1 − x e^{−2kd} is small along θ.
    pub fn resonance_breakpoints(&self, theta: f64, k_lo: f64, k_hi: f64) -> Vec<f64> {
        let Some(x) = self.quasistatic_round_trip(theta) else {
            return vec![];
        };
        resonance_scan(x, self.d, k_lo, k_hi)
    }

    /// In-plane radii k₀ Re√λ of the bulk light lines of both plates, where
    /// λ runs over the principal and Voigt-type indices of each tensor.
    /// Weakly damped media put a near-singular branch point there.
    pub fn material_branch_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in [&self.eps_lower, &self.eps_upper] {
            let e = |i, j| t.get(i, j);
            let mut lam = vec![e(0, 0), e(1, 1), e(2, 2)];
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                for (p, q) in [(a, b), (b, a)] {
                    let den = e(q, q);
                    if den.norm_sqr() > 0.0 && (e(p, q) * e(q, p)).norm_sqr() > 0.0 {
                        lam.push(e(p, p) - e(p, q) * e(q, p) / den);
                    }
                }
            }
            for l in lam {
                let n = l.sqrt().re;
                if l.re > 1.0 && n.is_finite() {
                    out.push(self.k0 * n);
                }
            }
        }
        out
    }

    /// Radius at which the vacuum decay constant reaches Λ/d.
    pub fn k_max(&self, spec: &QuadratureSpec) -> f64 {
        (spec.evanescent_cutoff / self.d).hypot(self.k0)
    }
}

/// Local minima of |1 − x e^{−2kd}| on a logarithmic grid over
/// (k_lo, k_hi), plus the analytic minimiser when it falls inside.
pub fn resonance_scan(x: Complex64, d: f64, k_lo: f64, k_hi: f64) -> Vec<f64> {
    if !(k_hi > k_lo && k_lo > 0.0) || !x.re.is_finite() || !x.im.is_finite() {
        return vec![];
    }
    let n = RESONANCE_SCAN_POINTS;
    let ratio = (k_hi / k_lo).ln() / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| k_lo * (ratio * i as f64).exp()).collect();
    let g: Vec<f64> = grid
        .iter()
        .map(|&k| (Complex64::new(1.0, 0.0) - x * (-2.0 * k * d).exp()).norm())
        .collect();
    let mut out = Vec::new();
    for i in 1..n - 1 {
        if g[i] <= g[i - 1] && g[i] <= g[i + 1] && g[i] < 0.9 {
            out.push(grid[i]);
        }
    }
    let (mag, phase) = x.to_polar();
    let cos = phase.cos();
    if cos > 0.0 && mag > cos {
        let k = (mag / cos).ln() / (2.0 * d);
        if k > k_lo && k < k_hi {
            out.push(k);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    out
}

fn sorted_points(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// Piecewise integration variable over sorted breakpoints p₀ < … < pₙ:
/// on t ∈ [i, i + 1], k = pᵢ + (pᵢ₊₁ − pᵢ) u²(3 − 2u) with u = t − i. The
/// Jacobian vanishes at every breakpoint, which smooths square-root branch
/// points (light lines) sitting there.
#[derive(Debug, Clone)]
pub(crate) struct PanelMap {
    pts: Vec<f64>,
}

impl PanelMap {
    pub(crate) fn new(k_points: Vec<f64>) -> Self {
        Self {
            pts: sorted_points(k_points),
        }
    }

    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        (0..self.pts.len()).map(|i| i as f64).collect()
    }

    /// (k, dk/dt)
    pub(crate) fn k_of(&self, t: f64) -> (f64, f64) {
        let last = self.pts.len().saturating_sub(2);
        let i = (t.floor().max(0.0) as usize).min(last);
        let u = t - i as f64;
        let (a, w) = (self.pts[i], self.pts[i + 1] - self.pts[i]);
        (a + w * u * u * (3.0 - 2.0 * u), 6.0 * w * u * (1.0 - u))
    }
}

/// S(k_y)/A by integrating the kernel over k_x ∈ (−∞, ∞).
pub fn spectral_flux_ky(
    omega: f64,
    k_y: f64,
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    consts: &Constants,
) -> Result<FluxSample> {
    spec.validate()?;
    cavity.validate()?;
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let ctx = FrequencyContext::new(cavity, consts.rad_s_to_ev(omega), consts, SolverChoice::General)?;
    flux_ky_in(&ctx, k_y, spec)
}

pub(crate) fn flux_ky_in(ctx: &FrequencyContext, k_y: f64, spec: &QuadratureSpec) -> Result<FluxSample> {
    let kmax = ctx.k_max(spec);
    let empty = FluxSample {
        omega: ctx.omega,
        k_y,
        s_per_area: 0.0,
        error_estimate: 0.0,
        converged: true,
    };
    if k_y.abs() >= kmax {
        return Ok(empty);
    }
    let kx_max = ((kmax - k_y.abs()) * (kmax + k_y.abs())).sqrt();
    let b = if k_y.abs() < ctx.k0 {
        ((ctx.k0 - k_y.abs()) * (ctx.k0 + k_y.abs())).sqrt()
    } else {
        0.0
    };
    let mut pts = vec![0.0, kx_max];
    for kb in ctx.material_branch_points() {
        if kb > k_y.abs() && kb < kmax {
            pts.push(((kb - k_y.abs()) * (kb + k_y.abs())).sqrt());
        }
    }
    // Resonances: scan |1 − x e^{−2 k_⊥ d}| along the line, both halves.
    let kx_lo = (ctx.k0 * 1e-3).min(kx_max * 1e-6).max(f64::MIN_POSITIVE);
    let probe = |sign: f64, pts: &mut Vec<f64>| {
        let n = RESONANCE_SCAN_POINTS;
        let ratio = (kx_max / kx_lo).ln() / (n - 1) as f64;
        let mut prev: Option<(f64, f64)> = None;
        let mut prev2: Option<f64> = None;
        for i in 0..n {
            let kx = sign * kx_lo * (ratio * i as f64).exp();
            let kp = kx.hypot(k_y);
            let Some(x) = ctx.quasistatic_round_trip(k_y.atan2(kx)) else {
                continue;
            };
            let g = (Complex64::new(1.0, 0.0) - x * (-2.0 * kp * ctx.d).exp()).norm();
            if let (Some((pk, pg)), Some(ppg)) = (prev, prev2) {
                if pg <= ppg && pg <= g && pg < 0.9 && kp > ctx.k0 {
                    pts.push(pk.abs());
                }
            }
            prev2 = prev.map(|p| p.1);
            prev = Some((kx, g));
        }
    };
    probe(1.0, &mut pts);
    probe(-1.0, &mut pts);
    pts.push(b);
    let map = PanelMap::new(pts);
    let pts = map.breakpoints();
    // Both halves of the k_x line share one integrand.
    let r = integrate_vector::<1, _, _>(
        |t| {
            let (kx, jac) = map.k_of(t);
            Ok([jac * (ctx.kernel(kx, k_y)? + ctx.kernel(-kx, k_y)?)])
        },
        &pts,
        |v| [spec.allowed_error(v[0]).max(1e-300)],
        spec.max_subdivisions,
    )?;
    let norm = 1.0 / (8.0 * std::f64::consts::PI);
    Ok(FluxSample {
        s_per_area: r.value[0] * norm,
        error_estimate: r.error[0] * norm,
        converged: r.converged,
        ..empty
    })
}

/// Radial moments ∫ k^m K(k, θ) dk (m = 1, 2, 3) over [0, Λ/d] at one θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMoments {
    pub value: [f64; 3],
    pub error: [f64; 3],
    pub converged: bool,
    pub evaluations: usize,
}

/// Radial breakpoints along θ: 0, k_0, Λ/d and resonance minima.
pub(crate) fn radial_points(ctx: &FrequencyContext, thetas: &[f64], spec: &QuadratureSpec) -> Vec<f64> {
    let kmax = ctx.k_max(spec);
    let mut pts = vec![0.0, ctx.k0, kmax];
    pts.extend(ctx.material_branch_points().into_iter().filter(|&k| k < kmax));
    for &th in thetas {
        pts.extend(ctx.resonance_breakpoints(th, ctx.k0, kmax));
    }
    sorted_points(pts)
}

pub fn radial_moments(ctx: &FrequencyContext, theta: f64, spec: &QuadratureSpec) -> Result<RadialMoments> {
    let map = PanelMap::new(radial_points(ctx, &[theta], spec));
    let pts = map.breakpoints();
    let r = integrate_vector::<3, _, _>(
        |t| {
            let (k, jac) = map.k_of(t);
            let kern = jac * ctx.kernel_polar(k, theta)?;
            Ok([k * kern, k * k * kern, k * k * k * kern])
        },
        &pts,
        |v| v.map(|x| spec.allowed_error(x).max(1e-300)),
        spec.max_subdivisions,
    )?;
    Ok(RadialMoments {
        value: r.value,
        error: r.error,
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

/// (f(ω, θ), h(ω, θ)): force and heat per unit angular frequency and per
/// unit angle, so that ∫dω∫dθ f = F_y/A and ∫dω∫dθ h = H/A.
pub fn spectral_densities_angle(
    omega: f64,
    theta: f64,
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    consts: &Constants,
) -> Result<(f64, f64)> {
    spec.validate()?;
    cavity.validate()?;
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let omega_ev = consts.rad_s_to_ev(omega);
    let dn = crate::thermal::occupation_difference(omega_ev, cavity.t1, cavity.t2, consts);
    if dn == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ctx = FrequencyContext::new(cavity, omega_ev, consts, SolverChoice::General)?;
    let m = radial_moments(&ctx, theta, spec)?;
    let pref = consts.hbar_j_s / (8.0 * std::f64::consts::PI.powi(3)) * dn;
    Ok((pref * theta.sin() * m.value[1], pref * omega * m.value[0]))
}
