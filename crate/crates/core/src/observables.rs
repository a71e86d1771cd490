//! Lateral force, heat transfer and friction between the plates.
//!
//! All three observables share one kernel. In polar coordinates
//! (k_x, k_y) = k(cos θ, sin θ) and with K the flux kernel of [`crate::flux`],
//!
//! F_y/A = ħ/(8π³) ∫dω (n₁ − n₂) ∫dθ ∫dk k² sin θ K
//! H/A   = ħ/(8π³) ∫dω ω (n₁ − n₂) ∫dθ ∫dk k K
//! Γ/A   = −ħ/(8π³) ∫dω ∂n₁/∂ω ∫dθ ∫dk k³ sin²θ K
//!
//! The θ integral is folded onto θ ≥ 0 by pairing θ with −θ. When both
//! tensors are invariant under x → −x (true for a field along x) the fold
//! also pairs θ with π − θ.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::flux::{radial_points, CavityConfig, PanelMap, FrequencyContext};
use crate::fresnel::SolverChoice;
use crate::materials::DielectricTensor;
use crate::nearfield::g_ratio;
use crate::quadrature::{integrate_vector, QuadratureSpec};
use crate::thermal::{occupation_derivative_rad_s, occupation_difference};

/// Lower end of every frequency integral, in eV.
pub const OMEGA_MIN_EV: f64 = 1e-4;
/// Frequency integrals stop at this many k_B T_max.
pub const PLANCK_CUTOFF: f64 = 40.0;
/// Tolerance of nested integrals relative to the enclosing one.
const INNER_TOL_FACTOR: f64 = 0.3;

/// A value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableMetadata {
    pub cavity: CavityConfig,
    pub spec: QuadratureSpec,
    pub solver: SolverChoice,
    pub omega_min_ev: f64,
    pub omega_max_ev: f64,
    pub kernel_evaluations: usize,
    /// Seconds since the Unix epoch when the computation finished.
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    /// N/m², positive along +y.
    pub force_per_area: Estimate,
    /// W/m², absorbed by plate 2.
    pub heat_per_area: Estimate,
    /// N·s/m³, evaluated with ∂n/∂ω at T₁.
    pub friction_per_area: Estimate,
    pub metadata: ObservableMetadata,
}

impl ObservableSet {
    pub fn converged(&self) -> bool {
        self.force_per_area.converged && self.heat_per_area.converged && self.friction_per_area.converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    ForceDensity,
    HeatDensity,
    BoundLhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    /// rad/s
    pub omega: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub kind: CurveKind,
    pub points: Vec<SpectralPoint>,
}

impl SpectralCurve {
    /// Trapezoid rule over the curve's own grid.
    pub fn trapezoid(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].omega - w[0].omega) * (w[0].value + w[1].value))
            .sum()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }
}

/// Frequency interval [ω_min, ω_cut] in eV; empty when both plates are at 0 K.
pub fn omega_window(cavity: &CavityConfig, consts: &Constants) -> (f64, f64) {
    let hi = PLANCK_CUTOFF * consts.thermal_ev(cavity.t1.max(cavity.t2));
    (OMEGA_MIN_EV, hi.max(OMEGA_MIN_EV))
}

/// Kernel moments at one frequency, integrated over angle and radius:
/// [∫k K, ∫sin θ k² K, ∫sin²θ k³ K, ∫|sin θ| k² K] (units m⁻², m⁻³, m⁻⁴, m⁻³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMoments {
    pub value: [f64; 4],
    pub error: [f64; 4],
    pub converged: bool,
    pub evaluations: usize,
}

impl AngularMoments {
    pub fn heat(&self) -> f64 {
        self.value[0]
    }
    pub fn force(&self) -> f64 {
        self.value[1]
    }
    pub fn friction(&self) -> f64 {
        self.value[2]
    }
    /// Magnitude scale of the force moment, used as its tolerance floor.
    pub fn force_scale(&self) -> f64 {
        self.value[3]
    }
}

fn x_mirror_symmetric(t: &DielectricTensor) -> bool {
    let z = num_complex::Complex64::new(0.0, 0.0);
    [(0, 1), (1, 0), (0, 2), (2, 0)].iter().all(|&(i, j)| t.get(i, j) == z)
}

/// Tolerances for a [value × 4, error × 4] vector: the force moment is held
/// to the scale of its absolute-value companion, errors are carried along.
fn nested_tolerance(rel: f64, abs: f64) -> impl Fn(&[f64; 8]) -> [f64; 8] {
    move |v| {
        let floor = |x: f64| (rel * x.abs()).max(abs);
        [
            floor(v[0]),
            floor(v[3]),
            floor(v[2]),
            floor(v[3]),
            f64::INFINITY,
            f64::INFINITY,
            f64::INFINITY,
            f64::INFINITY,
        ]
    }
}

fn radial_at(
    ctx: &FrequencyContext,
    theta: f64,
    spec: &QuadratureSpec,
    rel: f64,
) -> Result<([f64; 8], usize, bool)> {
    let kmax = ctx.k_max(spec);
    let mut pts = radial_points(ctx, &[theta, -theta], spec);
    // Decade breakpoints keep the first panels from straddling many scales.
    let mut k = ctx.k0 * 10.0;
    while k < kmax {
        pts.push(k);
        k *= 10.0;
    }
    let map = PanelMap::new(pts);
    let pts = map.breakpoints();
    let (s, c) = theta.sin_cos();
    let r = integrate_vector::<4, _, _>(
        |t| {
            let (k, jac) = map.k_of(t);
            let kp = jac * ctx.kernel(k * c, k * s)?;
            let km = jac * ctx.kernel(k * c, -k * s)?;
            let (sum, diff) = (kp + km, kp - km);
            Ok([k * sum, s * k * k * diff, s * s * k * k * k * sum, s.abs() * k * k * sum])
        },
        &pts,
        |v| {
            let floor = |x: f64| (rel * x.abs()).max(f64::MIN_POSITIVE);
            [floor(v[0]), floor(v[3]), floor(v[2]), floor(v[3])]
        },
        spec.max_subdivisions,
    )?;
    let mut out = [0.0; 8];
    out[..4].copy_from_slice(&r.value);
    out[4..].copy_from_slice(&r.error);
    Ok((out, 2 * r.evaluations, r.converged))
}

/// Angle and radius integrals of the kernel moments at one frequency.
pub fn angular_moments(ctx: &FrequencyContext, spec: &QuadratureSpec) -> Result<AngularMoments> {
    let symmetric = x_mirror_symmetric(&ctx.eps_lower) && x_mirror_symmetric(&ctx.eps_upper);
    let (top, factor) = if symmetric { (FRAC_PI_2, 2.0) } else { (PI, 1.0) };
    let rel = spec.rel_tol * INNER_TOL_FACTOR;
    let pts: Vec<f64> = (0..=2).map(|i| top * i as f64 / 2.0).collect();
    let mut evaluations = 0usize;
    let mut all_converged = true;
    let r = integrate_vector::<8, _, _>(
        |theta| {
            let (v, n, ok) = radial_at(ctx, theta, spec, rel * INNER_TOL_FACTOR)?;
            evaluations += n;
            all_converged &= ok;
            Ok(v)
        },
        &pts,
        nested_tolerance(rel, f64::MIN_POSITIVE),
        spec.max_subdivisions,
    )?;
    all_converged &= r.converged;
    let mut value = [0.0; 4];
    let mut error = [0.0; 4];
    for i in 0..4 {
        value[i] = factor * r.value[i];
        error[i] = factor * (r.error[i] + r.value[4 + i]);
    }
    Ok(AngularMoments {
        value,
        error,
        converged: all_converged,
        evaluations,
    })
}

/// Which observables a frequency sweep has to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Wanted {
    transfer: bool,
    friction: bool,
}

/// Spectral densities at one frequency in SI units: (h, f, γ, |f| scale),
/// each per unit angular frequency, plus their errors.
fn spectral_row(
    cavity: &CavityConfig,
    omega_ev: f64,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
    wanted: Wanted,
) -> Result<([f64; 8], usize, bool)> {
    let dn = if wanted.transfer {
        occupation_difference(omega_ev, cavity.t1, cavity.t2, consts)
    } else {
        0.0
    };
    let dn1 = if wanted.friction {
        occupation_derivative_rad_s(omega_ev, cavity.t1, consts)
    } else {
        0.0
    };
    if dn == 0.0 && dn1 == 0.0 {
        return Ok(([0.0; 8], 0, true));
    }
    let ctx = FrequencyContext::new(cavity, omega_ev, consts, solver)?;
    let m = angular_moments(&ctx, spec)?;
    let pre = consts.hbar_j_s / (8.0 * PI.powi(3));
    let omega = ctx.omega;
    let w = [pre * omega * dn, pre * dn, -pre * dn1, pre * dn.abs()];
    let mut out = [0.0; 8];
    for i in 0..4 {
        out[i] = w[i] * m.value[i];
        out[4 + i] = w[i].abs() * m.error[i];
    }
    Ok((out, m.evaluations, m.converged))
}

fn frequency_points(cavity: &CavityConfig, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(cavity.features().into_iter().filter(|&f| f > lo && f < hi));
    let mut e = 1e-3;
    while e < hi {
        if e > lo {
            pts.push(e);
        }
        e *= 10.0;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn sweep(
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
    wanted: Wanted,
) -> Result<ObservableSet> {
    spec.validate()?;
    cavity.validate()?;
    let (lo, hi) = omega_window(cavity, consts);
    let mut evaluations = 0usize;
    let mut inner_ok = true;
    let zero = Estimate::exact(0.0);
    let (heat, force, friction) = if hi > lo {
        let pts = frequency_points(cavity, lo, hi);
        // dω = dE/ħ; the densities are per rad/s.
        let jac = 1.0 / consts.hbar_ev_s;
        let r = integrate_vector::<8, _, _>(
            |e| {
                let (row, n, ok) = spectral_row(cavity, e, spec, solver, consts, wanted)?;
                evaluations += n;
                inner_ok &= ok;
                Ok(row.map(|x| x * jac))
            },
            &pts,
            nested_tolerance(spec.rel_tol, spec.abs_tol.max(f64::MIN_POSITIVE)),
            spec.max_subdivisions,
        )?;
        let est = |i: usize| Estimate {
            value: r.value[i],
            error: r.error[i] + r.value[4 + i],
            converged: r.converged && inner_ok,
        };
        (est(0), est(1), est(2))
    } else {
        (zero, zero, zero)
    };
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    Ok(ObservableSet {
        force_per_area: if wanted.transfer { force } else { zero },
        heat_per_area: if wanted.transfer { heat } else { zero },
        friction_per_area: if wanted.friction { friction } else { zero },
        metadata: ObservableMetadata {
            cavity: cavity.clone(),
            spec: *spec,
            solver,
            omega_min_ev: lo,
            omega_max_ev: hi,
            kernel_evaluations: evaluations,
            timestamp,
        },
    })
}

/// F_y/A, H/A and Γ/A in one pass over the shared kernel.
pub fn observables(
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
) -> Result<ObservableSet> {
    sweep(
        cavity,
        spec,
        solver,
        consts,
        Wanted {
            transfer: true,
            friction: true,
        },
    )
}

/// F_y/A and H/A only.
pub fn transfer_observables(
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
) -> Result<ObservableSet> {
    sweep(
        cavity,
        spec,
        solver,
        consts,
        Wanted {
            transfer: true,
            friction: false,
        },
    )
}

/// Lateral force per area in N/m².
pub fn lateral_force(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    transfer_observables(cavity, spec, SolverChoice::default(), &Constants::default()).map(|o| o.force_per_area)
}

/// Heat absorbed by plate 2 per area in W/m².
pub fn heat_transfer(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    transfer_observables(cavity, spec, SolverChoice::default(), &Constants::default()).map(|o| o.heat_per_area)
}

/// Friction coefficient per area in N·s/m³ at the temperature of plate 1.
pub fn friction(cavity: &CavityConfig, spec: &QuadratureSpec) -> Result<Estimate> {
    friction_with(cavity, spec, SolverChoice::default(), &Constants::default())
}

pub fn friction_with(
    cavity: &CavityConfig,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
) -> Result<Estimate> {
    if !(cavity.t1 > 0.0) {
        if cavity.t1 == 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        return Err(Error::InvalidParameter(format!("temperature must be positive, got {}", cavity.t1)));
    }
    sweep(
        cavity,
        spec,
        solver,
        consts,
        Wanted {
            transfer: false,
            friction: true,
        },
    )
    .map(|o| o.friction_per_area)
}

/// f(ω), h(ω) and the normalized near-field bound on one frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub force_density: SpectralCurve,
    pub heat_density: SpectralCurve,
    pub bound_lhs: SpectralCurve,
    pub converged: bool,
}

/// Largest |sin θ| g(r₁^∞ r₂^∞) over the full circle.
pub fn max_sin_g(ctx: &FrequencyContext) -> Result<f64> {
    let eval = |theta: f64| -> f64 {
        match ctx.quasistatic_round_trip(theta) {
            Some(x) => g_ratio(x).map(|g| theta.sin().abs() * g).unwrap_or(0.0),
            None => 0.0,
        }
    };
    let n = 360;
    let step = 2.0 * PI / n as f64;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let th = -PI + step * i as f64;
            (th, eval(th))
        })
        .collect();
    let mut best = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    for i in 0..n {
        let (prev, cur, next) = (samples[(i + n - 1) % n].1, samples[i].1, samples[(i + 1) % n].1);
        if cur >= prev && cur >= next && cur > 0.0 {
            best = best.max(golden_max(&eval, samples[i].0 - step, samples[i].0 + step));
        }
    }
    if !best.is_finite() {
        return Err(Error::Domain("angular maximum of |sin θ| g is not finite".into()));
    }
    Ok(best)
}

/// Golden-section maximisation of a unimodal function on [a, b].
pub fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
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
    fc.max(fd)
}

fn check_grid(omega_grid: &[f64]) -> Result<()> {
    if omega_grid.is_empty() || omega_grid.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("frequency grid must be positive".into()));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("frequency grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Spectral densities f(ω) (N·s/m²), h(ω) (J/m²) and the bound
/// |f| ω d/(h max|sin θ| g) on a grid of angular frequencies (rad/s).
pub fn spectral_report(
    cavity: &CavityConfig,
    omega_grid: &[f64],
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
) -> Result<SpectralReport> {
    spec.validate()?;
    cavity.validate()?;
    check_grid(omega_grid)?;
    let mut f = Vec::with_capacity(omega_grid.len());
    let mut h = Vec::with_capacity(omega_grid.len());
    let mut b = Vec::with_capacity(omega_grid.len());
    let mut converged = true;
    for &omega in omega_grid {
        let p = spectral_point(cavity, omega, spec, solver, consts)?;
        converged &= p.converged;
        f.push(SpectralPoint {
            omega,
            value: p.force,
            error: p.force_error,
        });
        h.push(SpectralPoint {
            omega,
            value: p.heat,
            error: p.heat_error,
        });
        b.push(SpectralPoint {
            omega,
            value: p.bound_lhs,
            error: p.bound_error,
        });
    }
    Ok(SpectralReport {
        force_density: SpectralCurve {
            kind: CurveKind::ForceDensity,
            points: f,
        },
        heat_density: SpectralCurve {
            kind: CurveKind::HeatDensity,
            points: h,
        },
        bound_lhs: SpectralCurve {
            kind: CurveKind::BoundLhs,
            points: b,
        },
        converged,
    })
}

/// Everything the spectral report needs at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPointData {
    /// rad/s
    pub omega: f64,
    pub force: f64,
    pub force_error: f64,
    pub heat: f64,
    pub heat_error: f64,
    pub bound_lhs: f64,
    pub bound_error: f64,
    pub converged: bool,
}

pub fn spectral_point(
    cavity: &CavityConfig,
    omega: f64,
    spec: &QuadratureSpec,
    solver: SolverChoice,
    consts: &Constants,
) -> Result<SpectralPointData> {
    let omega_ev = consts.rad_s_to_ev(omega);
    let dn = occupation_difference(omega_ev, cavity.t1, cavity.t2, consts);
    if dn == 0.0 {
        return Ok(SpectralPointData {
            omega,
            force: 0.0,
            force_error: 0.0,
            heat: 0.0,
            heat_error: 0.0,
            bound_lhs: 0.0,
            bound_error: 0.0,
            converged: true,
        });
    }
    let ctx = FrequencyContext::new(cavity, omega_ev, consts, solver)?;
    let m = angular_moments(&ctx, spec)?;
    let pre = consts.hbar_j_s / (8.0 * PI.powi(3)) * dn;
    let (f, fe) = (pre * m.force(), pre.abs() * m.error[1]);
    let (h, he) = (pre * omega * m.heat(), (pre * omega).abs() * m.error[0]);
    let (bound, bound_err) = if f == 0.0 || h == 0.0 {
        (0.0, 0.0)
    } else {
        let gmax = max_sin_g(&ctx)?;
        let v = f.abs() * omega * cavity.d / (h * gmax);
        (v, v * (fe / f.abs() + he / h.abs()))
    };
    Ok(SpectralPointData {
        omega,
        force: f,
        force_error: fe,
        heat: h,
        heat_error: he,
        bound_lhs: bound,
        bound_error: bound_err,
        converged: m.converged,
    })
}

/// f(ω) and h(ω) on a grid of angular frequencies.
pub fn spectral_density_curves(
    cavity: &CavityConfig,
    omega_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<(SpectralCurve, SpectralCurve)> {
    let r = spectral_report(cavity, omega_grid, spec, SolverChoice::default(), &Constants::default())?;
    Ok((r.force_density, r.heat_density))
}

/// |f(ω)| c/(h(ω) max_θ|sin θ| g) in units of c/(ωd).
pub fn bound_inset(cavity: &CavityConfig, omega_grid: &[f64], spec: &QuadratureSpec) -> Result<SpectralCurve> {
    spectral_report(cavity, omega_grid, spec, SolverChoice::default(), &Constants::default()).map(|r| r.bound_lhs)
}
