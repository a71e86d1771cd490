//! Fast invariant checks against an independent reference.

use std::f64::consts::PI;

use motive_core::constants::Constants;
use motive_core::flux::{flux_kernel, CavityConfig, FrequencyContext};
use motive_core::fresnel::{reflection_matrix, reflection_matrix_from_above, PlanarMode, SolverChoice};
use motive_core::materials::{DielectricTensor, MaterialModel};
use motive_core::nearfield::g_ratio;
use motive_core::observables::angular_moments;
use motive_core::quadrature::QuadratureSpec;
use num_complex::Complex64;

use crate::output::sha256_hex;

/// Reference values typed in independently of the library table.
const HBAR_EV_S: f64 = 6.582_119_569e-16;
const C_M_S: f64 = 299_792_458.0;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.lines().join("\n").as_bytes())
    }
}

/// Constants with c off by one part in a thousand, for fault injection.
pub fn corrupted(consts: &Constants) -> Constants {
    Constants {
        c_m_s: consts.c_m_s * 1.001,
        ..*consts
    }
}

fn sqrt_up(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Textbook (r_s, r_p) of a vacuum/isotropic interface.
fn scalar_fresnel(e_ev: f64, k: f64, eps: Complex64) -> (Complex64, Complex64) {
    let k0 = e_ev / HBAR_EV_S / C_M_S;
    let kz = sqrt_up(Complex64::new(k0 * k0 - k * k, 0.0));
    let km = sqrt_up(eps * k0 * k0 - k * k);
    ((kz - km) / (kz + km), (eps * kz - km) / (eps * kz + km))
}

fn fresnel_oracle(consts: &Constants) -> Check {
    let mut worst = 0.0_f64;
    for i in 0..60 {
        let e = 0.01 + 0.008 * i as f64;
        let eps = Complex64::new(-40.0 + 1.37 * i as f64, 0.05 + 0.3 * (i % 7) as f64);
        let k0 = e / HBAR_EV_S / C_M_S;
        let k = k0 * [0.3, 0.9, 1.7, 25.0, 900.0][i % 5];
        let th = -PI + 0.41 * i as f64;
        let mode = PlanarMode::from_ev(e, k * th.cos(), k * th.sin(), consts);
        let (rs, rp) = scalar_fresnel(e, k, eps);
        let err = match reflection_matrix(&mode, &DielectricTensor::isotropic(eps)) {
            Ok(r) => [(r.ss() - rs).norm(), (r.pp() - rp).norm(), r.sp().norm(), r.ps().norm()]
                .into_iter()
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    Check {
        name: "Fresnel oracle",
        pass: worst <= 1e-9,
        detail: format!("max deviation {worst:.1e} on 60 modes"),
    }
}

fn positivity(consts: &Constants) -> Check {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for i in 0..400 {
        let e = 0.005 + 0.0007 * i as f64;
        let k0 = consts.k0_from_ev(e);
        let k = k0 * [0.2, 0.95, 1.3, 40.0, 2e3][i % 5];
        let th = 0.173 * i as f64;
        let d = [1e-9, 3e-8, 1e-6][i % 3];
        let mode = PlanarMode::from_ev(e, k * th.cos(), k * th.sin(), consts);
        let t1 = DielectricTensor::gyrotropic(
            Complex64::new(-20.0 + 0.11 * i as f64, 0.01 + 0.02 * (i % 9) as f64),
            Complex64::new(5.0 - 0.07 * i as f64, 0.3),
            Complex64::new(1.5 - 0.01 * i as f64, 0.05),
        );
        let t2 = DielectricTensor::isotropic(Complex64::new(4.0 - 0.1 * i as f64, 0.2 + 0.01 * (i % 5) as f64));
        let (Ok(r1), Ok(r2)) = (reflection_matrix_from_above(&mode, &t1), reflection_matrix(&mode, &t2)) else {
            continue;
        };
        let Ok(kern) = flux_kernel(&mode, &r1, &r2, d) else {
            continue;
        };
        count += 1;
        worst = worst.max(-kern);
    }
    Check {
        name: "flux positivity",
        pass: count == 400 && worst <= 1e-10,
        detail: format!("{count} modes, largest negative kernel {:.1e}", worst.max(0.0) + 0.0),
    }
}

fn reciprocity(consts: &Constants) -> Check {
    let spec = QuadratureSpec::with_rel_tol(1e-6);
    let moment = |plate2: &str| -> Option<(f64, f64)> {
        let cav = CavityConfig::new(
            MaterialModel::preset("SiC").ok()?,
            MaterialModel::preset(plate2).ok()?,
            1e-8,
            300.0,
            270.0,
        )
        .ok()?;
        let ctx = FrequencyContext::new(&cav, 0.11, consts, SolverChoice::Auto).ok()?;
        let m = angular_moments(&ctx, &spec).ok()?;
        Some((m.force(), m.force_scale()))
    };
    match (moment("InSb"), moment("InSb-B10T")) {
        (Some((f0, s0)), Some((fb, sb))) => {
            let (null, signal) = (f0.abs() / s0, fb.abs() / sb);
            Check {
                name: "reciprocity null",
                pass: null <= 1e-9 && signal > 1e-4,
                detail: format!("|f|/scale = {null:.1e} at B = 0, {signal:.3e} at B = 10 T"),
            }
        }
        _ => Check {
            name: "reciprocity null",
            pass: false,
            detail: "evaluation failed".into(),
        },
    }
}

fn g_zero() -> Check {
    let g = g_ratio(Complex64::new(0.0, 0.0)).unwrap_or(f64::NAN);
    Check {
        name: "g(0) = 1",
        pass: (g - 1.0).abs() <= 1e-8,
        detail: format!("g(0) = {g:.12}"),
    }
}

pub fn run(consts: &Constants) -> Report {
    Report {
        checks: vec![fresnel_oracle(consts), positivity(consts), reciprocity(consts), g_zero()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use motive_core::constants::CODATA;

    #[test]
    fn oracle_detects_corruption() {
        assert!(fresnel_oracle(&CODATA).pass);
        assert!(!fresnel_oracle(&corrupted(&CODATA)).pass);
    }

    #[test]
    fn g_check() {
        assert!(g_zero().pass);
    }
}
