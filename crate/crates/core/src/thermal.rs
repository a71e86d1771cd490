//! Bose–Einstein occupation numbers and their frequency derivatives.

use crate::constants::Constants;

/// Beyond this reduced energy the occupation underflows to zero.
const MAX_REDUCED_ENERGY: f64 = 700.0;

/// Planck occupation n = 1/(exp(E/k_B T) − 1) for a photon energy in eV.
pub fn occupation(energy_ev: f64, t_kelvin: f64, consts: &Constants) -> f64 {
    if t_kelvin <= 0.0 || energy_ev <= 0.0 {
        return 0.0;
    }
    let x = energy_ev / consts.thermal_ev(t_kelvin);
    if x > MAX_REDUCED_ENERGY {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// dn/dE in 1/eV, computed as −n(n+1)/(k_B T) so that no exponential of a
/// large argument is formed.
pub fn occupation_derivative_ev(energy_ev: f64, t_kelvin: f64, consts: &Constants) -> f64 {
    if t_kelvin <= 0.0 || energy_ev <= 0.0 {
        return 0.0;
    }
    let kt = consts.thermal_ev(t_kelvin);
    let x = energy_ev / kt;
    if x > MAX_REDUCED_ENERGY {
        return 0.0;
    }
    let n = 1.0 / x.exp_m1();
    -n * (n + 1.0) / kt
}

/// dn/dω in seconds (ω in rad/s).
pub fn occupation_derivative_rad_s(energy_ev: f64, t_kelvin: f64, consts: &Constants) -> f64 {
    occupation_derivative_ev(energy_ev, t_kelvin, consts) * consts.hbar_ev_s
}

/// Difference n(T1) − n(T2), exactly zero when the temperatures coincide.
pub fn occupation_difference(energy_ev: f64, t1: f64, t2: f64, consts: &Constants) -> f64 {
    if t1 == t2 {
        return 0.0;
    }
    occupation(energy_ev, t1, consts) - occupation(energy_ev, t2, consts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA;

    #[test]
    fn derivative_matches_finite_difference() {
        let t = 300.0;
        for &e in &[1e-3, 0.02, 0.1, 0.5] {
            let h = e * 1e-5;
            let fd = (occupation(e + h, t, &CODATA) - occupation(e - h, t, &CODATA)) / (2.0 * h);
            let an = occupation_derivative_ev(e, t, &CODATA);
            assert!(((fd - an) / an).abs() < 1e-7, "e={e}: {fd} vs {an}");
        }
    }

    #[test]
    fn large_argument_is_finite() {
        assert_eq!(occupation(10.0, 1.0, &CODATA), 0.0);
        assert_eq!(occupation_derivative_ev(10.0, 1.0, &CODATA), 0.0);
        let v = occupation_derivative_ev(1.0, 20.0, &CODATA);
        assert!(v.is_finite() && v <= 0.0);
    }

    #[test]
    fn zero_temperature() {
        assert_eq!(occupation(0.1, 0.0, &CODATA), 0.0);
        assert_eq!(occupation_derivative_ev(0.1, 0.0, &CODATA), 0.0);
    }
}
