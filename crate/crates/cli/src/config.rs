//! Run configuration files and the shipped presets.

use motive_core::engine::EngineParams;
use motive_core::flux::CavityConfig;
use motive_core::fresnel::SolverChoice;
use motive_core::materials::MaterialSpec;
use motive_core::quadrature::QuadratureSpec;
use motive_core::constants::Constants;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRESETS: [(&str, &str); 2] = [
    ("fig3", include_str!("../presets/fig3.toml")),
    ("dilute-engine", include_str!("../presets/dilute-engine.toml")),
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cavity: Option<CavitySection>,
    pub scan: Option<ScanSection>,
    pub spectrum: Option<SpectrumSection>,
    pub engine: Option<EngineSection>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub plate1: MaterialSpec,
    pub plate2: MaterialSpec,
    /// K
    pub t1: f64,
    pub t2: f64,
    /// Gap for single-distance runs, m.
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub d_min: f64,
    pub d_max: f64,
    #[serde(default = "default_points_per_decade")]
    pub points_per_decade: usize,
    /// Skip the near-field asymptote columns.
    #[serde(default)]
    pub skip_asymptotes: bool,
}

fn default_points_per_decade() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub omega_min_ev: f64,
    pub omega_max_ev: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub alpha: f64,
    pub r_n: f64,
    pub omega_bar_ev: f64,
    pub im_r1: f64,
    pub t1: f64,
    pub dt: f64,
    pub d: f64,
    #[serde(default = "default_velocity_points")]
    pub velocity_points: usize,
}

fn default_velocity_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub evanescent_cutoff: Option<f64>,
    pub solver: Option<SolverChoice>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            CliError::Usage(format!("unknown preset '{name}' (known: {})", known.join(", ")))
        })?;
        Self::parse(text)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let q = &self.quadrature;
        let mut spec = QuadratureSpec::default();
        if let Some(v) = q.rel_tol {
            spec.rel_tol = v;
        }
        if let Some(v) = q.abs_tol {
            spec.abs_tol = v;
        }
        if let Some(v) = q.max_subdivisions {
            spec.max_subdivisions = v;
        }
        if let Some(v) = q.evanescent_cutoff {
            spec.evanescent_cutoff = v;
        }
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }

    pub fn solver(&self) -> SolverChoice {
        self.quadrature.solver.unwrap_or(SolverChoice::Auto)
    }

    fn cavity_section(&self) -> Result<&CavitySection, CliError> {
        self.cavity
            .as_ref()
            .ok_or_else(|| CliError::Usage("configuration has no [cavity] section".into()))
    }

    /// The cavity at its configured gap (or `fallback_d` when none is set).
    pub fn cavity(&self, fallback_d: Option<f64>) -> Result<CavityConfig, CliError> {
        let c = self.cavity_section()?;
        let d = c.d.or(fallback_d).ok_or_else(|| CliError::Usage("cavity gap d is not set".into()))?;
        let build = |m: &MaterialSpec| m.build().map_err(|e| CliError::Usage(e.to_string()));
        CavityConfig::new(build(&c.plate1)?, build(&c.plate2)?, d, c.t1, c.t2)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Log-spaced gaps from d_min to d_max inclusive.
    pub fn distance_grid(&self) -> Result<Vec<f64>, CliError> {
        let s = self
            .scan
            .as_ref()
            .ok_or_else(|| CliError::Usage("configuration has no [scan] section".into()))?;
        if !(s.d_min > 0.0 && s.d_max > s.d_min && s.d_max.is_finite()) {
            return Err(CliError::Usage(format!(
                "scan range must be positive and increasing, got [{}, {}]",
                s.d_min, s.d_max
            )));
        }
        if s.points_per_decade < 1 {
            return Err(CliError::Usage("points_per_decade must be at least 1".into()));
        }
        Ok(log_grid(s.d_min, s.d_max, s.points_per_decade))
    }

    /// Log-spaced photon energies in eV.
    pub fn energy_grid(&self) -> Result<Vec<f64>, CliError> {
        let s = self
            .spectrum
            .as_ref()
            .ok_or_else(|| CliError::Usage("configuration has no [spectrum] section".into()))?;
        if !(s.omega_min_ev > 0.0 && s.omega_max_ev > s.omega_min_ev && s.omega_max_ev.is_finite()) {
            return Err(CliError::Usage("spectrum range must be positive and increasing".into()));
        }
        if s.points < 2 {
            return Err(CliError::Usage("spectrum needs at least two points".into()));
        }
        let n = s.points;
        let ratio = s.omega_max_ev / s.omega_min_ev;
        Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    s.omega_max_ev
                } else {
                    s.omega_min_ev * ratio.powf(i as f64 / (n - 1) as f64)
                }
            })
            .collect())
    }

    pub fn engine(&self, consts: &Constants) -> Result<(EngineParams, usize), CliError> {
        let e = self
            .engine
            .as_ref()
            .ok_or_else(|| CliError::Usage("configuration has no [engine] section".into()))?;
        let p = EngineParams {
            alpha: e.alpha,
            r_n: e.r_n,
            omega_bar: consts.ev_to_rad_s(e.omega_bar_ev),
            im_r1: e.im_r1,
            t1: e.t1,
            dt: e.dt,
            d: e.d,
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if e.velocity_points < 2 {
            return Err(CliError::Usage("velocity_points must be at least 2".into()));
        }
        Ok((p, e.velocity_points))
    }
}

/// `per_decade` points per decade from `lo`, ending exactly at `hi`.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64 - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / n as f64)
            }
        })
        .collect()
}
