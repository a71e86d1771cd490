//! The scan, spectrum and engine subcommands.

use std::path::Path;
use std::time::Instant;

use motive_core::constants::Constants;
use motive_core::engine::{dilute_fgh, engine_point, max_power_point, Regime};
use motive_core::nearfield::asymptotes;
use motive_core::observables::{observables, spectral_point};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{conventions, emit, num, timestamp, Manifest, Table};
use crate::CliError;

/// Shared run context after flags have been merged into the configuration.
pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub flags: &'a [String],
    pub out: &'a Path,
    pub workers: usize,
    pub consts: Constants,
}

/// Evaluates `f` on every grid point with a fixed worker pool; results come
/// back in grid order whatever the worker count.
pub fn par_map<T, R, F>(workers: usize, grid: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(|| grid.par_iter().map(&f).collect()))
}

/// Scan and spectrum runs fail as a whole when more than 10% of rows fail.
fn check_failures(failed: usize, total: usize) -> Result<(), CliError> {
    if failed * 10 > total {
        return Err(CliError::Numerical(format!("{failed} of {total} points failed")));
    }
    Ok(())
}

fn status(r: &Result<bool, String>) -> (String, String) {
    match r {
        Ok(c) => (c.to_string(), "ok".into()),
        Err(e) => ("false".into(), e.replace(['\n', ','], " ")),
    }
}

#[derive(Serialize)]
struct NoSummary {}

struct ScanRow {
    values: [f64; 11],
    state: Result<bool, String>,
}

pub fn scan(run: &Run) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = run.config;
    let grid = cfg.distance_grid()?;
    let base = cfg.cavity(Some(grid[0]))?;
    let spec = cfg.quadrature()?;
    let solver = cfg.solver();
    let with_asym = !cfg.scan.as_ref().is_some_and(|s| s.skip_asymptotes);
    let c = run.consts.c_m_s;
    let rows = par_map(run.workers, &grid, |&d| {
        let cav = base.with_gap(d);
        let full = match observables(&cav, &spec, solver, &run.consts) {
            Ok(o) => o,
            Err(e) => {
                return ScanRow {
                    values: [f64::NAN; 11],
                    state: Err(e.to_string()),
                }
            }
        };
        let (af, ah, ag) = if with_asym {
            match asymptotes(&cav, &spec, &run.consts) {
                Ok(a) => (a.force_per_area.value, a.heat_per_area.value, a.friction_per_area.value),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            }
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let (f, h, g) = (full.force_per_area, full.heat_per_area, full.friction_per_area);
        ScanRow {
            values: [f.value, f.value * c, h.value, g.value, f.error, h.error, g.error, af, af * c, ah, ag],
            state: Ok(full.converged()),
        }
    })?;
    let mut table = Table::new(vec![
        "d_m",
        "force_per_area_n_m2",
        "force_c_per_area_w_m2",
        "heat_per_area_w_m2",
        "friction_per_area_n_s_m3",
        "force_error",
        "heat_error",
        "friction_error",
        "force_asymptote",
        "force_c_asymptote",
        "heat_asymptote",
        "friction_asymptote",
        "converged",
        "status",
    ]);
    let mut converged = Vec::new();
    let mut failed = 0;
    for (d, r) in grid.iter().zip(&rows) {
        let mut row = vec![num(*d)];
        row.extend(r.values.iter().map(|&v| num(v)));
        let (conv, st) = status(&r.state);
        row.push(conv);
        row.push(st);
        table.rows.push(row);
        let ok = matches!(r.state, Ok(true));
        failed += usize::from(!ok);
        converged.push(ok);
    }
    finish(run, "scan", &table, converged, failed, start, NoSummary {})?;
    check_failures(failed, grid.len())
}

pub fn spectrum(run: &Run) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = run.config;
    let cav = cfg.cavity(None)?;
    let spec = cfg.quadrature()?;
    let solver = cfg.solver();
    let grid = cfg.energy_grid()?;
    let rows = par_map(run.workers, &grid, |&e| {
        spectral_point(&cav, run.consts.ev_to_rad_s(e), &spec, solver, &run.consts)
    })?;
    let mut table = Table::new(vec![
        "omega_ev",
        "omega_rad_s",
        "f_n_s_m2",
        "f_error",
        "h_j_m2",
        "h_error",
        "bound_lhs_normalized",
        "bound_error",
        "converged",
        "status",
    ]);
    let mut converged = Vec::new();
    let mut failed = 0;
    for (e, r) in grid.iter().zip(&rows) {
        let mut row = vec![num(*e), num(run.consts.ev_to_rad_s(*e))];
        let state = match r {
            Ok(p) => {
                row.extend([p.force, p.force_error, p.heat, p.heat_error, p.bound_lhs, p.bound_error].map(num));
                Ok(p.converged)
            }
            Err(err) => {
                row.extend([f64::NAN; 6].map(num));
                Err(err.to_string())
            }
        };
        let (conv, st) = status(&state);
        row.push(conv);
        row.push(st);
        table.rows.push(row);
        let ok = matches!(state, Ok(true));
        failed += usize::from(!ok);
        converged.push(ok);
    }
    finish(run, "spectrum", &table, converged, failed, start, NoSummary {})?;
    check_failures(failed, grid.len())
}

#[derive(Debug, Serialize)]
pub struct EngineSummary {
    pub eta_c: f64,
    pub v_c: f64,
    pub v_mp: f64,
    pub eta_mp: f64,
    pub eta_mp_over_eta_c: f64,
    pub v_mp_numeric: f64,
    pub force_per_area: f64,
    pub heat_per_area: f64,
    pub friction_per_area: f64,
}

pub fn engine(run: &Run) -> Result<(), CliError> {
    let start = Instant::now();
    let (p, n) = run.config.engine(&run.consts)?;
    let mp = max_power_point(&p, &run.consts).map_err(|e| CliError::Usage(e.to_string()))?;
    let fgh = dilute_fgh(&p, &run.consts).map_err(|e| CliError::Usage(e.to_string()))?;
    // From rest to the stall speed F/Γ, with v_MP on the grid.
    let stall = fgh.force_per_area / fgh.friction_per_area;
    let mut vs: Vec<f64> = (0..n).map(|i| stall * i as f64 / (n - 1) as f64).collect();
    vs.push(mp.v_mp);
    vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vs.dedup();
    let mut table = Table::new(vec![
        "v_m_s",
        "power_per_area_w_m2",
        "efficiency",
        "efficiency_over_carnot",
        "heat_in_per_area_w_m2",
        "regime",
        "valid",
    ]);
    let eta_c = p.eta_c();
    for &v in &vs {
        let pt = engine_point(&p, &fgh, v);
        let eta = pt.efficiency.unwrap_or(f64::NAN);
        table.rows.push(vec![
            num(v),
            num(pt.power_per_area),
            num(eta),
            num(eta / eta_c),
            num(pt.heat_in_per_area),
            match pt.regime {
                Regime::Engine => "engine".into(),
                Regime::Refrigerator => "refrigerator".into(),
            },
            pt.valid.to_string(),
        ]);
    }
    let summary = EngineSummary {
        eta_c,
        v_c: p.v_c(),
        v_mp: mp.v_mp,
        eta_mp: mp.eta_mp,
        eta_mp_over_eta_c: mp.eta_mp / eta_c,
        v_mp_numeric: mp.v_numeric,
        force_per_area: fgh.force_per_area,
        heat_per_area: fgh.heat_per_area,
        friction_per_area: fgh.friction_per_area,
    };
    println!(
        "eta_c = {}  v_c = {} m/s  v_MP = {} m/s  eta_MP = {} (eta_MP/eta_c = {})",
        num(summary.eta_c),
        num(summary.v_c),
        num(summary.v_mp),
        num(summary.eta_mp),
        num(summary.eta_mp_over_eta_c)
    );
    let conv = vec![true; table.rows.len()];
    finish(run, "engine", &table, conv, 0, start, summary)
}

fn finish<S: Serialize>(
    run: &Run,
    command: &str,
    table: &Table,
    converged: Vec<bool>,
    failed: usize,
    start: Instant,
    summary: S,
) -> Result<(), CliError> {
    let csv = table.to_csv()?;
    emit(run.out, &csv, |sha| Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        git_revision: option_env!("MOTIVE_GIT_REVISION"),
        output: run.out.display().to_string(),
        output_sha256: sha,
        rows: table.rows.len(),
        failed_rows: failed,
        converged,
        config: run.config,
        flags: run.flags,
        constants: &run.consts,
        conventions: conventions(),
        workers: run.workers,
        wall_time_s: start.elapsed().as_secs_f64(),
        timestamp_unix_s: timestamp(),
        summary,
    })?;
    eprintln!("wrote {} ({} rows, {failed} failed)", run.out.display(), table.rows.len());
    Ok(())
}
