//! Force, heat transfer and friction between SiC and InSb at 10 T for one gap.
//!
//! cargo run --release -p motive-core --example gap_point -- 1e-8 1e-4

use std::time::Instant;

use motive_core::constants::CODATA;
use motive_core::flux::CavityConfig;
use motive_core::fresnel::SolverChoice;
use motive_core::materials::MaterialModel;
use motive_core::nearfield::asymptotes;
use motive_core::observables::observables;
use motive_core::quadrature::QuadratureSpec;

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are numbers: gap (m) and tolerance"))
        .collect();
    let d = args.first().copied().unwrap_or(1e-8);
    let tol = args.get(1).copied().unwrap_or(1e-4);
    let cav = CavityConfig::new(
        MaterialModel::preset("SiC").unwrap(),
        MaterialModel::preset("InSb-B10T").unwrap(),
        d,
        300.0,
        270.0,
    )
    .unwrap();
    let spec = QuadratureSpec::with_rel_tol(tol);

    let t = Instant::now();
    let o = observables(&cav, &spec, SolverChoice::Auto, &CODATA).unwrap();
    println!("gap {d:e} m ({:.1} s, {} kernel evaluations)", t.elapsed().as_secs_f64(), o.metadata.kernel_evaluations);
    println!("  F_y/A = {:.6e} N/m^2  (F_y c/A = {:.6e} W/m^2)", o.force_per_area.value, o.force_per_area.value * CODATA.c_m_s);
    println!("  H/A   = {:.6e} W/m^2", o.heat_per_area.value);
    println!("  Γ/A   = {:.6e} N s/m^3", o.friction_per_area.value);

    let a = asymptotes(&cav, &spec, &CODATA).unwrap();
    println!("small-gap asymptotes:");
    println!("  F_y/A = {:.6e}  H/A = {:.6e}  Γ/A = {:.6e}", a.force_per_area.value, a.heat_per_area.value, a.friction_per_area.value);
}
