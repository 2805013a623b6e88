//! Relaxes the symmetric triple junction on a disc of radius L in unscaled
//! coordinates, by radius doubling, and optionally writes the field.
//!
//! cargo run --release --example junction_solve -- [L] [h] [tol] [out.twac]

use std::sync::Arc;
use std::time::Instant;

use twac::geodesics::HeteroclinicSet;
use twac::partitions::BoundaryData;
use twac::potential::symmetric_product_well;
use twac::solver::{energy, solve_disc, write_field, DiscSolveOptions};

fn main() -> twac::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let radius: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(32.0);
    let h: f64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(0.25);
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot)?);
    let start = Instant::now();
    let tol: f64 = args.get(3).and_then(|a| a.parse().ok()).unwrap_or(1e-6);
    let mut opts = DiscSolveOptions { spacing: h, ..Default::default() };
    opts.relax.tol = tol;
    let sol = solve_disc(&pot, set, &BoundaryData::three_equal(), radius, &opts)?;
    for (r, rep) in &sol.stages {
        println!("radius {r:>7.2}: newton {:>3}, cg {:>6}, residual {:.2e}", rep.iterations, rep.cg_iterations, rep.residual);
    }
    let e = energy(&sol.field, &pot, 1.0);
    println!("E / L = {:.6}, m0 = {:.6} ({:.1?})", e / radius, sol.network.cost, start.elapsed());
    if let Some(out) = args.get(4) {
        write_field(std::path::Path::new(out), &sol.field)?;
    }
    Ok(())
}
