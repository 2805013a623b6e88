//! Relaxes a small unit-disc junction field and probes it for local
//! minimality with random compactly supported perturbations.
//!
//! cargo run --release --example probe -- [R] [trials]

use std::sync::Arc;

use twac::geodesics::HeteroclinicSet;
use twac::junction::surface_tensions;
use twac::partitions::{solve_problem1, BoundaryData};
use twac::potential::{symmetric_product_well, Point};
use twac::solver::{build_trace_with, local_min_probe, recovery_field, relax_with, GridSpec, RelaxOptions, Schedule, Window};

fn main() -> twac::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let r: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(16.0);
    let trials: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(4);
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot)?);
    let c = set.costs();
    let bdata = BoundaryData::three_equal();
    let net = solve_problem1(&bdata, &surface_tensions(c[0], c[1], c[2])?)?;
    let trace = build_trace_with(&bdata, &pot, set, r, Point::zeros(), 1.0)?;
    let start = recovery_field(&net, &trace, &pot, r, Schedule::for_scale(r), GridSpec::unit_disc(128)?)?;
    let tol = 1e-9;
    let (field, rep) = relax_with(&start, &pot, r, &RelaxOptions::new(tol, 200), None)?;
    println!("relaxed in {} Newton steps, residual {:.2e}", rep.iterations, rep.residual);

    let window = Window::centered(Point::zeros(), 0.3);
    let probe = local_min_probe(&field, &pot, r, window, trials, 0.05, 1, tol)?;
    for (k, d) in probe.deltas.iter().enumerate() {
        println!("trial {k}: delta E_K = {d:+.3e}");
    }
    println!("threshold {:.3e}, {} free nodes, passed {}", probe.threshold, probe.free_nodes, probe.passed());
    Ok(())
}
