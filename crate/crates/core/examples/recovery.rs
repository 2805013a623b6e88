//! Energy of the recovery construction against the sharp partition cost.
//!
//! cargo run --example recovery -- [R ...]

use std::sync::Arc;

use twac::geodesics::HeteroclinicSet;
use twac::junction::surface_tensions;
use twac::partitions::{solve_problem1, BoundaryData};
use twac::potential::{symmetric_product_well, Point};
use twac::solver::{build_trace_with, energy, recovery_field, GridSpec, Schedule};

fn main() -> twac::Result<()> {
    let scales: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let scales = if scales.is_empty() { vec![32.0, 64.0, 128.0] } else { scales };
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot)?);
    let c = set.costs();
    let tensions = surface_tensions(c[0], c[1], c[2])?;
    let bdata = BoundaryData::three_equal();
    let net = solve_problem1(&bdata, &tensions)?;
    println!("m0 = {:.6}", net.cost);
    for r in scales {
        let trace = build_trace_with(&bdata, &pot, set.clone(), r, Point::zeros(), 1.0)?;
        let grid = GridSpec::covering_disc(Point::zeros(), 1.0, 0.25 / r)?;
        let field = recovery_field(&net, &trace, &pot, r, Schedule::for_scale(r), grid)?;
        let e = energy(&field, &pot, r);
        println!("R = {r:>6}  E_R = {e:.6}  gap = {:.6}", e - net.cost);
    }
    Ok(())
}
