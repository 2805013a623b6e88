//! Costs, heteroclinic profiles and the closed curve they form for the
//! symmetric product well.
//!
//! `cargo run --release --example heteroclinic [out.csv]`

use twac::geodesics::{heteroclinic, lambda_curve, pairwise_costs, winding_number};
use twac::potential::symmetric_product_well;

fn main() -> twac::Result<()> {
    let pot = symmetric_product_well();
    let costs = pairwise_costs(&pot)?;
    println!("c12 = {:.6}  c13 = {:.6}  c23 = {:.6}  ({:?})", costs.c12, costs.c13, costs.c23, costs.triangle);

    let prof = heteroclinic(&pot, 0, 1, 12.0, 2048)?;
    println!("profile energy      {:.6}", prof.energy);
    println!("first-integral gap  {:.3e}", prof.first_integral_defect(&pot));
    println!("decay rate          {:.4} (linearisation: {:.4})", prof.decay_rate, 18f64.sqrt());

    let curve = lambda_curve(&pot)?;
    let w = winding_number(&curve.points, &pot.centroid())?;
    println!("closed curve: {} points, simple = {}, winding about centroid = {w}", curve.points.len(), curve.is_simple);

    if let Some(path) = std::env::args().nth(1) {
        prof.write_csv(&pot, std::path::Path::new(&path))?;
        println!("wrote {path}");
    }
    Ok(())
}
