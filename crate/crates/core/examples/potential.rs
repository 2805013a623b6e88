//! Builds the symmetric and a perturbed triple-well potential, validates them
//! and prints their costs.
//!
//! cargo run --example potential -- [eps]

use twac::geodesics::validate_with_costs;
use twac::potential::{symmetric_product_well, Family, Potential};

fn main() -> twac::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.3);
    let sym = symmetric_product_well();
    let bumped = Potential::new(*sym.wells(), 1.0, Family::Perturbed { eps, weights: [1.0, -0.5, 0.0], width: 0.6 })?;
    for (name, pot) in [("symmetric", &sym), ("perturbed", &bumped)] {
        let rep = validate_with_costs(pot)?;
        println!("{name}:");
        println!("  W at wells zero     {}", rep.wells_are_zeros);
        println!("  Hessian floor       {:.4} ({})", rep.hessian_floor, if rep.hessian_ok { "ok" } else { "too flat" });
        println!("  growth radius M     {:.3}", rep.growth_radius);
        println!("  convexity radius    {:.3}", rep.convexity_radius);
        println!("  triangle            {:?}", rep.triangle);
        println!("  W(centroid)         {:.4}", pot.eval(&pot.centroid()));
    }
    println!("\n{}", bumped.to_section());
    Ok(())
}
