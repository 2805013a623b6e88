//! Blow-down diagnostics of an unscaled field: W̃, equipartition defect,
//! radial energy, cone classification, Pohozaev residuals and the circle trace.
//! Without a field file, a disc of radius 48 is solved first.
//!
//! cargo run --release --example diagnostics -- [field.twac [R ...]]

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use twac::diagnostics::{circle_profile_with, classify_blowdown, pohozaev_residual, ClassifyOptions};
use twac::geodesics::HeteroclinicSet;
use twac::partitions::BoundaryData;
use twac::potential::{symmetric_product_well, Point};
use twac::solver::{read_field, solve_disc, DiscSolveOptions};

fn main() -> twac::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let pot = symmetric_product_well();
    let set = Arc::new(HeteroclinicSet::with_defaults(&pot)?);
    let (field, mut radii) = match args.get(1) {
        Some(path) => (read_field(Path::new(path))?, args[2..].iter().filter_map(|a| a.parse().ok()).collect()),
        None => {
            let sol = solve_disc(&pot, set.clone(), &BoundaryData::three_equal(), 48.0, &DiscSolveOptions::default())?;
            (sol.field, vec![12.0, 24.0, 40.0])
        }
    };
    if radii.is_empty() {
        radii = vec![16.0, 32.0, 64.0, 128.0];
    }
    let t = Instant::now();

    let report = classify_blowdown(&field, &pot, set.costs(), &radii, &ClassifyOptions::default())?;
    println!("{:>8} {:>10} {:>12} {:>12}", "R", "W~", "defect", "radial");
    for k in 0..radii.len() {
        println!(
            "{:>8} {:>10.5} {:>12.5} {:>12.5}",
            radii[k], report.wtilde[k], report.equipartition_defect[k], report.radial_term[k]
        );
    }
    print!("{}", report.summary());

    for r in &radii {
        println!("pohozaev(R = {r}) = {:.3e}", pohozaev_residual(&field, &pot, *r)?);
    }
    let rho = *radii.last().expect("nonempty");
    let circle = circle_profile_with(&field, &pot, &set, &Point::zeros(), rho)?;
    println!(
        "circle R = {rho}: energy {:.5} vs cost sum {:.5}, winding {:?}, {} windows",
        circle.total_energy(),
        set.costs().iter().sum::<f64>(),
        circle.winding,
        circle.windows.len()
    );
    for w in &circle.windows {
        println!("  p{} -> p{}: energy {:.5}, sup {:.3e}, H1 {:.3e}", w.from + 1, w.to + 1, w.energy, w.sup_distance, w.h1_distance);
    }
    println!("({:.1?})", t.elapsed());
    Ok(())
}
