//! Sharp minimal partitions of the unit disc, their wetted variants, and the
//! square-root law of the gap between them.
//!
//! cargo run --example partitions -- [t1 t2 t3]

use twac::junction::{junction_angles, SurfaceTensions};
use twac::partitions::{compare_partitions, junction_opening_angles, solve_problem1, solve_problem2, BoundaryData};

fn main() -> twac::Result<()> {
    let t: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let tensions = match t[..] {
        [a, b, c] => SurfaceTensions::from_tensions([a, b, c])?,
        _ => SurfaceTensions::from_tensions([1.0, 2.0, 3.0])?,
    };
    let cases = [
        ("three equal arcs", BoundaryData::three_equal()),
        ("two arcs", BoundaryData::two_arcs(0, 1, 2.0)?),
        ("four arcs", BoundaryData::new(vec![0.3, 1.9, 3.4, 5.0], vec![0, 1, 0, 2])?),
    ];
    for (name, b) in &cases {
        let net = solve_problem1(b, &tensions)?;
        println!("{name}: m0 = {:.6}, {} junction(s), {} segments", net.cost, net.junctions.len(), net.segments.len());
        if let Some(a) = junction_opening_angles(&net) {
            println!("  opening angles {:.3?} deg", a.map(f64::to_degrees));
        }
    }
    let [c12, c13, c23] = tensions.costs();
    println!("sine-law angles {:.3?} deg", junction_angles(c12, c13, c23)?.map(f64::to_degrees));

    let b = BoundaryData::three_equal();
    let w = solve_problem2(&b, &tensions, 1e-3)?;
    println!("\nwetted (delta = 1e-3): cost {:.6}, curvatures {:.3?}", w.cost(), w.curvatures);
    println!("  t_l kappa_l residual {:.2e}, arcs bow into gray region: {}", w.curvature_condition_residual(&tensions), w.arcs_bow_into_gray());

    let table = compare_partitions(&b, &tensions, &[1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 3.2e-3])?;
    println!("\n{:>10} {:>12} {:>12} {:>12}", "delta", "m0 - m0^d", "gap/sqrt(d)", "");
    for r in &table.rows {
        println!("{:>10.1e} {:>12.3e} {:>12.5}", r.delta, r.gap, r.gap_over_sqrt_delta);
    }
    println!("fitted exponent {:.3}", table.exponent());
    Ok(())
}
