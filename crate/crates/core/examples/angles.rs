//! Surface tensions, sine-law opening angles and the junction map for a set
//! of costs.
//!
//! cargo run --example angles -- [c12 c13 c23]

use twac::junction::{junction_angles, make_junction_map, sine_law_residual, surface_tensions};
use twac::potential::{symmetric_product_well, Point};

fn main() -> twac::Result<()> {
    let c: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (c12, c13, c23) = match c[..] {
        [a, b, d] => (a, b, d),
        _ => (5.0, 4.0, 3.0),
    };
    let t = surface_tensions(c12, c13, c23)?;
    println!("costs    ({c12}, {c13}, {c23})");
    println!("tensions {:?}", t.t);
    let a = junction_angles(c12, c13, c23)?;
    println!("angles   {:.6?} deg", a.map(f64::to_degrees));
    println!("sine-law residual {:.2e}", sine_law_residual(a, c12, c13, c23));

    let pot = symmetric_product_well();
    let map = make_junction_map(a, 0.0, [0, 1, 2]);
    println!("ray directions {:.4?} rad", map.ray_angles());
    for x in [Point::new(1.0, 0.2), Point::new(-1.0, 0.5), Point::new(0.0, -1.0)] {
        println!("  label at ({:+.1}, {:+.1}) = p{}, value {:.3?}", x.x, x.y, map.label_at(&x) + 1, map.eval(&pot, &x));
    }
    Ok(())
}
