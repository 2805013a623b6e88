//! Pixel multiway-cut estimate of the partition cost against the exact
//! network solve.
//!
//! cargo run --release --example oracle -- [n]

use std::time::Instant;

use twac::junction::SurfaceTensions;
use twac::partitions::{multiway_cut_oracle_with, solve_problem1, BoundaryData, Neighborhood};

fn main() -> twac::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(256);
    let t = SurfaceTensions::from_tensions([1.0, 2.0, 3.0])?;
    for (name, b) in [("three equal arcs", BoundaryData::three_equal()), ("off-center arcs", BoundaryData::new(vec![0.2, 1.7, 4.4], vec![0, 1, 2])?)] {
        let m0 = solve_problem1(&b, &t)?.cost;
        let start = Instant::now();
        let o = multiway_cut_oracle_with(&b, &t, n, Neighborhood::default())?;
        println!("{name}: m0 = {m0:.5}, oracle({n}) = {:.5}, relative {:+.4} ({:.1?})", o.cost, (o.cost - m0) / m0, start.elapsed());
    }
    Ok(())
}
