//! Minimizers on large discs in unscaled coordinates (`R = 1`), reached by
//! doubling the radius: each stage starts from the previous solution near
//! the junction and from straight heteroclinic layers elsewhere.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geodesics::HeteroclinicSet;
use crate::junction::surface_tensions;
use crate::network::PartitionNetwork;
use crate::partitions::{solve_problem1, BoundaryData};
use crate::potential::{Point, Potential};

use super::grid::{Field, GridSpec};
use super::recovery::profile_field;
use super::relax::{relax_with, RelaxOptions, RelaxReport};
use super::trace::build_trace_with;

#[derive(Debug, Clone, Copy)]
pub struct DiscSolveOptions {
    pub spacing: f64,
    /// Radius of the first stage.
    pub start_radius: f64,
    pub relax: RelaxOptions,
}

impl Default for DiscSolveOptions {
    fn default() -> Self {
        DiscSolveOptions { spacing: 0.25, start_radius: 16.0, relax: RelaxOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct DiscSolution {
    pub field: Field,
    /// Minimal partition of the unit disc for the same boundary data.
    pub network: PartitionNetwork,
    /// Radius and relaxation report per stage.
    pub stages: Vec<(f64, RelaxReport)>,
}

impl DiscSolution {
    pub fn radius(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.0)
    }
}

pub fn solve_disc(
    pot: &Potential,
    profiles: Arc<HeteroclinicSet>,
    bdata: &BoundaryData,
    radius: f64,
    opts: &DiscSolveOptions,
) -> Result<DiscSolution> {
    if !(radius > 0.0) || !(opts.spacing > 0.0) || radius < 4.0 * opts.spacing {
        return Err(Error::InvalidParams(format!("disc radius {radius} too small for spacing {}", opts.spacing)));
    }
    let c = profiles.costs();
    let tensions = surface_tensions(c[0], c[1], c[2])?;
    let network = solve_problem1(bdata, &tensions)?;
    let junction = network.junctions.first().copied().unwrap_or_else(Point::zeros);

    let mut radii = vec![radius];
    while radii.last().copied().unwrap_or(0.0) / 2.0 >= opts.start_radius.max(4.0 * opts.spacing) {
        radii.push(radii.last().copied().unwrap_or(0.0) / 2.0);
    }
    radii.reverse();

    let mut stages = Vec::with_capacity(radii.len());
    let mut prev: Option<(Field, f64)> = None;
    for &r in &radii {
        let trace = build_trace_with(bdata, pot, profiles.clone(), 1.0, Point::zeros(), r)?;
        let grid = GridSpec::covering_disc(Point::zeros(), r, opts.spacing)?;
        let mut start = profile_field(&network, &trace, grid);
        if let Some((old, r_old)) = &prev {
            let shift = junction * (r - r_old);
            let reach = 0.75 * r_old;
            for k in 0..start.values.len() {
                if !start.is_interior(k) {
                    continue;
                }
                let y = start.position(k) - shift;
                if (y - junction * *r_old).norm() < reach {
                    if let Some(v) = old.bilinear(&y) {
                        start.values[k] = v;
                    }
                }
            }
        }
        let (field, report) = relax_with(&start, pot, 1.0, &opts.relax, None)?;
        if !report.converged {
            return Err(Error::Convergence { what: "disc stage", iterations: report.iterations, residual: report.residual });
        }
        stages.push((r, report));
        prev = Some((field, r));
    }
    let (field, _) = prev.expect("at least one stage");
    Ok(DiscSolution { field, network, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::symmetric_product_well;
    use crate::solver::energy::energy;

    #[test]
    fn small_junction_disc() {
        let pot = symmetric_product_well();
        let set = Arc::new(HeteroclinicSet::with_defaults(&pot).unwrap());
        let opts = DiscSolveOptions { spacing: 0.5, start_radius: 4.0, relax: RelaxOptions::new(1e-6, 100) };
        let sol = solve_disc(&pot, set.clone(), &BoundaryData::three_equal(), 8.0, &opts).unwrap();
        assert_eq!(sol.stages.len(), 2);
        let e = energy(&sol.field, &pot, 1.0) / 8.0;
        // E_R on the unit disc with R = 8 is within a modest margin of the partition cost
        assert!((e - sol.network.cost).abs() / sol.network.cost < 0.15, "{e} vs {}", sol.network.cost);
    }
}
