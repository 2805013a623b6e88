//! Discrete energy `Σ R W(u) h² + Σ_edges |Δu|² / (2R)` and the matching residual.

use rayon::prelude::*;

use crate::potential::{Point, Potential};

use super::grid::Field;

/// Nodes per parallel work item. Fixed so that reductions do not depend on
/// the number of threads.
pub(crate) const CHUNK: usize = 4096;

/// Compensated sum of `values` in order.
pub(crate) fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Energy of the nodes selected by `select` (interior nodes only contribute
/// potential terms) plus every edge with a selected endpoint.
pub fn energy_where(field: &Field, pot: &Potential, r_scale: f64, select: impl Fn(usize) -> bool + Sync) -> f64 {
    let h2 = field.spacing * field.spacing;
    let nx = field.nx;
    let n = field.values.len();
    let partials: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            neumaier((c * CHUNK..((c + 1) * CHUNK).min(n)).map(|k| {
                if !field.is_present(k) {
                    return 0.0;
                }
                let mut e = 0.0;
                let sel_k = select(k);
                if sel_k && field.is_interior(k) {
                    e += r_scale * pot.eval(&field.values[k]) * h2;
                }
                let i = k % nx;
                for q in [(i + 1 < nx).then(|| k + 1), (k + nx < n).then(|| k + nx)].into_iter().flatten() {
                    if !field.is_present(q) || !(field.is_interior(k) || field.is_interior(q)) {
                        continue;
                    }
                    if sel_k || select(q) {
                        e += (field.values[k] - field.values[q]).norm_squared() / (2.0 * r_scale);
                    }
                }
                e
            }))
        })
        .collect();
    neumaier(partials)
}

pub fn energy(field: &Field, pot: &Potential, r_scale: f64) -> f64 {
    energy_where(field, pot, r_scale, |_| true)
}

/// `Δ_h u / R² − ∇W(u)` at interior nodes (zero elsewhere).
pub fn residual_field(field: &Field, pot: &Potential, r_scale: f64) -> Vec<Point> {
    let h2r2 = field.spacing * field.spacing * r_scale * r_scale;
    (0..field.values.len())
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|k| {
            if !field.is_interior(k) {
                return Point::zeros();
            }
            let u = field.values[k];
            let mut lap = Point::zeros();
            for q in field.neighbors(k).into_iter().flatten() {
                if field.is_present(q) {
                    lap += field.values[q] - u;
                }
            }
            lap / h2r2 - pot.grad(&u)
        })
        .collect()
}

pub fn max_residual(field: &Field, pot: &Potential, r_scale: f64) -> f64 {
    residual_field(field, pot, r_scale).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::grid::{Bc, Domain, GridSpec};
    use super::*;
    use crate::geodesics::heteroclinic;
    use crate::potential::symmetric_product_well;

    #[test]
    fn constant_well_field_has_zero_energy() {
        let pot = symmetric_product_well();
        let g = GridSpec::unit_disc(64).unwrap();
        let f = Field::new(g, Domain::unit_disc(), Bc::Dirichlet, pot.well(2));
        assert_eq!(energy(&f, &pot, 16.0), 0.0);
        assert_eq!(max_residual(&f, &pot, 16.0), 0.0);
    }

    #[test]
    fn slab_energy_is_height_times_cost() {
        let pot = symmetric_product_well();
        let prof = heteroclinic(&pot, 0, 1, 10.0, 1024).unwrap();
        let h = 0.05;
        let (nx, ny) = (401, 201);
        let g = GridSpec::new(nx, ny, h, Point::new(-10.0, 0.0)).unwrap();
        let f = Field::from_fn(g, Domain::Rect, Bc::Neumann, |x| prof.eval_from_midpoint(x.x));
        let height = ny as f64 * h;
        let e = energy(&f, &pot, 1.0);
        assert!((e / height - prof.energy).abs() / prof.energy < 0.01, "{} vs {}", e / height, prof.energy);
    }

    #[test]
    fn energy_where_splits_additively_on_nodes() {
        let pot = symmetric_product_well();
        let g = GridSpec::new(10, 10, 0.3, Point::zeros()).unwrap();
        let f = Field::from_fn(g, Domain::Rect, Bc::Neumann, |x| Point::new(x.x.sin(), x.y.cos()));
        let all = energy(&f, &pot, 2.0);
        let pot_only: f64 = f.values.iter().map(|v| 2.0 * pot.eval(v) * 0.09).sum();
        let none = energy_where(&f, &pot, 2.0, |_| false);
        assert_eq!(none, 0.0);
        assert!(all > pot_only);
    }
}
