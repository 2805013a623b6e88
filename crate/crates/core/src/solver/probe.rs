//! Numerical check of local minimality: perturb inside a window, relax with
//! the window boundary clamped, and compare energies.

use rand::RngExt;

use crate::error::{Error, Result};
use crate::potential::{Point, Potential};
use crate::rng::seeded;

use super::energy::energy_where;
use super::grid::Field;
use super::relax::{relax_with, RelaxOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub min: Point,
    pub max: Point,
}

impl Window {
    pub fn centered(c: Point, half: f64) -> Self {
        Window { min: c - Point::new(half, half), max: c + Point::new(half, half) }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.x > self.min.x && x.x < self.max.x && x.y > self.min.y && x.y < self.max.y
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    /// `E_K(relaxed perturbation) − E_K(field)` per trial.
    pub deltas: Vec<f64>,
    pub area: f64,
    /// `−tol · |K|`.
    pub threshold: f64,
    pub free_nodes: usize,
}

impl ProbeReport {
    pub fn min_delta(&self) -> f64 {
        self.deltas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.deltas.iter().all(|d| *d >= self.threshold)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn local_min_probe(
    field: &Field,
    pot: &Potential,
    r_scale: f64,
    window: Window,
    trials: usize,
    amplitude: f64,
    seed: u64,
    tol: f64,
) -> Result<ProbeReport> {
    let free: Vec<bool> = (0..field.values.len()).map(|k| field.is_interior(k) && window.contains(&field.position(k))).collect();
    let free_nodes = free.iter().filter(|f| **f).count();
    if free_nodes == 0 {
        return Err(Error::InvalidParams("probe window contains no interior node".into()));
    }
    let select = |k: usize| free[k];
    let base = energy_where(field, pot, r_scale, select);
    let mut rng = seeded(seed);
    let opts = RelaxOptions::new(tol, 200);
    let (w, hgt) = (window.max.x - window.min.x, window.max.y - window.min.y);
    let mut deltas = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut trial = field.clone();
        for k in 0..trial.values.len() {
            if !free[k] {
                continue;
            }
            let x = trial.position(k) - window.min;
            let bump = (std::f64::consts::PI * x.x / w).sin() * (std::f64::consts::PI * x.y / hgt).sin();
            let kick = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            trial.values[k] += kick * (amplitude * bump);
        }
        let (relaxed, report) = relax_with(&trial, pot, r_scale, &opts, Some(&free))?;
        if !report.converged {
            return Err(Error::Convergence { what: "probe relaxation", iterations: report.iterations, residual: report.residual });
        }
        deltas.push(energy_where(&relaxed, pot, r_scale, select) - base);
    }
    let area = window.area();
    Ok(ProbeReport { deltas, area, threshold: -tol * area, free_nodes })
}

#[cfg(test)]
mod tests {
    use super::super::grid::{Bc, Domain, GridSpec};
    use super::super::relax::relax;
    use super::*;
    use crate::potential::symmetric_product_well;

    fn sector_field(pot: &Potential) -> Field {
        let g = GridSpec::unit_disc(32).unwrap();
        Field::from_fn(g, Domain::unit_disc(), Bc::Dirichlet, |x| {
            let a = x.y.atan2(x.x).rem_euclid(std::f64::consts::TAU);
            pot.well((a / (std::f64::consts::TAU / 3.0)) as usize % 3)
        })
    }

    #[test]
    fn relaxed_field_passes() {
        let pot = symmetric_product_well();
        let tol = 1e-7;
        let f = relax(&sector_field(&pot), &pot, 4.0, tol, 100).unwrap();
        let rep = local_min_probe(&f, &pot, 4.0, Window::centered(Point::zeros(), 0.4), 4, 0.1, 3, tol).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn unrelaxed_field_reports_negative_deltas() {
        let pot = symmetric_product_well();
        let mut f = sector_field(&pot);
        let mut rng = seeded(9);
        for k in 0..f.values.len() {
            if f.is_interior(k) {
                f.values[k] += Point::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            }
        }
        let rep = local_min_probe(&f, &pot, 4.0, Window::centered(Point::zeros(), 0.4), 2, 0.1, 3, 1e-7).unwrap();
        assert!(rep.deltas.iter().all(|d| *d < 0.0));
        assert!(!rep.passed());
    }
}
