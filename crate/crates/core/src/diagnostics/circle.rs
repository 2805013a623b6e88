//! Restriction of a field to a circle: 1D energies, transition windows and
//! their distance to the heteroclinic connections.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geodesics::{winding_number, HeteroclinicSet};
use crate::potential::{Point, Potential};
use crate::solver::Field;

use super::quadrature::require_ball;

pub const PROFILE_ANGLES: usize = 4096;

/// One arc where `W(U) ≥ W₀`, between wells `from` and `to` (counterclockwise).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionWindow {
    pub start: f64,
    pub end: f64,
    pub from: usize,
    pub to: usize,
    /// 1D energy of the window.
    pub energy: f64,
    /// Sup and H¹ distances to the best translate of `ζ_from,to`.
    pub sup_distance: f64,
    pub h1_distance: f64,
}

#[derive(Debug, Clone)]
pub struct CircleProfile {
    pub center: Point,
    pub radius: f64,
    /// Samples at angles `2πk/n`.
    pub values: Vec<Point>,
    /// `W(U)` at the samples.
    pub potential: Vec<f64>,
    pub w0: f64,
    /// Angles where `W(U)` crosses `W₀`, in increasing order.
    pub crossings: Vec<f64>,
    pub windows: Vec<TransitionWindow>,
    /// Around the centroid of the wells; `None` if the curve passes through it.
    pub winding: Option<i32>,
}

impl CircleProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn ds(&self) -> f64 {
        TAU * self.radius / self.len() as f64
    }

    /// `∫ (½|∂_s U|² + W) ds` over the counterclockwise arc from `a` to `b`
    /// (whole sample intervals, trapezoid rule).
    pub fn arc_energy(&self, a: f64, b: f64) -> f64 {
        let n = self.len();
        let step = TAU / n as f64;
        let i0 = (a / step).round() as i64;
        let mut i1 = (b / step).round() as i64;
        while i1 <= i0 {
            i1 += n as i64;
        }
        self.index_energy(i0, i1)
    }

    fn index_energy(&self, i0: i64, i1: i64) -> f64 {
        let n = self.len() as i64;
        let ds = self.ds();
        let at = |i: i64| i.rem_euclid(n) as usize;
        let mut e = 0.0;
        for i in i0..i1 {
            let (p, q) = (at(i), at(i + 1));
            let d = (self.values[q] - self.values[p]) / ds;
            e += (0.5 * d.norm_squared() + 0.5 * (self.potential[p] + self.potential[q])) * ds;
        }
        e
    }

    pub fn total_energy(&self) -> f64 {
        self.index_energy(0, self.len() as i64)
    }

    /// Energies of the upper (`0 ≤ θ ≤ π`) and lower half circles.
    pub fn half_energies(&self) -> [f64; 2] {
        let n = self.len() as i64;
        [self.index_energy(0, n / 2), self.index_energy(n / 2, n)]
    }
}

/// `W₀ = min { W(p) : |p − p_ℓ| = d₀ }` with `d₀` a quarter of the smallest
/// well separation, by sampling each circle at 1024 points.
pub fn transition_level(pot: &Potential) -> f64 {
    let d0 = 0.25 * pot.min_well_separation();
    let mut w0 = f64::INFINITY;
    for l in 0..3 {
        for k in 0..1024 {
            let th = TAU * k as f64 / 1024.0;
            w0 = w0.min(pot.eval(&(pot.well(l) + Point::new(th.cos(), th.sin()) * d0)));
        }
    }
    w0
}

pub fn circle_profile(field: &Field, pot: &Potential, rho: f64) -> Result<CircleProfile> {
    let set = HeteroclinicSet::with_defaults(pot)?;
    circle_profile_with(field, pot, &set, &Point::zeros(), rho)
}

pub fn circle_profile_with(field: &Field, pot: &Potential, set: &HeteroclinicSet, center: &Point, rho: f64) -> Result<CircleProfile> {
    require_ball(field, center, rho)?;
    let n = PROFILE_ANGLES;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let th = TAU * k as f64 / n as f64;
        let x = center + Point::new(th.cos(), th.sin()) * rho;
        values.push(field.bilinear(&x).ok_or_else(|| Error::OutsideDomain(format!("circle point ({:.4}, {:.4}) has no data", x.x, x.y)))?);
    }
    let potential: Vec<f64> = values.iter().map(|u| pot.eval(u)).collect();
    let w0 = transition_level(pot);
    let winding = winding_number(&values, &pot.centroid()).ok();
    let mut prof = CircleProfile { center: *center, radius: rho, values, potential, w0, crossings: Vec::new(), windows: Vec::new(), winding };

    let high: Vec<bool> = prof.potential.iter().map(|w| *w >= w0).collect();
    let step = TAU / n as f64;
    for k in 0..n {
        let (a, b) = (prof.potential[k], prof.potential[(k + 1) % n]);
        if high[k] != high[(k + 1) % n] {
            prof.crossings.push((k as f64 + (w0 - a) / (b - a)) * step);
        }
    }
    if high.iter().all(|h| *h) || !high.iter().any(|h| *h) {
        return Ok(prof);
    }
    // windows run from a rising crossing to the next falling one
    let first_low = high.iter().position(|h| !h).expect("some sample is low");
    let mut k = 0;
    while k < n {
        let i = (first_low + k) % n;
        if high[i] {
            let start = first_low + k;
            let mut end = start;
            while high[end % n] {
                end += 1;
            }
            let before = pot.nearest_well(&prof.values[(start + n - 1) % n]);
            let after = pot.nearest_well(&prof.values[end % n]);
            let energy = prof.index_energy(start as i64 - 1, end as i64);
            let (sup, h1) = if before != after { window_distance(&prof, set, before, after, start, end) } else { (f64::NAN, f64::NAN) };
            prof.windows.push(TransitionWindow {
                start: ((start as f64 - 0.5) * step).rem_euclid(TAU),
                end: ((end as f64 - 0.5) * step).rem_euclid(TAU),
                from: before,
                to: after,
                energy,
                sup_distance: sup,
                h1_distance: h1,
            });
            k = end - first_low;
        } else {
            k += 1;
        }
    }
    Ok(prof)
}

/// Distances of the samples `start..end` (padded by the window length on
/// each side) to `ζ_ij(s − τ)`, minimized over the shift `τ`.
fn window_distance(prof: &CircleProfile, set: &HeteroclinicSet, i: usize, j: usize, start: usize, end: usize) -> (f64, f64) {
    let n = prof.len();
    let ds = prof.ds();
    let pad = (end - start).max(8) as i64;
    let pts: Vec<(f64, Point)> = (-pad..(end - start) as i64 + pad)
        .map(|m| ((m + pad) as f64 * ds, prof.values[(start as i64 + m).rem_euclid(n as i64) as usize]))
        .collect();
    let span = pts.len() as f64 * ds;
    let sup = |tau: f64| pts.iter().map(|(s, u)| (u - set.eval_midpoint(i, j, s - tau)).norm()).fold(0.0, f64::max);

    let steps = 400;
    let mut best = (f64::INFINITY, 0.0);
    for m in 0..=steps {
        let tau = span * m as f64 / steps as f64;
        let d = sup(tau);
        if d < best.0 {
            best = (d, tau);
        }
    }
    let mut width = span / steps as f64;
    for _ in 0..40 {
        for tau in [best.1 - width, best.1 + width] {
            let d = sup(tau);
            if d < best.0 {
                best = (d, tau);
            }
        }
        width *= 0.5;
    }
    let tau = best.1;
    let mut h1 = 0.0;
    for w in pts.windows(2) {
        let (s0, u0) = w[0];
        let (s1, u1) = w[1];
        let z0 = set.eval_midpoint(i, j, s0 - tau);
        let z1 = set.eval_midpoint(i, j, s1 - tau);
        let e = 0.5 * ((u0 - z0).norm_squared() + (u1 - z1).norm_squared());
        let de = ((u1 - u0) - (z1 - z0)) / ds;
        h1 += (e + de.norm_squared()) * ds;
    }
    (best.0, h1.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::symmetric_product_well;
    use crate::solver::{Bc, Domain, GridSpec};

    #[test]
    fn constant_field_has_no_transitions() {
        let pot = symmetric_product_well();
        let g = GridSpec::covering_disc(Point::zeros(), 6.0, 0.5).unwrap();
        let f = Field::new(g, Domain::disc(6.0), Bc::Dirichlet, pot.well(1));
        let p = circle_profile(&f, &pot, 5.0).unwrap();
        assert_eq!(p.total_energy(), 0.0);
        assert!(p.crossings.is_empty() && p.windows.is_empty());
        assert_eq!(p.winding, Some(0));
    }

    #[test]
    fn slab_half_circles_carry_one_layer_each() {
        let pot = symmetric_product_well();
        let set = HeteroclinicSet::with_defaults(&pot).unwrap();
        let g = GridSpec::covering_disc(Point::zeros(), 64.0, 0.25).unwrap();
        let f = Field::from_fn(g, Domain::disc(64.0), Bc::Dirichlet, |x| set.eval_midpoint(0, 2, x.x));
        let p = circle_profile_with(&f, &pot, &set, &Point::zeros(), 60.0).unwrap();
        let c = set.cost(0, 2);
        for v in p.half_energies() {
            assert!((v - c).abs() / c < 0.05, "{v} vs {c}");
        }
        assert_eq!(p.windows.len(), 2);
        for w in &p.windows {
            assert!(w.sup_distance < 0.05, "{w:?}");
        }
        assert_eq!(p.crossings.len(), 4);
    }
}
