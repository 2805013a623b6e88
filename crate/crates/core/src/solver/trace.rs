//! Dirichlet data: compressed heteroclinic profiles glued along the boundary circle.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geodesics::HeteroclinicSet;
use crate::partitions::BoundaryData;
use crate::potential::{Point, Potential};

use super::grid::{Field, NodeKind};

/// Distance from the wells below which a profile counts as settled.
pub const SETTLED_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TraceData {
    pub bdata: BoundaryData,
    /// Compression factor: a transition occupies arc length of order `1/r_scale`.
    pub r_scale: f64,
    pub center: Point,
    pub radius: f64,
    profiles: Arc<HeteroclinicSet>,
    wells: [Point; 3],
    half_width: f64,
}

/// Trace on the unit circle for scale `R`.
pub fn build_trace(bdata: &BoundaryData, pot: &Potential, r_scale: f64) -> Result<TraceData> {
    let set = Arc::new(HeteroclinicSet::with_defaults(pot)?);
    build_trace_with(bdata, pot, set, r_scale, Point::zeros(), 1.0)
}

pub fn build_trace_with(
    bdata: &BoundaryData,
    pot: &Potential,
    profiles: Arc<HeteroclinicSet>,
    r_scale: f64,
    center: Point,
    radius: f64,
) -> Result<TraceData> {
    if !(r_scale >= 1.0) || !r_scale.is_finite() {
        return Err(Error::InvalidParams(format!("trace scale must be at least 1, got {r_scale}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!("trace radius must be positive, got {radius}")));
    }
    let half_width = profiles.transition_half_width(SETTLED_TOL * pot.min_well_separation());
    let trace = TraceData { bdata: bdata.clone(), r_scale, center, radius, profiles, wells: *pot.wells(), half_width };
    if !bdata.is_constant() {
        let needed = 2.0 * trace.transition_angle();
        let shortest = bdata.min_arc_angle();
        if shortest < needed {
            return Err(Error::ArcTooShort(format!(
                "shortest arc spans {shortest:.4} rad but transitions need {needed:.4} rad at R = {r_scale}"
            )));
        }
    }
    Ok(trace)
}

fn wrap_pi(a: f64) -> f64 {
    let x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x == -PI { PI } else { x }
}

impl TraceData {
    pub fn profiles(&self) -> &Arc<HeteroclinicSet> {
        &self.profiles
    }

    pub fn well(&self, l: usize) -> Point {
        self.wells[l]
    }

    /// Half the angular extent of one transition.
    pub fn transition_angle(&self) -> f64 {
        self.half_width / (self.r_scale * self.radius)
    }

    /// Nearest discontinuity and signed angular offset from it.
    fn nearest(&self, theta: f64) -> Option<(usize, f64)> {
        let d = self.bdata.discontinuities();
        d.iter()
            .enumerate()
            .map(|(m, a)| (m, wrap_pi(theta - a)))
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
    }

    pub fn eval(&self, theta: f64) -> Point {
        let Some((m, off)) = self.nearest(theta) else {
            return self.wells[self.bdata.labels()[0]];
        };
        let labels = self.bdata.labels();
        let k = labels.len();
        let (left, right) = (labels[(m + k - 1) % k], labels[m]);
        if left == right {
            return self.wells[left];
        }
        self.profiles.eval_midpoint(left, right, self.r_scale * self.radius * off)
    }

    pub fn eval_at(&self, x: &Point) -> Point {
        let d = x - self.center;
        self.eval(d.y.atan2(d.x))
    }

    /// `∫ (R W(h) + |∂_s h|² / (2R)) ds` around the circle, by the midpoint rule.
    pub fn boundary_energy(&self, pot: &Potential, samples: usize) -> f64 {
        let n = samples.max(16);
        let dth = 2.0 * PI / n as f64;
        let ds = dth * self.radius;
        let vals: Vec<Point> = (0..n).map(|i| self.eval(i as f64 * dth)).collect();
        let mut e = 0.0;
        for i in 0..n {
            let a = vals[i];
            let b = vals[(i + 1) % n];
            let mid = self.eval((i as f64 + 0.5) * dth);
            e += self.r_scale * pot.eval(&mid) * ds + (b - a).norm_squared() / (2.0 * self.r_scale * ds);
        }
        e
    }

    /// Arc length of each transition, measured where the trace is farther
    /// than `tol` from both adjacent wells.
    pub fn transition_widths(&self, tol: f64, samples: usize) -> Vec<f64> {
        let labels = self.bdata.labels();
        let k = labels.len();
        let ds = self.transition_angle() * 4.0 / samples as f64;
        self.bdata
            .discontinuities()
            .iter()
            .enumerate()
            .map(|(m, d)| {
                let (a, b) = (self.wells[labels[(m + k - 1) % k]], self.wells[labels[m]]);
                let count = (0..=samples)
                    .filter(|i| {
                        let th = d - 2.0 * self.transition_angle() + *i as f64 * ds;
                        let v = self.eval(th);
                        (v - a).norm() > tol && (v - b).norm() > tol
                    })
                    .count();
                count as f64 * ds * self.radius
            })
            .collect()
    }

    /// Writes the trace into the boundary ring of a field.
    pub fn apply(&self, field: &mut Field) {
        for k in 0..field.values.len() {
            if field.mask[k] == NodeKind::Boundary {
                field.values[k] = self.eval_at(&field.position(k));
            }
        }
    }

    pub fn ring_samples(&self, field: &Field) -> Vec<(usize, Point)> {
        (0..field.values.len())
            .filter(|k| field.mask[*k] == NodeKind::Boundary)
            .map(|k| (k, self.eval_at(&field.position(k))))
            .collect()
    }

    /// Same data read at another scale; the profiles are shared.
    pub fn with_scale(&self, r_scale: f64, center: Point, radius: f64) -> TraceData {
        TraceData { r_scale, center, radius, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::symmetric_product_well;
    use std::sync::OnceLock;

    fn set() -> Arc<HeteroclinicSet> {
        static SET: OnceLock<Arc<HeteroclinicSet>> = OnceLock::new();
        SET.get_or_init(|| Arc::new(HeteroclinicSet::with_defaults(&symmetric_product_well()).unwrap())).clone()
    }

    #[test]
    fn wells_on_arc_interiors() {
        let pot = symmetric_product_well();
        let b = BoundaryData::three_equal();
        let tr = build_trace_with(&b, &pot, set(), 32.0, Point::zeros(), 1.0).unwrap();
        for arc in b.arcs() {
            let mid = 0.5 * (arc.start + arc.end);
            assert_eq!(tr.eval(mid), pot.well(arc.label));
        }
    }

    #[test]
    fn boundary_energy_matches_costs() {
        let pot = symmetric_product_well();
        let s = set();
        let tr = build_trace_with(&BoundaryData::three_equal(), &pot, s.clone(), 32.0, Point::zeros(), 1.0).unwrap();
        let e = tr.boundary_energy(&pot, 1 << 16);
        let total: f64 = s.costs().iter().sum();
        assert!((e - total).abs() / total < 0.01, "{e} vs {total}");
    }

    #[test]
    fn constant_data_has_zero_energy() {
        let pot = symmetric_product_well();
        let tr = build_trace_with(&BoundaryData::constant(1).unwrap(), &pot, set(), 8.0, Point::zeros(), 1.0).unwrap();
        assert_eq!(tr.eval(0.4), pot.well(1));
        assert_eq!(tr.boundary_energy(&pot, 1024), 0.0);
    }

    #[test]
    fn doubling_scale_halves_widths() {
        let pot = symmetric_product_well();
        let b = BoundaryData::three_equal();
        let w32 = build_trace_with(&b, &pot, set(), 32.0, Point::zeros(), 1.0).unwrap().transition_widths(1e-3, 4000);
        let w64 = build_trace_with(&b, &pot, set(), 64.0, Point::zeros(), 1.0).unwrap().transition_widths(1e-3, 4000);
        for (a, b) in w32.iter().zip(&w64) {
            assert!((a / b - 2.0).abs() < 0.02, "{a} {b}");
        }
    }

    #[test]
    fn short_arcs_are_rejected() {
        let pot = symmetric_product_well();
        let b = BoundaryData::new(vec![0.0, 0.05, 3.0], vec![0, 1, 2]).unwrap();
        assert!(matches!(build_trace_with(&b, &pot, set(), 4.0, Point::zeros(), 1.0), Err(Error::ArcTooShort(_))));
    }
}
