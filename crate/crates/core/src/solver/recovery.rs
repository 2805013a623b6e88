//! Explicit competitor built from a minimal partition: heteroclinic profiles
//! in thin rectangles along the interfaces, radial interpolation in small
//! balls around the vertices, and a thin annulus matching the boundary trace.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::network::PartitionNetwork;
use crate::potential::{Point, Potential};

use super::grid::{Bc, Domain, Field, GridSpec};
use super::trace::TraceData;

/// Separation constant in `h < C_SEP · η · λ²`.
pub const C_SEP: f64 = 2.0;
/// Constant in the rectangle height `h = HEIGHT_CONSTANT · R^(−11/12)`.
pub const HEIGHT_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Radius of the vertex balls.
    pub eta: f64,
    /// Threshold on boundary arc length separating short from long arcs.
    pub lambda: f64,
    /// Width of the boundary annulus.
    pub rho: f64,
    /// Rectangle height.
    pub h: f64,
}

impl Schedule {
    pub fn for_scale(r_scale: f64) -> Self {
        Schedule {
            eta: r_scale.powf(-2.0 / 3.0),
            lambda: r_scale.powf(-1.0 / 8.0),
            rho: r_scale.powf(-8.0 / 9.0),
            h: HEIGHT_CONSTANT * r_scale.powf(-11.0 / 12.0),
        }
    }

    /// Checks the scale relations and the geometry of `net` (scaled to the
    /// inner disc).
    pub fn validate(&self, r_scale: f64, net: &PartitionNetwork) -> Result<()> {
        let s = self;
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if ![s.eta, s.lambda, s.rho, s.h].iter().all(|v| *v > 0.0 && v.is_finite()) {
            return bad(format!("all parameters must be positive: {s:?}"));
        }
        if s.rho >= 0.5 || s.eta >= 0.25 {
            return bad(format!("rho = {} and eta = {} are too large for the unit disc", s.rho, s.eta));
        }
        if 2.0 * s.h > s.eta {
            return bad(format!("rectangle height {} exceeds eta / 2 = {}", s.h, s.eta / 2.0));
        }
        if s.h >= C_SEP * s.eta * s.lambda * s.lambda {
            return bad(format!("rectangle height {} is not below {} eta lambda^2 = {}", s.h, C_SEP, C_SEP * s.eta * s.lambda * s.lambda));
        }
        if 2.0 / r_scale > s.eta {
            return bad(format!("boundary transitions (width {}) do not fit in the vertex balls (eta = {})", 2.0 / r_scale, s.eta));
        }
        let verts = vertices(&net.scaled(1.0 - s.rho));
        for (a, (p, _)) in verts.iter().enumerate() {
            for (q, _) in &verts[a + 1..] {
                if (p - q).norm() <= 2.0 * s.eta {
                    return bad(format!("vertex balls of radius {} overlap", s.eta));
                }
            }
        }
        // rectangles of two legs meeting at a vertex must separate outside the ball
        let min_gap = 2.0 * (s.h / s.eta).asin();
        for j in &net.junctions {
            let mut dirs: Vec<f64> = net
                .segments
                .iter()
                .filter_map(|seg| {
                    if (seg.a - j).norm() < 1e-9 {
                        Some(seg.b - seg.a)
                    } else if (seg.b - j).norm() < 1e-9 {
                        Some(seg.a - seg.b)
                    } else {
                        None
                    }
                })
                .map(|d| d.y.atan2(d.x).rem_euclid(2.0 * PI))
                .collect();
            dirs.sort_by(f64::total_cmp);
            for i in 0..dirs.len() {
                let next = if i + 1 < dirs.len() { dirs[i + 1] } else { dirs[0] + 2.0 * PI };
                if next - dirs[i] <= min_gap {
                    return bad(format!("junction angle {} too small for h / eta = {}", next - dirs[i], s.h / s.eta));
                }
            }
        }
        Ok(())
    }
}

/// Junctions and segment ends on the boundary circle, each with the label
/// imposed at its centre.
fn vertices(net: &PartitionNetwork) -> Vec<(Point, usize)> {
    let mut out: Vec<(Point, usize)> = Vec::new();
    let mut push = |p: Point, l: usize| {
        if !out.iter().any(|(q, _)| (p - q).norm() < 1e-9) {
            out.push((p, l));
        }
    };
    for j in &net.junctions {
        let l = net.segments.iter().find(|s| (s.a - j).norm() < 1e-9 || (s.b - j).norm() < 1e-9).map(|s| s.labels.0);
        push(*j, l.unwrap_or(0));
    }
    for s in &net.segments {
        for p in [s.a, s.b] {
            if !net.junctions.iter().any(|j| (p - j).norm() < 1e-9) {
                push(p, s.labels.0);
            }
        }
    }
    out
}

struct Rect {
    a: Point,
    dir: Point,
    normal: Point,
    len: f64,
    labels: (usize, usize),
}

struct Chamber {
    label: usize,
    /// Half-planes `(point, inward normal)`.
    sides: Vec<(Point, Point)>,
}

/// Faces of a partition as intersections of half-planes, with their interfaces.
struct Chambers {
    rects: Vec<Rect>,
    chambers: Vec<Chamber>,
    constant: Option<usize>,
}

impl Chambers {
    fn new(net: &PartitionNetwork) -> Self {
        let rects = net
            .segments
            .iter()
            .filter(|s| s.length() > 0.0)
            .map(|s| {
                let dir = (s.b - s.a) / s.length();
                Rect { a: s.a, dir, normal: Point::new(-dir.y, dir.x), len: s.length(), labels: s.labels }
            })
            .collect::<Vec<_>>();
        let chambers = net
            .regions
            .iter()
            .map(|reg| {
                let centroid = reg.polygon.iter().sum::<Point>() / reg.polygon.len() as f64;
                let on_poly = |p: &Point| reg.polygon.iter().any(|q| (p - q).norm() < 1e-9);
                let sides = rects
                    .iter()
                    .filter(|r| on_poly(&r.a) && on_poly(&(r.a + r.dir * r.len)))
                    .map(|r| {
                        let n = if r.normal.dot(&(centroid - r.a)) >= 0.0 { r.normal } else { -r.normal };
                        (r.a, n)
                    })
                    .collect();
                Chamber { label: reg.label, sides }
            })
            .collect();
        Chambers { rects, chambers, constant: net.constant_label }
    }

    fn label(&self, y: &Point) -> usize {
        if let Some(l) = self.constant {
            return l;
        }
        let mut best = (f64::NEG_INFINITY, 0);
        for c in &self.chambers {
            // smallest signed distance to the chamber's sides; ≥ 0 inside
            let depth = c.sides.iter().map(|(a, n)| n.dot(&(y - a))).fold(f64::INFINITY, f64::min);
            if depth > best.0 {
                best = (depth, c.label);
            }
        }
        best.1
    }

    /// Nearest interface of chamber `i` and the label across it. With
    /// `clip`, only points whose projection falls on the segment count and
    /// the distance is perpendicular; otherwise it is the distance to the
    /// segment.
    fn nearest_interface(&self, y: &Point, i: usize, clip: bool) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for r in &self.rects {
            let j = if r.labels.0 == i {
                r.labels.1
            } else if r.labels.1 == i {
                r.labels.0
            } else {
                continue;
            };
            let d = y - r.a;
            let along = d.dot(&r.dir);
            let s = if (0.0..=r.len).contains(&along) {
                d.dot(&r.normal).abs()
            } else if clip {
                continue;
            } else {
                (d - r.dir * along.clamp(0.0, r.len)).norm()
            };
            if best.is_none_or(|b| s < b.0) {
                best = Some((s, j));
            }
        }
        best
    }
}

struct Builder<'a> {
    trace: &'a TraceData,
    pot: &'a Potential,
    r_scale: f64,
    sch: Schedule,
    inner: f64,
    geometry: Chambers,
    balls: Vec<(Point, usize)>,
}

impl<'a> Builder<'a> {
    fn new(net: &PartitionNetwork, trace: &'a TraceData, pot: &'a Potential, sch: Schedule) -> Self {
        let inner = 1.0 - sch.rho;
        let net = net.scaled(inner);
        Builder { trace, pot, r_scale: trace.r_scale, sch, inner, geometry: Chambers::new(&net), balls: vertices(&net) }
    }

    fn well(&self, l: usize) -> Point {
        self.pot.well(l)
    }

    fn chamber_value(&self, y: &Point) -> Point {
        let i = self.geometry.label(y);
        let best = self.geometry.nearest_interface(y, i, true).filter(|b| b.0 <= self.sch.h);
        let Some((s, j)) = best else { return self.well(i) };
        let h = self.sch.h;
        let prof = self.trace.profiles();
        if s <= 0.5 * h {
            prof.eval_midpoint(i, j, -self.r_scale * s)
        } else {
            let edge = prof.eval_midpoint(i, j, -self.r_scale * 0.5 * h);
            let f = (s - 0.5 * h) / (0.5 * h);
            edge * (1.0 - f) + self.well(i) * f
        }
    }

    /// Values on the inner circle: wells, with linear ramps of arc length
    /// about `2/R` across each discontinuity.
    fn inner_value(&self, theta: f64) -> Point {
        let b = &self.trace.bdata;
        let w = 1.0 / (self.r_scale * self.inner);
        let labels = b.labels();
        let k = labels.len();
        for (m, d) in b.discontinuities().iter().enumerate() {
            let off = (theta - d + PI).rem_euclid(2.0 * PI) - PI;
            if off.abs() < w {
                let (l, r) = (self.well(labels[(m + k - 1) % k]), self.well(labels[m]));
                let f = (off + w) / (2.0 * w);
                return l * (1.0 - f) + r * f;
            }
        }
        self.well(b.label_at(theta))
    }

    fn value_without_balls(&self, y: &Point) -> Point {
        let r = y.norm();
        if r >= 1.0 {
            return self.trace.eval(y.y.atan2(y.x));
        }
        if r >= self.inner {
            let th = y.y.atan2(y.x);
            let f = (r - self.inner) / self.sch.rho;
            return self.inner_value(th) * (1.0 - f) + self.trace.eval(th) * f;
        }
        self.chamber_value(y)
    }

    fn value(&self, y: &Point) -> Point {
        let eta = self.sch.eta;
        for (v, l) in &self.balls {
            let d = y - v;
            let r = d.norm();
            if r < eta {
                let centre = self.well(*l);
                if r <= 0.5 * eta {
                    return centre;
                }
                let rim = self.value_without_balls(&(v + d * (eta / r)));
                let f = (r - 0.5 * eta) / (0.5 * eta);
                return centre * (1.0 - f) + rim * f;
            }
        }
        self.value_without_balls(y)
    }
}

/// Recovery field on the unit disc for the partition `u0` and the trace at
/// scale `r_scale`, sampled on `grid` with the trace on the Dirichlet ring.
pub fn recovery_field(
    u0: &PartitionNetwork,
    trace: &TraceData,
    pot: &Potential,
    r_scale: f64,
    schedule: Schedule,
    grid: GridSpec,
) -> Result<Field> {
    if (trace.r_scale - r_scale).abs() > 1e-12 * r_scale || trace.radius != 1.0 || trace.center != Point::zeros() {
        return Err(Error::InvalidParams(format!(
            "trace must live on the unit circle at scale {r_scale}, got scale {} radius {}",
            trace.r_scale, trace.radius
        )));
    }
    schedule.validate(r_scale, u0)?;
    let b = Builder::new(u0, trace, pot, schedule);
    let stretch = 1.0 + schedule.eta;
    let mut field = Field::from_fn(grid, Domain::unit_disc(), Bc::Dirichlet, |x| b.value(&(x * stretch)));
    trace.apply(&mut field);
    Ok(field)
}

/// Heteroclinic profiles across the straight interfaces of `net`, laid out
/// on the disc of the trace (`x = center + radius · y` for network points
/// `y`), with the trace on the Dirichlet ring. No vertex correction is made,
/// so the field jumps slightly along chamber bisectors near junctions.
pub fn profile_field(net: &PartitionNetwork, trace: &TraceData, grid: GridSpec) -> Field {
    let geometry = Chambers::new(net);
    let stretch = trace.r_scale * trace.radius;
    let prof = trace.profiles();
    let domain = Domain::Disc { center: trace.center, radius: trace.radius };
    let mut field = Field::from_fn(grid, domain, Bc::Dirichlet, |x| {
        let y = (x - trace.center) / trace.radius;
        let i = geometry.label(&y);
        match geometry.nearest_interface(&y, i, false) {
            Some((s, j)) => prof.eval_midpoint(i, j, -stretch * s),
            None => trace.well(i),
        }
    });
    trace.apply(&mut field);
    field
}

#[cfg(test)]
mod tests {
    use super::super::energy::energy;
    use super::super::trace::build_trace_with;
    use super::*;
    use crate::geodesics::HeteroclinicSet;
    use crate::junction::surface_tensions;
    use crate::partitions::{solve_problem1, BoundaryData};
    use crate::potential::symmetric_product_well;
    use std::sync::{Arc, OnceLock};

    fn set() -> Arc<HeteroclinicSet> {
        static SET: OnceLock<Arc<HeteroclinicSet>> = OnceLock::new();
        SET.get_or_init(|| Arc::new(HeteroclinicSet::with_defaults(&symmetric_product_well()).unwrap())).clone()
    }

    #[test]
    fn default_schedule_is_valid_for_moderate_scales() {
        let b = BoundaryData::three_equal();
        let c = set().costs();
        let t = surface_tensions(c[0], c[1], c[2]).unwrap();
        let net = solve_problem1(&b, &t).unwrap();
        for r in [32.0, 64.0, 128.0, 1024.0] {
            Schedule::for_scale(r).validate(r, &net).unwrap();
        }
        let mut bad = Schedule::for_scale(32.0);
        bad.h = bad.eta;
        assert!(matches!(bad.validate(32.0, &net), Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn recovery_energy_is_close_to_partition_cost() {
        let pot = symmetric_product_well();
        let s = set();
        let c = s.costs();
        let t = surface_tensions(c[0], c[1], c[2]).unwrap();
        let b = BoundaryData::three_equal();
        let net = solve_problem1(&b, &t).unwrap();
        let r = 32.0;
        let tr = build_trace_with(&b, &pot, s, r, Point::zeros(), 1.0).unwrap();
        let grid = GridSpec::covering_disc(Point::zeros(), 1.0, 0.25 / r).unwrap();
        let f = recovery_field(&net, &tr, &pot, r, Schedule::for_scale(r), grid).unwrap();
        let e = energy(&f, &pot, r);
        assert!(e > net.cost && e < 1.5 * net.cost, "{e} vs {}", net.cost);
        // continuity: neighbouring nodes never jump by more than a profile step
        let max_jump = (0..f.values.len() - 1)
            .filter(|k| f.is_present(*k) && f.is_present(k + 1))
            .map(|k| (f.values[k] - f.values[k + 1]).norm())
            .fold(0.0, f64::max);
        assert!(max_jump < 0.5, "{max_jump}");
    }
}
