//! Surface tensions, triple-junction opening angles and junction maps.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::PartitionNetwork;
use crate::numerics::wrap_angle;
use crate::potential::{Point, Potential};

/// Per-phase weights `t_ℓ` with `t_i + t_j = c_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceTensions {
    pub t: [f64; 3],
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
}

impl SurfaceTensions {
    /// Tensions given directly; costs are reconstructed.
    pub fn from_tensions(t: [f64; 3]) -> Result<Self> {
        if t.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::DegenerateTension(format!("tensions must be positive, got {t:?}")));
        }
        Ok(SurfaceTensions { t, c12: t[0] + t[1], c13: t[0] + t[2], c23: t[1] + t[2] })
    }

    pub fn equal(t: f64) -> Result<Self> {
        Self::from_tensions([t, t, t])
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.c12,
            (0, 2) => self.c13,
            (1, 2) => self.c23,
            _ => 0.0,
        }
    }

    pub fn costs(&self) -> [f64; 3] {
        [self.c12, self.c13, self.c23]
    }

    pub fn angles(&self) -> Result<[f64; 3]> {
        junction_angles(self.c12, self.c13, self.c23)
    }
}

pub fn surface_tensions(c12: f64, c13: f64, c23: f64) -> Result<SurfaceTensions> {
    if !(c12 > 0.0 && c13 > 0.0 && c23 > 0.0) {
        return Err(Error::DegenerateTension(format!("costs must be positive, got ({c12}, {c13}, {c23})")));
    }
    let t = [0.5 * (c12 + c13 - c23), 0.5 * (c12 + c23 - c13), 0.5 * (c13 + c23 - c12)];
    if t.iter().any(|v| *v <= 0.0) {
        return Err(Error::DegenerateTension(format!("t = {t:?} from costs ({c12}, {c13}, {c23})")));
    }
    Ok(SurfaceTensions { t, c12, c13, c23 })
}

fn sine_residual(a: [f64; 3], c: [f64; 3]) -> [f64; 2] {
    // sin α1 / c23 = sin α2 / c13 = sin α3 / c12, cross-multiplied
    let [c12, c13, c23] = c;
    [a[0].sin() * c13 - a[1].sin() * c23, a[1].sin() * c12 - a[2].sin() * c13]
}

/// Opening angles `(α1, α2, α3)` of the minimal triple junction, summing to `2π`.
///
/// `α_ℓ = π − θ_ℓ` where `θ_ℓ` is the angle opposite the side of length
/// `c23, c13, c12` in the triangle built from the costs; a few Newton steps on
/// the sine system remove rounding.
pub fn junction_angles(c12: f64, c13: f64, c23: f64) -> Result<[f64; 3]> {
    if !(c12 > 0.0 && c13 > 0.0 && c23 > 0.0) {
        return Err(Error::TriangleViolation(format!("costs must be positive, got ({c12}, {c13}, {c23})")));
    }
    if c12 >= c13 + c23 || c13 >= c12 + c23 || c23 >= c12 + c13 {
        return Err(Error::TriangleViolation(format!("({c12}, {c13}, {c23})")));
    }
    let side = [c23, c13, c12];
    let theta = |l: usize| {
        let a = side[l];
        let b = side[(l + 1) % 3];
        let c = side[(l + 2) % 3];
        ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
    };
    let mut alpha = [PI - theta(0), PI - theta(1), PI - theta(2)];
    alpha[2] = TAU - alpha[0] - alpha[1];

    let costs = [c12, c13, c23];
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    for _ in 0..4 {
        let r = sine_residual(alpha, costs);
        if norm(r) == 0.0 {
            break;
        }
        // unknowns α1, α2; α3 = 2π − α1 − α2
        let j11 = alpha[0].cos() * c13;
        let j12 = -alpha[1].cos() * c23;
        let j21 = alpha[2].cos() * c13;
        let j22 = alpha[1].cos() * c12 + alpha[2].cos() * c13;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            break;
        }
        let d1 = -(r[0] * j22 - j12 * r[1]) / det;
        let d2 = -(j11 * r[1] - j21 * r[0]) / det;
        let trial = [alpha[0] + d1, alpha[1] + d2, TAU - alpha[0] - d1 - alpha[1] - d2];
        if norm(sine_residual(trial, costs)) < norm(r) {
            alpha = trial;
        } else {
            break;
        }
    }
    Ok(alpha)
}

/// Max relative deviation from the sine law `sin α1/c23 = sin α2/c13 = sin α3/c12`.
pub fn sine_law_residual(alpha: [f64; 3], c12: f64, c13: f64, c23: f64) -> f64 {
    let r = [alpha[0].sin() / c23, alpha[1].sin() / c13, alpha[2].sin() / c12];
    let mean = (r[0] + r[1] + r[2]) / 3.0;
    r.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs().max(1e-300)
}

/// Piecewise-constant cone with three sectors around `center`.
///
/// Sector `k` (counterclockwise, starting at `rotation`) carries label
/// `assignment[k]` and opens by `angles[assignment[k]]`. Each sector is the
/// half-open angular interval `[start, end)`; the center takes sector 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionMap {
    pub center: Point,
    pub rotation: f64,
    pub angles: [f64; 3],
    pub assignment: [usize; 3],
}

pub const ASSIGNMENTS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn make_junction_map(angles: [f64; 3], rotation: f64, assignment: [usize; 3]) -> JunctionMap {
    JunctionMap { center: Point::zeros(), rotation, angles, assignment }
}

impl JunctionMap {
    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    /// Directions of the three rays, starting with the one at `rotation`.
    pub fn ray_angles(&self) -> [f64; 3] {
        let a0 = self.angles[self.assignment[0]];
        let a1 = self.angles[self.assignment[1]];
        [wrap_angle(self.rotation), wrap_angle(self.rotation + a0), wrap_angle(self.rotation + a0 + a1)]
    }

    pub fn label_at(&self, x: &Point) -> usize {
        let d = x - self.center;
        if d.x == 0.0 && d.y == 0.0 {
            return self.assignment[0];
        }
        let phi = wrap_angle(d.y.atan2(d.x) - self.rotation);
        let a0 = self.angles[self.assignment[0]];
        let a1 = self.angles[self.assignment[1]];
        if phi < a0 {
            self.assignment[0]
        } else if phi < a0 + a1 {
            self.assignment[1]
        } else {
            self.assignment[2]
        }
    }

    pub fn eval(&self, pot: &Potential, x: &Point) -> Point {
        pot.well(self.label_at(x))
    }

    pub fn to_text(&self) -> String {
        let cfg = JunctionMapText {
            center: [self.center.x, self.center.y],
            rotation: self.rotation,
            angles: self.angles,
            assignment: self.assignment.map(|l| l + 1),
        };
        format!("[junction]\n{}", toml::to_string(&cfg).expect("plain data serializes"))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wrapper {
            junction: JunctionMapText,
        }
        let w: Wrapper = toml::from_str(text).map_err(|e| Error::Parse {
            offset: e.span().map(|s| s.start).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let c = w.junction;
        let mut seen = [false; 3];
        for l in c.assignment {
            if !(1..=3).contains(&l) || seen[l - 1] {
                return Err(Error::InconsistentLabeling(format!("assignment {:?} is not a permutation", c.assignment)));
            }
            seen[l - 1] = true;
        }
        Ok(JunctionMap {
            center: Point::new(c.center[0], c.center[1]),
            rotation: c.rotation,
            angles: c.angles,
            assignment: c.assignment.map(|l| l - 1),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JunctionMapText {
    center: [f64; 2],
    rotation: f64,
    angles: [f64; 3],
    assignment: [usize; 3],
}

/// Weighted perimeter `Σ c_ij·|interface ij| + Σ t_ℓ·|colored arc ℓ|` of a
/// labeled network inside the disc.
pub fn perimeter_energy(network: &PartitionNetwork, tensions: &SurfaceTensions) -> Result<f64> {
    let mut e = 0.0;
    for s in &network.segments {
        let (i, j) = s.labels;
        if i > 2 || j > 2 || i == j {
            return Err(Error::InconsistentLabeling(format!("segment separates labels {} and {}", i + 1, j + 1)));
        }
        e += tensions.cost(i, j) * s.length();
    }
    for a in &network.arcs {
        if a.label > 2 {
            return Err(Error::InconsistentLabeling(format!("arc label {}", a.label + 1)));
        }
        e += tensions.t[a.label] * a.length();
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ColoredArc, Segment};

    #[test]
    fn tensions_from_345() {
        let s = surface_tensions(3.0, 4.0, 5.0).unwrap();
        assert_eq!(s.t, [1.0, 2.0, 3.0]);
        assert_eq!(s.t[0] + s.t[1], 3.0);
    }

    #[test]
    fn degenerate_tension_rejected() {
        assert!(matches!(surface_tensions(5.0, 2.0, 3.0), Err(Error::DegenerateTension(_))));
    }

    #[test]
    fn equal_costs_give_equal_angles() {
        let a = junction_angles(1.3, 1.3, 1.3).unwrap();
        for v in a {
            assert!((v - TAU / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn right_triangle_angles() {
        let a = junction_angles(5.0, 4.0, 3.0).unwrap();
        let deg = a.map(f64::to_degrees);
        assert!((deg[0] - 143.130_102_354_155_98).abs() < 1e-9);
        assert!((deg[1] - 126.869_897_645_844_02).abs() < 1e-9);
        assert!((deg[2] - 90.0).abs() < 1e-9);
        assert!(sine_law_residual(a, 5.0, 4.0, 3.0) < 1e-12);
    }

    #[test]
    fn near_degenerate_angle_vanishes() {
        let a = junction_angles(1.999_999, 1.0, 1.0).unwrap();
        assert!(a[2] < 0.01);
        assert!(matches!(junction_angles(2.0, 1.0, 1.0), Err(Error::TriangleViolation(_))));
    }

    #[test]
    fn map_sectors() {
        let ang = junction_angles(5.0, 4.0, 3.0).unwrap();
        let m = make_junction_map(ang, 0.0, [0, 1, 2]);
        assert_eq!(m.label_at(&Point::new(1.0, 1e-9)), 0);
        let mid2 = ang[0] + 0.5 * ang[1];
        assert_eq!(m.label_at(&Point::new(mid2.cos(), mid2.sin())), 1);
        assert_eq!(m.label_at(&Point::new(1.0, -1e-9)), 2);
        assert_eq!(m.label_at(&Point::zeros()), 0);
        let r = make_junction_map(ang, PI, [0, 1, 2]);
        for k in 0..50 {
            let t = 0.37 + k as f64 * 0.123;
            let p = Point::new(t.cos(), t.sin());
            assert_eq!(r.label_at(&(-p)), m.label_at(&p));
        }
    }

    #[test]
    fn map_text_round_trip() {
        let m = make_junction_map([2.0, 2.1, TAU - 4.1], 0.3, [2, 0, 1]).with_center(Point::new(0.1, -0.2));
        assert_eq!(JunctionMap::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn perimeter_of_star_and_arcs() {
        let ts = SurfaceTensions::equal(0.5).unwrap();
        let mut net = PartitionNetwork::default();
        for k in 0..3 {
            let a = PI / 2.0 + k as f64 * TAU / 3.0;
            net.segments.push(Segment { a: Point::zeros(), b: Point::new(a.cos(), a.sin()), labels: (k, (k + 1) % 3) });
        }
        assert!((perimeter_energy(&net, &ts).unwrap() - 3.0).abs() < 1e-12);
        net.arcs.push(ColoredArc { center: Point::zeros(), radius: 0.1, start: 0.0, sweep: PI, label: 1 });
        assert!((perimeter_energy(&net, &ts).unwrap() - 3.0 - 0.05 * PI).abs() < 1e-12);
        net.segments[0].labels = (1, 1);
        assert!(perimeter_energy(&net, &ts).is_err());
    }
}
