//! Geometric description of labeled partitions of the unit disc.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::potential::Point;

/// Straight interface between two labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    /// Labels on the two sides (left of `a → b` first).
    pub labels: (usize, usize),
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Circular arc separating a colored set from the gray region.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredArc {
    pub center: Point,
    pub radius: f64,
    /// Angle of the first endpoint seen from the center.
    pub start: f64,
    /// Signed angular extent.
    pub sweep: f64,
    pub label: usize,
}

impl ColoredArc {
    pub fn length(&self) -> f64 {
        self.radius * self.sweep.abs()
    }

    pub fn curvature(&self) -> f64 {
        1.0 / self.radius
    }

    pub fn point(&self, s: f64) -> Point {
        let a = self.start + s * self.sweep;
        self.center + Point::new(a.cos(), a.sin()) * self.radius
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.point(0.0), self.point(1.0))
    }
}

/// Face of a partition, as a closed polygon (boundary arcs sampled).
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub label: usize,
    pub polygon: Vec<Point>,
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.polygon.len();
        let mut inside = false;
        for k in 0..n {
            let a = self.polygon[k];
            let b = self.polygon[(k + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn area(&self) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|k| {
                let a = self.polygon[k];
                let b = self.polygon[(k + 1) % n];
                a.x * b.y - a.y * b.x
            })
            .sum::<f64>()
            * 0.5
    }

    /// Largest negative turn (for a counterclockwise polygon); zero for convex faces.
    pub fn convexity_defect(&self) -> f64 {
        let n = self.polygon.len();
        let scale = self.polygon.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let a = self.polygon[k];
            let b = self.polygon[(k + 1) % n];
            let c = self.polygon[(k + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            if e1.norm() < 1e-14 * scale || e2.norm() < 1e-14 * scale {
                continue;
            }
            let cross = (e1.x * e2.y - e1.y * e2.x) / (e1.norm() * e2.norm());
            worst = worst.max(-cross);
        }
        worst
    }
}

/// Labeled partition of the unit disc.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartitionNetwork {
    pub junctions: Vec<Point>,
    pub segments: Vec<Segment>,
    /// Arcs bounding gray regions (empty for sharp partitions).
    pub arcs: Vec<ColoredArc>,
    /// Discontinuity points on the unit circle.
    pub boundary_points: Vec<Point>,
    pub regions: Vec<Region>,
    pub cost: f64,
    /// Single label for data without discontinuities.
    pub constant_label: Option<usize>,
}

impl PartitionNetwork {
    /// Label of the face containing `p`, if any (gray points and points
    /// outside the disc return `None`).
    pub fn label_at(&self, p: &Point) -> Option<usize> {
        if let Some(l) = self.constant_label {
            return if p.norm() <= 1.0 { Some(l) } else { None };
        }
        self.regions.iter().find(|r| r.contains(p)).map(|r| r.label)
    }

    /// Copy with every coordinate multiplied by `factor` (cost is left as is).
    pub fn scaled(&self, factor: f64) -> PartitionNetwork {
        let mut out = self.clone();
        for j in &mut out.junctions {
            *j *= factor;
        }
        for s in &mut out.segments {
            s.a *= factor;
            s.b *= factor;
        }
        for a in &mut out.arcs {
            a.center *= factor;
            a.radius *= factor;
        }
        for b in &mut out.boundary_points {
            *b *= factor;
        }
        for r in &mut out.regions {
            for p in &mut r.polygon {
                *p *= factor;
            }
        }
        out
    }

    pub fn max_convexity_defect(&self) -> f64 {
        self.regions.iter().map(Region::convexity_defect).fold(0.0, f64::max)
    }

    /// Plain-text dump: vertices, segments, arcs and labels.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "cost {}", self.cost).unwrap();
        for j in &self.junctions {
            writeln!(s, "junction {} {}", j.x, j.y).unwrap();
        }
        for b in &self.boundary_points {
            writeln!(s, "boundary {} {}", b.x, b.y).unwrap();
        }
        for g in &self.segments {
            writeln!(s, "segment {} {} {} {} {} {}", g.a.x, g.a.y, g.b.x, g.b.y, g.labels.0 + 1, g.labels.1 + 1).unwrap();
        }
        for a in &self.arcs {
            writeln!(s, "arc {} {} {} {} {} {}", a.center.x, a.center.y, a.radius, a.start, a.sweep, a.label + 1).unwrap();
        }
        for r in &self.regions {
            writeln!(s, "region {} {}", r.label + 1, r.polygon.len()).unwrap();
        }
        s
    }

    /// One SVG path per interface; arcs use the elliptical-arc command.
    pub fn to_svg_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.segments {
            out.push(format!("M {} {} L {} {}", g.a.x, g.a.y, g.b.x, g.b.y));
        }
        for a in &self.arcs {
            let (p, q) = a.endpoints();
            let large = if a.sweep.abs() > std::f64::consts::PI { 1 } else { 0 };
            let sweep = if a.sweep > 0.0 { 1 } else { 0 };
            out.push(format!("M {} {} A {} {} 0 {} {} {} {}", p.x, p.y, a.radius, a.radius, large, sweep, q.x, q.y));
        }
        out
    }
}

/// Points along the unit circle from angle `a` to `b` counterclockwise
/// (both included), roughly `per_turn` samples per full turn.
pub fn circle_samples(a: f64, b: f64, per_turn: usize) -> Vec<Point> {
    let mut span = b - a;
    while span <= 0.0 {
        span += TAU;
    }
    let n = ((span / TAU) * per_turn as f64).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            let t = a + span * i as f64 / n as f64;
            Point::new(t.cos(), t.sin())
        })
        .collect()
}
