//! Minimal weighted-perimeter partitions of the unit disc with prescribed
//! boundary labels, their wetted relaxations, and a pixel oracle.

mod maxflow;
mod oracle;
mod wetting;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::segments_intersect;
use crate::junction::{junction_angles, perimeter_energy, SurfaceTensions};
use crate::network::{circle_samples, PartitionNetwork, Region, Segment};
use crate::numerics::{nelder_mead_2d, wrap_angle, NelderMeadOptions};
use crate::potential::Point;

pub use maxflow::MaxFlow;
pub use oracle::{multiway_cut_oracle, multiway_cut_oracle_with, Neighborhood, OracleResult};
pub use wetting::{compare_partitions, solve_problem2, wetting_area, wetting_gap, ComparisonRow, ComparisonTable, WettedNetwork};

pub const DEFAULT_MAX_K: usize = 8;
/// Largest number of discontinuities the exact Problem-1 enumeration handles.
pub const MAX_SOLVED_K: usize = 4;

/// Samples per full turn used when boundary arcs are turned into polygons.
const ARC_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub start: f64,
    pub end: f64,
    pub label: usize,
}

/// Piecewise-constant labeling of the unit circle. Arc `m` runs
/// counterclockwise from discontinuity `m` to discontinuity `m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    discontinuities: Vec<f64>,
    labels: Vec<usize>,
    max_k: usize,
}

impl BoundaryData {
    pub fn new(discontinuities: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        Self::with_max_k(discontinuities, labels, DEFAULT_MAX_K)
    }

    pub fn with_max_k(discontinuities: Vec<f64>, labels: Vec<usize>, max_k: usize) -> Result<Self> {
        let k = discontinuities.len();
        if labels.len() != k {
            return Err(Error::InvalidBoundaryData(format!("{k} discontinuities but {} labels", labels.len())));
        }
        if k == 1 {
            return Err(Error::InvalidBoundaryData("a single discontinuity cannot separate two labels".into()));
        }
        if k > max_k {
            return Err(Error::UnsupportedTopology(format!("{k} discontinuities exceed the maximum {max_k}")));
        }
        if k == 0 {
            return Err(Error::InvalidBoundaryData("use BoundaryData::constant for a single label".into()));
        }
        let mut pairs: Vec<(f64, usize)> = discontinuities.iter().map(|a| wrap_angle(*a)).zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for m in 0..k {
            if pairs[m].1 > 2 {
                return Err(Error::InvalidBoundaryData(format!("label {} out of range", pairs[m].1 + 1)));
            }
            let next = (m + 1) % k;
            if pairs[m].1 == pairs[next].1 {
                return Err(Error::InvalidBoundaryData("adjacent arcs carry the same label".into()));
            }
            if next != 0 && pairs[next].0 - pairs[m].0 < 1e-12 {
                return Err(Error::InvalidBoundaryData("coincident discontinuities".into()));
            }
        }
        Ok(BoundaryData { discontinuities: pairs.iter().map(|p| p.0).collect(), labels: pairs.iter().map(|p| p.1).collect(), max_k })
    }

    pub fn constant(label: usize) -> Result<Self> {
        if label > 2 {
            return Err(Error::InvalidBoundaryData(format!("label {} out of range", label + 1)));
        }
        Ok(BoundaryData { discontinuities: Vec::new(), labels: vec![label], max_k: DEFAULT_MAX_K })
    }

    /// Three arcs of equal length with discontinuities at 90°, 210° and 330°;
    /// labels 1, 2, 3 counterclockwise from 90°.
    pub fn three_equal() -> Self {
        let d = [90.0f64, 210.0, 330.0].map(f64::to_radians).to_vec();
        Self::new(d, vec![0, 1, 2]).expect("valid data")
    }

    /// Label `j` on the arc `(θ, 2π − θ)` through angle `π`, label `i` on the
    /// arc through angle 0.
    pub fn two_arcs(i: usize, j: usize, theta: f64) -> Result<Self> {
        Self::new(vec![theta, TAU - theta], vec![j, i])
    }

    pub fn k(&self) -> usize {
        self.discontinuities.len()
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn discontinuities(&self) -> &[f64] {
        &self.discontinuities
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_constant(&self) -> bool {
        self.discontinuities.is_empty()
    }

    pub fn arcs(&self) -> Vec<BoundaryArc> {
        let k = self.k();
        if k == 0 {
            return vec![BoundaryArc { start: 0.0, end: TAU, label: self.labels[0] }];
        }
        (0..k)
            .map(|m| {
                let start = self.discontinuities[m];
                let mut end = self.discontinuities[(m + 1) % k];
                if end <= start {
                    end += TAU;
                }
                BoundaryArc { start, end, label: self.labels[m] }
            })
            .collect()
    }

    pub fn label_at(&self, angle: f64) -> usize {
        let k = self.k();
        if k == 0 {
            return self.labels[0];
        }
        let a = wrap_angle(angle);
        let idx = self.discontinuities.partition_point(|d| *d <= a);
        if idx == 0 {
            self.labels[k - 1]
        } else {
            self.labels[idx - 1]
        }
    }

    pub fn points(&self) -> Vec<Point> {
        self.discontinuities.iter().map(|a| Point::new(a.cos(), a.sin())).collect()
    }

    pub fn rotated(&self, phi: f64) -> Self {
        if self.is_constant() {
            return self.clone();
        }
        Self::with_max_k(self.discontinuities.iter().map(|a| a + phi).collect(), self.labels.clone(), self.max_k)
            .expect("rotation preserves validity")
    }

    pub fn min_arc_angle(&self) -> f64 {
        self.arcs().iter().map(|a| a.end - a.start).fold(f64::INFINITY, f64::min)
    }

    pub fn to_config(&self) -> BoundaryConfig {
        BoundaryConfig {
            discontinuities_deg: self.discontinuities.iter().map(|a| a.to_degrees()).collect(),
            labels: self.labels.iter().map(|l| l + 1).collect(),
            max_k: Some(self.max_k),
        }
    }

    pub fn from_config(cfg: &BoundaryConfig) -> Result<Self> {
        let labels: Vec<usize> = cfg
            .labels
            .iter()
            .map(|l| if *l >= 1 { Ok(l - 1) } else { Err(Error::InvalidBoundaryData("labels are 1-based".into())) })
            .collect::<Result<_>>()?;
        if cfg.discontinuities_deg.is_empty() {
            if labels.len() != 1 {
                return Err(Error::InvalidBoundaryData("constant data needs exactly one label".into()));
            }
            return Self::constant(labels[0]);
        }
        Self::with_max_k(
            cfg.discontinuities_deg.iter().map(|d| d.to_radians()).collect(),
            labels,
            cfg.max_k.unwrap_or(DEFAULT_MAX_K),
        )
    }
}

/// Text form: angles in degrees, labels 1-based.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundaryConfig {
    pub discontinuities_deg: Vec<f64>,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
}

/// Interface graph: chords between discontinuity points and, optionally, a
/// junction joined to three of them.
#[derive(Debug, Clone)]
struct Topology {
    chords: Vec<(usize, usize)>,
    legs: Option<[usize; 3]>,
}

/// Non-crossing perfect matchings of points listed in circular order.
fn matchings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if points.is_empty() {
        return vec![Vec::new()];
    }
    if points.len() % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for j in (1..points.len()).step_by(2) {
        for inner in matchings(&points[1..j]) {
            for outer in matchings(&points[j + 1..]) {
                let mut m = vec![(points[0], points[j])];
                m.extend(inner.iter().copied());
                m.extend(outer.iter().copied());
                out.push(m);
            }
        }
    }
    out
}

fn enumerate_topologies(k: usize) -> Vec<Topology> {
    let all: Vec<usize> = (0..k).collect();
    let mut out: Vec<Topology> = matchings(&all).into_iter().map(|chords| Topology { chords, legs: None }).collect();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let rest: Vec<usize> = all.iter().copied().filter(|v| *v != a && *v != b && *v != c).collect();
                for chords in matchings(&rest) {
                    out.push(Topology { chords, legs: Some([a, b, c]) });
                }
            }
        }
    }
    out
}

/// Vertex of the interface graph: discontinuity point or the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Vertex {
    Boundary(usize),
    Junction,
}

struct Faces {
    /// Label per face.
    labels: Vec<usize>,
    /// Vertex cycle per face (each boundary vertex starts an arc to the next one).
    cycles: Vec<Vec<Vertex>>,
    /// `(left, right)` labels per segment, chords first then legs.
    sides: Vec<(usize, usize)>,
}

fn trace_faces(bdata: &BoundaryData, topo: &Topology, junction: Option<Point>) -> Option<Faces> {
    let k = bdata.k();
    let pts = bdata.points();
    let nseg = topo.chords.len() + topo.legs.map_or(0, |_| 3);
    // segment incident to each boundary point and its far end
    let mut attach: Vec<Option<(usize, Vertex)>> = vec![None; k];
    for (s, &(a, b)) in topo.chords.iter().enumerate() {
        attach[a] = Some((s, Vertex::Boundary(b)));
        attach[b] = Some((s, Vertex::Boundary(a)));
    }
    let mut legs_ccw: Vec<usize> = Vec::new();
    if let Some(legs) = topo.legs {
        let j = junction?;
        for (m, &d) in legs.iter().enumerate() {
            attach[d] = Some((topo.chords.len() + m, Vertex::Junction));
        }
        legs_ccw = legs.to_vec();
        legs_ccw.sort_by(|x, y| {
            let ax = (pts[*x] - j).y.atan2((pts[*x] - j).x);
            let ay = (pts[*y] - j).y.atan2((pts[*y] - j).x);
            ax.total_cmp(&ay)
        });
    }
    let mut visited = vec![false; k];
    let mut side_left: Vec<Option<usize>> = vec![None; nseg];
    let mut side_right: Vec<Option<usize>> = vec![None; nseg];
    let mut labels = Vec::new();
    let mut cycles = Vec::new();
    for start in 0..k {
        if visited[start] {
            continue;
        }
        let label = bdata.labels()[start];
        let mut cycle = vec![Vertex::Boundary(start)];
        let mut cur = start;
        loop {
            visited[cur] = true;
            if bdata.labels()[cur] != label {
                return None;
            }
            let v = (cur + 1) % k;
            let (seg, far) = attach[v]?;
            let next = match far {
                Vertex::Boundary(w) => {
                    let (a, _) = topo.chords[seg];
                    if a == v {
                        side_left[seg] = Some(label);
                    } else {
                        side_right[seg] = Some(label);
                    }
                    w
                }
                Vertex::Junction => {
                    // leg stored as junction → boundary point; we walk it backwards
                    side_right[seg] = Some(label);
                    let pos = legs_ccw.iter().position(|d| *d == v)?;
                    let out = legs_ccw[(pos + 2) % 3];
                    let out_seg = topo.chords.len() + topo.legs?.iter().position(|d| *d == out)?;
                    side_left[out_seg] = Some(label);
                    cycle.push(Vertex::Junction);
                    out
                }
            };
            if next == start {
                break;
            }
            if visited[next] {
                return None;
            }
            cycle.push(Vertex::Boundary(next));
            cur = next;
        }
        labels.push(label);
        cycles.push(cycle);
    }
    let mut sides = Vec::with_capacity(nseg);
    for s in 0..nseg {
        let (l, r) = (side_left[s]?, side_right[s]?);
        if l == r {
            return None;
        }
        sides.push((l, r));
    }
    Some(Faces { labels, cycles, sides })
}

fn segment_endpoints(bdata: &BoundaryData, topo: &Topology, junction: Option<Point>) -> Vec<(Point, Point)> {
    let pts = bdata.points();
    let mut out: Vec<(Point, Point)> = topo.chords.iter().map(|&(a, b)| (pts[a], pts[b])).collect();
    if let (Some(legs), Some(j)) = (topo.legs, junction) {
        for d in legs {
            out.push((j, pts[d]));
        }
    }
    out
}

fn has_crossings(segs: &[(Point, Point)]) -> bool {
    let shares = |a: &(Point, Point), b: &(Point, Point)| {
        let eq = |p: &Point, q: &Point| (p - q).norm() < 1e-12;
        eq(&a.0, &b.0) || eq(&a.0, &b.1) || eq(&a.1, &b.0) || eq(&a.1, &b.1)
    };
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if !shares(&segs[i], &segs[j]) && segments_intersect(&segs[i].0, &segs[i].1, &segs[j].0, &segs[j].1) {
                return true;
            }
        }
    }
    false
}

fn build_network(bdata: &BoundaryData, topo: &Topology, faces: &Faces, junction: Option<Point>, tensions: &SurfaceTensions) -> Result<PartitionNetwork> {
    let pts = bdata.points();
    let disc = bdata.discontinuities();
    let k = bdata.k();
    let segs = segment_endpoints(bdata, topo, junction);
    let segments: Vec<Segment> = segs.iter().zip(&faces.sides).map(|(&(a, b), &labels)| Segment { a, b, labels }).collect();
    let mut regions = Vec::new();
    for (cycle, &label) in faces.cycles.iter().zip(&faces.labels) {
        let mut poly = Vec::new();
        for v in cycle {
            match v {
                Vertex::Boundary(m) => {
                    let arc = circle_samples(disc[*m], disc[(*m + 1) % k], ARC_SAMPLES);
                    poly.extend(arc);
                }
                Vertex::Junction => poly.push(junction.expect("junction present")),
            }
        }
        regions.push(Region { label, polygon: poly });
    }
    let mut net = PartitionNetwork {
        junctions: junction.into_iter().collect(),
        segments,
        arcs: Vec::new(),
        boundary_points: pts,
        regions,
        cost: 0.0,
        constant_label: None,
    };
    net.cost = perimeter_energy(&net, tensions)?;
    Ok(net)
}

/// Minimal sharp partition of the unit disc for the given boundary labels.
///
/// All interface graphs made of chords and at most one triple junction are
/// enumerated; the junction position minimises the weighted leg length.
pub fn solve_problem1(bdata: &BoundaryData, tensions: &SurfaceTensions) -> Result<PartitionNetwork> {
    let k = bdata.k();
    if k == 0 {
        let label = bdata.labels()[0];
        return Ok(PartitionNetwork {
            regions: vec![Region { label, polygon: circle_samples(0.0, TAU, ARC_SAMPLES) }],
            constant_label: Some(label),
            ..Default::default()
        });
    }
    if k > MAX_SOLVED_K {
        return Err(Error::UnsupportedTopology(format!("{k} discontinuities; the exact solver handles at most {MAX_SOLVED_K}")));
    }
    let pts = bdata.points();
    let mut best: Option<PartitionNetwork> = None;
    for topo in enumerate_topologies(k) {
        let guess = topo.legs.map(|l| (pts[l[0]] + pts[l[1]] + pts[l[2]]) / 3.0);
        let Some(faces) = trace_faces(bdata, &topo, guess) else { continue };
        let junction = match topo.legs {
            None => None,
            Some(legs) => {
                let nc = topo.chords.len();
                let weights: Vec<f64> = (0..3).map(|m| tensions.cost(faces.sides[nc + m].0, faces.sides[nc + m].1)).collect();
                let anchors: Vec<Point> = legs.iter().map(|d| pts[*d]).collect();
                let cost = |j: &Point| -> f64 {
                    let r = j.norm();
                    let (q, pen) = if r > 1.0 { (j / r, r - 1.0) } else { (*j, 0.0) };
                    anchors.iter().zip(&weights).map(|(a, w)| w * (q - a).norm()).sum::<f64>() + 1e3 * pen
                };
                let opts = NelderMeadOptions { initial_step: 0.05, ..Default::default() };
                let (j, _) = nelder_mead_2d(cost, guess.expect("legs imply a guess"), opts);
                // restart from the result to shake off a collapsed simplex
                let (j, _) = nelder_mead_2d(cost, j, NelderMeadOptions { initial_step: 1e-3, ..opts });
                let j = if j.norm() > 1.0 { j / j.norm() } else { polish_junction(j, &anchors, &weights) };
                Some(j)
            }
        };
        if has_crossings(&segment_endpoints(bdata, &topo, junction)) {
            continue;
        }
        // the ordering of legs around the optimised junction must not change
        let Some(faces) = trace_faces(bdata, &topo, junction) else { continue };
        let net = build_network(bdata, &topo, &faces, junction, tensions)?;
        if best.as_ref().is_none_or(|b| net.cost < b.cost) {
            best = Some(net);
        }
    }
    best.ok_or_else(|| Error::InconsistentLabeling("no admissible interface graph".into()))
}

/// Newton steps on `Σ w_m |J − a_m|`; the simplex result is only accurate to
/// roughly the square root of its function tolerance.
fn polish_junction(mut j: Point, anchors: &[Point], weights: &[f64]) -> Point {
    let f = |j: &Point| anchors.iter().zip(weights).map(|(a, w)| w * (j - a).norm()).sum::<f64>();
    for _ in 0..20 {
        let mut g = Point::zeros();
        let mut h = crate::potential::Mat2::zeros();
        for (a, w) in anchors.iter().zip(weights) {
            let d = j - a;
            let r = d.norm();
            if r < 1e-9 {
                return j;
            }
            let u = d / r;
            g += u * *w;
            h += (crate::potential::Mat2::identity() - u * u.transpose()) * (*w / r);
        }
        let Some(inv) = h.try_inverse() else { return j };
        let step = inv * g;
        let trial = j - step;
        if trial.norm() > 1.0 || f(&trial) > f(&j) + 1e-15 {
            return j;
        }
        j = trial;
        if step.norm() < 1e-15 {
            break;
        }
    }
    j
}

/// Opening angle of each label's sector at the first junction of a network,
/// indexed by label.
pub fn junction_opening_angles(net: &PartitionNetwork) -> Option<[f64; 3]> {
    let j = *net.junctions.first()?;
    let legs: Vec<&Segment> = net.segments.iter().filter(|s| (s.a - j).norm() < 1e-12).collect();
    if legs.len() != 3 {
        return None;
    }
    let mut dirs: Vec<(f64, &Segment)> = legs.iter().map(|s| ((s.b - j).y.atan2((s.b - j).x), *s)).collect();
    dirs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = [0.0; 3];
    for m in 0..3 {
        let (a0, s0) = dirs[m];
        let (a1, _) = dirs[(m + 1) % 3];
        let open = wrap_angle(a1 - a0);
        // sector between leg m and the next one counterclockwise lies on the left of leg m
        out[s0.labels.0] = open;
    }
    Some(out)
}

/// Max deviation of the junction opening angles from the minimal-junction angles.
pub fn junction_angle_error(net: &PartitionNetwork, tensions: &SurfaceTensions) -> Option<f64> {
    let got = junction_opening_angles(net)?;
    let want = junction_angles(tensions.c12, tensions.c13, tensions.c23).ok()?;
    Some((0..3).map(|l| (got[l] - want[l]).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn boundary_validation() {
        assert!(BoundaryData::new(vec![0.0], vec![0]).is_err());
        assert!(BoundaryData::new(vec![0.0, 1.0], vec![0, 0]).is_err());
        assert!(BoundaryData::new(vec![0.0, 1.0], vec![0, 3]).is_err());
        let many: Vec<f64> = (0..10).map(|m| m as f64 * 0.6).collect();
        let labels: Vec<usize> = (0..10).map(|m| m % 2).collect();
        assert!(matches!(BoundaryData::new(many, labels), Err(Error::UnsupportedTopology(_))));
    }

    #[test]
    fn label_lookup() {
        let b = BoundaryData::three_equal();
        assert_eq!(b.label_at(PI), 0);
        assert_eq!(b.label_at(1.5 * PI), 1);
        assert_eq!(b.label_at(0.0), 2);
        assert_eq!(b.label_at(90f64.to_radians()), 0);
    }

    #[test]
    fn matchings_are_catalan() {
        assert_eq!(matchings(&[0, 1, 2, 3]).len(), 2);
        assert_eq!(matchings(&[0, 1, 2, 3, 4, 5]).len(), 5);
    }

    #[test]
    fn symmetric_star() {
        let t = SurfaceTensions::equal(0.5).unwrap();
        let net = solve_problem1(&BoundaryData::three_equal(), &t).unwrap();
        assert!((net.cost - 3.0).abs() < 1e-9, "{}", net.cost);
        assert!(net.junctions[0].norm() < 1e-6);
        assert!(junction_angle_error(&net, &t).unwrap() < 1e-6);
        assert!(net.max_convexity_defect() < 1e-9);
    }

    #[test]
    fn chord_cost() {
        let t = SurfaceTensions::from_tensions([1.0, 2.0, 3.0]).unwrap();
        let theta = 1.1;
        let net = solve_problem1(&BoundaryData::two_arcs(0, 2, theta).unwrap(), &t).unwrap();
        assert!((net.cost - 4.0 * 2.0 * theta.sin()).abs() < 1e-12);
        assert_eq!(net.label_at(&Point::new(0.95, 0.0)), Some(0));
        assert_eq!(net.label_at(&Point::new(-0.5, 0.0)), Some(2));
    }

    #[test]
    fn asymmetric_junction_obeys_sine_law() {
        let t = SurfaceTensions::from_tensions([1.0, 2.0, 3.0]).unwrap();
        let net = solve_problem1(&BoundaryData::three_equal(), &t).unwrap();
        assert!(net.junctions[0].norm() > 0.05);
        assert!(junction_angle_error(&net, &t).unwrap() < 1e-6);
    }

    #[test]
    fn four_arcs_pick_consistent_matching() {
        let t = SurfaceTensions::equal(1.0).unwrap();
        let b = BoundaryData::new(vec![0.3, 1.9, 3.4, 5.0], vec![0, 1, 0, 2]).unwrap();
        let net = solve_problem1(&b, &t).unwrap();
        assert_eq!(net.segments.len(), 2);
        for s in &net.segments {
            assert!(s.labels.0 != s.labels.1);
        }
    }
}
