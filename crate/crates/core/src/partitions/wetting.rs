//! Almost-partitions: each junction is replaced by a gray curvilinear
//! triangle whose circular sides satisfy `t₁κ₁ = t₂κ₂ = t₃κ₃`.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::junction::{perimeter_energy, SurfaceTensions};
use crate::network::{ColoredArc, PartitionNetwork};
use crate::numerics::{power_law_fit, LinearFit};
use crate::potential::Point;

use super::{solve_problem1, BoundaryData};

#[derive(Debug, Clone)]
pub struct WettedNetwork {
    /// Colored interfaces: trimmed segments plus the gray-region arcs.
    pub network: PartitionNetwork,
    /// Arc curvature per label (infinite when the gray region is a point).
    pub curvatures: [f64; 3],
    pub cusps: Vec<Point>,
    pub gray_polygons: Vec<Vec<Point>>,
    pub gray_area: f64,
    pub delta: f64,
    /// Cost of the sharp partition it was built from.
    pub sharp_cost: f64,
}

impl WettedNetwork {
    pub fn cost(&self) -> f64 {
        self.network.cost
    }

    /// Relative spread of `t_ℓ κ_ℓ` over the labels present.
    pub fn curvature_condition_residual(&self, tensions: &SurfaceTensions) -> f64 {
        let v: Vec<f64> = (0..3).map(|l| tensions.t[l] * self.curvatures[l]).filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean
    }

    /// Largest sine of the angle between an arc and the segment it meets at a cusp.
    pub fn tangency_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for arc in &self.network.arcs {
            for s in [0.0, 1.0] {
                let p = arc.point(s);
                let a = arc.start + s * arc.sweep;
                let tangent = Point::new(-a.sin(), a.cos());
                let seg = self
                    .network
                    .segments
                    .iter()
                    .min_by(|x, y| (x.a - p).norm().total_cmp(&(y.a - p).norm()))
                    .filter(|g| (g.a - p).norm() < 1e-6 * arc.radius);
                if let Some(g) = seg {
                    let d = (g.b - g.a).normalize();
                    worst = worst.max((tangent.x * d.y - tangent.y * d.x).abs());
                } else {
                    worst = worst.max(1.0);
                }
            }
        }
        worst
    }

    /// Checks that each arc bends towards the junction it replaces, i.e. its
    /// midpoint lies closer to the gray region's center than its chord does.
    pub fn arcs_bow_into_gray(&self) -> bool {
        self.network.arcs.iter().all(|arc| {
            let (p, q) = arc.endpoints();
            let mid = arc.point(0.5);
            let chord_mid = (p + q) * 0.5;
            let center = self
                .network
                .junctions
                .iter()
                .min_by(|a, b| (*a - chord_mid).norm().total_cmp(&(*b - chord_mid).norm()))
                .copied()
                .unwrap_or(chord_mid);
            (mid - center).norm() < (chord_mid - center).norm()
        })
    }
}

/// Geometry of one wetted junction for a given `t₁κ₁`.
struct Wetting {
    radii: [f64; 3],
    tangent_lengths: [f64; 3],
    area: f64,
}

fn wetting_geometry(tk: f64, openings: &[f64; 3], tensions: &SurfaceTensions) -> Wetting {
    let mut radii = [0.0; 3];
    let mut tl = [0.0; 3];
    let mut area = 0.0;
    for l in 0..3 {
        let r = tensions.t[l] / tk;
        let half = 0.5 * openings[l];
        let s = r / half.tan();
        radii[l] = r;
        tl[l] = s;
        area += s * r - 0.5 * r * r * (PI - openings[l]);
    }
    Wetting { radii, tangent_lengths: tl, area }
}

fn wrap_pi(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Minimal almost-partition with gray area `delta`, obtained by wetting the
/// junction of the sharp minimiser. Networks without a junction are returned
/// unchanged with zero gray area.
pub fn solve_problem2(bdata: &BoundaryData, tensions: &SurfaceTensions, delta: f64) -> Result<WettedNetwork> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParams(format!("delta must be non-negative, got {delta}")));
    }
    let sharp = solve_problem1(bdata, tensions)?;
    let unchanged = |sharp: PartitionNetwork| WettedNetwork {
        sharp_cost: sharp.cost,
        curvatures: [f64::INFINITY; 3],
        cusps: Vec::new(),
        gray_polygons: Vec::new(),
        gray_area: 0.0,
        delta,
        network: sharp,
    };
    if delta == 0.0 || sharp.junctions.is_empty() {
        return Ok(unchanged(sharp));
    }
    let j = sharp.junctions[0];
    let mut legs: Vec<(f64, usize)> = sharp
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| (s.a - j).norm() < 1e-12)
        .map(|(i, s)| ((s.b - j).y.atan2((s.b - j).x), i))
        .collect();
    if legs.len() != 3 {
        return Err(Error::UnsupportedTopology("junction without exactly three legs".into()));
    }
    legs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sector m lies counterclockwise between leg m and leg m+1; its label is the left label of leg m
    let mut openings = [0.0; 3];
    let mut sector_label = [0usize; 3];
    for m in 0..3 {
        let open = (legs[(m + 1) % 3].0 - legs[m].0).rem_euclid(2.0 * PI);
        let label = sharp.segments[legs[m].1].labels.0;
        sector_label[m] = label;
        openings[label] = open;
    }

    // area ∝ 1/(t₁κ₁)²: bracket then bisect in log space
    let mut lo = 1.0;
    let mut hi = 1.0;
    while wetting_geometry(lo, &openings, tensions).area < delta {
        lo *= 0.5;
    }
    while wetting_geometry(hi, &openings, tensions).area > delta {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if wetting_geometry(mid, &openings, tensions).area > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    let tk = (lo * hi).sqrt();
    let geo = wetting_geometry(tk, &openings, tensions);

    let leg_len = |m: usize| sharp.segments[legs[m].1].length();
    let cusp_dist: Vec<f64> = (0..3)
        .map(|m| {
            let before = sector_label[(m + 2) % 3];
            let after = sector_label[m];
            0.5 * (geo.tangent_lengths[before] + geo.tangent_lengths[after])
        })
        .collect();
    for m in 0..3 {
        if cusp_dist[m] >= leg_len(m) {
            return Err(Error::DeltaTooLarge(format!(
                "cusp at distance {:.4} beyond the leg of length {:.4}",
                cusp_dist[m],
                leg_len(m)
            )));
        }
    }
    let dir = |m: usize| Point::new(legs[m].0.cos(), legs[m].0.sin());
    let cusps: Vec<Point> = (0..3).map(|m| j + dir(m) * cusp_dist[m]).collect();

    let mut network = sharp.clone();
    for m in 0..3 {
        let seg = &mut network.segments[legs[m].1];
        seg.a = cusps[m];
    }
    let mut arcs = Vec::new();
    for m in 0..3 {
        let l = sector_label[m];
        let r = geo.radii[l];
        let half = 0.5 * openings[l];
        let bis = legs[m].0 + half;
        let center = j + Point::new(bis.cos(), bis.sin()) * (r / half.sin());
        let p = cusps[m];
        let start = (p - center).y.atan2((p - center).x);
        let toward = (j - center).y.atan2((j - center).x);
        let sign = if wrap_pi(toward - start) >= 0.0 { 1.0 } else { -1.0 };
        arcs.push(ColoredArc { center, radius: r, start, sweep: sign * (PI - openings[l]), label: l });
    }

    // colored faces: the junction corner becomes the arc of that face's label
    for region in &mut network.regions {
        let Some(pos) = region.polygon.iter().position(|p| (p - j).norm() < 1e-12) else { continue };
        let arc = arcs.iter().find(|a| a.label == region.label).expect("one arc per label");
        let n = region.polygon.len();
        let prev = region.polygon[(pos + n - 1) % n];
        let mut pts: Vec<Point> = (0..=64).map(|i| arc.point(i as f64 / 64.0)).collect();
        if (pts[0] - prev).norm() > (pts[64] - prev).norm() {
            pts.reverse();
        }
        region.polygon.splice(pos..=pos, pts);
    }
    let mut gray = Vec::new();
    for m in 0..3 {
        let arc = &arcs[m];
        let mut pts: Vec<Point> = (0..64).map(|i| arc.point(i as f64 / 64.0)).collect();
        if (pts[0] - cusps[m]).norm() > 1e-9 * (1.0 + arc.radius) {
            pts = (1..=64).rev().map(|i| arc.point(i as f64 / 64.0)).collect();
        }
        gray.extend(pts);
    }

    let mut curvatures = [f64::INFINITY; 3];
    for a in &arcs {
        curvatures[a.label] = a.curvature();
    }
    network.arcs = arcs;
    network.cost = perimeter_energy(&network, tensions)?;
    Ok(WettedNetwork {
        sharp_cost: sharp.cost,
        network,
        curvatures,
        cusps,
        gray_polygons: vec![gray],
        gray_area: geo.area,
        delta,
    })
}

/// Closed-form gray area of a wetted junction with equal tangent length `s`.
pub fn wetting_area(s: f64, openings: [f64; 3]) -> f64 {
    openings.iter().map(|a| {
        let q = (0.5 * a).tan();
        s * s * (q - 0.5 * q * q * (PI - a))
    }).sum()
}

/// Closed-form cost reduction of a wetted junction with equal tangent length `s`.
pub fn wetting_gap(s: f64, openings: [f64; 3], tensions: &SurfaceTensions) -> f64 {
    let straight: f64 = 2.0 * tensions.t.iter().sum::<f64>();
    let curved: f64 = (0..3).map(|l| tensions.t[l] * (0.5 * openings[l]).tan() * (PI - openings[l])).sum();
    s * (straight - curved)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub delta: f64,
    pub m0: f64,
    pub m0_delta: f64,
    pub gap: f64,
    pub gap_over_sqrt_delta: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Fit of `log gap` against `log δ`; `None` if fewer than two positive gaps.
    pub fit: Option<LinearFit>,
    /// Largest `gap/√δ` over the sweep.
    pub gamma: f64,
    /// `m₀^δ ≤ m₀` for every row.
    pub admissible: bool,
    /// `gap ≤ γ·√δ` for every row (true by construction of γ; kept for reports).
    pub bounded: bool,
}

impl ComparisonTable {
    pub fn exponent(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["delta", "m0", "m0_delta", "gap", "gap_over_sqrt_delta", "fitted_exponent"])?;
        for r in &self.rows {
            w.write_record([
                r.delta.to_string(),
                r.m0.to_string(),
                r.m0_delta.to_string(),
                r.gap.to_string(),
                r.gap_over_sqrt_delta.to_string(),
                self.exponent().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compare_partitions(bdata: &BoundaryData, tensions: &SurfaceTensions, deltas: &[f64]) -> Result<ComparisonTable> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParams("deltas must be positive".into()));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("deltas must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let wet = solve_problem2(bdata, tensions, delta)?;
        let gap = wet.sharp_cost - wet.cost();
        rows.push(ComparisonRow { delta, m0: wet.sharp_cost, m0_delta: wet.cost(), gap, gap_over_sqrt_delta: gap / delta.sqrt() });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let fit = power_law_fit(&x, &y);
    let gamma = rows.iter().map(|r| r.gap_over_sqrt_delta).fold(0.0, f64::max);
    let admissible = rows.iter().all(|r| r.m0_delta <= r.m0 + 1e-12 * r.m0.abs().max(1.0));
    let bounded = rows.iter().all(|r| r.gap <= gamma * r.delta.sqrt() * (1.0 + 1e-12));
    Ok(ComparisonTable { rows, fit, gamma, admissible, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> (BoundaryData, SurfaceTensions) {
        (BoundaryData::three_equal(), SurfaceTensions::equal(0.5).unwrap())
    }

    #[test]
    fn zero_delta_is_sharp() {
        let (b, t) = symmetric();
        let w = solve_problem2(&b, &t, 0.0).unwrap();
        assert_eq!(w.cost(), w.sharp_cost);
        assert_eq!(w.gray_area, 0.0);
    }

    #[test]
    fn symmetric_wetting_matches_closed_form() {
        let (b, t) = symmetric();
        let delta = 1e-3;
        let w = solve_problem2(&b, &t, delta).unwrap();
        assert!((w.gray_area - delta).abs() < 1e-12);
        let open = [2.0 * PI / 3.0; 3];
        let s = (delta / wetting_area(1.0, open)).sqrt();
        let gap = w.sharp_cost - w.cost();
        assert!((gap - wetting_gap(s, open, &t)).abs() < 1e-12, "{gap}");
        assert!(gap > 0.0);
        assert!(w.curvature_condition_residual(&t) < 1e-12);
        assert!(w.tangency_defect() < 1e-6);
        assert!(w.arcs_bow_into_gray());
        assert!(w.network.max_convexity_defect() < 1e-9);
    }

    #[test]
    fn asymmetric_curvature_condition() {
        let t = SurfaceTensions::from_tensions([1.0, 2.0, 3.0]).unwrap();
        let w = solve_problem2(&BoundaryData::three_equal(), &t, 1e-3).unwrap();
        assert!(w.curvature_condition_residual(&t) < 1e-9);
        assert!(w.tangency_defect() < 1e-6);
        assert!(w.cost() < w.sharp_cost);
    }

    #[test]
    fn oversized_delta_rejected() {
        let (b, t) = symmetric();
        assert!(matches!(solve_problem2(&b, &t, 2.0), Err(Error::DeltaTooLarge(_))));
    }

    #[test]
    fn junction_free_data_is_unchanged() {
        let t = SurfaceTensions::equal(1.0).unwrap();
        let b = BoundaryData::two_arcs(0, 1, 1.0).unwrap();
        let w = solve_problem2(&b, &t, 1e-2).unwrap();
        assert_eq!(w.cost(), w.sharp_cost);
    }

    #[test]
    fn sweep_exponent_is_half() {
        let (b, t) = symmetric();
        let table = compare_partitions(&b, &t, &[1e-4, 4e-4, 1.6e-3, 6.4e-3]).unwrap();
        assert!((table.exponent() - 0.5).abs() < 1e-6);
        assert!(table.admissible && table.bounded);
    }
}
