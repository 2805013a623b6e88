//! Fitting blow-downs by the three cones: a constant well, a half-plane
//! and a triple junction with sine-law angles.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::junction::{junction_angles, make_junction_map, JunctionMap, ASSIGNMENTS};
use crate::numerics::wrap_angle;
use crate::potential::{Point, Potential};
use crate::solver::{sample_map, write_pgm, Bc, Domain, Field, GridSpec, NodeKind};

use super::profile::{radial_energy, wtilde_profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Constant,
    HalfPlane,
    TripleJunction,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Constant => "constant",
            Classification::HalfPlane => "half-plane",
            Classification::TripleJunction => "triple-junction",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cone {
    Constant { label: usize },
    /// `p_i` where `x·n > offset`, `p_j` elsewhere, `n = (cos angle, sin angle)`.
    HalfPlane { angle: f64, offset: f64, labels: [usize; 2] },
    Junction(JunctionMap),
}

impl Cone {
    pub fn label_at(&self, x: &Point) -> usize {
        match self {
            Cone::Constant { label } => *label,
            Cone::HalfPlane { angle, offset, labels } => {
                if x.x * angle.cos() + x.y * angle.sin() > *offset {
                    labels[0]
                } else {
                    labels[1]
                }
            }
            Cone::Junction(m) => m.label_at(x),
        }
    }
}

/// A cone with its L¹ distance to the field per unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFit {
    pub cone: Cone,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Rotation steps over a full turn.
    pub rotations: usize,
    /// The winner must beat the runner-up by this fraction.
    pub margin: f64,
    /// Largest accepted distance, as a fraction of the smallest well separation.
    pub tolerance: f64,
    /// Sample cells per unit-disc diameter.
    pub samples: usize,
    /// Half-plane lines stay this close to the center.
    pub max_offset: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { rotations: 720, margin: 0.2, tolerance: 0.1, samples: 160, max_offset: 0.5 }
    }
}

/// Blow-down samples `U(R·y)` on a regular grid of cell midpoints.
struct Samples {
    y: Vec<Point>,
    phi: Vec<f64>,
    /// `|U − p_ℓ|` times the cell area.
    dist: Vec<[f64; 3]>,
    area: f64,
}

impl Samples {
    fn collect(field: &Field, pot: &Potential, scale: f64, half: f64, disc: bool, n: usize) -> Result<Samples> {
        let cell = 2.0 * half / n as f64;
        let mut s = Samples { y: Vec::new(), phi: Vec::new(), dist: Vec::new(), area: 0.0 };
        for j in 0..n {
            for i in 0..n {
                let y = Point::new(-half + (i as f64 + 0.5) * cell, -half + (j as f64 + 0.5) * cell);
                if disc && y.norm() >= half {
                    continue;
                }
                let x = y * scale;
                let u = field
                    .bilinear(&x)
                    .or_else(|| nearest_node(field, &x))
                    .ok_or_else(|| Error::OutsideDomain(format!("blow-down sample ({:.3}, {:.3}) has no data", x.x, x.y)))?;
                let a = cell * cell;
                s.dist.push([0, 1, 2].map(|l| (u - pot.well(l)).norm() * a));
                s.phi.push(wrap_angle(y.y.atan2(y.x)));
                s.y.push(y);
                s.area += a;
            }
        }
        Ok(s)
    }

    fn fit_constant(&self) -> ConeFit {
        (0..3)
            .map(|l| ConeFit { cone: Cone::Constant { label: l }, distance: self.dist.iter().map(|d| d[l]).sum::<f64>() / self.area })
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("three wells")
    }

    fn fit_half_plane(&self, rotations: usize, max_offset: f64) -> ConeFit {
        let best = (0..rotations)
            .into_par_iter()
            .map(|a| {
                let angle = TAU * a as f64 / rotations as f64;
                let nrm = Point::new(angle.cos(), angle.sin());
                let mut order: Vec<(f64, usize)> = self.y.iter().enumerate().map(|(k, y)| (y.dot(&nrm), k)).collect();
                order.sort_by(|p, q| p.0.total_cmp(&q.0));
                let mut best = ConeFit { cone: Cone::Constant { label: 0 }, distance: f64::INFINITY };
                for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                    // everything p_i, then move samples below the line over to p_j
                    let mut cost: f64 = self.dist.iter().map(|d| d[i]).sum();
                    let mut consider = |cost: f64, offset: f64| {
                        if offset.abs() <= max_offset && cost < best.distance * self.area {
                            best = ConeFit { cone: Cone::HalfPlane { angle, offset, labels: [i, j] }, distance: cost / self.area };
                        }
                    };
                    consider(cost, order.first().map_or(0.0, |o| o.0) - 1e-12);
                    for (m, (t, k)) in order.iter().enumerate() {
                        cost += self.dist[*k][j] - self.dist[*k][i];
                        let next = order.get(m + 1).map_or(*t + 1e-12, |o| o.0);
                        consider(cost, 0.5 * (t + next));
                    }
                }
                best
            })
            .min_by(|a, b| a.distance.total_cmp(&b.distance));
        best.expect("at least one rotation")
    }

    fn fit_junction(&self, angles: [f64; 3], rotations: usize) -> ConeFit {
        (0..rotations)
            .into_par_iter()
            .flat_map_iter(|a| ASSIGNMENTS.iter().map(move |asg| (a, *asg)))
            .map(|(a, asg)| {
                let rot = TAU * a as f64 / rotations as f64;
                let map = make_junction_map(angles, rot, asg);
                let (b0, b1) = (angles[asg[0]], angles[asg[0]] + angles[asg[1]]);
                let mut cost = 0.0;
                for (phi, d) in self.phi.iter().zip(&self.dist) {
                    let t = wrap_angle(phi - rot);
                    let l = if t < b0 {
                        asg[0]
                    } else if t < b1 {
                        asg[1]
                    } else {
                        asg[2]
                    };
                    cost += d[l];
                }
                ConeFit { cone: Cone::Junction(map), distance: cost / self.area }
            })
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("at least one rotation")
    }
}

/// Closest node with data among the corners of the cell around `x`; the
/// disc ring leaves a few corner cells without a full stencil.
fn nearest_node(field: &Field, x: &Point) -> Option<Point> {
    let s = (x - field.origin) / field.spacing;
    let (i0, j0) = (s.x.floor(), s.y.floor());
    let mut best: Option<(f64, Point)> = None;
    for (di, dj) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let (i, j) = (i0 + di, j0 + dj);
        if i < 0.0 || j < 0.0 || i >= field.nx as f64 || j >= field.ny as f64 {
            continue;
        }
        let k = field.index(i as usize, j as usize);
        if field.mask[k] == NodeKind::Outside {
            continue;
        }
        let d = (Point::new(i, j) - s).norm();
        if best.is_none_or(|b| d < b.0) {
            best = Some((d, field.values[k]));
        }
    }
    best.map(|b| b.1)
}

/// Fits of the blow-down `y ↦ U(scale·y)` on the unit disc, ordered
/// constant, half-plane, junction.
pub fn fit_cones(field: &Field, pot: &Potential, costs: [f64; 3], scale: f64, opts: &ClassifyOptions) -> Result<[ConeFit; 3]> {
    let angles = junction_angles(costs[0], costs[1], costs[2])?;
    let s = Samples::collect(field, pot, scale, 1.0, true, opts.samples)?;
    Ok([s.fit_constant(), s.fit_half_plane(opts.rotations, opts.max_offset), s.fit_junction(angles, opts.rotations)])
}

/// Best cone if it is within tolerance and beats the others by the margin.
pub fn classify_fits(fits: &[ConeFit; 3], pot: &Potential, opts: &ClassifyOptions) -> (Classification, ConeFit) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| fits[*a].distance.total_cmp(&fits[*b].distance));
    let (best, second) = (fits[order[0]], fits[order[1]]);
    let tol = opts.tolerance * pot.min_well_separation();
    if best.distance > tol || best.distance > (1.0 - opts.margin) * second.distance {
        return (Classification::Inconclusive, best);
    }
    let class = match best.cone {
        Cone::Constant { .. } => Classification::Constant,
        Cone::HalfPlane { .. } => Classification::HalfPlane,
        Cone::Junction(_) => Classification::TripleJunction,
    };
    (class, best)
}

#[derive(Debug, Clone)]
pub struct BlowdownReport {
    pub radii: Vec<f64>,
    pub wtilde: Vec<f64>,
    pub l0_estimate: f64,
    pub equipartition_defect: Vec<f64>,
    pub defect_exponent: Option<f64>,
    /// `∫ |U_ν|²/|x|` over `R/2 < |x| < R` per radius.
    pub radial_term: Vec<f64>,
    pub monotonicity_defect: f64,
    pub tail_variation: f64,
    pub classification: Classification,
    pub best_fit: ConeFit,
    /// Constant, half-plane and junction fits at the largest radius.
    pub fits: [ConeFit; 3],
    pub options: ClassifyOptions,
}

/// Sweeps the radii about the origin and classifies the blow-down at the
/// largest one. The field is read at unit scale.
pub fn classify_blowdown(
    field: &Field,
    pot: &Potential,
    costs: [f64; 3],
    radii: &[f64],
    opts: &ClassifyOptions,
) -> Result<BlowdownReport> {
    let w = wtilde_profile(field, pot, radii)?;
    let radial_term = radii.iter().map(|r| radial_energy(field, 0.5 * r, *r)).collect::<Result<Vec<f64>>>()?;
    let rmax = *radii.last().expect("checked by the sweep");
    let fits = fit_cones(field, pot, costs, rmax, opts)?;
    let (classification, best_fit) = classify_fits(&fits, pot, opts);
    Ok(BlowdownReport {
        radii: radii.to_vec(),
        wtilde: w.values,
        l0_estimate: w.l0_estimate,
        defect_exponent: w.defect.exponent(),
        equipartition_defect: w.defect.values,
        radial_term,
        monotonicity_defect: w.monotonicity_defect,
        tail_variation: w.tail_variation,
        classification,
        best_fit,
        fits,
        options: *opts,
    })
}

fn cone_text(c: &Cone) -> String {
    match c {
        Cone::Constant { label } => format!("constant p{}", label + 1),
        Cone::HalfPlane { angle, offset, labels } => {
            format!("half-plane normal {:.4} rad offset {:.4} wells p{}|p{}", angle, offset, labels[0] + 1, labels[1] + 1)
        }
        Cone::Junction(m) => format!(
            "junction rotation {:.4} rad assignment p{} p{} p{}",
            m.rotation,
            m.assignment[0] + 1,
            m.assignment[1] + 1,
            m.assignment[2] + 1
        ),
    }
}

impl BlowdownReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["radius", "wtilde", "equipartition_defect", "radial_term"])?;
        for k in 0..self.radii.len() {
            w.write_record([
                self.radii[k].to_string(),
                self.wtilde[k].to_string(),
                self.equipartition_defect[k].to_string(),
                self.radial_term[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// `key = value` lines.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let exp = self.defect_exponent.map_or("none".to_string(), |e| e.to_string());
        writeln!(s, "classification = \"{}\"", self.classification).unwrap();
        writeln!(s, "best_fit = \"{}\"", cone_text(&self.best_fit.cone)).unwrap();
        writeln!(s, "best_distance = {}", self.best_fit.distance).unwrap();
        for (name, f) in ["constant", "half_plane", "junction"].iter().zip(&self.fits) {
            writeln!(s, "{name}_distance = {}", f.distance).unwrap();
        }
        writeln!(s, "l0_estimate = {}", self.l0_estimate).unwrap();
        writeln!(s, "tail_variation = {}", self.tail_variation).unwrap();
        writeln!(s, "monotonicity_defect = {}", self.monotonicity_defect).unwrap();
        writeln!(s, "defect_exponent = {exp}").unwrap();
        writeln!(s, "margin = {}", self.options.margin).unwrap();
        writeln!(s, "tolerance = {}", self.options.tolerance).unwrap();
        writeln!(s, "rotations = {}", self.options.rotations).unwrap();
        s
    }

    /// PGM of the best-fit cone on the unit disc.
    pub fn save_fit_pgm(&self, path: &Path, pot: &Potential, cells: usize) -> Result<()> {
        let cone = self.best_fit.cone;
        let f = sample_map(&move |x: &Point| cone.label_at(x), pot, GridSpec::unit_disc(cells)?, Domain::unit_disc(), Bc::Dirichlet);
        write_pgm(path, &f, pot)
    }
}

/// `min ‖U − u*‖_{L¹(K)}` over rotated and relabeled junction cones with
/// sine-law angles, `K` the square inscribed in the unit disc. The field is
/// read in blow-down coordinates.
pub fn distance_to_a(field: &Field, pot: &Potential, costs: [f64; 3], rotations: usize) -> Result<(f64, JunctionMap)> {
    let angles = junction_angles(costs[0], costs[1], costs[2])?;
    let s = Samples::collect(field, pot, 1.0, FRAC_1_SQRT_2, false, 160)?;
    let fit = s.fit_junction(angles, rotations);
    match fit.cone {
        Cone::Junction(m) => Ok((fit.distance * s.area, m)),
        _ => unreachable!("junction fit returns a junction"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::symmetric_product_well;

    fn costs(pot: &Potential) -> [f64; 3] {
        crate::geodesics::pairwise_costs(pot).unwrap().as_array()
    }

    fn unit(cells: usize, f: impl Fn(&Point) -> usize, pot: &Potential) -> Field {
        sample_map(&f, pot, GridSpec::unit_disc(cells).unwrap(), Domain::unit_disc(), Bc::Dirichlet)
    }

    #[test]
    fn junction_fits_itself() {
        let pot = symmetric_product_well();
        let c = costs(&pot);
        let m = make_junction_map(junction_angles(c[0], c[1], c[2]).unwrap(), 0.5, [2, 0, 1]);
        let f = unit(256, |x| m.label_at(x), &pot);
        let fits = fit_cones(&f, &pot, c, 1.0, &ClassifyOptions::default()).unwrap();
        let (class, best) = classify_fits(&fits, &pot, &ClassifyOptions::default());
        assert_eq!(class, Classification::TripleJunction);
        assert!(best.distance < 0.02, "{best:?}");
    }

    #[test]
    fn half_plane_and_constant() {
        let pot = symmetric_product_well();
        let c = costs(&pot);
        let opts = ClassifyOptions::default();
        let f = unit(256, |x| if x.y > 0.1 { 1 } else { 2 }, &pot);
        let (class, best) = classify_fits(&fit_cones(&f, &pot, c, 1.0, &opts).unwrap(), &pot, &opts);
        assert_eq!(class, Classification::HalfPlane);
        match best.cone {
            Cone::HalfPlane { offset, .. } => assert!((offset.abs() - 0.1).abs() < 0.02),
            _ => unreachable!(),
        }
        let g = unit(64, |_| 0, &pot);
        let (class, best) = classify_fits(&fit_cones(&g, &pot, c, 1.0, &opts).unwrap(), &pot, &opts);
        assert_eq!(class, Classification::Constant);
        assert_eq!(best.distance, 0.0);
    }

    #[test]
    fn rotated_junction_is_in_the_family() {
        let pot = symmetric_product_well();
        let c = costs(&pot);
        let m = make_junction_map(junction_angles(c[0], c[1], c[2]).unwrap(), 37f64.to_radians(), [0, 1, 2]);
        let f = unit(512, |x| m.label_at(x), &pot);
        let (d, best) = distance_to_a(&f, &pot, c, 720).unwrap();
        assert!(d < 0.02, "{d}");
        assert!((best.rotation - m.rotation).abs() <= TAU / 720.0 + 1e-9, "{}", best.rotation);
    }

    #[test]
    fn summary_and_csv() {
        let pot = symmetric_product_well();
        let f = unit(64, |_| 1, &pot);
        let r = classify_blowdown(&f, &pot, costs(&pot), &[0.25, 0.5, 0.9], &ClassifyOptions::default()).unwrap();
        assert!(r.summary().contains("classification = \"constant\""));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
