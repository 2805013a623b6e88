//! Triple-well potentials `W: R² → [0, ∞)` with analytic derivatives.
//!
//! Two families are provided. The default is the scaled product of squared
//! distances to the wells,
//!
//! ```text
//! W(u) = s · |u − p₁|² · |u − p₂|² · |u − p₃|²,
//! ```
//!
//! which vanishes exactly at the wells, has positive-definite Hessians there
//! and grows like `|u|⁶`. The perturbed family multiplies it by a smooth
//! positive factor `1 + ε·Σ w_ℓ exp(−|u − p_ℓ|²/σ²)` to break symmetry.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Number of ray directions used when estimating the convexity radius.
const CONVEXITY_RAYS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Product,
    /// Product well times `1 + eps · Σ weights[ℓ] · exp(−|u − p_ℓ|² / width²)`.
    Perturbed {
        eps: f64,
        weights: [f64; 3],
        width: f64,
    },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Product => "product",
            Family::Perturbed { .. } => "perturbed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    wells: [Point; 3],
    scale: f64,
    family: Family,
    convexity_radius: f64,
    hessian_floor: f64,
}

/// Builds the default product-of-squared-distances potential.
pub fn make_product_well(p1: Point, p2: Point, p3: Point, scale: f64) -> Result<Potential> {
    Potential::new([p1, p2, p3], scale, Family::Product)
}

/// Wells of the symmetric unit configuration: the cube roots of unity.
pub fn symmetric_wells() -> [Point; 3] {
    let s = 3f64.sqrt() / 2.0;
    [
        Point::new(1.0, 0.0),
        Point::new(-0.5, s),
        Point::new(-0.5, -s),
    ]
}

/// The symmetric unit product well used throughout the tests and examples.
pub fn symmetric_product_well() -> Potential {
    let [a, b, c] = symmetric_wells();
    make_product_well(a, b, c, 1.0).expect("symmetric wells are distinct")
}

impl Potential {
    pub fn new(wells: [Point; 3], scale: f64, family: Family) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParams(format!("scale must be positive, got {scale}")));
        }
        for w in &wells {
            if !(w.x.is_finite() && w.y.is_finite()) {
                return Err(Error::InvalidWells("non-finite well coordinate".into()));
            }
        }
        let dmin = min_pairwise_distance(&wells);
        if dmin <= 1e-12 {
            return Err(Error::InvalidWells(format!(
                "wells must be pairwise distinct (minimal separation {dmin:.3e})"
            )));
        }
        if let Family::Perturbed { eps, weights, width } = family {
            if !(width.is_finite() && width > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidParams("perturbation width must be positive".into()));
            }
            let worst: f64 = weights.iter().map(|w| (eps * w).min(0.0)).sum();
            if 1.0 + worst <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "perturbation factor can vanish (1 + min = {:.3e})",
                    1.0 + worst
                )));
            }
        }
        let mut pot = Potential {
            wells,
            scale,
            family,
            convexity_radius: 0.0,
            hessian_floor: 0.0,
        };
        pot.hessian_floor = pot
            .wells
            .iter()
            .map(|p| min_eigenvalue(&pot.hess(p)))
            .fold(f64::INFINITY, f64::min);
        pot.convexity_radius = pot.estimate_convexity_radius();
        Ok(pot)
    }

    pub fn wells(&self) -> &[Point; 3] {
        &self.wells
    }

    pub fn well(&self, l: usize) -> Point {
        self.wells[l]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn convexity_radius(&self) -> f64 {
        self.convexity_radius
    }

    pub fn hessian_floor(&self) -> f64 {
        self.hessian_floor
    }

    pub fn centroid(&self) -> Point {
        (self.wells[0] + self.wells[1] + self.wells[2]) / 3.0
    }

    pub fn min_well_separation(&self) -> f64 {
        min_pairwise_distance(&self.wells)
    }

    /// Same wells and family with the overall scale multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Potential> {
        Potential::new(self.wells, self.scale * factor, self.family)
    }

    /// Index of the nearest well.
    pub fn nearest_well(&self, u: &Point) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (l, p) in self.wells.iter().enumerate() {
            let d = (u - p).norm_squared();
            if d < dist {
                dist = d;
                best = l;
            }
        }
        best
    }

    pub fn eval(&self, u: &Point) -> f64 {
        let (f, _, _) = self.product_parts(u);
        let base = self.scale * f[0] * f[1] * f[2];
        match self.family {
            Family::Product => base,
            Family::Perturbed { eps, weights, width } => {
                let (q, _, _) = bumps(&self.wells, &weights, width, u);
                base * (1.0 + eps * q)
            }
        }
    }

    pub fn grad(&self, u: &Point) -> Point {
        let (f, g, _) = self.product_parts(u);
        let prod_grad = g[0] * (f[1] * f[2]) + g[1] * (f[0] * f[2]) + g[2] * (f[0] * f[1]);
        match self.family {
            Family::Product => prod_grad * self.scale,
            Family::Perturbed { eps, weights, width } => {
                let (q, dq, _) = bumps(&self.wells, &weights, width, u);
                let prod = f[0] * f[1] * f[2];
                (prod_grad * (1.0 + eps * q) + dq * (eps * prod)) * self.scale
            }
        }
    }

    pub fn hess(&self, u: &Point) -> Mat2 {
        let (f, g, _) = self.product_parts(u);
        let two = Mat2::identity() * 2.0;
        let mut h = two * (f[1] * f[2] + f[0] * f[2] + f[0] * f[1]);
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    let c = 3 - a - b;
                    h += g[a] * g[b].transpose() * f[c];
                }
            }
        }
        match self.family {
            Family::Product => h * self.scale,
            Family::Perturbed { eps, weights, width } => {
                let (q, dq, d2q) = bumps(&self.wells, &weights, width, u);
                let prod = f[0] * f[1] * f[2];
                let pg = g[0] * (f[1] * f[2]) + g[1] * (f[0] * f[2]) + g[2] * (f[0] * f[1]);
                let cross = pg * dq.transpose() + dq * pg.transpose();
                (h * (1.0 + eps * q) + cross * eps + d2q * (eps * prod)) * self.scale
            }
        }
    }

    /// Upper bound of the Hessian spectral norm over the ball `|u − centroid| ≤ radius`,
    /// estimated on a polar sample.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        let c = self.centroid();
        let mut best: f64 = 0.0;
        for i in 0..=24 {
            let r = radius * i as f64 / 24.0;
            for k in 0..48 {
                let th = std::f64::consts::TAU * k as f64 / 48.0;
                let u = c + Point::new(r * th.cos(), r * th.sin());
                let h = self.hess(&u);
                let e = h.symmetric_eigenvalues();
                best = best.max(e[0].abs()).max(e[1].abs());
            }
        }
        for p in &self.wells {
            let e = self.hess(p).symmetric_eigenvalues();
            best = best.max(e[0].abs()).max(e[1].abs());
        }
        best
    }

    /// `f_ℓ = |u − p_ℓ|²` and `∇f_ℓ = 2(u − p_ℓ)`.
    fn product_parts(&self, u: &Point) -> ([f64; 3], [Point; 3], ()) {
        let d = [u - self.wells[0], u - self.wells[1], u - self.wells[2]];
        (
            [d[0].norm_squared(), d[1].norm_squared(), d[2].norm_squared()],
            [d[0] * 2.0, d[1] * 2.0, d[2] * 2.0],
            (),
        )
    }

    fn estimate_convexity_radius(&self) -> f64 {
        let reach = 0.5 * self.min_well_separation();
        let steps = 400;
        let dr = reach / steps as f64;
        let mut radius = reach;
        for p in &self.wells {
            for k in 0..CONVEXITY_RAYS {
                let th = std::f64::consts::TAU * (k as f64 + 0.5) / CONVEXITY_RAYS as f64;
                let dir = Point::new(th.cos(), th.sin());
                let psd = |r: f64| min_eigenvalue(&self.hess(&(p + dir * r))) >= 0.0;
                // first sampled failure along the ray, then bisect the bracket
                let mut hit = None;
                for i in 1..=steps {
                    let r = dr * i as f64;
                    if r >= radius {
                        break;
                    }
                    if !psd(r) {
                        hit = Some(r);
                        break;
                    }
                }
                if let Some(r_bad) = hit {
                    let (mut lo, mut hi) = (r_bad - dr, r_bad);
                    for _ in 0..50 {
                        let mid = 0.5 * (lo + hi);
                        if psd(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    radius = radius.min(lo);
                }
            }
        }
        radius
    }

    /// Full validation of the standing hypotheses on a sample.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&ValidationThresholds::default())
    }

    pub fn validate_with(&self, th: &ValidationThresholds) -> ValidationReport {
        let tol = 1e-10;
        let wells_are_zeros = self
            .wells
            .iter()
            .all(|p| self.eval(p).abs() <= tol && self.grad(p).norm() <= tol);

        // radial monotonicity p·∇W ≥ 0 beyond M
        let reach = self.wells.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let r_max = 4.0 * reach.max(1.0);
        let n_r = 400;
        let mut last_bad: f64 = 0.0;
        for k in 0..64 {
            let th = std::f64::consts::TAU * k as f64 / 64.0;
            let dir = Point::new(th.cos(), th.sin());
            for i in 1..=n_r {
                let r = r_max * i as f64 / n_r as f64;
                let u = dir * r;
                if u.dot(&self.grad(&u)) < 0.0 {
                    last_bad = last_bad.max(r);
                }
            }
        }
        let growth_radius = last_bad + r_max / n_r as f64;
        let growth_ok = growth_radius < r_max;

        // positivity away from the wells
        let excl = 1e-3 * self.min_well_separation();
        let mut positivity_violations = 0usize;
        let n = 201;
        for i in 0..n {
            for j in 0..n {
                let u = Point::new(
                    -r_max / 2.0 + r_max * i as f64 / (n - 1) as f64,
                    -r_max / 2.0 + r_max * j as f64 / (n - 1) as f64,
                );
                let near_well = self.wells.iter().any(|p| (u - p).norm() < excl);
                if !near_well && self.eval(&u) <= 0.0 {
                    positivity_violations += 1;
                }
            }
        }

        let hessian_ok = self.hessian_floor >= th.min_hessian_floor;
        let convexity_ok = self.convexity_radius > 0.0;
        ValidationReport {
            wells_are_zeros,
            hessian_floor: self.hessian_floor,
            hessian_ok,
            growth_radius,
            growth_ok,
            convexity_radius: self.convexity_radius,
            convexity_ok,
            positivity_violations,
            triangle: None,
        }
    }

    pub fn to_config(&self) -> PotentialConfig {
        let (eps, weights, width) = match self.family {
            Family::Product => (None, None, None),
            Family::Perturbed { eps, weights, width } => (Some(eps), Some(weights), Some(width)),
        };
        PotentialConfig {
            family: self.family.tag().to_string(),
            wells: self.wells.map(|p| [p.x, p.y]),
            scale: self.scale,
            eps,
            weights,
            width,
        }
    }

    pub fn from_config(cfg: &PotentialConfig) -> Result<Self> {
        let wells = cfg.wells.map(|[x, y]| Point::new(x, y));
        let family = match cfg.family.as_str() {
            "product" => Family::Product,
            "perturbed" => Family::Perturbed {
                eps: cfg.eps.unwrap_or(0.0),
                weights: cfg.weights.unwrap_or([0.0; 3]),
                width: cfg.width.unwrap_or(1.0),
            },
            other => {
                return Err(Error::InvalidParams(format!("unknown potential family `{other}`")))
            }
        };
        Potential::new(wells, cfg.scale, family)
    }

    /// Renders the potential as a `[potential]` config section.
    pub fn to_section(&self) -> String {
        let body = toml::to_string(&self.to_config()).expect("potential config serializes");
        format!("[potential]\n{body}")
    }

    /// Parses a document containing a `[potential]` section.
    pub fn from_section(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            potential: PotentialConfig,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse {
            offset: e.span().map(|s| s.start).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        Potential::from_config(&doc.potential)
    }
}

/// Serialized form of a potential (one config section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub family: String,
    pub wells: [[f64; 2]; 3],
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        symmetric_product_well().to_config()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationThresholds {
    pub min_hessian_floor: f64,
}

impl Default for ValidationThresholds {
    fn default() -> Self {
        ValidationThresholds { min_hessian_floor: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriangleStatus {
    /// All three strict inequalities hold with relative slack above the margin.
    Strict { min_slack: f64 },
    /// Holds, but the smallest relative slack is within the margin.
    Marginal { min_slack: f64 },
    Violated { min_slack: f64 },
}

impl TriangleStatus {
    pub const MARGIN: f64 = 1e-2;

    pub fn classify(c12: f64, c13: f64, c23: f64) -> Self {
        let slack = [
            (c13 + c23 - c12) / c12,
            (c12 + c23 - c13) / c13,
            (c12 + c13 - c23) / c23,
        ];
        let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
        if min_slack <= 0.0 {
            TriangleStatus::Violated { min_slack }
        } else if min_slack <= Self::MARGIN {
            TriangleStatus::Marginal { min_slack }
        } else {
            TriangleStatus::Strict { min_slack }
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, TriangleStatus::Strict { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub wells_are_zeros: bool,
    pub hessian_floor: f64,
    pub hessian_ok: bool,
    /// Sampled `M` beyond which `p·∇W(p) ≥ 0`.
    pub growth_radius: f64,
    pub growth_ok: bool,
    pub convexity_radius: f64,
    pub convexity_ok: bool,
    pub positivity_violations: usize,
    /// Filled in from the geodesic costs, see [`crate::geodesics::pairwise_costs`].
    pub triangle: Option<TriangleStatus>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.wells_are_zeros
            && self.hessian_ok
            && self.growth_ok
            && self.convexity_ok
            && self.positivity_violations == 0
            && self.triangle.map(|t| t.is_strict()).unwrap_or(true)
    }
}

pub fn min_eigenvalue(m: &Mat2) -> f64 {
    let e = m.symmetric_eigenvalues();
    e[0].min(e[1])
}

fn min_pairwise_distance(wells: &[Point; 3]) -> f64 {
    let d = [
        (wells[0] - wells[1]).norm(),
        (wells[0] - wells[2]).norm(),
        (wells[1] - wells[2]).norm(),
    ];
    d[0].min(d[1]).min(d[2])
}

/// `q = Σ w_ℓ g_ℓ` with Gaussian bumps centred at the wells; value, gradient, Hessian.
fn bumps(wells: &[Point; 3], weights: &[f64; 3], width: f64, u: &Point) -> (f64, Point, Mat2) {
    let s2 = width * width;
    let mut q = 0.0;
    let mut dq = Point::zeros();
    let mut d2q = Mat2::zeros();
    for (p, w) in wells.iter().zip(weights) {
        let d = u - p;
        let g = (-d.norm_squared() / s2).exp() * w;
        q += g;
        dq += d * (-2.0 * g / s2);
        d2q += (d * d.transpose() * (4.0 / (s2 * s2)) - Mat2::identity() * (2.0 / s2)) * g;
    }
    (q, dq, d2q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd_grad(pot: &Potential, u: &Point, h: f64) -> Point {
        let ex = Point::new(h, 0.0);
        let ey = Point::new(0.0, h);
        Point::new(
            (pot.eval(&(u + ex)) - pot.eval(&(u - ex))) / (2.0 * h),
            (pot.eval(&(u + ey)) - pot.eval(&(u - ey))) / (2.0 * h),
        )
    }

    fn fd_hess(pot: &Potential, u: &Point, h: f64) -> Mat2 {
        let ex = Point::new(h, 0.0);
        let ey = Point::new(0.0, h);
        let cx = (pot.grad(&(u + ex)) - pot.grad(&(u - ex))) / (2.0 * h);
        let cy = (pot.grad(&(u + ey)) - pot.grad(&(u - ey))) / (2.0 * h);
        Mat2::new(cx.x, cy.x, cx.y, cy.y)
    }

    fn perturbed() -> Potential {
        Potential::new(
            symmetric_wells(),
            1.0,
            Family::Perturbed { eps: 0.3, weights: [1.0, -0.5, 0.25], width: 0.7 },
        )
        .unwrap()
    }

    #[test]
    fn symmetric_values() {
        let pot = symmetric_product_well();
        assert_eq!(pot.eval(&pot.well(0)), 0.0);
        assert_abs_diff_eq!(pot.eval(&pot.well(1)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pot.eval(&Point::zeros()), 1.0, epsilon = 1e-14);
        // (2,0): |·−p1|² = 1, |·−p2|² = 6.25 + 0.75 = 7, same for p3
        assert_abs_diff_eq!(pot.eval(&Point::new(2.0, 0.0)), 49.0, epsilon = 1e-12);
        assert!(pot.grad(&Point::zeros()).norm() < 1e-14);
    }

    #[test]
    fn hessian_at_well_is_18_identity() {
        let pot = symmetric_product_well();
        let h = pot.hess(&pot.well(0));
        assert_abs_diff_eq!(h, Mat2::identity() * 18.0, epsilon = 1e-12);
        let fd = fd_hess(&pot, &pot.well(0), 1e-5);
        assert_abs_diff_eq!(fd, Mat2::identity() * 18.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pot.hessian_floor(), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for pot in [symmetric_product_well(), perturbed()] {
            for k in 0..40 {
                let th = 0.37 * k as f64;
                let r = 0.2 + 0.05 * k as f64;
                let u = Point::new(r * th.cos(), r * th.sin());
                let g = pot.grad(&u);
                let fd = fd_grad(&pot, &u, 1e-5);
                let scale = 1.0 + g.norm();
                assert!((g - fd).norm() <= 1e-6 * scale, "grad mismatch at {u:?}");
                let h = pot.hess(&u);
                assert_abs_diff_eq!(h[(0, 1)], h[(1, 0)], epsilon = 1e-10);
                let fdh = fd_hess(&pot, &u, 1e-5);
                assert!((h - fdh).norm() <= 1e-5 * (1.0 + h.norm()), "hess mismatch at {u:?}");
            }
        }
    }

    #[test]
    fn rotation_symmetry() {
        let pot = symmetric_product_well();
        let rot = nalgebra::Rotation2::new(std::f64::consts::TAU / 3.0);
        for k in 0..50 {
            let u = Point::new(0.1 * k as f64 - 2.0, 0.05 * k as f64 - 1.0);
            let ru = rot * u;
            assert!((pot.eval(&u) - pot.eval(&ru)).abs() <= 1e-12 * (1.0 + pot.eval(&u)));
        }
    }

    #[test]
    fn coincident_wells_rejected() {
        let p = Point::new(1.0, 0.0);
        assert!(matches!(
            make_product_well(p, p, Point::new(0.0, 1.0), 1.0),
            Err(Error::InvalidWells(_))
        ));
    }

    #[test]
    fn validation_passes_for_symmetric_well() {
        let pot = symmetric_product_well();
        let rep = pot.validate();
        assert!(rep.all_ok(), "{rep:?}");
        assert!(rep.convexity_radius > 0.05 && rep.convexity_radius < 0.87);
    }

    #[test]
    fn nearly_degenerate_well_is_flagged() {
        // the bump at p1 nearly cancels the factor there
        let pot = Potential::new(
            symmetric_wells(),
            1.0,
            Family::Perturbed { eps: 1.0, weights: [-0.99999, 0.0, 0.0], width: 0.3 },
        )
        .unwrap();
        let rep = pot.validate();
        assert!(!rep.hessian_ok);
        assert!(rep.hessian_floor < 1e-3);
        assert!(!rep.all_ok());
    }

    #[test]
    fn convexity_radius_is_conservative() {
        let pot = perturbed();
        let beta = pot.convexity_radius();
        for p in pot.wells() {
            for k in 0..90 {
                let th = std::f64::consts::TAU * k as f64 / 90.0;
                let u = p + Point::new(th.cos(), th.sin()) * (0.98 * beta);
                assert!(min_eigenvalue(&pot.hess(&u)) > -1e-9);
            }
        }
    }

    #[test]
    fn section_round_trip() {
        let pot = perturbed();
        let text = pot.to_section();
        let back = Potential::from_section(&text).unwrap();
        assert_eq!(back, pot);
    }

    #[test]
    fn triangle_classification() {
        assert!(TriangleStatus::classify(1.0, 1.0, 1.0).is_strict());
        assert!(matches!(
            TriangleStatus::classify(2.0, 1.0, 1.0),
            TriangleStatus::Violated { .. }
        ));
        assert!(matches!(
            TriangleStatus::classify(1.995, 1.0, 1.0),
            TriangleStatus::Marginal { .. }
        ));
    }
}
