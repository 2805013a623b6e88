//! Degenerate-metric geodesics, heteroclinic profiles and the curve they form.
//!
//! Distances use the conformal weight `φ(u) = √(2W(u))`. Paths are relaxed
//! with a preconditioned descent on the discrete weighted length and
//! reparametrised to equal Euclidean arclength after every step. Heteroclinic
//! profiles minimise the truncated action `∫ ½|f'|² + W(f)` with clamped ends.

use std::io::Write;
use std::path::Path;

use rand::RngExt;

use crate::error::{Error, Result};
use crate::numerics::{hermite_uniform, linear_fit, solve_block_tridiagonal_spd, solve_tridiagonal};
use crate::potential::{Mat2, Point, Potential, TriangleStatus};
use crate::rng::seeded;

/// Resolution used for the cost computations unless stated otherwise.
pub const DEFAULT_PATH_RESOLUTION: usize = 256;
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;
pub const DEFAULT_PROFILE_SAMPLES: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub points: Vec<Point>,
    pub length: f64,
}

impl PathSample {
    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("non-empty path")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub max_iter: usize,
    /// Relative length decrease below which the relaxation stops.
    pub rel_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { max_iter: 4000, rel_tol: 1e-14 }
    }
}

fn weight(pot: &Potential, u: &Point) -> f64 {
    (2.0 * pot.eval(u)).max(0.0).sqrt()
}

fn weight_grad(pot: &Potential, u: &Point) -> Point {
    let w = pot.eval(u);
    if w <= 0.0 {
        Point::zeros()
    } else {
        pot.grad(u) / (2.0 * w).sqrt()
    }
}

/// Discrete weighted length `Σ φ(midpoint)·|segment|`.
pub fn discrete_length(pot: &Potential, points: &[Point]) -> f64 {
    points
        .windows(2)
        .map(|w| weight(pot, &((w[0] + w[1]) * 0.5)) * (w[1] - w[0]).norm())
        .sum()
}

/// Resamples a polyline to `segments` pieces of equal Euclidean length.
pub fn reparametrize(points: &[Point], segments: usize) -> Vec<Point> {
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    let first = points[0];
    let last = *points.last().unwrap();
    if total <= 0.0 {
        return vec![first; segments + 1];
    }
    let mut out = Vec::with_capacity(segments + 1);
    out.push(first);
    let mut k = 0;
    for i in 1..segments {
        let s = total * i as f64 / segments as f64;
        while k + 1 < cum.len() - 1 && cum[k + 1] < s {
            k += 1;
        }
        let span = cum[k + 1] - cum[k];
        let a = if span > 0.0 { (s - cum[k]) / span } else { 0.0 };
        out.push(points[k] + (points[k + 1] - points[k]) * a);
    }
    out.push(last);
    out
}

/// Relaxes an initial polyline towards a locally length-minimising path with
/// fixed endpoints.
pub fn relax_path(pot: &Potential, init: &[Point], opts: PathOptions) -> Result<PathSample> {
    let n = init.len() - 1;
    let mut pts = reparametrize(init, n);
    let mut len = discrete_length(pot, &pts);
    let m = n - 1;
    for it in 0..opts.max_iter {
        let mut phi = Vec::with_capacity(n);
        let mut dphi = Vec::with_capacity(n);
        let mut elen = Vec::with_capacity(n);
        let mut edir = Vec::with_capacity(n);
        for k in 0..n {
            let e = pts[k + 1] - pts[k];
            let mid = (pts[k] + pts[k + 1]) * 0.5;
            let l = e.norm().max(1e-300);
            phi.push(weight(pot, &mid));
            dphi.push(weight_grad(pot, &mid));
            elen.push(l);
            edir.push(e / l);
        }
        let mut gx = vec![0.0; m];
        let mut gy = vec![0.0; m];
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let a: Vec<f64> = (0..n).map(|k| phi[k] / elen[k]).collect();
        let amax = a.iter().copied().fold(0.0, f64::max);
        for i in 0..m {
            let k = i + 1;
            let g = dphi[k - 1] * (0.5 * elen[k - 1]) + edir[k - 1] * phi[k - 1]
                + dphi[k] * (0.5 * elen[k])
                - edir[k] * phi[k];
            gx[i] = -g.x;
            gy[i] = -g.y;
            diag[i] = a[k - 1] + a[k] + 1e-12 * amax + 1e-300;
            lower[i] = -a[k - 1];
            upper[i] = -a[k];
        }
        let dx = solve_tridiagonal(&lower, &diag, &upper, &gx);
        let dy = solve_tridiagonal(&lower, &diag, &upper, &gy);
        let (dx, dy) = match (dx, dy) {
            (Some(x), Some(y)) => (x, y),
            _ => break,
        };
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-10 {
            let mut trial = pts.clone();
            for i in 0..m {
                trial[i + 1] += Point::new(dx[i], dy[i]) * step;
            }
            let trial = reparametrize(&trial, n);
            let tl = discrete_length(pot, &trial);
            if tl < len {
                accepted = Some((trial, tl));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            None => return Ok(PathSample { points: pts, length: len }),
            Some((trial, tl)) => {
                let rel = (len - tl) / len.max(1e-300);
                pts = trial;
                len = tl;
                if rel < opts.rel_tol {
                    return Ok(PathSample { points: pts, length: len });
                }
            }
        }
        if it + 1 == opts.max_iter {
            break;
        }
    }
    Err(Error::PathConvergence {
        iterations: opts.max_iter,
        last: Box::new(PathSample { points: pts, length: len }),
    })
}

/// Discrete approximation of the degenerate-metric distance `d(p, q)` from a
/// relaxed path with `n` segments, initialised as the straight segment.
pub fn metric_distance(pot: &Potential, p: Point, q: Point, n: usize) -> Result<PathSample> {
    if n < 8 {
        return Err(Error::InvalidParams(format!("path resolution must be ≥ 8, got {n}")));
    }
    if (p - q).norm() == 0.0 {
        return Ok(PathSample { points: vec![p; n + 1], length: 0.0 });
    }
    let init: Vec<Point> = (0..=n).map(|k| p + (q - p) * (k as f64 / n as f64)).collect();
    relax_path(pot, &init, PathOptions::default())
}

#[derive(Debug, Clone)]
pub struct PairwiseCosts {
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    pub triangle: TriangleStatus,
    /// Relaxed paths for the pairs (1,2), (1,3), (2,3).
    pub paths: [PathSample; 3],
}

impl PairwiseCosts {
    /// `c_ij` for zero-based well indices.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.c12,
            (0, 2) => self.c13,
            (1, 2) => self.c23,
            _ => 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c12, self.c13, self.c23]
    }
}

pub fn pairwise_costs(pot: &Potential) -> Result<PairwiseCosts> {
    pairwise_costs_with(pot, DEFAULT_PATH_RESOLUTION)
}

pub fn pairwise_costs_with(pot: &Potential, n: usize) -> Result<PairwiseCosts> {
    let w = pot.wells();
    let p12 = metric_distance(pot, w[0], w[1], n)?;
    let p13 = metric_distance(pot, w[0], w[2], n)?;
    let p23 = metric_distance(pot, w[1], w[2], n)?;
    let (c12, c13, c23) = (p12.length, p13.length, p23.length);
    Ok(PairwiseCosts {
        c12,
        c13,
        c23,
        triangle: TriangleStatus::classify(c12, c13, c23),
        paths: [p12, p13, p23],
    })
}

/// Validation report of the potential completed with the triangle status.
pub fn validate_with_costs(pot: &Potential) -> Result<crate::potential::ValidationReport> {
    let mut rep = pot.validate();
    rep.triangle = Some(pairwise_costs(pot)?.triangle);
    Ok(rep)
}

/// One-sided distance from `p` to a polyline.
fn point_polyline_distance(p: &Point, line: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for w in line.windows(2) {
        best = best.min(point_segment_distance(p, &w[0], &w[1]));
    }
    if line.len() == 1 {
        best = (p - line[0]).norm();
    }
    best
}

pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn hausdorff_polyline(a: &[Point], b: &[Point]) -> f64 {
    let ab = a.iter().map(|p| point_polyline_distance(p, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| point_polyline_distance(p, a)).fold(0.0, f64::max);
    ab.max(ba)
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub trials: usize,
    /// Largest Hausdorff distance between a perturbed relaxation and the baseline.
    pub max_hausdorff: f64,
    pub unique: bool,
}

/// Relaxes `trials` randomly bent initial paths and compares them to the
/// straight-start geodesic. Paths further apart than `1e-3` flag non-uniqueness.
pub fn uniqueness_check(
    pot: &Potential,
    i: usize,
    j: usize,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let (p, q) = (pot.well(i), pot.well(j));
    let base = metric_distance(pot, p, q, n)?;
    let mut rng = seeded(seed);
    let chord = q - p;
    let normal = Point::new(-chord.y, chord.x);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let amps: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..0.3)).collect();
        let init: Vec<Point> = (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                let bend: f64 = amps
                    .iter()
                    .enumerate()
                    .map(|(m, a)| a * (std::f64::consts::PI * (m + 1) as f64 * s).sin())
                    .sum();
                p + chord * s + normal * bend
            })
            .collect();
        let relaxed = match relax_path(pot, &init, PathOptions::default()) {
            Ok(r) => r,
            Err(Error::PathConvergence { last, .. }) => *last,
            Err(e) => return Err(e),
        };
        worst = worst.max(hausdorff_polyline(&relaxed.points, &base.points));
    }
    Ok(UniquenessReport { trials, max_hausdorff: worst, unique: worst <= 1e-3 })
}

/// Result of the clamped 1D action minimisation.
#[derive(Debug, Clone)]
pub struct ClampedSolution {
    /// All nodes including the clamped ends.
    pub values: Vec<Point>,
    pub energy: f64,
    /// Energy after every accepted iteration, starting with the initial guess.
    pub history: Vec<f64>,
    pub residual: f64,
}

/// Discrete action `Σ ½|Δf|²/dt + Σ W(f_k)·dt` (trapezoid weights at the ends).
pub fn discrete_action(pot: &Potential, values: &[Point], dt: f64) -> f64 {
    let n = values.len();
    let kinetic: f64 = values.windows(2).map(|w| (w[1] - w[0]).norm_squared()).sum::<f64>() * 0.5 / dt;
    let mut potential: f64 = values[1..n - 1].iter().map(|v| pot.eval(v)).sum();
    potential += 0.5 * (pot.eval(&values[0]) + pot.eval(&values[n - 1]));
    kinetic + potential * dt
}

fn ode_residual(pot: &Potential, values: &[Point], dt: f64) -> f64 {
    let mut r: f64 = 0.0;
    for k in 1..values.len() - 1 {
        let lap = (values[k + 1] - values[k] * 2.0 + values[k - 1]) / (dt * dt);
        r = r.max((lap - pot.grad(&values[k])).norm());
    }
    r
}

/// Minimises the discrete action with both ends clamped using damped Newton
/// steps on the block-tridiagonal Hessian. Every accepted step lowers the energy.
pub fn solve_clamped(pot: &Potential, init: Vec<Point>, dt: f64, tol: f64, max_iter: usize) -> Result<ClampedSolution> {
    let n = init.len();
    if n < 3 {
        return Err(Error::InvalidParams("clamped solve needs at least three nodes".into()));
    }
    let mut f = init;
    let mut energy = discrete_action(pot, &f, dt);
    let mut residual = ode_residual(pot, &f, dt);
    let mut history = vec![energy];
    let mut mu = dt;
    let off = -1.0 / dt;
    let mut it = 0;
    while residual > tol {
        if it >= max_iter {
            return Err(Error::Convergence { what: "heteroclinic solve", iterations: it, residual });
        }
        it += 1;
        let m = n - 2;
        let mut diag = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for k in 1..n - 1 {
            let g = (f[k] * 2.0 - f[k - 1] - f[k + 1]) / dt + pot.grad(&f[k]) * dt;
            rhs.push(-g);
            diag.push(Mat2::identity() * (2.0 / dt + mu) + pot.hess(&f[k]) * dt);
        }
        let step = solve_block_tridiagonal_spd(&diag, off, &rhs);
        let Some(d) = step else {
            mu *= 10.0;
            continue;
        };
        let mut trial = f.clone();
        for (k, dk) in d.iter().enumerate() {
            trial[k + 1] += dk;
        }
        let te = discrete_action(pot, &trial, dt);
        let tr = ode_residual(pot, &trial, dt);
        let roundoff = 1e-14 * energy.abs().max(1.0);
        if te < energy || (te <= energy + roundoff && tr < residual) {
            f = trial;
            energy = te.min(energy);
            residual = tr;
            history.push(energy);
            mu = (mu * 0.1).max(1e-14 * dt);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                return Err(Error::Convergence { what: "heteroclinic solve", iterations: it, residual });
            }
        }
    }
    Ok(ClampedSolution { values: f, energy, history, residual })
}

/// Sampled heteroclinic connection `ζ_ij` on a uniform grid of `[−T, T]`,
/// translated so that `W(ζ)` peaks at `t = 0`.
#[derive(Debug, Clone)]
pub struct HeteroclinicProfile {
    pub samples: Vec<(f64, Point)>,
    pub energy: f64,
    pub decay_rate: f64,
    pub pair: (usize, usize),
    pub convexity_radius: f64,
    /// Time at which the accumulated action reaches half the total.
    pub metric_midpoint: f64,
}

impl HeteroclinicProfile {
    pub fn half_width(&self) -> f64 {
        -self.samples[0].0
    }

    pub fn dt(&self) -> f64 {
        self.samples[1].0 - self.samples[0].0
    }

    pub fn values(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn start(&self) -> Point {
        self.samples[0].1
    }

    pub fn end(&self) -> Point {
        self.samples.last().unwrap().1
    }

    /// Cubic interpolation; constant extension beyond the sampled window.
    pub fn eval(&self, t: f64) -> Point {
        let values = self.values();
        hermite_uniform(&values, self.samples[0].0, self.dt(), t)
    }

    /// Profile pinned at the metric midpoint instead of the potential peak.
    pub fn eval_from_midpoint(&self, t: f64) -> Point {
        self.eval(t + self.metric_midpoint)
    }

    /// Max over interior samples of `|½|ζ'|² − W(ζ)|` with centred differences.
    pub fn first_integral_defect(&self, pot: &Potential) -> f64 {
        let dt = self.dt();
        let mut worst: f64 = 0.0;
        for k in 1..self.samples.len() - 1 {
            let d = (self.samples[k + 1].1 - self.samples[k - 1].1) / (2.0 * dt);
            let w = pot.eval(&self.samples[k].1);
            worst = worst.max((0.5 * d.norm_squared() - w).abs());
        }
        worst
    }

    /// Writes `t,u1,u2,W,half_speed_sq`.
    pub fn write_csv(&self, pot: &Potential, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "u1", "u2", "W", "half_speed_sq"])?;
        let dt = self.dt();
        let n = self.samples.len();
        for k in 0..n {
            let d = if k == 0 {
                (self.samples[1].1 - self.samples[0].1) / dt
            } else if k == n - 1 {
                (self.samples[n - 1].1 - self.samples[n - 2].1) / dt
            } else {
                (self.samples[k + 1].1 - self.samples[k - 1].1) / (2.0 * dt)
            };
            let (t, u) = self.samples[k];
            w.write_record([
                t.to_string(),
                u.x.to_string(),
                u.y.to_string(),
                pot.eval(&u).to_string(),
                (0.5 * d.norm_squared()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Computes `ζ_ij` by minimising the clamped action on `[−1.5T, 1.5T]`
/// (initialised from the relaxed geodesic) and resampling the solution on
/// `n` intervals of `[−T, T]` around the peak of `W`.
pub fn heteroclinic(pot: &Potential, i: usize, j: usize, half_width: f64, n: usize) -> Result<HeteroclinicProfile> {
    if i > 2 || j > 2 || i == j {
        return Err(Error::InvalidParams(format!("invalid well pair ({i}, {j})")));
    }
    if n < 16 || !(half_width > 0.0) {
        return Err(Error::InvalidParams("need n ≥ 16 and a positive half-width".into()));
    }
    let (p, q) = (pot.well(i), pot.well(j));
    let path = metric_distance(pot, p, q, DEFAULT_PATH_RESOLUTION)?;

    // traversal times dt = ds/φ along the geodesic, zero at the W-maximum
    let mut tau = vec![0.0];
    for w in path.points.windows(2) {
        let mid = (w[0] + w[1]) * 0.5;
        let phi = weight(pot, &mid).max(1e-12);
        let last = *tau.last().unwrap();
        tau.push(last + (w[1] - w[0]).norm() / phi);
    }
    let kmax = (0..path.points.len())
        .max_by(|a, b| pot.eval(&path.points[*a]).total_cmp(&pot.eval(&path.points[*b])))
        .unwrap();
    let t0 = tau[kmax];
    let along = |t: f64| -> Point {
        let s = t + t0;
        if s <= tau[0] {
            return path.points[0];
        }
        let last = tau.len() - 1;
        if s >= tau[last] {
            return path.points[last];
        }
        let k = tau.partition_point(|v| *v <= s) - 1;
        let a = (s - tau[k]) / (tau[k + 1] - tau[k]);
        path.points[k] + (path.points[k + 1] - path.points[k]) * a
    };

    let dt = 2.0 * half_width / n as f64;
    let ext = (0.75 * n as f64).ceil() as usize;
    let n_ext = n + 2 * (ext / 2);
    let t_start = -(n_ext as f64) * dt / 2.0;
    let mut init: Vec<Point> = (0..=n_ext).map(|k| along(t_start + k as f64 * dt)).collect();
    init[0] = p;
    init[n_ext] = q;
    let sol = solve_clamped(pot, init, dt, 1e-9, 400)?;

    // sub-grid location of the W-peak
    let w: Vec<f64> = sol.values.iter().map(|v| pot.eval(v)).collect();
    let k = (1..n_ext).max_by(|a, b| w[*a].total_cmp(&w[*b])).unwrap();
    let denom = w[k - 1] - 2.0 * w[k] + w[k + 1];
    let frac = if denom.abs() > 0.0 { 0.5 * (w[k - 1] - w[k + 1]) / denom } else { 0.0 };
    let t_peak = t_start + (k as f64 + frac.clamp(-0.5, 0.5)) * dt;

    let at = |t: f64| hermite_uniform(&sol.values, t_start, dt, t);
    let beta = pot.convexity_radius();
    let (lo, hi) = (at(t_peak - half_width), at(t_peak + half_width));
    if (lo - p).norm() >= beta || (hi - q).norm() >= beta {
        return Err(Error::TruncationTooSmall(format!(
            "ends at distance {:.3e}, {:.3e} from the wells exceed the convexity radius {beta:.3e}",
            (lo - p).norm(),
            (hi - q).norm()
        )));
    }
    let mut samples: Vec<(f64, Point)> = (0..=n)
        .map(|k| {
            let t = -half_width + k as f64 * dt;
            (t, at(t + t_peak))
        })
        .collect();
    samples[0].1 = p;
    samples[n].1 = q;
    let values: Vec<Point> = samples.iter().map(|s| s.1).collect();
    let energy = discrete_action(pot, &values, dt);
    let metric_midpoint = action_midpoint(pot, &samples);
    let mut profile = HeteroclinicProfile {
        samples,
        energy,
        decay_rate: f64::NAN,
        pair: (i, j),
        convexity_radius: beta,
        metric_midpoint,
    };
    profile.decay_rate = decay_rate(&profile).unwrap_or(f64::NAN);
    Ok(profile)
}

fn action_midpoint(pot: &Potential, samples: &[(f64, Point)]) -> f64 {
    let dt = samples[1].0 - samples[0].0;
    let mut cum = vec![0.0];
    for w in samples.windows(2) {
        let mid = (w[0].1 + w[1].1) * 0.5;
        let d = (w[1].1 - w[0].1) / dt;
        let density = 0.5 * d.norm_squared() + pot.eval(&mid);
        let last = *cum.last().unwrap();
        cum.push(last + density * dt);
    }
    let half = 0.5 * cum.last().unwrap();
    let k = cum.partition_point(|v| *v < half).clamp(1, cum.len() - 1);
    let a = (half - cum[k - 1]) / (cum[k] - cum[k - 1]).max(1e-300);
    samples[k - 1].0 + a * dt
}

/// Exponential approach rate to the end well, from a least-squares fit of
/// `log|ζ(t) − p_j|` over the tail inside the convexity ball.
pub fn decay_rate(profile: &HeteroclinicProfile) -> Result<f64> {
    let end = profile.end();
    let sep = (profile.start() - end).norm();
    let hi = 0.5 * profile.convexity_radius;
    let lo = 1e-10 * sep;
    let n = profile.samples.len();
    let stop = n - n / 50 - 1;
    let (ts, ls): (Vec<f64>, Vec<f64>) = profile.samples[..stop]
        .iter()
        .filter(|(t, u)| {
            let d = (u - end).norm();
            *t > 0.0 && d < hi && d > lo
        })
        .map(|(t, u)| (*t, (u - end).norm().ln()))
        .unzip();
    if ts.len() < 8 {
        return Err(Error::InsufficientTail(format!("{} samples in the tail window", ts.len())));
    }
    let fit = linear_fit(&ts, &ls);
    if fit.slope >= 0.0 {
        return Err(Error::InsufficientTail("tail is not decaying".into()));
    }
    Ok(-fit.slope)
}

/// The three connections `ζ_12, ζ_13, ζ_23` of a potential.
#[derive(Debug, Clone)]
pub struct HeteroclinicSet {
    profiles: [HeteroclinicProfile; 3],
}

impl HeteroclinicSet {
    pub fn compute(pot: &Potential, half_width: f64, n: usize) -> Result<Self> {
        Ok(HeteroclinicSet {
            profiles: [
                heteroclinic(pot, 0, 1, half_width, n)?,
                heteroclinic(pot, 0, 2, half_width, n)?,
                heteroclinic(pot, 1, 2, half_width, n)?,
            ],
        })
    }

    pub fn with_defaults(pot: &Potential) -> Result<Self> {
        Self::compute(pot, 10.0, 1024)
    }

    fn slot(i: usize, j: usize) -> usize {
        match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            (0, 2) => 1,
            _ => 2,
        }
    }

    pub fn profile(&self, i: usize, j: usize) -> &HeteroclinicProfile {
        &self.profiles[Self::slot(i, j)]
    }

    pub fn profiles(&self) -> &[HeteroclinicProfile; 3] {
        &self.profiles
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.profile(i, j).energy
    }

    pub fn costs(&self) -> [f64; 3] {
        [self.profiles[0].energy, self.profiles[1].energy, self.profiles[2].energy]
    }

    /// `ζ_ij(t)` oriented from `p_i` to `p_j`, with `t = 0` at the metric midpoint.
    pub fn eval_midpoint(&self, i: usize, j: usize, t: f64) -> Point {
        let prof = self.profile(i, j);
        if i < j {
            prof.eval_from_midpoint(t)
        } else {
            prof.eval_from_midpoint(-t)
        }
    }

    /// Largest `|t|` (from the midpoint) beyond which every profile is within
    /// `tol` of its end wells.
    pub fn transition_half_width(&self, tol: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for prof in &self.profiles {
            let (a, b) = (prof.start(), prof.end());
            for (t, u) in &prof.samples {
                let far = (u - a).norm().min((u - b).norm());
                if far > tol {
                    worst = worst.max((t - prof.metric_midpoint).abs());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct LambdaCurve {
    /// Closed polyline; the closing segment from the last point to the first is implicit.
    pub points: Vec<Point>,
    pub is_simple: bool,
}

pub fn lambda_curve(pot: &Potential) -> Result<LambdaCurve> {
    let set = HeteroclinicSet::compute(pot, DEFAULT_HALF_WIDTH, 1024)?;
    Ok(lambda_curve_from(&set))
}

/// Concatenates `ζ_12`, `ζ_23` and the reversed `ζ_13` into a closed loop.
pub fn lambda_curve_from(set: &HeteroclinicSet) -> LambdaCurve {
    let mut raw: Vec<Point> = Vec::new();
    raw.extend(set.profile(0, 1).values());
    raw.extend(set.profile(1, 2).values());
    let mut back = set.profile(0, 2).values();
    back.reverse();
    raw.extend(back);
    let diam = raw
        .iter()
        .flat_map(|a| raw.iter().step_by(64).map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let eps = 1e-4 * diam.max(1e-12);
    let mut pts: Vec<Point> = Vec::new();
    for p in raw {
        match pts.last() {
            Some(last) if (p - last).norm() < eps => {}
            _ => pts.push(p),
        }
    }
    if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() < eps {
        pts.pop();
    }
    let is_simple = is_simple_closed(&pts);
    LambdaCurve { points: pts, is_simple }
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Sweep over segments sorted by their left end; adjacent segments share a
/// vertex and are skipped.
pub fn is_simple_closed(pts: &[Point]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let seg = |k: usize| (pts[k], pts[(k + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |k: usize| pts[k].x.min(pts[(k + 1) % n].x);
    order.sort_by(|a, b| xmin(*a).total_cmp(&xmin(*b)));
    for (oi, &a) in order.iter().enumerate() {
        let (p, q) = seg(a);
        let xmax = p.x.max(q.x);
        for &b in &order[oi + 1..] {
            if xmin(b) > xmax {
                break;
            }
            let adjacent = (a + 1) % n == b || (b + 1) % n == a;
            if adjacent {
                continue;
            }
            let (r, s) = seg(b);
            if segments_intersect(&p, &q, &r, &s) {
                return false;
            }
        }
    }
    true
}

/// Winding number of a closed polyline around `point`.
pub fn winding_number(curve: &[Point], point: &Point) -> Result<i32> {
    let n = curve.len();
    if n < 2 {
        return Err(Error::InvalidParams("curve needs at least two points".into()));
    }
    let scale = curve.iter().map(|p| (p - point).norm()).fold(0.0, f64::max);
    let mut dmin = f64::INFINITY;
    let mut wn = 0i32;
    for k in 0..n {
        let a = curve[k];
        let b = curve[(k + 1) % n];
        dmin = dmin.min(point_segment_distance(point, &a, &b));
        if a.y <= point.y {
            if b.y > point.y && orient(&a, &b, point) > 0.0 {
                wn += 1;
            }
        } else if b.y <= point.y && orient(&a, &b, point) < 0.0 {
            wn -= 1;
        }
    }
    if dmin <= 1e-12 * scale.max(1.0) {
        return Err(Error::OnCurve(dmin));
    }
    Ok(wn)
}

/// Writes a profile next to the potential section it was computed for.
pub fn write_profile_bundle(pot: &Potential, profile: &HeteroclinicProfile, dir: &Path, stem: &str) -> Result<()> {
    profile.write_csv(pot, &dir.join(format!("{stem}.csv")))?;
    let mut f = std::fs::File::create(dir.join(format!("{stem}.potential.toml")))?;
    f.write_all(pot.to_section().as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{symmetric_product_well, symmetric_wells, Family};

    #[test]
    fn zero_length_for_identical_endpoints() {
        let pot = symmetric_product_well();
        let p = metric_distance(&pot, pot.well(0), pot.well(0), 32).unwrap();
        assert_eq!(p.length, 0.0);
    }

    #[test]
    fn resolution_below_eight_rejected() {
        let pot = symmetric_product_well();
        assert!(metric_distance(&pot, pot.well(0), pot.well(1), 4).is_err());
    }

    #[test]
    fn symmetric_costs_agree() {
        let pot = symmetric_product_well();
        let c = pairwise_costs(&pot).unwrap();
        assert!((c.c12 - c.c13).abs() < 1e-6);
        assert!((c.c12 - c.c23).abs() < 1e-6);
        assert!(c.triangle.is_strict());
    }

    #[test]
    fn distance_is_symmetric_in_endpoints() {
        let pot = Potential::new(
            symmetric_wells(),
            1.0,
            Family::Perturbed { eps: 0.4, weights: [1.0, 0.3, -0.2], width: 0.6 },
        )
        .unwrap();
        let a = metric_distance(&pot, pot.well(0), pot.well(1), 128).unwrap();
        let b = metric_distance(&pot, pot.well(1), pot.well(0), 128).unwrap();
        assert!((a.length - b.length).abs() < 1e-6);
    }

    #[test]
    fn refinement_changes_length_little() {
        let pot = symmetric_product_well();
        let a = metric_distance(&pot, pot.well(0), pot.well(1), 128).unwrap();
        let b = metric_distance(&pot, pot.well(0), pot.well(1), 512).unwrap();
        assert!((a.length - b.length).abs() / b.length < 5e-3);
    }

    #[test]
    fn triangle_inequality_on_sampled_triples() {
        let pot = symmetric_product_well();
        let pts = [Point::new(0.3, 0.1), Point::new(-0.2, 0.4), pot.well(0), Point::new(0.0, -0.5)];
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    let ac = metric_distance(&pot, *a, *c, 96).unwrap().length;
                    let ab = metric_distance(&pot, *a, *b, 96).unwrap().length;
                    let bc = metric_distance(&pot, *b, *c, 96).unwrap().length;
                    assert!(ac <= ab + bc + 1e-6, "{ac} > {ab} + {bc}");
                }
            }
        }
    }

    #[test]
    fn clamped_energy_decreases_monotonically() {
        let pot = symmetric_product_well();
        let n = 200;
        let dt = 0.05;
        let (p, q) = (pot.well(0), pot.well(1));
        let init: Vec<Point> = (0..=n).map(|k| p + (q - p) * (k as f64 / n as f64)).collect();
        let sol = solve_clamped(&pot, init, dt, 1e-9, 400).unwrap();
        for w in sol.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-14 * w[0].abs());
        }
    }

    #[test]
    fn profile_pinned_at_peak_and_matches_cost() {
        let pot = symmetric_product_well();
        let prof = heteroclinic(&pot, 0, 1, 10.0, 1024).unwrap();
        let c = metric_distance(&pot, pot.well(0), pot.well(1), 256).unwrap().length;
        assert!((prof.energy - c).abs() / c < 0.01, "{} vs {c}", prof.energy);
        let peak = prof
            .samples
            .iter()
            .max_by(|a, b| pot.eval(&a.1).total_cmp(&pot.eval(&b.1)))
            .unwrap()
            .0;
        assert!(peak.abs() <= prof.dt());
        assert!(prof.metric_midpoint.abs() < 0.05);
        assert_eq!(prof.start(), pot.well(0));
        assert_eq!(prof.end(), pot.well(1));
    }

    #[test]
    fn short_truncation_rejected() {
        let pot = symmetric_product_well();
        assert!(matches!(heteroclinic(&pot, 0, 1, 0.2, 64), Err(Error::TruncationTooSmall(_))));
    }

    #[test]
    fn winding_of_unit_square() {
        let sq = [Point::new(-1.0, -1.0), Point::new(1.0, -1.0), Point::new(1.0, 1.0), Point::new(-1.0, 1.0)];
        assert_eq!(winding_number(&sq, &Point::zeros()).unwrap(), 1);
        assert_eq!(winding_number(&sq, &Point::new(5.0, 5.0)).unwrap(), 0);
        let mut rev = sq.to_vec();
        rev.reverse();
        assert_eq!(winding_number(&rev, &Point::zeros()).unwrap(), -1);
        assert!(matches!(winding_number(&sq, &Point::new(1.0, 0.0)), Err(Error::OnCurve(_))));
    }

    #[test]
    fn figure_eight_is_not_simple() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(!is_simple_closed(&pts));
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert!(is_simple_closed(&sq));
    }
}
