//! Node gradients and polar quadrature over discs, annuli and circles.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Point;
use crate::solver::{Field, NodeKind};

/// Value and first derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub u: Point,
    pub ux: Point,
    pub uy: Point,
}

impl Jet {
    pub fn grad_sq(&self) -> f64 {
        self.ux.norm_squared() + self.uy.norm_squared()
    }

    /// Derivative along the unit vector `e`.
    pub fn along(&self, e: &Point) -> Point {
        self.ux * e.x + self.uy * e.y
    }
}

/// Field with gradients precomputed at the nodes: centred differences where
/// both neighbours carry values, one-sided otherwise.
pub struct Sampler<'a> {
    pub field: &'a Field,
    grads: Vec<Option<(Point, Point)>>,
}

impl<'a> Sampler<'a> {
    pub fn new(field: &'a Field) -> Self {
        let grads = (0..field.values.len()).map(|k| node_gradient(field, k)).collect();
        Sampler { field, grads }
    }

    pub fn gradient(&self, k: usize) -> Option<(Point, Point)> {
        self.grads[k]
    }

    /// Bilinear value with bilinearly interpolated node gradients.
    pub fn sample(&self, x: &Point) -> Option<Jet> {
        let f = self.field;
        let u = f.bilinear(x)?;
        let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
        let s = (x - f.origin) / f.spacing;
        let s = Point::new(snap(s.x), snap(s.y));
        let i = (s.x.floor() as usize).min(f.nx - 2);
        let j = (s.y.floor() as usize).min(f.ny - 2);
        let (fx, fy) = (s.x - i as f64, s.y - j as f64);
        let k00 = f.index(i, j);
        let ks = [k00, k00 + 1, k00 + f.nx, k00 + f.nx + 1];
        let ws = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
        let (mut ux, mut uy) = (Point::zeros(), Point::zeros());
        for (k, w) in ks.iter().zip(ws) {
            if w == 0.0 {
                continue;
            }
            let (gx, gy) = self.grads[*k]?;
            ux += gx * w;
            uy += gy * w;
        }
        Some(Jet { u, ux, uy })
    }
}

fn available(field: &Field, k: usize) -> bool {
    field.mask[k] != NodeKind::Outside
}

fn node_gradient(field: &Field, k: usize) -> Option<(Point, Point)> {
    if !available(field, k) {
        return None;
    }
    let nb = field.neighbors(k);
    let h = field.spacing;
    let axis = |lo: Option<usize>, hi: Option<usize>| -> Option<Point> {
        let lo = lo.filter(|m| available(field, *m));
        let hi = hi.filter(|m| available(field, *m));
        match (lo, hi) {
            (Some(a), Some(b)) => Some((field.values[b] - field.values[a]) / (2.0 * h)),
            (None, Some(b)) => Some((field.values[b] - field.values[k]) / h),
            (Some(a), None) => Some((field.values[k] - field.values[a]) / h),
            (None, None) => None,
        }
    };
    Some((axis(nb[0], nb[1])?, axis(nb[2], nb[3])?))
}

pub fn require_ball(field: &Field, center: &Point, r: f64) -> Result<()> {
    if !field.domain_contains_ball(center, r) {
        return Err(Error::OutsideDomain(format!(
            "ball of radius {r} about ({}, {}) is not inside the domain",
            center.x, center.y
        )));
    }
    Ok(())
}

fn outside(x: &Point) -> Error {
    Error::OutsideDomain(format!("no field values near ({:.4}, {:.4})", x.x, x.y))
}

/// `∫_{r0<|x−c|<r1} f dx` by the midpoint rule in polar coordinates with
/// steps of about half a grid spacing. `f` receives `x − c` and the jet.
pub fn annulus_integral<const N: usize>(
    s: &Sampler,
    center: &Point,
    r0: f64,
    r1: f64,
    f: impl Fn(&Point, &Jet) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let step = 0.5 * s.field.spacing;
    let nr = ((r1 - r0) / step).ceil().max(4.0) as usize;
    let dr = (r1 - r0) / nr as f64;
    let rings: Vec<Result<[f64; N]>> = (0..nr)
        .into_par_iter()
        .map(|k| {
            let r = r0 + (k as f64 + 0.5) * dr;
            let m = (TAU * r / step).ceil().max(16.0) as usize;
            let dth = TAU / m as f64;
            let mut acc = [0.0; N];
            for a in 0..m {
                let th = (a as f64 + 0.5) * dth;
                let d = Point::new(r * th.cos(), r * th.sin());
                let x = center + d;
                let jet = s.sample(&x).ok_or_else(|| outside(&x))?;
                let v = f(&d, &jet);
                for (o, vi) in acc.iter_mut().zip(v) {
                    *o += vi;
                }
            }
            Ok(acc.map(|v| v * r * dr * dth))
        })
        .collect();
    let mut total = [0.0; N];
    for ring in rings {
        for (o, v) in total.iter_mut().zip(ring?) {
            *o += v;
        }
    }
    Ok(total)
}

/// `∮_{|x−c|=r} f ds` by the periodic trapezoid rule on `n` points.
pub fn circle_integral(s: &Sampler, center: &Point, r: f64, n: usize, f: impl Fn(&Point, &Jet) -> f64) -> Result<f64> {
    let dth = TAU / n as f64;
    let mut acc = 0.0;
    for a in 0..n {
        let th = a as f64 * dth;
        let e = Point::new(th.cos(), th.sin());
        let x = center + e * r;
        let jet = s.sample(&x).ok_or_else(|| outside(&x))?;
        acc += f(&e, &jet);
    }
    Ok(acc * r * dth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Bc, Domain, GridSpec};

    #[test]
    fn linear_fields_have_exact_gradients() {
        let g = GridSpec::covering_disc(Point::zeros(), 4.0, 0.25).unwrap();
        let f = Field::from_fn(g, Domain::disc(4.0), Bc::Dirichlet, |x| Point::new(2.0 * x.x - x.y, 0.5 * x.y));
        let s = Sampler::new(&f);
        let jet = s.sample(&Point::new(0.3, -1.1)).unwrap();
        assert!((jet.ux - Point::new(2.0, 0.0)).norm() < 1e-12);
        assert!((jet.uy - Point::new(-1.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn disc_area_and_circle_length() {
        let g = GridSpec::covering_disc(Point::zeros(), 4.0, 0.25).unwrap();
        let f = Field::new(g, Domain::disc(4.0), Bc::Dirichlet, Point::zeros());
        let s = Sampler::new(&f);
        let area = annulus_integral(&s, &Point::zeros(), 0.0, 3.0, |_, _| [1.0]).unwrap()[0];
        assert!((area - 9.0 * std::f64::consts::PI).abs() < 1e-9);
        let len = circle_integral(&s, &Point::zeros(), 3.0, 512, |_, _| 1.0).unwrap();
        assert!((len - 6.0 * std::f64::consts::PI).abs() < 1e-9);
    }
}
