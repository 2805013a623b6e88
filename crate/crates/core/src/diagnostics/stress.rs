//! Stress-energy tensor and the Pohozaev balance on balls.
//!
//! Fields are read at unit scale, as solutions of `ΔU = ∇W(U)`. A blow-down
//! `u_R` is brought back with `Field::rescaled(R)`.

use crate::error::Result;
use crate::potential::{Mat2, Point, Potential};
use crate::solver::Field;

use super::quadrature::{annulus_integral, circle_integral, require_ball, Sampler};

/// Smallest number of points on a circle.
pub const CIRCLE_POINTS: usize = 4096;

#[derive(Debug, Clone)]
pub struct StressTensor {
    /// `T_ij = U_{x_i}·U_{x_j} − δ_ij (|∇U|²/2 + W(U))` per node.
    pub tensors: Vec<Option<Mat2>>,
    /// Centred-difference divergence where both neighbours carry a tensor.
    pub divergence: Vec<Option<Point>>,
}

impl StressTensor {
    pub fn max_divergence(&self) -> f64 {
        self.divergence.iter().flatten().map(|d| d.norm()).fold(0.0, f64::max)
    }

    /// Mean of `|div T|` over nodes where it is defined.
    pub fn mean_divergence(&self) -> f64 {
        let (s, n) = self.divergence.iter().flatten().fold((0.0, 0usize), |(s, n), d| (s + d.norm(), n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    }
}

pub fn stress_tensor(field: &Field, pot: &Potential) -> StressTensor {
    let s = Sampler::new(field);
    let tensors: Vec<Option<Mat2>> = (0..field.values.len())
        .map(|k| {
            let (ux, uy) = s.gradient(k)?;
            let w = pot.eval(&field.values[k]);
            let trace = 0.5 * (ux.norm_squared() + uy.norm_squared()) + w;
            let off = ux.dot(&uy);
            Some(Mat2::new(ux.norm_squared() - trace, off, off, uy.norm_squared() - trace))
        })
        .collect();
    let h = field.spacing;
    let divergence = (0..field.values.len())
        .map(|k| {
            tensors[k]?;
            let nb = field.neighbors(k);
            let get = |m: Option<usize>| m.and_then(|m| tensors[m]);
            let (xl, xr, yl, yr) = (get(nb[0])?, get(nb[1])?, get(nb[2])?, get(nb[3])?);
            let dx = (xr - xl) / (2.0 * h);
            let dy = (yr - yl) / (2.0 * h);
            Some(Point::new(dx[(0, 0)] + dy[(1, 0)], dx[(0, 1)] + dy[(1, 1)]))
        })
        .collect();
    StressTensor { tensors, divergence }
}

/// `½∮_{∂B_r} (½|U_ν|² − ½|U_s|² − W) ds + (1/r)∫_{B_r} W dx` about the origin.
pub fn pohozaev_residual(field: &Field, pot: &Potential, r: f64) -> Result<f64> {
    pohozaev_residual_at(field, pot, &Point::zeros(), r)
}

pub fn pohozaev_residual_at(field: &Field, pot: &Potential, center: &Point, r: f64) -> Result<f64> {
    require_ball(field, center, r)?;
    let s = Sampler::new(field);
    let n = CIRCLE_POINTS.max((8.0 * std::f64::consts::TAU * r / field.spacing).ceil() as usize);
    let boundary = circle_integral(&s, center, r, n, |e, jet| {
        let un = jet.along(e);
        let us = jet.along(&Point::new(-e.y, e.x));
        0.5 * un.norm_squared() - 0.5 * us.norm_squared() - pot.eval(&jet.u)
    })?;
    let [bulk] = annulus_integral(&s, center, 0.0, r, |_, jet| [pot.eval(&jet.u)])?;
    Ok(0.5 * boundary + bulk / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::HeteroclinicSet;
    use crate::potential::symmetric_product_well;
    use crate::solver::{Bc, Domain, GridSpec};

    fn slab(h: f64) -> (Field, Potential) {
        let pot = symmetric_product_well();
        let set = HeteroclinicSet::with_defaults(&pot).unwrap();
        let g = GridSpec::covering_disc(Point::zeros(), 12.0, h).unwrap();
        let f = Field::from_fn(g, Domain::disc(12.0), Bc::Dirichlet, |x| set.eval_midpoint(0, 1, x.x));
        (f, pot)
    }

    #[test]
    fn constant_field_is_stress_free() {
        let pot = symmetric_product_well();
        let g = GridSpec::covering_disc(Point::zeros(), 4.0, 0.25).unwrap();
        let f = Field::new(g, Domain::disc(4.0), Bc::Dirichlet, pot.well(2));
        let t = stress_tensor(&f, &pot);
        assert!(t.tensors.iter().flatten().all(|m| m.norm() == 0.0));
        assert_eq!(pohozaev_residual(&f, &pot, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn slab_first_integral_in_the_normal_component() {
        let (f, pot) = slab(0.0625);
        let t = stress_tensor(&f, &pot);
        let worst = t.tensors.iter().flatten().map(|m| m[(0, 0)].abs()).fold(0.0, f64::max);
        assert!(worst < 2e-2, "{worst}");
    }

    #[test]
    fn slab_pohozaev_vanishes_with_refinement() {
        let a = {
            let (f, pot) = slab(0.125);
            pohozaev_residual(&f, &pot, 8.0).unwrap().abs()
        };
        let b = {
            let (f, pot) = slab(0.0625);
            pohozaev_residual(&f, &pot, 8.0).unwrap().abs()
        };
        assert!(b < 1e-2 && b < a, "{a} {b}");
    }

    #[test]
    fn circle_must_fit() {
        let (f, pot) = slab(0.5);
        assert!(pohozaev_residual(&f, &pot, 12.5).is_err());
    }
}
