//! Radial sweeps about the origin: `W̃(R)`, the equipartition defect and the
//! radial energy, all at unit scale.

use std::f64::consts::SQRT_2;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::numerics::{power_law_fit, LinearFit};
use crate::potential::{Point, Potential};
use crate::solver::Field;

use super::quadrature::{annulus_integral, require_ball, Sampler};

/// Per-ball integrals `[∫W, ∫(½|∇U|² + W), ∫(√W − |∇U|/√2)²]` for increasing radii.
fn ball_sweep(field: &Field, pot: &Potential, radii: &[f64]) -> Result<Vec<[f64; 3]>> {
    check_radii(radii)?;
    let center = Point::zeros();
    require_ball(field, &center, *radii.last().expect("nonempty"))?;
    let s = Sampler::new(field);
    let mut acc = [0.0; 3];
    let mut inner = 0.0;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let part = annulus_integral(&s, &center, inner, r, |_, jet| {
            let w = pot.eval(&jet.u);
            let g2 = jet.grad_sq();
            let d = w.sqrt() - g2.sqrt() / SQRT_2;
            [w, 0.5 * g2 + w, d * d]
        })?;
        for (a, p) in acc.iter_mut().zip(part) {
            *a += p;
        }
        out.push(acc);
        inner = r;
    }
    Ok(out)
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams(format!("radii must be positive and increasing, got {radii:?}")));
    }
    Ok(())
}

/// `∫_{B_R} (√W(U) − |∇U|/√2)²` per radius with its growth exponent.
#[derive(Debug, Clone)]
pub struct EquipartitionDefect {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Log-log fit of the values against the radii (`None` with fewer than
    /// two positive values).
    pub fit: Option<LinearFit>,
}

impl EquipartitionDefect {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// One-sided 95% upper confidence bound on the exponent.
    pub fn exponent_upper_bound(&self) -> Option<f64> {
        let f = self.fit?;
        if f.n < 3 || !f.slope_stderr.is_finite() {
            return None;
        }
        let t = StudentsT::new(0.0, 1.0, (f.n - 2) as f64).ok()?.inverse_cdf(0.95);
        Some(f.slope + t * f.slope_stderr)
    }
}

pub fn equipartition_defect(field: &Field, pot: &Potential, radii: &[f64]) -> Result<EquipartitionDefect> {
    let sweep = ball_sweep(field, pot, radii)?;
    let values: Vec<f64> = sweep.iter().map(|s| s[2]).collect();
    let fit = power_law_fit(radii, &values);
    Ok(EquipartitionDefect { radii: radii.to_vec(), values, fit })
}

/// `W̃(R) = (1/R)∫_{B_R} W` with the constants of the monotonicity allowance
/// `W̃(R₂) − W̃(R₁) ≥ −C₃ R₁^{−α/2}` for `R₁ < R₂ ≤ 2R₁`.
///
/// `C₁ = max E(U, B_R)/R`; `α` is one minus the defect exponent, clamped to
/// `[0, 1)`; `C₂ = max D(R)/R^{1−α}`; `C₃ = √(C₁C₂)·2^{(1−α)/2}`.
#[derive(Debug, Clone)]
pub struct WtildeProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub defect: EquipartitionDefect,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub c3: f64,
    /// Largest `(W̃(R₁) − W̃(R₂) − C₃R₁^{−α/2})₊` over admissible pairs.
    pub monotonicity_defect: f64,
    /// `(max − min)/mean` of `W̃` over radii in the last octave.
    pub tail_variation: f64,
    /// Mean of `W̃` over the last octave.
    pub l0_estimate: f64,
}

pub fn wtilde_profile(field: &Field, pot: &Potential, radii: &[f64]) -> Result<WtildeProfile> {
    let sweep = ball_sweep(field, pot, radii)?;
    let values: Vec<f64> = sweep.iter().zip(radii).map(|(s, r)| s[0] / r).collect();
    let dvals: Vec<f64> = sweep.iter().map(|s| s[2]).collect();
    let defect = EquipartitionDefect { radii: radii.to_vec(), fit: power_law_fit(radii, &dvals), values: dvals };

    let c1 = sweep.iter().zip(radii).map(|(s, r)| s[1] / r).fold(0.0, f64::max);
    let alpha = defect.exponent().map_or(0.0, |p| (1.0 - p).clamp(0.0, 1.0 - 1e-12));
    let c2 = defect.values.iter().zip(radii).map(|(d, r)| d / r.powf(1.0 - alpha)).fold(0.0, f64::max);
    let c3 = (c1 * c2).sqrt() * 2f64.powf(0.5 * (1.0 - alpha));

    let mut monotonicity_defect: f64 = 0.0;
    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            if radii[j] > 2.0 * radii[i] {
                break;
            }
            let allowance = c3 * radii[i].powf(-0.5 * alpha);
            monotonicity_defect = monotonicity_defect.max(values[i] - values[j] - allowance);
        }
    }

    let rmax = *radii.last().expect("checked");
    let tail: Vec<f64> = radii.iter().zip(&values).filter(|(r, _)| **r >= 0.5 * rmax).map(|(_, v)| *v).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_variation = if mean > 0.0 { spread / mean } else { 0.0 };

    Ok(WtildeProfile {
        radii: radii.to_vec(),
        values,
        defect,
        c1,
        c2,
        alpha,
        c3,
        monotonicity_defect,
        tail_variation,
        l0_estimate: mean,
    })
}

/// `∫_{r1<|x|<r2} |∂_ν U|²/|x| dx` with `ν = x/|x|`.
pub fn radial_energy(field: &Field, r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0) || !(r2 > r1) {
        return Err(Error::DegenerateAnnulus { r1, r2 });
    }
    let center = Point::zeros();
    require_ball(field, &center, r2)?;
    let s = Sampler::new(field);
    let [v] = annulus_integral(&s, &center, r1, r2, |d, jet| {
        let r = d.norm();
        [jet.along(&(d / r)).norm_squared() / r]
    })?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::HeteroclinicSet;
    use crate::potential::symmetric_product_well;
    use crate::solver::{Bc, Domain, GridSpec};

    // The layer is about half a unit wide, so h must be well below that.
    fn slab() -> (Field, Potential, f64) {
        let pot = symmetric_product_well();
        let set = HeteroclinicSet::with_defaults(&pot).unwrap();
        let g = GridSpec::covering_disc(Point::zeros(), 20.0, 0.0625).unwrap();
        let f = Field::from_fn(g, Domain::disc(20.0), Bc::Dirichlet, |x| set.eval_midpoint(0, 1, x.x));
        (f, pot, set.cost(0, 1))
    }

    #[test]
    fn constant_field_is_flat() {
        let pot = symmetric_product_well();
        let g = GridSpec::covering_disc(Point::zeros(), 8.0, 0.5).unwrap();
        let f = Field::new(g, Domain::disc(8.0), Bc::Dirichlet, pot.well(0));
        let p = wtilde_profile(&f, &pot, &[2.0, 4.0, 6.0]).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.0));
        assert!(p.defect.values.iter().all(|v| *v == 0.0));
        assert_eq!(p.monotonicity_defect, 0.0);
        assert_eq!(radial_energy(&f, 1.0, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn slab_wtilde_tends_to_the_cost() {
        // ∫W across the layer is c/2 and the chord through B_R has length 2R
        let (f, pot, c) = slab();
        let p = wtilde_profile(&f, &pot, &[4.0, 8.0, 16.0]).unwrap();
        assert!((p.values[2] - c).abs() / c < 0.02, "{:?} vs {c}", p.values);
        assert!(p.defect.values[2] < 1e-2 * c * 16.0, "{:?}", p.defect.values);
    }

    #[test]
    fn slab_is_nearly_conical_and_a_ring_is_not() {
        let (f, _, _) = slab();
        assert!(radial_energy(&f, 8.0, 16.0).unwrap() < 1e-2);
        assert!(matches!(radial_energy(&f, 4.0, 4.0), Err(Error::DegenerateAnnulus { .. })));

        let pot = symmetric_product_well();
        let set = HeteroclinicSet::with_defaults(&pot).unwrap();
        let g = GridSpec::covering_disc(Point::zeros(), 18.0, 0.125).unwrap();
        let ring = Field::from_fn(g, Domain::disc(18.0), Bc::Dirichlet, |x| set.eval_midpoint(0, 1, x.norm() - 8.0));
        assert!(radial_energy(&ring, 4.0, 16.0).unwrap() > 0.1);
    }

    #[test]
    fn radii_must_increase() {
        let (f, pot, _) = slab();
        assert!(wtilde_profile(&f, &pot, &[4.0, 2.0]).is_err());
        assert!(equipartition_defect(&f, &pot, &[]).is_err());
    }
}
