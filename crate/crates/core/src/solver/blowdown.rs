use crate::error::{Error, Result};

use super::grid::{Bc, Domain, Field, GridSpec, NodeKind};

/// `u_R(x) = u(R x)` sampled on `grid` over `domain`, by bilinear interpolation.
///
/// Every node of the target domain (ring included) must map into the
/// footprint of the source field.
pub fn blowdown(field: &Field, factor: f64, grid: GridSpec, domain: Domain) -> Result<Field> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::InvalidParams(format!("blow-down factor must be positive, got {factor}")));
    }
    let mut out = Field::new(grid, domain, Bc::Dirichlet, Default::default());
    for k in 0..out.values.len() {
        let x = out.position(k) * factor;
        match field.bilinear(&x) {
            Some(v) => out.values[k] = v,
            None if out.mask[k] == NodeKind::Outside => {}
            None => {
                return Err(Error::OutOfFootprint(format!(
                    "node at {:?} maps to ({:.4}, {:.4}), outside the source field",
                    out.position(k),
                    x.x,
                    x.y
                )))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Point;

    #[test]
    fn unit_factor_is_identity() {
        let g = GridSpec::unit_disc(40).unwrap();
        let f = Field::from_fn(g, Domain::unit_disc(), Bc::Dirichlet, |x| Point::new(x.x.sin(), x.x * x.y));
        let b = blowdown(&f, 1.0, g, Domain::unit_disc()).unwrap();
        for k in 0..f.values.len() {
            if f.mask[k] != NodeKind::Outside {
                assert!((f.values[k] - b.values[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn footprint_is_enforced() {
        let g = GridSpec::unit_disc(40).unwrap();
        let f = Field::new(g, Domain::unit_disc(), Bc::Dirichlet, Point::zeros());
        assert!(blowdown(&f, 0.5, g, Domain::unit_disc()).is_ok());
        assert!(matches!(blowdown(&f, 2.0, g, Domain::unit_disc()), Err(Error::OutOfFootprint(_))));
    }

    #[test]
    fn scaling_composes() {
        let big = GridSpec::covering_disc(Point::zeros(), 8.0, 0.05).unwrap();
        let f = Field::from_fn(big, Domain::disc(8.0), Bc::Dirichlet, |x| Point::new(x.x, 2.0 * x.y));
        let g = GridSpec::unit_disc(32).unwrap();
        let b = blowdown(&f, 4.0, g, Domain::unit_disc()).unwrap();
        let x = Point::new(0.3, -0.2);
        assert!((b.bilinear(&x).unwrap() - Point::new(1.2, -1.6)).norm() < 1e-9);
    }
}
