//! Uniform grids carrying R²-valued samples over a disc or a rectangle.

use crate::error::{Error, Result};
use crate::junction::JunctionMap;
use crate::network::PartitionNetwork;
use crate::potential::{Point, Potential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Disc { center: Point, radius: f64 },
    /// The whole grid.
    Rect,
}

impl Domain {
    pub fn unit_disc() -> Self {
        Domain::Disc { center: Point::zeros(), radius: 1.0 }
    }

    pub fn disc(radius: f64) -> Self {
        Domain::Disc { center: Point::zeros(), radius }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Domain::Disc { center, radius } => Domain::Disc { center: center * factor, radius: radius * factor },
            Domain::Rect => Domain::Rect,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    /// Zero normal flux: missing neighbours drop out of the stencil, which is
    /// the same as reflecting the node value into a ghost node.
    Neumann,
    /// Boundary nodes hold the trace and never move.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Outside,
    Interior,
    /// Ring of non-interior nodes 4-adjacent to the interior.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin: Point,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: Point) -> Result<Self> {
        if nx < 2 || ny < 2 || !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("{nx}×{ny} nodes with spacing {spacing}")));
        }
        Ok(GridSpec { nx, ny, spacing, origin })
    }

    /// Square grid of spacing `h` centred on `center` with at least one node
    /// beyond `radius` in every direction.
    pub fn covering_disc(center: Point, radius: f64, h: f64) -> Result<Self> {
        let half = (radius / h).ceil() as usize + 1;
        let n = 2 * half + 1;
        Self::new(n, n, h, center - Point::new(half as f64 * h, half as f64 * h))
    }

    /// `cells` intervals across the diameter of the unit disc.
    pub fn unit_disc(cells: usize) -> Result<Self> {
        Self::covering_disc(Point::zeros(), 1.0, 2.0 / cells as f64)
    }

    pub fn position(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin: Point,
    pub values: Vec<Point>,
    pub mask: Vec<NodeKind>,
    pub domain: Domain,
    pub bc: Bc,
}

pub fn build_mask(grid: &GridSpec, domain: Domain, bc: Bc) -> Vec<NodeKind> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut mask = vec![NodeKind::Outside; nx * ny];
    match domain {
        Domain::Rect => {
            for j in 0..ny {
                for i in 0..nx {
                    let edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
                    mask[j * nx + i] = if edge && bc == Bc::Dirichlet { NodeKind::Boundary } else { NodeKind::Interior };
                }
            }
        }
        Domain::Disc { center, radius } => {
            for j in 0..ny {
                for i in 0..nx {
                    if (grid.position(i, j) - center).norm() < radius && i > 0 && j > 0 && i < nx - 1 && j < ny - 1 {
                        mask[j * nx + i] = NodeKind::Interior;
                    }
                }
            }
            for j in 0..ny {
                for i in 0..nx {
                    let k = j * nx + i;
                    if mask[k] != NodeKind::Outside {
                        continue;
                    }
                    let near = (i > 0 && mask[k - 1] == NodeKind::Interior)
                        || (i + 1 < nx && mask[k + 1] == NodeKind::Interior)
                        || (j > 0 && mask[k - nx] == NodeKind::Interior)
                        || (j + 1 < ny && mask[k + nx] == NodeKind::Interior);
                    if near {
                        mask[k] = NodeKind::Boundary;
                    }
                }
            }
        }
    }
    mask
}

/// Anything with a well label at each point of the plane.
pub trait LabelMap {
    fn label(&self, x: &Point) -> usize;
}

impl LabelMap for JunctionMap {
    fn label(&self, x: &Point) -> usize {
        self.label_at(x)
    }
}

/// Networks live on the unit disc; points outside it take the label of the
/// nearest boundary point.
impl LabelMap for PartitionNetwork {
    fn label(&self, x: &Point) -> usize {
        if let Some(l) = self.label_at(x) {
            return l;
        }
        let r = x.norm().max(1e-300);
        let inner = x * ((1.0 - 1e-9) / r);
        self.label_at(&inner).or(self.constant_label).unwrap_or(0)
    }
}

impl<F: Fn(&Point) -> usize> LabelMap for F {
    fn label(&self, x: &Point) -> usize {
        self(x)
    }
}

impl Field {
    pub fn new(grid: GridSpec, domain: Domain, bc: Bc, fill: Point) -> Self {
        Field {
            nx: grid.nx,
            ny: grid.ny,
            spacing: grid.spacing,
            origin: grid.origin,
            values: vec![fill; grid.len()],
            mask: build_mask(&grid, domain, bc),
            domain,
            bc,
        }
    }

    pub fn from_fn(grid: GridSpec, domain: Domain, bc: Bc, f: impl Fn(&Point) -> Point) -> Self {
        let mut field = Self::new(grid, domain, bc, Point::zeros());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                field.values[j * grid.nx + i] = f(&grid.position(i, j));
            }
        }
        field
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { nx: self.nx, ny: self.ny, spacing: self.spacing, origin: self.origin }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn position(&self, k: usize) -> Point {
        let (i, j) = self.coords(k);
        self.grid().position(i, j)
    }

    /// Nodes that enter the energy: interior nodes, plus the ring for Dirichlet data.
    pub fn is_present(&self, k: usize) -> bool {
        match self.mask[k] {
            NodeKind::Interior => true,
            NodeKind::Boundary => self.bc == Bc::Dirichlet,
            NodeKind::Outside => false,
        }
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.mask[k] == NodeKind::Interior
    }

    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|m| **m == NodeKind::Interior).count()
    }

    /// Neighbour indices in the order −x, +x, −y, +y (absent at the grid edge).
    pub fn neighbors(&self, k: usize) -> [Option<usize>; 4] {
        let (i, j) = self.coords(k);
        [
            (i > 0).then(|| k - 1),
            (i + 1 < self.nx).then(|| k + 1),
            (j > 0).then(|| k - self.nx),
            (j + 1 < self.ny).then(|| k + self.nx),
        ]
    }

    /// Copies interior values into Neumann ghost nodes (mean of interior
    /// neighbours) so that interpolation near the boundary sees reflected data.
    pub fn fill_ghosts(&mut self) {
        if self.bc != Bc::Neumann {
            return;
        }
        for k in 0..self.values.len() {
            if self.mask[k] != NodeKind::Boundary {
                continue;
            }
            let mut sum = Point::zeros();
            let mut n = 0;
            for q in self.neighbors(k).into_iter().flatten() {
                if self.mask[q] == NodeKind::Interior {
                    sum += self.values[q];
                    n += 1;
                }
            }
            if n > 0 {
                self.values[k] = sum / n as f64;
            }
        }
    }

    /// Bilinear interpolation; `None` if a surrounding node with nonzero
    /// weight is outside the domain, or the point leaves the grid.
    pub fn bilinear(&self, x: &Point) -> Option<Point> {
        let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
        let s = (x - self.origin) / self.spacing;
        let s = Point::new(snap(s.x), snap(s.y));
        if !(s.x >= 0.0 && s.y >= 0.0) {
            return None;
        }
        let i = (s.x.floor() as usize).min(self.nx - 2);
        let j = (s.y.floor() as usize).min(self.ny - 2);
        if s.x > (self.nx - 1) as f64 || s.y > (self.ny - 1) as f64 {
            return None;
        }
        let (fx, fy) = (s.x - i as f64, s.y - j as f64);
        let k00 = self.index(i, j);
        let ks = [k00, k00 + 1, k00 + self.nx, k00 + self.nx + 1];
        let ws = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
        let mut out = Point::zeros();
        let mut first: Option<Point> = None;
        let mut uniform = true;
        for (k, w) in ks.iter().zip(ws) {
            if w == 0.0 {
                continue;
            }
            if self.mask[*k] == NodeKind::Outside {
                return None;
            }
            let v = self.values[*k];
            match first {
                None => first = Some(v),
                Some(f) => uniform &= f == v,
            }
            out += v * w;
        }
        // constant cells reproduce their value exactly
        if uniform {
            return first;
        }
        Some(out)
    }

    /// Bilinear value and central-difference gradient (columns ∂/∂x, ∂/∂y).
    pub fn sample_with_gradient(&self, x: &Point) -> Option<(Point, Point, Point)> {
        let d = 0.5 * self.spacing;
        let u = self.bilinear(x)?;
        let ex = Point::new(d, 0.0);
        let ey = Point::new(0.0, d);
        let ux = (self.bilinear(&(x + ex))? - self.bilinear(&(x - ex))?) / (2.0 * d);
        let uy = (self.bilinear(&(x + ey))? - self.bilinear(&(x - ey))?) / (2.0 * d);
        Some((u, ux, uy))
    }

    /// Same samples viewed in coordinates multiplied by `factor`
    /// (`U(y) = u(y/factor)`).
    pub fn rescaled(&self, factor: f64) -> Field {
        let mut f = self.clone();
        f.spacing *= factor;
        f.origin *= factor;
        f.domain = self.domain.scaled(factor);
        f
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().zip(&self.mask).filter(|(_, m)| **m != NodeKind::Outside).map(|(v, _)| v.norm()).fold(0.0, f64::max)
    }

    /// Nearest-well label per node (255 outside the domain).
    pub fn labels(&self, pot: &Potential) -> Vec<u8> {
        self.values.iter().zip(&self.mask).map(|(v, m)| if *m == NodeKind::Outside { 255 } else { pot.nearest_well(v) as u8 }).collect()
    }

    pub fn domain_contains_ball(&self, c: &Point, r: f64) -> bool {
        match self.domain {
            Domain::Disc { center, radius } => (c - center).norm() + r <= radius + 1e-12,
            Domain::Rect => {
                let lo = self.origin;
                let hi = self.origin + Point::new((self.nx - 1) as f64, (self.ny - 1) as f64) * self.spacing;
                c.x - r >= lo.x && c.y - r >= lo.y && c.x + r <= hi.x && c.y + r <= hi.y
            }
        }
    }
}

/// Piecewise-constant well-valued field from a label map.
pub fn sample_map(map: &dyn LabelMap, pot: &Potential, grid: GridSpec, domain: Domain, bc: Bc) -> Field {
    Field::from_fn(grid, domain, bc, |x| pot.well(map.label(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::make_junction_map;
    use crate::potential::symmetric_product_well;
    use std::f64::consts::TAU;

    #[test]
    fn disc_mask_ring() {
        let g = GridSpec::unit_disc(64).unwrap();
        let f = Field::new(g, Domain::unit_disc(), Bc::Dirichlet, Point::zeros());
        for k in 0..f.values.len() {
            let r = f.position(k).norm();
            match f.mask[k] {
                NodeKind::Interior => assert!(r < 1.0),
                NodeKind::Boundary => {
                    assert!(r >= 1.0 && r < 1.0 + 2.0 * g.spacing);
                }
                NodeKind::Outside => assert!(r >= 1.0),
            }
        }
        assert!((f.interior_count() as f64 * g.spacing * g.spacing - std::f64::consts::PI).abs() < 0.05);
    }

    #[test]
    fn symmetric_map_has_three_regions() {
        let pot = symmetric_product_well();
        let m = make_junction_map([TAU / 3.0; 3], 0.3, [0, 1, 2]);
        let f = sample_map(&m, &pot, GridSpec::unit_disc(256).unwrap(), Domain::unit_disc(), Bc::Dirichlet);
        let labels = f.labels(&pot);
        for l in 0..3u8 {
            let count = labels.iter().filter(|v| **v == l).count();
            assert!(count > 10_000);
        }
        assert_eq!(f.values[f.index(f.nx / 2, f.ny / 2)], pot.well(m.label_at(&Point::zeros())));
    }

    #[test]
    fn bilinear_reproduces_affine_fields() {
        let g = GridSpec::new(20, 15, 0.1, Point::new(-1.0, -0.7)).unwrap();
        let f = Field::from_fn(g, Domain::Rect, Bc::Neumann, |x| Point::new(2.0 * x.x - x.y, 0.5 + x.y));
        let x = Point::new(0.123, 0.077);
        let v = f.bilinear(&x).unwrap();
        assert!((v - Point::new(2.0 * x.x - x.y, 0.5 + x.y)).norm() < 1e-12);
        let (_, ux, uy) = f.sample_with_gradient(&x).unwrap();
        assert!((ux - Point::new(2.0, 0.0)).norm() < 1e-10);
        assert!((uy - Point::new(-1.0, 1.0)).norm() < 1e-10);
    }
}
