//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use twac::potential::{Point, Potential};

/// 16-neighbourhood: the 8 king moves plus the 8 knight moves.
const OFFSETS: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

/// `∫ √(2W) |γ'|` along the segment `a → b` by Simpson's rule.
fn segment_cost(pot: &Potential, a: &Point, b: &Point) -> f64 {
    let f = |p: Point| (2.0 * pot.eval(&p)).sqrt();
    let m = 0.5 * (a + b);
    (b - a).norm() * (f(*a) + 4.0 * f(m) + f(*b)) / 6.0
}

/// Degenerate-metric distance between two wells by Dijkstra on an `n × n`
/// node lattice covering the bounding box of the wells, padded by 1.5 times
/// their diameter. The wells are joined to the four corners of their cells.
pub fn dijkstra_distance(pot: &Potential, from: usize, to: usize, n: usize) -> f64 {
    let w = pot.wells();
    let mut diam: f64 = 0.0;
    for a in w {
        for b in w {
            diam = diam.max((a - b).norm());
        }
    }
    let pad = 1.5 * diam;
    let lo = Point::new(w.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - pad, w.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - pad);
    let hi = Point::new(w.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + pad, w.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + pad);
    let h = (hi.x - lo.x).max(hi.y - lo.y) / (n - 1) as f64;
    let (nx, ny) = (n, n);
    let pos = |k: usize| lo + Point::new((k % nx) as f64 * h, (k / nx) as f64 * h);
    let corners = |p: &Point| {
        let i = ((p.x - lo.x) / h).floor() as usize;
        let j = ((p.y - lo.y) / h).floor() as usize;
        [j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1]
    };
    let (src, dst) = (w[from], w[to]);
    let mut dist = vec![f64::INFINITY; nx * ny];
    let mut heap = BinaryHeap::new();
    for k in corners(&src) {
        dist[k] = segment_cost(pot, &src, &pos(k));
        heap.push(Item(dist[k], k));
    }
    let targets = corners(&dst);
    let mut best = f64::INFINITY;
    while let Some(Item(d, k)) = heap.pop() {
        if d > dist[k] || d >= best {
            continue;
        }
        let p = pos(k);
        if targets.contains(&k) {
            best = best.min(d + segment_cost(pot, &p, &dst));
        }
        let (i, j) = ((k % nx) as i64, (k / nx) as i64);
        for (di, dj) in OFFSETS {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                continue;
            }
            let m = b as usize * nx + a as usize;
            let nd = d + segment_cost(pot, &p, &pos(m));
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Item(nd, m));
            }
        }
    }
    best
}

/// Opening angles from the force balance `Σ c_ij e_ij = 0` of the three
/// interface rays, solved by Newton on the ray directions. Sector 1 lies
/// between rays 12 and 13, sector 3 between 13 and 23.
pub fn force_balance_angles(c12: f64, c13: f64, c23: f64) -> [f64; 3] {
    let (mut t13, mut t23) = (2.0 * PI / 3.0, 4.0 * PI / 3.0);
    for _ in 0..100 {
        let f = [c12 + c13 * t13.cos() + c23 * t23.cos(), c13 * t13.sin() + c23 * t23.sin()];
        if f[0].abs().max(f[1].abs()) < 1e-15 * (c12 + c13 + c23) {
            break;
        }
        let j = [[-c13 * t13.sin(), -c23 * t23.sin()], [c13 * t13.cos(), c23 * t23.cos()]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let d13 = (f[0] * j[1][1] - j[0][1] * f[1]) / det;
        let d23 = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        t13 -= d13;
        t23 -= d23;
    }
    // the mirror image also balances; keep rays 12, 13, 23 counter-clockwise
    let (mut t13, mut t23) = (t13.rem_euclid(TAU), t23.rem_euclid(TAU));
    if t13 > t23 {
        (t13, t23) = (TAU - t13, TAU - t23);
    }
    [t13, TAU - t23, t23 - t13]
}

/// `1D` energy `∫ (½|ζ'|² + W(ζ))` of samples on a uniform grid, by the
/// trapezoid rule with forward differences.
pub fn profile_energy(pot: &Potential, values: &[Point], dt: f64) -> f64 {
    let n = values.len();
    let mut e = 0.0;
    for k in 0..n - 1 {
        let d = (values[k + 1] - values[k]) / dt;
        let w = 0.5 * (pot.eval(&values[k]) + pot.eval(&values[k + 1]));
        e += (0.5 * d.norm_squared() + w) * dt;
    }
    e
}
