//! Energy-decreasing relaxation towards `Δu / R² = ∇W(u)`.
//!
//! Only the free nodes move; their present neighbours that are not free act
//! as Dirichlet data. The default method is a truncated Newton iteration whose
//! inner solve is preconditioned conjugate gradients, with a backtracking line
//! search on the energy. The semi-implicit gradient flow is kept for small
//! problems and as a reference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{Mat2, Point, Potential};

use super::energy::{energy, neumaier, CHUNK};
use super::grid::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxMethod {
    #[default]
    Newton,
    /// `u_t = Δu / R² − ∇W(u)`, Jacobi-implicit in the Laplacian diagonal,
    /// with `dt` halved whenever the energy goes up.
    GradientFlow,
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    /// Sup-norm bound on `Δu / R² − ∇W(u)`.
    pub tol: f64,
    pub max_iter: usize,
    pub method: RelaxMethod,
    pub max_cg: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions { tol: 1e-6, max_iter: 200, method: RelaxMethod::Newton, max_cg: 4000 }
    }
}

impl RelaxOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        RelaxOptions { tol, max_iter, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxReport {
    pub iterations: usize,
    pub residual: f64,
    /// Energy before the first iteration and after each accepted one.
    pub energy_history: Vec<f64>,
    pub converged: bool,
    pub cg_iterations: usize,
}

const ABSENT: u32 = u32::MAX;

/// Free nodes packed contiguously with their couplings.
struct Packed {
    nodes: Vec<usize>,
    nbrs: Vec<[u32; 4]>,
    /// Number of present neighbours (free or fixed).
    deg: Vec<f64>,
    fixed_sum: Vec<Point>,
    fixed_sq: Vec<f64>,
    h2r: f64,
    inv_r: f64,
    /// Energy of everything not touching a free node.
    constant: f64,
}

fn chunked_sum(m: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> =
        (0..m.div_ceil(CHUNK)).into_par_iter().map(|c| neumaier((c * CHUNK..((c + 1) * CHUNK).min(m)).map(&f))).collect();
    neumaier(partials)
}

/// Plain sums inside fixed chunks, compensated across chunks.
fn dot(a: &[Point], b: &[Point]) -> f64 {
    let m = a.len();
    let partials: Vec<f64> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let r = c * CHUNK..((c + 1) * CHUNK).min(m);
            a[r.clone()].iter().zip(&b[r]).map(|(x, y)| x.dot(y)).sum::<f64>()
        })
        .collect();
    neumaier(partials)
}

impl Packed {
    fn new(field: &Field, pot: &Potential, r_scale: f64, free: &[bool]) -> Self {
        let mut index = vec![ABSENT; field.values.len()];
        let mut nodes = Vec::new();
        for k in 0..field.values.len() {
            if free[k] && field.is_interior(k) {
                index[k] = nodes.len() as u32;
                nodes.push(k);
            }
        }
        let mut nbrs = Vec::with_capacity(nodes.len());
        let mut deg = Vec::with_capacity(nodes.len());
        let mut fixed_sum = Vec::with_capacity(nodes.len());
        let mut fixed_sq = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let mut nb = [ABSENT; 4];
            let mut d = 0.0;
            let mut fs = Point::zeros();
            let mut fq = 0.0;
            for (slot, q) in field.neighbors(k).into_iter().enumerate() {
                let Some(q) = q else { continue };
                if !field.is_present(q) {
                    continue;
                }
                d += 1.0;
                if index[q] != ABSENT {
                    nb[slot] = index[q];
                } else {
                    fs += field.values[q];
                    fq += field.values[q].norm_squared();
                }
            }
            nbrs.push(nb);
            deg.push(d);
            fixed_sum.push(fs);
            fixed_sq.push(fq);
        }
        let h2r = field.spacing * field.spacing * r_scale;
        let mut p = Packed { nodes, nbrs, deg, fixed_sum, fixed_sq, h2r, inv_r: 1.0 / r_scale, constant: 0.0 };
        let x = p.gather(field);
        p.constant = energy(field, pot, r_scale) - p.energy(pot, &x);
        p
    }

    fn gather(&self, field: &Field) -> Vec<Point> {
        self.nodes.iter().map(|&k| field.values[k]).collect()
    }

    fn scatter(&self, field: &mut Field, x: &[Point]) {
        for (c, &k) in self.nodes.iter().enumerate() {
            field.values[k] = x[c];
        }
    }

    fn energy(&self, pot: &Potential, x: &[Point]) -> f64 {
        let half_inv_r = 0.5 * self.inv_r;
        let local = chunked_sum(x.len(), |c| {
            let u = x[c];
            let mut e = self.h2r * pot.eval(&u);
            let mut nfree = 0.0;
            for &q in &self.nbrs[c] {
                if q != ABSENT {
                    nfree += 1.0;
                    if (q as usize) > c {
                        e += half_inv_r * (u - x[q as usize]).norm_squared();
                    }
                }
            }
            let nfixed = self.deg[c] - nfree;
            e += half_inv_r * (nfixed * u.norm_squared() - 2.0 * u.dot(&self.fixed_sum[c]) + self.fixed_sq[c]);
            e
        });
        self.constant + local
    }

    fn laplacian_part(&self, x: &[Point], c: usize, v: &Point) -> Point {
        let mut s = *v * self.deg[c];
        for &q in &self.nbrs[c] {
            if q != ABSENT {
                s -= x[q as usize];
            }
        }
        s
    }

    fn gradient(&self, pot: &Potential, x: &[Point]) -> Vec<Point> {
        (0..x.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|c| pot.grad(&x[c]) * self.h2r + (self.laplacian_part(x, c, &x[c]) - self.fixed_sum[c]) * self.inv_r)
            .collect()
    }

    fn hess_vec(&self, hess: &[Mat2], v: &[Point], out: &mut [Point]) {
        out.par_iter_mut().with_min_len(CHUNK).enumerate().for_each(|(c, o)| {
            *o = hess[c] * v[c] * self.h2r + self.laplacian_part(v, c, &v[c]) * self.inv_r;
        });
    }

    fn residual(&self, g: &[Point]) -> f64 {
        g.iter().map(|v| v.norm()).fold(0.0, f64::max) / self.h2r
    }
}

/// Relaxes all interior nodes; fails if the residual does not reach `tol`.
pub fn relax(field: &Field, pot: &Potential, r_scale: f64, tol: f64, max_iter: usize) -> Result<Field> {
    let (out, report) = relax_with(field, pot, r_scale, &RelaxOptions::new(tol, max_iter), None)?;
    if report.converged {
        Ok(out)
    } else {
        Err(Error::Convergence { what: "relax", iterations: report.iterations, residual: report.residual })
    }
}

/// Relaxes the interior nodes flagged in `free` (all interior nodes if
/// `None`). Returns the last iterate even when the tolerance is not reached.
pub fn relax_with(
    field: &Field,
    pot: &Potential,
    r_scale: f64,
    opts: &RelaxOptions,
    free: Option<&[bool]>,
) -> Result<(Field, RelaxReport)> {
    if !(r_scale > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("relax needs R > 0 and tol > 0, got R = {r_scale}, tol = {}", opts.tol)));
    }
    let all;
    let free = match free {
        Some(f) => {
            if f.len() != field.values.len() {
                return Err(Error::InvalidParams("free mask has the wrong length".into()));
            }
            f
        }
        None => {
            all = vec![true; field.values.len()];
            &all
        }
    };
    let packed = Packed::new(field, pot, r_scale, free);
    let mut x = packed.gather(field);
    let report = match opts.method {
        RelaxMethod::Newton => newton(&packed, pot, &mut x, opts),
        RelaxMethod::GradientFlow => gradient_flow(&packed, pot, r_scale, field.spacing, &mut x, opts),
    };
    let mut out = field.clone();
    packed.scatter(&mut out, &x);
    out.fill_ghosts();
    Ok((out, report))
}

/// Slack allowed on energy comparisons, covering summation roundoff.
fn energy_slack(e: f64) -> f64 {
    1e-13 * e.abs().max(1.0)
}

/// Step length `τ ≥ 0` with `‖s + τ d‖_M = radius`, from `‖s‖²`, `sᵀMd`, `dᵀMd`.
fn boundary_tau(ss: f64, sd: f64, dd: f64, radius: f64) -> f64 {
    if dd <= 0.0 {
        return 0.0;
    }
    (-sd + (sd * sd + dd * (radius * radius - ss).max(0.0)).sqrt()) / dd
}

/// Trust-region Newton with Steihaug's truncated conjugate gradients,
/// preconditioned by the diagonal of the Hessian with the potential part
/// clipped at zero. Distances are measured in the matching weighted norm.
fn newton(p: &Packed, pot: &Potential, x: &mut Vec<Point>, opts: &RelaxOptions) -> RelaxReport {
    let m = x.len();
    let mut e = p.energy(pot, x);
    let mut history = vec![e];
    let mut g = p.gradient(pot, x);
    let mut res = p.residual(&g);
    let mut iterations = 0;
    let mut cg_total = 0;
    let g0 = dot(&g, &g).sqrt();
    let mut hess = vec![Mat2::zeros(); m];
    let mut precond = vec![0.0; m];
    let mut weight = vec![0.0; m];
    let (mut r, mut z, mut d, mut hd, mut step) =
        (vec![Point::zeros(); m], vec![Point::zeros(); m], vec![Point::zeros(); m], vec![Point::zeros(); m], vec![Point::zeros(); m]);
    let mut radius = f64::NAN;
    let mut trial = x.clone();
    let mut stalled = 0;
    while res > opts.tol && iterations < opts.max_iter && stalled < 30 {
        iterations += 1;
        hess.par_iter_mut().with_min_len(CHUNK).enumerate().for_each(|(c, h)| *h = pot.hess(&x[c]));
        for c in 0..m {
            let h = &hess[c];
            weight[c] = p.deg[c] * p.inv_r + p.h2r * (0.5 * (h[(0, 0)] + h[(1, 1)])).max(0.0);
            precond[c] = 1.0 / weight[c];
        }
        if radius.is_nan() {
            radius = chunked_sum(m, |c| g[c].norm_squared() * precond[c]).sqrt();
        }
        let gnorm = dot(&g, &g).sqrt();
        let forcing = (gnorm / g0.max(1e-300)).sqrt().min(0.5);
        for c in 0..m {
            step[c] = Point::zeros();
            r[c] = -g[c];
            z[c] = r[c] * precond[c];
            d[c] = z[c];
        }
        let mut rz = dot(&r, &z);
        let mut boundary = false;
        // ‖s‖²_M, sᵀMd and dᵀMd, updated by the usual PCG recurrences
        let (mut ss, mut sd, mut dd) = (0.0, 0.0, rz);
        for _ in 0..opts.max_cg {
            cg_total += 1;
            p.hess_vec(&hess, &d, &mut hd);
            let curv = dot(&d, &hd);
            let a = rz / curv;
            if curv <= 0.0 || ss + 2.0 * a * sd + a * a * dd >= radius * radius {
                let tau = boundary_tau(ss, sd, dd, radius);
                for c in 0..m {
                    step[c] += d[c] * tau;
                }
                boundary = true;
                break;
            }
            let mut rr = 0.0;
            let mut rz_new = 0.0;
            for c in 0..m {
                step[c] += d[c] * a;
                r[c] -= hd[c] * a;
                z[c] = r[c] * precond[c];
                rr += r[c].norm_squared();
                rz_new += r[c].dot(&z[c]);
            }
            ss += 2.0 * a * sd + a * a * dd;
            if rr.sqrt() <= forcing * gnorm {
                break;
            }
            let beta = rz_new / rz;
            rz = rz_new;
            sd = beta * (sd + a * dd);
            dd = rz + beta * beta * dd;
            for c in 0..m {
                d[c] = z[c] + d[c] * beta;
            }
        }
        // model decrease −(gᵀs + ½ sᵀHs)
        p.hess_vec(&hess, &step, &mut hd);
        let predicted = -(dot(&g, &step) + 0.5 * dot(&step, &hd));
        for c in 0..m {
            trial[c] = x[c] + step[c];
        }
        let et = p.energy(pot, &trial);
        let actual = e - et;
        let step_norm = chunked_sum(m, |c| step[c].norm_squared() * weight[c]).sqrt();
        let noisy = predicted.abs() <= 1e3 * energy_slack(e);
        let mut accepted = false;
        let mut gt = Vec::new();
        if noisy {
            if et <= e + energy_slack(e) {
                gt = p.gradient(pot, &trial);
                accepted = p.residual(&gt) < res;
            }
        } else if predicted > 0.0 && actual > 1e-4 * predicted {
            accepted = true;
        }
        let ratio = if predicted > 0.0 { actual / predicted } else { -1.0 };
        if !accepted || ratio < 0.25 {
            radius = 0.25 * step_norm.min(radius);
        } else if ratio > 0.75 && boundary {
            radius *= 2.0;
        }
        if !accepted {
            stalled += 1;
            if !(radius > 0.0) || radius < 1e-14 {
                break;
            }
            continue;
        }
        stalled = 0;
        std::mem::swap(x, &mut trial);
        e = et.min(e);
        history.push(e);
        g = if gt.is_empty() { p.gradient(pot, x) } else { gt };
        res = p.residual(&g);
    }
    RelaxReport { iterations, residual: res, energy_history: history, converged: res <= opts.tol, cg_iterations: cg_total }
}

fn gradient_flow(p: &Packed, pot: &Potential, r_scale: f64, h: f64, x: &mut Vec<Point>, opts: &RelaxOptions) -> RelaxReport {
    let m = x.len();
    let h2r2 = h * h * r_scale * r_scale;
    let lip = pot.lipschitz_bound(x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0) * 1.5);
    let mut dt = h2r2 / (4.0 + h2r2 * lip);
    let mut e = p.energy(pot, x);
    let mut history = vec![e];
    let mut g = p.gradient(pot, x);
    let mut res = p.residual(&g);
    let mut iterations = 0;
    let mut next = vec![Point::zeros(); m];
    while res > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        loop {
            next.par_iter_mut().with_min_len(CHUNK).enumerate().for_each(|(c, o)| {
                let mut nsum = p.fixed_sum[c];
                for &q in &p.nbrs[c] {
                    if q != ABSENT {
                        nsum += x[q as usize];
                    }
                }
                let explicit = x[c] + (nsum / h2r2 - pot.grad(&x[c])) * dt;
                *o = explicit / (1.0 + dt * p.deg[c] / h2r2);
            });
            let en = p.energy(pot, &next);
            if en <= e + energy_slack(e) || dt < 1e-300 {
                e = en.min(e);
                break;
            }
            dt *= 0.5;
        }
        std::mem::swap(x, &mut next);
        history.push(e);
        g = p.gradient(pot, x);
        res = p.residual(&g);
    }
    RelaxReport { iterations, residual: res, energy_history: history, converged: res <= opts.tol, cg_iterations: 0 }
}

#[cfg(test)]
mod tests {
    use super::super::energy::max_residual;
    use super::super::grid::{Bc, Domain, GridSpec};
    use super::*;
    use crate::geodesics::heteroclinic;
    use crate::potential::symmetric_product_well;

    #[test]
    fn slab_relaxes_to_profile_energy() {
        let pot = symmetric_product_well();
        let prof = heteroclinic(&pot, 0, 1, 10.0, 1024).unwrap();
        let g = GridSpec::new(97, 9, 0.125, Point::new(-6.0, 0.0)).unwrap();
        // start from a sharp step; Neumann top and bottom, wells pinned left and right
        let mut f = Field::from_fn(g, Domain::Rect, Bc::Neumann, |x| if x.x < 0.0 { pot.well(0) } else { pot.well(1) });
        let free: Vec<bool> = (0..f.values.len()).map(|k| {
            let i = k % f.nx;
            i != 0 && i != f.nx - 1
        }).collect();
        f.fill_ghosts();
        let (out, rep) = relax_with(&f, &pot, 1.0, &RelaxOptions::new(1e-9, 100), Some(&free)).unwrap();
        assert!(rep.converged, "{rep:?}");
        for w in rep.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        let height = 9.0 * 0.125;
        let per_length = energy(&out, &pot, 1.0) / height;
        assert!((per_length - prof.energy).abs() / prof.energy < 0.01, "{per_length} vs {}", prof.energy);
    }

    #[test]
    fn gradient_flow_decreases_energy() {
        let pot = symmetric_product_well();
        let g = GridSpec::unit_disc(24).unwrap();
        let f = Field::from_fn(g, Domain::unit_disc(), Bc::Dirichlet, |x| {
            let l = if x.y > 0.0 { 0 } else if x.x > 0.0 { 1 } else { 2 };
            pot.well(l) * (1.0 - 0.1 * x.norm())
        });
        let opts = RelaxOptions { method: RelaxMethod::GradientFlow, ..RelaxOptions::new(1e-6, 50) };
        let (_, rep) = relax_with(&f, &pot, 4.0, &opts, None).unwrap();
        for w in rep.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        assert!(rep.energy_history.last().unwrap() < &rep.energy_history[0]);
    }

    #[test]
    fn newton_converges_on_small_disc() {
        let pot = symmetric_product_well();
        let g = GridSpec::unit_disc(32).unwrap();
        let f = Field::from_fn(g, Domain::unit_disc(), Bc::Dirichlet, |x| {
            let a = x.y.atan2(x.x).rem_euclid(std::f64::consts::TAU);
            pot.well((a / (std::f64::consts::TAU / 3.0)) as usize % 3)
        });
        let out = relax(&f, &pot, 4.0, 1e-8, 100).unwrap();
        assert!(max_residual(&out, &pot, 4.0) <= 1e-8);
        for k in 0..out.values.len() {
            if out.mask[k] == super::super::grid::NodeKind::Boundary {
                assert_eq!(out.values[k], f.values[k]);
            }
        }
    }
}
