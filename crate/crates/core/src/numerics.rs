//! Small dense numerical helpers shared by the solvers.

use nalgebra::{Matrix2, Vector2};

/// Solves a symmetric tridiagonal system with constant-coefficient-free
/// diagonals `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// (Thomas algorithm). `lower[0]` and `upper[n-1]` are ignored.
/// Returns `None` on a vanishing pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return None;
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv.abs() < 1e-300 {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

/// Block tridiagonal solve with 2×2 blocks where the off-diagonal blocks are
/// `off · I`. Returns `None` if a pivot block is not positive definite, which
/// the callers use to detect indefinite Hessians.
pub fn solve_block_tridiagonal_spd(
    diag: &[Matrix2<f64>],
    off: f64,
    rhs: &[Vector2<f64>],
) -> Option<Vec<Vector2<f64>>> {
    let n = diag.len();
    let mut cprime: Vec<Matrix2<f64>> = Vec::with_capacity(n);
    let mut dprime: Vec<Vector2<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut piv = diag[i];
        let mut r = rhs[i];
        if i > 0 {
            piv -= cprime[i - 1] * off;
            r -= dprime[i - 1] * off;
        }
        // SPD test on the symmetric part of the pivot
        let sym = (piv + piv.transpose()) * 0.5;
        if sym[(0, 0)] <= 0.0 || sym.determinant() <= 0.0 {
            return None;
        }
        let inv = piv.try_inverse()?;
        cprime.push(inv * off);
        dprime.push(inv * r);
    }
    let mut x = dprime;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= cprime[i] * next;
    }
    Some(x)
}

/// Ordinary least squares fit `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the slope (NaN with fewer than three points).
    pub slope_stderr: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len();
    assert_eq!(n, y.len());
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 && sxx > 0.0 {
        let sse: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - intercept - slope * a;
                r * r
            })
            .sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LinearFit { intercept, slope, slope_stderr, n }
}

/// Fits `y ≈ C·x^p` in log-log coordinates; only positive samples are used.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    Some(linear_fit(&lx, &ly))
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.1, x_tol: 1e-13, f_tol: 1e-15, max_iter: 5000 }
    }
}

/// Nelder-Mead simplex minimisation in two variables.
pub fn nelder_mead_2d<F>(f: F, x0: Vector2<f64>, opts: NelderMeadOptions) -> (Vector2<f64>, f64)
where
    F: Fn(&Vector2<f64>) -> f64,
{
    let mut simplex = [
        x0,
        x0 + Vector2::new(opts.initial_step, 0.0),
        x0 + Vector2::new(0.0, opts.initial_step),
    ];
    let mut vals = simplex.map(|p| f(&p));
    for _ in 0..opts.max_iter {
        // order best..worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);

        let size = (simplex[1] - simplex[0]).norm().max((simplex[2] - simplex[0]).norm());
        if size < opts.x_tol && (vals[2] - vals[0]).abs() < opts.f_tol.max(1e-15 * vals[0].abs()) {
            break;
        }
        if size < 1e-15 {
            break;
        }
        let centroid = (simplex[0] + simplex[1]) * 0.5;
        let reflect = centroid + (centroid - simplex[2]);
        let fr = f(&reflect);
        if fr < vals[0] {
            let expand = centroid + (reflect - centroid) * 2.0;
            let fe = f(&expand);
            if fe < fr {
                simplex[2] = expand;
                vals[2] = fe;
            } else {
                simplex[2] = reflect;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = reflect;
            vals[2] = fr;
        } else {
            let (contract, fc) = if fr < vals[2] {
                let c = centroid + (reflect - centroid) * 0.5;
                (c, f(&c))
            } else {
                let c = centroid + (simplex[2] - centroid) * 0.5;
                (c, f(&c))
            };
            if fc < vals[2].min(fr) {
                simplex[2] = contract;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = simplex[0] + (simplex[i] - simplex[0]) * 0.5;
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    (simplex[best], vals[best])
}

/// Cubic Hermite interpolation on a uniform grid `t_k = t0 + k dt` with
/// derivatives from centred differences. Outside the grid the end values are held.
pub fn hermite_uniform(values: &[Vector2<f64>], t0: f64, dt: f64, t: f64) -> Vector2<f64> {
    let n = values.len();
    let s = (t - t0) / dt;
    if s <= 0.0 {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let k = (s.floor() as usize).min(n - 2);
    let u = s - k as f64;
    let deriv = |i: usize| -> Vector2<f64> {
        if i == 0 {
            values[1] - values[0]
        } else if i == n - 1 {
            values[n - 1] - values[n - 2]
        } else {
            (values[i + 1] - values[i - 1]) * 0.5
        }
    };
    let (p0, p1) = (values[k], values[k + 1]);
    let (m0, m1) = (deriv(k), deriv(k + 1));
    let u2 = u * u;
    let u3 = u2 * u;
    p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
        + m0 * (u3 - 2.0 * u2 + u)
        + p1 * (-2.0 * u3 + 3.0 * u2)
        + m1 * (u3 - u2)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 6;
        let lower = vec![-1.0; n];
        let upper = vec![-1.0; n];
        let diag = vec![3.0; n];
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut r = 3.0 * x_true[i];
                if i > 0 {
                    r -= x_true[i - 1];
                }
                if i + 1 < n {
                    r -= x_true[i + 1];
                }
                r
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |p: &Vector2<f64>| (p.x - 0.3).powi(2) + 4.0 * (p.y + 0.2).powi(2);
        let (x, v) = nelder_mead_2d(f, Vector2::zeros(), NelderMeadOptions::default());
        assert!((x - Vector2::new(0.3, -0.2)).norm() < 1e-7);
        assert!(v < 1e-13);
    }

    #[test]
    fn power_law_recovers_exponent() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        let fit = power_law_fit(&x, &y).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
    }
}
