//! Polynomial roots by Aberth-Ehrlich simultaneous iteration.

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use num_complex::Complex64;
use std::f64::consts::PI;

pub const MAX_ITERATIONS: usize = 500;
/// Acceptance threshold on the relative backward error
/// `|p(z)| / sum |c_k| |z|^k`.
pub const BACKWARD_TOLERANCE: f64 = 1e-12;

/// Relative backward error of `z` as a root of `p`, computed in `1/z`
/// outside the unit disk.
pub fn backward_error(p: &Polynomial, z: Complex64) -> f64 {
    let r = z.norm();
    if r <= 1.0 {
        let den = p.abs_eval(r);
        if den == 0.0 {
            return 0.0;
        }
        p.eval(z).norm() / den
    } else {
        let rev = p.reversed();
        let w = 1.0 / z;
        rev.eval(w).norm() / rev.abs_eval(w.norm())
    }
}

/// Newton correction `p(z)/p'(z)`, in reversed form for `|z| > 1`.
fn newton_ratio(p: &Polynomial, rev: &Polynomial, z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let (v, d) = p.eval_with_derivative(z);
        v / d
    } else {
        let n = (p.coeffs.len() - 1) as f64;
        let w = 1.0 / z;
        let (r, dr) = rev.eval_with_derivative(w);
        z * r / (n * r - w * dr)
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull
/// of `(k, ln |c_k|)`.
fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    let n = p.coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = p
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(n);
    for (e, w) in hull.windows(2).enumerate() {
        let (i, j) = (w[0].0, w[1].0);
        let k = j - i;
        let r = ((w[0].1 - w[1].1) / k as f64).exp();
        let offset = 0.4 + 0.7 * e as f64;
        for t in 0..k {
            out.push(Complex64::from_polar(r, offset + 2.0 * PI * t as f64 / k as f64));
        }
    }
    out
}

/// All roots of `p` with nonzero constant and leading coefficients.
pub fn aberth_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let n = p.coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![-p.coeffs[0] / p.coeffs[1]]);
    }
    let rev = p.reversed();
    let mut z = initial_guesses(p);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(p, &rev, z[i]);
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let corr = ratio / (1.0 - ratio * s);
            if !corr.re.is_finite() || !corr.im.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= corr;
            if corr.norm() <= 4.0 * f64::EPSILON * z[i].norm() || backward_error(p, z[i]) < 0.1 * BACKWARD_TOLERANCE {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    // Newton polish, kept only where it lowers the backward error.
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let cand = *zi - newton_ratio(p, &rev, *zi);
            if cand.re.is_finite() && cand.im.is_finite() && backward_error(p, cand) < backward_error(p, *zi) {
                *zi = cand;
            }
        }
    }
    let (worst, worst_root) = z
        .iter()
        .map(|&r| (backward_error(p, r), r))
        .fold((0.0, Complex64::new(0.0, 0.0)), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc });
    // negated so that NaN fails the check
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(worst < BACKWARD_TOLERANCE) {
        return Err(Error::RootFinder {
            worst_residual: worst,
            worst_root,
        });
    }
    Ok(z)
}
