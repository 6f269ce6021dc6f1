//! Pairings of potentials, densities and atoms with test functions.
//!
//! `<dd^c v, f> = int v (1/2pi) Laplacian(f) dA`. Two grids are used:
//! a polar grid about the origin, with panel breaks at the singular circles
//! of the potential, and for potentials with logarithmic poles (sections
//! with zeros) a polar grid about the test function's center, where the
//! circle mean of each nearby pole is added back in closed form.

use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::quadrature::{breakpoints_between, radial_rule};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Radial nodes per panel of the pairing grids.
pub const PAIRING_RADIAL_NODES: usize = 32;
/// Poles with `min(rho, rho_k) / max(rho, rho_k)` above this ratio are
/// subtracted before the angular trapezoid sum.
/// Radial nodes per panel of the pole-subtracted pairing.
pub const POLE_RADIAL_NODES: usize = 20;
pub const POLE_RATIO: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Depends on `|z|` only; evaluated at `theta = 0`.
    Radial,
    Planar,
}

/// A local potential `v` in the affine chart.
pub struct Potential<'a> {
    pub eval: &'a dyn Fn(&Point) -> f64,
    pub shape: Shape,
    /// Logarithmic poles `log |z - w_k|` of `v` (zeros of a section).
    pub poles: Vec<Complex64>,
    /// Circles `|z| = r` where `v` is only Lipschitz.
    pub kinks: Vec<f64>,
}

impl<'a> Potential<'a> {
    pub fn radial(eval: &'a dyn Fn(&Point) -> f64, kinks: Vec<f64>) -> Self {
        Potential {
            eval,
            shape: Shape::Radial,
            poles: Vec::new(),
            kinks,
        }
    }

    pub fn planar(eval: &'a dyn Fn(&Point) -> f64, kinks: Vec<f64>) -> Self {
        Potential {
            eval,
            shape: Shape::Planar,
            poles: Vec::new(),
            kinks,
        }
    }

    pub fn with_poles(eval: &'a dyn Fn(&Point) -> f64, poles: Vec<Complex64>) -> Self {
        Potential {
            eval,
            shape: Shape::Planar,
            poles,
            kinks: Vec::new(),
        }
    }
}

/// Polar grid about the origin covering the support of one test function,
/// with ring means of `f` and `Laplacian(f)` cached per radial node.
#[derive(Debug, Clone)]
pub struct PairingGrid {
    pub f: TestFunction,
    radial: Vec<(f64, f64)>,
    angles: usize,
    ring_f: Vec<f64>,
    ring_lap: Vec<f64>,
}

impl PairingGrid {
    pub fn new(f: &TestFunction, kinks: &[f64]) -> Result<Self> {
        Self::graded(f, kinks, 2)
    }

    /// Grid whose first panel (when it starts at the origin) is graded as
    /// `r = b t^q`, for integrands with a power singularity at 0.
    pub fn graded(f: &TestFunction, kinks: &[f64], q: u32) -> Result<Self> {
        let inner = f.inner_radius();
        let outer = f.outer_radius();
        let scale = f.scale();
        if !(scale > 0.0 && outer.is_finite()) {
            return Err(Error::Config(format!("degenerate test function {}", f.label())));
        }
        let mut extra: Vec<f64> = kinks.to_vec();
        extra.extend(f.kinks());
        if let Some(c) = f.radial_center() {
            let c = c.norm();
            extra.push(c);
            if let TestFunction::GaussBump { width, .. } = f {
                for k in 1..=8 {
                    extra.push(c + f64::from(k) * width);
                    extra.push(c - f64::from(k) * width);
                }
            }
        }
        let breaks = breakpoints_between(inner, outer, &extra, scale);
        let radial: Vec<(f64, f64)> = radial_rule(&breaks, PAIRING_RADIAL_NODES, q.max(1))
            .into_iter()
            .map(|(r, w)| (r, w * r))
            .collect();
        let angles = ((16.0 * outer / scale).ceil() as usize).max(256).next_power_of_two();
        let h = 2.0 * PI / angles as f64;
        let mut ring_f = Vec::with_capacity(radial.len());
        let mut ring_lap = Vec::with_capacity(radial.len());
        for &(r, _) in &radial {
            let (mut sf, mut sl) = (0.0, 0.0);
            for k in 0..angles {
                let z = Complex64::from_polar(r, h * k as f64);
                sf += f.value(z);
                sl += f.laplacian(z);
            }
            ring_f.push(sf / angles as f64);
            ring_lap.push(sl / angles as f64);
        }
        Ok(PairingGrid {
            f: f.clone(),
            radial,
            angles,
            ring_f,
            ring_lap,
        })
    }

    fn check(v: f64, r: f64, theta: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { value: v, radius: r, theta })
        }
    }

    /// `<dd^c v, f>` for a radial potential given as a function of `ln r`.
    pub fn pair_radial(&self, v: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for (i, &(r, w)) in self.radial.iter().enumerate() {
            if self.ring_lap[i] == 0.0 {
                continue;
            }
            s += w * self.ring_lap[i] * Self::check(v(r.ln()), r, 0.0)?;
        }
        Ok(s)
    }

    /// `<dd^c v, f>` for a general potential without poles in the support.
    pub fn pair_planar(&self, v: &dyn Fn(&Point) -> f64) -> Result<f64> {
        let h = 2.0 * PI / self.angles as f64;
        let mut s = 0.0;
        for &(r, w) in &self.radial {
            let lr = r.ln();
            let mut ring = 0.0;
            for k in 0..self.angles {
                let th = h * k as f64;
                let lap = self.f.laplacian(Complex64::from_polar(r, th));
                if lap != 0.0 {
                    ring += lap * Self::check(v(&Point::new(lr, th)), r, th)?;
                }
            }
            s += w * ring / self.angles as f64;
        }
        Ok(s)
    }

    /// `int f rho dA` for a radial density given as a function of `ln r`.
    pub fn integrate_radial_density(&self, rho: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for (i, &(r, w)) in self.radial.iter().enumerate() {
            if self.ring_f[i] == 0.0 {
                continue;
            }
            s += 2.0 * PI * w * self.ring_f[i] * Self::check(rho(r.ln()), r, 0.0)?;
        }
        Ok(s)
    }

    /// `int f rho dA` for a general density.
    pub fn integrate_density(&self, rho: &dyn Fn(&Point) -> f64) -> Result<f64> {
        let h = 2.0 * PI / self.angles as f64;
        let mut s = 0.0;
        for &(r, w) in &self.radial {
            let lr = r.ln();
            let mut ring = 0.0;
            for k in 0..self.angles {
                let th = h * k as f64;
                let fv = self.f.value(Complex64::from_polar(r, th));
                if fv != 0.0 {
                    ring += fv * Self::check(rho(&Point::new(lr, th)), r, th)?;
                }
            }
            s += w * h * ring;
        }
        Ok(s)
    }

    pub fn pair(&self, v: &Potential) -> Result<f64> {
        if !v.poles.is_empty() {
            return pair_with_poles(&self.f, v.eval, &v.poles, &v.kinks);
        }
        match v.shape {
            Shape::Radial => self.pair_radial(&|lr| (v.eval)(&Point::new(lr, 0.0))),
            Shape::Planar => self.pair_planar(v.eval),
        }
    }
}

/// Mean of `f` over the circle `|z| = r`.
pub fn circle_mean(f: &TestFunction, r: f64) -> f64 {
    let n = ((16.0 * r / f.scale()).ceil() as usize).max(512).next_power_of_two();
    let h = 2.0 * PI / n as f64;
    (0..n).map(|k| f.value(Complex64::from_polar(r, h * k as f64))).sum::<f64>() / n as f64
}

/// `<dd^c v, f>` on a polar grid centered at the radial center of `f`,
/// for `v` with logarithmic poles at `poles`. On each circle about the
/// center the poles near the circle are subtracted from `v` and their exact
/// circle means `log max(rho, |w_k - c|)` added back.
pub fn pair_with_poles(
    f: &TestFunction,
    v: &dyn Fn(&Point) -> f64,
    poles: &[Complex64],
    kinks: &[f64],
) -> Result<f64> {
    pair_with_poles_at(f, &|z: Complex64| v(&Point::from_complex(z)), poles, kinks)
}

/// [`pair_with_poles`] for a potential evaluated directly at affine points.
pub fn pair_with_poles_at(
    f: &TestFunction,
    v: &dyn Fn(Complex64) -> f64,
    poles: &[Complex64],
    kinks: &[f64],
) -> Result<f64> {
    let c = f.radial_center().ok_or_else(|| {
        Error::Unsupported(format!("pole pairing needs a radial test function, got {}", f.label()))
    })?;
    let (a, b) = f.laplacian_band();
    let dists: Vec<f64> = poles.iter().map(|w| (w - c).norm()).collect();
    let mut extra = dists.clone();
    if c == Complex64::new(0.0, 0.0) {
        extra.extend_from_slice(kinks);
    } else if !kinks.is_empty() {
        return Err(Error::Unsupported("kinked potentials need an origin-centered test function".into()));
    }
    let breaks = breakpoints_between(a, b, &extra, f.scale());
    // poles left in the ring sit at ratio < POLE_RATIO, so their Fourier
    // tails fall below 0.85^128 ~ 1e-9
    let n = 128usize.max(((8.0 * b / f.scale()).ceil() as usize).next_power_of_two());
    let units: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut total = 0.0;
    for (rho, w) in radial_rule(&breaks, POLE_RADIAL_NODES, 2) {
        let lap = f.laplacian(c + rho);
        if lap == 0.0 {
            continue;
        }
        let near: Vec<usize> = (0..poles.len())
            .filter(|&k| {
                let (lo, hi) = if dists[k] < rho { (dists[k], rho) } else { (rho, dists[k]) };
                hi > 0.0 && lo / hi >= POLE_RATIO
            })
            .collect();
        let mut ring = 0.0;
        for u in &units {
            let z = c + rho * u;
            let mut val = v(z);
            if !near.is_empty() {
                // one log of the product instead of one per pole
                let prod: f64 = near.iter().map(|&j| (z - poles[j]).norm_sqr()).product();
                val -= 0.5 * prod.ln();
            }
            if !val.is_finite() {
                return Err(Error::NonFinite {
                    value: val,
                    radius: z.norm(),
                    theta: z.arg(),
                });
            }
            ring += val;
        }
        let mut mean = ring / n as f64;
        for &j in &near {
            mean += rho.max(dists[j]).ln();
        }
        total += w * rho * lap * mean;
    }
    Ok(total)
}

/// `<dd^c v, f>` with a freshly built grid.
pub fn ddc_pair(v: &Potential, f: &TestFunction) -> Result<f64> {
    if !v.poles.is_empty() {
        return pair_with_poles(f, v.eval, &v.poles, &v.kinks);
    }
    PairingGrid::new(f, &v.kinks)?.pair(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_solution() {
        for s in [0.1, 0.3] {
            let f = TestFunction::gauss(Complex64::new(0.0, 0.0), s);
            let v = |p: &Point| p.log_r;
            let got = ddc_pair(&Potential::radial(&v, vec![]), &f).unwrap();
            assert!((got - 1.0).abs() < 1e-10, "{got}");
        }
    }

    #[test]
    fn off_center_pole() {
        let w = Complex64::new(0.7, 0.2);
        let f = TestFunction::gauss(Complex64::new(0.6, 0.3), 0.2);
        let v = move |p: &Point| (p.to_complex() - w).norm().ln();
        let got = ddc_pair(&Potential::with_poles(&v, vec![w]), &f).unwrap();
        assert!((got - f.value(w)).abs() < 1e-10, "{got} {}", f.value(w));
    }
}
