use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gaussian bumps are cut off at this many widths; the neglected tail is
/// below `exp(-32.8) < 1e-14`.
pub const GAUSS_CUTOFF: f64 = 8.1;

/// Smooth compactly supported test functions with closed-form Laplacians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestFunction {
    /// `exp(-|z - a|^2 / (2 s^2))`, truncated at `GAUSS_CUTOFF * s`.
    GaussBump { center: [f64; 2], width: f64 },
    /// 1 on `|z| <= r0`, 0 on `|z| >= r0 + margin`, septic smoothstep between.
    RadialCap { r0: f64, margin: f64 },
    /// `f(y^m)` for an inner test function `f`.
    Pullback { inner: Box<TestFunction>, m: u32 },
}

/// Centered septic smoothstep profile and its first two derivatives.
fn septic(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
    let u = 1.0 - t;
    let ds = 140.0 * t.powi(3) * u.powi(3);
    let dds = 420.0 * t * t * u * u * (1.0 - 2.0 * t);
    (s, ds, dds)
}

impl TestFunction {
    pub fn gauss(center: Complex64, width: f64) -> Self {
        TestFunction::GaussBump {
            center: [center.re, center.im],
            width,
        }
    }

    pub fn cap(r0: f64, margin: f64) -> Self {
        TestFunction::RadialCap { r0, margin }
    }

    pub fn pullback(self, m: u32) -> Self {
        TestFunction::Pullback {
            inner: Box::new(self),
            m,
        }
    }

    /// Point about which the function is radial, if any.
    pub fn radial_center(&self) -> Option<Complex64> {
        match self {
            TestFunction::GaussBump { center, .. } => Some(Complex64::new(center[0], center[1])),
            TestFunction::RadialCap { .. } => Some(Complex64::new(0.0, 0.0)),
            TestFunction::Pullback { inner, m } => match inner.radial_center() {
                Some(c) if c == Complex64::new(0.0, 0.0) => Some(c),
                c if *m == 1 => c,
                _ => None,
            },
        }
    }

    /// Radii `[a, b]` about `radial_center` outside which `Laplacian(f) = 0`.
    pub fn laplacian_band(&self) -> (f64, f64) {
        match self {
            TestFunction::GaussBump { width, .. } => (0.0, GAUSS_CUTOFF * width),
            TestFunction::RadialCap { r0, margin } => (*r0, r0 + margin),
            TestFunction::Pullback { inner, m } => {
                let (a, b) = inner.laplacian_band();
                if *m == 1 {
                    return (a, b);
                }
                let k = 1.0 / f64::from(*m);
                if inner.radial_center() == Some(Complex64::new(0.0, 0.0)) {
                    (a.powf(k), b.powf(k))
                } else {
                    (self.inner_radius(), self.outer_radius())
                }
            }
        }
    }

    /// Radius about `radial_center` (or the origin) outside which `f = 0`.
    pub fn support_radius(&self) -> f64 {
        match self {
            TestFunction::GaussBump { width, .. } => GAUSS_CUTOFF * width,
            TestFunction::RadialCap { r0, margin } => r0 + margin,
            TestFunction::Pullback { .. } => self.outer_radius(),
        }
    }

    /// Smallest R with `supp f` inside `|z| <= R`.
    pub fn outer_radius(&self) -> f64 {
        match self {
            TestFunction::GaussBump { center, width } => center[0].hypot(center[1]) + GAUSS_CUTOFF * width,
            TestFunction::RadialCap { r0, margin } => r0 + margin,
            TestFunction::Pullback { inner, m } => inner.outer_radius().powf(1.0 / f64::from(*m)),
        }
    }

    /// Largest r with `supp f` outside `|z| < r`.
    pub fn inner_radius(&self) -> f64 {
        match self {
            TestFunction::GaussBump { center, width } => {
                (center[0].hypot(center[1]) - GAUSS_CUTOFF * width).max(0.0)
            }
            TestFunction::RadialCap { .. } => 0.0,
            TestFunction::Pullback { inner, m } => inner.inner_radius().powf(1.0 / f64::from(*m)),
        }
    }

    /// Radii (about the origin) where the function is only finitely smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            TestFunction::GaussBump { .. } => Vec::new(),
            TestFunction::RadialCap { r0, margin } => vec![*r0, r0 + margin],
            TestFunction::Pullback { inner, m } => {
                inner.kinks().into_iter().map(|r| r.powf(1.0 / f64::from(*m))).collect()
            }
        }
    }

    /// Characteristic length scale used to size quadrature panels.
    pub fn scale(&self) -> f64 {
        match self {
            TestFunction::GaussBump { width, .. } => *width,
            TestFunction::RadialCap { margin, .. } => margin / 2.0,
            TestFunction::Pullback { inner, m } => {
                let r = inner.outer_radius().max(1e-3);
                // y -> y^m compresses lengths by m |y|^(m-1)
                (inner.scale() / (f64::from(*m) * r.powf(1.0 - 1.0 / f64::from(*m)))).min(inner.scale())
            }
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        match self {
            TestFunction::GaussBump { center, width } => {
                let d2 = (z - Complex64::new(center[0], center[1])).norm_sqr();
                if d2 > (GAUSS_CUTOFF * width).powi(2) {
                    0.0
                } else {
                    (-d2 / (2.0 * width * width)).exp()
                }
            }
            TestFunction::RadialCap { r0, margin } => 1.0 - septic((z.norm() - r0) / margin).0,
            TestFunction::Pullback { inner, m } => inner.value(z.powu(*m)),
        }
    }

    pub fn laplacian(&self, z: Complex64) -> f64 {
        match self {
            TestFunction::GaussBump { center, width } => {
                let d2 = (z - Complex64::new(center[0], center[1])).norm_sqr();
                if d2 > (GAUSS_CUTOFF * width).powi(2) {
                    return 0.0;
                }
                let s2 = width * width;
                (d2 / (s2 * s2) - 2.0 / s2) * (-d2 / (2.0 * s2)).exp()
            }
            TestFunction::RadialCap { r0, margin } => {
                let rho = z.norm();
                let t = (rho - r0) / margin;
                if t <= 0.0 || t >= 1.0 {
                    return 0.0;
                }
                let (_, ds, dds) = septic(t);
                -(dds / (margin * margin) + ds / (margin * rho))
            }
            TestFunction::Pullback { inner, m } => {
                let mf = f64::from(*m);
                let scale = if *m == 1 { 1.0 } else { mf * mf * z.norm_sqr().powf(mf - 1.0) };
                scale * inner.laplacian(z.powu(*m))
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        1.0
    }

    pub fn sup_abs_laplacian(&self) -> f64 {
        match self {
            TestFunction::GaussBump { width, .. } => 2.0 / (width * width),
            _ => {
                let r = self.outer_radius();
                let n = 4000;
                (0..=n)
                    .flat_map(|i| {
                        let rho = r * i as f64 / n as f64;
                        (0..16).map(move |k| Complex64::from_polar(rho, k as f64 * std::f64::consts::FRAC_PI_8))
                    })
                    .map(|z| self.laplacian(z).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::GaussBump { center, width } => {
                format!("gauss({:.4},{:.4};{})", center[0], center[1], width)
            }
            TestFunction::RadialCap { r0, margin } => format!("cap({r0};{margin})"),
            TestFunction::Pullback { inner, m } => format!("pull{m}[{}]", inner.label()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: &TestFunction, z: Complex64) -> f64 {
        let h = 1e-4;
        let e = [Complex64::new(h, 0.0), Complex64::new(0.0, h)];
        e.iter().map(|&d| f.value(z + d) + f.value(z - d) - 2.0 * f.value(z)).sum::<f64>() / (h * h)
    }

    #[test]
    fn laplacians_match_finite_differences() {
        let fs = [
            TestFunction::gauss(Complex64::new(0.3, -0.2), 0.25),
            TestFunction::cap(1.0, 0.5),
            TestFunction::gauss(Complex64::new(0.6, 0.1), 0.2).pullback(3),
            TestFunction::cap(0.5, 0.7).pullback(2),
        ];
        let pts = [Complex64::new(0.35, 0.1), Complex64::new(-0.4, 1.1), Complex64::new(0.8, 0.6)];
        for f in &fs {
            for &z in &pts {
                let a = f.laplacian(z);
                let b = fd_laplacian(f, z);
                assert!((a - b).abs() < 1e-5 * (1.0 + a.abs()), "{}: {a} {b}", f.label());
            }
        }
    }

    #[test]
    fn septic_profile_is_smooth_at_ends() {
        let (s0, d0, dd0) = septic(1e-9);
        let (s1, d1, dd1) = septic(1.0 - 1e-9);
        assert!(s0 < 1e-30 && d0 < 1e-20 && dd0.abs() < 1e-12);
        assert!((s1 - 1.0).abs() < 1e-15 && d1 < 1e-20 && dd1.abs() < 1e-12);
    }

    #[test]
    fn gauss_sup_laplacian() {
        let f = TestFunction::gauss(Complex64::new(0.0, 0.0), 0.5);
        assert_eq!(f.sup_abs_laplacian(), 8.0);
        assert!((f.laplacian(Complex64::new(0.0, 0.0)).abs() - 8.0).abs() < 1e-14);
    }
}
