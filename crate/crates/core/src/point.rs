use num_complex::Complex64;
use std::f64::consts::PI;

/// A point of the underlying sphere stored in log-polar form of the affine
/// coordinate, `z = exp(log_r + i theta)`.
///
/// Working with `log_r` keeps weights and monomials finite near the point
/// at infinity, where `|z|` itself would overflow. The origin has
/// `log_r = -inf`; infinity itself is not representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub log_r: f64,
    pub theta: f64,
}

impl Point {
    pub const ORIGIN: Point = Point {
        log_r: f64::NEG_INFINITY,
        theta: 0.0,
    };

    pub fn new(log_r: f64, theta: f64) -> Self {
        Point { log_r, theta }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Point {
            log_r: r.ln(),
            theta,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Point::ORIGIN;
        }
        Point {
            log_r: z.norm().ln(),
            theta: z.arg(),
        }
    }

    /// Point with coordinate `w = 1/z` in the chart at infinity.
    pub fn from_infinity_chart(w: Complex64) -> Self {
        let p = Point::from_complex(w);
        Point {
            log_r: -p.log_r,
            theta: -p.theta,
        }
    }

    pub fn radius(&self) -> f64 {
        self.log_r.exp()
    }

    pub fn is_origin(&self) -> bool {
        self.log_r == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.radius(), self.theta)
    }

    /// `z^k` as a log-modulus and argument; `z^0 = 1` also at the origin.
    pub fn monomial_log(&self, k: f64) -> (f64, f64) {
        if k == 0.0 {
            (0.0, 0.0)
        } else {
            (k * self.log_r, k * self.theta)
        }
    }

    /// Image under the branched cover `y -> y^m`.
    pub fn power(&self, m: u32) -> Point {
        let m = f64::from(m);
        Point {
            log_r: m * self.log_r,
            theta: m * self.theta,
        }
    }

    /// The `k`-th of the `m` preimages under `y -> y^m`.
    pub fn root(&self, m: u32, k: u32) -> Point {
        let mf = f64::from(m);
        Point {
            log_r: self.log_r / mf,
            theta: (self.theta + 2.0 * PI * f64::from(k)) / mf,
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 + r^2)` from `ln r`.
pub fn log1p_r2(log_r: f64) -> f64 {
    log1p_exp(2.0 * log_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_chart_inverts() {
        let w = Complex64::new(0.25, -0.5);
        let p = Point::from_infinity_chart(w);
        let z = p.to_complex();
        assert!((z * w - 1.0).norm() < 1e-14);
    }

    #[test]
    fn monomial_at_origin() {
        assert_eq!(Point::ORIGIN.monomial_log(0.0), (0.0, 0.0));
        assert_eq!(Point::ORIGIN.monomial_log(2.0).0, f64::NEG_INFINITY);
    }

    #[test]
    fn roots_map_back() {
        let x = Point::from_complex(Complex64::new(-0.3, 0.7));
        for k in 0..3 {
            let y = x.root(3, k);
            assert!((y.power(3).to_complex() - x.to_complex()).norm() < 1e-14);
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert!((log1p_r2(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log1p_r2(400.0) - 800.0).abs() < 1e-12);
        assert!(log1p_r2(-400.0) >= 0.0);
    }
}
