//! Dense complex polynomials, evaluated without overflow for large `|z|`.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// Coefficient of `z^k` at index `k`.
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Polynomial { coeffs }
    }

    /// Index of the highest nonzero coefficient, or `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `p(z)` and `p'(z)` by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Reversed polynomial `z^n p(1/z)` with `n = coeffs.len() - 1`.
    pub fn reversed(&self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().rev().copied().collect(),
        }
    }

    /// `ln |p(z)|`, evaluated in `1/z` outside the unit disk.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            self.eval(z).norm().ln()
        } else {
            let n = (self.coeffs.len() - 1) as f64;
            let w = 1.0 / z;
            let rev = self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c);
            n * r.ln() + rev.norm().ln()
        }
    }

    /// `sum |c_k| |z|^k`, the scale of the rounding error of `p(z)`.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_abs_agrees_with_direct_evaluation() {
        let p = Polynomial::new(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 3.0)]);
        for z in [Complex64::new(0.3, 0.2), Complex64::new(4.0, -7.0)] {
            assert!((p.log_abs(z) - p.eval(z).norm().ln()).abs() < 1e-13);
        }
        let (v, d) = p.eval_with_derivative(Complex64::new(2.0, 0.0));
        assert!((v - Complex64::new(0.0, 14.0)).norm() < 1e-14);
        assert!((d - Complex64::new(-0.5, 12.0)).norm() < 1e-14);
        assert_eq!(p.degree(), Some(2));
    }
}
