//! Spaces of L2 holomorphic sections, their Gram matrices, orthonormal
//! bases and Bergman kernel functions.
//!
//! Sections are polynomials in the affine coordinate. For the football,
//! exponents are stored upstairs (multiples of `m` in the cover coordinate
//! `y`) and a monomial `y^e` is the downstairs monomial `x^(e/m)`.

use crate::error::{Error, Result};
use crate::model::{ModelKind, OrbifoldModel};
use crate::point::Point;
use crate::quadrature::{OrbifoldGrid, QuadratureConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub type CMatrix = DMatrix<Complex64>;

/// Invariant monomial exponents of `L^p` (or `L^p (x) K` when `twist`).
pub fn enumerate_basis(model: &OrbifoldModel, p: u32, twist: bool) -> Result<Vec<u32>> {
    if p == 0 {
        return Err(Error::Config("tensor power p must be at least 1".into()));
    }
    let pd = p * model.degree();
    if model.kind() == ModelKind::Football {
        if twist {
            return Err(Error::Unsupported(
                "canonical twist of the football orbifold is not supported".into(),
            ));
        }
        let m = model.cover_order();
        return Ok((0..=pd).map(|k| k * m).collect());
    }
    if twist {
        if pd < 2 {
            return Ok(Vec::new());
        }
        return Ok((0..=pd - 2).collect());
    }
    Ok((0..=pd).collect())
}

/// Resolution data that determines the Gram matrix, used as cache key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceKey {
    pub model_hash: u64,
    pub p: u32,
    pub twist: bool,
    pub exponents: Vec<u32>,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub breakpoints: Vec<f64>,
}

impl SpaceKey {
    pub fn hash(&self) -> u64 {
        let mut h = crate::hash::Fnv1a64::new();
        h.update(serde_json::to_string(self).expect("space key serializes").as_bytes());
        h.finish()
    }
}

#[derive(Debug, Clone)]
pub struct SectionSpace {
    pub model: Arc<OrbifoldModel>,
    pub p: u32,
    pub twist: bool,
    pub exponents: Vec<u32>,
    pub gram: CMatrix,
    /// Column `j` holds the monomial coefficients of the `j`-th orthonormal
    /// section; `C^H G C = I`.
    pub ortho_coeffs: CMatrix,
    /// Largest change of a Gram entry when the quadrature is halved.
    pub gram_error: f64,
    pub quadrature: QuadratureConfig,
    /// Whether `ortho_coeffs` is upper triangular (true unless remixed).
    triangular: bool,
}

impl SectionSpace {
    pub fn new(model: Arc<OrbifoldModel>, p: u32, twist: bool, cfg: &QuadratureConfig) -> Result<Self> {
        let exponents = enumerate_basis(&model, p, twist)?;
        Self::with_exponents(model, p, twist, exponents, cfg)
    }

    /// Space spanned by a chosen subset of the invariant monomials.
    pub fn with_exponents(
        model: Arc<OrbifoldModel>,
        p: u32,
        twist: bool,
        exponents: Vec<u32>,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let (gram, gram_error) = gram_matrix(&model, &exponents, p, twist, cfg)?;
        Self::from_gram(model, p, twist, exponents, gram, gram_error, cfg)
    }

    pub fn from_gram(
        model: Arc<OrbifoldModel>,
        p: u32,
        twist: bool,
        exponents: Vec<u32>,
        gram: CMatrix,
        gram_error: f64,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Config(format!("section space of {} at p={p} is empty", model.kind().name())));
        }
        let m = model.cover_order();
        if exponents.iter().any(|e| e % m != 0) {
            return Err(Error::Config("exponents must be invariant under the isotropy".into()));
        }
        let ortho_coeffs = orthonormalize(&gram)?;
        Ok(SectionSpace {
            model,
            p,
            twist,
            exponents,
            gram,
            ortho_coeffs,
            gram_error,
            quadrature: cfg.clone(),
            triangular: true,
        })
    }

    /// Reassemble a space from stored matrices without refactoring the Gram.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        model: Arc<OrbifoldModel>,
        p: u32,
        twist: bool,
        exponents: Vec<u32>,
        gram: CMatrix,
        ortho_coeffs: CMatrix,
        gram_error: f64,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let n = exponents.len();
        if gram.shape() != (n, n) || ortho_coeffs.shape() != (n, n) {
            return Err(Error::Config(format!("stored matrices do not match dimension {n}")));
        }
        Ok(SectionSpace {
            model,
            p,
            twist,
            exponents,
            gram,
            ortho_coeffs,
            gram_error,
            quadrature: cfg.clone(),
            triangular: true,
        })
    }

    pub fn key(&self) -> SpaceKey {
        space_key(&self.model, self.p, self.twist, &self.exponents, &self.quadrature)
    }

    fn row_end(&self, j: usize) -> usize {
        if self.triangular {
            j + 1
        } else {
            self.dimension()
        }
    }

    pub fn dimension(&self) -> usize {
        self.exponents.len()
    }

    /// Whether the Gram matrix is diagonal to working accuracy, so that
    /// kernel and potentials depend on `|z|` only.
    pub fn is_rotation_invariant(&self) -> bool {
        if !self.triangular {
            return false;
        }
        let g = &self.gram;
        (0..g.nrows()).all(|j| {
            (j + 1..g.ncols()).all(|k| g[(j, k)].norm() <= 1e-10 * (g[(j, j)].re * g[(k, k)].re).sqrt())
        })
    }

    /// Downstairs polynomial degrees of the basis monomials.
    pub fn degrees(&self) -> Vec<u32> {
        let m = self.model.cover_order();
        self.exponents.iter().map(|e| e / m).collect()
    }

    /// Degree of the line bundle whose sections these are; zeros of a
    /// section number exactly this many, counted with multiplicity and
    /// including those at infinity.
    pub fn zero_budget(&self) -> u32 {
        let pd = self.p * self.model.degree();
        if self.twist {
            pd - 2
        } else {
            pd
        }
    }

    /// Total weight `psi` with `|s|^2 exp(-2 psi)` the pointwise norm.
    pub fn total_weight(&self, log_r: f64) -> f64 {
        total_weight(&self.model, self.p, self.twist, log_r)
    }

    /// Log-moduli shift and scaled monomials `exp(d_k L - psi - shift) e^{i d_k theta}`.
    fn scaled_monomials(&self, pt: &Point) -> (f64, Vec<Complex64>) {
        let psi = self.total_weight(pt.log_r);
        let logs: Vec<(f64, f64)> = self
            .degrees()
            .iter()
            .map(|&d| {
                let (lr, th) = pt.monomial_log(f64::from(d));
                (lr - psi, th)
            })
            .collect();
        let shift = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return (shift, vec![Complex64::new(0.0, 0.0); logs.len()]);
        }
        let v = logs
            .iter()
            .map(|&(lr, th)| Complex64::from_polar((lr - shift).exp(), th))
            .collect();
        (shift, v)
    }

    /// `ln P(z)` and the normalized orthonormal section values at `z`
    /// scaled by `exp(-shift)`.
    fn log_kernel_parts(&self, pt: &Point) -> (f64, f64, Vec<Complex64>) {
        let (shift, v) = self.scaled_monomials(pt);
        let c = &self.ortho_coeffs;
        let d = self.dimension();
        let mut s = vec![Complex64::new(0.0, 0.0); d];
        for (j, sj) in s.iter_mut().enumerate() {
            for k in 0..self.row_end(j) {
                *sj += c[(k, j)] * v[k];
            }
        }
        let sum: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        (shift, sum, s)
    }

    /// `ln P(z)`; `-inf` at a common zero of all sections.
    pub fn log_bergman_kernel(&self, pt: &Point) -> f64 {
        let (shift, sum, _) = self.log_kernel_parts(pt);
        2.0 * shift + sum.ln()
    }

    pub fn bergman_kernel(&self, pt: &Point) -> f64 {
        self.log_bergman_kernel(pt).exp()
    }

    /// `max |S(z)|^2` over unit-norm sections, attained by the coherent
    /// state `a_j = conj(S_j(z)) / sqrt(P(z))`, evaluated directly from the
    /// monomial coefficients of that extremal section.
    pub fn bergman_extremal(&self, pt: &Point) -> f64 {
        let (shift, sum, s) = self.log_kernel_parts(pt);
        if sum == 0.0 || !sum.is_finite() {
            return 0.0;
        }
        let norm = sum.sqrt();
        let a: Vec<Complex64> = s.iter().map(|z| z.conj() / norm).collect();
        let b = self.monomial_coeffs(&a);
        let (shift2, v) = self.scaled_monomials(pt);
        debug_assert_eq!(shift, shift2);
        let val: Complex64 = b.iter().zip(&v).map(|(b, v)| b * v).sum();
        (2.0 * shift2).exp() * val.norm_sqr()
    }

    /// `|S_a(z)|^2 exp(-2 psi)` for `S_a = sum_j a_j S_j`.
    pub fn section_norm_sqr(&self, a: &[Complex64], pt: &Point) -> f64 {
        let b = self.monomial_coeffs(a);
        let (shift, v) = self.scaled_monomials(pt);
        let val: Complex64 = b.iter().zip(&v).map(|(b, v)| b * v).sum();
        (2.0 * shift).exp() * val.norm_sqr()
    }

    /// `ln |S_a(z)|` of the polynomial (without the metric weight).
    pub fn log_abs_section(&self, a: &[Complex64], pt: &Point) -> f64 {
        let b = self.monomial_coeffs(a);
        let (shift, v) = self.scaled_monomials(pt);
        let val: Complex64 = b.iter().zip(&v).map(|(b, v)| b * v).sum();
        shift + val.norm().ln() + self.total_weight(pt.log_r)
    }

    /// Fubini-Study potential `(1/2) ln sum_j |s_j(z)|^2`; `-inf` marks a
    /// common zero of the basis.
    pub fn fs_potential(&self, pt: &Point) -> f64 {
        0.5 * self.log_bergman_kernel(pt) + self.total_weight(pt.log_r)
    }

    /// Monomial coefficients `b = C a`, one per basis exponent.
    pub fn monomial_coeffs(&self, a: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(a.len(), self.dimension(), "coefficient vector has wrong length");
        let c = &self.ortho_coeffs;
        (0..self.dimension())
            .map(|k| {
                let start = if self.triangular { k } else { 0 };
                (start..self.dimension()).map(|j| c[(k, j)] * a[j]).sum()
            })
            .collect()
    }

    /// Dense polynomial coefficients in the downstairs coordinate, index =
    /// degree, length `zero_budget + 1`.
    pub fn polynomial(&self, a: &[Complex64]) -> Vec<Complex64> {
        let b = self.monomial_coeffs(a);
        let mut out = vec![Complex64::new(0.0, 0.0); self.zero_budget() as usize + 1];
        for (d, bk) in self.degrees().iter().zip(b) {
            out[*d as usize] = bk;
        }
        out
    }

    /// Upstairs evaluation of the football kernel at a cover point `y`
    /// (monomials `y^e`, upstairs weight); equals the downstairs kernel at
    /// `y^m`.
    pub fn upstairs_bergman_kernel(&self, y: &Point) -> f64 {
        let psi = f64::from(self.p) * self.model.upstairs_weight(y);
        let logs: Vec<(f64, f64)> = self
            .exponents
            .iter()
            .map(|&e| {
                let (lr, th) = y.monomial_log(f64::from(e));
                (lr - psi, th)
            })
            .collect();
        let shift = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return 0.0;
        }
        let v: Vec<Complex64> = logs
            .iter()
            .map(|&(lr, th)| Complex64::from_polar((lr - shift).exp(), th))
            .collect();
        let c = &self.ortho_coeffs;
        let sum: f64 = (0..self.dimension())
            .map(|j| (0..self.row_end(j)).map(|k| c[(k, j)] * v[k]).sum::<Complex64>().norm_sqr())
            .sum();
        (2.0 * shift).exp() * sum
    }

    /// Same space with the monomial basis replaced by `t_j = sum_k U_kj m_k`
    /// and re-orthonormalized.
    pub fn remixed(&self, u: &CMatrix) -> Result<SectionSpace> {
        let g2 = u.adjoint() * &self.gram * u;
        let c2 = orthonormalize(&g2)?;
        let mut out = self.clone();
        out.ortho_coeffs = u * c2;
        out.triangular = false;
        Ok(out)
    }
}

pub fn space_key(
    model: &OrbifoldModel,
    p: u32,
    twist: bool,
    exponents: &[u32],
    cfg: &QuadratureConfig,
) -> SpaceKey {
    SpaceKey {
        model_hash: model.spec.hash(),
        p,
        twist,
        exponents: exponents.to_vec(),
        radial_nodes: cfg.radial_nodes,
        angular_nodes: cfg.angular_nodes,
        breakpoints: cfg.breakpoints.clone(),
    }
}

pub fn total_weight(model: &OrbifoldModel, p: u32, twist: bool, log_r: f64) -> f64 {
    let w = f64::from(p) * model.weight_log(log_r);
    if twist {
        w + 0.5 * model.log_base_density(log_r)
    } else {
        w
    }
}

/// Gram matrix `<m_j, m_k>` of the monomials against the base form with
/// weight `exp(-2 psi)`, and an error estimate from halving the quadrature.
pub fn gram_matrix(
    model: &OrbifoldModel,
    exponents: &[u32],
    p: u32,
    twist: bool,
    cfg: &QuadratureConfig,
) -> Result<(CMatrix, f64)> {
    let fine = gram_on(model, exponents, p, twist, cfg)?;
    let coarse = gram_on(model, exponents, p, twist, &cfg.halved())?;
    let err = (&fine - &coarse).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((fine, err))
}

fn gram_on(
    model: &OrbifoldModel,
    exponents: &[u32],
    p: u32,
    twist: bool,
    cfg: &QuadratureConfig,
) -> Result<CMatrix> {
    let m = model.cover_order();
    let degrees: Vec<u32> = exponents.iter().map(|e| e / m).collect();
    let max_diff = degrees.iter().max().copied().unwrap_or(0) - degrees.iter().min().copied().unwrap_or(0);
    // The trapezoid rule on N angular nodes integrates e^{i k theta_y}
    // exactly for |k| < N; upstairs frequencies are m times downstairs ones.
    let needed = (max_diff * m + 1) as usize;
    let mut qc = cfg.clone();
    qc.angular_nodes = needed.next_power_of_two().max(8);
    let grid = OrbifoldGrid::new(model, &qc, &model.default_partition(), &[])?;
    let d = degrees.len();
    let mut gram = CMatrix::zeros(d, d);
    for chart in &grid.charts {
        // Angular means depend only on the degree difference.
        let mut angular: HashMap<i64, Complex64> = HashMap::new();
        let n = chart.angles.len() as f64;
        for j in 0..d {
            for k in 0..d {
                let diff = i64::from(degrees[j]) - i64::from(degrees[k]);
                angular.entry(diff).or_insert_with(|| {
                    chart
                        .angles
                        .iter()
                        .map(|&t| Complex64::from_polar(1.0, diff as f64 * t))
                        .sum::<Complex64>()
                        / n
                });
            }
        }
        let mut radial = DMatrix::<f64>::zeros(d, d);
        let mut u = vec![0.0; d];
        for &(log_r, w) in &chart.radial {
            let psi = total_weight(model, p, twist, log_r);
            let half_log_w = 0.5 * w.ln();
            for (uj, &dj) in u.iter_mut().zip(&degrees) {
                let lr = if dj == 0 { 0.0 } else { f64::from(dj) * log_r };
                *uj = (lr - psi + half_log_w).exp();
                if !uj.is_finite() {
                    return Err(Error::NonFinite {
                        value: *uj,
                        radius: log_r.exp(),
                        theta: 0.0,
                    });
                }
            }
            for j in 0..d {
                for k in j..d {
                    radial[(j, k)] += u[j] * u[k];
                }
            }
        }
        for j in 0..d {
            for k in j..d {
                let diff = i64::from(degrees[j]) - i64::from(degrees[k]);
                let v = angular[&diff] * radial[(j, k)];
                gram[(j, k)] += v;
                if j != k {
                    gram[(k, j)] += v.conj();
                }
            }
        }
    }
    Ok(gram)
}

/// Coefficient matrix `C = L^{-H}` from the Cholesky factor `G = L L^H`,
/// so that `C^H G C = I`. The factor is computed directly so that a failing
/// pivot can be reported.
pub fn orthonormalize(gram: &CMatrix) -> Result<CMatrix> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::Config("gram matrix must be square".into()));
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = gram[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        // negated so that NaN fails the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::IllConditioned { index: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = gram[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    // Invert the lower triangular factor by forward substitution.
    let mut inv = CMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(inv.adjoint())
}

/// Exact Gram diagonal of the round sphere: `j! (p-j)! / (p+1)!`, or
/// `pi j! (p-j-2)! / (p-1)!` for the canonical twist.
pub fn fs_gram_diagonal(p: u32, j: u32, twist: bool) -> f64 {
    let lf = |n: u32| -> f64 { (1..=n).map(|k| f64::from(k).ln()).sum() };
    if twist {
        (PI.ln() + lf(j) + lf(p - j - 2) - lf(p - 1)).exp()
    } else {
        (lf(j) + lf(p - j) - lf(p + 1)).exp()
    }
}
