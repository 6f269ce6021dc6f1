use super::roots::aberth_roots;
use crate::error::Result;
use crate::point::Point;
use crate::poly::Polynomial;
use crate::section_space::SectionSpace;
use num_complex::Complex64;
use serde::Serialize;

/// Coefficients below this multiple of their rounding scale
/// `|C_k,:| |a|` are treated as exact zeros.
pub const CHOP_RELATIVE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub roots: Vec<(Complex64, u32)>,
    pub mass_at_infinity: u32,
    /// Pointwise norms `|S(root)|_h` of the section at its computed roots.
    pub residuals: Vec<f64>,
}

/// Radii of a zero set with multiplicities, the part radial statistics need.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroRadii {
    pub radii: Vec<(f64, u32)>,
    pub mass_at_infinity: u32,
}

impl ZeroSet {
    pub fn radii(&self) -> ZeroRadii {
        ZeroRadii {
            radii: self.roots.iter().map(|&(z, k)| (z.norm(), k)).collect(),
            mass_at_infinity: self.mass_at_infinity,
        }
    }

    pub fn total_mass(&self) -> u32 {
        self.roots.iter().map(|r| r.1).sum::<u32>() + self.mass_at_infinity
    }

    pub fn affine_roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .flat_map(|&(z, k)| std::iter::repeat_n(z, k as usize))
    }
}

/// Dense monomial coefficients of `S_a`, with entries at rounding level
/// set to zero.
pub fn section_polynomial(a: &[Complex64], space: &SectionSpace) -> Polynomial {
    let mut poly = Polynomial::new(space.polynomial(a));
    let norm_a = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c = &space.ortho_coeffs;
    for (k, &d) in space.degrees().iter().enumerate() {
        let row = (0..c.ncols()).map(|j| c[(k, j)].norm_sqr()).sum::<f64>().sqrt();
        if poly.coeffs[d as usize].norm() <= CHOP_RELATIVE * row * norm_a {
            poly.coeffs[d as usize] = Complex64::new(0.0, 0.0);
        }
    }
    poly
}

/// Zeros of `S_a` counted with multiplicity: a root at the origin for each
/// vanishing low coefficient, mass at infinity for each vanishing top one.
pub fn section_zeros(a: &[Complex64], space: &SectionSpace) -> Result<ZeroSet> {
    let poly = section_polynomial(a, space);
    let n = space.zero_budget();
    let Some(top) = poly.degree() else {
        return Err(crate::error::Error::Domain("the zero section has no zero set".into()));
    };
    let low = poly.coeffs.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let scale = poly.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let core = Polynomial::new(poly.coeffs[low..=top].iter().map(|c| c / scale).collect());
    let mut roots: Vec<(Complex64, u32)> = Vec::new();
    if low > 0 {
        roots.push((Complex64::new(0.0, 0.0), low as u32));
    }
    roots.extend(aberth_roots(&core)?.into_iter().map(|z| (z, 1)));
    let residuals = roots
        .iter()
        .map(|&(z, _)| {
            let pt = Point::from_complex(z);
            (poly.log_abs(z) - space.total_weight(pt.log_r)).exp()
        })
        .collect();
    Ok(ZeroSet {
        roots,
        mass_at_infinity: n - top as u32,
        residuals,
    })
}
