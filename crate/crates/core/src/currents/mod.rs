//! Bidegree (1,1) currents on the models: pairings with test functions,
//! Fubini-Study potentials, the Bergman identity, Lelong-Poincare, and the
//! branched-cover calculus.

pub mod bank;
pub mod cover;
pub mod pairing;
pub mod test_function;

pub use bank::build_bank;
pub use cover::{calculus_check, reference_sample, Atom, BranchedCover, CalculusRow, ChartPotential, CurrentSample};
pub use pairing::{ddc_pair, PairingGrid, Potential, Shape};
pub use test_function::TestFunction;

use crate::error::Result;
use crate::model::OrbifoldModel;
use crate::poly::Polynomial;
use crate::section_space::SectionSpace;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Pairing grid of `f` with panel breaks at the model's singular circles,
/// graded at the origin so the `r^(2/m - 2)` cone density integrates cleanly.
pub fn model_grid(model: &OrbifoldModel, f: &TestFunction) -> Result<PairingGrid> {
    PairingGrid::graded(f, &model.singular_radii(), model.cover_order().max(2))
}

/// `<c1(L, h), f>` from the analytic curvature: smooth density plus atoms.
pub fn curvature_pairing(model: &OrbifoldModel, grid: &PairingGrid) -> Result<f64> {
    let smooth = grid.integrate_radial_density(&|lr| model.curvature_density(lr))?;
    let atoms: f64 = model
        .weight
        .curvature_atoms
        .iter()
        .map(|a| a.mass * pairing::circle_mean(&grid.f, a.radius))
        .sum();
    Ok(smooth + atoms)
}

/// `<p c1(L) (+ c1(K)), f>`, the curvature of the bundle whose sections
/// form `space`; `c1(K) = -2 omega_FS` for the canonical twist.
pub fn total_curvature_pairing(space: &SectionSpace, grid: &PairingGrid) -> Result<f64> {
    let p = f64::from(space.p);
    let mut v = p * curvature_pairing(&space.model, grid)?;
    if space.twist {
        let fs = grid.integrate_radial_density(&|lr| 1.0 / (PI * (2.0 * crate::point::log1p_r2(lr)).exp()))?;
        v -= 2.0 * fs;
    }
    Ok(v)
}

fn pair_space_field(space: &SectionSpace, grid: &PairingGrid, v: &dyn Fn(&crate::point::Point) -> f64) -> Result<f64> {
    if space.is_rotation_invariant() {
        grid.pair_radial(&|lr| v(&crate::point::Point::new(lr, 0.0)))
    } else {
        grid.pair_planar(v)
    }
}

/// `<dd^c v_FS, f>` with `v_FS = (1/2) ln sum |s_j|^2`: the FS current.
pub fn fs_pairing(space: &SectionSpace, grid: &PairingGrid) -> Result<f64> {
    pair_space_field(space, grid, &|p| space.fs_potential(p))
}

/// `<dd^c ln P, f>`.
pub fn log_kernel_pairing(space: &SectionSpace, grid: &PairingGrid) -> Result<f64> {
    pair_space_field(space, grid, &|p| space.log_bergman_kernel(p))
}

/// `<dd^c psi, f>` for the total weight of the space.
pub fn weight_pairing(space: &SectionSpace, grid: &PairingGrid) -> Result<f64> {
    grid.pair_radial(&|lr| space.total_weight(lr))
}

/// `|<2 alpha_p - 2 c1_total - dd^c ln P, f>|`.
pub fn fs_identity_residual(space: &SectionSpace, f: &TestFunction) -> Result<f64> {
    fs_identity_residual_on(space, &model_grid(&space.model, f)?)
}

pub fn fs_identity_residual_on(space: &SectionSpace, grid: &PairingGrid) -> Result<f64> {
    let alpha = fs_pairing(space, grid)?;
    let logp = log_kernel_pairing(space, grid)?;
    let c1 = total_curvature_pairing(space, grid)?;
    Ok((2.0 * alpha - 2.0 * c1 - logp).abs())
}

/// Zeros of a section with multiplicities, in the affine chart.
pub type RootList = [(Complex64, u32)];

/// `sum mult f(root)`.
pub fn zero_pairing(roots: &RootList, f: &TestFunction) -> f64 {
    roots.iter().map(|&(z, k)| f64::from(k) * f.value(z)).sum()
}

/// `<dd^c ln |s|, f>` for the polynomial `s`, on a grid about the center
/// of `f` with the roots as poles.
pub fn log_section_pairing(poly: &Polynomial, roots: &RootList, f: &TestFunction) -> Result<f64> {
    let poles: Vec<Complex64> = roots
        .iter()
        .flat_map(|&(z, k)| std::iter::repeat_n(z, k as usize))
        .collect();
    pairing::pair_with_poles_at(f, &|z| poly.log_abs(z), &poles, &[])
}

/// `|<[s = 0] - c1_total - dd^c ln |s|_h, f>|` with `ln |s|_h = ln |s| - psi`.
pub fn lelong_poincare_residual(
    space: &SectionSpace,
    poly: &Polynomial,
    roots: &RootList,
    f: &TestFunction,
) -> Result<f64> {
    let grid = model_grid(&space.model, f)?;
    lelong_poincare_residual_on(space, poly, roots, &grid)
}

pub fn lelong_poincare_residual_on(
    space: &SectionSpace,
    poly: &Polynomial,
    roots: &RootList,
    grid: &PairingGrid,
) -> Result<f64> {
    let zeros = zero_pairing(roots, &grid.f);
    let c1 = total_curvature_pairing(space, grid)?;
    let log_s = log_section_pairing(poly, roots, &grid.f)?;
    let psi = weight_pairing(space, grid)?;
    Ok((zeros - c1 - log_s + psi).abs())
}
