use super::test_function::TestFunction;
use crate::model::{ModelKind, OrbifoldModel};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const BANK_WIDTHS: [f64; 3] = [0.15, 0.25, 0.4];
pub const BANK_RADII: [f64; 8] = [0.0, 0.25, 0.5, 0.8, 1.25, 1.7, 2.3, 3.0];
/// Offsets beyond the cap boundary for the flat-cap bank.
const FLAT_OFFSETS: [f64; 5] = [0.6, 1.0, 1.5, 2.2, 3.0];
pub const CAP_RADII: [f64; 4] = [0.5, 1.0, 1.5, 2.5];
pub const CAP_MARGIN: f64 = 0.5;

/// Minimum distance, in widths, between a bump center and a singular circle.
pub const CIRCLE_CLEARANCE: f64 = 2.0;

/// The fixed test bank of a model: 3 widths x 8 centers of Gaussian bumps,
/// then 4 radial caps.
pub fn build_bank(model: &OrbifoldModel) -> Vec<TestFunction> {
    let radii: Vec<f64> = match (model.kind(), model.cap_radius()) {
        (ModelKind::FlatCap, Some(rc)) => [0.0, 0.4, 0.8]
            .into_iter()
            .chain(FLAT_OFFSETS.iter().map(|o| rc + o))
            .collect(),
        _ => BANK_RADII.to_vec(),
    };
    let circles = model.singular_radii();
    let mut bank = Vec::with_capacity(28);
    for &s in &BANK_WIDTHS {
        for (k, &r) in radii.iter().enumerate() {
            let r = clear_of(r, s * CIRCLE_CLEARANCE, &circles);
            let theta = k as f64 * PI / 4.0 + 0.3;
            bank.push(TestFunction::gauss(Complex64::from_polar(r, theta), s));
        }
    }
    for &r0 in &CAP_RADII {
        bank.push(TestFunction::cap(r0, CAP_MARGIN));
    }
    bank
}

/// Move `r` to the nearest radius at distance `>= gap` from every circle.
fn clear_of(r: f64, gap: f64, circles: &[f64]) -> f64 {
    let mut r = r;
    for &c in circles {
        if (r - c).abs() < gap {
            let below = c - gap;
            r = if r < c && below >= 0.0 { below } else { c + gap };
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelSpec};

    #[test]
    fn bank_has_28_functions_clear_of_circles() {
        for spec in [ModelSpec::fs_sphere(), ModelSpec::circle_mass(), ModelSpec::flat_cap(4f64.ln())] {
            let model = build_model(&spec).unwrap();
            let bank = build_bank(&model);
            assert_eq!(bank.len(), 28);
            for f in &bank {
                if let TestFunction::GaussBump { center, width } = f {
                    let r = center[0].hypot(center[1]);
                    for c in model.singular_radii() {
                        assert!((r - c).abs() >= CIRCLE_CLEARANCE * width - 1e-12);
                    }
                }
            }
        }
    }
}
