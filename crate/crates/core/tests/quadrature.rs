use borb::model::{build_model, ModelSpec};
use borb::point::Point;
use borb::quadrature::{
    integrate_chart, integrate_orbifold, integrate_orbifold_with, Panelization, Partition, QuadratureConfig,
};
use num_complex::Complex64;
use std::f64::consts::PI;

#[test]
fn football_upstairs_equals_downstairs() {
    // f(x) = exp(-|x - a|^2) against the football base form, m = 2
    let model = build_model(&ModelSpec::football(2)).unwrap();
    let a = Complex64::new(0.7, 0.2);
    let f = |x: Complex64| (-(x - a).norm_sqr()).exp();
    let cfg = QuadratureConfig::default();
    let up = integrate_orbifold(&model, &|pt: &Point| f(pt.to_complex()), &cfg).unwrap();
    // downstairs: the density 1/(2 pi |x| (1+|x|)^2) in the x-plane, r = b t^2 grading
    let dens = |x: Complex64| {
        let r = x.norm();
        f(x) / (2.0 * PI * r * (1.0 + r).powi(2))
    };
    let breaks = vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
    let pan = Panelization::new(breaks, 64, 256).unwrap().with_grading(2);
    let down = integrate_chart(&dens, &pan).unwrap();
    let rel = (up.value - down.value).abs() / down.value.abs();
    assert!(rel < 1e-8, "{} vs {} rel {rel}", up.value, down.value);
}

#[test]
fn partition_independence() {
    for spec in [ModelSpec::fs_sphere(), ModelSpec::football(3), ModelSpec::circle_mass()] {
        let model = build_model(&spec).unwrap();
        let f = |pt: &Point| {
            let z = pt.to_complex();
            (-(z - Complex64::new(0.9, 0.4)).norm_sqr()).exp() + 1.0 / (1.0 + z.norm_sqr())
        };
        let cfg = QuadratureConfig::default();
        let a = integrate_orbifold_with(&model, &f, &cfg, &Partition::Sharp { radius: 1.5 }, &[]).unwrap();
        let b = integrate_orbifold_with(&model, &f, &cfg, &Partition::Smooth { inner: 0.5, outer: 3.0 }, &[])
            .unwrap();
        assert!((a.value - b.value).abs() < 1e-9, "{spec:?}: {} {}", a.value, b.value);
    }
}

#[test]
fn refinement_stays_within_error_estimate() {
    let model = build_model(&ModelSpec::circle_mass()).unwrap();
    let f = |pt: &Point| {
        let z = pt.to_complex();
        let q = 1.0 + z.norm_sqr();
        (-(z - Complex64::new(1.1, 0.3)).norm_sqr() * 4.0).exp() + z.re * z.im / (q * q) + 1.0 / q
    };
    let cfg = QuadratureConfig::default();
    let a = integrate_orbifold(&model, &f, &cfg).unwrap();
    let fine = QuadratureConfig {
        radial_nodes: 128,
        angular_nodes: 512,
        breakpoints: vec![],
    };
    let b = integrate_orbifold(&model, &f, &fine).unwrap();
    assert!((a.value - b.value).abs() <= a.error_estimate, "{a:?} {b:?}");
}

#[test]
fn single_chart_support_reduces_to_chart_integral() {
    // a bump inside |z| < 1 on the round sphere, with base density
    let model = build_model(&ModelSpec::fs_sphere()).unwrap();
    let bump = |z: Complex64| (1.0 - (z.norm_sqr() / 0.25)).max(0.0).powi(4);
    let o = integrate_orbifold(
        &model,
        &|pt: &Point| bump(pt.to_complex()),
        &QuadratureConfig {
            breakpoints: vec![0.5],
            ..Default::default()
        },
    )
    .unwrap();
    let pan = Panelization::new(vec![0.0, 0.25, 0.5], 64, 64).unwrap();
    let c = integrate_chart(&|z| bump(z) / (PI * (1.0 + z.norm_sqr()).powi(2)), &pan).unwrap();
    assert!((o.value - c.value).abs() < 1e-12, "{} {}", o.value, c.value);
}
