use borb::convergence::{
    bergman_band_fit, curvature_cdf, fs_weak_residuals, log_bergman_l1, radial_cdf_discrepancy, zero_radial_stats,
    Region,
};
use borb::currents::{build_bank, model_grid};
use borb::model::{build_model, ModelSpec, OrbifoldModel};
use borb::point::Point;
use borb::quadrature::QuadratureConfig;
use borb::random_zeros::{sample_sphere, section_zeros, RngStream};
use borb::section_space::SectionSpace;
use std::sync::Arc;

fn model(spec: ModelSpec) -> Arc<OrbifoldModel> {
    Arc::new(build_model(&spec).unwrap())
}

fn space(m: &Arc<OrbifoldModel>, p: u32) -> SectionSpace {
    SectionSpace::new(m.clone(), p, false, &QuadratureConfig::default()).unwrap()
}

#[test]
fn fs_l1_is_exact() {
    let m = model(ModelSpec::fs_sphere());
    for p in [1, 8, 64] {
        let v = log_bergman_l1(&space(&m, p), &Region::WHOLE, &QuadratureConfig::default()).unwrap();
        let want = (f64::from(p) + 1.0).ln() / f64::from(p);
        assert!((v.value - want).abs() < 1e-6, "p={p} {} {want}", v.value);
    }
}

#[test]
fn l1_decays() {
    let cfg = QuadratureConfig::default();
    let flat = model(ModelSpec::flat_cap(4f64.ln()));
    let rc = flat.cap_radius().unwrap();
    let cases = [
        (model(ModelSpec::football(2)), Region::WHOLE),
        (model(ModelSpec::football(3)), Region::WHOLE),
        (model(ModelSpec::circle_mass()), Region::WHOLE),
        (flat.clone(), Region::annulus(1.25 * rc, f64::INFINITY)),
    ];
    for (m, region) in cases {
        let a = log_bergman_l1(&space(&m, 8), &region, &cfg).unwrap().value;
        let b = log_bergman_l1(&space(&m, 64), &region, &cfg).unwrap().value;
        assert!(b < 0.5 * a, "{:?}: {a} -> {b}", m.kind());
    }
    // the flat weight is its own extremal envelope, so the cap decays too
    let cap = Region::annulus(0.0, 0.5 * rc);
    let a = log_bergman_l1(&space(&flat, 8), &cap, &cfg).unwrap().value;
    let b = log_bergman_l1(&space(&flat, 64), &cap, &cfg).unwrap().value;
    assert!(b < a, "cap: {a} -> {b}");
}

#[test]
fn fs_weak_residuals_vanish() {
    let m = model(ModelSpec::fs_sphere());
    let grids: Vec<_> = build_bank(&m).iter().map(|f| model_grid(&m, f).unwrap()).collect();
    for p in [1, 8, 32] {
        for r in fs_weak_residuals(&space(&m, p), &grids).unwrap() {
            assert!(r.abs() < 1e-6, "p={p} {r}");
        }
    }
}

#[test]
fn weak_residuals_decay() {
    for spec in [ModelSpec::football(2), ModelSpec::football(3), ModelSpec::circle_mass(), ModelSpec::flat_cap(4f64.ln())] {
        let m = model(spec);
        let grids: Vec<_> = build_bank(&m).iter().map(|f| model_grid(&m, f).unwrap()).collect();
        let a = fs_weak_residuals(&space(&m, 8), &grids).unwrap();
        let b = fs_weak_residuals(&space(&m, 64), &grids).unwrap();
        let ok = a.iter().zip(&b).filter(|(x, y)| y.abs() < x.abs()).count();
        let need = if m.kind() == borb::model::ModelKind::Football { a.len() } else { (0.9 * a.len() as f64).ceil() as usize };
        assert!(ok >= need);
    }
}

#[test]
fn fs_zero_cdf_matches_curvature() {
    let m = model(ModelSpec::fs_sphere());
    let s = space(&m, 64);
    let zs: Vec<_> = (0..200)
        .map(|i| {
            let a = sample_sphere(s.dimension(), &RngStream::sample(3, 64, i));
            section_zeros(&a, &s).unwrap().radii()
        })
        .collect();
    let st = zero_radial_stats(&m, &zs, s.zero_budget()).unwrap();
    assert!(st.cdf_discrepancy < 0.05, "{st:?}");
    assert!((st.fraction_in_unit_disk - 0.5).abs() < 3.0 * st.fraction_in_unit_disk_stderr, "{st:?}");
    assert!((curvature_cdf(&m, 2.0) - 0.8).abs() < 1e-12);
    // a far-off sample is maximally discrepant
    assert!((radial_cdf_discrepancy(&[(1e12, 1.0)], &|r| curvature_cdf(&m, r)) - 1.0).abs() < 1e-9);
}

#[test]
fn band_fit() {
    let m = model(ModelSpec::fs_sphere());
    let spaces: Vec<_> = [8, 16, 32, 64].iter().map(|&p| space(&m, p)).collect();
    let probes: Vec<Point> = (0..20).map(|i| Point::from_polar(0.1 + 0.3 * i as f64, 0.7 * i as f64)).collect();
    let fit = bergman_band_fit(&spaces, &probes, 0.1).unwrap();
    assert!(fit.c_lower <= 1.0);
    for r in &fit.rows {
        assert!((r.min_log_kernel_over_p - (f64::from(r.p) + 1.0).ln() / f64::from(r.p)).abs() < 1e-9);
    }

    let m = model(ModelSpec::circle_mass());
    let spaces: Vec<_> = [16, 32, 64, 128].iter().map(|&p| space(&m, p)).collect();
    let probes: Vec<Point> = (0..40)
        .map(|i| Point::from_polar(0.5 * 4f64.powf((i as f64 + 0.5) / 40.0), 1.3 * i as f64))
        .collect();
    let fit = bergman_band_fit(&spaces, &probes, 0.1).unwrap();
    assert!(fit.stable);
    assert!(fit.holdout_holds);
}

