use borb::model::{build_model, ModelSpec, OrbifoldModel};
use borb::point::Point;
use borb::quadrature::{integrate_orbifold, QuadratureConfig};
use borb::section_space::{fs_gram_diagonal, orthonormalize, CMatrix, SectionSpace};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::ln_gamma;
use std::sync::Arc;

fn model(spec: ModelSpec) -> Arc<OrbifoldModel> {
    Arc::new(build_model(&spec).unwrap())
}

fn all_models() -> Vec<Arc<OrbifoldModel>> {
    vec![
        model(ModelSpec::fs_sphere()),
        model(ModelSpec::football(2)),
        model(ModelSpec::football(3)),
        model(ModelSpec::circle_mass()),
        model(ModelSpec::flat_cap(2f64.ln())),
    ]
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn probes(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point::new(rng.random_range(-4.0..4.0), rng.random_range(-3.2..3.2)))
        .collect()
}

#[test]
fn fs_gram_matches_beta_identity() {
    let cfg = QuadratureConfig::default();
    for p in [1, 5, 12, 30] {
        let s = SectionSpace::new(model(ModelSpec::fs_sphere()), p, false, &cfg).unwrap();
        for j in 0..=p {
            let exact = fs_gram_diagonal(p, j, false);
            let got = s.gram[(j as usize, j as usize)].re;
            assert!((got - exact).abs() < 1e-12 * exact, "p={p} j={j}: {got} {exact}");
        }
    }
}

#[test]
fn fs_twisted_gram_and_kernel() {
    let cfg = QuadratureConfig::default();
    for p in [2, 3, 9, 20] {
        let s = SectionSpace::new(model(ModelSpec::fs_sphere()), p, true, &cfg).unwrap();
        assert_eq!(s.dimension(), (p - 1) as usize);
        for j in 0..p - 1 {
            let exact = fs_gram_diagonal(p, j, true);
            let got = s.gram[(j as usize, j as usize)].re;
            assert!((got - exact).abs() < 1e-11 * exact, "p={p} j={j}: {got} {exact}");
        }
        for pt in probes(20, 1) {
            let k = s.bergman_kernel(&pt);
            assert!((k - f64::from(p - 1)).abs() < 1e-9 * f64::from(p), "{k}");
        }
    }
}

#[test]
fn football_gram_is_a_beta_function() {
    for m in [2u32, 3, 5] {
        let s = SectionSpace::new(model(ModelSpec::football(m)), 6, false, &QuadratureConfig::default()).unwrap();
        let total = f64::from(6 * m);
        for (i, &e) in s.exponents.iter().enumerate() {
            let e = f64::from(e);
            let exact = ln_beta(e + 1.0, total + 1.0 - e).exp();
            let got = s.gram[(i, i)].re;
            assert!((got - exact).abs() < 1e-12 * exact, "m={m} e={e}: {got} {exact}");
        }
    }
}

#[test]
fn gram_is_hermitian_and_diagonal() {
    for mdl in all_models() {
        let s = SectionSpace::new(mdl.clone(), 9, false, &QuadratureConfig::default()).unwrap();
        let g = &s.gram;
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                assert!((g[(j, k)] - g[(k, j)].conj()).norm() <= 1e-12 * g[(j, j)].norm().max(g[(k, k)].norm()));
                if j != k {
                    let scale = (g[(j, j)].re * g[(k, k)].re).sqrt();
                    assert!(g[(j, k)].norm() < 1e-10 * scale, "{:?} ({j},{k})", mdl.kind());
                }
            }
        }
    }
}

#[test]
fn orthonormal_coefficients_whiten_the_gram() {
    for mdl in all_models() {
        let s = SectionSpace::new(mdl, 12, false, &QuadratureConfig::default()).unwrap();
        let c = &s.ortho_coeffs;
        let id = c.adjoint() * &s.gram * c;
        let n = id.nrows();
        let err = (id - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn fs_kernel_constant_up_to_p40() {
    let m = model(ModelSpec::fs_sphere());
    let pts = probes(50, 2);
    for p in [1, 10, 25, 40] {
        let s = SectionSpace::new(m.clone(), p, false, &QuadratureConfig::default()).unwrap();
        for pt in &pts {
            let k = s.bergman_kernel(pt);
            assert!((k / f64::from(p + 1) - 1.0).abs() < 1e-9, "p={p}: {k}");
        }
    }
}

#[test]
fn football_kernel_peaks_at_cone_points() {
    for m in [2u32, 3] {
        let s = SectionSpace::new(model(ModelSpec::football(m)), 8, false, &QuadratureConfig::default()).unwrap();
        let at0 = s.bergman_kernel(&Point::ORIGIN);
        assert!((at0 - f64::from(8 * m + 1)).abs() < 1e-8 * at0, "{at0}");
        let generic = s.bergman_kernel(&Point::new(0.2, 0.7));
        assert!(generic < at0);
        // near infinity as well
        let far = s.bergman_kernel(&Point::new(60.0, 0.0));
        assert!((far - at0).abs() < 1e-6 * at0, "{far}");
    }
}

#[test]
fn football_downstairs_kernel_equals_upstairs() {
    let s = SectionSpace::new(model(ModelSpec::football(3)), 5, false, &QuadratureConfig::default()).unwrap();
    for x in probes(30, 3) {
        let down = s.bergman_kernel(&x);
        for k in 0..3 {
            let up = s.upstairs_bergman_kernel(&x.root(3, k));
            assert!((up - down).abs() <= 1e-12 * down, "{up} {down}");
        }
    }
}

#[test]
fn extremal_equals_kernel() {
    for mdl in all_models() {
        for p in [2, 8, 32] {
            let s = SectionSpace::new(mdl.clone(), p, false, &QuadratureConfig::default()).unwrap();
            for pt in probes(20, u64::from(p)) {
                let k = s.bergman_kernel(&pt);
                let e = s.bergman_extremal(&pt);
                assert!((k - e).abs() < 1e-10 * k, "{:?} p={p}: {k} {e}", mdl.kind());
            }
        }
    }
}

#[test]
fn no_unit_section_exceeds_the_kernel() {
    let s = SectionSpace::new(model(ModelSpec::circle_mass()), 4, false, &QuadratureConfig::default()).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let pt = Point::new(0.1, 0.4);
    let k = s.bergman_kernel(&pt);
    for _ in 0..10_000 {
        let mut a: Vec<Complex64> =
            (0..s.dimension()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        a.iter_mut().for_each(|z| *z /= n);
        assert!(s.section_norm_sqr(&a, &pt) <= k * (1.0 + 1e-12));
    }
}

#[test]
fn common_zero_gives_zero_extremal() {
    let s = SectionSpace::with_exponents(
        model(ModelSpec::football(2)),
        3,
        false,
        vec![2, 4, 6],
        &QuadratureConfig::default(),
    )
    .unwrap();
    assert_eq!(s.bergman_extremal(&Point::ORIGIN), 0.0);
    assert_eq!(s.bergman_kernel(&Point::ORIGIN), 0.0);
    assert_eq!(s.fs_potential(&Point::ORIGIN), f64::NEG_INFINITY);
}

#[test]
fn one_dimensional_space() {
    let s = SectionSpace::with_exponents(model(ModelSpec::fs_sphere()), 3, false, vec![1], &QuadratureConfig::default())
        .unwrap();
    let pt = Point::new(0.3, 1.0);
    let a = [Complex64::new(1.0, 0.0)];
    assert!((s.bergman_kernel(&pt) - s.section_norm_sqr(&a, &pt)).abs() < 1e-14);
    // the only section is a multiple of z, so its potential is log|z| + const
    let d = s.fs_potential(&pt) - s.fs_potential(&Point::new(1.3, 1.0));
    assert!((d + 1.0).abs() < 1e-13);
}

#[test]
fn parseval() {
    for mdl in all_models() {
        let s = SectionSpace::new(mdl.clone(), 10, false, &QuadratureConfig::default()).unwrap();
        let r = integrate_orbifold(&mdl, &|pt| s.bergman_kernel(pt), &QuadratureConfig::default()).unwrap();
        let d = s.dimension() as f64;
        assert!((r.value - d).abs() < 1e-6 * d, "{:?}: {}", mdl.kind(), r.value);
    }
}

fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    // Gram-Schmidt through the Cholesky of A^H A
    let c = orthonormalize(&(a.adjoint() * &a)).unwrap();
    a * c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn kernel_is_basis_independent(seed in 0u64..1000, idx in 0usize..5) {
        let mdl = all_models()[idx].clone();
        let s = SectionSpace::new(mdl, 6, false, &QuadratureConfig::default()).unwrap();
        let u = random_unitary(s.dimension(), seed);
        let mixed = s.remixed(&u).unwrap();
        for pt in probes(10, seed) {
            let a = s.bergman_kernel(&pt);
            let b = mixed.bergman_kernel(&pt);
            prop_assert!((a - b).abs() < 1e-9 * a);
        }
    }
}
