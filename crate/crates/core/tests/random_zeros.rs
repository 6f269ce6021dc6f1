use borb::currents::{build_bank, fs_pairing, model_grid, zero_pairing, TestFunction};
use borb::model::{build_model, ModelSpec, OrbifoldModel};
use borb::quadrature::QuadratureConfig;
use borb::random_zeros::roots::aberth_roots;
use borb::random_zeros::stats::ks_two_sample;
use borb::random_zeros::{
    expectation_estimate, monte_carlo, sample_sphere, section_zeros, sequence_experiment, variance_constant_a,
    variance_estimate, y_statistic, BankPairings, RngStream,
};
use borb::section_space::{orthonormalize, SectionSpace};
use borb::poly::Polynomial;
use nalgebra::DMatrix;
use rand::Rng;
use num_complex::Complex64;
use std::sync::Arc;

fn model(spec: ModelSpec) -> Arc<OrbifoldModel> {
    Arc::new(build_model(&spec).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn sphere_moments() {
    let d = 4;
    let n = 100_000;
    let mut m2 = vec![0.0; d];
    let mut m2sq = vec![0.0; d];
    let mut cov = [[0.0; 2]; 2];
    for i in 0..n {
        let a = sample_sphere(d, &RngStream::new(5, format!("i={i}")));
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        for (j, z) in a.iter().enumerate() {
            m2[j] += z.norm_sqr();
            m2sq[j] += z.norm_sqr().powi(2);
        }
        let x = [a[0].re, a[0].im];
        for r in 0..2 {
            for s in 0..2 {
                cov[r][s] += x[r] * x[s];
            }
        }
    }
    let nf = n as f64;
    for j in 0..d {
        let mean = m2[j] / nf;
        let se = ((m2sq[j] / nf - mean * mean) / nf).sqrt();
        assert!((mean - 0.25).abs() < 4.0 * se, "{mean} {se}");
    }
    // Var(x^2) = E x^4 - (E x^2)^2 with E x^4 = 3/(4 d (d+1)) for a real coordinate of S^{2d-1}
    let ex2 = 1.0 / (2.0 * d as f64);
    let ex4 = 3.0 / (4.0 * d as f64 * (d as f64 + 1.0));
    let se_diag = ((ex4 - ex2 * ex2) / nf).sqrt();
    for (r, row) in cov.iter().enumerate() {
        assert!((row[r] / nf - ex2).abs() < 4.0 * se_diag);
    }
    let se_off = (1.0 / (4.0 * d as f64 * (d as f64 + 1.0)) / nf).sqrt();
    assert!((cov[0][1] / nf).abs() < 4.0 * se_off);
}

#[test]
fn monomial_and_unity_zero_sets() {
    let s = SectionSpace::new(model(ModelSpec::fs_sphere()), 9, false, &QuadratureConfig::default()).unwrap();
    let mut a = vec![c(0.0, 0.0); 10];
    a[4] = c(1.0, 0.0);
    let z = section_zeros(&a, &s).unwrap();
    assert_eq!(z.roots, vec![(c(0.0, 0.0), 4)]);
    assert_eq!(z.mass_at_infinity, 5);

    let mut coeffs = vec![c(0.0, 0.0); 10];
    coeffs[0] = c(-1.0, 0.0);
    coeffs[9] = c(1.0, 0.0);
    for r in aberth_roots(&Polynomial::new(coeffs)).unwrap() {
        assert!((r.powu(9) - 1.0).norm() < 1e-10);
        assert!((r.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn random_roots_have_small_residuals_and_full_mass() {
    for spec in [ModelSpec::fs_sphere(), ModelSpec::circle_mass(), ModelSpec::football(3), ModelSpec::flat_cap(4f64.ln())]
    {
        let s = SectionSpace::new(model(spec.clone()), 32, false, &QuadratureConfig::default()).unwrap();
        for i in 0..50 {
            let a = sample_sphere(s.dimension(), &RngStream::sample(3, 32, i));
            let z = section_zeros(&a, &s).unwrap();
            assert_eq!(z.total_mass(), s.zero_budget(), "{spec:?}");
            for r in &z.residuals {
                assert!(*r < 1e-8, "{spec:?}: residual {r}");
            }
        }
    }
}

#[test]
fn one_dimensional_space_has_no_fluctuation() {
    let s = SectionSpace::with_exponents(model(ModelSpec::fs_sphere()), 4, false, vec![2], &QuadratureConfig::default())
        .unwrap();
    for f in [TestFunction::gauss(c(0.0, 0.0), 0.25), TestFunction::gauss(c(0.5, 0.5), 0.15), TestFunction::cap(1.0, 0.5)] {
        let a = sample_sphere(1, &RngStream::new(1, "d1"));
        let y = y_statistic(&a, &s, &f).unwrap();
        assert!(y.abs() < 1e-6, "{y}");
        let e = expectation_estimate(&s, &f, 100, 2).unwrap();
        assert!(e.mean.abs() < 1e-6 && e.stderr < 1e-6);
        assert!(variance_estimate(&s, &f, 500, 2).unwrap() < 1e-12);
    }
}

#[test]
fn y_is_bounded_and_phase_invariant() {
    let fs = model(ModelSpec::fs_sphere());
    let s = SectionSpace::new(fs.clone(), 8, false, &QuadratureConfig::default()).unwrap();
    let bank = build_bank(&fs);
    let bp = BankPairings::new(&s, &bank).unwrap();
    for i in 0..200 {
        let a = sample_sphere(s.dimension(), &RngStream::sample(9, 8, i));
        let z = section_zeros(&a, &s).unwrap();
        let ys = bp.y_values(&z);
        let rotated: Vec<Complex64> = a.iter().map(|x| x * Complex64::from_polar(1.0, 1.234)).collect();
        let ys2 = bp.y_values(&section_zeros(&rotated, &s).unwrap());
        for (k, y) in ys.iter().enumerate() {
            assert!(y.is_finite());
            assert!(y.abs() <= 8.0 + bp.alpha[k].abs());
            assert!((y - ys2[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn expectation_vanishes_on_the_sphere() {
    let fs = model(ModelSpec::fs_sphere());
    let s = SectionSpace::new(fs.clone(), 8, false, &QuadratureConfig::default()).unwrap();
    let bank = build_bank(&fs);
    let bp = BankPairings::new(&s, &bank).unwrap();
    let run = monte_carlo(&s, &bp, 2000, 17).unwrap();
    let ok = (0..bank.len())
        .filter(|&k| {
            let e = borb::random_zeros::mean_stderr(&run.column(k));
            e.mean.abs() <= 3.0 * e.stderr
        })
        .count();
    assert!(ok as f64 >= 0.9 * bank.len() as f64, "{ok}");
}

#[test]
fn unitary_invariance() {
    let fs = model(ModelSpec::fs_sphere());
    let s = SectionSpace::new(fs.clone(), 6, false, &QuadratureConfig::default()).unwrap();
    let f = TestFunction::gauss(c(0.5, 0.3), 0.4);
    let grid = model_grid(&fs, &f).unwrap();
    let alpha = fs_pairing(&s, &grid).unwrap();
    let d = s.dimension();
    let mut rng = RngStream::new(4, "unitary").rng();
    let raw = DMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let u = &raw * orthonormalize(&(raw.adjoint() * &raw)).unwrap();
    let n = 10_000;
    let mut ya = Vec::with_capacity(n);
    let mut yb = Vec::with_capacity(n);
    for i in 0..n {
        let a = sample_sphere(d, &RngStream::new(21, format!("a/{i}")));
        ya.push(zero_pairing(&section_zeros(&a, &s).unwrap().roots, &f) - alpha);
        let b = sample_sphere(d, &RngStream::new(21, format!("b/{i}")));
        let ub: Vec<Complex64> = (0..d).map(|r| (0..d).map(|j| u[(r, j)] * b[j]).sum()).collect();
        yb.push(zero_pairing(&section_zeros(&ub, &s).unwrap().roots, &f) - alpha);
    }
    let (_, pval) = ks_two_sample(&ya, &yb);
    assert!(pval > 0.01, "KS p-value {pval}");
}

#[test]
fn sequence_replays_bit_identically() {
    let fs = model(ModelSpec::fs_sphere());
    let bank: Vec<TestFunction> = build_bank(&fs).into_iter().step_by(4).collect();
    let a = sequence_experiment(&fs, &[8, 16], &bank, 77, &QuadratureConfig::default()).unwrap();
    let b = sequence_experiment(&fs, &[8, 16], &bank, 77, &QuadratureConfig::default()).unwrap();
    assert_eq!(a, b);
    let bits = |rows: &[borb::random_zeros::SequenceRow]| -> Vec<u64> {
        rows.iter().flat_map(|r| r.normalized.iter().map(|x| x.to_bits())).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn small_sample_counts_are_rejected() {
    let s = SectionSpace::new(model(ModelSpec::fs_sphere()), 4, false, &QuadratureConfig::default()).unwrap();
    let f = TestFunction::cap(1.0, 0.5);
    assert!(matches!(expectation_estimate(&s, &f, 10, 1), Err(borb::Error::Config(_))));
    assert!(matches!(variance_estimate(&s, &f, 100, 1), Err(borb::Error::Config(_))));
}

#[test]
fn variance_constant() {
    let a = variance_constant_a();
    let euler_gamma = 0.577_215_664_901_532_9_f64;
    let closed = 0.25 * (euler_gamma * euler_gamma + std::f64::consts::PI.powi(2) / 6.0);
    assert!((a - closed).abs() < 1e-10, "{a} {closed}");
    assert!((a - 0.494528).abs() < 1e-6);
}

