//! Random sections drawn uniformly from the unit sphere of a section space,
//! their zeros, and the statistics of `Y = <[S = 0] - alpha_p, f>`.

pub mod rng;
pub mod roots;
pub mod stats;
pub mod zeros;

pub use rng::{sample_sphere, RngStream};
pub use stats::{linear_fit, mean_stderr, sample_variance, LinearFit, MeanEstimate};
pub use zeros::{section_polynomial, section_zeros, ZeroRadii, ZeroSet};

use crate::currents::{fs_pairing, model_grid, zero_pairing, PairingGrid, TestFunction};
use crate::error::{Error, Result};
use crate::model::OrbifoldModel;
use crate::quadrature::QuadratureConfig;
use crate::section_space::SectionSpace;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Largest tolerated fraction of failed Monte Carlo samples.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Pairing grids of a bank and the FS pairings `<alpha_p, f>` of one space.
pub struct BankPairings {
    pub grids: Vec<PairingGrid>,
    pub alpha: Vec<f64>,
}

impl BankPairings {
    pub fn new(space: &SectionSpace, bank: &[TestFunction]) -> Result<Self> {
        let grids = bank
            .par_iter()
            .map(|f| model_grid(&space.model, f))
            .collect::<Result<Vec<_>>>()?;
        Self::with_grids(space, grids)
    }

    pub fn with_grids(space: &SectionSpace, grids: Vec<PairingGrid>) -> Result<Self> {
        let alpha = grids.par_iter().map(|g| fs_pairing(space, g)).collect::<Result<Vec<_>>>()?;
        Ok(BankPairings { grids, alpha })
    }

    pub fn y_values(&self, zeros: &ZeroSet) -> Vec<f64> {
        self.grids
            .iter()
            .zip(&self.alpha)
            .map(|(g, a)| zero_pairing(&zeros.roots, &g.f) - a)
            .collect()
    }
}

/// `Y(a) = sum f(roots) - <alpha_p, f>`; zeros at infinity do not meet the
/// chart-supported `f`.
pub fn y_statistic(a: &[Complex64], space: &SectionSpace, f: &TestFunction) -> Result<f64> {
    let zeros = section_zeros(a, space)?;
    let grid = model_grid(&space.model, f)?;
    Ok(zero_pairing(&zeros.roots, f) - fs_pairing(space, &grid)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub p: u32,
    pub sample_index: usize,
    pub root_count: u32,
    pub mass_at_infinity: u32,
    /// `Y` for each bank function, in bank order.
    pub ys: Vec<f64>,
    pub zeros: ZeroRadii,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRun {
    pub p: u32,
    pub records: Vec<SampleRecord>,
    /// Excluded samples and the root-finder message.
    pub failures: Vec<(usize, String)>,
}

impl MonteCarloRun {
    /// `Y` values of bank function `k` over the accepted samples.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.ys[k]).collect()
    }
}

/// `n` independent sphere samples of `space`, sample `i` drawn from the
/// stream `"p=<p>/i=<i>"`. Failed samples are logged and excluded.
pub fn monte_carlo(space: &SectionSpace, pairings: &BankPairings, n: usize, seed: u64) -> Result<MonteCarloRun> {
    let d = space.dimension();
    let outcomes: Vec<std::result::Result<SampleRecord, String>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = sample_sphere(d, &RngStream::sample(seed, space.p, i));
            match section_zeros(&a, space) {
                Ok(z) => Ok(SampleRecord {
                    p: space.p,
                    sample_index: i,
                    root_count: z.roots.iter().map(|r| r.1).sum(),
                    mass_at_infinity: z.mass_at_infinity,
                    ys: pairings.y_values(&z),
                    zeros: z.radii(),
                }),
                Err(e) => Err(e.to_string()),
            }
        })
        .collect();
    let mut records = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => records.push(r),
            Err(msg) => {
                log::warn!("p={} sample {i} excluded: {msg}", space.p);
                failures.push((i, msg));
            }
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * n as f64 {
        return Err(Error::Experiment(format!(
            "{} of {n} samples failed at p={}",
            failures.len(),
            space.p
        )));
    }
    Ok(MonteCarloRun {
        p: space.p,
        records,
        failures,
    })
}

pub fn expectation_estimate(space: &SectionSpace, f: &TestFunction, n: usize, seed: u64) -> Result<MeanEstimate> {
    if n < 100 {
        return Err(Error::Config(format!("expectation needs N >= 100, got {n}")));
    }
    let bp = BankPairings::new(space, std::slice::from_ref(f))?;
    Ok(mean_stderr(&monte_carlo(space, &bp, n, seed)?.column(0)))
}

pub fn variance_estimate(space: &SectionSpace, f: &TestFunction, n: usize, seed: u64) -> Result<f64> {
    if n < 500 {
        return Err(Error::Config(format!("variance needs N >= 500, got {n}")));
    }
    let bp = BankPairings::new(space, std::slice::from_ref(f))?;
    Ok(sample_variance(&monte_carlo(space, &bp, n, seed)?.column(0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceRow {
    pub p: u32,
    /// `(1/p) Y` per bank function.
    pub normalized: Vec<f64>,
}

/// One sample per `p`, from the stream `"sequence/p=<p>"`.
pub fn sequence_experiment(
    model: &Arc<OrbifoldModel>,
    p_list: &[u32],
    bank: &[TestFunction],
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<Vec<SequenceRow>> {
    let grids = bank
        .par_iter()
        .map(|f| model_grid(model, f))
        .collect::<Result<Vec<_>>>()?;
    p_list
        .par_iter()
        .map(|&p| {
            let space = SectionSpace::new(model.clone(), p, false, cfg)?;
            let bp = BankPairings::with_grids(&space, grids.clone())?;
            let a = sample_sphere(space.dimension(), &RngStream::new(seed, format!("sequence/p={p}")));
            let z = section_zeros(&a, &space)?;
            Ok(SequenceRow {
                p,
                normalized: bp.y_values(&z).into_iter().map(|y| y / f64::from(p)).collect(),
            })
        })
        .collect()
}

/// `A = (1/pi^2) int (ln |z1|)^2 exp(-|z1|^2 - |z2|^2) dz`, reduced to the
/// radial integral `int_0^inf (ln t)^2 e^{-t} dt / 4` and evaluated by
/// quadrature. Closed form `(gamma^2 + pi^2/6)/4`.
pub fn variance_constant_a() -> f64 {
    // t = r^2 reduces the plane integral over z1 to int (ln r^2)^2 e^{-r^2} 2r dr / 4; the
    // z2 factor integrates to pi.
    let breaks = crate::quadrature::breakpoints_between(0.0, 9.0, &[0.25, 0.5, 1.0, 2.0, 3.0], 1.0);
    let rule = crate::quadrature::radial_rule(&breaks, 64, 4);
    let plane: f64 = rule
        .iter()
        .map(|&(r, w)| {
            let l = r.ln();
            w * 2.0 * std::f64::consts::PI * r * l * l * (-r * r).exp()
        })
        .sum();
    // (1/pi^2) * plane * pi
    plane / std::f64::consts::PI
}
