//! Convergence experiments: L1 decay of `(1/p) ln P_p`, weak convergence
//! of `(1/p) alpha_p` and of zero measures to `c1(L)`, and the Bergman band.

use crate::currents::{curvature_pairing, fs_identity_residual_on, fs_pairing, PairingGrid};
use crate::error::{Error, Result};
use crate::model::OrbifoldModel;
use crate::point::Point;
use crate::quadrature::{integrate_orbifold_radial, integrate_orbifold_with, IntegrationResult, QuadratureConfig};
use crate::random_zeros::{mean_stderr, ZeroRadii};
use crate::section_space::SectionSpace;
use serde::{Deserialize, Serialize};

/// Annulus `inner < |z| < outer` in the affine coordinate; `outer` may be
/// infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub inner: f64,
    pub outer: f64,
}

impl Region {
    pub const WHOLE: Region = Region {
        inner: 0.0,
        outer: f64::INFINITY,
    };

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Region { inner, outer }
    }

    pub fn contains_log(&self, log_r: f64) -> bool {
        log_r > self.inner.ln() && log_r < self.outer.ln()
    }

    fn boundaries(&self) -> Vec<f64> {
        [self.inner, self.outer]
            .into_iter()
            .filter(|r| *r > 0.0 && r.is_finite())
            .collect()
    }
}

/// Radii in `(lo, hi)` where the radial function `g(ln r)` changes sign,
/// located by a log-spaced scan and bisection.
fn sign_changes(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.max(1e-8).ln(), hi.min(1e8).ln());
    let n = 4000;
    let mut out = Vec::new();
    let mut prev = (a, g(a));
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let gx = g(x);
        if prev.1.is_finite() && gx.is_finite() && prev.1.signum() != gx.signum() && prev.1 != 0.0 {
            let (mut l, mut r) = (prev.0, x);
            for _ in 0..80 {
                let mid = 0.5 * (l + r);
                if g(mid).signum() == prev.1.signum() {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            out.push((0.5 * (l + r)).exp());
        }
        prev = (x, gx);
    }
    out
}

/// `int_region |(1/p) ln P_p| Omega`.
pub fn log_bergman_l1(space: &SectionSpace, region: &Region, cfg: &QuadratureConfig) -> Result<IntegrationResult> {
    let model = &space.model;
    let p = f64::from(space.p);
    let mut breaks = region.boundaries();
    if space.is_rotation_invariant() {
        let g = |lr: f64| space.log_bergman_kernel(&Point::new(lr, 0.0));
        breaks.extend(sign_changes(&g, region.inner.max(1e-8), region.outer.min(1e8)));
        let f = |lr: f64| {
            if region.contains_log(lr) {
                (space.log_bergman_kernel(&Point::new(lr, 0.0)) / p).abs()
            } else {
                0.0
            }
        };
        integrate_orbifold_radial(model, &f, cfg, &model.default_partition(), &breaks)
    } else {
        let f = |pt: &Point| {
            if region.contains_log(pt.log_r) {
                (space.log_bergman_kernel(pt) / p).abs()
            } else {
                0.0
            }
        };
        integrate_orbifold_with(model, &f, cfg, &model.default_partition(), &breaks)
    }
}

/// `<(1/p) alpha_p - c1(L), f>` for each grid.
pub fn fs_weak_residuals(space: &SectionSpace, grids: &[PairingGrid]) -> Result<Vec<f64>> {
    let p = f64::from(space.p);
    grids
        .iter()
        .map(|g| Ok(fs_pairing(space, g)? / p - curvature_pairing(&space.model, g)?))
        .collect()
}

/// Normalized radial CDF of `c1(L)`: curvature mass in `|z| <= r` over the degree.
pub fn curvature_cdf(model: &OrbifoldModel, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    model.curvature_mass_within(r) / f64::from(model.degree())
}

/// `sup_r |F_emp(r) - F(r)|` for a weighted sample of radii (mass at
/// infinity given as `f64::INFINITY`).
pub fn radial_cdf_discrepancy(samples: &[(f64, f64)], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = s.iter().map(|x| x.1).sum();
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let r = s[i].0;
        if !r.is_finite() {
            break;
        }
        let f = cdf(r);
        worst = worst.max((acc / total - cdf(r * (1.0 - 1e-14))).abs());
        while i < s.len() && s[i].0 == r {
            acc += s[i].1;
            i += 1;
        }
        worst = worst.max((acc / total - f).abs());
    }
    worst
}

/// Residuals paired with the Bergman-identity defect of the same grid,
/// which bounds the discretization error of the pairing.
pub fn fs_weak_residual_cells(space: &SectionSpace, grids: &[PairingGrid]) -> Result<Vec<Cell>> {
    let p = f64::from(space.p);
    let values = fs_weak_residuals(space, grids)?;
    values
        .into_iter()
        .zip(grids)
        .map(|(value, g)| {
            Ok(Cell {
                value,
                error: fs_identity_residual_on(space, g)? / p,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroRadialStats {
    pub samples: usize,
    pub cdf_discrepancy: f64,
    pub fraction_in_unit_disk: f64,
    pub fraction_in_unit_disk_stderr: f64,
    /// Fraction of zero mass in `0.9 < |z| < 1.1`.
    pub fraction_near_unit_circle: f64,
    pub fraction_near_unit_circle_stderr: f64,
    /// Fraction of zero mass in `|z| < 0.8`.
    pub fraction_in_small_disk: f64,
    pub fraction_in_small_disk_stderr: f64,
}

/// Radial statistics of the sample-averaged normalized zero measure.
pub fn zero_radial_stats(model: &OrbifoldModel, zero_sets: &[ZeroRadii], budget: u32) -> Result<ZeroRadialStats> {
    if zero_sets.is_empty() {
        return Err(Error::Experiment("no zero sets to summarize".into()));
    }
    let w = 1.0 / (zero_sets.len() as f64 * f64::from(budget));
    let mut pooled = Vec::new();
    let mut inside = Vec::with_capacity(zero_sets.len());
    let mut near = Vec::with_capacity(zero_sets.len());
    let mut small = Vec::with_capacity(zero_sets.len());
    let b = f64::from(budget);
    for z in zero_sets {
        let (mut fi, mut fn_, mut fs) = (0.0, 0.0, 0.0);
        for &(r, k) in &z.radii {
            let mass = f64::from(k);
            pooled.push((r, mass * w));
            if r <= 1.0 {
                fi += mass;
            }
            if r > 0.9 && r < 1.1 {
                fn_ += mass;
            }
            if r < 0.8 {
                fs += mass;
            }
        }
        if z.mass_at_infinity > 0 {
            pooled.push((f64::INFINITY, f64::from(z.mass_at_infinity) * w));
        }
        inside.push(fi / b);
        near.push(fn_ / b);
        small.push(fs / b);
    }
    let (i, n, s) = (mean_stderr(&inside), mean_stderr(&near), mean_stderr(&small));
    Ok(ZeroRadialStats {
        samples: zero_sets.len(),
        cdf_discrepancy: radial_cdf_discrepancy(&pooled, &|r| curvature_cdf(model, r)),
        fraction_in_unit_disk: i.mean,
        fraction_in_unit_disk_stderr: i.stderr,
        fraction_near_unit_circle: n.mean,
        fraction_near_unit_circle_stderr: n.stderr,
        fraction_in_small_disk: s.mean,
        fraction_in_small_disk_stderr: s.stderr,
    })
}

/// A table value with its quadrature error estimate or Monte Carlo stderr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub value: f64,
    pub error: f64,
}

impl From<IntegrationResult> for Cell {
    fn from(r: IntegrationResult) -> Self {
        Cell {
            value: r.value,
            error: r.error_estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ConvergenceRow {
    pub p: u32,
    pub l1: Option<Cell>,
    pub fs_residuals: Vec<Cell>,
    /// Sup-discrepancy of the radial CDF; the error is the `1/sqrt(N)` sampling scale.
    pub cdf_discrepancy: Option<Cell>,
    pub mass_near_unit_circle: Option<Cell>,
    pub mass_in_small_disk: Option<Cell>,
}

impl ConvergenceRow {
    pub fn new(p: u32) -> Self {
        ConvergenceRow {
            p,
            ..Default::default()
        }
    }

    pub fn set_zero_stats(&mut self, st: &ZeroRadialStats) {
        self.cdf_discrepancy = Some(Cell {
            value: st.cdf_discrepancy,
            error: 1.0 / (st.samples as f64).sqrt(),
        });
        self.mass_near_unit_circle = Some(Cell {
            value: st.fraction_near_unit_circle,
            error: st.fraction_near_unit_circle_stderr,
        });
        self.mass_in_small_disk = Some(Cell {
            value: st.fraction_in_small_disk,
            error: st.fraction_in_small_disk_stderr,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub region: Region,
    pub bank_labels: Vec<String>,
    rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(region: Region, bank_labels: Vec<String>) -> Self {
        ConvergenceTable {
            region,
            bank_labels,
            rows: Vec::new(),
        }
    }

    /// Insert or replace the row for `row.p`, keeping rows sorted by `p`.
    pub fn insert(&mut self, row: ConvergenceRow) {
        match self.rows.binary_search_by_key(&row.p, |r| r.p) {
            Ok(i) => self.rows[i] = row,
            Err(i) => self.rows.insert(i, row),
        }
    }

    pub fn rows(&self) -> &[ConvergenceRow] {
        &self.rows
    }

    pub fn row(&self, p: u32) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.p == p)
    }

    /// Fraction of bank functions whose `|residual|` is smaller at `p_hi` than at `p_lo`.
    pub fn residual_decay_fraction(&self, p_lo: u32, p_hi: u32) -> Option<f64> {
        let (a, b) = (self.row(p_lo)?, self.row(p_hi)?);
        if a.fs_residuals.is_empty() || a.fs_residuals.len() != b.fs_residuals.len() {
            return None;
        }
        let ok = a
            .fs_residuals
            .iter()
            .zip(&b.fs_residuals)
            .filter(|(x, y)| y.value.abs() < x.value.abs())
            .count();
        Some(ok as f64 / a.fs_residuals.len() as f64)
    }

    /// CSV header and rows: `p`, L1 and its error, zero statistics, then a
    /// value/error pair per bank function.
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let mut head: Vec<String> = [
            "p",
            "l1",
            "l1_err",
            "cdf_discrepancy",
            "cdf_discrepancy_err",
            "mass_near_unit_circle",
            "mass_near_unit_circle_err",
            "mass_in_small_disk",
            "mass_in_small_disk_err",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for l in &self.bank_labels {
            head.push(format!("res[{l}]"));
            head.push(format!("res_err[{l}]"));
        }
        let mut out = vec![head];
        let cell = |c: &Option<Cell>| match c {
            Some(c) => [c.value.to_string(), c.error.to_string()],
            None => [String::new(), String::new()],
        };
        for r in &self.rows {
            let mut rec = vec![r.p.to_string()];
            rec.extend(cell(&r.l1));
            rec.extend(cell(&r.cdf_discrepancy));
            rec.extend(cell(&r.mass_near_unit_circle));
            rec.extend(cell(&r.mass_in_small_disk));
            for k in 0..self.bank_labels.len() {
                rec.extend(cell(&r.fs_residuals.get(k).copied()));
            }
            out.push(rec);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    pub p: u32,
    /// `1 / min_z P_p(z)`: smallest `C` for the lower band.
    pub lower_constant: f64,
    /// `max_z P_p(z) r^2 exp(-2p (max_{B(z,r)} phi - phi(z)))`: smallest
    /// `C` for the upper band.
    pub upper_constant: f64,
    pub min_log_kernel_over_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandFit {
    pub radius: f64,
    pub rows: Vec<BandRow>,
    /// `max_p 1 / min_z P_p` over the whole grid.
    pub c_lower: f64,
    /// Running maximum of `max(lower, upper)` over the grid.
    pub running_constant: Vec<f64>,
    pub c_hat: f64,
    /// Running constant varies by less than 2x over the upper half of the grid.
    pub stable: bool,
    /// Both band inequalities hold at every probe for every `p` in the upper
    /// half of the grid with the constant fitted on the lower half.
    pub holdout_holds: bool,
}

/// Fit the two-sided band
/// `-ln C / p <= (1/p) ln P_p <= ln(C r^-2)/p + 2 (max_{B(z,r)} phi - phi(z))`
/// on radial probes.
pub fn bergman_band_fit(spaces: &[SectionSpace], probes: &[Point], radius: f64) -> Result<BandFit> {
    if spaces.is_empty() || probes.is_empty() {
        return Err(Error::Config("band fit needs spaces and probes".into()));
    }
    let mut rows = Vec::with_capacity(spaces.len());
    for s in spaces {
        let model = &s.model;
        let p = f64::from(s.p);
        let mut min_log = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for z in probes {
            let lp = s.log_bergman_kernel(z);
            min_log = min_log.min(lp);
            // weights are radially nondecreasing, so the max over the ball
            // sits at radius |z| + r
            let phi = model.weight(z);
            let phi_max = model.weight_log((z.radius() + radius).ln());
            upper = upper.max(lp + 2.0 * radius.ln() - 2.0 * p * (phi_max - phi));
        }
        rows.push(BandRow {
            p: s.p,
            lower_constant: (-min_log).exp(),
            upper_constant: upper.exp(),
            min_log_kernel_over_p: min_log / p,
        });
    }
    let c_lower = rows.iter().map(|r| r.lower_constant).fold(0.0, f64::max);
    let mut running = Vec::with_capacity(rows.len());
    let mut acc: f64 = 0.0;
    for r in &rows {
        acc = acc.max(r.lower_constant.max(r.upper_constant));
        running.push(acc);
    }
    let half = rows.len() / 2;
    let upper_half = &running[half..];
    let (lo, hi) = upper_half
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    let fit = if half == 0 { running[0] } else { running[half - 1] };
    let holdout_holds = rows[half..]
        .iter()
        .all(|r| r.lower_constant <= fit && r.upper_constant <= fit);
    Ok(BandFit {
        radius,
        rows,
        c_lower,
        c_hat: acc,
        stable: hi < 2.0 * lo,
        running_constant: running,
        holdout_holds,
    })
}
