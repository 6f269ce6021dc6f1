//! Experiment runner: builds spaces, runs the selected experiments, and
//! writes CSV/JSON artifacts plus a hashed manifest.

use crate::cache::SpaceCache;
use crate::config::{Experiment, ExperimentConfig};
use crate::convergence::{
    bergman_band_fit, fs_weak_residual_cells, log_bergman_l1, zero_radial_stats, BandFit, ConvergenceRow,
    ConvergenceTable, Region,
};
use crate::currents::{
    build_bank, calculus_check, fs_identity_residual_on, lelong_poincare_residual_on, model_grid, reference_sample,
    PairingGrid, TestFunction,
};
use crate::error::{Error, Result};
use crate::hash::{fnv1a64, hex};
use crate::model::{build_model, OrbifoldModel};
use crate::point::Point;
use crate::random_zeros::{
    linear_fit, mean_stderr, monte_carlo, sample_sphere, sample_variance, section_polynomial, section_zeros,
    sequence_experiment, variance_constant_a, BankPairings, MonteCarloRun, RngStream,
};
use crate::section_space::SectionSpace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_NAME: &str = "manifest.json";
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
/// Random sections per `p` in the Lelong-Poincare table.
const LELONG_SAMPLES: usize = 20;
const CALCULUS_ORDERS: [u32; 3] = [2, 3, 5];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub hash: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStatus {
    pub name: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub experiments: Vec<ExperimentStatus>,
    pub files: Vec<FileEntry>,
}

/// Artifacts are produced in memory and written by a single writer at the end.
#[derive(Default)]
struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    summary: BTreeMap<String, Value>,
}

impl Artifacts {
    fn csv(&mut self, name: &str, records: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in records {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Experiment(e.to_string()))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(v)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Deterministic probe points: log-spaced radii in `[e^-3, e^3]` on a golden-angle spiral.
pub fn probe_grid(n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            Point::new(-3.0 + 6.0 * t, (GOLDEN_ANGLE * k as f64).rem_euclid(std::f64::consts::TAU))
        })
        .collect()
}

/// Probes inside `region`, log-spaced in radius.
pub fn region_probes(region: &Region, n: usize) -> Vec<Point> {
    let lo = if region.inner > 0.0 { region.inner } else { 0.05 };
    let hi = if region.outer.is_finite() { region.outer } else { 20.0 };
    (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            Point::new(lo.ln() + (hi / lo).ln() * t, (GOLDEN_ANGLE * k as f64).rem_euclid(std::f64::consts::TAU))
        })
        .collect()
}

struct Context {
    cfg: ExperimentConfig,
    model: Arc<OrbifoldModel>,
    bank: Vec<TestFunction>,
    grids: Vec<PairingGrid>,
    spaces: Vec<SectionSpace>,
    runs: Vec<MonteCarloRun>,
    table: Option<ConvergenceTable>,
}

impl Context {
    fn region(&self) -> Region {
        self.cfg.region.unwrap_or(Region::WHOLE)
    }

    fn labels(&self) -> Vec<String> {
        self.bank.iter().map(TestFunction::label).collect()
    }

    fn table(&mut self) -> &mut ConvergenceTable {
        let region = self.region();
        let labels = self.labels();
        self.table.get_or_insert_with(|| ConvergenceTable::new(region, labels))
    }

    fn row(&mut self, p: u32) -> ConvergenceRow {
        self.table().row(p).cloned().unwrap_or_else(|| ConvergenceRow::new(p))
    }
}

fn build_spaces(cfg: &ExperimentConfig, model: &Arc<OrbifoldModel>, cache: Option<&SpaceCache>) -> Result<Vec<SectionSpace>> {
    let twist = cfg.model.twist_canonical;
    cfg.p_grid
        .par_iter()
        .map(|&p| match cache {
            Some(c) => c.get_or_build(model.clone(), p, twist, &cfg.quadrature).map(|(s, _)| s),
            None => SectionSpace::new(model.clone(), p, twist, &cfg.quadrature),
        })
        .collect()
}

fn bergman(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let probes = probe_grid(ctx.cfg.probes);
    let mut rec = vec![["p", "probe", "re", "im", "kernel", "extremal", "log_kernel_over_p"]
        .map(String::from)
        .to_vec()];
    let mut worst_extremal: f64 = 0.0;
    for s in &ctx.spaces {
        for (k, z) in probes.iter().enumerate() {
            let w = z.to_complex();
            let kern = s.bergman_kernel(z);
            let ext = s.bergman_extremal(z);
            worst_extremal = worst_extremal.max((ext - kern).abs() / kern);
            rec.push(vec![
                s.p.to_string(),
                k.to_string(),
                num(w.re),
                num(w.im),
                num(kern),
                num(ext),
                num(s.log_bergman_kernel(z) / f64::from(s.p)),
            ]);
        }
    }
    out.csv("bergman.csv", rec)?;
    out.summary.insert(
        "bergman".into(),
        json!({ "max_extremal_rel_diff": worst_extremal, "extremal_pass": worst_extremal < 1e-10 }),
    );
    Ok(())
}

fn fs_identity(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let mut rec = vec![["p", "function", "residual"].map(String::from).to_vec()];
    let mut worst: f64 = 0.0;
    for s in &ctx.spaces {
        let res = ctx
            .grids
            .par_iter()
            .map(|g| fs_identity_residual_on(s, g))
            .collect::<Result<Vec<_>>>()?;
        for (g, r) in ctx.grids.iter().zip(res) {
            worst = worst.max(r);
            rec.push(vec![s.p.to_string(), g.f.label(), num(r)]);
        }
    }
    out.csv("fs_identity.csv", rec)?;
    out.summary
        .insert("fs_identity".into(), json!({ "max_residual": worst, "pass": worst < 1e-5 }));
    Ok(())
}

fn weak_convergence(ctx: &mut Context) -> Result<()> {
    let region = ctx.region();
    let rows = ctx
        .spaces
        .par_iter()
        .map(|s| {
            let l1 = log_bergman_l1(s, &region, &ctx.cfg.quadrature)?;
            let res = fs_weak_residual_cells(s, &ctx.grids)?;
            Ok((s.p, l1, res))
        })
        .collect::<Result<Vec<_>>>()?;
    for (p, l1, res) in rows {
        let mut row = ctx.row(p);
        row.l1 = Some(l1.into());
        row.fs_residuals = res;
        ctx.table().insert(row);
    }
    Ok(())
}

fn weak_summary(ctx: &Context, out: &mut Artifacts) {
    let Some(t) = &ctx.table else { return };
    let (Some(first), Some(last)) = (t.rows().first(), t.rows().last()) else {
        return;
    };
    let mut s = json!({ "region": t.region, "p_first": first.p, "p_last": last.p });
    if let (Some(a), Some(b)) = (first.l1, last.l1) {
        s["l1_first"] = json!(a.value);
        s["l1_last"] = json!(b.value);
        s["l1_halved"] = json!(b.value < 0.5 * a.value);
    }
    if let Some(f) = t.residual_decay_fraction(first.p, last.p) {
        s["residual_decay_fraction"] = json!(f);
    }
    out.summary.insert("weak_convergence".into(), s);
}

fn monte_carlo_runs(ctx: &mut Context) -> Result<()> {
    let n = ctx.cfg.monte_carlo.samples;
    let seed = ctx.cfg.monte_carlo.seed;
    let mut runs = Vec::with_capacity(ctx.spaces.len());
    for s in &ctx.spaces {
        let bp = BankPairings::with_grids(s, ctx.grids.clone())?;
        runs.push(monte_carlo(s, &bp, n, seed)?);
    }
    ctx.runs = runs;
    Ok(())
}

fn sz_expectation(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let mut rec = vec![["p", "function", "mean", "stderr", "z", "within_3se"].map(String::from).to_vec()];
    let (mut ok, mut total) = (0usize, 0usize);
    for run in &ctx.runs {
        for (k, f) in ctx.bank.iter().enumerate() {
            let e = mean_stderr(&run.column(k));
            let z = if e.stderr > 0.0 { e.mean / e.stderr } else { 0.0 };
            let within = e.mean.abs() <= 3.0 * e.stderr;
            ok += usize::from(within);
            total += 1;
            rec.push(vec![run.p.to_string(), f.label(), num(e.mean), num(e.stderr), num(z), within.to_string()]);
        }
    }
    out.csv("sz_expectation.csv", rec)?;
    let frac = ok as f64 / total.max(1) as f64;
    out.summary
        .insert("sz_expectation".into(), json!({ "within_3se_fraction": frac, "pass": frac >= 0.95 }));
    Ok(())
}

fn sz_variance(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let mut rec = vec![["p", "function", "var_y", "var_y_over_p2", "var_per_sup_f", "var_per_sup_laplacian"]
        .map(String::from)
        .to_vec()];
    let ps: Vec<f64> = ctx.runs.iter().map(|r| f64::from(r.p)).collect();
    let mut vars: Vec<Vec<f64>> = vec![Vec::new(); ctx.bank.len()];
    for run in &ctx.runs {
        let p = f64::from(run.p);
        for (k, f) in ctx.bank.iter().enumerate() {
            let v = sample_variance(&run.column(k));
            vars[k].push(v);
            rec.push(vec![
                run.p.to_string(),
                f.label(),
                num(v),
                num(v / (p * p)),
                num(v / f.sup_abs()),
                num(v / f.sup_abs_laplacian()),
            ]);
        }
    }
    out.csv("sz_variance.csv", rec)?;
    let mut fit = vec![["function", "slope", "slope_stderr", "ci_low", "ci_high", "normalized_drop"]
        .map(String::from)
        .to_vec()];
    let (mut slope_ok, mut drop_ok) = (0usize, 0usize);
    let last = ps.len().saturating_sub(1);
    for (k, f) in ctx.bank.iter().enumerate() {
        let drop = if ps.len() >= 2 {
            (vars[k][0] / (ps[0] * ps[0])) / (vars[k][last] / (ps[last] * ps[last]))
        } else {
            f64::NAN
        };
        drop_ok += usize::from(drop >= 3.0);
        if ps.len() >= 3 {
            let lf = linear_fit(&ps, &vars[k]);
            slope_ok += usize::from(lf.slope_ci.0 <= 0.0);
            fit.push(vec![
                f.label(),
                num(lf.slope),
                num(lf.slope_stderr),
                num(lf.slope_ci.0),
                num(lf.slope_ci.1),
                num(drop),
            ]);
        } else {
            fit.push(vec![f.label(), String::new(), String::new(), String::new(), String::new(), num(drop)]);
        }
    }
    out.csv("sz_variance_fit.csv", fit)?;
    let n = ctx.bank.len().max(1) as f64;
    out.summary.insert(
        "sz_variance".into(),
        json!({
            "variance_constant_a": variance_constant_a(),
            "slope_nonpositive_fraction": slope_ok as f64 / n,
            "normalized_drop_3x_fraction": drop_ok as f64 / n,
        }),
    );
    Ok(())
}

fn sz_sequence(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let rows = sequence_experiment(
        &ctx.model,
        &ctx.cfg.sequence_p,
        &ctx.bank,
        ctx.cfg.monte_carlo.seed,
        &ctx.cfg.quadrature,
    )?;
    let mut head = vec!["p".to_string()];
    head.extend(ctx.labels());
    let mut rec = vec![head];
    for r in rows {
        let mut line = vec![r.p.to_string()];
        line.extend(r.normalized.iter().map(|&x| num(x)));
        rec.push(line);
    }
    out.csv("sz_sequence.csv", rec)
}

fn zeros_cdf(ctx: &mut Context, out: &mut Artifacts) -> Result<()> {
    let mut rec = vec![[
        "p",
        "samples",
        "failures",
        "cdf_discrepancy",
        "fraction_in_unit_disk",
        "fraction_in_unit_disk_err",
        "mass_near_unit_circle",
        "mass_near_unit_circle_err",
        "mass_in_small_disk",
        "mass_in_small_disk_err",
    ]
    .map(String::from)
    .to_vec()];
    let mut stats = Vec::new();
    for (run, s) in ctx.runs.iter().zip(&ctx.spaces) {
        let zs: Vec<_> = run.records.iter().map(|r| r.zeros.clone()).collect();
        let st = zero_radial_stats(&ctx.model, &zs, s.zero_budget())?;
        rec.push(vec![
            run.p.to_string(),
            st.samples.to_string(),
            run.failures.len().to_string(),
            num(st.cdf_discrepancy),
            num(st.fraction_in_unit_disk),
            num(st.fraction_in_unit_disk_stderr),
            num(st.fraction_near_unit_circle),
            num(st.fraction_near_unit_circle_stderr),
            num(st.fraction_in_small_disk),
            num(st.fraction_in_small_disk_stderr),
        ]);
        stats.push((run.p, st));
    }
    if let Some((p, st)) = stats.last() {
        out.summary.insert("zeros_cdf".into(), json!({ "p": p, "stats": st }));
    }
    for (p, st) in stats {
        let mut row = ctx.row(p);
        row.set_zero_stats(&st);
        ctx.table().insert(row);
    }
    out.csv("zeros_cdf.csv", rec)
}

fn band_fit(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let probes = region_probes(&ctx.region(), ctx.cfg.probes);
    let fit: BandFit = bergman_band_fit(&ctx.spaces, &probes, ctx.cfg.band_radius)?;
    let mut rec = vec![["p", "lower_constant", "upper_constant", "running_constant", "min_log_kernel_over_p"]
        .map(String::from)
        .to_vec()];
    for (r, c) in fit.rows.iter().zip(&fit.running_constant) {
        rec.push(vec![
            r.p.to_string(),
            num(r.lower_constant),
            num(r.upper_constant),
            num(*c),
            num(r.min_log_kernel_over_p),
        ]);
    }
    out.csv("band_fit.csv", rec)?;
    out.summary.insert(
        "band_fit".into(),
        json!({
            "radius": fit.radius,
            "c_lower": fit.c_lower,
            "c_hat": fit.c_hat,
            "stable": fit.stable,
            "holdout_holds": fit.holdout_holds,
        }),
    );
    Ok(())
}

fn current_calculus(ctx: &Context, out: &mut Artifacts) -> Result<()> {
    let t = reference_sample();
    let mut rec = vec![["m", "function", "push_pull", "replay"].map(String::from).to_vec()];
    let mut worst: f64 = 0.0;
    for m in CALCULUS_ORDERS {
        let rows = ctx
            .bank
            .par_iter()
            .map(|f| calculus_check(m, &t, f))
            .collect::<Result<Vec<_>>>()?;
        for r in rows {
            worst = worst.max(r.push_pull).max(r.replay);
            rec.push(vec![m.to_string(), r.function, num(r.push_pull), num(r.replay)]);
        }
    }
    out.csv("current_calculus.csv", rec)?;

    let mut lp = vec![["p", "sample", "function", "residual", "budget_ok"].map(String::from).to_vec()];
    let mut lp_worst: f64 = 0.0;
    let mut budget_ok = true;
    let seed = ctx.cfg.monte_carlo.seed;
    for s in &ctx.spaces {
        let rows = (0..LELONG_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let a = sample_sphere(s.dimension(), &RngStream::new(seed, format!("lelong/p={}/i={i}", s.p)));
                let z = section_zeros(&a, s)?;
                let poly = section_polynomial(&a, s);
                let budget = z.total_mass() == s.zero_budget();
                ctx.grids
                    .iter()
                    .map(|g| Ok((i, g.f.label(), lelong_poincare_residual_on(s, &poly, &z.roots, g)?, budget)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, label, r, b) in rows.into_iter().flatten() {
            lp_worst = lp_worst.max(r);
            budget_ok &= b;
            lp.push(vec![s.p.to_string(), i.to_string(), label, num(r), b.to_string()]);
        }
    }
    out.csv("lelong_poincare.csv", lp)?;
    out.summary.insert(
        "current_calculus".into(),
        json!({
            "max_transport_residual": worst,
            "transport_pass": worst < 1e-8,
            "max_lelong_poincare_residual": lp_worst,
            "lelong_poincare_pass": lp_worst < 1e-5,
            "budget_exact": budget_ok,
        }),
    );
    Ok(())
}

fn compute(cfg: &ExperimentConfig, cache: Option<&SpaceCache>) -> Result<(Artifacts, Vec<ExperimentStatus>)> {
    let model = Arc::new(build_model(&cfg.model)?);
    let bank = cfg.bank.clone().unwrap_or_else(|| build_bank(&model));
    let grids = bank
        .par_iter()
        .map(|f| model_grid(&model, f))
        .collect::<Result<Vec<_>>>()?;
    let experiments = cfg.ordered_experiments();
    let needs_spaces = experiments
        .iter()
        .any(|e| !matches!(e, Experiment::SzSequence));
    let spaces = if needs_spaces { build_spaces(cfg, &model, cache)? } else { Vec::new() };
    let mut ctx = Context {
        cfg: cfg.clone(),
        model,
        bank,
        grids,
        spaces,
        runs: Vec::new(),
        table: None,
    };
    let mut out = Artifacts::default();
    out.json("config.json", &serde_json::from_str::<Value>(&cfg.canonical_json())?)?;
    out.json("bank.json", &ctx.bank)?;
    if experiments.iter().any(Experiment::needs_samples) {
        monte_carlo_runs(&mut ctx)?;
    }
    let mut status = Vec::new();
    for e in &experiments {
        log::info!("running {}", e.name());
        match e {
            Experiment::Bergman => bergman(&ctx, &mut out)?,
            Experiment::FsIdentity => fs_identity(&ctx, &mut out)?,
            Experiment::WeakConvergence => weak_convergence(&mut ctx)?,
            Experiment::SzExpectation => sz_expectation(&ctx, &mut out)?,
            Experiment::SzVariance => sz_variance(&ctx, &mut out)?,
            Experiment::SzSequence => sz_sequence(&ctx, &mut out)?,
            Experiment::ZerosCdf => zeros_cdf(&mut ctx, &mut out)?,
            Experiment::BandFit => band_fit(&ctx, &mut out)?,
            Experiment::CurrentCalculus => current_calculus(&ctx, &mut out)?,
        }
        status.push(ExperimentStatus {
            name: e.name().into(),
            status: "ok".into(),
        });
    }
    if let Some(t) = &ctx.table {
        out.csv("convergence.csv", t.csv_records())?;
    }
    weak_summary(&ctx, &mut out);
    let summary = std::mem::take(&mut out.summary);
    out.json("summary.json", &summary)?;
    Ok((out, status))
}

/// Write `files` into `dir`, removing everything written on failure.
fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<FileEntry>> {
    let mut written: Vec<PathBuf> = Vec::new();
    let mut entries = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            return Err(e.into());
        }
        written.push(path);
        entries.push(FileEntry {
            path: name.clone(),
            hash: hex(fnv1a64(bytes)),
            bytes: bytes.len() as u64,
        });
    }
    Ok(entries)
}

/// Apply command-line overrides to a validated config.
pub fn apply_options(mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig> {
    if let Some(out) = &opts.out {
        cfg.outputs = out.clone();
    }
    if let Some(seed) = opts.seed {
        cfg.monte_carlo.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run a config and write its artifacts and manifest into `cfg.outputs`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let cfg = apply_options(cfg.clone(), opts)?;
    let started = now();
    let cache = match &opts.cache {
        Some(d) => Some(SpaceCache::new(d)?),
        None => None,
    };
    let work = || compute(&cfg, cache.as_ref());
    let (artifacts, experiments) = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let dir = &cfg.outputs;
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("outputs {} not writable: {e}", dir.display())))?;
    let files = match write_all(dir, &artifacts.files) {
        Ok(f) => f,
        Err(e) => {
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(e);
        }
    };
    let manifest = RunManifest {
        config_hash: hex(cfg.hash()),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_unix: started,
        finished_unix: now(),
        experiments,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(dir.join(MANIFEST_NAME), bytes)?;
    Ok(manifest)
}

/// Files whose content hash no longer matches the manifest, or that are missing.
pub fn verify(manifest_path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    Ok(manifest
        .files
        .iter()
        .filter(|f| match fs::read(dir.join(&f.path)) {
            Ok(b) => hex(fnv1a64(&b)) != f.hash,
            Err(_) => true,
        })
        .map(|f| f.path.clone())
        .collect())
}
