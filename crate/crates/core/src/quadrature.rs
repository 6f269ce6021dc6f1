//! Fixed-panel quadrature on the polar grids of the model charts.
//!
//! Radial integrals use Gauss-Legendre per panel, angles use the uniform
//! trapezoid rule (spectrally accurate for periodic integrands). Every
//! radius where an integrand may lose smoothness must be a panel breakpoint.

use crate::error::{Error, Result};
use crate::model::OrbifoldModel;
use crate::point::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule, computed once per node count.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Radial panels of a polar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panelization {
    pub breakpoints: Vec<f64>,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Endpoint grading exponent `q` of a panel starting at `r = 0`: the
    /// panel `[0, b]` is mapped from `t in [0, 1]` by `r = b t^q`.
    pub grading: u32,
}

impl Panelization {
    pub fn new(breakpoints: Vec<f64>, radial_nodes: usize, angular_nodes: usize) -> Result<Self> {
        let p = Panelization {
            breakpoints,
            radial_nodes,
            angular_nodes,
            grading: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_grading(mut self, q: u32) -> Self {
        self.grading = q.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.len() < 2 {
            return Err(Error::Config("panelization needs at least two breakpoints".into()));
        }
        if self.breakpoints.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::Config("breakpoints must be finite and non-negative".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("breakpoints must be strictly increasing".into()));
        }
        if self.radial_nodes < 4 || self.angular_nodes < 4 {
            return Err(Error::Config("node counts must be at least 4".into()));
        }
        Ok(())
    }

    /// The same panels with every node count halved (floored at 4).
    pub fn coarsened(&self) -> Self {
        Panelization {
            breakpoints: self.breakpoints.clone(),
            radial_nodes: (self.radial_nodes / 2).max(4),
            angular_nodes: (self.angular_nodes / 2).max(4),
            grading: self.grading,
        }
    }

    pub fn refined(&self) -> Self {
        Panelization {
            breakpoints: self.breakpoints.clone(),
            radial_nodes: self.radial_nodes * 2,
            angular_nodes: self.angular_nodes * 2,
            grading: self.grading,
        }
    }

    /// Radial nodes `(r, w)` such that `sum w g(r)` approximates the
    /// integral of `g` over `[b_0, b_last]`.
    pub fn radial_rule(&self) -> Vec<(f64, f64)> {
        radial_rule(&self.breakpoints, self.radial_nodes, self.grading)
    }
}

pub(crate) fn radial_rule(breaks: &[f64], n: usize, grading: u32) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::cached(n);
    let mut out = Vec::with_capacity(n * breaks.len());
    for (i, w) in breaks.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if i == 0 && a == 0.0 && grading > 1 {
            let q = grading as i32;
            let qf = f64::from(grading);
            for (&x, &wt) in gl.nodes.iter().zip(&gl.weights) {
                let t = 0.5 * (x + 1.0);
                let r = b * t.powi(q);
                let jac = b * qf * t.powi(q - 1) * 0.5;
                out.push((r, wt * jac));
            }
        } else {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&x, &wt) in gl.nodes.iter().zip(&gl.weights) {
                out.push((mid + half * x, wt * half));
            }
        }
    }
    out
}

/// Subdivide `[a, b]` so that no panel exceeds `max_len`, keeping `extra`
/// points inside the interval as breakpoints.
pub(crate) fn breakpoints_between(a: f64, b: f64, extra: &[f64], max_len: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = vec![a, b];
    pts.extend(extra.iter().copied().filter(|&x| x > a && x < b));
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let pieces = if max_len.is_finite() && max_len > 0.0 {
            (len / max_len).ceil().max(1.0) as usize
        } else {
            1
        };
        for k in 1..=pieces {
            out.push(w[0] + len * k as f64 / pieces as f64);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
}

/// Rounding floor added to refinement differences so that results at
/// machine precision still carry an honest error bar.
fn rounding_floor(abs_sum: f64) -> f64 {
    64.0 * f64::EPSILON * abs_sum
}

fn polar_sum(f: &dyn Fn(Complex64) -> f64, p: &Panelization) -> Result<(f64, f64)> {
    let n = p.angular_nodes;
    let h = 2.0 * PI / n as f64;
    let mut total = 0.0;
    let mut abs_total = 0.0;
    for (r, w) in p.radial_rule() {
        let mut ring = 0.0;
        let mut ring_abs = 0.0;
        for k in 0..n {
            let theta = h * k as f64;
            let v = f(Complex64::from_polar(r, theta));
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    radius: r,
                    theta,
                });
            }
            ring += v;
            ring_abs += v.abs();
        }
        total += w * r * h * ring;
        abs_total += (w * r * h).abs() * ring_abs;
    }
    Ok((total, abs_total))
}

/// Integral of `f` over the disk or annulus covered by `panelization`,
/// with respect to the area measure of the chart coordinate.
pub fn integrate_chart(
    f: &dyn Fn(Complex64) -> f64,
    panelization: &Panelization,
) -> Result<IntegrationResult> {
    panelization.validate()?;
    let (fine, abs_sum) = polar_sum(f, panelization)?;
    let (coarse, _) = polar_sum(f, &panelization.coarsened())?;
    Ok(IntegrationResult {
        value: fine,
        error_estimate: (fine - coarse).abs() + rounding_floor(abs_sum),
    })
}

/// `2 pi int f(r) r dr` over the panels: the area integral of a radial
/// function.
pub fn integrate_radial(f: &dyn Fn(f64) -> f64, panelization: &Panelization) -> Result<IntegrationResult> {
    panelization.validate()?;
    let run = |p: &Panelization| -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut abs_total = 0.0;
        for (r, w) in p.radial_rule() {
            let v = f(r);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    radius: r,
                    theta: 0.0,
                });
            }
            total += 2.0 * PI * w * r * v;
            abs_total += (2.0 * PI * w * r * v).abs();
        }
        Ok((total, abs_total))
    };
    let (fine, abs_sum) = run(panelization)?;
    let (coarse, _) = run(&panelization.coarsened())?;
    Ok(IntegrationResult {
        value: fine,
        error_estimate: (fine - coarse).abs() + rounding_floor(abs_sum),
    })
}

/// Partition of unity between the affine chart and the chart at infinity,
/// expressed in the downstairs radius `|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partition {
    /// Indicator of `|x| < radius` for the affine chart.
    Sharp { radius: f64 },
    /// Smooth step in `ln |x|` from 1 at `inner` to 0 at `outer`.
    Smooth { inner: f64, outer: f64 },
}

impl Partition {
    fn radii(&self) -> (f64, f64) {
        match *self {
            Partition::Sharp { radius } => (radius, radius),
            Partition::Smooth { inner, outer } => (inner, outer),
        }
    }

    /// Weight of the affine chart at downstairs log-radius `log_r`.
    pub fn affine_weight(&self, log_r: f64) -> f64 {
        match *self {
            Partition::Sharp { radius } => {
                if log_r < radius.ln() {
                    1.0
                } else {
                    0.0
                }
            }
            Partition::Smooth { inner, outer } => {
                let t = (log_r - inner.ln()) / (outer.ln() - inner.ln());
                1.0 - smoothstep(t)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.radii();
        if !(a > 0.0 && b >= a && b.is_finite()) {
            return Err(Error::Config(format!("invalid partition of unity {self:?}")));
        }
        Ok(())
    }
}

/// Septic smootherstep: `C^3`, 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
    }
}

/// Node counts and extra breakpoints for integrals over a whole model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Additional downstairs radii that must be panel boundaries.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: 64,
            angular_nodes: 256,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 4 || self.angular_nodes < 4 {
            return Err(Error::Config("quadrature node counts must be at least 4".into()));
        }
        if self.breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::Config("quadrature breakpoints must be positive radii".into()));
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        QuadratureConfig {
            radial_nodes: (self.radial_nodes / 2).max(4),
            angular_nodes: (self.angular_nodes / 2).max(4),
            breakpoints: self.breakpoints.clone(),
        }
    }
}

/// The nodes of one orbifold chart, mapped to downstairs points.
///
/// The weight of a radial node already contains `1/m`, the partition
/// function, the base form and the polar Jacobian, so that
/// `sum_radial w * mean_angular f` is the chart's share of
/// `int_X f Omega`.
#[derive(Debug, Clone)]
pub struct ChartGrid {
    pub label: String,
    pub isotropy: u32,
    pub radial: Vec<(f64, f64)>,
    pub angles: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OrbifoldGrid {
    pub charts: Vec<ChartGrid>,
}

impl OrbifoldGrid {
    pub fn new(
        model: &OrbifoldModel,
        cfg: &QuadratureConfig,
        partition: &Partition,
        extra_breaks: &[f64],
    ) -> Result<Self> {
        cfg.validate()?;
        partition.validate()?;
        let m = model.cover_order();
        let mf = f64::from(m);
        let (inner, outer) = partition.radii();
        let mut down_breaks: Vec<f64> = model.singular_radii();
        down_breaks.extend_from_slice(&cfg.breakpoints);
        down_breaks.extend_from_slice(extra_breaks);
        down_breaks.push(inner);
        down_breaks.push(outer);

        let mut charts = Vec::with_capacity(2);
        for at_infinity in [false, true] {
            // Upstairs radius of the chart domain covered by the partition.
            let reach = if at_infinity { inner.powf(-1.0 / mf) } else { outer.powf(1.0 / mf) };
            let mut up: Vec<f64> = down_breaks
                .iter()
                .map(|&b| if at_infinity { b.powf(-1.0 / mf) } else { b.powf(1.0 / mf) })
                .collect();
            for frac in [1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5, 0.75] {
                up.push(reach * frac);
            }
            let breaks = breakpoints_between(0.0, reach, &up, f64::INFINITY);
            let rule = radial_rule(&breaks, cfg.radial_nodes, 2);
            let mut radial = Vec::with_capacity(rule.len());
            for (ry, w) in rule {
                let log_ry = ry.ln();
                let log_rx = if at_infinity { -mf * log_ry } else { mf * log_ry };
                let chi = partition.affine_weight(log_rx);
                let chi = if at_infinity { 1.0 - chi } else { chi };
                if chi == 0.0 {
                    continue;
                }
                // Upstairs base form m * omega_FS(y).
                let omega = mf / (PI * (1.0 + ry * ry).powi(2));
                radial.push((log_rx, chi * omega * 2.0 * PI * ry * w / mf));
            }
            let n = cfg.angular_nodes;
            let sign = if at_infinity { -mf } else { mf };
            let angles = (0..n).map(|k| sign * 2.0 * PI * k as f64 / n as f64).collect();
            charts.push(ChartGrid {
                label: if at_infinity { "infinity".into() } else { "affine".into() },
                isotropy: m,
                radial,
                angles,
            });
        }
        Ok(OrbifoldGrid { charts })
    }

    /// Integral of `f` against the base form, `f` evaluated at downstairs points.
    pub fn integrate(&self, f: &dyn Fn(&Point) -> f64) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut abs_total = 0.0;
        for chart in &self.charts {
            let inv_n = 1.0 / chart.angles.len() as f64;
            for &(log_r, w) in &chart.radial {
                let mut ring = 0.0;
                let mut ring_abs = 0.0;
                for &theta in &chart.angles {
                    let pt = Point::new(log_r, theta);
                    let v = f(&pt);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            value: v,
                            radius: log_r.exp(),
                            theta,
                        });
                    }
                    ring += v;
                    ring_abs += v.abs();
                }
                total += w * ring * inv_n;
                abs_total += w.abs() * ring_abs * inv_n;
            }
        }
        Ok((total, abs_total))
    }

    /// Same as [`OrbifoldGrid::integrate`] for a radial integrand given as a
    /// function of `ln |x|`.
    pub fn integrate_radial(&self, f: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut abs_total = 0.0;
        for chart in &self.charts {
            for &(log_r, w) in &chart.radial {
                let v = f(log_r);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        value: v,
                        radius: log_r.exp(),
                        theta: 0.0,
                    });
                }
                total += w * v;
                abs_total += (w * v).abs();
            }
        }
        Ok((total, abs_total))
    }
}

/// Integral over the orbifold of a global function against the base form:
/// the sum over charts of `1/m_i` times the upstairs integrals of the
/// pulled-back partition functions.
pub fn integrate_orbifold(
    model: &OrbifoldModel,
    f: &dyn Fn(&Point) -> f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult> {
    integrate_orbifold_with(model, f, cfg, &model.default_partition(), &[])
}

pub fn integrate_orbifold_with(
    model: &OrbifoldModel,
    f: &dyn Fn(&Point) -> f64,
    cfg: &QuadratureConfig,
    partition: &Partition,
    extra_breaks: &[f64],
) -> Result<IntegrationResult> {
    let (fine, abs_sum) = OrbifoldGrid::new(model, cfg, partition, extra_breaks)?.integrate(f)?;
    let (coarse, _) = OrbifoldGrid::new(model, &cfg.halved(), partition, extra_breaks)?.integrate(f)?;
    Ok(IntegrationResult {
        value: fine,
        error_estimate: (fine - coarse).abs() + rounding_floor(abs_sum),
    })
}

/// Radial variant of [`integrate_orbifold_with`]; `f` takes `ln |x|`.
pub fn integrate_orbifold_radial(
    model: &OrbifoldModel,
    f: &dyn Fn(f64) -> f64,
    cfg: &QuadratureConfig,
    partition: &Partition,
    extra_breaks: &[f64],
) -> Result<IntegrationResult> {
    let (fine, abs_sum) = OrbifoldGrid::new(model, cfg, partition, extra_breaks)?.integrate_radial(f)?;
    let (coarse, _) =
        OrbifoldGrid::new(model, &cfg.halved(), partition, extra_breaks)?.integrate_radial(f)?;
    Ok(IntegrationResult {
        value: fine,
        error_estimate: (fine - coarse).abs() + rounding_floor(abs_sum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 is the exactness limit for 8 nodes
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rules_are_accurate() {
        let gl = GaussLegendre::new(128);
        let v = gl.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn zero_integrand() {
        let p = Panelization::new(vec![0.0, 1.0, 3.0], 16, 16).unwrap();
        let r = integrate_chart(&|_| 0.0, &p).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn fubini_study_density_has_unit_mass() {
        // closed form of the radial CDF: r^2/(1+r^2)
        let rmax = 1e3;
        let p = Panelization::new(breakpoints_between(0.0, rmax, &[1.0, 10.0, 100.0], f64::INFINITY), 64, 8)
            .unwrap();
        let r = integrate_chart(&|z| 1.0 / (PI * (1.0 + z.norm_sqr()).powi(2)), &p).unwrap();
        let exact = rmax * rmax / (1.0 + rmax * rmax);
        assert!((r.value - exact).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn gamma_moment() {
        // int |z|^2 e^{-|z|^2} dA / pi = Gamma(2) = 1
        let p = Panelization::new(breakpoints_between(0.0, 12.0, &[], 1.5), 32, 8).unwrap();
        let r = integrate_radial(&|r| r * r * (-r * r).exp() / PI, &p).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
        assert!(r.error_estimate < 1e-10);
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let p = Panelization::new(vec![0.0, 1.0], 8, 8).unwrap();
        match integrate_chart(&|_| f64::NAN, &p) {
            Err(Error::NonFinite { .. }) => {}
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_panelization() {
        assert!(Panelization::new(vec![0.0, 1.0, 1.0], 8, 8).is_err());
        assert!(Panelization::new(vec![0.0, 1.0], 2, 8).is_err());
    }

    #[test]
    fn graded_panel_resolves_log_singularity() {
        // int_0^1 r log(r) dr = -1/4
        let p = Panelization::new(vec![0.0, 1.0], 32, 4).unwrap().with_grading(3);
        let v: f64 = p.radial_rule().iter().map(|&(r, w)| w * r * r.ln()).sum();
        assert!((v + 0.25).abs() < 1e-13);
    }
}
