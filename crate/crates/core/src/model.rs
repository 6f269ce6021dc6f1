//! The four model curves: round sphere, football orbifold, sphere with a
//! curvature circle, and sphere with a flat cap.
//!
//! All weights are the local weights `phi` of the metric on `L` in the
//! affine coordinate (`|e|^2 = exp(-2 phi)`), evaluated from `ln |z|` so
//! that they stay finite in the chart at infinity. Curvature is
//! `c1(L) = dd^c phi` with `dd^c u = (1/2pi) Laplacian(u) dA`.

use crate::error::{Error, Result};
use crate::hash::Fnv1a64;
use crate::point::{log1p_exp, log1p_r2, Point};
use crate::quadrature::{integrate_orbifold_radial, QuadratureConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    FsSphere,
    Football,
    CircleMass,
    FlatCap,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::FsSphere => "FS_SPHERE",
            ModelKind::Football => "FOOTBALL",
            ModelKind::CircleMass => "CIRCLE_MASS",
            ModelKind::FlatCap => "FLAT_CAP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "one")]
    pub bundle_degree: u32,
    #[serde(default)]
    pub twist_canonical: bool,
}

fn one() -> u32 {
    1
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        let bundle_degree = if kind == ModelKind::CircleMass { 2 } else { 1 };
        ModelSpec {
            kind,
            m: 1,
            c: None,
            bundle_degree,
            twist_canonical: false,
        }
    }

    pub fn fs_sphere() -> Self {
        Self::new(ModelKind::FsSphere)
    }

    pub fn football(m: u32) -> Self {
        ModelSpec {
            m,
            ..Self::new(ModelKind::Football)
        }
    }

    pub fn circle_mass() -> Self {
        Self::new(ModelKind::CircleMass)
    }

    pub fn flat_cap(c: f64) -> Self {
        ModelSpec {
            c: Some(c),
            ..Self::new(ModelKind::FlatCap)
        }
    }

    pub fn with_degree(mut self, d: u32) -> Self {
        self.bundle_degree = d;
        self
    }

    pub fn twisted(mut self) -> Self {
        self.twist_canonical = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("{}: {msg}", self.kind.name())));
        if self.m == 0 {
            return bad("isotropy order m must be at least 1");
        }
        if self.kind != ModelKind::Football && self.m != 1 {
            return bad("m must be 1 unless kind = FOOTBALL");
        }
        match (self.kind, self.c) {
            (ModelKind::FlatCap, None) => return bad("FLAT_CAP needs a cap level c"),
            (ModelKind::FlatCap, Some(c)) if !(c > 0.0 && c.is_finite()) => {
                return bad("cap level c must be a positive real")
            }
            (ModelKind::FlatCap, _) => {}
            (_, Some(_)) => return bad("c must be unset unless kind = FLAT_CAP"),
            (_, None) => {}
        }
        if self.bundle_degree == 0 {
            return bad("bundle_degree must be at least 1");
        }
        match self.kind {
            ModelKind::CircleMass if self.bundle_degree != 2 => {
                return bad("the circle-mass weight has degree 2")
            }
            ModelKind::FlatCap if self.bundle_degree != 1 => return bad("the flat-cap weight has degree 1"),
            ModelKind::Football if self.twist_canonical => {
                return bad("twist_canonical is not allowed on FOOTBALL")
            }
            _ => {}
        }
        Ok(())
    }

    /// FNV-1a-64 of the canonical JSON form, used in cache keys.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv1a64::new();
        h.update(serde_json::to_string(self).expect("model spec serializes").as_bytes());
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SingularKind {
    CircleUniform,
    CapBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularPart {
    pub kind: SingularKind,
    pub radius: f64,
    pub mass: f64,
}

/// Curvature atom: uniform mass on the circle `|z| = radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureAtom {
    pub radius: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricWeight {
    /// Human-readable description of the smooth part of the weight.
    pub smooth_part: String,
    pub singular_parts: Vec<SingularPart>,
    pub curvature_atoms: Vec<CurvatureAtom>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartDomain {
    /// Open disk of the given radius in the chart coordinate.
    Disk { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chart {
    pub label: String,
    pub isotropy_order: u32,
    /// Exponent of the cover map `w -> w^m` onto the affine coordinate of
    /// the underlying sphere.
    pub cover_exponent: u32,
    pub domain: ChartDomain,
}

/// A point given in one of the charts of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: usize,
    pub coord: Complex64,
}

impl ChartPoint {
    pub fn affine(z: Complex64) -> Self {
        ChartPoint { chart: 0, coord: z }
    }

    pub fn at_infinity(w: Complex64) -> Self {
        ChartPoint { chart: 1, coord: w }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbifoldModel {
    pub spec: ModelSpec,
    pub charts: Vec<Chart>,
    pub weight: MetricWeight,
    /// Radius `r_c` of the cap boundary for FLAT_CAP.
    cap_radius: Option<f64>,
}

pub fn build_model(spec: &ModelSpec) -> Result<OrbifoldModel> {
    spec.validate()?;
    let m = spec.m;
    let charts = ["affine", "infinity"]
        .iter()
        .map(|label| Chart {
            label: (*label).into(),
            isotropy_order: m,
            cover_exponent: m,
            domain: ChartDomain::Disk { radius: f64::INFINITY },
        })
        .collect();
    let d = spec.bundle_degree;
    let (smooth_part, cap_radius) = match spec.kind {
        ModelKind::FsSphere => (format!("({d}/2) log(1+|z|^2)"), None),
        ModelKind::Football => (format!("({}/2) log(1+|x|^(2/{m}))", d * m), None),
        ModelKind::CircleMass => ("(1/2) log(1+|z|^2) + max(log|z|, 0)".into(), None),
        ModelKind::FlatCap => {
            let c = spec.c.expect("validated");
            ("(1/2) max(log(1+|z|^2), c)".to_string(), Some(c.exp_m1().sqrt()))
        }
    };
    let mut model = OrbifoldModel {
        spec: spec.clone(),
        charts,
        weight: MetricWeight {
            smooth_part,
            singular_parts: Vec::new(),
            curvature_atoms: Vec::new(),
        },
        cap_radius,
    };
    match spec.kind {
        ModelKind::CircleMass => {
            model.weight.singular_parts.push(SingularPart {
                kind: SingularKind::CircleUniform,
                radius: 1.0,
                mass: 1.0,
            });
            model.weight.curvature_atoms.push(CurvatureAtom { radius: 1.0, mass: 1.0 });
        }
        ModelKind::FlatCap => {
            // The atom is whatever the smooth density leaves of the degree.
            let rc = cap_radius.expect("flat cap radius");
            let smooth = model.smooth_curvature_mass(&QuadratureConfig::default())?;
            let mass = f64::from(d) - smooth;
            model.weight.singular_parts.push(SingularPart {
                kind: SingularKind::CapBoundary,
                radius: rc,
                mass,
            });
            model.weight.curvature_atoms.push(CurvatureAtom { radius: rc, mass });
        }
        _ => {}
    }
    Ok(model)
}

impl OrbifoldModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn degree(&self) -> u32 {
        self.spec.bundle_degree
    }

    /// Order `m` of the cyclic isotropy at `0` and `infinity`.
    pub fn cover_order(&self) -> u32 {
        self.spec.m
    }

    pub fn cap_radius(&self) -> Option<f64> {
        self.cap_radius
    }

    /// Radii of circles carrying curvature atoms or weight kinks.
    pub fn singular_radii(&self) -> Vec<f64> {
        match self.spec.kind {
            ModelKind::CircleMass => vec![1.0],
            ModelKind::FlatCap => vec![self.cap_radius.expect("flat cap")],
            _ => Vec::new(),
        }
    }

    /// Swap radius between the affine chart and the chart at infinity.
    pub fn swap_radius(&self) -> f64 {
        if self.singular_radii().iter().any(|r| (r - 1.0).abs() < 1e-9) {
            2.0
        } else {
            1.0
        }
    }

    pub fn default_partition(&self) -> crate::quadrature::Partition {
        crate::quadrature::Partition::Sharp {
            radius: self.swap_radius(),
        }
    }

    /// The weight `phi` of `L` at `|z| = exp(log_r)`.
    pub fn weight_log(&self, log_r: f64) -> f64 {
        let d = f64::from(self.spec.bundle_degree);
        match self.spec.kind {
            ModelKind::FsSphere => 0.5 * d * log1p_r2(log_r),
            ModelKind::Football => {
                let m = f64::from(self.spec.m);
                0.5 * d * m * log1p_exp(2.0 * log_r / m)
            }
            ModelKind::CircleMass => 0.5 * log1p_r2(log_r) + log_r.max(0.0),
            ModelKind::FlatCap => 0.5 * log1p_r2(log_r).max(self.spec.c.expect("validated")),
        }
    }

    pub fn weight(&self, pt: &Point) -> f64 {
        self.weight_log(pt.log_r)
    }

    /// `r dphi/dr` on either side of a kink; `above` selects the outer limit.
    pub fn weight_flux(&self, log_r: f64, above: bool) -> f64 {
        let d = f64::from(self.spec.bundle_degree);
        let fs = |l: f64| {
            let t = 2.0 * l;
            // r^2/(1+r^2) from log r
            if t > 0.0 {
                1.0 / (1.0 + (-t).exp())
            } else {
                t.exp() / (1.0 + t.exp())
            }
        };
        match self.spec.kind {
            ModelKind::FsSphere => d * fs(log_r),
            ModelKind::Football => {
                let m = f64::from(self.spec.m);
                d * fs(log_r / m)
            }
            ModelKind::CircleMass => {
                let jump = if log_r > 0.0 || (log_r == 0.0 && above) { 1.0 } else { 0.0 };
                fs(log_r) + jump
            }
            ModelKind::FlatCap => {
                let lc = self.cap_radius.expect("flat cap").ln();
                if log_r > lc || (log_r == lc && above) {
                    fs(log_r)
                } else {
                    0.0
                }
            }
        }
    }

    /// `ln` of the base area density (unit total mass) w.r.t. `dA` in the
    /// affine coordinate.
    pub fn log_base_density(&self, log_r: f64) -> f64 {
        match self.spec.kind {
            ModelKind::Football => {
                let m = f64::from(self.spec.m);
                -(m * PI).ln() - (2.0 - 2.0 / m) * log_r - 2.0 * log1p_exp(2.0 * log_r / m)
            }
            _ => -PI.ln() - 2.0 * log1p_r2(log_r),
        }
    }

    /// Density of the smooth part of `c1(L)` w.r.t. `dA`.
    pub fn curvature_density(&self, log_r: f64) -> f64 {
        let d = f64::from(self.spec.bundle_degree);
        match self.spec.kind {
            ModelKind::FsSphere | ModelKind::Football => d * self.log_base_density(log_r).exp(),
            ModelKind::CircleMass => self.log_base_density(log_r).exp(),
            ModelKind::FlatCap => {
                if log_r > self.cap_radius.expect("flat cap").ln() {
                    self.log_base_density(log_r).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Smooth curvature density relative to the base form.
    pub fn curvature_ratio(&self, log_r: f64) -> f64 {
        let d = f64::from(self.spec.bundle_degree);
        match self.spec.kind {
            ModelKind::FsSphere | ModelKind::Football => d,
            ModelKind::CircleMass => 1.0,
            ModelKind::FlatCap => {
                if log_r > self.cap_radius.expect("flat cap").ln() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn smooth_curvature_mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let r = integrate_orbifold_radial(
            self,
            &|l| self.curvature_ratio(l),
            cfg,
            &self.default_partition(),
            &[],
        )?;
        Ok(r.value)
    }

    pub fn atom_mass(&self) -> f64 {
        self.weight.curvature_atoms.iter().map(|a| a.mass).sum()
    }

    /// Curvature mass of `c1(L)` inside the closed disk `|z| <= r`.
    pub fn curvature_mass_within(&self, r: f64) -> f64 {
        self.weight_flux(r.ln(), true)
    }

    /// Upstairs weight of the football in the cover coordinate `y`, `x = y^m`.
    pub fn upstairs_weight(&self, y: &Point) -> f64 {
        let d = f64::from(self.spec.bundle_degree);
        let m = f64::from(self.spec.m);
        0.5 * d * m * log1p_r2(y.log_r)
    }

    /// Upstairs base density `m omega_FS(y)` of the football cover.
    pub fn upstairs_base_density(&self, y: &Point) -> f64 {
        let m = f64::from(self.spec.m);
        m / (PI * (2.0 * log1p_r2(y.log_r)).exp())
    }

    pub fn chart_point_to_point(&self, cp: &ChartPoint) -> Result<Point> {
        if cp.chart >= self.charts.len() {
            return Err(Error::Domain(format!("no chart with index {}", cp.chart)));
        }
        if !(cp.coord.re.is_finite() && cp.coord.im.is_finite()) {
            return Err(Error::Domain(format!(
                "point {} lies outside chart '{}'",
                cp.coord, self.charts[cp.chart].label
            )));
        }
        let m = self.charts[cp.chart].cover_exponent;
        let w = Point::from_complex(cp.coord).power(m);
        Ok(if cp.chart == 0 {
            w
        } else {
            Point::new(-w.log_r, -w.theta)
        })
    }
}

/// `|Gamma_x|` at a chart point: `m` at the football's two cone points,
/// 1 elsewhere.
pub fn isotropy_order(model: &OrbifoldModel, point: &ChartPoint) -> Result<u32> {
    model.chart_point_to_point(point)?;
    let chart = &model.charts[point.chart];
    Ok(if point.coord == Complex64::new(0.0, 0.0) {
        chart.isotropy_order
    } else {
        1
    })
}

/// Smooth curvature integral plus atom masses.
pub fn curvature_total_mass(model: &OrbifoldModel) -> Result<f64> {
    Ok(model.smooth_curvature_mass(&QuadratureConfig::default())? + model.atom_mass())
}
